"""NumPy fallback for the Monte Carlo kernel, vectorized over the trials of a chunk.

Same arguments and semantics as the compiled ``simulate_chunk``.
"""

import numpy as np


def simulate_chunk(
    eps, theta, theta_hat, noise_ar, noise_ma, noise_gain,
    indptr, indices, wdata, gamma, run_h0, run_h1,
    record_row, count_fa, count_miss, sample_row, samples_h0, samples_h1,
):
    n_trials, n_steps, n_agents = eps.shape
    p, q = noise_ar.shape[1], noise_ma.shape[1]
    w = np.zeros((n_agents, n_agents))
    for i in range(n_agents):
        w[i, indices[indptr[i]:indptr[i + 1]]] = wdata[indptr[i]:indptr[i + 1]]

    noise = np.zeros((n_steps, n_trials, n_agents))
    y0hat = np.zeros_like(noise)
    y1hat = np.zeros_like(noise)
    l0 = np.zeros((n_trials, n_agents))
    l1 = np.zeros((n_trials, n_agents))
    for k in range(n_steps):
        acc = eps[:, k, :].copy()
        for j in range(min(q, k)):
            acc += noise_ma[:, j] * eps[:, k - 1 - j, :]
        nk = noise_gain * acc
        for j in range(min(p, k)):
            nk += noise_ar[:, j] * noise[k - 1 - j]
        noise[k] = nk
        th = theta_hat[k]
        r = record_row[k]
        s = sample_row[k]
        if run_h0:
            acc = nk.copy()
            for j in range(min(p, k)):
                acc -= noise_ar[:, j] * noise[k - 1 - j]
            yh = acc / noise_gain
            for j in range(min(q, k)):
                yh -= noise_ma[:, j] * y0hat[k - 1 - j]
            y0hat[k] = yh
            l0 = l0 @ w.T + (th * yh - 0.5 * th * th)
            if r >= 0:
                count_fa[r] += np.count_nonzero(l0 >= gamma, axis=0)
            if s >= 0:
                samples_h0[:, s, :] = l0
        if run_h1:
            acc = theta[k] + nk
            for j in range(min(p, k)):
                acc -= noise_ar[:, j] * (theta[k - 1 - j] + noise[k - 1 - j])
            yh = acc / noise_gain
            for j in range(min(q, k)):
                yh -= noise_ma[:, j] * y1hat[k - 1 - j]
            y1hat[k] = yh
            l1 = l1 @ w.T + (th * yh - 0.5 * th * th)
            if r >= 0:
                count_miss[r] += np.count_nonzero(l1 < gamma, axis=0)
            if s >= 0:
                samples_h1[:, s, :] = l1
