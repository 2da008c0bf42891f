# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled Monte Carlo kernel: noise synthesis, whitening and RCD for a chunk of trials."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def simulate_chunk(
    const double[:, :, ::1] eps,
    const double[:, ::1] theta,
    const double[:, ::1] theta_hat,
    const double[:, ::1] noise_ar,
    const double[:, ::1] noise_ma,
    const double[::1] noise_gain,
    const cnp.int64_t[::1] indptr,
    const cnp.int64_t[::1] indices,
    const double[::1] wdata,
    double gamma,
    bint run_h0,
    bint run_h1,
    const cnp.int64_t[::1] record_row,
    cnp.int64_t[:, ::1] count_fa,
    cnp.int64_t[:, ::1] count_miss,
    const cnp.int64_t[::1] sample_row,
    double[:, :, ::1] samples_h0,
    double[:, :, ::1] samples_h1,
):
    cdef Py_ssize_t n_trials = eps.shape[0]
    cdef Py_ssize_t n_steps = eps.shape[1]
    cdef Py_ssize_t n_agents = eps.shape[2]
    cdef Py_ssize_t p = noise_ar.shape[1]
    cdef Py_ssize_t q = noise_ma.shape[1]
    cdef Py_ssize_t c, k, i, j, m, r, lag
    cdef double acc, nk, g, th, yh, mixed

    noise_np = np.zeros((n_steps, n_agents))
    y0_np = np.zeros((n_steps, n_agents))
    y1_np = np.zeros((n_steps, n_agents))
    l0_np = np.zeros(n_agents)
    l1_np = np.zeros(n_agents)
    e0_np = np.zeros(n_agents)
    e1_np = np.zeros(n_agents)
    tmp_np = np.zeros(n_agents)
    cdef double[:, ::1] noise = noise_np
    cdef double[:, ::1] y0hat = y0_np
    cdef double[:, ::1] y1hat = y1_np
    cdef double[::1] l0 = l0_np
    cdef double[::1] l1 = l1_np
    cdef double[::1] eta0 = e0_np
    cdef double[::1] eta1 = e1_np
    cdef double[::1] tmp = tmp_np

    with nogil:
        for c in range(n_trials):
            for i in range(n_agents):
                l0[i] = 0.0
                l1[i] = 0.0
            for k in range(n_steps):
                for i in range(n_agents):
                    g = noise_gain[i]
                    # noise sample
                    acc = eps[c, k, i]
                    for j in range(q):
                        lag = k - 1 - j
                        if lag >= 0:
                            acc = acc + noise_ma[i, j] * eps[c, lag, i]
                    nk = g * acc
                    for j in range(p):
                        lag = k - 1 - j
                        if lag >= 0:
                            nk = nk + noise_ar[i, j] * noise[lag, i]
                    noise[k, i] = nk
                    th = theta_hat[k, i]
                    if run_h0:
                        acc = nk
                        for j in range(p):
                            lag = k - 1 - j
                            if lag >= 0:
                                acc = acc - noise_ar[i, j] * noise[lag, i]
                        yh = acc / g
                        for j in range(q):
                            lag = k - 1 - j
                            if lag >= 0:
                                yh = yh - noise_ma[i, j] * y0hat[lag, i]
                        y0hat[k, i] = yh
                        eta0[i] = th * yh - 0.5 * th * th
                    if run_h1:
                        acc = theta[k, i] + nk
                        for j in range(p):
                            lag = k - 1 - j
                            if lag >= 0:
                                acc = acc - noise_ar[i, j] * (theta[lag, i] + noise[lag, i])
                        yh = acc / g
                        for j in range(q):
                            lag = k - 1 - j
                            if lag >= 0:
                                yh = yh - noise_ma[i, j] * y1hat[lag, i]
                        y1hat[k, i] = yh
                        eta1[i] = th * yh - 0.5 * th * th
                # l(k) = W l(k-1) + eta(k), W in CSR form
                r = record_row[k]
                if run_h0:
                    for i in range(n_agents):
                        mixed = 0.0
                        for m in range(indptr[i], indptr[i + 1]):
                            mixed = mixed + wdata[m] * l0[indices[m]]
                        tmp[i] = mixed + eta0[i]
                    for i in range(n_agents):
                        l0[i] = tmp[i]
                        if r >= 0 and l0[i] >= gamma:
                            count_fa[r, i] += 1
                    if sample_row[k] >= 0:
                        for i in range(n_agents):
                            samples_h0[c, sample_row[k], i] = l0[i]
                if run_h1:
                    for i in range(n_agents):
                        mixed = 0.0
                        for m in range(indptr[i], indptr[i + 1]):
                            mixed = mixed + wdata[m] * l1[indices[m]]
                        tmp[i] = mixed + eta1[i]
                    for i in range(n_agents):
                        l1[i] = tmp[i]
                        if r >= 0 and l1[i] < gamma:
                            count_miss[r, i] += 1
                    if sample_row[k] >= 0:
                        for i in range(n_agents):
                            samples_h1[c, sample_row[k], i] = l1[i]
