"""Cholesky factors of ARMA noise covariances and the streaming whitening filter.

For noise ``n = sigma (I - A)^-1 B eps`` the lower-triangular factor
``L = sigma (I - A)^-1 B`` has diagonal ``sigma`` and satisfies ``Sigma = L L^T``.
Applying ``L^-1`` to a growing history is the same as running the inverse noise
filter one sample at a time, which is what :func:`whiten_step` does with memory
that depends only on the model orders.

The dense helpers (:func:`dense_cholesky`, :func:`forward_substitution`, the
matrices inside :class:`CovarianceFactors`) exist to check the streaming path
and are never used by the detector itself.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .arma import ArmaModel
from .errors import NumericDomainError


@dataclass(frozen=True)
class CovarianceFactors:
    """Dense ``I - A`` and ``B`` for the first ``dimension`` noise samples."""

    dimension: int
    lower_unit_banded: np.ndarray
    ma_banded: np.ndarray
    sigma: float

    def cholesky_factor(self) -> np.ndarray:
        """``sigma (I - A)^-1 B``."""
        return self.sigma * solve_triangular(
            self.lower_unit_banded, self.ma_banded, lower=True, unit_diagonal=True
        )


def initial_factors(noise_model: ArmaModel) -> CovarianceFactors:
    return CovarianceFactors(1, np.eye(1), np.eye(1), abs(noise_model.gain))


def _band_row(coeffs, dim):
    # entry c holds coeff[dim - c] (1-based) when 1 <= dim - c <= len(coeffs)
    row = np.zeros(dim)
    for lag, c in enumerate(coeffs, start=1):
        if lag <= dim:
            row[dim - lag] = c
    return row


def extend_factors(factors: CovarianceFactors, noise_model: ArmaModel) -> CovarianceFactors:
    """Append one row: ``alpha`` (AR lags, reversed) and ``beta`` (MA lags, reversed)."""
    d = factors.dimension
    alpha = _band_row(noise_model.ar_coeffs, d)
    beta = _band_row(noise_model.ma_coeffs, d)

    ima = np.zeros((d + 1, d + 1))
    ima[:d, :d] = factors.lower_unit_banded
    ima[d, :d] = -alpha
    ima[d, d] = 1.0

    b = np.zeros((d + 1, d + 1))
    b[:d, :d] = factors.ma_banded
    b[d, :d] = beta
    b[d, d] = 1.0
    return CovarianceFactors(d + 1, ima, b, factors.sigma)


def build_factors(noise_model: ArmaModel, dimension: int) -> CovarianceFactors:
    if dimension < 1:
        raise ValueError("dimension must be >= 1")
    factors = initial_factors(noise_model)
    while factors.dimension < dimension:
        factors = extend_factors(factors, noise_model)
    return factors


def covariance(factors: CovarianceFactors) -> np.ndarray:
    chol = factors.cholesky_factor()
    return chol @ chol.T


def dense_cholesky(matrix: np.ndarray) -> np.ndarray:
    """Unblocked Cholesky-Crout; fails loudly on a non-positive pivot."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    chol = np.zeros_like(a)
    for j in range(n):
        row = chol[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > 0.0:
            raise np.linalg.LinAlgError(f"matrix not positive definite (pivot {pivot:g} at {j})")
        chol[j, j] = math.sqrt(pivot)
        chol[j + 1 :, j] = (a[j + 1 :, j] - chol[j + 1 :, :j] @ row) / chol[j, j]
    return chol


def forward_substitution(lower: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``lower @ x = rhs`` row by row."""
    n = lower.shape[0]
    x = np.zeros(n)
    for i in range(n):
        x[i] = (rhs[i] - lower[i, :i] @ x[:i]) / lower[i, i]
    return x


class WhiteningState:
    """Inverse noise filter memory: last q whitened outputs, last p raw inputs."""

    __slots__ = ("model", "past_outputs", "past_inputs")

    def __init__(self, model: ArmaModel):
        self.model = model
        self.past_outputs = deque([0.0] * model.q, maxlen=model.q)
        self.past_inputs = deque([0.0] * model.p, maxlen=model.p)

    def __len__(self):
        return len(self.past_outputs) + len(self.past_inputs)


def whiten_step(state: WhiteningState, sample: float):
    """One output of the inverse noise filter; ``state`` is advanced in place.

    ``zhat(k) = -sum_j ma_j zhat(k-j) + (z(k) - sum_j ar_j z(k-j)) / gain``
    """
    z = float(sample)
    if not math.isfinite(z):
        raise NumericDomainError(f"sample must be finite, got {z}")
    model = state.model
    acc = z
    for c, past in zip(model.ar_coeffs, state.past_inputs):
        acc -= c * past
    zhat = acc / model.gain
    for c, past in zip(model.ma_coeffs, state.past_outputs):
        zhat -= c * past
    if model.q:
        state.past_outputs.appendleft(zhat)
    if model.p:
        state.past_inputs.appendleft(z)
    return zhat, state


def whiten(model: ArmaModel, samples) -> np.ndarray:
    """Whiten a whole sequence from zero initial conditions."""
    state = WhiteningState(model)
    out = np.empty(len(samples))
    for k, z in enumerate(samples):
        out[k], _ = whiten_step(state, z)
    return out
