"""ARMA filters in the time domain and their rational Z-transforms.

Coefficient convention used throughout the package::

    y(k) = sum_j ar[j] * y(k-j) + gain * (x(k) + sum_j ma[j] * x(k-j))

with zero initial conditions. The matching transfer function in w = z^-1 is::

    H(w) = gain * (1 + sum_j ma[j] w^j) / (1 - sum_j ar[j] w^j)

so a noise model ``n_i`` driven by ``sigma * eps_i`` is ``ArmaModel(a_i, b_i, sigma)``
and a signal driven by ``A * delta`` is ``ArmaModel(abar_i, bbar_i, A)``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import AssumptionViolation, NumericDomainError, RootFindingError

# |pole - zero| below CANCEL_TOL * max(1, |pole|) counts as a cancellation
CANCEL_TOL = 1e-8
# the two largest pole moduli must differ by more than this
DOMINANCE_TOL = 1e-8
# moduli up to 1 + UNIT_TOL are treated as on the unit circle
UNIT_TOL = 1e-9
# poles closer than this (relative) count as repeated; an m-fold root only
# comes out of the eigenvalue solver to about eps**(1/m), ~1e-5 for m = 3
REPEAT_TOL = 1e-4
# roots closer than this (relative) are treated as a cluster and not polished
CLUSTER_TOL = 1e-3


def _as_coeffs(values, name):
    coeffs = tuple(float(v) for v in values)
    if not all(math.isfinite(c) for c in coeffs):
        raise NumericDomainError(f"{name} coefficients must be finite, got {coeffs}")
    return coeffs


@dataclass(frozen=True)
class ArmaModel:
    """One ARMA(p, q) filter: AR feedback, MA feed-forward and an input gain."""

    ar_coeffs: tuple = ()
    ma_coeffs: tuple = ()
    gain: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "ar_coeffs", _as_coeffs(self.ar_coeffs, "ar"))
        object.__setattr__(self, "ma_coeffs", _as_coeffs(self.ma_coeffs, "ma"))
        gain = float(self.gain)
        if not math.isfinite(gain) or gain == 0.0:
            raise NumericDomainError(f"gain must be finite and non-zero, got {self.gain!r}")
        object.__setattr__(self, "gain", gain)

    @property
    def p(self) -> int:
        return len(self.ar_coeffs)

    @property
    def q(self) -> int:
        return len(self.ma_coeffs)

    def to_json(self) -> dict:
        return {"ar": list(self.ar_coeffs), "ma": list(self.ma_coeffs), "gain": self.gain}

    @classmethod
    def from_json(cls, obj: dict) -> "ArmaModel":
        unknown = set(obj) - {"ar", "ma", "gain"}
        if unknown:
            raise ValueError(f"unknown ARMA model keys: {sorted(unknown)}")
        return cls(obj.get("ar", ()), obj.get("ma", ()), obj.get("gain", 1.0))


class FilterMemory:
    """Past outputs (p of them) and past inputs (q of them), newest first."""

    __slots__ = ("outputs", "inputs")

    def __init__(self, p: int, q: int):
        self.outputs = deque([0.0] * p, maxlen=p)
        self.inputs = deque([0.0] * q, maxlen=q)

    @classmethod
    def for_model(cls, model: ArmaModel) -> "FilterMemory":
        return cls(model.p, model.q)

    def __len__(self):
        return len(self.outputs) + len(self.inputs)


def filter_step(model: ArmaModel, memory: FilterMemory, x: float):
    """Advance the filter by one input sample.

    Returns ``(y, memory)``; ``memory`` is updated in place.
    """
    x = float(x)
    if not math.isfinite(x):
        raise NumericDomainError(f"filter input must be finite, got {x}")
    acc = x
    for c, past in zip(model.ma_coeffs, memory.inputs):
        acc += c * past
    y = model.gain * acc
    for c, past in zip(model.ar_coeffs, memory.outputs):
        y += c * past
    if model.p:
        memory.outputs.appendleft(y)
    if model.q:
        memory.inputs.appendleft(x)
    return y, memory


def run_filter(model: ArmaModel, inputs) -> np.ndarray:
    """Filter a whole sequence from zero initial conditions."""
    memory = FilterMemory.for_model(model)
    out = np.empty(len(inputs))
    for k, x in enumerate(inputs):
        out[k], _ = filter_step(model, memory, x)
    return out


@dataclass(frozen=True)
class SignalTrace:
    samples: np.ndarray
    agent_id: int = 0

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim != 1 or not np.all(np.isfinite(samples)):
            raise NumericDomainError("a signal trace is a finite 1-d sequence")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return len(self.samples)


def impulse_response(model: ArmaModel, length: int, agent_id: int = 0) -> SignalTrace:
    """Response of ``model`` to a unit impulse, i.e. the deterministic signal it defines."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    impulse = np.zeros(length)
    impulse[0] = 1.0
    return SignalTrace(run_filter(model, impulse), agent_id)


# --------------------------------------------------------------------------
# polynomial roots


def _companion(monic):
    """Companion matrix of z^n + c1 z^(n-1) + ... + cn given [1, c1, ..., cn]."""
    n = len(monic) - 1
    comp = np.zeros((n, n), dtype=complex)
    comp[0, :] = -np.asarray(monic[1:], dtype=complex)
    if n > 1:
        comp[np.arange(1, n), np.arange(n - 1)] = 1.0
    return comp


def poly_roots(coeffs: Sequence[float], polish_steps: int = 2) -> np.ndarray:
    """Roots of a polynomial given highest power first, via companion eigenvalues.

    A couple of Newton steps polish each isolated eigenvalue against the
    original polynomial; a step is kept only when it reduces the residual.
    Clustered roots are left alone, since polishing them one at a time pulls
    the cluster apart.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.size == 0 or coeffs[0] == 0:
        raise RootFindingError("leading coefficient must be non-zero", coeffs)
    if coeffs.size == 1:
        return np.zeros(0, dtype=complex)
    monic = coeffs / coeffs[0]
    try:
        roots = np.linalg.eigvals(_companion(monic))
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"eigenvalue iteration failed: {exc}", coeffs) from exc
    if not np.all(np.isfinite(roots)):
        raise RootFindingError("root finder produced non-finite roots", coeffs)
    deriv = np.polyder(monic)
    gaps = np.abs(roots[:, None] - roots[None, :]) + np.diag(np.full(roots.size, np.inf))
    isolated = gaps.min(axis=1) > CLUSTER_TOL * np.maximum(1.0, np.abs(roots))
    for _ in range(polish_steps):
        val = np.polyval(monic, roots)
        dval = np.polyval(deriv, roots)
        ok = (dval != 0) & isolated
        cand = roots.copy()
        cand[ok] = roots[ok] - val[ok] / dval[ok]
        better = np.abs(np.polyval(monic, cand)) < np.abs(val)
        roots = np.where(better, cand, roots)
    return roots


def _trim(coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0.0:
        coeffs.pop()
    return coeffs


# --------------------------------------------------------------------------
# rational transfer functions


@dataclass(frozen=True)
class RationalTransferFunction:
    """``scale * prod(1 - z_j w) / prod(1 - p_j w)`` with w = z^-1.

    ``residues`` is empty until :func:`partial_fractions` fills it, one per pole.
    ``cancelled`` lists (pole, zero) pairs removed while cascading.
    """

    scale: complex
    zeros: tuple = ()
    poles: tuple = ()
    residues: tuple = ()
    cancelled: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        object.__setattr__(self, "residues", tuple(complex(r) for r in self.residues))
        if self.residues and len(self.residues) != len(self.poles):
            raise ValueError("need exactly one residue per pole")

    @property
    def rho(self) -> float:
        """Largest pole modulus (0 for a pole-free function)."""
        return max((abs(p) for p in self.poles), default=0.0)

    @property
    def is_strictly_proper(self) -> bool:
        return len(self.poles) > len(self.zeros)

    def numerator(self) -> np.ndarray:
        """Numerator coefficients in ascending powers of w (includes ``scale``)."""
        return self.scale * np.poly(self.zeros) if self.zeros else np.array([self.scale])

    def denominator(self) -> np.ndarray:
        return np.poly(self.poles) if self.poles else np.array([1.0 + 0j])

    def __call__(self, z):
        """Evaluate at a point z of the complex plane (outside the poles)."""
        w = 1.0 / np.asarray(z, dtype=complex)
        num = self.scale * np.prod([1 - zj * w for zj in self.zeros], axis=0)
        den = np.prod([1 - pj * w for pj in self.poles], axis=0)
        return num / den

    def impulse(self, length: int) -> np.ndarray:
        """Impulse response sum_j r_j p_j^k, k < length; needs residues."""
        if not self.residues:
            raise ValueError("residues not computed; call partial_fractions first")
        k = np.arange(length)
        return np.power(np.asarray(self.poles)[None, :], k[:, None]) @ np.asarray(self.residues)


def transfer_function(model: ArmaModel) -> RationalTransferFunction:
    """Poles and zeros of an ARMA model (trailing zero coefficients are dropped)."""
    ma = _trim(model.ma_coeffs)
    ar = _trim(model.ar_coeffs)
    # 1 + sum ma_j w^j = prod(1 - z_j w)  <=>  z_j roots of z^q + ma_1 z^(q-1) + ...
    zeros = poly_roots([1.0] + ma) if ma else ()
    # 1 - sum ar_j w^j = prod(1 - p_j w)  <=>  p_j roots of z^p - ar_1 z^(p-1) - ...
    poles = poly_roots([1.0] + [-a for a in ar]) if ar else ()
    return RationalTransferFunction(model.gain, tuple(zeros), tuple(poles))


def inverse(f: RationalTransferFunction) -> RationalTransferFunction:
    """Reciprocal transfer function (zeros and poles swap roles)."""
    return RationalTransferFunction(1.0 / f.scale, f.poles, f.zeros)


def _close(a, b):
    return abs(a - b) < CANCEL_TOL * max(1.0, abs(a))


def _find_pair(poles, zeros):
    for i, p in enumerate(poles):
        for j, z in enumerate(zeros):
            if _close(p, z):
                return i, j
    return None


def check_no_cancellation(poles, zeros, agent=None):
    hit = _find_pair(poles, zeros)
    if hit is not None:
        p, z = poles[hit[0]], zeros[hit[1]]
        raise AssumptionViolation(
            "cancellation", f"zero-pole cancellation: pole {p:.6g} vs zero {z:.6g}", agent
        )


def check_simple_poles(poles, agent=None):
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if abs(poles[i] - poles[j]) < REPEAT_TOL * max(1.0, abs(poles[i])):
                raise AssumptionViolation(
                    "repeated_pole",
                    f"poles must be simple: {poles[i]:.6g} and {poles[j]:.6g} coincide",
                    agent,
                )


def check_strictly_proper(f: RationalTransferFunction, agent=None):
    if not f.is_strictly_proper:
        raise AssumptionViolation(
            "not_strictly_proper",
            f"transfer function is not strictly proper ({len(f.poles)} poles, {len(f.zeros)} zeros)",
            agent,
        )


def check_dominant_pole(poles, agent=None):
    mods = sorted((abs(p) for p in poles), reverse=True)
    if len(mods) >= 2 and mods[0] - mods[1] <= DOMINANCE_TOL:
        raise AssumptionViolation(
            "non_unique_dominant_pole",
            f"largest pole modulus {mods[0]:.10g} is attained by more than one pole",
            agent,
        )


def check_stable(poles, agent=None):
    rho = max((abs(p) for p in poles), default=0.0)
    if rho > 1.0 + UNIT_TOL:
        raise AssumptionViolation("unstable", f"pole modulus {rho:.10g} exceeds 1", agent)


def validate(f: RationalTransferFunction, agent=None):
    """Raise :class:`AssumptionViolation` unless ``f`` meets every structural requirement."""
    check_no_cancellation(f.poles, f.zeros, agent)
    check_simple_poles(f.poles, agent)
    check_strictly_proper(f, agent)
    check_dominant_pole(f.poles, agent)
    check_stable(f.poles, agent)


def _cancel_cross(poles, zeros, other_poles, other_zeros):
    """Remove pole/zero pairs taken one from each factor; returns the kept lists and pairs."""
    poles, zeros = list(poles), list(zeros)
    other_poles, other_zeros = list(other_poles), list(other_zeros)
    pairs = []
    for mine, theirs in ((poles, other_zeros), (other_poles, zeros)):
        hit = _find_pair(mine, theirs)
        while hit is not None:
            pairs.append((mine.pop(hit[0]), theirs.pop(hit[1])))
            hit = _find_pair(mine, theirs)
    return poles + other_poles, zeros + other_zeros, pairs


def cascade(
    f: RationalTransferFunction,
    g: RationalTransferFunction,
    cancel_shared: bool = False,
) -> RationalTransferFunction:
    """Series connection ``f * g``.

    By default any pole meeting a zero is an :class:`AssumptionViolation`. With
    ``cancel_shared`` a pole of one factor that meets a zero of the *other* factor
    is removed (and recorded on ``cancelled``); coincidences inside a single
    factor are still rejected.
    """
    if cancel_shared:
        check_no_cancellation(f.poles, f.zeros)
        check_no_cancellation(g.poles, g.zeros)
        poles, zeros, pairs = _cancel_cross(f.poles, f.zeros, g.poles, g.zeros)
    else:
        poles, zeros, pairs = list(f.poles) + list(g.poles), list(f.zeros) + list(g.zeros), []
        check_no_cancellation(poles, zeros)
    out = RationalTransferFunction(
        f.scale * g.scale, tuple(zeros), tuple(poles), cancelled=f.cancelled + g.cancelled + tuple(pairs)
    )
    check_simple_poles(out.poles)
    check_strictly_proper(out)
    check_dominant_pole(out.poles)
    return out


def partial_fractions(f: RationalTransferFunction) -> RationalTransferFunction:
    """Fill in the residues of a strictly proper, simple-pole transfer function.

    r_l = (1 - p_l w) f(w) at w = 1/p_l, written in a form that stays finite for
    a pole at the origin::

        r_l = scale * prod_j (p_l - z_j) * p_l^(P-1-Q) / prod_{j!=l} (p_l - p_j)
    """
    check_strictly_proper(f)
    check_simple_poles(f.poles)
    poles = np.asarray(f.poles)
    extra = len(f.poles) - 1 - len(f.zeros)
    residues = []
    for idx, pl in enumerate(poles):
        num = f.scale * np.prod([pl - zj for zj in f.zeros]) * pl**extra
        den = np.prod([pl - pj for j, pj in enumerate(poles) if j != idx])
        residues.append(num / den)
    return replace(f, residues=tuple(residues))


def whitened_signal_tf(signal: ArmaModel, noise: ArmaModel, agent=None) -> RationalTransferFunction:
    """Z-transform of the whitened signal: inverse noise filter times signal filter.

    Each model must be free of internal pole/zero cancellations. Roots shared by
    the two models (e.g. a DC signal riding on integrated noise) cancel exactly and
    are reported on ``cancelled``. The result is validated and carries residues.
    """
    nf, sf = transfer_function(noise), transfer_function(signal)
    try:
        for tf in (nf, sf):
            check_no_cancellation(tf.poles, tf.zeros)
        out = cascade(inverse(nf), sf, cancel_shared=True)
        check_stable(out.poles)
    except AssumptionViolation as exc:
        raise AssumptionViolation(exc.kind, str(exc), agent) from None
    return partial_fractions(out)
