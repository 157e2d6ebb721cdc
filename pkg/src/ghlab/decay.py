"""Decay classification of per-mode sup-norm sequences and Sobolev-type
diagnostics for Fourier coefficient sequences."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .errors import PreconditionError

N_MAX = 10
MIN_MODES = 64
MIN_INDEX = 16
R2_MIN = 0.9
CURVATURE_TOL = 0.5


class DecayKind(enum.Enum):
    RAPID = "RapidDecay"
    POLYNOMIAL = "PolynomialBound"
    SUPERPOLYNOMIAL = "SuperPolynomialGrowth"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r2: float


@dataclass(frozen=True)
class DecayClass:
    kind: DecayKind
    fit: LogLogFit
    order: Optional[float] = None
    per_derivative: Mapping[int, "DecayClass"] = field(default_factory=dict)

    @property
    def is_rapid(self) -> bool:
        return self.kind is DecayKind.RAPID


@dataclass
class SeriesProfile:
    """Sup-norms s_j^(k) = sup_t |d^k u_j / dt^k| for j = 1..J.

    Stored as natural logs so that values far outside float range (as
    produced by log-domain witnesses) survive; zero norms are -inf.
    """

    log_sup_norms: dict[int, np.ndarray]

    @classmethod
    def from_values(cls, sup_norms: Mapping[int, "np.ndarray"]) -> "SeriesProfile":
        logs = {}
        for k, seq in sup_norms.items():
            seq = np.asarray(seq, dtype=float)
            if np.any(seq < 0):
                raise PreconditionError("sup-norms must be nonnegative")
            with np.errstate(divide="ignore"):
                logs[int(k)] = np.log(seq)
        return cls(logs)

    @classmethod
    def from_logs(cls, log_sup_norms: Mapping[int, "np.ndarray"]) -> "SeriesProfile":
        return cls({int(k): np.asarray(v, dtype=float) for k, v in log_sup_norms.items()})

    @property
    def sup_norms(self) -> dict[int, np.ndarray]:
        with np.errstate(over="ignore"):
            return {k: np.exp(v) for k, v in self.log_sup_norms.items()}

    def __len__(self) -> int:
        return min(len(v) for v in self.log_sup_norms.values())


def loglog_fit(x: np.ndarray, y: np.ndarray) -> LogLogFit:
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    scale = max(1.0, float(np.max(np.abs(y))))
    r2 = 1.0 if ss_tot <= (1e-12 * scale) ** 2 * len(y) else 1.0 - ss_res / ss_tot
    return LogLogFit(float(slope), float(intercept), float(r2))


def _classify_one(log_s: np.ndarray, tail_fraction: float, n_max: int) -> DecayClass:
    J = len(log_s)
    j = np.arange(1, J + 1, dtype=float)
    start = max(MIN_INDEX, int(math.floor(J * (1.0 - tail_fraction))) + 1)
    mask = (j >= start) & np.isfinite(log_s)
    if np.any(np.isposinf(log_s[j >= start])):
        return DecayClass(DecayKind.SUPERPOLYNOMIAL, LogLogFit(math.inf, math.nan, math.nan))
    if mask.sum() < 8:
        # the tail is (almost) identically zero
        return DecayClass(DecayKind.RAPID, LogLogFit(-math.inf, math.nan, 1.0))
    x, y = np.log(j[mask]), log_s[mask]
    fit = loglog_fit(x, y)
    if fit.slope <= -(n_max + 1) and fit.r2 >= R2_MIN:
        return DecayClass(DecayKind.RAPID, fit)
    half = len(x) // 2
    first = loglog_fit(x[:half], y[:half]).slope
    second = loglog_fit(x[half:], y[half:]).slope
    if second - first > CURVATURE_TOL and second > 0:
        return DecayClass(DecayKind.SUPERPOLYNOMIAL, fit)
    if fit.slope > n_max + 1:
        return DecayClass(DecayKind.SUPERPOLYNOMIAL, fit)
    if fit.r2 >= R2_MIN:
        return DecayClass(DecayKind.POLYNOMIAL, fit, order=fit.slope)
    return DecayClass(DecayKind.INDETERMINATE, fit)


def classify_sequence(profile: SeriesProfile, tail_fraction: float = 0.5, n_max: int = N_MAX) -> DecayClass:
    """Rapid decay, polynomial bound, or super-polynomial growth of a profile.

    The worst derivative order decides; ``per_derivative`` keeps each one.
    """
    if len(profile) < MIN_MODES:
        raise PreconditionError(f"need at least {MIN_MODES} modes, got {len(profile)}")
    per = {k: _classify_one(v, tail_fraction, n_max) for k, v in sorted(profile.log_sup_norms.items())}
    kinds = [c.kind for c in per.values()]
    first = next(iter(per.values()))
    if DecayKind.SUPERPOLYNOMIAL in kinds:
        worst = next(c for c in per.values() if c.kind is DecayKind.SUPERPOLYNOMIAL)
        return DecayClass(DecayKind.SUPERPOLYNOMIAL, worst.fit, per_derivative=per)
    if DecayKind.INDETERMINATE in kinds:
        worst = next(c for c in per.values() if c.kind is DecayKind.INDETERMINATE)
        return DecayClass(DecayKind.INDETERMINATE, worst.fit, per_derivative=per)
    if all(k is DecayKind.RAPID for k in kinds):
        return DecayClass(DecayKind.RAPID, first.fit, per_derivative=per)
    polys = [c for c in per.values() if c.kind is DecayKind.POLYNOMIAL]
    worst = max(polys, key=lambda c: c.order)
    return DecayClass(DecayKind.POLYNOMIAL, worst.fit, order=worst.order, per_derivative=per)


@dataclass(frozen=True)
class SobolevNorm:
    value: float
    converged: bool
    tail_slope: float


def sobolev_norm(coeffs, s: float, n: int = 1, slope_margin: float = 0.05) -> SobolevNorm:
    """(sum_j |u_j|^2 j^{2s/n})^{1/2} with a convergence verdict.

    Convergence is judged from the log-log slope of the terms over the
    last decade of indices: slope < -1 - slope_margin means summable.
    """
    u = np.asarray(coeffs)
    j = np.arange(1, len(u) + 1, dtype=float)
    with np.errstate(divide="ignore"):
        log_terms = 2 * np.log(np.abs(u)) + (2 * s / n) * np.log(j)
    finite = np.isfinite(log_terms)
    if not finite.any():
        return SobolevNorm(0.0, True, -math.inf)
    peak = np.max(log_terms[finite])
    total = float(np.sum(np.exp(log_terms[finite] - peak)))
    value = math.exp(0.5 * (peak + math.log(total)))
    tail = (j > len(u) / 10) & finite
    if tail.sum() < 8:
        return SobolevNorm(value, True, -math.inf)
    slope = loglog_fit(np.log(j[tail]), log_terms[tail]).slope
    return SobolevNorm(value, bool(slope < -1 - slope_margin), slope)


@dataclass(frozen=True)
class FourierSequence:
    """Coefficient magnitudes |u(xi)| on xi = -xi_max..xi_max, held as logs."""

    xi: np.ndarray
    log_abs: np.ndarray

    @property
    def values(self) -> np.ndarray:
        return np.exp(self.log_abs)

    def at(self, xi: int) -> float:
        return float(np.exp(self.log_abs[int(xi) + (len(self.xi) - 1) // 2]))

    @classmethod
    def from_values(cls, xi, values) -> "FourierSequence":
        with np.errstate(divide="ignore"):
            return cls(np.asarray(xi), np.log(np.abs(np.asarray(values, dtype=complex))))


def hq_demo_sequence(delta: float, theta: float, xi_max: int) -> FourierSequence:
    """|xi|^{-1/2} log^{-theta}|xi| exp(-log^delta|xi| log log|xi|) for |xi| >= 3."""
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    if not theta > 0.5:
        raise PreconditionError("theta must exceed 1/2")
    if xi_max < 1:
        raise PreconditionError("xi_max must be positive")
    xi = np.arange(-xi_max, xi_max + 1)
    ax = np.abs(xi).astype(float)
    out = np.full(ax.shape, -np.inf)
    live = ax >= 3
    L = np.log(ax[live])
    out[live] = -0.5 * L - theta * np.log(L) - L ** delta * np.log(L)
    return FourierSequence(xi, out)


@dataclass(frozen=True)
class DecadeProfile:
    """Weighted l2 mass of a sequence, accumulated decade by decade in |xi|."""

    edges: np.ndarray
    increments: np.ndarray
    partial_sums: np.ndarray

    def relative_growth(self) -> np.ndarray:
        return self.increments / self.partial_sums


def _weighted_log_terms(u: FourierSequence, log_weight) -> tuple[np.ndarray, np.ndarray]:
    ax = np.abs(u.xi).astype(float)
    return ax, 2.0 * (u.log_abs + log_weight(ax))


def decade_profile(u: FourierSequence, log_weight) -> DecadeProfile:
    ax, lt = _weighted_log_terms(u, log_weight)
    top = int(ax.max())
    edges = [0]
    e = 10
    while e < top:
        edges.append(e)
        e *= 10
    edges.append(top)
    edges = np.array(edges)
    incs = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = (ax > lo) & (ax <= hi) if lo else (ax <= hi)
        vals = lt[sel]
        vals = vals[np.isfinite(vals)]
        incs.append(float(np.sum(np.exp(vals))) if len(vals) else 0.0)
    incs = np.array(incs)
    return DecadeProfile(edges, incs, np.cumsum(incs))


@dataclass(frozen=True)
class Membership:
    bounded_l2: bool
    weighted_tail: float
    tail_slope: float
    profile: DecadeProfile


def weighted_membership(u: FourierSequence, log_weight, slope_margin: float = 0.05) -> Membership:
    """Square-summability of w(xi) u(xi) judged on the sampled range.

    ``log_weight`` maps |xi| to log w.  Summable when the terms over the
    last decade fall faster than |xi|^{-1 - margin} and the decade masses
    are shrinking.
    """
    ax, lt = _weighted_log_terms(u, log_weight)
    prof = decade_profile(u, log_weight)
    top = ax.max()
    tail = (ax > top / 10) & (ax > 0) & np.isfinite(lt)
    if tail.sum() < 8:
        return Membership(True, 0.0, -math.inf, prof)
    slope = loglog_fit(np.log(ax[tail]), lt[tail]).slope
    shrinking = len(prof.increments) < 2 or prof.increments[-1] <= prof.increments[-2]
    return Membership(bool(slope < -1 - slope_margin and shrinking), float(prof.increments[-1]), slope, prof)


def logq_membership(u: FourierSequence, s: float, rho: float) -> Membership:
    """Membership test for the log-Sobolev space with weight log^{rho s}(2 + |xi|)."""
    return weighted_membership(u, lambda ax: rho * s * np.log(np.log(2.0 + ax)))


def power_membership(u: FourierSequence, eps: float) -> Membership:
    """Membership test for the weight |xi|^eps (an ordinary Sobolev index)."""
    with np.errstate(divide="ignore"):
        return weighted_membership(u, lambda ax: eps * np.log(np.maximum(ax, 1.0)))
