"""Conjugation to constant coefficients.

The per-mode factor

    E_j(t) = nu_j (B(t) - b0 t) - i mu_j (A(t) - a0 t)

satisfies E_j' + c_j = c0_j, so multiplying mode j by e^{E_j} turns
D_t + mu_j a(t) + i nu_j b(t) into D_t + mu_j a0 + i nu_j b0.  The real
part of the factor is only tame when |nu_j| grows at most like log j,
which is what ``growth_class`` decides.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import PreconditionError
from .logdomain import LogComplex
from .operator_model import EigenData, OperatorSpec, mode_symbol
from .trig import TrigPoly, spectral_derivative, trig_primitive, uniform_grid

FIT_R2_MIN = 0.99
MIN_WITNESSES = 8


class GrowthKind(enum.Enum):
    BOUNDED = "Bounded"
    AT_MOST_LOG = "AtMostLog"
    SUPERLOG = "SuperLogSubsequence"
    INDETERMINATE = "Indeterminate"


class GrowthSource(enum.Enum):
    SYMBOLIC = "Symbolic"
    FITTED = "Fitted"


@dataclass(frozen=True)
class GrowthClass:
    kind: GrowthKind
    source: GrowthSource
    kappa: Optional[float] = None
    witnesses: tuple[int, ...] = ()

    @property
    def tame(self) -> bool:
        """Growth at most logarithmic, so the conjugation is an automorphism."""
        return self.kind in (GrowthKind.BOUNDED, GrowthKind.AT_MOST_LOG)


class GrowthHypothesisWarning(UserWarning):
    """The transform was computed but is not an automorphism for this data."""


def _superlog_witnesses(values: Callable[[int], float], start: int = 8, count: int = 10) -> tuple[int, ...]:
    """Dyadic indices along which |x_j| / log j is strictly increasing."""
    out, last = [], -math.inf
    j = start
    while len(out) < count and j < 2 ** 62:
        r = abs(values(j)) / math.log(j)
        if r > last:
            out.append(j)
            last = r
        j *= 2
    return tuple(out)


def _symbolic_growth(e: EigenData, which: str) -> Optional[GrowthClass]:
    g = e.generator
    if g is None or g.kind == "explicit":
        return None
    sym = GrowthSource.SYMBOLIC
    if which == "mu" and g.get("mu_mode", "default") == "zero":
        return GrowthClass(GrowthKind.BOUNDED, sym, 0.0)
    kind = g.kind
    if kind in ("constant", "rational_decay"):
        return GrowthClass(GrowthKind.BOUNDED, sym, 0.0)
    if kind == "power":
        s = float(g.get("s", 1.0))
        if s <= 0:
            return GrowthClass(GrowthKind.BOUNDED, sym, 0.0)
        return GrowthClass(GrowthKind.SUPERLOG, sym, math.inf,
                           _superlog_witnesses(lambda j: j ** s, start=max(8, 2 ** math.ceil(math.log2(math.e ** (1 / s)) + 1))))
    if kind == "torus_frequencies" or (kind == "log_power" and which == "mu"):
        return GrowthClass(GrowthKind.SUPERLOG, sym, math.inf, _superlog_witnesses(lambda j: j // 2))
    if kind == "log_power":
        rho = float(g.get("rho", 1.0))
        if rho <= 0:
            return GrowthClass(GrowthKind.BOUNDED, sym, 0.0)
        if rho < 1:
            return GrowthClass(GrowthKind.AT_MOST_LOG, sym, 0.0)
        if rho == 1:
            # log(2 + j/2) / log j -> 1 along the torus ordering
            return GrowthClass(GrowthKind.AT_MOST_LOG, sym, 1.0)
        return GrowthClass(GrowthKind.SUPERLOG, sym, math.inf,
                           _superlog_witnesses(lambda j: math.log(2 + j // 2) ** rho, start=64))
    return None


def _fitted_growth(x: np.ndarray) -> GrowthClass:
    fit = GrowthSource.FITTED
    x = np.abs(np.asarray(x, dtype=float))
    J = len(x)
    if J < 32:
        return GrowthClass(GrowthKind.INDETERMINATE, fit)
    j = np.arange(1, J + 1, dtype=float)
    tail = j > J / 2
    scale = max(1.0, float(np.max(x)))
    if np.ptp(x[tail]) <= 1e-12 * scale and np.max(x[tail]) <= 2 * np.max(x[: J // 2]) + 1e-12:
        return GrowthClass(GrowthKind.BOUNDED, fit, 0.0)
    # super-log: ratio x_j / log j increasing along sqrt(2)-spaced indices
    geo = sorted({int(round(2 ** (p / 2))) for p in range(4, 126) if 2 ** (p / 2) <= J})
    if len(geo) >= MIN_WITNESSES:
        last = geo[-MIN_WITNESSES:]
        rr = [x[k - 1] / math.log(k) for k in last]
        if all(b > a for a, b in zip(rr, rr[1:])) and rr[-1] > 1.5 * rr[0]:
            return GrowthClass(GrowthKind.SUPERLOG, fit, math.inf, tuple(last))
    L = np.log(j[tail])
    slope, icpt = np.polyfit(L, x[tail], 1)
    resid = x[tail] - (slope * L + icpt)
    ss_tot = float(np.sum((x[tail] - x[tail].mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    if r2 < FIT_R2_MIN:
        return GrowthClass(GrowthKind.INDETERMINATE, fit)
    if abs(slope) <= 1e-9 * scale:
        return GrowthClass(GrowthKind.BOUNDED, fit, 0.0)
    return GrowthClass(GrowthKind.AT_MOST_LOG, fit, float(max(slope, 0.0)))


def growth_class(e: EigenData, which: str = "nu") -> GrowthClass:
    """Is |mu_j| or |nu_j| bounded, at most logarithmic, or super-logarithmic?"""
    if which not in ("mu", "nu"):
        raise PreconditionError("which must be 'mu' or 'nu'")
    sym = _symbolic_growth(e, which)
    if sym is not None:
        return sym
    return _fitted_growth(e.mu if which == "mu" else e.nu)


# ------------------------------------------------------------- transforms

ModeValues = Union[np.ndarray, LogComplex]


def _as_log(u: ModeValues) -> LogComplex:
    if isinstance(u, LogComplex):
        return LogComplex(np.atleast_2d(u.log_mag), np.atleast_2d(u.arg))
    return LogComplex.from_complex(np.atleast_2d(np.asarray(u, dtype=complex)))


def _sign(direction: str) -> int:
    if direction == "forward":
        return 1
    if direction == "inverse":
        return -1
    raise PreconditionError("direction must be 'forward' or 'inverse'")


def oscillating_primitive(p: TrigPoly):
    """t -> P(t) - mean(p) t, the periodic part of the primitive vanishing at 0."""
    return trig_primitive(p).periodic_part


def psi_b_apply(u: ModeValues, b: TrigPoly, e: EigenData, direction: str = "forward",
                grid=None) -> LogComplex:
    """Multiply mode j by exp(+-nu_j (B(t) - b0 t)) on the grid, in the log domain.

    ``u`` holds one row per mode j = 1, 2, ... sampled on ``grid``.
    Warns unless nu-growth is certified at most logarithmic (the map is then not an
    automorphism of smooth functions).
    """
    s = _sign(direction)
    uu = _as_log(u)
    J, N = np.asarray(uu.log_mag).shape
    grid = uniform_grid(N) if grid is None else np.asarray(grid, dtype=float)
    growth = growth_class(e, "nu")
    if not growth.tame:
        warnings.warn(f"nu-growth is {growth.kind.value}: transform is not certified as an automorphism",
                      GrowthHypothesisWarning, stacklevel=2)
    Bt = oscillating_primitive(b)(grid)
    nu = e.nu[:J]
    return LogComplex(uu.log_mag + s * np.outer(nu, Bt), uu.arg)


def psi_a_apply(u: ModeValues, a: TrigPoly, e: EigenData, direction: str = "forward",
                grid=None) -> LogComplex:
    """Multiply mode j by exp(-+i mu_j (A(t) - a0 t)); moduli are untouched."""
    s = _sign(direction)
    uu = _as_log(u)
    J, N = np.asarray(uu.log_mag).shape
    grid = uniform_grid(N) if grid is None else np.asarray(grid, dtype=float)
    At = oscillating_primitive(a)(grid)
    mu = e.mu[:J]
    return LogComplex(uu.log_mag, uu.arg - s * np.outer(mu, At))


def conjugation_factor(op: OperatorSpec, j: int, grid) -> np.ndarray:
    """E_j(t) on the grid; d/dt E_j + c_j = c0_j."""
    sym = mode_symbol(op, j)
    return sym.nu * oscillating_primitive(op.b)(grid) - 1j * sym.mu * oscillating_primitive(op.a)(grid)


@dataclass(frozen=True)
class ConjugationReport:
    residual: float
    relative_residual: float
    per_mode: np.ndarray
    jmax: int
    grid_size: int


def _mode_apply(op: OperatorSpec, j: int, values: np.ndarray, grid: np.ndarray, constant: bool) -> np.ndarray:
    """D_t + mu_j a + i nu_j b applied to one mode, derivative taken spectrally."""
    sym = mode_symbol(op, j)
    c = np.full(grid.shape, sym.c0) if constant else sym.c_of_t(grid)
    return -1j * (spectral_derivative(values) + c * values)


def conjugation_check(op: OperatorSpec, u, jmax: int, grid_size: int = 512) -> ConjugationReport:
    """max_j sup_t |(Psi^-1 L Psi - L_{a0,b0}) u_j| with Psi = Psi_a Psi_b.

    ``u`` is an array of shape (jmax, grid_size) or a callable (j, t) -> values.
    """
    g = growth_class(op.eigen, "nu")
    if not g.tame:
        raise PreconditionError(f"nu-growth is {g.kind.value}; conjugation needs at most logarithmic growth")
    if jmax > op.eigen.jmax:
        raise PreconditionError("jmax exceeds the available eigen data")
    grid = uniform_grid(grid_size)
    if callable(u):
        U = np.array([np.asarray(u(j, grid), dtype=complex) * np.ones(grid_size) for j in range(1, jmax + 1)])
    else:
        U = np.asarray(u, dtype=complex)[:jmax]
    per_mode = np.zeros(jmax)
    scale = 0.0
    for j in range(1, jmax + 1):
        E = conjugation_factor(op, j, grid)
        psi_u = np.exp(E) * U[j - 1]
        lhs = np.exp(-E) * _mode_apply(op, j, psi_u, grid, constant=False)
        rhs = _mode_apply(op, j, U[j - 1], grid, constant=True)
        per_mode[j - 1] = float(np.max(np.abs(lhs - rhs)))
        scale = max(scale, float(np.max(np.abs(rhs))))
    res = float(per_mode.max())
    return ConjugationReport(res, res / scale if scale > 0 else res, per_mode, jmax, grid_size)


def _check_hermitian(Q: np.ndarray, tol: float = 1e-12) -> None:
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise PreconditionError("Q must be a square matrix")
    if np.max(np.abs(Q - Q.conj().T)) > tol * max(1.0, float(np.max(np.abs(Q)))):
        raise PreconditionError("Q must be Hermitian")


def matrix_psi_b_factor(Q, b: TrigPoly, t, direction: str = "forward") -> np.ndarray:
    """exp(+-(B(t) - b0 t) Q) for each t, via the eigendecomposition of Q.

    Returns shape (len(t), d, d), or (d, d) for scalar t.
    """
    Q = np.atleast_2d(np.asarray(Q, dtype=complex))
    _check_hermitian(Q)
    s = _sign(direction)
    w, V = np.linalg.eigh(0.5 * (Q + Q.conj().T))
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    Bt = oscillating_primitive(b)(tt)
    expo = s * np.outer(Bt, w)
    # common shift per time keeps the largest eigen-factor at magnitude 1
    shift = expo.max(axis=1, keepdims=True)
    D = np.exp(expo - shift)
    M = np.einsum("ik,tk,jk->tij", V, D, V.conj()) * np.exp(shift)[:, :, None]
    return M[0] if np.ndim(t) == 0 else M


def matrix_psi_b(U, Q, b: TrigPoly, direction: str = "forward", grid=None) -> np.ndarray:
    """Apply exp(+-(B(t) - b0 t) Q) to block values U of shape (d, N)."""
    U = np.asarray(U, dtype=complex)
    if U.ndim == 1:
        U = U[:, None]
    d, N = U.shape
    grid = uniform_grid(N) if grid is None else np.asarray(grid, dtype=float)
    M = matrix_psi_b_factor(Q, b, grid, direction)
    if M.shape[1] != d:
        raise PreconditionError("block size and Q dimension differ")
    return np.einsum("tij,jt->it", M, U)
