"""Per-mode periodic ODE  u' + c(t) u = f(t)  on the circle.

``solve_mode`` evaluates the closed-form periodic solution

    u(t) = (1 - e^{-2 pi c0})^{-1} int_0^{2pi} e^{C(t-s) - C(t)} f(t-s) ds    (forward)
    u(t) = (e^{2 pi c0} - 1)^{-1} int_0^{2pi} e^{C(t+s) - C(t)} f(t+s) ds     (backward)

where C is the exact primitive of c.  Writing C(t) = c0 t + P(t) with P
periodic, each integrand is e^{-+c0 s} times a smooth periodic function of s.
The quadrature integrates the trigonometric interpolant of that periodic
factor against e^{-+c0 s} exactly, which keeps spectral accuracy even though
the full integrand is not periodic in s.

``solve_mode_oracle`` is an independent spectral Galerkin solver.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ResonantMode, SingularSystem, TruncationInsufficient
from .logdomain import LOG_DOMAIN_THRESHOLD, LogComplex
from .operator_model import ModeSymbol
from .trig import TWO_PI, spectral_derivative, uniform_grid

RESONANCE_THRESHOLD = 1e-8
DEFAULT_GRID = 256


class Branch(enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"
    RESONANT = "Resonant"


@dataclass
class ModeSolution:
    j: int
    grid: np.ndarray
    values: np.ndarray
    theta: float
    branch: Branch
    residual: float = float("nan")
    log_values: Optional[LogComplex] = None

    def sup_norm(self) -> float:
        if self.log_values is not None:
            return float(np.exp(np.max(self.log_values.log_mag))) if np.max(self.log_values.log_mag) < 709 else math.inf
        return float(np.max(np.abs(self.values)))


def _expm1_complex(w: complex) -> complex:
    a, b = w.real, w.imag
    re = math.expm1(a) * math.cos(b) - 2.0 * math.sin(b / 2.0) ** 2
    im = math.exp(a) * math.sin(b)
    return complex(re, im)


def dist_to_imaginary_integers(c0: complex) -> float:
    return math.hypot(c0.real, c0.imag - round(c0.imag))


def theta(c0: complex) -> float:
    """|1 - e^{-2 pi c0}|^{-1}, infinite exactly on the lattice iZ."""
    c0 = complex(c0)
    if c0.real == 0.0 and float(c0.imag).is_integer():
        return math.inf
    x = -c0.real
    y = c0.imag - round(c0.imag)
    w = complex(TWO_PI * x, -TWO_PI * y)
    if x <= 0:
        return 1.0 / abs(_expm1_complex(w))
    # |1 - e^w| = e^{2 pi x} |e^{-w} - 1|
    return math.exp(-TWO_PI * x) / abs(_expm1_complex(-w))


def omega(b0nu: float, a0mu: float) -> float:
    """e^{2pi b0nu}(e^{2pi b0nu} - 2 cos(2pi a0mu)) + 1, in cancellation-free form."""
    X = TWO_PI * b0nu
    y = a0mu - round(a0mu)
    if X > 700:
        return math.inf
    return math.expm1(X) ** 2 + 4.0 * math.exp(X) * math.sin(math.pi * y) ** 2


def omega_from_c0(c0: complex) -> float:
    c0 = complex(c0)
    return omega(-c0.real, c0.imag)


def _as_grid(grid) -> np.ndarray:
    if grid is None:
        return uniform_grid(DEFAULT_GRID)
    if isinstance(grid, (int, np.integer)):
        return uniform_grid(int(grid))
    return np.asarray(grid, dtype=float)


def _as_values(f, grid: np.ndarray) -> np.ndarray:
    if callable(f):
        return np.asarray(f(grid), dtype=complex) * np.ones_like(grid)
    f = np.asarray(f, dtype=complex)
    if f.ndim == 0:
        return np.full(grid.shape, complex(f))
    if f.shape != grid.shape:
        raise ValueError("right-hand side and grid have different lengths")
    return f


def _fitted_weights(c0: complex, n: int, sign: int) -> np.ndarray:
    """Weights w_m with sum_m w_m h(s_m) = int_0^{2pi} G(s) h(s) ds for
    band-limited periodic h, where G is the periodic Green kernel of
    d/dt + c0 in the forward (sign=-1) or backward (sign=+1) layout."""
    q = np.fft.fftfreq(n, d=1.0 / n)
    g = 1.0 / (c0 + sign * 1j * q)
    if n % 2 == 0:
        half = n // 2
        g[half] = 0.5 * (1.0 / (c0 + 1j * half) + 1.0 / (c0 - 1j * half))
    return np.fft.fft(g) / n


def _exponent_matrix(sym: ModeSymbol, grid: np.ndarray, sign: int) -> tuple[np.ndarray, np.ndarray]:
    """E[k, m] = P(t_k + sign*s_m) - P(t_k) and the index map k + sign*m."""
    n = len(grid)
    P = sym.periodic_primitive(grid)
    idx = (np.arange(n)[:, None] + sign * np.arange(n)[None, :]) % n
    return P[idx] - P[:, None], idx


def _max_full_exponent(sym: ModeSymbol, grid: np.ndarray, sign: int) -> float:
    E, _ = _exponent_matrix(sym, grid, sign)
    s = TWO_PI * np.arange(len(grid)) / len(grid)
    return float(np.max(E.real + sign * sym.c0.real * s[None, :]))


def select_branch(sym: ModeSymbol, grid: np.ndarray) -> Branch:
    key = sym.nu * sym.b.mean
    if key < 0:
        return Branch.FORWARD
    if key > 0:
        return Branch.BACKWARD
    fwd = _max_full_exponent(sym, grid, -1)
    bwd = _max_full_exponent(sym, grid, +1)
    return Branch.FORWARD if fwd <= bwd else Branch.BACKWARD


def solve_mode(sym: ModeSymbol, f, grid=None, threshold: float = RESONANCE_THRESHOLD) -> ModeSolution:
    """Closed-form periodic solution of u' + c u = f on a uniform grid."""
    grid = _as_grid(grid)
    fv = _as_values(f, grid)
    c0 = sym.c0
    th = theta(c0)
    if dist_to_imaginary_integers(c0) < threshold:
        raise ResonantMode(f"mode {sym.j}: c0 = {c0} is within {threshold} of iZ")
    branch = select_branch(sym, grid)
    sign = -1 if branch is Branch.FORWARD else +1
    n = len(grid)
    W = _fitted_weights(c0, n, sign)
    E, idx = _exponent_matrix(sym, grid, sign)
    F = fv[idx]
    live = F != 0
    if not live.any():
        values = np.zeros(n, dtype=complex)
        sol = ModeSolution(sym.j, grid, values, th, branch, log_values=LogComplex.from_complex(values))
        sol.residual = residual(sym, sol, fv)
        return sol
    Er = np.where(live, E.real, -np.inf)
    row_max = np.max(Er, axis=1)
    row_max = np.where(np.isfinite(row_max), row_max, 0.0)
    if np.max(np.abs(row_max)) < LOG_DOMAIN_THRESHOLD and np.max(np.abs(E.real)) < LOG_DOMAIN_THRESHOLD:
        values = (np.exp(E) * F) @ W
        logs = LogComplex.from_complex(values)
    else:
        S = (np.exp(E - row_max[:, None]) * F) @ W
        with np.errstate(divide="ignore"):
            logs = LogComplex(row_max + np.log(np.abs(S)), np.angle(S))
        values = logs.to_complex()
    sol = ModeSolution(sym.j, grid, values, th, branch, log_values=logs)
    sol.residual = residual(sym, sol, fv)
    return sol


def solve_mode_oracle(sym: ModeSymbol, f, grid=None, threshold: float = RESONANCE_THRESHOLD,
                      tail_tol: float = 1e-10) -> ModeSolution:
    """Spectral Galerkin solve: (i m) u_m + sum_r c_r u_{m-r} = f_m, |m| <= K."""
    grid = _as_grid(grid)
    fv = _as_values(f, grid)
    n = len(grid)
    c0 = sym.c0
    K = (n - 1) // 2
    modes = np.arange(-K, K + 1)
    # Fourier coefficients of f relative to t measured from grid[0]
    fhat_full = np.fft.fft(fv) / n
    fhat = fhat_full[modes % n] * np.exp(-1j * modes * grid[0])
    if sym.a.is_constant() and sym.b.is_constant():
        uhat = _diagonal_solve(sym, modes, fhat, threshold, tail_tol)
        return _oracle_solution(sym, grid, fv, modes, uhat)
    if dist_to_imaginary_integers(c0) < threshold:
        raise SingularSystem(f"mode {sym.j}: Galerkin system singular near c0 = {c0}")
    # The Galerkin matrix has condition number ~ exp(spread of Re C(t) - c0 t);
    # past eps * cond > tail_tol its answer cannot be trusted, so refuse.
    spread = float(np.ptp(sym.periodic_primitive(grid).real))
    if spread > math.log(tail_tol / np.finfo(float).eps):
        raise SingularSystem(f"mode {sym.j}: Galerkin system ill-conditioned (exponent spread {spread:.1f})")
    chat = sym.fourier()
    d = max(abs(k) for k in chat)
    size = len(modes)
    ab = np.zeros((2 * d + 1, size), dtype=complex)
    # banded storage: ab[d + i - j, j] = A[i, j]
    for r, cr in chat.items():
        row = d + r
        if r >= 0:
            ab[row, : size - r] += cr
        else:
            ab[row, -r:] += cr
    ab[d, :] += 1j * modes
    try:
        uhat = solve_banded((d, d), ab, fhat)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(uhat)):
        raise SingularSystem("non-finite Galerkin solution")
    peak = np.max(np.abs(uhat))
    if peak > 0:
        tail = np.abs(uhat[np.abs(modes) >= int(0.9 * K)])
        if tail.size and np.max(tail) > tail_tol * peak:
            raise TruncationInsufficient(
                f"mode {sym.j}: tail/peak = {np.max(tail) / peak:.3e} exceeds {tail_tol:.1e}")
    return _oracle_solution(sym, grid, fv, modes, uhat)


def _diagonal_solve(sym: ModeSymbol, modes: np.ndarray, fhat: np.ndarray, threshold: float,
                    tail_tol: float) -> np.ndarray:
    """Constant c: (i m + c0) u_m = f_m.  A null diagonal entry is fine when f_m = 0 there."""
    denom = 1j * modes + sym.c0
    null = np.abs(denom) < max(threshold, 0.0) + np.finfo(float).tiny
    scale = max(float(np.max(np.abs(fhat))), np.finfo(float).tiny)
    if np.any(null & (np.abs(fhat) > tail_tol * scale)):
        raise SingularSystem(f"mode {sym.j}: right-hand side excites the resonant frequency")
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(null, 0.0, fhat / np.where(null, 1.0, denom))


def _oracle_solution(sym: ModeSymbol, grid: np.ndarray, fv: np.ndarray, modes: np.ndarray,
                     uhat: np.ndarray) -> ModeSolution:
    values = np.exp(1j * np.outer(grid, modes)) @ uhat
    sol = ModeSolution(sym.j, grid, values, theta(sym.c0), select_branch(sym, grid))
    sol.residual = residual(sym, sol, fv)
    sol.coefficients = dict(zip(modes.tolist(), uhat))
    return sol


def residual(sym: ModeSymbol, sol: ModeSolution, f) -> float:
    """sup |u' + c u - f| with u' taken spectrally.

    Solutions beyond float range are compared after a common rescaling,
    so the value is then relative to sup |u|.
    """
    fv = _as_values(f, sol.grid)
    c = sym.c_of_t(sol.grid)
    values = sol.values
    if not np.all(np.isfinite(values)):
        shift = float(np.max(sol.log_values.log_mag))
        values = sol.log_values.scaled(shift)
        fv = fv * math.exp(-shift) if shift < 700 else np.zeros_like(fv)
    du = spectral_derivative(values)
    return float(np.max(np.abs(du + c * values - fv)))


def exp_primitive_derivatives(sym: ModeSymbol, grid, kmax: int) -> list[np.ndarray]:
    """Y_k with d^k/dt^k e^{C(t)} = Y_k(t) e^{C(t)}, k = 0..kmax.

    Recursion Y_{k+1} = Y_k' + c Y_k with spectral derivatives; each Y_k
    is a trig polynomial so the grid only has to resolve its band.
    """
    grid = _as_grid(grid)
    c = sym.c_of_t(grid)
    out = [np.ones_like(grid, dtype=complex)]
    for _ in range(kmax):
        y = out[-1]
        out.append(spectral_derivative(y) + c * y)
    return out

