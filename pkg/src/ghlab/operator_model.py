"""Operators L = D_t + a(t) p + i b(t) q encoded by eigen-sequence data.

Each mode j of the reference elliptic operator carries eigenvalues
mu_j (real part symbol) and nu_j (imaginary part symbol).  Generator
presets reproduce the standard torus examples so downstream modules can
reason symbolically about growth and arithmetic of the sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import CommutatorTooLarge, PreconditionError
from .trig import PrimitiveFn, TrigPoly, trig_primitive

GENERATOR_KINDS = ("torus_frequencies", "power", "log_power", "rational_decay", "constant", "explicit")


def torus_frequency(j: int) -> int:
    """j-th integer frequency in the order 0, 1, -1, 2, -2, ..."""
    if j < 1:
        raise IndexError("mode indices start at 1")
    half = j // 2
    return half if j % 2 == 0 else -half


@dataclass(frozen=True)
class EigenEntry:
    lam: float
    mu: float
    nu: float
    mult: int = 1


@dataclass(frozen=True)
class GeneratorSpec:
    """Symbolic description of an eigen-sequence family.

    kinds and parameters:
      torus_frequencies   mu = xi, nu = |xi|, lambda = |xi|
      power(s)            mu = nu = j**s, lambda = j
      log_power(rho)      mu = xi, nu = log(2 + |xi|)**rho, lambda = |xi|
      rational_decay(c, tau)  mu = nu = (c + j)**tau / j**(tau + 1)
      constant(mu, nu)    the same values for every j
      explicit            entries supplied directly
    Every kind accepts ``mu_mode`` in {"default", "zero"} to switch off
    the real part.
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise PreconditionError(f"unknown generator kind {self.kind!r}")
        items = self.params.items() if isinstance(self.params, dict) else self.params
        object.__setattr__(self, "params", tuple(sorted((str(k), v) for k, v in items)))

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    @classmethod
    def make(cls, kind: str, **params) -> "GeneratorSpec":
        return cls(kind, tuple(params.items()))


@dataclass(frozen=True)
class EigenData:
    n: int
    m: float
    entries: tuple[EigenEntry, ...]
    generator: Optional[GeneratorSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if not self.entries:
            raise PreconditionError("eigen data needs at least one entry")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def jmax(self) -> int:
        return len(self.entries)

    def entry(self, j: int) -> EigenEntry:
        if not 1 <= j <= len(self.entries):
            raise IndexError(f"mode index {j} outside 1..{len(self.entries)}")
        return self.entries[j - 1]

    @property
    def mu(self) -> np.ndarray:
        return np.array([e.mu for e in self.entries])

    @property
    def nu(self) -> np.ndarray:
        return np.array([e.nu for e in self.entries])

    @property
    def lam(self) -> np.ndarray:
        return np.array([e.lam for e in self.entries])

    def exact_mu(self, j: int) -> Optional[Fraction]:
        """mu_j as an exact rational when the generator makes it one."""
        g = self.generator
        if g is None:
            return None
        if g.get("mu_mode", "default") == "zero":
            return Fraction(0)
        if g.kind in ("torus_frequencies", "log_power"):
            return Fraction(torus_frequency(j))
        if g.kind == "power":
            s = g.get("s", 1)
            if float(s).is_integer() and s >= 0:
                return Fraction(j) ** int(s)
            return None
        if g.kind == "rational_decay":
            c, tau = int(g.get("c", 1)), int(g.get("tau", 1))
            return Fraction((c + j) ** tau, j ** (tau + 1))
        if g.kind == "constant":
            return Fraction(g.get("mu", 0)).limit_denominator() if g.get("exact", False) else None
        return None

    def mu_is_integer_valued(self) -> bool:
        g = self.generator
        if g is None:
            return False
        if g.get("mu_mode", "default") == "zero":
            return True
        if g.kind in ("torus_frequencies", "log_power"):
            return True
        if g.kind == "power":
            s = g.get("s", 1)
            return float(s).is_integer() and s >= 0
        return False

    def with_jmax(self, jmax: int) -> "EigenData":
        if self.generator is None or self.generator.kind == "explicit":
            raise PreconditionError("only generator-backed data can be regenerated")
        return eigen_generate(self.generator, jmax)


def _generated_values(g: GeneratorSpec, j: int) -> tuple[float, float, float]:
    if g.kind == "torus_frequencies":
        xi = torus_frequency(j)
        lam, mu, nu = abs(xi), xi, abs(xi)
    elif g.kind == "log_power":
        rho = float(g.get("rho", 1.0))
        xi = torus_frequency(j)
        lam, mu, nu = abs(xi), xi, math.log(2 + abs(xi)) ** rho
    elif g.kind == "power":
        s = float(g.get("s", 1.0))
        lam, mu, nu = j, j ** s, j ** s
    elif g.kind == "rational_decay":
        c, tau = int(g.get("c", 1)), int(g.get("tau", 1))
        val = (c + j) ** tau / j ** (tau + 1)
        lam, mu, nu = j, val, val
    elif g.kind == "constant":
        lam, mu, nu = j, float(g.get("mu", 0.0)), float(g.get("nu", 0.0))
    else:
        raise PreconditionError(f"generator kind {g.kind!r} cannot be evaluated pointwise")
    if g.get("mu_mode", "default") == "zero":
        mu = 0.0
    return float(lam), float(mu), float(nu)


def eigen_generate(spec: GeneratorSpec, jmax: int) -> EigenData:
    """Entries j = 1..jmax for a symbolic generator (n = m = 1)."""
    if jmax < 1:
        raise PreconditionError("jmax must be at least 1")
    if spec.kind == "explicit":
        raise PreconditionError("explicit data must be supplied through explicit_eigen")
    entries = tuple(EigenEntry(*_generated_values(spec, j)) for j in range(1, jmax + 1))
    return EigenData(int(spec.get("n", 1)), float(spec.get("m", 1.0)), entries, spec)


def explicit_eigen(mu, nu, lam=None, mult=None, n: int = 1, m: float = 1.0) -> EigenData:
    mu = [float(x) for x in mu]
    nu = [float(x) for x in nu]
    if len(mu) != len(nu):
        raise PreconditionError("mu and nu must have the same length")
    lam = [float(j) for j in range(1, len(mu) + 1)] if lam is None else [float(x) for x in lam]
    mult = [1] * len(mu) if mult is None else [int(x) for x in mult]
    entries = tuple(EigenEntry(*vals) for vals in zip(lam, mu, nu, mult))
    return EigenData(n, m, entries, GeneratorSpec("explicit"))


@dataclass(frozen=True)
class WeylReport:
    ratio_min: float
    ratio_max: float
    fitted_exponent: float
    bound: float
    ok: bool


def weyl_check(e: EigenData, bound: float = 10.0, exponent_tol: float = 0.25) -> WeylReport:
    """Spread of lambda_j / j^(m/n) over the upper half of the index range.

    A tail whose log-log slope misses m/n by more than ``exponent_tol`` is
    flagged too: a slowly varying ratio such as log(j)/j stays inside any
    fixed spread bound over a single octave.
    """
    if len(e) < 32:
        raise PreconditionError("weyl_check needs at least 32 entries")
    j = np.arange(1, len(e) + 1, dtype=float)
    tail = j > len(e) / 2
    lam = e.lam[tail]
    ratios = lam / j[tail] ** (e.m / e.n)
    rmin, rmax = float(ratios.min()), float(ratios.max())
    if rmin > 0:
        slope = float(np.polyfit(np.log(j[tail]), np.log(lam), 1)[0])
    else:
        slope = float("nan")
    ok = rmin > 0 and rmax / rmin <= bound and abs(slope - e.m / e.n) <= exponent_tol
    return WeylReport(rmin, rmax, slope, bound, bool(ok))


def simultaneous_diagonalize(P, Q, tol: float = 1e-8):
    """Common unitary eigenbasis for commuting Hermitian P, Q.

    Returns (U, dP, dQ) with U* P U ~ diag(dP) and U* Q U ~ diag(dQ).
    """
    P = np.asarray(P, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape != Q.shape:
        raise PreconditionError("P and Q must be square matrices of equal size")
    norm_p = np.linalg.norm(P, 2)
    norm_q = np.linalg.norm(Q, 2)
    for name, M, nm in (("P", P, norm_p), ("Q", Q, norm_q)):
        if np.linalg.norm(M - M.conj().T, 2) > tol * max(nm, 1.0):
            raise PreconditionError(f"{name} is not Hermitian within tolerance")
    if np.linalg.norm(P @ Q - Q @ P, 2) > tol * norm_p * norm_q:
        raise CommutatorTooLarge("P and Q do not commute within tolerance")

    size = P.shape[0]
    evals, vecs = np.linalg.eigh(0.5 * (P + P.conj().T))
    Qh = 0.5 * (Q + Q.conj().T)
    scale = tol * max(norm_p, 1.0)
    U = np.zeros((size, size), dtype=complex)
    start = 0
    while start < size:
        stop = start + 1
        while stop < size and evals[stop] - evals[stop - 1] <= scale:
            stop += 1
        V = vecs[:, start:stop]
        block = V.conj().T @ Qh @ V
        _, w = np.linalg.eigh(0.5 * (block + block.conj().T))
        U[:, start:stop] = V @ w
        start = stop
    dP = np.real(np.einsum("ij,jk,ki->i", U.conj().T, P, U))
    dQ = np.real(np.einsum("ij,jk,ki->i", U.conj().T, Q, U))
    return U, dP, dQ


def reduce_blocks(lams, p_blocks, q_blocks, tol: float = 1e-8, n: int = 1, m: float = 1.0) -> EigenData:
    """Flatten per-eigenspace Hermitian blocks into scalar modes."""
    entries = []
    for lam, Pb, Qb in zip(lams, p_blocks, q_blocks):
        _, dp, dq = simultaneous_diagonalize(np.atleast_2d(Pb), np.atleast_2d(Qb), tol)
        entries.extend(EigenEntry(float(lam), float(x), float(y)) for x, y in zip(dp, dq))
    return EigenData(n, m, tuple(entries), GeneratorSpec("explicit"))


@dataclass(frozen=True)
class RhsSpec:
    """Per-mode right-hand side f_j(t) = exp(-decay * j) * g(t).

    g is e^{i freq t} for kind "exp" and the real trig polynomial
    ``shape`` for kind "trig".
    """

    kind: str = "exp"
    freq: int = 1
    shape: TrigPoly = field(default_factory=lambda: TrigPoly((1.0,)))
    decay: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exp", "trig"):
            raise PreconditionError(f"unknown right-hand side kind {self.kind!r}")

    def values(self, j: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        amp = math.exp(-self.decay * j)
        if self.kind == "exp":
            return amp * np.exp(1j * self.freq * t)
        return amp * self.shape(t).astype(complex)


@dataclass(frozen=True)
class OperatorSpec:
    a: TrigPoly
    b: TrigPoly
    eigen: EigenData
    rhs: Optional[RhsSpec] = None

    def __post_init__(self):
        if not len(self.eigen):
            raise PreconditionError("operator needs nonempty eigen data")


@dataclass(frozen=True)
class ModeSymbol:
    """Coefficient c_j(t) = -nu_j b(t) + i mu_j a(t) of one mode."""

    j: int
    mu: float
    nu: float
    a: TrigPoly
    b: TrigPoly

    @property
    def c0(self) -> complex:
        return complex(-self.nu * self.b.mean, self.mu * self.a.mean)

    def c_of_t(self, t) -> np.ndarray:
        return -self.nu * self.b(t) + 1j * self.mu * self.a(t)

    @property
    def primitive_pair(self) -> tuple[PrimitiveFn, PrimitiveFn]:
        return trig_primitive(self.a), trig_primitive(self.b)

    def primitive(self, t) -> np.ndarray:
        """C_j(t) = -nu_j B(t) + i mu_j A(t) with C_j(0) = 0."""
        A, B = self.primitive_pair
        return -self.nu * B(t) + 1j * self.mu * A(t)

    def periodic_primitive(self, t) -> np.ndarray:
        """C_j(t) - c0 t, a 2*pi-periodic function."""
        A, B = self.primitive_pair
        return -self.nu * B.periodic_part(t) + 1j * self.mu * A.periodic_part(t)

    def fourier(self) -> dict[int, complex]:
        fa, fb = self.a.fourier(), self.b.fourier()
        keys = set(fa) | set(fb)
        return {k: -self.nu * fb.get(k, 0) + 1j * self.mu * fa.get(k, 0) for k in keys}

    @classmethod
    def from_coefficients(cls, a: TrigPoly, b: TrigPoly, j: int = 1) -> "ModeSymbol":
        """Mode with c(t) = -b(t) + i a(t), used for per-mode coefficient families."""
        return cls(j, 1.0, 1.0, a, b)


def mode_symbol(op: OperatorSpec, j: int) -> ModeSymbol:
    e = op.eigen.entry(j)
    return ModeSymbol(j, e.mu, e.nu, op.a, op.b)

