"""Real trigonometric polynomials on the circle, their primitives, and
spectral helpers on uniform periodic grids."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def uniform_grid(n: int, start: float = 0.0) -> np.ndarray:
    """n equispaced points on [start, start + 2*pi)."""
    if n < 1:
        raise ValueError("grid needs at least one point")
    return start + TWO_PI * np.arange(n) / n


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def spectral_derivative(values, order: int = 1) -> np.ndarray:
    """Derivative of a 2*pi-periodic sample vector via FFT.

    The Nyquist coefficient is dropped for odd orders so real input
    stays real.
    """
    values = np.asarray(values)
    if order == 0:
        return values.copy()
    n = values.shape[-1]
    k = _wavenumbers(n)
    mult = (1j * k) ** order
    if n % 2 == 0 and order % 2 == 1:
        mult[n // 2] = 0.0
    out = np.fft.ifft(np.fft.fft(values, axis=-1) * mult, axis=-1)
    if np.isrealobj(values):
        return out.real
    return out


def _trim(coeffs) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class TrigPoly:
    """c0 + sum_k (cos_coeffs[k] cos kt + sin_k sin kt).

    ``sin_coeffs[0]`` is the coefficient of sin(t), i.e. index k-1.
    """

    cos_coeffs: tuple[float, ...] = (0.0,)
    sin_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        cos = _trim(self.cos_coeffs) or (0.0,)
        sin = _trim(self.sin_coeffs)
        if not all(np.isfinite(cos)) or not all(np.isfinite(sin)):
            raise ValueError("trigonometric coefficients must be finite")
        object.__setattr__(self, "cos_coeffs", cos)
        object.__setattr__(self, "sin_coeffs", sin)

    @classmethod
    def constant(cls, value: float) -> "TrigPoly":
        return cls((float(value),))

    @property
    def mean(self) -> float:
        return self.cos_coeffs[0]

    @property
    def degree(self) -> int:
        deg_c = len(_trim(self.cos_coeffs[1:]))
        return max(deg_c, len(self.sin_coeffs))

    def coefficient_pairs(self):
        """Yield (k, cos_k, sin_k) for k = 1..degree."""
        for k in range(1, self.degree + 1):
            a = self.cos_coeffs[k] if k < len(self.cos_coeffs) else 0.0
            b = self.sin_coeffs[k - 1] if k - 1 < len(self.sin_coeffs) else 0.0
            yield k, a, b

    def is_zero(self) -> bool:
        return self.mean == 0.0 and all(a == 0.0 and b == 0.0 for _, a, b in self.coefficient_pairs())

    def is_constant(self) -> bool:
        return self.degree == 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.mean)
        for k, a, b in self.coefficient_pairs():
            if a:
                out = out + a * np.cos(k * t)
            if b:
                out = out + b * np.sin(k * t)
        return out

    def derivative(self) -> "TrigPoly":
        cos = [0.0]
        sin = []
        for k, a, b in self.coefficient_pairs():
            cos.append(k * b)
            sin.append(-k * a)
        return TrigPoly(tuple(cos), tuple(sin))

    def lipschitz_bound(self) -> float:
        """Upper bound for sup |p'|: sum k(|a_k| + |b_k|)."""
        return float(sum(k * (abs(a) + abs(b)) for k, a, b in self.coefficient_pairs()))

    def sup_bound(self) -> float:
        return abs(self.mean) + float(sum(abs(a) + abs(b) for _, a, b in self.coefficient_pairs()))

    def scale(self, factor: float) -> "TrigPoly":
        return TrigPoly(tuple(factor * c for c in self.cos_coeffs), tuple(factor * s for s in self.sin_coeffs))

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        n = max(len(self.cos_coeffs), len(other.cos_coeffs))
        m = max(len(self.sin_coeffs), len(other.sin_coeffs))
        cos = [(self.cos_coeffs[i] if i < len(self.cos_coeffs) else 0.0)
               + (other.cos_coeffs[i] if i < len(other.cos_coeffs) else 0.0) for i in range(n)]
        sin = [(self.sin_coeffs[i] if i < len(self.sin_coeffs) else 0.0)
               + (other.sin_coeffs[i] if i < len(other.sin_coeffs) else 0.0) for i in range(m)]
        return TrigPoly(tuple(cos), tuple(sin))

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1.0)

    def reflect(self) -> "TrigPoly":
        """t -> p(-t): flips the sine part."""
        return TrigPoly(self.cos_coeffs, tuple(-s for s in self.sin_coeffs))

    def oscillatory(self) -> "TrigPoly":
        return TrigPoly((0.0,) + self.cos_coeffs[1:], self.sin_coeffs)

    def fourier(self) -> dict[int, complex]:
        """Complex exponential coefficients {k: c_k} with p = sum c_k e^{ikt}."""
        out = {0: complex(self.mean)}
        for k, a, b in self.coefficient_pairs():
            out[k] = complex(a / 2.0, -b / 2.0)
            out[-k] = complex(a / 2.0, b / 2.0)
        return out


@dataclass(frozen=True)
class PrimitiveFn:
    """t -> linear_slope * t + periodic_part(t), vanishing at t = 0."""

    linear_slope: float
    periodic_part: TrigPoly = field(default_factory=TrigPoly)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return self.linear_slope * t + self.periodic_part(t)

    def derivative(self) -> TrigPoly:
        d = self.periodic_part.derivative()
        return TrigPoly((self.linear_slope,) + d.cos_coeffs[1:], d.sin_coeffs)

    def from_point(self, t0: float):
        """Primitive based at t0: t -> value(t) - value(t0)."""
        base = float(self(t0))
        return lambda t: self(t) - base


def trig_mean(p: TrigPoly) -> float:
    return p.mean


def trig_primitive(p: TrigPoly) -> PrimitiveFn:
    """Exact antiderivative with value 0 at t = 0."""
    cos = [0.0]
    sin = []
    for k, a, b in p.coefficient_pairs():
        # integral of a cos kt + b sin kt is (a/k) sin kt - (b/k) cos kt
        cos.append(-b / k)
        sin.append(a / k)
    cos[0] = -sum(cos[1:])
    return PrimitiveFn(p.mean, TrigPoly(tuple(cos), tuple(sin)))
