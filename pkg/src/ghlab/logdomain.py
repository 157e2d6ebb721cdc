"""Complex numbers stored as (log|z|, arg z).

Fields may be scalars or numpy arrays of matching shape, which lets a
whole grid of values like exp(nu * B(t)) live in the log domain.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# exponents at or above this size are never materialised directly
LOG_DOMAIN_THRESHOLD = 50.0
_MAX_FINITE_LOG = float(np.log(np.finfo(float).max))


@dataclass(frozen=True)
class LogComplex:
    log_mag: object
    arg: object

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            mag = np.log(np.abs(z))
        return cls(_unwrap(mag), _unwrap(np.angle(z)))

    @classmethod
    def exp(cls, w) -> "LogComplex":
        """e^w for complex w, without ever forming e^{Re w}."""
        w = np.asarray(w, dtype=complex)
        return cls(_unwrap(w.real.copy()), _unwrap(w.imag.copy()))

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return LogComplex(np.add(self.log_mag, other.log_mag), np.add(self.arg, other.arg))

    __rmul__ = __mul__

    def __truediv__(self, other: "LogComplex") -> "LogComplex":
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return LogComplex(np.subtract(self.log_mag, other.log_mag), np.subtract(self.arg, other.arg))

    def conj(self) -> "LogComplex":
        return LogComplex(self.log_mag, np.negative(self.arg))

    def abs(self):
        with np.errstate(over="ignore"):
            return np.exp(self.log_mag)

    def overflows(self):
        """True where to_complex would saturate to infinity."""
        return np.asarray(self.log_mag) > _MAX_FINITE_LOG

    def to_complex(self):
        """Materialise; magnitudes beyond float range saturate to inf."""
        with np.errstate(over="ignore", invalid="ignore"):
            mag = np.exp(self.log_mag)
            out = mag * np.exp(1j * np.asarray(self.arg))
        over = self.overflows()
        if np.ndim(out) == 0:
            return complex(np.inf, 0.0) if over else complex(out)
        out = np.where(over, complex(np.inf, 0.0), out)
        return out

    def scaled(self, shift: float):
        """Values multiplied by e^{-shift}, materialised."""
        return LogComplex(np.subtract(self.log_mag, shift), self.arg).to_complex()


def _unwrap(x):
    return float(x) if np.ndim(x) == 0 else x
