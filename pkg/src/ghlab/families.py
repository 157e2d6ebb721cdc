"""Symbolic per-mode coefficient families for time-dependent operators.

A family describes, for every mode j,

    a_j(t) = mean_a(j) + amp_a(j) * shape_a(freq_a(j) t)
    b_j(t) = mean_b(j) + amp_b(j) * shape_b(freq_b(j) t)

with scaling rules s(j) = coef * j^power * log^log_power(2 + j) and
integer frequency rules freq(j) = mult * j + offset.  The finite
description is what lets the classifier compare growth orders exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .diophantine import RealSpec, float_spec, parse_real
from .errors import PreconditionError
from .trig import TrigPoly


@dataclass(frozen=True)
class ScalingRule:
    coef: float = 0.0
    power: float = 0.0
    log_power: float = 0.0

    def __call__(self, j: int) -> float:
        if self.coef == 0.0:
            return 0.0
        return self.coef * j ** self.power * math.log(2 + j) ** self.log_power

    @property
    def is_zero(self) -> bool:
        return self.coef == 0.0

    def order(self) -> tuple[float, float]:
        """Growth order (power, log_power); -inf for the zero rule."""
        if self.is_zero:
            return (-math.inf, -math.inf)
        return (self.power, self.log_power)

    def divided_by(self, other: "ScalingRule") -> "ScalingRule":
        if other.is_zero:
            raise PreconditionError("division by the zero rule")
        return ScalingRule(self.coef / other.coef, self.power - other.power, self.log_power - other.log_power)

    def tends_to_infinity(self) -> bool:
        return not self.is_zero and self.order() > (0.0, 0.0)

    def tends_to_zero(self) -> bool:
        return not self.is_zero and self.order() < (0.0, 0.0)

    def bounded_away_from_zero(self) -> bool:
        return not self.is_zero and self.order() >= (0.0, 0.0)

    def superlog(self) -> bool:
        """|s(j)| / log(2 + j) -> infinity."""
        return not self.is_zero and self.order() > (0.0, 1.0)

    def at_most_log(self) -> bool:
        return self.is_zero or self.order() <= (0.0, 1.0)

    @classmethod
    def constant(cls, value: float) -> "ScalingRule":
        return cls(float(value), 0.0, 0.0)


@dataclass(frozen=True)
class FrequencyRule:
    mult: int = 0
    offset: int = 1

    def __call__(self, j: int) -> int:
        return self.mult * j + self.offset

    def order(self) -> tuple[float, float]:
        return (1.0, 0.0) if self.mult != 0 else (0.0, 0.0)

    def as_scaling(self) -> ScalingRule:
        """Asymptotic scaling of the frequency (mult * j, or the constant)."""
        if self.mult != 0:
            return ScalingRule(float(abs(self.mult)), 1.0, 0.0)
        return ScalingRule.constant(float(abs(self.offset)))


@dataclass(frozen=True)
class CoefficientFamily:
    """mean(j) + amp(j) * shape(freq(j) t) for one of the coefficients."""

    mean: ScalingRule = field(default_factory=ScalingRule)
    amp: ScalingRule = field(default_factory=ScalingRule)
    shape: TrigPoly = field(default_factory=TrigPoly)
    freq: FrequencyRule = field(default_factory=FrequencyRule)
    exact_mean: Optional[RealSpec] = None  # exact value of mean.coef when known

    def __post_init__(self):
        if self.shape.mean != 0.0:
            raise PreconditionError("family shapes must have zero mean; put the mean in the scaling rule")
        if self.freq.mult == 0 and self.freq.offset == 0 and not self.shape.is_zero():
            raise PreconditionError("frequency rule vanishes identically")

    def at(self, j: int) -> TrigPoly:
        """The concrete trig polynomial for mode j."""
        m = self.mean(j)
        if self.amp.is_zero or self.shape.is_zero():
            return TrigPoly.constant(m)
        k = self.freq(j)
        if k == 0:
            raise PreconditionError(f"frequency vanishes at mode {j}")
        sign = 1 if k > 0 else -1
        k = abs(k)
        amp = self.amp(j)
        deg = self.shape.degree * k
        cos = [0.0] * (deg + 1)
        sin = [0.0] * deg
        cos[0] = m
        for d, a, b in self.shape.coefficient_pairs():
            cos[d * k] += amp * a
            sin[d * k - 1] += amp * b * sign
        return TrigPoly(tuple(cos), tuple(sin))

    def mean_spec(self) -> RealSpec:
        return self.exact_mean if self.exact_mean is not None else float_spec(self.mean.coef)

    @property
    def oscillating(self) -> bool:
        return not (self.amp.is_zero or self.shape.is_zero())


@dataclass(frozen=True)
class ModeFamily:
    a: CoefficientFamily
    b: CoefficientFamily

    def coefficients(self, j: int) -> tuple[TrigPoly, TrigPoly]:
        return self.a.at(j), self.b.at(j)


def _rule(obj, default_coef: float = 0.0) -> ScalingRule:
    if obj is None:
        return ScalingRule(default_coef)
    if isinstance(obj, (int, float)):
        return ScalingRule.constant(float(obj))
    unknown = set(obj) - {"coef", "power", "log_power"}
    if unknown:
        raise PreconditionError(f"unknown scaling keys {sorted(unknown)}")
    return ScalingRule(float(obj.get("coef", 1.0)), float(obj.get("power", 0.0)), float(obj.get("log_power", 0.0)))


def coefficient_family(mean=None, amp=None, shape: Optional[TrigPoly] = None, freq=None) -> CoefficientFamily:
    """Convenience constructor; ``mean`` may be a number, a RealSpec string, or a rule dict."""
    exact = None
    if isinstance(mean, str):
        exact = parse_real(mean)
        mean_rule = ScalingRule.constant(float(exact))
    elif isinstance(mean, RealSpec):
        exact = mean
        mean_rule = ScalingRule.constant(float(mean))
    else:
        mean_rule = _rule(mean)
    if freq is None:
        fr = FrequencyRule(1, 0)
    elif isinstance(freq, dict):
        fr = FrequencyRule(int(freq.get("mult", 0)), int(freq.get("offset", 0)))
    else:
        fr = FrequencyRule(0, int(freq))
    return CoefficientFamily(mean_rule, _rule(amp, 1.0 if shape is not None else 0.0),
                             shape if shape is not None else TrigPoly(), fr, exact)
