"""Resonance sets, irrationality-exponent fits and Liouville witness search.

Exact arithmetic is used wherever the input allows it: rationals and
continued fractions go through ``fractions.Fraction``; quadratic surds
(a + b sqrt(d)) / c are rounded with integer square roots and their
distance to the integers is formed from an exact integer numerator.
Floating point is confined to ``Float`` inputs, whose results are always
marked inexact.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import NotFound, PreconditionError, ResonantIndexPresent

FLOAT_RESONANCE_THRESHOLD = 1e-12
FIT_FAILURE_EXPONENT = 2.0
FIT_START_INDEX = 16


class RealKind(enum.Enum):
    RATIONAL = "Rational"
    QUADRATIC = "QuadraticIrrational"
    CONTINUED_FRACTION = "ContinuedFraction"
    FLOAT = "Float"


@dataclass(frozen=True)
class RealSpec:
    """A real number with an exactness-preserving representation.

    ``quadratic`` holds (a, b, d, c) for (a + b sqrt(d)) / c with d > 1
    square-free-ish (only non-squareness matters).  ``truncated`` marks a
    finite continued fraction standing in for an irrational number (the
    Liouville constant presets).
    """

    kind: RealKind
    rational: Optional[Fraction] = None
    quadratic: Optional[tuple[int, int, int, int]] = None
    quotients: tuple[int, ...] = ()
    value_float: Optional[float] = None
    truncated: bool = False
    text: str = ""

    @property
    def is_exact(self) -> bool:
        return self.kind is not RealKind.FLOAT

    @property
    def is_rational(self) -> bool:
        return self.kind in (RealKind.RATIONAL, RealKind.CONTINUED_FRACTION)

    @property
    def is_irrational(self) -> bool:
        """Known irrational, counting truncated stand-ins as irrational."""
        if self.kind is RealKind.QUADRATIC:
            return True
        return self.kind is RealKind.CONTINUED_FRACTION and self.truncated

    @property
    def exact_value(self) -> Optional[Fraction]:
        return self.rational if self.is_rational else None

    def __float__(self) -> float:
        if self.kind is RealKind.FLOAT:
            return float(self.value_float)
        if self.is_rational:
            return float(self.rational)
        a, b, d, c = self.quadratic
        return (a + b * math.sqrt(d)) / c

    def is_zero(self) -> bool:
        if self.kind is RealKind.FLOAT:
            return self.value_float == 0.0
        return self.is_rational and self.rational == 0

    def scaled_by_int(self, k: int) -> "RealSpec":
        """k * self, keeping the representation exact."""
        if self.kind is RealKind.FLOAT:
            return float_spec(k * self.value_float)
        if self.is_rational:
            return rational(self.rational * k)
        a, b, d, c = self.quadratic
        return quadratic(a * k, b * k, d, c)

    def __str__(self) -> str:
        return self.text or to_text(self)


def rational(value, denominator: Optional[int] = None) -> RealSpec:
    q = Fraction(value) if denominator is None else Fraction(value, denominator)
    return RealSpec(RealKind.RATIONAL, rational=q, text=f"rational:{q.numerator}/{q.denominator}")


def quadratic(a: int, b: int, d: int, c: int = 1, text: str = "") -> RealSpec:
    if c == 0:
        raise PreconditionError("quadratic denominator must be nonzero")
    if c < 0:
        a, b, c = -a, -b, -c
    r = math.isqrt(d) if d >= 0 else -1
    if d < 0:
        raise PreconditionError("quadratic radicand must be nonnegative")
    if b == 0 or r * r == d:
        return rational(Fraction(a + b * r, c))
    return RealSpec(RealKind.QUADRATIC, quadratic=(int(a), int(b), int(d), int(c)),
                    text=text or f"quadratic:{a},{b},{d},{c}")


def golden_ratio() -> RealSpec:
    return quadratic(1, 1, 5, 2, text="golden_ratio")


def continued_fraction(quotients: Sequence[int], truncated: bool = False, text: str = "") -> RealSpec:
    qs = tuple(int(x) for x in quotients)
    if not qs:
        raise PreconditionError("continued fraction needs at least one quotient")
    if any(x <= 0 for x in qs[1:]):
        raise PreconditionError("partial quotients after the first must be positive")
    val = Fraction(qs[-1])
    for x in reversed(qs[:-1]):
        val = x + 1 / val
    body = ",".join(str(x) for x in qs[1:])
    return RealSpec(RealKind.CONTINUED_FRACTION, rational=val, quotients=qs, truncated=truncated,
                    text=text or f"cf:[{qs[0]};{body}]")


def fraction_to_cf(x: Fraction) -> tuple[int, ...]:
    out = []
    x = Fraction(x)
    while True:
        a = math.floor(x)
        out.append(a)
        frac = x - a
        if frac == 0:
            return tuple(out)
        x = 1 / frac


def liouville_constant(depth: int) -> RealSpec:
    """sum_{k=1}^{depth} 10^{-k!}, as a finite continued fraction."""
    if depth < 1:
        raise PreconditionError("Liouville depth must be positive")
    val = sum(Fraction(1, 10 ** math.factorial(k)) for k in range(1, depth + 1))
    return continued_fraction(fraction_to_cf(val), truncated=True, text=f"liouville_constant:{depth}")


def float_spec(x: float) -> RealSpec:
    return RealSpec(RealKind.FLOAT, value_float=float(x), text=f"float:{float(x)!r}")


_CF_RE = re.compile(r"^cf:\[\s*(-?\d+)\s*(?:;\s*([\d\s,]*))?\]$")


def parse_real(text: str) -> RealSpec:
    """Parse the textual forms rational:p/q, cf:[a0;a1,...], float:x,
    golden_ratio, liouville_constant:depth, quadratic:a,b,d,c."""
    t = str(text).strip()
    if t == "golden_ratio":
        return golden_ratio()
    if t.startswith("rational:"):
        body = t[len("rational:"):]
        try:
            if "/" in body:
                p, q = body.split("/")
                return rational(int(p), int(q))
            return rational(Fraction(body))
        except (ValueError, ZeroDivisionError) as exc:
            raise PreconditionError(f"bad rational {body!r}") from exc
    if t.startswith("liouville_constant:"):
        return liouville_constant(int(t.split(":", 1)[1]))
    if t.startswith("float:"):
        return float_spec(float(t.split(":", 1)[1]))
    if t.startswith("quadratic:"):
        parts = [int(x) for x in t.split(":", 1)[1].split(",")]
        if len(parts) != 4:
            raise PreconditionError("quadratic needs a,b,d,c")
        return quadratic(*parts)
    m = _CF_RE.match(t)
    if m:
        rest = [int(x) for x in (m.group(2) or "").replace(" ", "").split(",") if x]
        return continued_fraction([int(m.group(1))] + rest)
    raise PreconditionError(f"unrecognised real number spec {text!r}")


def to_text(x: RealSpec) -> str:
    if x.text:
        return x.text
    if x.kind is RealKind.FLOAT:
        return f"float:{x.value_float!r}"
    if x.kind is RealKind.RATIONAL:
        return f"rational:{x.rational.numerator}/{x.rational.denominator}"
    if x.kind is RealKind.QUADRATIC:
        return "quadratic:" + ",".join(str(v) for v in x.quadratic)
    return f"cf:[{x.quotients[0]};" + ",".join(str(v) for v in x.quotients[1:]) + "]"


# ---------------------------------------------------------------- distances

def nearest_int_dist(x) -> tuple[float, int]:
    """(min_l |x + l|, argmin l); ties go to the even l.

    Accepts floats, ints, Fractions, or a RealSpec.
    """
    if isinstance(x, RealSpec):
        return exact_dist(x)
    if isinstance(x, (Fraction, int)):
        r = round(Fraction(x))
        return float(abs(Fraction(x) - r)), -int(r)
    x = float(x)
    if not math.isfinite(x):
        raise PreconditionError("nearest_int_dist needs a finite value")
    r = round(x)  # half-to-even, so -r is even on ties
    return abs(x - r), -int(r)


def _sign_sqrt_minus(b: int, d: int, r: int) -> int:
    """Sign of b*sqrt(d) - r for integers, d not a perfect square."""
    lhs_neg = b < 0
    if b == 0:
        return -1 if r > 0 else (1 if r < 0 else 0)
    if lhs_neg and r >= 0:
        return -1
    if not lhs_neg and r <= 0:
        return 1
    # same signs: compare squares
    sq_l, sq_r = b * b * d, r * r
    if lhs_neg:
        return 1 if sq_l < sq_r else -1
    return 1 if sq_l > sq_r else -1


def _floor_b_sqrt(b: int, d: int) -> int:
    s = math.isqrt(b * b * d)
    if b >= 0:
        return s
    # -sqrt(b^2 d) is irrational, so its floor is -s - 1
    return -s - 1


def _quadratic_dist(a: int, b: int, d: int, c: int) -> tuple[float, int]:
    """Distance of (a + b sqrt d)/c (c > 0) to Z, exact up to one rounding."""
    fl = (a + _floor_b_sqrt(b, d)) // c
    # x - fl >= 1/2  <=>  2 b sqrt(d) >= (2 fl + 1) c - 2 a
    upper = _sign_sqrt_minus(2 * b, d, (2 * fl + 1) * c - 2 * a) > 0
    n = fl + 1 if upper else fl
    p = a - n * c
    # (p + b sqrt d) = (p^2 - b^2 d) / (p - b sqrt d), no cancellation below
    num = p * p - b * b * d
    den = c * (p - b * math.sqrt(d))
    return abs(num / den), -n


def exact_dist(x: RealSpec) -> tuple[float, int]:
    if x.kind is RealKind.FLOAT:
        return nearest_int_dist(x.value_float)
    if x.is_rational:
        return nearest_int_dist(x.rational)
    return _quadratic_dist(*x.quadratic)


def product_dist(a0: RealSpec, mu) -> tuple[float, int, bool]:
    """Distance of a0 * mu to Z, plus whether it was computed exactly."""
    if isinstance(mu, (int, Fraction)) and a0.is_exact:
        mu = Fraction(mu)
        if a0.is_rational:
            d, l = nearest_int_dist(a0.rational * mu)
            return d, l, True
        a, b, dd, c = a0.quadratic
        d, l = _quadratic_dist(a * mu.numerator, b * mu.numerator, dd, c * mu.denominator)
        return d, l, True
    d, l = nearest_int_dist(float(a0) * float(mu))
    return d, l, False


# ----------------------------------------------------------- mu sequences

@dataclass(frozen=True)
class MuSequence:
    """Access to mu_j, exact (int/Fraction) when the source allows it."""

    getter: Callable[[int], Union[int, Fraction, float]]
    exact: bool
    integer_valued: bool = False
    linear: bool = False  # mu_j = j

    def __call__(self, j: int):
        return self.getter(j)

    def floats(self, js: np.ndarray) -> np.ndarray:
        return np.array([float(self.getter(int(j))) for j in js])


def as_mu(mu) -> MuSequence:
    if isinstance(mu, MuSequence):
        return mu
    if mu == "j" or mu is None:
        return MuSequence(lambda j: j, True, True, True)
    # EigenData duck-typing
    if hasattr(mu, "exact_mu") and hasattr(mu, "entry"):
        e = mu
        if e.exact_mu(1) is not None:
            return MuSequence(lambda j: e.exact_mu(j), True, e.mu_is_integer_valued())
        return MuSequence(lambda j: e.entry(j).mu, False)
    if callable(mu):
        probe = mu(1)
        exact = isinstance(probe, (int, Fraction))
        return MuSequence(mu, exact, isinstance(probe, int))
    seq = list(mu)
    exact = all(isinstance(x, (int, Fraction)) for x in seq)
    return MuSequence(lambda j: seq[j - 1], exact, all(isinstance(x, int) for x in seq))


# ------------------------------------------------------------- resonances

@dataclass(frozen=True)
class ResonanceReport:
    resonant_indices: tuple[int, ...]
    exact: bool
    jmax: int


def resonance_set(a0: RealSpec, mu, jmax: int) -> ResonanceReport:
    """{j <= jmax : a0 mu_j in Z}."""
    seq = as_mu(mu)
    js = range(1, jmax + 1)
    if a0.is_zero():
        return ResonanceReport(tuple(js), a0.is_exact or a0.value_float == 0.0, jmax)
    if a0.is_exact and seq.exact:
        if a0.is_rational:
            q = a0.rational
            hits = tuple(j for j in js if (q * Fraction(seq(j))).denominator == 1)
        else:
            # irrational times rational is an integer only when mu_j = 0
            hits = tuple(j for j in js if Fraction(seq(j)) == 0)
        return ResonanceReport(hits, True, jmax)
    x = float(a0)
    hits = tuple(j for j in js if nearest_int_dist(x * float(seq(j)))[0] < FLOAT_RESONANCE_THRESHOLD)
    return ResonanceReport(hits, False, jmax)


# ---------------------------------------------------------- exponent fits

@dataclass(frozen=True)
class ExponentFit:
    delta_hat: float
    C_hat: float
    violations: int
    fit_failed: bool
    exact: bool
    records: tuple[tuple[int, float], ...] = ()
    local_exponents: tuple[float, ...] = ()
    diagnostics: dict = field(default_factory=dict)


def _convergents(quotients: Iterable[int]):
    """Yield (p_n, q_n) for the given partial quotients."""
    pm2, qm2, pm1, qm1 = 0, 1, 1, 0
    for a in quotients:
        p = a * pm1 + pm2
        q = a * qm1 + qm2
        yield p, q
        pm2, qm2, pm1, qm1 = pm1, qm1, p, q


def floor_quadratic(a: int, b: int, d: int, c: int) -> int:
    """floor((a + b sqrt d) / c) exactly, d not a perfect square."""
    if c < 0:
        a, b, c = -a, -b, -c
    return (a + _floor_b_sqrt(b, d)) // c


def quadratic_cf(a: int, b: int, d: int, c: int, count: int) -> list[int]:
    """First ``count`` partial quotients of (a + b sqrt d)/c."""
    if b < 0:
        a, b, c = -a, -b, -c
    # (P + sqrt D) / Q with Q | D - P^2
    P, D, Q = a, b * b * d, c
    if (D - P * P) % Q != 0:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    out = []
    for _ in range(count):
        ai = floor_quadratic(P, 1, D, Q)
        out.append(ai)
        P = ai * Q - P
        Q = (D - P * P) // Q
    return out


def _records_from_cf(quotients: Sequence[int], value_dist, jmax: int):
    recs = []
    for p, q in _convergents(quotients):
        if q > jmax:
            break
        if q >= 1:
            d = value_dist(q)
            if not recs or d < recs[-1][1]:
                recs.append((q, d))
    return recs


def _records_scan(a0: RealSpec, seq: MuSequence, js: Sequence[int]):
    recs = []
    all_d = []
    exact = True
    best = math.inf
    for j in js:
        d, _, ex = product_dist(a0, seq(j))
        exact = exact and ex
        if d == 0.0 or (not ex and d < FLOAT_RESONANCE_THRESHOLD):
            raise ResonantIndexPresent(f"index {j} is resonant (a0 mu_j in Z)")
        all_d.append((j, d))
        if d < best:
            best = d
            recs.append((j, d))
    return recs, all_d, exact


def liouville_exponent_fit(a0: RealSpec, mu="j", jrange: Union[int, Sequence[int]] = 4096,
                           fail_exponent: float = FIT_FAILURE_EXPONENT,
                           start: int = FIT_START_INDEX) -> ExponentFit:
    """Lower-envelope fit of  d_j = dist(a0 mu_j, Z) >= C j^{-delta}.

    Records are indices where d_j drops below every earlier value; delta
    is the running maximum, over records past ``start``, of the local
    exponent -log(d_{r'}/d_r) / log(r'/r) between consecutive records.
    The maximum only grows as jrange extends, and a value above
    ``fail_exponent`` flags the fit as failed (Liouville-like behaviour).
    For mu_j = j with a rational, continued-fraction or quadratic a0 the
    records are the convergent denominators and no scan is needed.
    """
    seq = as_mu(mu)
    if isinstance(jrange, int):
        js = range(1, jrange + 1)
    else:
        js = list(jrange)
    jmax = max(js)
    full_range = isinstance(js, range) and js.start == 1 and js.step == 1
    all_d = None
    if full_range and seq.linear and a0.is_exact:
        if a0.is_rational:
            if (a0.rational * 1).denominator <= jmax:
                raise ResonantIndexPresent(f"index {a0.rational.denominator} is resonant")
            quotients = a0.quotients or fraction_to_cf(a0.rational)
        else:
            quotients = quadratic_cf(*a0.quadratic, count=200)
        recs = _records_from_cf(quotients, lambda q: exact_dist(a0.scaled_by_int(q))[0], jmax)
        # the first record is j = 1 unless a0 is closer to Z than 1 * a0 (it is j = 1)
        d1 = exact_dist(a0)[0]
        if not recs or recs[0][0] != 1:
            recs = [(1, d1)] + [r for r in recs if r[1] < d1]
        exact = True
        method = "convergents"
    else:
        recs, all_d, exact = _records_scan(a0, seq, js)
        method = "scan"

    tail = [(j, d) for j, d in recs if j >= start]
    # the envelope starts at the last record at or before `start`
    before = [(j, d) for j, d in recs if j < start]
    chain = (before[-1:] if before else []) + tail
    local = []
    for (j1, d1_), (j2, d2) in zip(chain, chain[1:]):
        local.append(-math.log(d2 / d1_) / math.log(j2 / j1))
    delta_hat = max([0.0] + local)
    # C_hat from the envelope; for j between records d_j >= d_record
    pool = chain if chain else recs[-1:]
    log_C = min(math.log(d) + delta_hat * math.log(j) for j, d in pool) if pool else math.nan
    C_hat = math.exp(log_C) if math.isfinite(log_C) else math.nan
    if all_d is not None:
        violations = sum(1 for j, d in all_d
                         if j >= start and math.log(d) + delta_hat * math.log(j) < log_C - 1e-12)
    else:
        violations = 0
    return ExponentFit(delta_hat, C_hat, violations, bool(delta_hat > fail_exponent), exact,
                       tuple(recs), tuple(local), {"method": method, "jmax": jmax, "start": start})


# ------------------------------------------------------------ witnesses

def liouville_witness_sequence(a0: RealSpec, mu="j", depth: int = 3, budget: int = 10 ** 6):
    """Greedy pairs (j_k, tau_k), k = 1..depth, with |a0 mu_{j_k} - tau_k| < j_k^{-k/2}.

    j_k increases strictly.  Raises NotFound(k) carrying the deepest level
    reached when the index budget runs out first.
    """
    seq = as_mu(mu)
    x = float(a0)
    pairs = []
    j = 0
    chunk = 1 << 16
    for k in range(1, depth + 1):
        found = None
        lo = j + 1
        while found is None and lo <= budget:
            hi = min(budget, lo + chunk - 1)
            js = np.arange(lo, hi + 1)
            mus = js.astype(float) if seq.linear else seq.floats(js)
            prod = x * mus
            approx = np.abs(prod - np.round(prod))
            bound = js.astype(float) ** (-k / 2.0)
            # float prefilter with a generous absolute margin, exact check after
            margin = 1e-9 * np.maximum(1.0, np.abs(prod))
            for jj in js[approx < bound + margin]:
                jj = int(jj)
                d, l, _ = product_dist(a0, seq(jj))
                if 0 < d < jj ** (-k / 2.0):
                    found = (jj, -l, d)
                    break
            lo = hi + 1
        if found is None:
            raise NotFound(k - 1, f"no index <= {budget} for level {k}")
        j = found[0]
        pairs.append((found[0], found[1]))
    return pairs
