"""Global hypoellipticity decisions with a reasoning trace.

Every decision is reached through a named rule.  A rule only emits GH or
NotGH when each check on its path is exact (symbolic generator data,
exact real numbers) or certified (sign analysis, frames); anything
resting on fitted or floating-point evidence degrades to Inconclusive,
with the evidence kept in the trace.

Rule tags:
  zero-imaginary-part        b vanishes (or nu does): resonance + Liouville test
  definite-sign              b keeps one sign and nu stays away from zero
  sign-change-superlog       b changes sign along super-log nu
  log-growth-normal-form     nu at most logarithmic: decide on (a0, b0)
  vanishing-nu-omega         nu accumulates at zero: liminf of omega_j decides
  general-*                  the per-mode (time-dependent) variants
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .diophantine import (RealKind, RealSpec, float_spec, liouville_exponent_fit, rational,
                          resonance_set)
from .errors import DegenerateExtremum, GhlabError, PreconditionError, ResonantIndexPresent
from .families import ModeFamily, ScalingRule
from .normal_form import GrowthKind, growth_class
from .operator_model import EigenData, OperatorSpec
from .signs import DEFAULT_SIGN_GRID, SignKind, change_sign_frame, sign_analysis
from .trig import TWO_PI

DEFAULT_JMAX = 512


class Decision(enum.Enum):
    GH = "GH"
    NOT_GH = "NotGH"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class TraceStep:
    check: str
    inputs: dict
    outcome: str
    certified: bool = True


@dataclass
class Verdict:
    decision: Decision
    rule: str
    trace: list[TraceStep] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "decision": self.decision.value,
            "rule": self.rule,
            "trace": [asdict(s) for s in self.trace],
            "caveats": list(self.caveats),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, RealSpec):
        return str(obj)
    if hasattr(obj, "tolist"):
        return obj.tolist()
    return repr(obj)


class _Trace:
    def __init__(self):
        self.steps: list[TraceStep] = []
        self.caveats: list[str] = []

    def add(self, check: str, outcome: str, certified: bool = True, **inputs) -> None:
        self.steps.append(TraceStep(check, _plain(inputs), outcome, bool(certified)))

    def verdict(self, decision: Decision, rule: str) -> Verdict:
        if decision is not Decision.INCONCLUSIVE and not all(s.certified for s in self.steps if s.outcome != "skipped"):
            self.caveats.append("uncertified evidence on the decision path; downgraded to Inconclusive")
            decision = Decision.INCONCLUSIVE
        return Verdict(decision, rule, self.steps, self.caveats)


def _plain(d: dict) -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, float) and not math.isfinite(v):
            out[k] = repr(v)
        elif isinstance(v, (enum.Enum,)):
            out[k] = v.value
        elif isinstance(v, (RealSpec, Fraction)):
            out[k] = str(v)
        elif isinstance(v, tuple):
            out[k] = list(v)
        else:
            out[k] = v
    return out


# ------------------------------------------------------------ nu near zero

class NuZero(enum.Enum):
    AWAY = "bounded-away-from-zero"
    ACCUMULATES = "accumulates-at-zero"
    IDENTICALLY_ZERO = "identically-zero"
    UNKNOWN = "unknown"


def nu_zero_behaviour(e: EigenData) -> NuZero:
    """Does {nu_j} stay away from 0, accumulate at 0, or vanish identically?

    Decided symbolically for generator data; fitted data is UNKNOWN.
    """
    g = e.generator
    if g is None or g.kind == "explicit":
        return NuZero.UNKNOWN
    if g.kind == "constant":
        return NuZero.IDENTICALLY_ZERO if float(g.get("nu", 0.0)) == 0.0 else NuZero.AWAY
    if g.kind == "rational_decay":
        return NuZero.ACCUMULATES
    if g.kind == "power":
        s = float(g.get("s", 1.0))
        return NuZero.ACCUMULATES if s < 0 else NuZero.AWAY
    if g.kind == "log_power":
        return NuZero.AWAY if float(g.get("rho", 1.0)) >= 0 else NuZero.UNKNOWN
    if g.kind == "torus_frequencies":
        # nu_j = |xi_j| vanishes only at j = 1
        return NuZero.AWAY
    return NuZero.UNKNOWN


def _mu_tends_to_zero(e: EigenData) -> Optional[bool]:
    g = e.generator
    if g is None or g.kind == "explicit":
        return None
    if g.get("mu_mode", "default") == "zero":
        return True
    if g.kind == "rational_decay":
        return True
    if g.kind == "power":
        return float(g.get("s", 1.0)) < 0
    return False


# --------------------------------------------------- resonance / Liouville

def _mu_covers_all_integers(e: EigenData) -> bool:
    """mu_j runs through every nonnegative integer (torus-type ordering or mu_j = j)."""
    g = e.generator
    if g is None or g.get("mu_mode", "default") == "zero":
        return False
    if g.kind in ("torus_frequencies", "log_power"):
        return True
    return g.kind == "power" and float(g.get("s", 1.0)) == 1.0


def _mu_zero_set(e: EigenData) -> Optional[str]:
    """'none', 'finite' or 'infinite' for {j: mu_j = 0}, symbolically."""
    g = e.generator
    if g is None or g.kind == "explicit":
        return None
    if g.get("mu_mode", "default") == "zero":
        return "infinite"
    if g.kind in ("torus_frequencies", "log_power"):
        return "finite"
    if g.kind in ("power", "rational_decay"):
        return "none"
    if g.kind == "constant":
        if not g.get("exact", False):
            return None
        return "infinite" if float(g.get("mu", 0.0)) == 0.0 else "none"
    return None


def _mu_polynomial_height(e: EigenData) -> bool:
    """mu_j exact rationals whose numerators and denominators grow polynomially in j."""
    g = e.generator
    if g is None or e.exact_mu(1) is None:
        return False
    return g.kind in ("torus_frequencies", "log_power", "power", "rational_decay", "constant")


def _resonance_branch(a0: RealSpec, e: EigenData, jmax: int, tr: _Trace, rule: str) -> Verdict:
    """L is GH iff Gamma_{a0} is finite and a0 is non-Liouville w.r.t. mu."""
    jmax = min(jmax, e.jmax)
    if a0.is_zero():
        tr.add("resonance-set", "infinite: a0 = 0 makes every a0 mu_j an integer", True, a0=a0)
        return tr.verdict(Decision.NOT_GH, rule)
    if not a0.is_exact:
        rep = resonance_set(a0, e.mu[:jmax].tolist(), jmax)
        tr.add("resonance-set", f"{len(rep.resonant_indices)} thresholded hits up to j={jmax}", False,
               a0=a0, exact=rep.exact)
        tr.caveats.append("floating-point a0: Diophantine properties are not decidable in fixed precision")
        return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)
    g = e.generator
    if g is None or g.kind == "explicit" or e.exact_mu(1) is None:
        tr.add("resonance-set", "mu is not exactly representable; finiteness undecidable", False, a0=a0)
        return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)

    rep = resonance_set(a0, e, jmax)
    hits = rep.resonant_indices
    mu_to_zero = _mu_tends_to_zero(e)
    zero_set = _mu_zero_set(e)

    # finiteness of Gamma
    if a0.is_irrational:
        if zero_set is None:
            tr.add("resonance-set", "cannot decide {j: mu_j = 0}", False)
            return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)
        finite = zero_set != "infinite"
        reason = "irrational a0: resonant iff mu_j = 0"
    elif e.mu_is_integer_valued() and not mu_to_zero:
        # p/q * mu_j is an integer whenever q | mu_j; mu covers multiples of q
        finite = False
        reason = "rational a0 with unbounded integer mu: every multiple of the denominator resonates"
        if g.kind == "constant":
            finite = not hits
            reason = "constant mu: resonance at one index means resonance at all"
    elif mu_to_zero:
        finite = True
        reason = "mu_j -> 0 so |a0 mu_j| < 1 eventually"
    elif g.kind == "constant":
        finite = not hits
        reason = "constant mu: resonance at one index means resonance at all"
    else:
        tr.add("resonance-set", "no closed form for finiteness", False)
        return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)
    tr.add("resonance-set", "finite" if finite else "infinite", True, a0=a0, hits_up_to_jmax=len(hits),
           first_hits=list(hits[:8]), reason=reason)
    if not finite:
        return tr.verdict(Decision.NOT_GH, rule)

    # non-Liouville property
    evidence = _liouville_evidence(a0, e, jmax, set(hits))
    if a0.kind is RealKind.QUADRATIC and _mu_polynomial_height(e):
        tr.add("non-liouville", "certified: quadratic irrational against rationals of polynomial height", True,
               **evidence)
        return tr.verdict(Decision.GH, rule)
    if a0.is_rational and not a0.truncated:
        # d_j is either 0 (resonant, finitely many) or at least 1/(q * den(mu_j))
        if _mu_polynomial_height(e):
            tr.add("non-liouville", "certified: rational a0, denominators of mu polynomial in j", True, **evidence)
            return tr.verdict(Decision.GH, rule)
    if a0.truncated:
        if mu_to_zero:
            tr.add("non-liouville", "certified: a0 mu_j -> 0, distance equals |a0 mu_j| ~ polynomial", True,
                   **evidence)
            return tr.verdict(Decision.GH, rule)
        if _mu_covers_all_integers(e):
            tr.add("non-liouville", "fails: Liouville-type a0 and mu_j runs through all integers", True, **evidence)
            return tr.verdict(Decision.NOT_GH, rule)
    tr.add("non-liouville", "no certificate", False, **evidence)
    return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)


def _liouville_evidence(a0: RealSpec, e: EigenData, jmax: int, skip: set) -> dict:
    js = [j for j in range(1, jmax + 1) if j not in skip and e.exact_mu(j) != 0]
    if len(js) < 8:
        return {"fit": "too few indices"}
    try:
        fit = liouville_exponent_fit(a0, lambda j: e.exact_mu(j), js)
    except (ResonantIndexPresent, GhlabError) as exc:
        return {"fit": f"failed: {exc}"}
    return {"delta_hat": fit.delta_hat, "C_hat": fit.C_hat, "fit_failed": fit.fit_failed,
            "fit_exact": fit.exact}


# ---------------------------------------------------------------- liminf omega

def _liminf_omega_zero(e: EigenData) -> Optional[bool]:
    """liminf omega_j = 0 iff along a subsequence nu_j -> 0 and a0 mu_j -> Z.

    For the symbolic families with nu_j -> 0 the real symbol also tends
    to 0 (or vanishes), which makes omega_j -> 0.
    """
    m = _mu_tends_to_zero(e)
    if m is None:
        return None
    return True if m else None


# ----------------------------------------------------------------- classify

def _resolve_a0(op: OperatorSpec, a0: Optional[RealSpec]) -> RealSpec:
    mean = op.a.mean
    if a0 is None:
        if mean == 0.0:
            return rational(0)
        return float_spec(mean)
    if abs(float(a0) - mean) > 1e-9 * max(1.0, abs(mean)):
        raise PreconditionError(f"a0 override {a0} does not match the mean of a ({mean!r})")
    return a0


def classify_gh(op: OperatorSpec, a0: Optional[RealSpec] = None, jmax: int = DEFAULT_JMAX,
                grid_size: int = DEFAULT_SIGN_GRID) -> Verdict:
    """Decide global hypoellipticity of D_t + a(t) p + i b(t) q from mode data."""
    tr = _Trace()
    e = op.eigen
    a0s = _resolve_a0(op, a0)
    b0 = op.b.mean
    sign = sign_analysis(op.b, grid_size)
    tr.add("sign-analysis", sign.kind.value, sign.certificate.certified, grid=grid_size,
           minimum=sign.certificate.minimum, maximum=sign.certificate.maximum,
           derivative_bound=sign.certificate.derivative_bound, method=sign.certificate.method)
    nz = nu_zero_behaviour(e)
    tr.add("nu-near-zero", nz.value, nz is not NuZero.UNKNOWN)

    if sign.kind is SignKind.ZERO or nz is NuZero.IDENTICALLY_ZERO:
        return _resonance_branch(a0s, e, jmax, tr, "zero-imaginary-part")
    if nz is NuZero.UNKNOWN:
        tr.caveats.append("nu data is not symbolic; the zero-accumulation question cannot be settled")
        return Verdict(Decision.INCONCLUSIVE, "vanishing-nu-omega", tr.steps, tr.caveats)

    growth = growth_class(e, "nu")
    tr.add("nu-growth", growth.kind.value, growth.source.value == "Symbolic", kappa=growth.kappa,
           witnesses=growth.witnesses)

    if nz is NuZero.ACCUMULATES:
        if not growth.tame:
            tr.caveats.append("nu accumulates at zero without logarithmic control")
            return Verdict(Decision.INCONCLUSIVE, "vanishing-nu-omega", tr.steps, tr.caveats)
        lz = _liminf_omega_zero(e)
        if lz is None:
            tr.add("liminf-omega", "undecided", False)
            return Verdict(Decision.INCONCLUSIVE, "vanishing-nu-omega", tr.steps, tr.caveats)
        tr.add("liminf-omega", "zero" if lz else "nonzero", True)
        if not lz and b0 != 0.0:
            return tr.verdict(Decision.GH, "vanishing-nu-omega")
        return _resonance_branch(a0s, e, jmax, tr, "vanishing-nu-omega")

    # nu bounded away from zero
    if sign.definite:
        if not sign.certificate.certified:
            return Verdict(Decision.INCONCLUSIVE, "definite-sign", tr.steps, tr.caveats)
        return tr.verdict(Decision.GH, "definite-sign")
    if growth.kind is GrowthKind.SUPERLOG:
        return tr.verdict(Decision.NOT_GH, "sign-change-superlog")
    if growth.tame:
        tr.add("normal-form", "reduce to constant coefficients", growth.source.value == "Symbolic", b0=b0)
        if b0 != 0.0:
            return tr.verdict(Decision.GH, "log-growth-normal-form")
        return _resonance_branch(a0s, e, jmax, tr, "log-growth-normal-form")
    tr.caveats.append("nu growth could not be classified")
    return Verdict(Decision.INCONCLUSIVE, "sign-change-superlog", tr.steps, tr.caveats)


# ------------------------------------------------------ time-dependent families

def _eventual_sign(fam, tr: _Trace, jmax: int, grid_size: int) -> tuple[Optional[bool], int]:
    """Are the b_j eventually sign-definite?  Returns (answer, j0)."""
    b = fam.b
    if not b.oscillating:
        return True, 1
    shape_sign = sign_analysis(b.shape, grid_size)
    lo, hi = shape_sign.certificate.minimum, shape_sign.certificate.maximum
    if shape_sign.kind is SignKind.ZERO:
        return True, 1
    # b_j = m(j) + amp(j) * shape(.), definite iff m >= -amp*min or m <= -amp*max
    if b.mean.is_zero:
        return False, 0
    mo, ao = b.mean.order(), b.amp.order()
    if mo > ao:
        ans = True
    elif mo < ao:
        ans = False
    else:
        ratio = b.mean.coef / b.amp.coef
        ans = ratio >= -lo or ratio <= -hi
    j0 = 0
    if ans:
        for j in range(jmax, 0, -1):
            sj = sign_analysis(b.at(j), grid_size)
            if not sj.definite:
                j0 = j
                break
    tr.add("gncs-threshold", f"j0 = {j0}", True, sampled_up_to=jmax)
    return ans, j0


def classify_gh_general(family: ModeFamily, jmax: int = 128, grid_size: int = 4096) -> Verdict:
    """Decide GH for per-mode coefficients a_j(t), b_j(t) given by a symbolic family."""
    tr = _Trace()
    a, b = family.a, family.b
    freq_b = b.freq.as_scaling()
    osc_size = b.amp.divided_by(freq_b) if b.oscillating else ScalingRule()
    # sup of the oscillating primitive is amp/freq times that of the shape primitive
    tr.add("oscillation-size", "at-most-log" if osc_size.at_most_log() else "super-log", True,
           power=osc_size.power, log_power=osc_size.log_power)
    # the a-part only contributes a unimodular phase, so only b decides reducibility
    reducible = osc_size.at_most_log()

    if reducible:
        tr.add("normal-form", "per-mode constants a0^j, b0^j", True)
        b0 = b.mean
        if b0.bounded_away_from_zero():
            return tr.verdict(Decision.GH, "general-reduction")
        if b0.is_zero:
            return _general_resonance(family, jmax, tr, "general-reduction")
        tr.add("b0-accumulates-at-zero", "omega-limit needed", False)
        return Verdict(Decision.INCONCLUSIVE, "general-reduction", tr.steps, tr.caveats)

    gncs, j0 = _eventual_sign(family, tr, jmax, grid_size)
    tr.add("gncs", "holds" if gncs else "fails", True)
    if gncs:
        if b.mean.bounded_away_from_zero():
            return tr.verdict(Decision.GH, "general-definite-sign")
        tr.add("b0-accumulates-at-zero", "omega-limit needed", False)
        return Verdict(Decision.INCONCLUSIVE, "general-definite-sign", tr.steps, tr.caveats)

    return _cspil(family, jmax, grid_size, tr)


def _general_resonance(family: ModeFamily, jmax: int, tr: _Trace, rule: str) -> Verdict:
    """b0^j = 0 for all j: GH iff {j: a0^j in Z} is finite and a0^j is non-Liouville."""
    m = family.a.mean
    spec = family.a.mean_spec()
    if m.is_zero or spec.is_zero():
        tr.add("resonance-set", "infinite: a0^j = 0 for all j", True)
        return tr.verdict(Decision.NOT_GH, rule)
    if m.log_power != 0 or not float(m.power).is_integer() or m.power < 0 or not spec.is_exact:
        tr.add("resonance-set", "a0^j has no exact closed form", False)
        return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)
    p = int(m.power)
    if p == 0:
        # a0^j = alpha for every j
        rep = resonance_set(spec, [1], 1)
        finite = not rep.resonant_indices
        tr.add("resonance-set", "finite (empty)" if finite else "infinite (all j)", True, a0=spec)
        if not finite:
            return tr.verdict(Decision.NOT_GH, rule)
        tr.add("non-liouville", "constant distance to Z", True)
        return tr.verdict(Decision.GH, rule)
    e_mu = lambda j: Fraction(j) ** p
    if spec.is_rational:
        tr.add("resonance-set", "infinite: rational times j^p hits Z along multiples of the denominator", True)
        return tr.verdict(Decision.NOT_GH, rule)
    if spec.kind is RealKind.QUADRATIC:
        tr.add("resonance-set", "empty", True)
        tr.add("non-liouville", "certified: quadratic irrational against integers", True)
        return tr.verdict(Decision.GH, rule)
    if spec.truncated and p == 1:
        tr.add("non-liouville", "fails: Liouville-type a0 against all integers", True)
        return tr.verdict(Decision.NOT_GH, rule)
    tr.add("non-liouville", "no certificate", False, sample=str(e_mu(2)))
    return Verdict(Decision.INCONCLUSIVE, rule, tr.steps, tr.caveats)


def _cspil(family: ModeFamily, jmax: int, grid_size: int, tr: _Trace) -> Verdict:
    """Shrinking intervals with super-logarithmic margins along sign-changing b_j."""
    b = family.b
    if not b.mean.is_zero:
        tr.add("cspil", "mean part present; margins not symbolic", False)
        return Verdict(Decision.INCONCLUSIVE, "general-sign-change-shrinking-intervals", tr.steps, tr.caveats)
    try:
        base = change_sign_frame(b.shape, grid_size)
    except (DegenerateExtremum, GhlabError) as exc:
        tr.add("cspil", f"shape frame failed: {exc}", False)
        return Verdict(Decision.INCONCLUSIVE, "general-sign-change-shrinking-intervals", tr.steps, tr.caveats)
    # b_j(t) = amp(j) shape(k t): B^j(t) = amp/k * Shape(k t), so margins scale by amp/k
    # and interval widths by 1/k
    freq = b.freq.as_scaling()
    c_rule = b.amp.divided_by(freq)
    margin = ScalingRule(c_rule.coef * base.c_min, c_rule.power, c_rule.log_power)
    width_power = freq.power
    tr.add("cspil-widths", f"O(j^-{width_power:g})", True, base_width=base.min_width())
    tr.add("cspil-margins", "super-log" if margin.superlog() else "not super-log", True,
           base_margin=base.c_min, power=margin.power, log_power=margin.log_power)
    # numerical cross-check of the scaling on sampled modes
    samples = []
    for j in sorted({2, 4, 8, 16, 32, jmax}):
        if j > jmax:
            continue
        try:
            fr = change_sign_frame(b.at(j), max(grid_size, 64 * abs(b.freq(j))))
            samples.append((j, fr.c_min, fr.min_width()))
        except GhlabError:
            samples.append((j, math.nan, math.nan))
    tr.add("cspil-samples", "per-mode frames computed", True, samples=[list(s) for s in samples])
    if margin.superlog():
        return tr.verdict(Decision.NOT_GH, "general-sign-change-shrinking-intervals")
    tr.caveats.append("margins c_j are not certified super-logarithmic")
    return Verdict(Decision.INCONCLUSIVE, "general-sign-change-shrinking-intervals", tr.steps, tr.caveats)
