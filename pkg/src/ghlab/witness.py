"""Singular solutions: distributions u that are not smooth while Lu is.

Each witness is a collection of per-mode functions on a local periodic
window.  u and f = Lu are kept as LogComplex so modes whose amplitudes
leave float range can still be measured.  ``verify_witness`` re-derives
Lu from u with spectral derivatives rather than trusting the
construction formula.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .decay import MIN_MODES, N_MAX, DecayKind, SeriesProfile, classify_sequence
from .diophantine import RealSpec, as_mu, product_dist, resonance_set
from .errors import PreconditionError
from .families import ModeFamily, ScalingRule
from .logdomain import LogComplex
from .normal_form import GrowthKind, _fitted_growth, growth_class
from .operator_model import ModeSymbol, OperatorSpec, mode_symbol
from .signs import Partition, SignChangeFrame, change_sign_frame, primitive_from, verify_frame
from .trig import TWO_PI, TrigPoly, spectral_derivative, trig_primitive

WITNESS_GRID = 16384
RESIDUAL_TOL = 1e-8
DERIVATIVE_ORDERS = 4
U_FLOOR = 0.5
GAUSS_NODES = 128
WIDTH_EXPONENT_MAX = float(N_MAX)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(GAUSS_NODES)


# ------------------------------------------------------------------- bump

def _mollifier(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


def _mollifier_integral(lo, hi):
    """int_lo^hi of the unnormalised mollifier, vectorised over hi."""
    hi = np.asarray(hi, dtype=float)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * np.sum(_GL_W * _mollifier(nodes), axis=-1)


_MOLLIFIER_MASS = float(2.0 * _mollifier_integral(-1.0, np.array(0.0)))


def smooth_step(x):
    """CDF of the normalised mollifier: 0 for x <= -1, 1 for x >= 1.

    Only the half closer to -1 is integrated; the other half uses the
    symmetry step(x) = 1 - step(-x), which keeps relative accuracy in
    both tails.
    """
    x = np.clip(np.asarray(x, dtype=float), -1.0, 1.0)
    out = (x > 0).astype(float)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    val = _mollifier_integral(-1.0, np.minimum(xi, -xi)) / _MOLLIFIER_MASS
    out[inside] = np.where(xi <= 0.0, val, 1.0 - val)
    return out


@dataclass(frozen=True)
class Bump:
    """Smoothed indicator: 0 outside support, 1 on plateau."""

    rise: float  # centre of the rising transition
    fall: float  # centre of the falling transition
    eta: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return smooth_step((t - self.rise) / self.eta) - smooth_step((t - self.fall) / self.eta)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        scale = 1.0 / (self.eta * _MOLLIFIER_MASS)
        return scale * (_mollifier((t - self.rise) / self.eta) - _mollifier((t - self.fall) / self.eta))

    @property
    def support(self) -> tuple[float, float]:
        return (self.rise - self.eta, self.fall + self.eta)


def bump(support: tuple[float, float], plateau: tuple[float, float], eta: Optional[float] = None) -> Bump:
    """Bump with transitions centred in the two gaps between plateau and support.

    The default transition half-width is a quarter of the smaller gap.
    """
    a, b = support
    c, d = plateau
    if not a < c < d < b:
        raise PreconditionError(f"need support[0] < plateau[0] < plateau[1] < support[1], got {support}, {plateau}")
    gap = min(c - a, b - d)
    if eta is None:
        eta = gap / 4.0
    if not 0 < eta <= gap / 2:
        raise PreconditionError("eta must lie in (0, gap/2]")
    return Bump(0.5 * (a + c), 0.5 * (d + b), float(eta))


def bump_for(p: Partition, eta: Optional[float] = None) -> Bump:
    return bump((p.alpha, p.beta), (p.gamma, p.delta), eta)


# ------------------------------------------------------------ data types

@dataclass
class WitnessMode:
    """u and f = L u for one mode on the window [start, start + period)."""

    j: int
    grid: np.ndarray
    period: float
    u: LogComplex
    f: LogComplex
    coefficient: Callable[[np.ndarray], np.ndarray]  # t -> c_j(t), L_j = -i (d/dt + c_j)
    f_log_bound: float = math.nan  # construction bound on log sup |f|
    f_bound_exponent: float = math.nan  # the bound is j^(-exponent)

    def log_sup_u(self) -> float:
        return float(np.max(self.u.log_mag))

    def log_sup_f(self) -> float:
        return float(np.max(self.f.log_mag))


@dataclass
class WitnessPair:
    kind: str
    indices: tuple[int, ...]
    jmax: int
    modes: dict[int, WitnessMode]
    frame: Optional[SignChangeFrame] = None
    notes: dict = field(default_factory=dict)


@dataclass
class CheckResult:
    passed: bool
    method: str
    details: dict


@dataclass
class WitnessReport:
    distribution: CheckResult  # (a)
    smooth_image: CheckResult  # (b)
    residuals: CheckResult  # (c)

    @property
    def passed(self) -> bool:
        return self.distribution.passed and self.smooth_image.passed and self.residuals.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "distribution": vars(self.distribution),
            "smooth_image": vars(self.smooth_image),
            "residuals": vars(self.residuals),
        }


def _local_grid(lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    period = hi - lo
    return lo + period * np.arange(n) / n, period


def _grid_through(point: float, lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    """n-point periodic grid on [lo', lo' + (hi - lo)) that contains ``point``."""
    period = hi - lo
    h = period / n
    m = math.floor((point - lo) / h)
    start = point - m * h
    return start + h * np.arange(n), period


# --------------------------------------------------------- resonant / Liouville

def _constant_coefficient(a0: float, mu: float):
    c = 1j * a0 * mu
    return lambda t: np.full(np.shape(t), c, dtype=complex)


def _exponential_grid(freq: float, minimum: int = 64) -> int:
    n = minimum
    while n < 4 * (abs(freq) + 1):
        n *= 2
    return n


def _exponential_mode(tau: int, bandwidth: float = 0.0) -> tuple[np.ndarray, float, np.ndarray]:
    """Grid on [0, 2 pi) and the phase -tau t reduced exactly modulo 2 pi."""
    n = _exponential_grid(max(abs(tau), bandwidth))
    t, period = _local_grid(0.0, TWO_PI, n)
    steps = (-tau * np.arange(n, dtype=np.int64)) % n
    return t, period, TWO_PI * steps / n


def _bandwidth(tau: int, mu: float, a: Optional[TrigPoly]) -> float:
    """Rough Fourier bandwidth of e^{-i tau t - i mu A_osc(t)}."""
    if a is None or a.is_constant():
        return abs(tau)
    osc = trig_primitive(a).periodic_part
    return abs(tau) + a.degree * (abs(mu) * osc.sup_bound() + 16)


def _transport(mode: WitnessMode, mu: float, a: Optional[TrigPoly]) -> WitnessMode:
    """Carry a constant-coefficient mode over to the operator with coefficient a.

    Multiplying u and f by e^{-i mu (A(t) - a0 t)} intertwines the two
    mode operators, and the factor is unimodular.
    """
    if a is None or a.is_constant() or mu == 0:
        return mode
    shift = -mu * trig_primitive(a).periodic_part(mode.grid)
    u = LogComplex(mode.u.log_mag, np.asarray(mode.u.arg) + shift)
    f = LogComplex(mode.f.log_mag, np.asarray(mode.f.arg) + shift)
    coef = lambda t, _a=a, _mu=mu: 1j * _mu * _a(t)
    return WitnessMode(mode.j, mode.grid, mode.period, u, f, coef, mode.f_log_bound, mode.f_bound_exponent)


def _check_mean(a: Optional[TrigPoly], a0: RealSpec) -> None:
    if a is not None and abs(a.mean - float(a0)) > 1e-12 * max(1.0, abs(float(a0))):
        raise PreconditionError(f"the mean of a ({a.mean!r}) does not match a0 = {a0}")


def build_witness_resonant(a0: RealSpec, mu, gamma: Optional[Sequence[int]] = None, jmax: int = 200,
                           a: Optional[TrigPoly] = None) -> WitnessPair:
    """u_j = e^{-i a0 mu_j t} on resonant modes, f = 0.

    ``gamma`` defaults to the exact resonance set up to jmax and must be
    nonempty.  With a time-dependent ``a`` (mean a0) the modes are
    carried over by the unimodular phase of the conjugation.
    """
    _check_mean(a, a0)
    seq = as_mu(mu)
    if gamma is None:
        gamma = resonance_set(a0, seq, jmax).resonant_indices
    gamma = tuple(sorted(int(j) for j in gamma))
    if not gamma:
        raise PreconditionError("resonant witness needs a nonempty resonance set")
    modes = {}
    for j in gamma:
        d, l, _ = product_dist(a0, seq(j))
        if d != 0:
            raise PreconditionError(f"mode {j} is not resonant (distance {d})")
        m = float(seq(j))
        t, period, phase = _exponential_mode(-l, _bandwidth(-l, m, a))
        n = len(t)
        u = LogComplex(np.zeros(n), phase)
        f = LogComplex(np.full(n, -np.inf), np.zeros(n))
        mode = WitnessMode(j, t, period, u, f, _constant_coefficient(float(a0), m), -math.inf, math.inf)
        modes[j] = _transport(mode, m, a)
    return WitnessPair("resonant", gamma, max(jmax, gamma[-1]), modes, notes={"a0": str(a0)})


def build_witness_liouville(a0: RealSpec, mu, pairs: Sequence[tuple[int, int]],
                            a: Optional[TrigPoly] = None) -> WitnessPair:
    """u_{j_k} = e^{-i tau_k t}, f_{j_k} = (a0 mu_{j_k} - tau_k) e^{-i tau_k t}.

    ``pairs`` are (j_k, tau_k) with |a0 mu_{j_k} - tau_k| < j_k^{-k/2}, as
    returned by ``liouville_witness_sequence``; the k-th bound is kept
    as the construction bound for the f-mode.
    """
    if not pairs:
        raise PreconditionError("Liouville witness needs at least one pair")
    _check_mean(a, a0)
    seq = as_mu(mu)
    modes = {}
    for k, (j, tau) in enumerate(pairs, start=1):
        j, tau = int(j), int(tau)
        m = seq(j)
        if a0.is_rational and isinstance(m, (int, Fraction)):
            gap = float(Fraction(m) * a0.rational - tau)
        else:
            d, l, _ = product_dist(a0, m)
            if -l != tau:
                raise PreconditionError(f"tau {tau} is not the nearest integer to a0 mu_{j}")
            gap = math.copysign(d, float(a0) * float(m) - tau)
        if not abs(gap) < j ** (-k / 2.0):
            raise PreconditionError(f"pair ({j}, {tau}) misses the level-{k} bound: gap {gap:.3g}")
        t, period, phase = _exponential_mode(tau, _bandwidth(tau, float(m), a))
        n = len(t)
        u = LogComplex(np.zeros(n), phase)
        mag = math.log(abs(gap)) if gap != 0 else -math.inf
        f = LogComplex(np.full(n, mag), phase + (0.0 if gap >= 0 else math.pi))
        exponent = k / 2.0
        mode = WitnessMode(j, t, period, u, f, _constant_coefficient(float(a0), float(m)),
                           -exponent * math.log(j), exponent)
        modes[j] = _transport(mode, float(m), a)
    idx = tuple(sorted(modes))
    return WitnessPair("liouville", idx, idx[-1], modes, notes={"a0": str(a0), "pairs": [list(p) for p in pairs]})


# ------------------------------------------------------------- sign change

def _mode_grid_size(length: float, nu: float, mu: float, a: TrigPoly, b: TrigPoly, eta: float,
                    minimum: int) -> int:
    """Points on a window of the given length resolving the bump, the peak and the phase.

    The mollifier is only Gevrey-smooth, so its transitions get about
    200 points per half-width; 1e-11 residuals need that many.
    """
    scales = [eta / 200.0]
    if nu:
        scales.append(1.0 / (16.0 * math.sqrt(abs(nu) * max(b.lipschitz_bound(), 1e-300))))
    if mu:
        scales.append(TWO_PI / (32.0 * abs(mu) * max(a.sup_bound(), 1e-300)))
    h = min(scales)
    n = minimum
    while length / n > h:
        n *= 2
    return n


def _signchange_mode(j: int, mu: float, nu: float, a: TrigPoly, b: TrigPoly, p: Partition, grid_min: int,
                     log_bound: float) -> WitnessMode:
    """u = g e^{nu B_t(t) - i mu A_t(t)} around the extremum t of the partition.

    u vanishes outside (alpha, beta), so the mode lives on a local window
    slightly larger than the support and is extended by zero.
    """
    g = bump_for(p)
    span = p.beta - p.alpha
    pad = min(0.05 * span, 0.5 * (TWO_PI - span))
    lo, hi = p.alpha - pad, p.beta + pad
    n = _mode_grid_size(hi - lo, nu, mu, a, b, g.eta, grid_min)
    t, period = _grid_through(p.t_ext, lo, hi, n)
    B = primitive_from(b, p.t_ext)(t)
    A = primitive_from(a, p.t_ext)(t)
    gv = g(t)
    dg = g.derivative(t)
    with np.errstate(divide="ignore"):
        u = LogComplex(np.log(gv) + nu * B, -mu * A)
        f = LogComplex(np.log(np.abs(dg)) + nu * B, -mu * A - 0.5 * math.pi + np.where(dg < 0, math.pi, 0.0))
    coef = lambda s, _a=a, _b=b: -nu * _b(s) + 1j * mu * _a(s)
    exponent = math.nan
    return WitnessMode(j, t, period, u, f, coef, log_bound, exponent)


def _superlog_part(js: np.ndarray, vals: np.ndarray, jmax: int) -> bool:
    """Fitted super-log test of |nu| restricted to one sign."""
    x = np.zeros(jmax)
    x[js - 1] = np.abs(vals)
    return _fitted_growth(x).kind is GrowthKind.SUPERLOG


def build_witness_signchange(op: OperatorSpec, frame: Optional[SignChangeFrame] = None,
                             subseq: Optional[Sequence[int]] = None, jmax: Optional[int] = None,
                             grid_min: int = 1024) -> WitnessPair:
    """Witness for sign-changing b along super-logarithmic nu.

    Modes with nu_j > 0 concentrate at the maximum of the primitive of b
    (star frame), modes with nu_j < 0 at its minimum (sub frame).  The
    f-mode bound is sup|g'| e^{-|nu_j| c} with c the frame margin.
    """
    e = op.eigen
    jmax = min(jmax or e.jmax, e.jmax)
    growth = growth_class(e, "nu")
    nu = e.nu[:jmax]
    js = np.arange(1, jmax + 1)
    pos, neg = js[nu > 0], js[nu < 0]
    if growth.source.value == "Symbolic":
        if growth.kind is not GrowthKind.SUPERLOG:
            raise PreconditionError(f"nu is {growth.kind.value}; the sign-change witness needs super-log growth")
        use_pos, use_neg = len(pos) > 0, len(neg) > 0
    else:
        use_pos = len(pos) >= 32 and _superlog_part(pos, nu[pos - 1], jmax)
        use_neg = len(neg) >= 32 and _superlog_part(neg, nu[neg - 1], jmax)
        if not (use_pos or use_neg):
            raise PreconditionError("no sign-definite part of nu is certified super-logarithmic")
    if frame is None:
        frame = change_sign_frame(op.b)
    if subseq is None:
        chosen = list(pos if use_pos else []) + list(neg if use_neg else [])
    else:
        chosen = [int(j) for j in subseq]
        for j in chosen:
            if not 1 <= j <= jmax:
                raise PreconditionError(f"subsequence index {j} outside 1..{jmax}")
            if nu[j - 1] == 0 or (nu[j - 1] > 0 and not use_pos) or (nu[j - 1] < 0 and not use_neg):
                raise PreconditionError(f"mode {j} is not on a certified super-log part of nu")
    if not chosen:
        raise PreconditionError("empty subsequence")
    modes = {}
    for j in sorted(chosen):
        ent = e.entry(j)
        if ent.nu > 0:
            p, b, margin = frame.star, op.b, frame.c_star
        else:
            # nu b = |nu| (-b): the sub frame is the star frame of -b
            p, b, margin = frame.sub, op.b, frame.c_sub
        g = bump_for(p)
        log_bound = math.log(g.derivative(np.array([g.rise]))[0]) - abs(ent.nu) * margin
        modes[j] = _signchange_mode(j, ent.mu, ent.nu, op.a, b, p, grid_min, log_bound)
    return WitnessPair("sign-change", tuple(sorted(modes)), jmax, modes, frame,
                       notes={"c_star": frame.c_star, "c_sub": frame.c_sub})


# ---------------------------------------------------------------- shrinking

def scaled_frame(shape_frame: SignChangeFrame, amp: float, k: int) -> SignChangeFrame:
    """Frame of amp * shape(k t) obtained from the frame of shape.

    The primitive of amp * shape(k t) is (amp/k) * S(k t), so every
    partition point shrinks by 1/k and every margin scales by |amp|/k.
    A negative amplitude swaps the star and sub frames.
    """
    if k <= 0 or amp == 0:
        raise PreconditionError("scaled frame needs k > 0 and amp != 0")

    def shrink(p: Partition, factor: float) -> Partition:
        return Partition(p.t0 / k, p.alpha / k, p.gamma / k, p.t_ext / k, p.delta / k, p.beta / k, p.margin * factor)

    factor = abs(amp) / k
    star, sub = (shape_frame.star, shape_frame.sub) if amp > 0 else (shape_frame.sub, shape_frame.star)
    b = _stretch(shape_frame.b, amp, k)
    return SignChangeFrame(b, shrink(star, factor), shrink(sub, factor), shape_frame.grid_size * k,
                           shape_frame.width_scale / k, {"amp": amp, "k": k})


def _stretch(p: TrigPoly, amp: float, k: int) -> TrigPoly:
    deg = p.degree * k
    cos = [0.0] * (deg + 1)
    sin = [0.0] * deg
    cos[0] = amp * p.mean
    for d, a, b in p.coefficient_pairs():
        cos[d * k] += amp * a
        sin[d * k - 1] += amp * b
    return TrigPoly(tuple(cos), tuple(sin))


@dataclass(frozen=True)
class ShrinkingCertificate:
    width_exponent: float  # widths >= C j^(-r)
    margin_over_log: tuple[float, ...]
    indices: tuple[int, ...]
    superlog: bool
    polynomial_widths: bool


def cspil_certificate(frames: dict[int, SignChangeFrame]) -> ShrinkingCertificate:
    """Fitted evidence that widths shrink at most polynomially and margins grow super-log."""
    js = np.array(sorted(frames), dtype=float)
    if len(js) < 4:
        raise PreconditionError("need frames for at least four modes")
    w = np.array([frames[int(j)].min_width() for j in js])
    c = np.array([frames[int(j)].c_min for j in js])
    ratio = c / np.log(2.0 + js)
    mask = js > 1
    local = (math.log(w[0]) - np.log(w[mask])) / np.log(js[mask])
    r = float(np.max(local)) if mask.any() else 0.0
    # polynomial widths have local exponents that settle; geometric ones keep climbing
    half = local[len(local) // 2:]
    climbing = len(half) >= 2 and bool(np.all(np.diff(half) > 0)) and half[-1] > 1.3 * max(half[0], 1e-300)
    poly = bool(np.all(w > 0)) and r <= WIDTH_EXPONENT_MAX and not climbing
    tail = ratio[len(ratio) // 2:]
    superlog = bool(np.all(np.diff(tail) > 0)) and ratio[-1] > 2 * ratio[0]
    return ShrinkingCertificate(max(r, 0.0), tuple(float(x) for x in ratio), tuple(int(j) for j in js), superlog, poly)


def family_frames(family: ModeFamily, jmax: int, grid_size: int = 8192) -> dict[int, SignChangeFrame]:
    """Per-mode frames of b_j by scaling one certified frame of the shape."""
    b = family.b
    if not b.mean.is_zero:
        raise PreconditionError("per-mode frames by scaling need a zero mean part in b_j")
    base = change_sign_frame(b.shape, grid_size)
    return {j: scaled_frame(base, b.amp(j), b.freq(j)) for j in range(1, jmax + 1) if b.freq(j) > 0}


def build_witness_cspil(family: ModeFamily, frames: Optional[dict[int, SignChangeFrame]] = None,
                        jmax: int = 128, grid_min: int = 1024, verify_every: int = 16) -> WitnessPair:
    """Witness u_j = g_j e^{B_j - i A_j} for a shrinking-interval family.

    Per-mode symbols have mu = nu = 1 because the mode dependence sits in
    a_j, b_j.  Every ``verify_every``-th scaled frame is re-certified on a
    grid fine enough for its width.
    """
    if frames is None:
        frames = family_frames(family, jmax)
    cert = cspil_certificate(frames)
    if not cert.polynomial_widths:
        raise PreconditionError(f"transition widths do not shrink polynomially (local exponent reaches {cert.width_exponent:.3g} and keeps growing, or exceeds {WIDTH_EXPONENT_MAX:g})")
    if not cert.superlog:
        raise PreconditionError("margins c_j / log(2 + j) are not increasing to infinity on the sampled modes")
    modes = {}
    for n_done, j in enumerate(sorted(frames)):
        fr = frames[j]
        if verify_every and n_done % verify_every == 0:
            k = int(fr.extras.get("k", 1))
            if not verify_frame(fr, max(fr.grid_size, 1024 * k)):
                raise PreconditionError(f"frame for mode {j} does not re-certify")
        a_j = family.a.at(j)
        b_j = family.b.at(j)
        g = bump_for(fr.star)
        log_bound = math.log(g.derivative(np.array([g.rise]))[0]) - fr.c_star
        modes[j] = _signchange_mode(j, 1.0, 1.0, a_j, b_j, fr.star, grid_min, log_bound)
        modes[j].f_bound_exponent = math.nan
    return WitnessPair("cspil", tuple(sorted(modes)), max(modes), modes,
                       notes={"width_exponent": cert.width_exponent, "margin_over_log": list(cert.margin_over_log)})


# ------------------------------------------------------------- verification

def _scaled_derivatives(mode: WitnessMode, field_: LogComplex, orders: int) -> list[float]:
    """log sup |d^k/dt^k| for k = 0..orders, computed on the rescaled values."""
    mags = np.asarray(field_.log_mag, dtype=float)
    top = float(np.max(mags))
    if not math.isfinite(top):
        return [-math.inf] * (orders + 1)
    vals = LogComplex(mags, field_.arg).scaled(top)
    out = []
    factor = TWO_PI / mode.period
    for k in range(orders + 1):
        d = spectral_derivative(vals, k) * factor ** k
        s = float(np.max(np.abs(d)))
        out.append(top + math.log(s) if s > 0 else -math.inf)
    return out


def mode_residual(mode: WitnessMode) -> float:
    """sup |L_j u - f| / max(1, sup |u'| + sup |c_j u|), with u' taken spectrally.

    The normalisation is the size of the two terms of L_j u; it equals
    the absolute residual for O(1) coefficients and keeps the spectral
    roundoff floor from growing with large |c_j|.
    """
    top = max(0.0, mode.log_sup_u())
    u = LogComplex(mode.u.log_mag, mode.u.arg).scaled(top)
    f = LogComplex(mode.f.log_mag, mode.f.arg).scaled(top)
    du = spectral_derivative(u, 1) * (TWO_PI / mode.period)
    cu = mode.coefficient(mode.grid) * u
    Lu = -1j * (du + cu)
    scale = max(1.0, float(np.max(np.abs(du)) + np.max(np.abs(cu))))
    return float(np.max(np.abs(Lu - f))) / scale


def verify_witness(w: WitnessPair, orders: int = DERIVATIVE_ORDERS, residual_tol: float = RESIDUAL_TOL) -> WitnessReport:
    """Checks (a) u is a distribution but not smooth, (b) f is smooth, (c) residuals."""
    J = w.jmax
    idx = np.arange(1, J + 1)
    u_logs = np.full(J, -np.inf)
    f_logs = {k: np.full(J, -np.inf) for k in range(orders + 1)}
    residuals = {}
    for j, m in w.modes.items():
        u_logs[j - 1] = m.log_sup_u()
        for k, v in enumerate(_scaled_derivatives(m, m.f, orders)):
            f_logs[k][j - 1] = v
        residuals[j] = mode_residual(m)

    # (a)
    support = np.array(sorted(w.modes))
    sup_u = np.exp(u_logs[support - 1]) if len(support) else np.array([])
    lower_ok = len(support) >= 3 and bool(np.all(sup_u >= U_FLOOR))
    finite = bool(np.all(u_logs[np.isfinite(u_logs)] < np.inf))
    if J >= MIN_MODES and len(support) >= 8:
        ucls = classify_sequence(SeriesProfile.from_logs({0: u_logs}))
        upper_ok = finite and ucls.kind is not DecayKind.SUPERPOLYNOMIAL
        a_method, a_class = "classified", ucls.kind.value
    else:
        upper_ok = finite and bool(np.all(u_logs <= N_MAX * np.log1p(idx)))
        a_method, a_class = "pointwise-bound", None
    dist = CheckResult(lower_ok and upper_ok, a_method, {
        "support_size": int(len(support)), "min_sup_u": float(sup_u.min()) if len(sup_u) else math.nan,
        "max_sup_u": float(sup_u.max()) if len(sup_u) else math.nan, "floor": U_FLOOR, "class": a_class})

    # (b)
    tail_start = max(16, J // 2)
    tail_support = [j for j in support if j > tail_start]
    all_zero = all(not np.isfinite(f_logs[0][j - 1]) for j in support)
    if all_zero:
        smooth = CheckResult(True, "identically-zero", {})
    elif J >= MIN_MODES and len(tail_support) >= 8:
        fcls = classify_sequence(SeriesProfile.from_logs(f_logs))
        per = {str(k): c.kind.value for k, c in fcls.per_derivative.items()}
        smooth = CheckResult(fcls.is_rapid, "classified", {"class": fcls.kind.value, "per_derivative": per,
                                                           "slope": fcls.fit.slope, "r2": fcls.fit.r2})
    else:
        # too few modes to classify; fall back to the construction bounds, whose exponents must grow
        bounds = [(j, w.modes[j].f_log_bound, w.modes[j].f_bound_exponent, f_logs[0][j - 1]) for j in support]
        held = all(math.isfinite(lb) and fl <= lb + 1e-9 for _, lb, _, fl in bounds)
        exps = [e for _, _, e, _ in bounds]
        growing = len(exps) >= 2 and all(b > a for a, b in zip(exps, exps[1:]))
        smooth = CheckResult(held and growing, "construction-bound", {
            "modes": [[int(j), lb, e, fl] for j, lb, e, fl in bounds], "derivatives_checked": False})

    # (c)
    worst = max(residuals.values()) if residuals else math.inf
    res = CheckResult(worst <= residual_tol, "spectral", {"max_residual": worst, "tol": residual_tol,
                                                         "per_mode": {str(j): r for j, r in sorted(residuals.items())}})
    return WitnessReport(dist, smooth, res)


# ------------------------------------------------------------------- export

def export_witness(w: WitnessPair, report: Optional[WitnessReport], out_dir, fmt: str = ".17g") -> list[Path]:
    """One CSV per mode (t, log|u|, arg u, Re f, Im f) plus a JSON report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for j in sorted(w.modes):
        m = w.modes[j]
        fv = LogComplex(m.f.log_mag, m.f.arg).to_complex()
        path = out / f"witness_mode_{j:05d}.csv"
        with path.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "log_abs_u", "arg_u", "re_f", "im_f"])
            for row in zip(m.grid, np.broadcast_to(m.u.log_mag, m.grid.shape), np.broadcast_to(m.u.arg, m.grid.shape),
                           np.real(fv), np.imag(fv)):
                wr.writerow([format(float(x), fmt) for x in row])
        written.append(path)
    meta = {"kind": w.kind, "indices": list(w.indices), "jmax": w.jmax, "notes": w.notes,
            "report": report.to_dict() if report is not None else None}
    path = out / "witness_report.json"
    path.write_text(json.dumps(meta, sort_keys=True, indent=2, default=_json_float))
    written.append(path)
    return written


def _json_float(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    return repr(x)
