"""Certified sign analysis of trig polynomials and sign-change frames.

A frame for b is a window (t0, t0 + 2 pi) with an interior point t* where
the primitive B_{t0} peaks, plus two transition intervals on either side
of t* where B_{t*}(t) = int_{t*}^t b stays below -c*.  The same data for
-b gives the frame around the minimum.  Witness construction and the
shrinking-interval test both consume frames.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.optimize import brentq

from .errors import DegenerateExtremum, NotSignChanging
from .trig import TWO_PI, TrigPoly, trig_primitive, uniform_grid

DEFAULT_SIGN_GRID = 8192
ROOT_TOL = 1e-12
MARGIN_FRACTION = 0.1
INSET_FRACTION = 0.01


class SignKind(enum.Enum):
    ZERO = "IdenticallyZero"
    NONNEGATIVE = "NonNegative"
    NONPOSITIVE = "NonPositive"
    CHANGES = "ChangesSign"


@dataclass(frozen=True)
class SignCertificate:
    grid_size: int
    minimum: float
    maximum: float
    derivative_bound: float
    margin: float
    method: str
    certified: bool
    t_minus: float = math.nan
    t_plus: float = math.nan


@dataclass(frozen=True)
class SignClass:
    kind: SignKind
    certificate: SignCertificate

    @property
    def definite(self) -> bool:
        return self.kind in (SignKind.NONNEGATIVE, SignKind.NONPOSITIVE)


def trig_roots(p: TrigPoly, tol: float = 1e-7) -> np.ndarray:
    """Real zeros of p in [0, 2 pi), via the companion matrix in z = e^{it}."""
    if p.is_constant():
        return np.array([])
    fc = p.fourier()
    d = p.degree
    coeffs = np.array([fc.get(k, 0.0) for k in range(d, -d - 1, -1)], dtype=complex)
    z = np.roots(coeffs)
    on_circle = z[np.abs(np.abs(z) - 1.0) < tol ** 0.5]
    ts = np.mod(np.angle(on_circle), TWO_PI)
    dp = p.derivative()
    out = []
    for t in ts:
        for _ in range(4):
            slope = float(dp(t))
            if slope == 0.0:
                break
            t = t - float(p(t)) / slope
        out.append(float(np.mod(t, TWO_PI)))
    return np.unique(np.round(np.array(out), 13))


def sign_analysis(b: TrigPoly, grid_size: int = DEFAULT_SIGN_GRID, tol: float = ROOT_TOL) -> SignClass:
    """Does b vanish, keep a sign, or change sign?

    Grid values plus the Lipschitz bound certify strict cases.  When b
    only touches zero (1 + cos t) the grid bound cannot certify; the
    extrema are then taken at the zeros of b', which for a trig
    polynomial are found exactly up to rounding.
    """
    L = b.lipschitz_bound()
    h = TWO_PI / grid_size
    margin = L * h
    if b.is_zero():
        return SignClass(SignKind.ZERO, SignCertificate(grid_size, 0.0, 0.0, L, margin, "exact", True))
    t = uniform_grid(grid_size)
    v = b(t)
    i_min, i_max = int(np.argmin(v)), int(np.argmax(v))
    vmin, vmax = float(v[i_min]), float(v[i_max])
    if vmin < -margin and vmax > margin:
        cert = SignCertificate(grid_size, vmin, vmax, L, margin, "grid", True, float(t[i_min]), float(t[i_max]))
        return SignClass(SignKind.CHANGES, cert)
    if vmin - L * h / 2 >= 0:
        return SignClass(SignKind.NONNEGATIVE, SignCertificate(grid_size, vmin, vmax, L, margin, "grid", True))
    if vmax + L * h / 2 <= 0:
        return SignClass(SignKind.NONPOSITIVE, SignCertificate(grid_size, vmin, vmax, L, margin, "grid", True))
    # extrema at critical points
    crit = trig_roots(b.derivative())
    cands = np.concatenate([crit, t[[i_min, i_max]]])
    cv = b(cands)
    cmin, cmax = float(cv.min()), float(cv.max())
    scale = max(1.0, b.sup_bound())
    tmin, tmax = float(cands[int(np.argmin(cv))]), float(cands[int(np.argmax(cv))])
    if cmin >= -tol * scale:
        kind = SignKind.NONNEGATIVE
    elif cmax <= tol * scale:
        kind = SignKind.NONPOSITIVE
    else:
        kind = SignKind.CHANGES
    certified = kind is not SignKind.CHANGES or (cmin < -margin and cmax > margin)
    cert = SignCertificate(grid_size, cmin, cmax, L, margin, "critical-points", certified, tmin, tmax)
    return SignClass(kind, cert)


# ------------------------------------------------------------------ frames

@dataclass(frozen=True)
class Partition:
    """alpha < gamma < t_ext < delta < beta inside (t0, t0 + 2 pi)."""

    t0: float
    alpha: float
    gamma: float
    t_ext: float
    delta: float
    beta: float
    margin: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.gamma, self.t_ext, self.delta, self.beta)

    def ordered(self) -> bool:
        return self.t0 < self.alpha < self.gamma < self.t_ext < self.delta < self.beta < self.t0 + TWO_PI

    def min_width(self) -> float:
        return min(self.gamma - self.alpha, self.beta - self.delta)


@dataclass(frozen=True)
class SignChangeFrame:
    """Frames around the maximum (star) and minimum (sub) of the primitive.

    ``c_star`` bounds B_{t*} from above by -c_star on the star transition
    intervals; ``c_sub`` bounds B_{t_sub} from below by c_sub on the sub
    ones.  Each frame carries its own window start.
    """

    b: TrigPoly
    star: Partition
    sub: Partition
    grid_size: int
    width_scale: float
    extras: dict = field(default_factory=dict, compare=False)

    @property
    def t0(self) -> float:
        return self.star.t0

    @property
    def t_star(self) -> float:
        return self.star.t_ext

    @property
    def t_sub(self) -> float:
        return self.sub.t_ext

    @property
    def c_star(self) -> float:
        return self.star.margin

    @property
    def c_sub(self) -> float:
        return self.sub.margin

    @property
    def c_min(self) -> float:
        return min(self.c_star, self.c_sub)

    def min_width(self) -> float:
        return min(self.star.min_width(), self.sub.min_width())


def _refine_extremum(b: TrigPoly, t_grid: np.ndarray, k: int) -> float:
    """Zero of b bracketing the grid maximum of the primitive, if any."""
    lo, hi = t_grid[max(k - 1, 0)], t_grid[min(k + 1, len(t_grid) - 1)]
    flo, fhi = float(b(lo)), float(b(hi))
    if flo > 0 > fhi:
        return float(brentq(lambda s: float(b(s)), lo, hi, xtol=1e-15))
    return float(t_grid[k])


def _best_window(Bstar: np.ndarray, lo: int, hi: int, width: int) -> tuple[int, float]:
    """Start index in [lo, hi - width] of the (width + 1)-sample window with
    the smallest maximum of Bstar; width must be even."""
    half = width // 2
    if hi - lo < width + 1:
        return -1, math.inf
    mx = maximum_filter1d(Bstar, size=width + 1, mode="nearest")
    centers = np.arange(lo + half, hi - half + 1)
    i = int(centers[np.argmin(mx[centers])])
    return i - half, float(mx[i])


def _partition_for(b: TrigPoly, t0: float, n: int, width_scale: float):
    """Star partition for window start t0 on an n-point grid, or None."""
    P = trig_primitive(b)
    h = TWO_PI / n
    t = t0 + h * np.arange(n + 1)
    B = P(t) - P(t0)
    inner = slice(1, n)
    k = 1 + int(np.argmax(B[inner]))
    side1, side2 = t[k] - t0, t0 + TWO_PI - t[k]
    if min(side1, side2) < 8 * h:
        return None
    Bstar = B - B[k]
    slack = 2.0 * b.sup_bound() * h
    parts = []
    for lo_t, hi_t, side in ((t0, t[k], side1), (t[k], t0 + TWO_PI, side2)):
        w = MARGIN_FRACTION * min(side, width_scale)
        inset = INSET_FRACTION * min(side, width_scale)
        wn = 2 * max(1, int(round(w / (2 * h))))
        lo = int(math.ceil((lo_t + inset - t0) / h))
        hi = int(math.floor((hi_t - inset - t0) / h))
        start, worst = _best_window(Bstar, lo, hi, wn)
        if start < 0:
            return None
        parts.append((start, start + wn, worst))
    (a_i, g_i, m1), (d_i, be_i, m2) = parts
    if not (0 < a_i < g_i < k < d_i < be_i < n):
        return None
    margin = -(max(m1, m2) + slack)
    return Partition(float(t0), float(t[a_i]), float(t[g_i]), float(t[k]), float(t[d_i]), float(t[be_i]), margin)


def _best_partition(b: TrigPoly, n: int, width_scale: float, candidates: int) -> Partition:
    best = None
    for t0 in TWO_PI * np.arange(candidates) / candidates:
        p = _partition_for(b, float(t0), n, width_scale)
        if p is not None and (best is None or p.margin > best.margin):
            best = p
    if best is None or best.margin <= 0:
        raise DegenerateExtremum("could not certify a positive margin around the extremum of the primitive")
    t_ext = _refine_extremum(b, np.array([best.t_ext - TWO_PI / n, best.t_ext, best.t_ext + TWO_PI / n]), 1)
    if not best.gamma < t_ext < best.delta:
        t_ext = best.t_ext
    # the margin is relative to B at the grid maximum; the refined peak is higher by at most sup|b| h
    margin = best.margin - b.sup_bound() * TWO_PI / n
    if margin <= 0:
        raise DegenerateExtremum("margin vanished after refining the extremum")
    return Partition(best.t0, best.alpha, best.gamma, t_ext, best.delta, best.beta, margin)


def change_sign_frame(b: TrigPoly, grid_size: int = DEFAULT_SIGN_GRID, width_scale: float | None = None,
                      candidates: int = 64) -> SignChangeFrame:
    """Certified frames around the extrema of the primitive of a sign-changing b.

    Transition intervals have width 10% of min(side, width_scale), where
    the side is the distance from the extremum to the window edge; the
    default scale is one period of the highest harmonic of b.  Each
    interval is slid to where the primitive is deepest, and the window
    start is chosen to maximise the certified margin.
    """
    sc = sign_analysis(b, grid_size)
    if sc.kind is not SignKind.CHANGES:
        raise NotSignChanging(f"b is {sc.kind.value}; a sign-change frame needs a sign change")
    if width_scale is None:
        width_scale = TWO_PI / max(1, b.degree)
    star = _best_partition(b, grid_size, width_scale, candidates)
    sub = _best_partition(-b, grid_size, width_scale, candidates)
    return SignChangeFrame(b, star, sub, grid_size, float(width_scale))


def primitive_from(b: TrigPoly, base: float):
    """t -> int_base^t b."""
    P = trig_primitive(b)
    b0 = float(P(base))
    return lambda t: P(np.asarray(t, dtype=float)) - b0


def verify_partition(b: TrigPoly, p: Partition, grid_size: int, upper: bool = True) -> bool:
    """Re-certify one partition on a grid of the given density.

    upper=True checks B_{t_ext} < -margin on the transition intervals
    (star frame); the sub frame is verified by passing -b.
    """
    if not p.ordered():
        return False
    h = TWO_PI / grid_size
    B = primitive_from(b, p.t_ext)
    slack = b.sup_bound() * h / 2
    worst = -math.inf
    for lo, hi in ((p.alpha, p.gamma), (p.delta, p.beta)):
        m = max(2, int(math.ceil((hi - lo) / h)) + 1)
        worst = max(worst, float(np.max(B(np.linspace(lo, hi, m)))))
    return worst + slack < -p.margin


def verify_frame(frame: SignChangeFrame, grid_size: int) -> bool:
    return verify_partition(frame.b, frame.star, grid_size) and verify_partition(-frame.b, frame.sub, grid_size)
