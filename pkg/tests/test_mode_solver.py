import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ghlab.errors import ResonantMode, SingularSystem, TruncationInsufficient
from ghlab.mode_solver import (
    Branch, dist_to_imaginary_integers, exp_primitive_derivatives, omega, omega_from_c0, residual, solve_mode,
    solve_mode_oracle, theta,
)
from ghlab.operator_model import GeneratorSpec, ModeSymbol, OperatorSpec, eigen_generate, mode_symbol
from ghlab.trig import TrigPoly, uniform_grid

from strategies import trig_polys

GRID = uniform_grid(256)


def const_mode(c: complex) -> ModeSymbol:
    return ModeSymbol(1, 1.0, 1.0, TrigPoly.constant(c.imag), TrigPoly.constant(-c.real))


def test_theta_half():
    assert theta(0.5j) == pytest.approx(0.5, rel=1e-15)


def test_theta_resonant():
    assert theta(0j) == math.inf
    assert theta(3j) == math.inf


def test_theta_real_one():
    assert theta(1 + 0j) == pytest.approx(1.001870936598660644, rel=1e-14)


def test_theta_large_real_part_is_stable():
    # |1 - e^{-2 pi c0}|^{-1} ~ e^{2 pi x} for c0 = -x, no overflow in the complement
    assert theta(-50 + 0.3j) == pytest.approx(math.exp(-100 * math.pi), rel=1e-12)
    assert theta(50 + 0.3j) == pytest.approx(1.0, rel=1e-12)


def test_omega_examples():
    assert omega(0.0, 3.0) == 0.0
    assert omega(0.0, 0.5) == pytest.approx(4.0, rel=1e-15)
    assert omega(1.0, 0.0) == pytest.approx(285681.32982560377, rel=1e-13)


@given(st.floats(-3, 3), st.floats(-10, 10))
def test_theta_omega_identity(x, y):
    c0 = complex(x, y)
    th = theta(c0)
    if th < 1e8:
        assert omega_from_c0(c0) == pytest.approx(th ** -2, rel=1e-10)


def test_constant_single_frequency():
    c = 1 + 1j
    sol = solve_mode(const_mode(c), np.exp(1j * GRID), GRID)
    np.testing.assert_allclose(sol.values, np.exp(1j * GRID) / (1 + 2j), atol=1e-13)
    assert sol.residual <= 1e-10


def test_constant_half_integer():
    sol = solve_mode(const_mode(0.5j), np.ones_like(GRID), GRID)
    np.testing.assert_allclose(sol.values, -2j, atol=1e-13)


def test_variable_coefficient_matches_oracle():
    s = ModeSymbol(1, 1.0, 1.0, TrigPoly.constant(0.3), TrigPoly((0.0,), (1.0,)))
    f = np.cos(GRID)
    u = solve_mode(s, f, GRID)
    o = solve_mode_oracle(s, f, GRID)
    assert np.max(np.abs(u.values - o.values)) <= 1e-8


def test_oracle_zero_coefficient():
    s = ModeSymbol(1, 0.0, 0.0, TrigPoly(), TrigPoly())
    sol = solve_mode_oracle(s, np.exp(1j * GRID), GRID)
    assert sol.coefficients[1] == pytest.approx(-1j, abs=1e-14)
    assert max(abs(v) for k, v in sol.coefficients.items() if k != 1) < 1e-14
    with pytest.raises(SingularSystem):
        solve_mode_oracle(s, np.ones_like(GRID), GRID)


@pytest.mark.parametrize("c, f", [
    (1 + 1j, lambda t: np.exp(1j * t)),
    (0.5j, lambda t: np.ones_like(t)),
])
def test_oracle_agrees_on_constant_cases(c, f):
    s = const_mode(c)
    assert np.max(np.abs(solve_mode(s, f(GRID), GRID).values - solve_mode_oracle(s, f(GRID), GRID).values)) <= 1e-8


def test_resonant_mode_refused():
    with pytest.raises(ResonantMode):
        solve_mode(const_mode(2j + 1e-10), np.ones_like(GRID), GRID)


def test_residual_examples():
    c = 1 + 1j
    s = const_mode(c)
    f = np.exp(1j * GRID)
    sol = solve_mode(s, f, GRID)
    assert residual(s, sol, f) <= 1e-10
    sol.values = sol.values + 1e-3
    assert residual(s, sol, f) == pytest.approx(abs(c) * 1e-3, rel=1e-6)
    zero = solve_mode(s, np.zeros_like(GRID), GRID)
    assert residual(s, zero, np.zeros_like(GRID)) == 0.0


def test_branch_follows_sign_of_nu_b0():
    forward = ModeSymbol(1, 0.0, 1.0, TrigPoly(), TrigPoly((-1.0,), (0.5,)))
    backward = ModeSymbol(1, 0.0, 1.0, TrigPoly(), TrigPoly((1.0,), (0.5,)))
    assert solve_mode(forward, np.cos(GRID), GRID).branch is Branch.FORWARD
    assert solve_mode(backward, np.cos(GRID), GRID).branch is Branch.BACKWARD


def _mp_reference(s: ModeSymbol, f: TrigPoly, points) -> np.ndarray:
    """u = e^{-C(t)} (K + int_0^t e^{C} f), K fixed by periodicity; 50 digits."""
    mp.mp.dps = 50

    def ev(p, t):
        return mp.mpf(p.mean) + sum(a * mp.cos(k * t) + b * mp.sin(k * t) for k, a, b in p.coefficient_pairs())

    def prim(p, t):
        return mp.mpf(p.mean) * t + sum(a * mp.sin(k * t) / k + b * (1 - mp.cos(k * t)) / k
                                        for k, a, b in p.coefficient_pairs())

    def C(t):
        return -s.nu * prim(s.b, t) + 1j * s.mu * prim(s.a, t)

    knots = [2 * mp.pi * k / 32 for k in range(33)]
    total = mp.quad(lambda x: mp.exp(C(x)) * ev(f, x), knots)
    K = total / (mp.exp(2 * mp.pi * mp.mpc(s.c0)) - 1)
    out = []
    for t in points:
        t = mp.mpf(t)
        inner = mp.quad(lambda x: mp.exp(C(x)) * ev(f, x), [0] + [k for k in knots if k < t] + [t]) if t else 0
        out.append(complex(mp.exp(-C(t)) * (K + inner)))
    return np.array(out)


def test_closed_form_against_high_precision_when_galerkin_is_ill_conditioned():
    # exponent spread ~ 60: Galerkin in double precision is useless here
    s = ModeSymbol(1, 3.0, 12.0, TrigPoly((0.1, 0.4), (0.0, 0.2)), TrigPoly((-0.05, 0.0, 0.3), (2.0,)))
    f = TrigPoly((0.5, 0.2), (0.1,))
    with pytest.raises(SingularSystem):
        solve_mode_oracle(s, f(GRID), GRID)
    u = solve_mode(s, f(GRID), GRID)
    idx = np.arange(0, 256, 32)
    ref = _mp_reference(s, f, GRID[idx])
    assert np.max(np.abs(u.values[idx] - ref)) <= 1e-10 * np.max(np.abs(ref))


@given(trig_polys(3), trig_polys(3), st.floats(-20, 20), st.floats(-20, 20), st.integers(0, 2 ** 31))
def test_closed_form_matches_oracle_when_both_apply(a, b, mu, nu, seed):
    s = ModeSymbol(1, mu, nu, a, b)
    if dist_to_imaginary_integers(s.c0) < 0.1 or abs(s.c0) > 5:
        return
    rng = np.random.default_rng(seed)
    f = TrigPoly(tuple(rng.uniform(-1, 1, 3)), tuple(rng.uniform(-1, 1, 2)))(GRID)
    try:
        o = solve_mode_oracle(s, f, GRID)
    except (SingularSystem, TruncationInsufficient):
        # the oracle refuses ill-conditioned or under-resolved modes
        return
    u = solve_mode(s, f, GRID)
    assert np.max(np.abs(u.values - o.values)) <= 1e-8 * max(1.0, np.max(np.abs(o.values)))


# ------------------------------------------------------ inequality bounds

@given(st.floats(-10, 10, allow_nan=False))
def test_small_divisor_lower_bound(beta):
    r = beta - round(beta)
    assert abs(1 - np.exp(2j * np.pi * r)) >= 4 * abs(r)


@given(st.floats(-0.49, 0.49, allow_nan=False), st.integers(-5, 5))
def test_cosine_cube_bound_below_crossing(d, ell):
    y = 2 * np.pi * ell + d
    dist = abs(y - 2 * np.pi * ell)
    # 1 - cos y as 2 sin^2(y/2) avoids cancellation for small d
    assert 2 * math.sin(y / 2) ** 2 >= dist ** 3


def test_cosine_cube_bound_crossing_point():
    # 1 - cos d = d^3 has its positive root just below 1/2
    mp.mp.dps = 30
    root = mp.findroot(lambda d: 1 - mp.cos(d) - d ** 3, 0.49)
    assert float(root) == pytest.approx(0.4900726385315, abs=1e-12)
    assert 1 - math.cos(0.5) < 0.5 ** 3


# ------------------------------------------------ exponential derivatives

def test_exp_primitive_derivatives_constant_case():
    s = const_mode(2 + 3j)
    ys = exp_primitive_derivatives(s, GRID, 3)
    for k, y in enumerate(ys):
        np.testing.assert_allclose(y, (2 + 3j) ** k, rtol=1e-12)


@given(trig_polys(3), trig_polys(3))
def test_exp_derivative_ratio_stays_bounded(a, b):
    """sup|Y_k| / j^k over 8..256 on power(1) data stays within 25% of its value at j = 8."""
    op = OperatorSpec(a, b, eigen_generate(GeneratorSpec.make("power", s=1), 256))
    for k in (1, 2, 3):
        base = None
        for j in (8, 16, 32, 64, 128, 256):
            y = exp_primitive_derivatives(mode_symbol(op, j), GRID, k)[-1]
            ratio = float(np.max(np.abs(y))) / j ** k
            if base is None:
                base = ratio
                if base == 0:
                    break
            assert ratio <= 1.25 * base
