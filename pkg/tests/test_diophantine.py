import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from ghlab.diophantine import (
    RealKind, continued_fraction, exact_dist, float_spec, golden_ratio, liouville_constant,
    liouville_exponent_fit, liouville_witness_sequence, nearest_int_dist, parse_real, product_dist,
    rational, resonance_set, to_text,
)
from ghlab.errors import NotFound, PreconditionError, ResonantIndexPresent

PHI = (1 + math.sqrt(5)) / 2


def test_nearest_int_examples():
    assert nearest_int_dist(0.5) == (0.5, 0)
    d, l = nearest_int_dist(PHI)
    assert l == -2
    assert d == pytest.approx(0.3819660112501051518, rel=1e-15)
    assert nearest_int_dist(3.0) == (0.0, -3)


def test_ties_go_to_even():
    assert nearest_int_dist(1.5)[1] == -2
    assert nearest_int_dist(-2.5)[1] == 2
    assert nearest_int_dist(Fraction(7, 2))[1] == -4


@given(st.floats(-2.0 ** 40, 2.0 ** 40), st.integers(-2 ** 20, 2 ** 20))
def test_range_reduction_shift(x, m):
    # x + m must be exactly representable for the identity to be meaningful
    if float(x + m) - m != x:
        return
    assert nearest_int_dist(x)[0] == nearest_int_dist(x + m)[0]


def test_golden_distance_exact():
    d, l = exact_dist(golden_ratio())
    assert (d, l) == (pytest.approx(0.3819660112501051518, rel=1e-15), -2)


def test_resonance_half():
    r = resonance_set(rational(1, 2), "j", 10)
    assert r.resonant_indices == (2, 4, 6, 8, 10)
    assert r.exact


def test_resonance_golden_empty():
    r = resonance_set(golden_ratio(), "j", 1000)
    assert r.resonant_indices == ()
    assert r.exact


def test_resonance_zero_everything():
    r = resonance_set(rational(0), "j", 7)
    assert r.resonant_indices == tuple(range(1, 8))
    assert r.exact


def test_resonance_float_is_inexact():
    r = resonance_set(float_spec(0.5), "j", 6)
    assert r.resonant_indices == (2, 4, 6)
    assert not r.exact


@given(st.integers(-50, 50), st.integers(1, 60))
def test_resonance_matches_divisibility(p, q):
    r = resonance_set(rational(p, q), "j", 2000)
    q_red = Fraction(p, q).denominator
    p_red = Fraction(p, q).numerator
    assert r.resonant_indices == tuple(j for j in range(1, 2001) if (p_red * j) % q_red == 0)


def test_golden_exponent():
    fit = liouville_exponent_fit(golden_ratio(), "j", 4096)
    assert 0.9 <= fit.delta_hat <= 1.1
    assert fit.exact
    assert not fit.fit_failed


def test_liouville_fit_fails():
    fit = liouville_exponent_fit(liouville_constant(6), "j", 10 ** 6)
    assert fit.fit_failed


def test_one_third_off_multiples():
    js = [j for j in range(1, 3000) if j % 3]
    fit = liouville_exponent_fit(rational(1, 3), "j", js)
    assert fit.delta_hat == 0.0
    assert fit.violations == 0


def test_resonant_index_rejected():
    with pytest.raises(ResonantIndexPresent):
        liouville_exponent_fit(rational(1, 3), "j", 100)


@pytest.mark.parametrize("a0", [golden_ratio(), parse_real("quadratic:0,1,2,1"), parse_real("cf:[0;2,1,3,1,1,5,2,7,1,1,4,3,2,9]")])
def test_envelope_monotone(a0):
    prev = 0.0
    for jmax in (64, 256, 1024, 4096):
        try:
            d = liouville_exponent_fit(a0, "j", jmax).delta_hat
        except ResonantIndexPresent:
            break
        assert d >= prev
        prev = d


def test_liouville_witness_depth_three():
    pairs = liouville_witness_sequence(liouville_constant(6), "j", 3, 10 ** 6)
    assert len(pairs) == 3
    x = liouville_constant(6).rational
    for k, (j, tau) in enumerate(pairs, start=1):
        # |x j - tau| < j^{-k/2}  <=>  (x j - tau)^2 j^k < 1, exactly
        assert (x * j - tau) ** 2 * Fraction(j) ** k < 1
    js = [j for j, _ in pairs]
    assert js == sorted(set(js))


def test_golden_witness_search():
    # 1, 2, 3 meet the level bounds (3 phi is 0.146 from 5 < 3^{-3/2}); no j > 3 meets j^{-2}
    assert liouville_witness_sequence(golden_ratio(), "j", 3, 10 ** 6) == [(1, 2), (2, 3), (3, 5)]
    with pytest.raises(NotFound) as info:
        liouville_witness_sequence(golden_ratio(), "j", 4, 10 ** 6)
    assert (info.value.depth, info.value.level) == (3, 4)


def test_half_odd_multipliers():
    # dist = 1/2 always: level 1 holds at j = 1 (bound 1), level 2 needs 1/2 < 1/j for j > 1
    with pytest.raises(NotFound) as info:
        liouville_witness_sequence(rational(1, 2), lambda j: 2 * j + 1, 2, 10 ** 4)
    assert info.value.level == 2


@pytest.mark.parametrize("a0", [golden_ratio(), parse_real("cf:[1;3,1,4,1,5,9,2,6]")])
def test_convergent_distances_match_high_precision(a0):
    mp.mp.dps = 60
    value = (mp.mpf(1) + mp.sqrt(5)) / 2 if a0.kind is RealKind.QUADRATIC \
        else mp.mpf(a0.rational.numerator) / a0.rational.denominator
    for q in range(1, 10 ** 4 + 1, 7):
        d, _, exact = product_dist(a0, q)
        x = value * q
        ref = abs(x - mp.nint(x))
        assert exact
        assert abs(d - float(ref)) <= 1e-15 * max(1.0, float(ref))


@pytest.mark.parametrize("text", ["rational:3/4", "golden_ratio", "liouville_constant:3", "float:0.25",
                                  "cf:[1;2,3]", "quadratic:1,1,5,2"])
def test_parse_roundtrip(text):
    x = parse_real(text)
    assert parse_real(to_text(x)) == x


def test_parse_rejects_garbage():
    for bad in ("pi", "rational:1/0", "cf:[1;0,2]"):
        with pytest.raises(PreconditionError):
            parse_real(bad)


def test_rational_lowest_terms():
    x = rational(6, -8)
    assert x.rational == Fraction(-3, 4)
    assert x.rational.denominator > 0


def test_continued_fraction_value():
    assert continued_fraction([1, 2, 2]).rational == Fraction(7, 5)
