import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ghlab.decay import (
    DecayKind, SeriesProfile, classify_sequence, decade_profile, hq_demo_sequence, logq_membership,
    power_membership, sobolev_norm,
)
from ghlab.errors import PreconditionError

J = np.arange(1, 1025, dtype=float)


def classify(values):
    return classify_sequence(SeriesProfile.from_values({0: values}))


def test_exponential_decay_is_rapid():
    assert classify(np.exp(-J)).kind is DecayKind.RAPID


def test_cubic_growth_is_polynomial():
    c = classify(J ** 3)
    assert c.kind is DecayKind.POLYNOMIAL
    assert c.order == pytest.approx(3, abs=0.1)


def test_root_exponential_is_superpolynomial():
    assert classify(np.exp(np.sqrt(J))).kind is DecayKind.SUPERPOLYNOMIAL


def test_needs_64_modes():
    with pytest.raises(PreconditionError):
        classify(np.ones(63))


@pytest.mark.parametrize("N", [0, 1, 3, 7])
def test_power_laws(N):
    c = classify(J ** N)
    assert c.kind is DecayKind.POLYNOMIAL
    assert abs(c.order - N) <= 0.1


@pytest.mark.parametrize("N", [0, 1, 3, 7])
@pytest.mark.parametrize("scale", [1e-6, 1.0, 1e6])
def test_scale_invariance(N, scale):
    base = classify(J ** N)
    c = classify(scale * J ** N)
    assert c.kind is base.kind
    assert abs(c.order - base.order) <= 1e-9


def test_log_domain_profile_survives_underflow():
    logs = -J ** 1.5  # e^{-j^1.5} underflows for large j
    c = classify_sequence(SeriesProfile.from_logs({0: logs, 1: logs + np.log(J)}))
    assert c.kind is DecayKind.RAPID


def test_worst_derivative_decides():
    c = classify_sequence(SeriesProfile.from_values({0: np.exp(-J), 1: J ** 2}))
    assert c.kind is DecayKind.POLYNOMIAL


def test_sobolev_delta():
    u = np.zeros(100)
    u[0] = 1.0
    for s in (-2.0, 0.0, 3.5):
        assert sobolev_norm(u, s).value == pytest.approx(1.0)


def test_sobolev_basel():
    j = np.arange(1, 10 ** 6 + 1, dtype=float)
    res = sobolev_norm(1 / j, 0.0)
    assert abs(res.value - math.pi / math.sqrt(6)) <= 1e-3
    assert res.converged


def test_sobolev_harmonic_diverges():
    j = np.arange(1, 10 ** 5 + 1, dtype=float)
    assert not sobolev_norm(1 / j, 1.0).converged


@given(st.floats(-3, 3), st.floats(0, 3), st.integers(0, 2 ** 31))
def test_sobolev_monotone_in_s(s1, ds, seed):
    u = np.random.default_rng(seed).uniform(0, 1, 200) / np.arange(1, 201) ** 2
    assert sobolev_norm(u, s1).value <= sobolev_norm(u, s1 + ds).value * (1 + 1e-12)


def test_hq_demo_value_at_ten():
    u = hq_demo_sequence(0.5, 1.0, 20)
    assert u.at(10) == pytest.approx(0.03873899936072338584, rel=1e-12)


def test_hq_demo_cutoff_and_symmetry():
    u = hq_demo_sequence(0.5, 1.0, 50)
    assert u.at(2) == 0.0
    assert u.at(-2) == 0.0
    for xi in range(1, 51):
        assert u.at(xi) == u.at(-xi)


@pytest.mark.parametrize("args", [(0.0, 1.0, 10), (1.0, 1.0, 10), (0.5, 0.5, 10), (0.5, 1.0, 0)])
def test_hq_demo_parameter_checks(args):
    with pytest.raises(PreconditionError):
        hq_demo_sequence(*args)


def test_delta_sequence_in_every_log_space():
    xi = np.arange(-1000, 1001)
    vals = (xi == 1).astype(float)
    from ghlab.decay import FourierSequence
    u = FourierSequence.from_values(xi, vals)
    for s in (0, 5, 50):
        assert logq_membership(u, s, 1.0).bounded_l2


def test_power_weight_on_demo_sequence_is_flagged_at_large_range():
    u = hq_demo_sequence(0.5, 1.0, 10 ** 6)
    assert not power_membership(u, 0.1).bounded_l2


def test_decade_profile_sums():
    u = hq_demo_sequence(0.5, 1.0, 1000)
    prof = decade_profile(u, lambda ax: 0.0 * ax)
    direct = float(np.sum(u.values[np.isfinite(u.log_abs)] ** 2))
    assert prof.partial_sums[-1] == pytest.approx(direct, rel=1e-12)
