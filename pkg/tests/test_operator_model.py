import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from ghlab.errors import CommutatorTooLarge, PreconditionError
from ghlab.operator_model import (
    EigenData, GeneratorSpec, OperatorSpec, eigen_generate, explicit_eigen, mode_symbol,
    reduce_blocks, simultaneous_diagonalize, torus_frequency, weyl_check,
)
from ghlab.trig import TrigPoly, uniform_grid

from strategies import trig_polys

PHI = (1 + math.sqrt(5)) / 2


def test_power_generator_values():
    e = eigen_generate(GeneratorSpec.make("power", s=1), 3)
    np.testing.assert_array_equal(e.nu, [1, 2, 3])


def test_log_power_generator_values():
    e = eigen_generate(GeneratorSpec.make("log_power", rho=1), 3)
    # j = 2, 3 carry xi = 1, -1
    np.testing.assert_allclose(e.nu[1:], [1.0986122886681098, 1.0986122886681098], rtol=1e-15)


def test_torus_tie_order():
    assert [torus_frequency(j) for j in range(1, 6)] == [0, 1, -1, 2, -2]
    e = eigen_generate(GeneratorSpec.make("torus_frequencies"), 3)
    np.testing.assert_array_equal(e.mu, [0, 1, -1])


def test_unknown_generator_rejected():
    with pytest.raises(PreconditionError):
        GeneratorSpec.make("bessel")


def test_bad_jmax_rejected():
    with pytest.raises(PreconditionError):
        eigen_generate(GeneratorSpec.make("power"), 0)


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_log_power_invariant(rho):
    e = eigen_generate(GeneratorSpec.make("log_power", rho=rho), 50)
    xi = np.array([torus_frequency(j) for j in range(1, 51)])
    np.testing.assert_allclose(e.nu, np.log(2 + np.abs(xi)) ** rho, rtol=1e-15)


def test_lambda_nondecreasing_for_generators():
    for kind in ("torus_frequencies", "power", "log_power"):
        lam = eigen_generate(GeneratorSpec.make(kind), 300).lam
        assert np.all(np.diff(lam) >= 0)


def test_weyl_linear():
    r = weyl_check(explicit_eigen(range(1, 65), range(1, 65)))
    assert (r.ratio_min, r.ratio_max) == (1.0, 1.0)
    assert r.ok


def test_weyl_torus_ratios():
    r = weyl_check(eigen_generate(GeneratorSpec.make("torus_frequencies"), 512))
    assert 0.4 <= r.ratio_min <= r.ratio_max <= 0.6
    assert r.ok


def test_weyl_log_fails():
    j = np.arange(1, 129)
    r = weyl_check(explicit_eigen(j, j, lam=np.log(j + 1)))
    assert not r.ok


def test_weyl_needs_entries():
    with pytest.raises(PreconditionError):
        weyl_check(explicit_eigen(range(10), range(10)))


@pytest.mark.parametrize("jmax", [128, 512, 2048])
def test_weyl_torus_never_flags(jmax):
    assert weyl_check(eigen_generate(GeneratorSpec.make("torus_frequencies"), jmax)).ok


def test_diagonalize_identity_pair():
    U, dP, dQ = simultaneous_diagonalize(np.eye(2), np.diag([1.0, 2.0]))
    assert np.allclose(np.abs(U), np.eye(2))
    np.testing.assert_allclose(dQ, [1, 2])


def test_diagonalize_swap_pair():
    P = np.array([[0, 1], [1, 0]], float)
    Q = np.array([[2, 1], [1, 2]], float)
    U, dP, dQ = simultaneous_diagonalize(P, Q)
    pairs = sorted(zip(np.round(dP, 12), np.round(dQ, 12)))
    assert pairs == [(-1.0, 1.0), (1.0, 3.0)]
    # columns are (1, +-1)/sqrt 2 up to phase
    for k in range(2):
        v = U[:, k] / U[0, k] * abs(U[0, k])
        assert abs(abs(v[0]) - 1 / math.sqrt(2)) < 1e-12
        assert abs(abs(v[1]) - 1 / math.sqrt(2)) < 1e-12


def test_diagonalize_rejects_noncommuting():
    with pytest.raises(CommutatorTooLarge):
        simultaneous_diagonalize(np.array([[0, 1], [1, 0]]), np.diag([1.0, 2.0]))


def test_diagonalize_rejects_non_hermitian():
    with pytest.raises(PreconditionError):
        simultaneous_diagonalize(np.array([[0, 1], [0, 0]]), np.eye(2))


@given(st.integers(2, 8), st.integers(0, 2 ** 32 - 1), st.booleans())
def test_diagonalize_random_commuting(size, seed, degenerate):
    rng = np.random.default_rng(seed)
    V = unitary_group.rvs(size, random_state=rng)
    sp = rng.normal(size=size)
    if degenerate:
        sp[: size // 2] = sp[0]
    sq = rng.normal(size=size)
    P = V @ np.diag(sp) @ V.conj().T
    Q = V @ np.diag(sq) @ V.conj().T
    U, dP, dQ = simultaneous_diagonalize(P, Q)
    assert np.linalg.norm(U.conj().T @ U - np.eye(size)) <= 1e-10
    got = sorted(zip(np.round(dP, 6), dQ))
    want = sorted(zip(np.round(sp, 6), sq))
    np.testing.assert_allclose(got, want, atol=1e-8)


def test_reduce_blocks_flattens():
    P = np.array([[0, 1], [1, 0]], float)
    Q = np.array([[2, 1], [1, 2]], float)
    e = reduce_blocks([1.0, 2.0], [np.array([[3.0]]), P], [np.array([[4.0]]), Q])
    assert len(e) == 3
    np.testing.assert_allclose(sorted(zip(e.mu[1:], e.nu[1:])), [(-1, 1), (1, 3)], atol=1e-12)


def _op(a, b, e):
    return OperatorSpec(a, b, e)


def test_mode_symbol_examples():
    e = explicit_eigen([2.0], [0.0])
    assert mode_symbol(_op(TrigPoly.constant(1), TrigPoly(), e), 1).c0 == 2j
    e = explicit_eigen([0.0], [5.0])
    s = mode_symbol(_op(TrigPoly(), TrigPoly((0.0,), (1.0,)), e), 1)
    assert s.c0 == 0
    t = uniform_grid(16)
    np.testing.assert_allclose(s.c_of_t(t), -5 * np.sin(t))
    e = eigen_generate(GeneratorSpec.make("power", s=1), 3)
    s = mode_symbol(_op(TrigPoly.constant(PHI), TrigPoly.constant(1.0), e), 3)
    assert s.c0 == pytest.approx(-3 + 3 * PHI * 1j, abs=1e-15)


def test_mode_symbol_out_of_range():
    e = explicit_eigen([1.0], [1.0])
    with pytest.raises(IndexError):
        mode_symbol(_op(TrigPoly(), TrigPoly(), e), 2)


def test_empty_eigendata_rejected():
    with pytest.raises(PreconditionError):
        EigenData(1, 1.0, ())


@given(trig_polys(), trig_polys(), st.floats(-20, 20), st.floats(-20, 20))
def test_c0_is_quadrature_average(a, b, mu, nu):
    e = explicit_eigen([mu], [nu])
    s = mode_symbol(_op(a, b, e), 1)
    avg = np.mean(s.c_of_t(uniform_grid(4096)))
    assert abs(avg - s.c0) <= 1e-10 * max(1.0, abs(mu) + abs(nu))
