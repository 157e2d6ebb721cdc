"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

The lines are collected by the ``criterion`` fixture and shown in the
"acceptance criteria" section of the pytest terminal summary.
"""

import math
import time

import numpy as np
from scipy.stats import unitary_group

from ghlab.classifier import Decision, classify_gh
from ghlab.decay import hq_demo_sequence, logq_membership, power_membership
from ghlab.diophantine import (golden_ratio, liouville_constant, liouville_exponent_fit, liouville_witness_sequence,
                               rational, resonance_set)
from ghlab.errors import CommutatorTooLarge, SingularSystem, TruncationInsufficient
from ghlab.mode_solver import dist_to_imaginary_integers, exp_primitive_derivatives, solve_mode, solve_mode_oracle
from ghlab.normal_form import conjugation_check
from ghlab.operator_model import (GeneratorSpec, ModeSymbol, OperatorSpec, eigen_generate, mode_symbol,
                                  simultaneous_diagonalize)
from ghlab.trig import TrigPoly, uniform_grid
from ghlab.witness import build_witness_signchange, verify_witness

from conftest import random_trig

PHI = (1 + math.sqrt(5)) / 2
SIN = TrigPoly((0.0,), (1.0,))
COS = TrigPoly((0.0, 1.0))


def label(text):
    def mark(fn):
        fn.label = text
        return fn
    return mark


@label("C1 oracle equivalence")
def test_c1_oracle_equivalence(criterion):
    rng = np.random.default_rng(1)
    grid = uniform_grid(256)
    start = time.perf_counter()
    accepted, refused, drawn, worst = 0, 0, 0, 0.0
    while accepted < 100:
        a = random_trig(rng, int(rng.integers(0, 4)))
        b = random_trig(rng, int(rng.integers(0, 4)))
        s = ModeSymbol(1, rng.uniform(-20, 20), rng.uniform(-20, 20), a, b)
        if dist_to_imaginary_integers(s.c0) < 0.1 or abs(s.c0) > 5:
            continue
        drawn += 1
        f = random_trig(rng, 3)(grid)
        try:
            o = solve_mode_oracle(s, f, grid)
        except (SingularSystem, TruncationInsufficient):
            # the Galerkin reference cannot be trusted on this mode
            refused += 1
            continue
        u = solve_mode(s, f, grid)
        worst = max(worst, float(np.max(np.abs(u.values - o.values))))
        accepted += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10
    criterion(ok, f"max sup diff {worst:.2e} over {accepted} modes ({refused} of {drawn} refused by the oracle), "
                  f"{elapsed:.2f} s")
    assert ok


@label("C2 inequality bounds")
def test_c2_inequality_bounds(criterion):
    rng = np.random.default_rng(2)
    beta = np.concatenate([rng.uniform(-10, 10, 10 ** 5), np.linspace(-10, 10, 10 ** 5)])
    r = beta - np.round(beta)  # exact for |beta| <= 10; e^{2 pi i beta} is 1-periodic
    gap = np.abs(1 - np.exp(2j * np.pi * r))
    small_divisor_violations = int(np.sum(gap < 4 * np.abs(r)))

    ell = np.arange(-3, 4)
    d = np.linspace(-0.5, 0.5, 10 ** 5 // len(ell) + 1)
    y = (2 * np.pi * ell[:, None] + d[None, :]).ravel()
    dist = np.abs(y - 2 * np.pi * np.round(y / (2 * np.pi)))
    cube_bad = 2 * np.sin(y / 2) ** 2 < dist ** 3  # = |1 - cos y| without cancellation
    cube_violations = int(np.sum(cube_bad))
    first_bad = float(dist[cube_bad].min()) if cube_violations else math.nan
    ok = small_divisor_violations == 0 and cube_violations == 0
    criterion(ok, f"small-divisor bound: {small_divisor_violations} violations on {beta.size} samples; "
                  f"cube bound: {cube_violations} violations on {y.size} points"
                  + (f" (fails for dist >= {first_bad:.5f})" if cube_violations else ""))
    assert small_divisor_violations == 0
    assert cube_violations == 0


@label("C3 conjugation identity")
def test_c3_conjugation_identity(criterion):
    start = time.perf_counter()
    op = OperatorSpec(TrigPoly((PHI, 1.0)), SIN, eigen_generate(GeneratorSpec.make("log_power", rho=1), 64))
    grid = uniform_grid(256)
    rng = np.random.default_rng(3)
    k = np.arange(-3, 4)
    U = (rng.normal(size=(64, k.size)) + 1j * rng.normal(size=(64, k.size))) @ np.exp(1j * np.outer(k, grid))
    rep = conjugation_check(op, U, 64, 256)
    elapsed = time.perf_counter() - start
    ok = rep.residual <= 1e-8 and elapsed < 5
    criterion(ok, f"residual {rep.residual:.2e} (relative {rep.relative_residual:.2e}), {elapsed:.2f} s")
    assert ok


@label("C4 sign-change witness")
def test_c4_signchange_witness(criterion):
    op = OperatorSpec(TrigPoly(), SIN, eigen_generate(GeneratorSpec.make("torus_frequencies"), 200))
    w = build_witness_signchange(op)
    report = verify_witness(w)
    u_sup = max(abs(m.log_sup_u()) for m in w.modes.values())
    f_excess = max(m.log_sup_f() + 10 * math.log(j) for j, m in w.modes.items() if j >= 50)
    verdict = classify_gh(op)
    ok = (report.passed and u_sup <= 1e-12 and f_excess <= 0
          and verdict.decision is Decision.NOT_GH and verdict.rule == "sign-change-superlog")
    criterion(ok, f"verify={report.passed}, max |log sup u| {u_sup:.1e}, "
                  f"max log(sup f * j^10) for j>=50 {f_excess:.2f}, {len(w.modes)} modes, "
                  f"classifier {verdict.decision.value}/{verdict.rule}")
    assert ok


def _lrho(rho, a, b):
    return OperatorSpec(a, b, eigen_generate(GeneratorSpec.make("log_power", rho=rho), 256))


@label("C5 L_rho verdicts")
def test_c5_lrho_verdicts(criterion):
    L = liouville_constant(6)
    cases = [
        ("rho=2 b=1+cos", _lrho(2, TrigPoly(), TrigPoly((1.0, 1.0))), None, Decision.GH),
        ("rho=2 b=sin", _lrho(2, TrigPoly(), SIN), None, Decision.NOT_GH),
        ("rho=1 b=sin a=phi", _lrho(1, TrigPoly.constant(PHI), SIN), golden_ratio(), Decision.GH),
        ("rho=1 b=sin a=Liouville", _lrho(1, TrigPoly.constant(float(L)), SIN), L, Decision.NOT_GH),
        ("rho=1 b=1/2+sin", _lrho(1, TrigPoly.constant(PHI), TrigPoly((0.5,), (1.0,))), None, Decision.GH),
    ]
    got = [(name, classify_gh(op, a0=a0).decision, want) for name, op, a0, want in cases]
    agree = sum(d is w for _, d, w in got)
    criterion(agree == 5, f"{agree}/5 agree: " + ", ".join(f"{n} -> {d.value}" for n, d, _ in got))
    assert agree == 5


@label("C6 Diophantine engine")
def test_c6_diophantine(criterion):
    fit = liouville_exponent_fit(golden_ratio(), "j", 4096)
    golden_ok = fit.exact and 0.9 <= fit.delta_hat <= 1.1

    pairs = liouville_witness_sequence(liouville_constant(6), "j", 3, 10 ** 6)
    liouville_ok = len(pairs) == 3 and pairs[-1][0] <= 10 ** 6

    mismatches = 0
    for p, q in [(1, 2), (2, 3), (3, 7), (5, 12), (7, 1), (-4, 9)]:
        a0 = rational(p, q)
        for mu, mu_of in (("j", lambda j: j), (lambda j: 2 * j + 1, lambda j: 2 * j + 1)):
            got = resonance_set(a0, mu, 10 ** 4).resonant_indices
            want = tuple(j for j in range(1, 10 ** 4 + 1) if (p * mu_of(j)) % q == 0)
            mismatches += got != want
    ok = golden_ok and liouville_ok and mismatches == 0
    criterion(ok, f"golden delta_hat {fit.delta_hat:.4f} (exact={fit.exact}); Liouville depth-3 pairs {pairs}; "
                  f"resonance mismatches {mismatches}/12")
    assert ok


@label("C7 demo sequence in log-Sobolev scale, not in H^0.1")
def test_c7_demo_sequence(criterion):
    u = hq_demo_sequence(0.5, 1.0, 10 ** 6)
    log_ok = all(logq_membership(u, s, 1.0).bounded_l2 for s in (1, 2, 3, 4, 5))
    power = power_membership(u, 0.1)
    growing = not power.bounded_l2
    sums = power.profile.partial_sums
    ok = log_ok and growing
    criterion(ok, f"log-weighted s<=5 summable={log_ok}; |xi|^0.1-weighted flagged unbounded={growing} "
                  f"(decade partial sums {', '.join(f'{x:.5f}' for x in sums)})")
    assert log_ok
    assert growing


@label("C8 simultaneous diagonalization")
def test_c8_simultaneous_diagonalization(criterion):
    rng = np.random.default_rng(8)
    worst_unitary, worst_offdiag = 0.0, 0.0
    for _ in range(500):
        size = int(rng.integers(2, 9))
        V = unitary_group.rvs(size, random_state=rng)
        sp = rng.normal(size=size)
        if rng.random() < 0.5:
            sp[: size // 2] = sp[0]
        P = V @ np.diag(sp) @ V.conj().T
        Q = V @ np.diag(rng.normal(size=size)) @ V.conj().T
        U, _, _ = simultaneous_diagonalize(P, Q)
        worst_unitary = max(worst_unitary, float(np.linalg.norm(U.conj().T @ U - np.eye(size))))
        for M in (P, Q):
            D = U.conj().T @ M @ U
            worst_offdiag = max(worst_offdiag, float(np.max(np.abs(D - np.diag(np.diag(D))))))
    rejected = 0
    for _ in range(20):
        size = int(rng.integers(2, 9))
        A = rng.normal(size=(size, size))
        B = rng.normal(size=(size, size))
        try:
            simultaneous_diagonalize(A + A.T, B + B.T)
        except CommutatorTooLarge:
            rejected += 1
    ok = worst_unitary <= 1e-10 and worst_offdiag <= 1e-8 and rejected == 20
    criterion(ok, f"unitarity defect {worst_unitary:.1e}, off-diagonal {worst_offdiag:.1e}, "
                  f"non-commuting rejected {rejected}/20")
    assert ok


@label("C9 exponential derivative bound")
def test_c9_exponential_derivative_bound(criterion):
    e = eigen_generate(GeneratorSpec.make("power", s=1), 256)
    op = OperatorSpec(COS, SIN, e)
    grid = uniform_grid(256)
    sup = {j: [float(np.max(np.abs(y))) for y in exp_primitive_derivatives(mode_symbol(op, j), grid, 3)]
           for j in range(8, 257)}
    # |d^k e^{C}| e^{nu B} = |Y_k|, since |e^{C}| = e^{-nu B}
    const = [sup[8][k] / 8 ** (k / e.n) for k in range(4)]
    worst = 0.0
    violations = 0
    for j, vals in sup.items():
        for k in range(4):
            ratio = vals[k] / (const[k] * j ** (k / e.n))
            worst = max(worst, ratio)
            # relative slack of 1e-12 covers spectral roundoff only
            violations += ratio > 1 + 1e-12
    criterion(violations == 0, f"{violations} violations over k<=3, 8<=j<=256; max ratio to fitted bound {worst:.12f}")
    assert violations == 0
