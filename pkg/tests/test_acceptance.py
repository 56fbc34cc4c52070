"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Statistical criteria use |z| < 3 with fixed seeds (1000 + criterion number)
chosen before the first run.
"""

import math
import time
from fractions import Fraction

import numpy as np
from hypothesis import given, settings, strategies as st

from anglesums import simplex_angles, theory
from anglesums.combinatorics import binomial, harmonic, stirling_first, stirling_identity_check
from anglesums.cones import conic_intrinsic_volumes_mc, cone_from_generators, crofton_consistency, orthant
from anglesums.geometry import PolyCone, convex_hull, euler_check, face_survives_projection, tangent_cone
from anglesums.harness import ExperimentConfig, run_affine_invariance, run_experiments, run_projection_theorem
from anglesums.models import fixture
from anglesums.rng import stream
from anglesums.simplex_angles import external_angle_sum, internal_angle_sum, simplex_angle_identity_check

TRIALS = 10_000
Z = 3.0


def _zs(rows):
    return ", ".join(f"{r.estimate:.4f} vs {r.theory.approx:.4f} (z={r.z_score:+.2f})" for r in rows)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 30), st.data())
def test_criterion_01_property(n, data):
    k = data.draw(st.integers(1, n))
    assert stirling_identity_check(n, k)


def test_criterion_01(acceptance_report):
    start = time.perf_counter()
    ok = all(stirling_identity_check(n, k) for n in range(1, 31) for k in range(1, n + 1))
    elapsed = time.perf_counter() - start
    assert acceptance_report(1, ok and elapsed < 1.0,
                             f"Stirling identities exact for 1<=k<=n<=30 in {elapsed:.3f} s")


def test_criterion_02(acceptance_report):
    simplex_angles._angle_sum.cache_clear()
    start = time.perf_counter()
    worst = max(simplex_angle_identity_check(n, k, tol=1e-10) for n in range(1, 11) for k in range(1, n + 1))
    elapsed = time.perf_counter() - start
    assert acceptance_report(2, worst < 1e-8 and elapsed < 60,
                             f"simplex-angle identities max residual {worst:.2e} in {elapsed:.2f} s")


def test_criterion_03(acceptance_report):
    devs = [internal_angle_sum(2, 1).value - 1, internal_angle_sum(3, 1).value - 0.5,
            internal_angle_sum(3, 2).value - 1.5]
    for n in range(1, 21):
        devs.append(internal_angle_sum(n, n).value - 1)
        devs.append(external_angle_sum(n, 1).value - 1)
        if n >= 2:
            devs.append(external_angle_sum(n, n - 1).value - n / 2)
    worst = max(abs(x) for x in devs)
    assert acceptance_report(3, worst < 1e-8, f"trivial angle anchors max deviation {worst:.2e}")


def test_criterion_04(acceptance_report):
    start = time.perf_counter()
    cfgs = [ExperimentConfig("walk", 10, 2, 0, q, trials=TRIALS, samples_per_angle=20, seed=1004)
            for q in ("f_count", "internal_sum")]
    rows = run_experiments(cfgs)
    elapsed = time.perf_counter() - start
    assert rows[0].theory.exact == 2 * harmonic(10)
    assert rows[1].theory.exact == harmonic(10) - 1
    ok = all(r.passed(Z) for r in rows) and elapsed < 300
    assert acceptance_report(4, ok, f"planar walk n=10: {_zs(rows)} in {elapsed:.0f} s")


def test_criterion_05(acceptance_report):
    cfgs = [ExperimentConfig("walk", 3, 3, j, "internal_sum", trials=TRIALS, samples_per_angle=40, seed=1005)
            for j in (0, 1)]
    rows = run_experiments(cfgs)
    h3, h3_2 = harmonic(3), harmonic(3, 2)
    assert rows[0].theory.exact == Fraction(1, 6)
    assert rows[1].theory.exact == Fraction(3, 2) * h3**2 - h3 - Fraction(3, 2) * h3_2
    assert acceptance_report(5, all(r.passed(Z) for r in rows), f"walk n=3 d=3 angle sums: {_zs(rows)}")


def test_criterion_06(acceptance_report):
    worst = max(abs(theory.ef_gaussian(d + 1, d, j).approx - binomial(d + 1, j + 1))
                for d in range(1, 6) for j in range(d))
    cfgs = [ExperimentConfig("gaussian", 6, 3, j, "f_count", trials=TRIALS, seed=1006) for j in range(3)]
    rows = run_experiments(cfgs)
    ok = worst < 1e-6 and all(r.passed(Z) for r in rows)
    assert acceptance_report(6, ok, f"simplex boundary dev {worst:.1e}; P(6,3) f-vector: {_zs(rows)}")


def test_criterion_07(acceptance_report):
    gauss = run_experiments([ExperimentConfig("gaussian", 6, 3, j, "external_sum", trials=TRIALS,
                                              samples_per_angle=40, seed=1007) for j in range(3)])
    walk = run_experiments([ExperimentConfig("walk", 6, 3, j, "external_sum", trials=TRIALS,
                                             samples_per_angle=40, seed=1007) for j in range(3)])
    for j in range(3):
        assert abs(gauss[j].theory.approx - external_angle_sum(6, j + 1).value) < 1e-9
        assert walk[j].theory.exact == Fraction(math.factorial(j) * stirling_first(7, j + 1), math.factorial(6))
    ok = all(r.passed(Z) for r in gauss + walk)
    assert acceptance_report(7, ok, f"external sums P(6,3): {_zs(gauss)}; Q(6,3): {_zs(walk)}")


def test_criterion_08(acceptance_report):
    rows = run_experiments([ExperimentConfig(m, 6, 3, 0, "grassmann_sum", k=k, trials=TRIALS,
                                             samples_per_angle=1, seed=1008)
                            for m in ("walk", "gaussian") for k in (1, 2)])
    gap = 0.0
    for k in (1, 2):
        p, a = theory._grassmann_coeffs(6, 3, k)
        terms = theory._GaussTerms(6, 0, 1e-10)
        gap = max(gap, abs(terms.combine(p).approx - terms.combine(a).approx))
        pw, aw = theory._grassmann_coeffs(7, 3, k)
        assert theory._walk_combine(6, 0, pw).exact == theory._walk_combine(6, 0, aw).exact
    ok = all(r.passed(Z) for r in rows) and gap < 1e-8
    assert acceptance_report(8, ok, f"Grassmann sums {_zs(rows)}; Gaussian form gap {gap:.1e}, walk forms equal")


def test_criterion_09(acceptance_report):
    rows = []
    for name, param in (("cube", 3), ("regular-simplex", 4)):
        for k in range(1, 4):
            for j in range(k):
                cfg = ExperimentConfig("projection", param, 3, j, "grassmann_sum", k=k, trials=TRIALS,
                                       samples_per_angle=TRIALS, seed=1009, fixture=name)
                rows.append(run_projection_theorem(cfg, k))
    detail = ", ".join(f"{r.config.fixture} j={r.config.j} k={r.extra['k']} z={r.z_score:+.2f}" for r in rows)
    assert acceptance_report(9, all(r.passed(Z) for r in rows), f"projection theorem: {detail}")


def test_criterion_10(acceptance_report):
    pairs = [(j, k) for k in range(3) for j in range(k + 1)]
    rows = run_experiments([ExperimentConfig("projection", 4, 3, j, "intrinsic_sum", k=k, trials=TRIALS,
                                             samples_per_angle=20, seed=1010, fixture="orthant")
                            for j, k in pairs])
    for (j, k), r in zip(pairs, rows):
        assert r.theory.exact == Fraction(binomial(4, j) * binomial(4 - j, k - j), 2 ** (4 - j))
    assert acceptance_report(10, all(r.passed(Z) for r in rows), f"orthant image upsilon sums: {_zs(rows)}")


def test_criterion_11(acceptance_report):
    cfg = ExperimentConfig("gaussian", 5, 2, 0, "internal_sum", trials=TRIALS, samples_per_angle=20, seed=1011)
    results = [run_affine_invariance(cfg, A) for A in (np.diag([3.0, 1.0]), np.array([[1.0, 1.0], [0.0, 1.0]]))]
    detail = ", ".join(f"diff {r.difference:+.4f} z={r.z_score:+.2f}" for r in results)
    assert acceptance_report(11, all(r.passed(Z) for r in results), f"affine invariance (diag, shear): {detail}")


def test_criterion_12(acceptance_report):
    rng = np.random.default_rng(1012)
    eulers = []
    for _ in range(100):
        d = int(rng.integers(2, 5))
        eulers.append(euler_check(convex_hull(rng.standard_normal((d + 1 + int(rng.integers(0, 12)), d)))))
    euler_ok = all(e == 1 for e in eulers)

    pairs = 0
    for _ in range(100):
        d = int(rng.integers(2, 5))
        P = convex_hull(rng.standard_normal((d + 4, d)))
        k = int(rng.integers(1, d))
        B = rng.standard_normal((k, d))
        F = P.lattice[int(rng.integers(0, k))][0]
        face_survives_projection(P, F, B, dual_check=True)  # raises on disagreement
        pairs += 1

    cube = fixture("cube", 3)
    crofton_cones = {"orthant(3)": orthant(3), "orthant(4)": orthant(4),
                     "cube vertex": tangent_cone(cube, cube.lattice[0][0])}
    crofton_ok = True
    for i, C in enumerate(crofton_cones.values()):
        for k in range(C.dim_ambient):
            r = crofton_consistency(C, k, 20000, stream(1012, 1, i, k))
            crofton_ok &= r.residual < 3 * r.stderr or r.residual == r.stderr == 0

    tested = dict(crofton_cones)
    tested["halfplane"] = PolyCone(np.array([[0.0, -1.0]]))
    for i in range(4):
        tested[f"random cone {i}"] = cone_from_generators(stream(1012, 2, i).standard_normal((4, 3)) + 1.5)
    sums_ok = True
    for i, C in enumerate(tested.values()):
        ups = conic_intrinsic_volumes_mc(C, 20000, stream(1012, 3, i))
        se = math.sqrt(math.fsum(u.variance for u in ups))
        sums_ok &= abs(math.fsum(u.mean for u in ups) - 1) <= 3 * se + 1e-12

    ok = euler_ok and pairs == 100 and crofton_ok and sums_ok
    assert acceptance_report(12, ok, f"Euler {sum(e == 1 for e in eulers)}/100, survival agreement {pairs}/100, "
                                     f"Crofton {'ok' if crofton_ok else 'FAILED'}, "
                                     f"sum of intrinsic volumes {'ok' if sums_ok else 'FAILED'} on {len(tested)} cones")
