import json
import math

import numpy as np
import pytest

from anglesums import harness
from anglesums.cli import main
from anglesums.combinatorics import harmonic
from anglesums.errors import GPViolation
from anglesums.geometry import convex_hull, tangent_cone
from anglesums.cones import solid_angle_mc
from anglesums.harness import (
    CSV_COLUMNS,
    ExperimentConfig,
    emit_tables,
    format_rows,
    run_affine_invariance,
    run_experiment,
    run_projection_theorem,
    verify_identities,
)
from anglesums.models import fixture
from anglesums.rng import stream
from anglesums.simplex_angles import external_angle_sum


def test_walk_internal_sum_small():
    row = run_experiment(ExperimentConfig("walk", 3, 2, 0, "internal_sum", trials=2000,
                                          samples_per_angle=50, seed=11))
    assert row.theory.exact == harmonic(3) - 1
    assert row.passed()
    assert row.trial_variance > row.angle_variance > 0


def test_gaussian_external_vertices():
    row = run_experiment(ExperimentConfig("gaussian", 6, 3, 0, "external_sum", trials=500,
                                          samples_per_angle=50, seed=12))
    assert abs(row.theory.approx - 1) < 1e-9
    assert row.passed()


def test_z_score_definition():
    row = run_experiment(ExperimentConfig("walk", 5, 2, 0, "f_count", trials=300, seed=1))
    assert row.z_score == pytest.approx((row.estimate - row.theory.approx) / row.stderr)


def test_reproducible_across_workers():
    cfg = ExperimentConfig("gaussian", 6, 2, 0, "internal_sum", trials=40, samples_per_angle=10, seed=5)
    one = format_rows([run_experiment(cfg, workers=1)])
    two = format_rows([run_experiment(cfg, workers=2)])
    assert one == two
    assert one.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_affine_identity_is_exact():
    cfg = ExperimentConfig("gaussian", 5, 2, 0, "internal_sum", trials=50, samples_per_angle=10, seed=3)
    res = run_affine_invariance(cfg, np.eye(2))
    assert res.base.csv_row() == res.transformed.csv_row()
    assert res.z_score == 0.0
    with pytest.raises(ValueError):
        run_affine_invariance(cfg, np.zeros((2, 2)))


def test_affine_shear_grassmann():
    cfg = ExperimentConfig("gaussian", 5, 2, 0, "grassmann_sum", k=1, trials=1000,
                           samples_per_angle=20, seed=8)
    assert run_affine_invariance(cfg, [[1.0, 1.0], [0.0, 1.0]]).passed()


def test_projection_theorem_trivial_cases():
    cfg = ExperimentConfig("projection", 4, 3, 0, "grassmann_sum", k=1, trials=200,
                           samples_per_angle=2000, seed=2, fixture="regular-simplex")
    row = run_projection_theorem(cfg, 1)
    assert row.extra["right"] == 2.0  # every line image is a segment
    assert row.passed()
    top = run_projection_theorem(cfg, 3)
    assert top.extra["left"] == top.extra["right"] == 0 and top.z_score == 0


def test_perles_shephard_on_cube():
    # sum of vertex angles = f_0/2 - E f_0(projection to a hyperplane)/2
    P = fixture("cube", 3)
    cfg = ExperimentConfig("projection", 3, 3, 0, "grassmann_sum", k=2, trials=500,
                           samples_per_angle=4000, seed=4, fixture="cube")
    row = run_projection_theorem(cfg, 2)
    beta = math.fsum(solid_angle_mc(tangent_cone(P, F), 4000, stream(4, 9, i)).mean
                     for i, F in enumerate(P.lattice[0]))
    assert abs(beta - (0.5 * 8 - 0.5 * (8 - row.extra["right"]))) < 0.05


@pytest.mark.parametrize("d", [2, 3])
def test_empirical_gram_euler(d):
    values = []
    for t in range(300):
        P = convex_hull(stream(21, t, 0).standard_normal((5, d)))
        rng = stream(21, t, 1)
        s = math.fsum((-1) ** j * solid_angle_mc(tangent_cone(P, F), 200, rng).mean
                      for j in range(d) for F in P.lattice[j])
        values.append(s + (-1) ** d)
    mean = np.mean(values)
    se = np.std(values, ddof=1) / math.sqrt(len(values))
    assert abs(mean) <= 3 * se + 1e-12


def test_trial_index_attached_to_gp_violation(monkeypatch):
    def bad(*args, **kwargs):
        raise GPViolation("collinear")
    monkeypatch.setattr(harness, "sample_walk_points", bad)
    with pytest.raises(GPViolation) as info:
        run_experiment(ExperimentConfig("walk", 4, 2, 0, "f_count", trials=3))
    assert info.value.trial == 0 and "trial 0" in str(info.value)


@pytest.mark.parametrize("kwargs", [
    dict(model="cauchy", n=5, d=2, j=0, quantity="f_count"),
    dict(model="gaussian", n=2, d=2, j=0, quantity="f_count"),
    dict(model="walk", n=5, d=2, j=2, quantity="f_count"),
    dict(model="walk", n=5, d=2, j=0, quantity="grassmann_sum"),
    dict(model="walk", n=5, d=2, j=1, quantity="intrinsic_sum", k=0),
    dict(model="walk", n=5, d=2, j=0, quantity="f_count", trials=0),
    dict(model="projection", n=3, d=4, j=0, quantity="f_count", fixture="cube"),
    dict(model="projection", n=3, d=2, j=0, quantity="f_count"),
])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig(**kwargs)


def test_tables():
    rows = emit_tables("internal_sum", "walk", range(1, 11), [2], [0])
    assert [Fraction_(r["theory_exact"]) for r in rows] == [harmonic(n) - 1 for n in range(2, 11)]
    rows = emit_tables("external_sum", "gaussian", range(4, 9), [3], [1])
    for r in rows:
        assert abs(float(r["theory_approx"]) - external_angle_sum(r["n"], 2).value) < 1e-9
    rows = emit_tables("grassmann_sum", "walk", range(3, 8), [3], [0, 1, 2], [3])
    assert rows and all(r["theory_exact"] == "0" for r in rows)


def Fraction_(text):
    from fractions import Fraction
    return Fraction(text)


def test_verify_identities_and_sensitivity():
    rep = verify_identities(crofton_samples=4000, euler_hulls=50)
    assert rep.ok, rep.lines()
    bad = verify_identities(perturbation=1e-3, crofton_samples=500, euler_hulls=2)
    verdict = {name: ok for name, ok, _ in bad.checks}
    assert not bad.ok and not verdict["simplex angle identities n<=10"]
    assert verdict["stirling convolutions n<=30"] and verdict["trivial angle anchors"]


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "row.csv"
    assert main(["simulate", "--model", "walk", "--n", "4", "--d", "2", "--j", "0",
                 "--quantity", "f_count", "--trials", "200", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert main(["simulate", "--model", "walk", "--n", "4", "--d", "2", "--j", "0",
                 "--quantity", "f_count", "--trials", "200", "--threshold", "0"]) == 1
    assert main(["simulate", "--model", "walk", "--n", "1", "--d", "2", "--j", "0",
                 "--quantity", "f_count"]) == 2
    assert main(["simulate", "--model", "gaussian"]) == 2
    assert main(["tables", "--model", "gaussian", "--quantity", "f_count", "--n", "12",
                 "--d", "3", "--tol", "1e-300"]) == 3
    capsys.readouterr()


def test_cli_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"model": "walk", "n": 3, "d": 2, "j": 0, "quantity": "internal_sum",
                               "trials": 100, "samples": 20, "seed": 2}))
    # this test is about config parsing; the statistical verdict is covered elsewhere
    assert main(["simulate", "--config", str(cfg), "--format", "json"]) in (0, 1)
    record = json.loads(capsys.readouterr().out)
    assert record["theory_exact"] == "5/6" and record["config"]["samples_per_angle"] == 20


def test_cli_angles(tmp_path, capsys):
    poly = tmp_path / "square.json"
    poly.write_text(json.dumps({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]}))
    assert main(["angles", str(poly), "--samples", "20000"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["f_vector"] == [4, 4]
    assert abs(out["angle_sums"]["0"]["internal"] - 1.0) < 0.03
    assert abs(out["angle_sums"]["1"]["internal"] - 2.0) < 1e-12
