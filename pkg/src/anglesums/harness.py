"""Monte Carlo experiments checked against the closed forms in :mod:`anglesums.theory`.

Every trial draws from its own stream ``stream(seed, trial, ...)`` and
per-trial results are combined with ``math.fsum`` after being put back in
trial order, so output does not depend on how many worker processes ran.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import theory
from .combinatorics import stirling_gf_check, stirling_identity_check
from .cones import (
    AngleEstimate,
    cone_face_angles,
    cone_faces,
    cone_from_generators,
    conic_intrinsic_volumes_mc,
    crofton_consistency,
    face_tangent_cone,
    grassmann_angle_mc,
    orthant,
    random_subspace,
    solid_angle_mc,
)
from .errors import DegenerateInput, GPViolation
from .geometry import PolyCone, Polytope, convex_hull, euler_check, f_vector, normal_cone, project, tangent_cone
from .models import FIXTURES, WalkIncrementModel, fixture, gaussian_projection_points, sample_gaussian_points, sample_walk_points
from .rng import stream
from .simplex_angles import DEFAULT_TOL, external_angle_sum, internal_angle_sum, simplex_angle_identity_check

__all__ = [
    "MODELS",
    "QUANTITIES",
    "CSV_COLUMNS",
    "ExperimentConfig",
    "ComparisonRow",
    "AffineInvarianceResult",
    "run_experiment",
    "run_experiments",
    "run_affine_invariance",
    "run_projection_theorem",
    "theory_value",
    "emit_tables",
    "format_table",
    "format_rows",
    "IdentityReport",
    "verify_identities",
]

MODELS = ("gaussian", "walk", "projection")
QUANTITIES = ("f_count", "internal_sum", "external_sum", "grassmann_sum", "intrinsic_sum")
CSV_COLUMNS = ("quantity", "model", "n", "d", "j", "k", "theory_exact", "theory_approx",
               "estimate", "stderr", "z", "trials", "samples", "discarded", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    """One simulation: a random polytope (or cone) model and a face statistic.

    For ``model="projection"`` the object is the Gaussian image in ``R^d`` of
    ``fixture(fixture_name, n)``.  ``k`` is used by ``grassmann_sum`` and
    ``intrinsic_sum`` only.
    """

    model: str
    n: int
    d: int
    j: int
    quantity: str
    k: int | None = None
    trials: int = 1000
    samples_per_angle: int = 100
    seed: int = 0
    tol: float = DEFAULT_TOL
    fixture: str | None = None
    walk_kind: str = "iid-gaussian"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.quantity not in QUANTITIES:
            raise ValueError(f"quantity must be one of {QUANTITIES}")
        if self.trials < 1 or self.samples_per_angle < 1:
            raise ValueError("trials and samples_per_angle must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.model == "gaussian" and self.n < self.d + 1:
            raise ValueError("the Gaussian model needs n >= d + 1")
        if self.model == "walk" and self.n < self.d:
            raise ValueError("the walk model needs n >= d")
        if self.model == "projection":
            if self.fixture not in FIXTURES:
                raise ValueError(f"projection needs a fixture from {FIXTURES}")
            dim = self.n - 1 if self.fixture == "regular-simplex" else self.n
            if not 1 <= self.d <= dim:
                raise ValueError(f"d must lie in 1..{dim} for this fixture")
        if not 0 <= self.j <= self.d - 1:
            raise ValueError(f"j must lie in 0..{self.d - 1}")
        if self.quantity == "grassmann_sum":
            if self.k is None or not 0 <= self.k <= self.d:
                raise ValueError(f"grassmann_sum needs 0 <= k <= {self.d}")
        elif self.quantity == "intrinsic_sum":
            if self.k is None or not self.j <= self.k <= self.d:
                raise ValueError(f"intrinsic_sum needs {self.j} <= k <= {self.d}")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        return cls(**data)


@dataclass(frozen=True)
class ComparisonRow:
    """Simulated mean of a face statistic next to its closed form.

    ``trial_variance`` is the sample variance of the per-trial values and
    already contains the angle-estimation noise; ``angle_variance`` is the
    mean per-trial variance due to the angle estimates alone.
    """

    config: ExperimentConfig
    theory: theory.TheoryValue
    estimate: float
    stderr: float
    z_score: float
    discarded_trials: int = 0
    trial_variance: float = 0.0
    angle_variance: float = 0.0
    extra: dict = field(default_factory=dict)

    def passed(self, threshold: float = 3.0) -> bool:
        return abs(self.z_score) < threshold

    def csv_row(self) -> dict:
        c = self.config
        return {
            "quantity": c.quantity, "model": c.model if c.fixture is None else f"{c.model}:{c.fixture}",
            "n": c.n, "d": c.d, "j": c.j, "k": "" if c.k is None else c.k,
            "theory_exact": self.theory.exact_str(), "theory_approx": repr(self.theory.approx),
            "estimate": repr(self.estimate), "stderr": repr(self.stderr), "z": repr(self.z_score),
            "trials": c.trials, "samples": c.samples_per_angle, "discarded": self.discarded_trials,
            "seed": c.seed,
        }


def _z(diff: float, stderr: float, slack: float = 0.0) -> float:
    if stderr > 0:
        return diff / stderr
    return 0.0 if abs(diff) <= slack + 1e-12 else math.copysign(math.inf, diff)


# -- theory lookup ----------------------------------------------------------

def theory_value(cfg: ExperimentConfig) -> theory.TheoryValue:
    """Closed-form expectation of the statistic described by ``cfg``."""
    n, d, j, k, q = cfg.n, cfg.d, cfg.j, cfg.k, cfg.quantity
    if cfg.model == "projection":
        data = theory.fixture_angle_data(cfg.fixture, n, cfg.tol)
        if q == "f_count":
            return theory.projection_ef(data, d, j)
        if q == "grassmann_sum":
            return theory.projection_grassmann_sum(data, d, j, k)
        kk = {"internal_sum": d, "external_sum": j}.get(q, k)
        return theory.projection_intrinsic_sum(data, d, j, kk, cfg.tol)
    if cfg.model == "walk":
        table = {
            "f_count": lambda: theory.ef_walk(n, d, j),
            "internal_sum": lambda: theory.internal_angle_sum_walk(n, d, j),
            "external_sum": lambda: theory.external_angle_sum_walk(n, d, j),
            "grassmann_sum": lambda: theory.grassmann_sum_walk(n, d, j, k),
            "intrinsic_sum": lambda: theory.intrinsic_sum_walk(n, d, j, k),
        }
    else:
        t = cfg.tol
        table = {
            "f_count": lambda: theory.ef_gaussian(n, d, j, t),
            "internal_sum": lambda: theory.internal_angle_sum_gaussian(n, d, j, t),
            "external_sum": lambda: theory.external_angle_sum_gaussian(n, d, j, t),
            "grassmann_sum": lambda: theory.grassmann_sum_gaussian(n, d, j, k, t),
            "intrinsic_sum": lambda: theory.intrinsic_sum_gaussian(n, d, j, k, t),
        }
    return table[q]()


# -- one trial --------------------------------------------------------------

@lru_cache(maxsize=None)
def _fixture(name: str, param: int):
    return fixture(name, param)


def _sample_object(cfg: ExperimentConfig, rng, matrix=None):
    if cfg.model == "gaussian":
        pts = sample_gaussian_points(cfg.n, cfg.d, rng)
    elif cfg.model == "walk":
        pts = sample_walk_points(cfg.n, WalkIncrementModel(cfg.walk_kind, cfg.d), rng)
    else:
        obj = _fixture(cfg.fixture, cfg.n)
        pts = gaussian_projection_points(obj, cfg.d, rng)
        if matrix is not None:
            pts = pts @ np.asarray(matrix, dtype=float).T
        if isinstance(obj, PolyCone):
            return cone_from_generators(pts)
        return convex_hull(pts)
    if matrix is not None:
        pts = pts @ np.asarray(matrix, dtype=float).T
    return convex_hull(pts)


def _face_estimates(cfg: ExperimentConfig, obj, rng) -> list:
    """Per-face estimates for the statistic family of ``cfg`` on one sampled object.

    Intrinsic volumes come back as the full vector over ``k`` and cone face
    angles as ``(internal, external)`` pairs, so configs differing only in
    ``k`` (or internal/external on cones) can share one evaluation.
    """
    q, s, j = cfg.quantity, cfg.samples_per_angle, cfg.j
    if isinstance(obj, PolyCone):
        if q in ("internal_sum", "external_sum"):
            return [(inner, outer) for face, inner, outer in cone_face_angles(obj, s, rng) if face.dim == j]
        faces = [face for face in cone_faces(obj) if face.dim == j]
        cones = [face_tangent_cone(obj, face) for face in faces]
    else:
        faces = obj.lattice.get(j, [])
        if q == "external_sum":
            return [solid_angle_mc(normal_cone(obj, F), s, rng) for F in faces]
        cones = [tangent_cone(obj, F) for F in faces]
    if q == "f_count":
        return [AngleEstimate.exact(1.0) for _ in cones]
    if q == "internal_sum":
        return [solid_angle_mc(T, s, rng) for T in cones]
    if q == "grassmann_sum":
        return [grassmann_angle_mc(T, cfg.k, s, rng) for T in cones]
    return [conic_intrinsic_volumes_mc(T, s, rng) for T in cones]


def _estimate_key(cfg: ExperimentConfig, obj) -> tuple:
    q = cfg.quantity
    if isinstance(obj, PolyCone) and q in ("internal_sum", "external_sum"):
        q = "cone_angles"
    k = cfg.k if q == "grassmann_sum" else None
    return (q, cfg.j, k, cfg.samples_per_angle)


def _pick(cfg: ExperimentConfig, est):
    if isinstance(est, tuple):
        return est[0] if cfg.quantity == "internal_sum" else est[1]
    if isinstance(est, list):
        return est[cfg.k]
    return est


def _sampling_key(cfg: ExperimentConfig) -> tuple:
    return (cfg.model, cfg.n, cfg.d, cfg.fixture, cfg.walk_kind, cfg.trials, cfg.seed)


def _trial(cfgs, t: int, matrix=None) -> list[tuple[float, float, int]]:
    """One trial for a group of configs sharing the sampled object; one result per config."""
    base = cfgs[0]
    try:
        obj = _sample_object(base, stream(base.seed, t, 0), matrix)
    except GPViolation as exc:
        raise GPViolation(f"trial {t}: {exc}", indices=exc.indices, trial=t) from exc
    except DegenerateInput as exc:
        err = DegenerateInput(f"trial {t}: {exc}")
        err.trial = t
        raise err from exc
    cache: dict[tuple, list] = {}
    out = []
    for cfg in cfgs:
        key = _estimate_key(cfg, obj)
        if key not in cache:
            # the same stream a standalone run would use, so batching never changes results
            cache[key] = _face_estimates(cfg, obj, stream(cfg.seed, t, 1))
        terms = [_pick(cfg, e) for e in cache[key]]
        out.append((math.fsum(e.mean for e in terms), math.fsum(e.variance for e in terms),
                    sum(e.discarded for e in terms)))
    return out


def _trial_block(args):
    cfgs, lo, hi, matrix = args
    return [_trial(cfgs, t, matrix) for t in range(lo, hi)]


def _run_trials(cfgs, workers: int = 1, matrix=None) -> list[list[tuple[float, float, int]]]:
    """Per-config lists of per-trial ``(value, angle variance, discarded)``, in trial order."""
    trials = cfgs[0].trials
    if workers <= 1 or trials < 2 * workers:
        rows = _trial_block((cfgs, 0, trials, matrix))
    else:
        bounds = np.linspace(0, trials, 4 * workers + 1).astype(int)
        jobs = [(cfgs, int(a), int(b), matrix) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [r for block in pool.map(_trial_block, jobs) for r in block]
    return [[row[i] for row in rows] for i in range(len(cfgs))]


def _mean_and_stderr(values) -> tuple[float, float, float]:
    N = len(values)
    mean = math.fsum(values) / N
    if N < 2:
        return mean, 0.0, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (N - 1)
    return mean, math.sqrt(var / N), var


def _row(cfg: ExperimentConfig, results, th: theory.TheoryValue, **extra) -> ComparisonRow:
    values = [r[0] for r in results]
    mean, stderr, var = _mean_and_stderr(values)
    angle_var = math.fsum(r[1] for r in results) / len(results)
    return ComparisonRow(cfg, th, mean, stderr, _z(mean - th.approx, stderr, th.abs_error_bound),
                         sum(r[2] for r in results), var, angle_var, dict(extra))


def run_experiments(cfgs, workers: int = 1) -> list[ComparisonRow]:
    """Run several configs; those sharing model, sizes, trials and seed reuse each sampled object.

    Every row is bit-identical to what :func:`run_experiment` gives for that config alone.
    """
    cfgs = list(cfgs)
    theories = [theory_value(cfg) for cfg in cfgs]
    groups: dict[tuple, list[int]] = {}
    for i, cfg in enumerate(cfgs):
        groups.setdefault(_sampling_key(cfg), []).append(i)
    rows: list[ComparisonRow | None] = [None] * len(cfgs)
    for idx in groups.values():
        start = time.perf_counter()
        results = _run_trials([cfgs[i] for i in idx], workers)
        elapsed = time.perf_counter() - start
        for i, res in zip(idx, results):
            rows[i] = _row(cfgs[i], res, theories[i], seconds=elapsed)
    return rows


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> ComparisonRow:
    """Simulate ``cfg.trials`` random objects and compare the mean statistic with theory."""
    return run_experiments([cfg], workers)[0]


# -- affine invariance ------------------------------------------------------

@dataclass(frozen=True)
class AffineInvarianceResult:
    """Rows for ``P`` and ``A P`` from the same draws, with the paired z-score of their difference."""

    base: ComparisonRow
    transformed: ComparisonRow
    difference: float
    stderr: float
    z_score: float

    def passed(self, threshold: float = 3.0) -> bool:
        return abs(self.z_score) < threshold


def run_affine_invariance(cfg: ExperimentConfig, A, workers: int = 1) -> AffineInvarianceResult:
    """Run ``cfg`` on ``P`` and on ``A P``; both runs use identical random streams.

    The difference is tested trial by trial (paired), so ``A = I`` gives
    identical rows and a z-score of exactly 0.
    """
    A = np.asarray(A, dtype=float)
    if A.shape != (cfg.d, cfg.d):
        raise ValueError(f"A must be {cfg.d} x {cfg.d}")
    if abs(np.linalg.det(A)) <= 1e-12:
        raise ValueError("A must be invertible")
    th = theory_value(cfg)
    base = _run_trials([cfg], workers)[0]
    moved = _run_trials([cfg], workers, A)[0]
    diffs = [b[0] - m[0] for b, m in zip(base, moved)]
    mean, stderr, _ = _mean_and_stderr(diffs)
    return AffineInvarianceResult(_row(cfg, base, th), _row(cfg, moved, th, matrix=A.tolist()),
                                  mean, stderr, _z(mean, stderr))


# -- projection theorem on a deterministic fixture --------------------------

@lru_cache(maxsize=64)
def _projected_face_counts(name: str, param: int, k: int, trials: int, seed: int) -> tuple:
    P = _fixture(name, param)
    d = P.dim_ambient
    counts = []
    for t in range(trials):
        if k == d:
            counts.append(f_vector(P))
            continue
        B = random_subspace(d, k, stream(seed, t, 0)).basis.T
        counts.append(f_vector(project(P, B)))
    return tuple(counts)


def run_projection_theorem(cfg: ExperimentConfig, k: int) -> ComparisonRow:
    """Compare ``sum_F gamma_k(T_F P)`` over ``j``-faces with ``f_j(P) - E f_j(Pi_k P)``.

    ``cfg.fixture``/``cfg.n`` name a full-dimensional polytope fixture; ``cfg.trials``
    random ``k``-subspaces give the right side and ``cfg.samples_per_angle``
    Grassmann draws per face give the left side.  The row reports
    ``left - right`` against a theory value of 0.
    """
    if cfg.fixture is None:
        raise ValueError("run_projection_theorem needs a fixture")
    P = _fixture(cfg.fixture, cfg.n)
    if not isinstance(P, Polytope):
        raise ValueError("the fixture must be a polytope")
    d, j = P.dim_ambient, cfg.j
    if not 0 <= j < k <= d:
        raise ValueError(f"need 0 <= j < k <= {d}")
    faces = P.lattice[j]
    left_terms = [grassmann_angle_mc(tangent_cone(P, F), k, cfg.samples_per_angle, stream(cfg.seed, 1, i))
                  for i, F in enumerate(faces)]
    left = math.fsum(e.mean for e in left_terms)
    left_var = math.fsum(e.variance for e in left_terms)
    counts = _projected_face_counts(cfg.fixture, cfg.n, k, cfg.trials, cfg.seed)
    survivors = [c[j] for c in counts]
    mean_fj, right_se, _ = _mean_and_stderr(survivors)
    right = len(faces) - mean_fj
    stderr = math.sqrt(left_var + right_se**2)
    zero = theory.TheoryValue.from_exact(0)
    return ComparisonRow(cfg, zero, left - right, stderr, _z(left - right, stderr),
                         sum(e.discarded for e in left_terms), 0.0, left_var,
                         {"k": k, "left": left, "left_stderr": math.sqrt(left_var),
                          "right": right, "right_stderr": right_se, "f_j": len(faces)})


# -- tables -----------------------------------------------------------------

def emit_tables(quantity: str, model: str, ns, ds, js, ks=(None,), fixture_name: str | None = None,
                tol: float = DEFAULT_TOL) -> list[dict]:
    """Theory-only rows over a grid; index combinations outside the valid range are skipped."""
    rows = []
    for n, d, j, k in itertools.product(ns, ds, js, ks):
        try:
            cfg = ExperimentConfig(model, n, d, j, quantity, k=k, tol=tol, fixture=fixture_name)
        except ValueError:
            continue
        tv = theory_value(cfg)
        rows.append({"quantity": quantity, "model": model if fixture_name is None else f"{model}:{fixture_name}",
                     "n": n, "d": d, "j": j, "k": "" if k is None else k,
                     "theory_exact": tv.exact_str(), "theory_approx": repr(tv.approx),
                     "abs_error_bound": repr(tv.abs_error_bound)})
    return rows


def format_table(rows: list[dict], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(rows, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def format_rows(rows: list[ComparisonRow], fmt: str = "csv") -> str:
    """Comparison rows in the fixed CSV schema (or a JSON list of the same records)."""
    records = [r.csv_row() for r in rows]
    if fmt == "json":
        return json.dumps(records, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)
    return buf.getvalue()


# -- identity suites --------------------------------------------------------

@dataclass
class IdentityReport:
    checks: list[tuple[str, bool, str]] = field(default_factory=list)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, bool(ok), detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip() for name, ok, detail in self.checks]


def verify_identities(perturbation: float = 0.0, euler_hulls: int = 50, seed: int = 0,
                      crofton_samples: int = 20000, tol: float = DEFAULT_TOL) -> IdentityReport:
    """Exact, quadrature and Monte Carlo self-checks; ``perturbation`` is added to every internal simplex sum."""
    rep = IdentityReport()
    bad = [(n, k) for n in range(1, 31) for k in range(1, n + 1) if not stirling_identity_check(n, k)]
    rep.add("stirling convolutions n<=30", not bad, f"failures={bad[:5]}")
    rep.add("stirling generating functions", stirling_gf_check())

    worst = max(simplex_angle_identity_check(n, k, tol, perturbation)
                for n in range(1, 11) for k in range(1, n + 1))
    rep.add("simplex angle identities n<=10", worst < 1e-8, f"max residual={worst:.2e}")
    anchors = [internal_angle_sum(2, 1, tol).value - 1, internal_angle_sum(3, 1, tol).value - 0.5,
               internal_angle_sum(3, 2, tol).value - 1.5]
    anchors += [internal_angle_sum(n, n, tol).value - 1 for n in range(1, 11)]
    anchors += [external_angle_sum(n, 1, tol).value - 1 for n in range(1, 11)]
    anchors += [external_angle_sum(n, n - 1, tol).value - n / 2 for n in range(2, 11)]
    worst = max(abs(a) for a in anchors)
    rep.add("trivial angle anchors", worst < 1e-8, f"max deviation={worst:.2e}")

    eulers = []
    for t in range(euler_hulls):
        rng = stream(seed, 7, t)
        d = 2 + t % 3
        eulers.append(euler_check(convex_hull(rng.standard_normal((d + 3 + t % 7, d)))))
    rep.add(f"Euler relation on {euler_hulls} random hulls", all(e == 1 for e in eulers))

    walk = [theory.gram_euler_residual("walk", n, d) for d in range(1, 5) for n in range(d, 9)]
    rep.add("Gram-Euler (walk, exact)", all(r == 0 for r in walk))
    gauss = max(abs(theory.gram_euler_residual("gaussian", n, d, tol))
                for d in range(1, 5) for n in range(d + 1, 9))
    rep.add("Gram-Euler (gaussian)", gauss < 1e-8, f"max residual={gauss:.2e}")

    cube = _fixture("cube", 3)
    cones = {"orthant(3)": orthant(3), "orthant(4)": orthant(4),
             "cube vertex cone": tangent_cone(cube, cube.lattice[0][0])}
    for i, (name, C) in enumerate(cones.items()):
        d = C.dim_ambient
        for k in range(d):
            r = crofton_consistency(C, k, crofton_samples, stream(seed, 11, i, k))
            ok = r.residual <= 3 * r.stderr + 1e-12 and r.relation_residual <= 3 * r.relation_stderr + 1e-12
            rep.add(f"Crofton {name} k={k}", ok,
                    f"residual={r.residual:.2e} stderr={r.stderr:.2e}")
        ups = conic_intrinsic_volumes_mc(C, crofton_samples, stream(seed, 12, i))
        total = math.fsum(u.mean for u in ups)
        se = math.sqrt(math.fsum(u.variance for u in ups))
        rep.add(f"intrinsic volumes of {name} sum to 1", abs(total - 1) <= 3 * se + 1e-12,
                f"sum={total:.4f} stderr={se:.1e}")
    return rep


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def row_to_dict(row: ComparisonRow) -> dict:
    """Full record of a comparison row (config, theory and variance components)."""
    out = row.csv_row()
    out["config"] = asdict(row.config)
    out["trial_variance"] = row.trial_variance
    out["angle_variance"] = row.angle_variance
    out["abs_error_bound"] = row.theory.abs_error_bound
    out.update({k: _jsonable(v) for k, v in row.extra.items()})
    return out
