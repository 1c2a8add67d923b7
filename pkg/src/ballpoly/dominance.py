"""Monte-Carlo dominance experiments for random ball-polyhedra.

Centers X_1..X_N are drawn from a density, balls of radius R are
intersected, and the intrinsic volume V_j of the intersection is a
random variable whose survival curve s -> P(V_j > s) is compared
against the curve of an extremizing density (uniform on a volume-one
ball for sup-bounded densities, uniform on the unit cube for product
densities). Dominance is tested pointwise on an s-grid with
simultaneous distribution-free confidence bands, which makes the
comparison conservative: a VIOLATION requires the empirical gap to
exceed both bands.

Determinism: trial t of a run draws from the substream keyed
(seed, t, i) for center i, so results are bit-identical for any worker
count or batching.
"""

from __future__ import annotations

import math
import multiprocessing as mp
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from . import exact2d
from .densities import Density, UniformBody, ball_extremizer, cube_extremizer, Product1D
from .errors import NonIntegrable, UnsupportedDimension
from .geometry import BallPolyhedron, reflect
from .intrinsic import EpsilonGrid, fit_intrinsic_volumes
from .rng import stream, uniform_on_sphere
from .wulff import SphericalFunction, build_A, volume_radius

# Experiments abort when more than this fraction of trials fail
# (silently dropping more would bias the tails).
MAX_FAILED_FRACTION = 1e-3


def dkw_band(m: int, alpha: float) -> float:
    """Half-width of the simultaneous empirical-CDF band:
    sqrt(log(2/alpha) / (2m))."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * m))


@dataclass
class ExperimentConfig:
    """Parameters of a random ball-polyhedron dominance run."""

    n: int
    N: int
    R: Union[float, Sequence[float]]
    j: int
    density: Union[Density, List[Density]]
    trials: int
    seed: int
    s_grid: Optional[np.ndarray] = None
    s_points: int = 20
    alpha: float = 0.05
    estimator: str = "exact-2d"  # 'exact-2d' | 'steiner-fit'
    fit_samples: int = 20_000
    workers: int = 1

    def __post_init__(self):
        if not 1 <= self.j <= self.n:
            raise ValueError(f"need 1 <= j <= n, got j={self.j}, n={self.n}")
        if self.trials < 100:
            raise ValueError("need at least 100 trials")
        if self.estimator == "exact-2d" and self.n != 2:
            raise UnsupportedDimension("exact-2d estimation needs n = 2")
        if self.s_grid is not None:
            self.s_grid = np.asarray(self.s_grid, dtype=float)
            if self.s_grid.size == 0 or np.any(np.diff(self.s_grid) <= 0):
                raise ValueError("s_grid must be nonempty ascending")

    @property
    def radii(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.R, dtype=float), (self.N,)).copy()

    def densities(self) -> List[Density]:
        ds = self.density if isinstance(self.density, list) else [self.density] * self.N
        if len(ds) != self.N:
            raise ValueError("need one density per ball")
        for d in ds:
            if d.dimension != self.n:
                raise ValueError("density dimension mismatch")
        return ds


@dataclass
class TrialBatch:
    """V_j samples of one run; failed trials are dropped and counted."""

    values: np.ndarray
    failed: int
    j: int


def _trial_value(cfg: ExperimentConfig, densities, radii, t: int) -> float:
    centers = np.vstack([
        densities[i].sample(stream(cfg.seed, t, i), 1)[0] for i in range(cfg.N)
    ])
    if cfg.estimator == "exact-2d":
        region = exact2d.disk_region(centers, radii)
        if region.empty:
            return 0.0
        return region.area if cfg.j == 2 else region.perimeter / 2.0
    P = BallPolyhedron.from_arrays(centers, radii)
    grid = EpsilonGrid.default_for(P, samples=cfg.fit_samples)
    V = fit_intrinsic_volumes(P, grid, seed=(cfg.seed, t, 10_000))
    return float(V.values[cfg.j])


_FORK_STATE: dict = {}


def _chunk_worker(bounds) -> tuple:
    lo, hi = bounds
    cfg = _FORK_STATE["cfg"]
    densities = _FORK_STATE["densities"]
    radii = cfg.radii
    vals = np.empty(hi - lo)
    failed = []
    for t in range(lo, hi):
        try:
            vals[t - lo] = _trial_value(cfg, densities, radii, t)
        except Exception:
            vals[t - lo] = np.nan
            failed.append(t)
    return vals, failed


def run_trials(cfg: ExperimentConfig, density=None) -> TrialBatch:
    """Evaluate V_j over cfg.trials independent ball-polyhedra.

    ``density`` overrides cfg.density (used to run the extremizer with
    the same trial seeds). Empty intersections score 0; estimator
    failures mark the trial FAILED, and the run aborts if failures
    exceed 0.1% of the trials.
    """
    local = ExperimentConfig(**{**cfg.__dict__, "density": density}) if density is not None else cfg
    densities = local.densities()
    m = local.trials
    workers = max(1, int(local.workers))
    if workers == 1:
        _FORK_STATE.update(cfg=local, densities=densities)
        vals, failed = _chunk_worker((0, m))
    else:
        # Fork inherits the state without pickling density oracles.
        _FORK_STATE.update(cfg=local, densities=densities)
        chunk = max(256, m // (workers * 8))
        bounds = [(lo, min(lo + chunk, m)) for lo in range(0, m, chunk)]
        ctx = mp.get_context("fork")
        with ctx.Pool(workers) as pool:
            parts = pool.map(_chunk_worker, bounds)
        vals = np.concatenate([p[0] for p in parts])
        failed = [t for p in parts for t in p[1]]
    n_failed = len(failed)
    if n_failed > MAX_FAILED_FRACTION * m:
        raise RuntimeError(
            f"{n_failed} of {m} trials failed (> {MAX_FAILED_FRACTION:.1%}); aborting"
        )
    return TrialBatch(vals[~np.isnan(vals)], n_failed, local.j)


# ---------------------------------------------------------------------------
# Survival curves and verdicts


@dataclass
class SurvivalCurve:
    """Empirical tail probabilities with a simultaneous band."""

    s: np.ndarray
    p: np.ndarray
    trials: int
    alpha: float
    band: float

    @classmethod
    def from_samples(cls, samples: np.ndarray, s_grid: np.ndarray,
                     alpha: float = 0.05) -> "SurvivalCurve":
        v = np.sort(np.asarray(samples, dtype=float))
        m = v.size
        p = 1.0 - np.searchsorted(v, s_grid, side="right") / m
        return cls(np.asarray(s_grid, dtype=float), p, m, alpha, dkw_band(m, alpha))


@dataclass
class DominanceVerdict:
    consistent: bool
    violation_s: Optional[float]
    gap: float              # worst (test - extremal) gap over the grid
    tolerance: float        # sum of the two bands
    alpha: float

    @property
    def label(self) -> str:
        return "CONSISTENT" if self.consistent else "VIOLATION"


def compare_curves(test: SurvivalCurve, extremal: SurvivalCurve) -> DominanceVerdict:
    """Pointwise comparison: dominance predicts test <= extremal, so a
    violation needs test - extremal to exceed both bands somewhere."""
    if test.s.shape != extremal.s.shape or np.any(test.s != extremal.s):
        raise ValueError("curves must share the s-grid")
    gaps = test.p - extremal.p
    tol = test.band + extremal.band
    worst = int(np.argmax(gaps))
    if gaps[worst] > tol:
        return DominanceVerdict(False, float(test.s[worst]), float(gaps[worst]),
                                float(tol), test.alpha)
    return DominanceVerdict(True, None, float(gaps[worst]), float(tol), test.alpha)


@dataclass
class DominanceReport:
    verdict: DominanceVerdict
    test_curve: SurvivalCurve
    extremal_curve: SurvivalCurve
    failed_trials: int
    extremizer: str


def _auto_grid(extremal_values: np.ndarray, count: int) -> np.ndarray:
    lo = np.quantile(extremal_values, 0.01)
    hi = np.quantile(extremal_values, 0.99)
    if hi <= lo:
        hi = lo + max(abs(lo), 1.0) * 1e-6
    return np.linspace(lo, hi, count)


def check_ball_extremizer(cfg: ExperimentConfig) -> DominanceReport:
    """Survival-curve comparison against the ball extremizer.

    Densities with sup at most one are compared against the uniform
    density on the volume-one centered ball; larger sup bounds use the
    general normalization a*1_{bB} with a the density's sup."""
    densities = cfg.densities()
    extremizers = []
    for d in densities:
        sup = d.sup_bound
        extremizers.append(ball_extremizer(cfg.n, sup if sup > 1.0 else 1.0))
    test = run_trials(cfg)
    extremal = run_trials(cfg, density=extremizers)
    s = cfg.s_grid if cfg.s_grid is not None else _auto_grid(extremal.values, cfg.s_points)
    tc = SurvivalCurve.from_samples(test.values, s, cfg.alpha)
    ec = SurvivalCurve.from_samples(extremal.values, s, cfg.alpha)
    return DominanceReport(compare_curves(tc, ec), tc, ec,
                           test.failed + extremal.failed, "uniform-ball")


def check_cube_extremizer(cfg: ExperimentConfig, bound: float = 1.0) -> DominanceReport:
    """Survival-curve comparison against the cube extremizer for
    product densities with per-coordinate sup at most ``bound``."""
    densities = cfg.densities()
    extremizers = []
    for d in densities:
        if not isinstance(d, Product1D):
            raise ValueError("cube extremizer requires product densities")
        sups = [f.sup_bound for f in d.factors]
        if max(sups) > bound + 1e-12:
            extremizers.append(cube_extremizer(sups))
        else:
            extremizers.append(cube_extremizer([bound] * cfg.n))
    test = run_trials(cfg)
    extremal = run_trials(cfg, density=extremizers)
    s = cfg.s_grid if cfg.s_grid is not None else _auto_grid(extremal.values, cfg.s_points)
    tc = SurvivalCurve.from_samples(test.values, s, cfg.alpha)
    ec = SurvivalCurve.from_samples(extremal.values, s, cfg.alpha)
    return DominanceReport(compare_curves(tc, ec), tc, ec,
                           test.failed + extremal.failed, "uniform-cube")


# ---------------------------------------------------------------------------
# Moment comparison


@dataclass
class MomentReport:
    p: float
    lhs: float
    rhs: float
    lhs_stderr: float
    rhs_stderr: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lhs_stderr, self.rhs_stderr)


def _p_mean(values: np.ndarray, p: float):
    """(mean of v^p)^(1/p) with a jackknife standard error."""
    m = values.size
    vp = values**p
    s = float(np.sum(vp))
    mean = s / m
    est = mean ** (1.0 / p)
    loo = (s - vp) / (m - 1)
    g = loo ** (1.0 / p)
    se = math.sqrt((m - 1) / m * float(np.sum((g - np.mean(g)) ** 2)))
    return est, se


def moment_compare(K, R: float, N: int, j: int, p: float, trials: int,
                   seed: int = 0, estimator: str = "exact-2d",
                   fit_samples: int = 20_000):
    """p-th moment comparison for centers uniform on the tangent-center
    star body of K versus uniform on its volume-matched ball.

    ``p = -inf`` (any non-finite p) reports the sample minima. Every
    ball in these configurations contains a fixed neighborhood of the
    origin, so negative moments are finite; a sample below 1e-12 with
    p < 0 raises NonIntegrable since it signals a geometry bug.
    """
    f = SphericalFunction.from_support_body(K)
    if f.min <= 0:
        raise ValueError("the body must contain the origin in its interior")
    A = build_A(f, R)
    r = volume_radius(A)
    from .densities import BallRegion

    dens_a = UniformBody(A)
    dens_b = UniformBody(BallRegion(np.zeros(K.dimension), r))
    cfg = ExperimentConfig(
        n=K.dimension, N=N, R=R, j=j, density=dens_a, trials=trials,
        seed=seed, estimator=estimator, fit_samples=fit_samples,
    )
    lhs_vals = run_trials(cfg).values
    rhs_vals = run_trials(cfg, density=[dens_b] * N).values
    if not math.isfinite(p):
        return MomentReport(p, float(np.min(lhs_vals)), float(np.min(rhs_vals)), 0.0, 0.0)
    if p < 0 and (np.any(lhs_vals < 1e-12) or np.any(rhs_vals < 1e-12)):
        raise NonIntegrable(
            "a trial produced V_j below 1e-12 with p < 0; the tangent-center "
            "construction guarantees a ball around the origin, so this is a bug"
        )
    lhs, se_l = _p_mean(lhs_vals, p)
    rhs, se_r = _p_mean(rhs_vals, p)
    return MomentReport(p, lhs, rhs, se_l, se_r)


# ---------------------------------------------------------------------------
# Structural property checks


@dataclass
class QuasiConcavityReport:
    midpoint_margin: float      # min over trials of V(mid) - min(V(u), V(v))
    evenness_deviation: float   # max |V(y + tz) - V(y - tz)|
    trials: int
    violations: int


def quasiconcavity_test(N: int, n: int, radii, trials: int, seed: int = 0,
                        tol: float = 1e-9) -> QuasiConcavityReport:
    """Check midpoint quasi-concavity and reflection evenness of the
    map (centers) -> V_n(intersection), with exact planar evaluation.

    Center tuples are drawn inside a ball sized so intersections are
    typically nonempty; tuples with an empty side are resampled (the
    claim concerns the support of the map)."""
    if n != 2:
        raise UnsupportedDimension("structural checks use the planar oracle")
    radii = np.broadcast_to(np.asarray(radii, dtype=float), (N,)).copy()
    spread = 0.6 * float(np.min(radii))
    rng = stream(seed)

    def vol(centers) -> float:
        reg = exact2d.disk_region(centers, radii)
        return reg.area

    margin = np.inf
    violations = 0
    done = 0
    while done < trials:
        u = rng.normal(0.0, spread, size=(N, 2))
        v = rng.normal(0.0, spread, size=(N, 2))
        vu, vv = vol(u), vol(v)
        if vu <= 0.0 or vv <= 0.0:
            continue
        vm = vol(0.5 * (u + v))
        m = vm - min(vu, vv)
        margin = min(margin, m)
        if m < -tol:
            violations += 1
        done += 1
    even_dev = 0.0
    for t in range(trials):
        z = uniform_on_sphere(stream(seed, 1, t), 2, 1)[0]
        y = rng.normal(0.0, spread, size=(N, 2))
        y = y - np.outer(y @ z, z)  # project into z-perp
        tt = rng.normal(0.0, spread, size=N)
        plus = vol(y + tt[:, None] * z)
        minus = vol(y - tt[:, None] * z)
        even_dev = max(even_dev, abs(plus - minus))
    return QuasiConcavityReport(float(margin), float(even_dev), trials, violations)


def bll_numeric_check(indicator, densities_1d: List[Density],
                      resolution: int = 0):
    """Rearrangement inequality on the line, by tensor midpoint
    quadrature: integral of F * prod f_i against the same with every
    f_i replaced by its even decreasing rearrangement (the rearranged
    side dominates for even quasi-concave F).

    ``indicator`` maps an (m, N) array of coordinates to values in
    [0, 1]. Returns (lhs, rhs, quadrature_error_estimate)."""
    N = len(densities_1d)
    if N > 3:
        raise ValueError("tensor quadrature supported up to N = 3")
    if resolution == 0:
        resolution = {1: 8192, 2: 1024, 3: 160}[N]
    rearranged = [f.rearranged() for f in densities_1d]

    def supports(fs):
        spans = []
        for f in fs:
            if hasattr(f, "breaks"):
                spans.append((float(f.breaks[0]), float(f.breaks[-1])))
            else:
                spans.append((-float(f.radii[-1]), float(f.radii[-1])))
        return spans

    def integrate(fs, res):
        spans = supports(fs)
        axes = []
        weights = []
        for lo, hi in spans:
            h = (hi - lo) / res
            axes.append(lo + (np.arange(res) + 0.5) * h)
            weights.append(h)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.column_stack([m.ravel() for m in mesh])
        vals = np.asarray(indicator(pts), dtype=float)
        for k, f in enumerate(fs):
            vals = vals * f.pdf(pts[:, k][:, None])
        return float(np.sum(vals) * np.prod(weights))

    lhs = integrate(densities_1d, resolution)
    rhs = integrate(rearranged, resolution)
    lhs_half = integrate(densities_1d, resolution // 2)
    rhs_half = integrate(rearranged, resolution // 2)
    err = 2.0 * max(abs(lhs - lhs_half), abs(rhs - rhs_half)) + 1e-12
    return lhs, rhs, err
