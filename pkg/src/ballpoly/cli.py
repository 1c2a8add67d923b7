"""Command-line harness: run one configured experiment.

    ballpoly <config.yaml> [--seed S] [--workers W] [--out DIR] [--kind K]

Exit codes: 0 success, 2 configuration error, 3 experiment failure.
Progress goes to stderr; metrics and curve files to the output
directory (CSV curves plus a YAML summary that reloads as a config).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import (
    RunConfig, build_body, build_density, build_spherical_function, load_config,
)
from .errors import BallPolyError, ParseError, SchemaError
from .results import CurveTable, make_record, now_iso, write_results


def _log(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Kind runners: each returns (metrics, curves, failed_trials).


def _survival_curve_table(name, test_curve, extremal_curve):
    rows = [
        (float(s), float(pt), float(pe), float(test_curve.band), float(extremal_curve.band))
        for s, pt, pe in zip(test_curve.s, test_curve.p, extremal_curve.p)
    ]
    return CurveTable(name, ["s", "p_test", "p_extremal", "band_test", "band_extremal"], rows)


def _run_dominance(cfg: RunConfig, cube: bool):
    from . import dominance as dm

    p = cfg.params
    density = build_density(p["density"], p["n"])
    exp = dm.ExperimentConfig(
        n=p["n"], N=p["N"], R=p["R"], j=p["j"], density=density,
        trials=p["trials"], seed=cfg.seed,
        s_grid=np.asarray(p["s_grid"], float) if "s_grid" in p else None,
        s_points=p.get("s_points", 20), alpha=p.get("alpha", 0.05),
        estimator=p.get("estimator", "exact-2d"),
        fit_samples=p.get("fit_samples", 20_000), workers=cfg.workers,
    )
    rep = dm.check_cube_extremizer(exp) if cube else dm.check_ball_extremizer(exp)
    v = rep.verdict
    metrics = {
        "verdict": v.label,
        "worst_gap": v.gap,
        "gap_tolerance": v.tolerance,
        "violation_s": v.violation_s,
        "alpha": v.alpha,
        "band_test": rep.test_curve.band,
        "band_extremal": rep.extremal_curve.band,
        "extremizer": rep.extremizer,
    }
    curve = _survival_curve_table("survival", rep.test_curve, rep.extremal_curve)
    return metrics, [curve], rep.failed_trials


def _run_moments(cfg: RunConfig):
    from . import dominance as dm

    p = cfg.params
    body = build_body(p["body"])
    rows = []
    all_ok = True
    for pw in p["p_list"]:
        pw = float(pw) if pw != "-inf" else float("-inf")
        rep = dm.moment_compare(
            body, R=p["R"], N=p["N"], j=p["j"], p=pw, trials=p["trials"],
            seed=cfg.seed, estimator=p.get("estimator", "exact-2d"),
            fit_samples=p.get("fit_samples", 20_000),
        )
        ok = rep.lhs <= rep.rhs + 3.0 * rep.combined_stderr
        all_ok &= ok
        rows.append((rep.p, rep.lhs, rep.rhs, rep.lhs_stderr, rep.rhs_stderr,
                     rep.margin, rep.combined_stderr))
    metrics = {
        "all_consistent": bool(all_ok),
        "p_values": [float(r[0]) for r in rows],
        "margins": [float(r[5]) for r in rows],
        "combined_stderrs": [float(r[6]) for r in rows],
    }
    table = CurveTable("moments", ["p", "lhs", "rhs", "lhs_stderr", "rhs_stderr",
                                   "margin", "combined_stderr"], rows)
    return metrics, [table], 0


def _run_wulff_convergence(cfg: RunConfig):
    from . import wulff

    p = cfg.params
    f = build_spherical_function(p["f"], p.get("grid_size", 720))
    rep = wulff.convergence_rate(f, p["R_list"], probe_size=p.get("probe_size", 4096))
    rows = [(float(r), float(d), 0.0) for r, d in zip(rep.radii, rep.residuals)]
    metrics = {"slope": rep.slope, "grid_size": rep.grid_size,
               "probe_size": rep.probe_size,
               "residuals": [float(x) for x in rep.residuals]}
    return metrics, [CurveTable("residuals", ["R", "residual", "stderr"], rows)], 0


def _run_vr_asymptotics(cfg: RunConfig):
    from . import wulff

    p = cfg.params
    f = build_spherical_function(p["f"], p.get("grid_size", 4096))
    rep = wulff.vr_asymptotics(f, p["R_list"])
    rows = [(float(r), float(d), 0.0) for r, d in zip(rep.radii, rep.residuals)]
    metrics = {
        "slope": rep.slope,
        "scaled_residuals": [float(x) for x in rep.scaled],
        "sphere_mean": f.sphere_mean(),
    }
    return metrics, [CurveTable("residuals", ["R", "residual", "stderr"], rows)], 0


def _run_minimize(cfg: RunConfig):
    from . import extremal as ex

    p = cfg.params
    body = build_body(p["body"])
    prob = ex.CircumscriptionProblem(
        body, j=p["j"], N=p["N"],
        estimator=p.get("estimator", "exact-2d"),
        fit_samples=p.get("fit_samples", 20_000),
        final_samples=p.get("final_samples", 400_000),
    )
    res = ex.minimize_mjN(prob, restarts=p.get("restarts", 32), seed=cfg.seed,
                          max_fev=p.get("max_fev", 400))
    metrics = {
        "value": res.value, "stderr": res.stderr,
        "restarts": res.restarts_used, "best_restart": res.best_restart,
        "feasibility_margin": res.feasibility_margin,
    }
    rows = [(i, float(v)) for i, v in enumerate(res.trace)]
    return metrics, [CurveTable("restarts", ["restart", "value"], rows)], 0


def _run_schneider(cfg: RunConfig):
    from . import extremal as ex

    p = cfg.params
    body = build_body(p["body"])
    rep = ex.schneider_check(body, j=p["j"], N=p["N"],
                             restarts=p.get("restarts", 32), seed=cfg.seed,
                             estimator=p.get("estimator", "exact-2d"))
    metrics = {
        "lhs": rep.lhs, "rhs": rep.rhs, "margin": rep.margin,
        "lhs_stderr": rep.lhs_result.stderr, "rhs_source": rep.rhs_source,
        "consistent": bool(rep.margin >= -3.0 * rep.lhs_result.stderr),
    }
    return metrics, [], 0


def _run_simplex_bound(cfg: RunConfig):
    from . import extremal as ex

    p = cfg.params
    body = build_body(p["body"])
    rep = ex.simplex_bound_check(body, restarts=p.get("restarts", 32),
                                 seed=cfg.seed,
                                 estimator=p.get("estimator", "exact-2d"))
    metrics = {
        "simplex_value": rep.simplex_value, "bound": rep.bound,
        "mean_width": rep.mean_width, "margin": rep.margin,
        "stderr": rep.result.stderr, "note": rep.note,
        "consistent": bool(rep.margin >= -3.0 * rep.result.stderr),
    }
    return metrics, [], 0


def _run_gorbovickis(cfg: RunConfig):
    from . import extremal as ex

    p = cfg.params
    pts = np.asarray(p["points"], dtype=float)
    radii = p.get("R_list", [p["R"]] if "R" in p else [])
    rows = []
    for R in radii:
        rep = ex.gorbovickis_deficit(pts, float(R), samples=p.get("samples", 0),
                                     seed=cfg.seed)
        rows.append((float(R), rep.deficit_coefficient, rep.volume_stderr))
    metrics = {
        "deficit_coefficient": rows[-1][1],
        "width_functional": rep.width_functional,
        "volume": rep.volume, "volume_stderr": rep.volume_stderr,
        "normalization_note": rep.note,
        "warning": rep.warning,
    }
    return metrics, [CurveTable("deficits", ["R", "residual", "stderr"], rows)], 0


def _run_hull_bridge(cfg: RunConfig):
    from . import extremal as ex
    from .geometry import DirectionGrid

    p = cfg.params
    da = build_density(p["density_a"], 2)
    db = build_density(p["density_b"], 2)
    rep = ex.hull_dominance_bridge(
        da, db, N=p["N"], trials=p["trials"], R=p["R"], seed=cfg.seed,
        grid=DirectionGrid.uniform_2d(p.get("grid_size", 512)),
    )
    metrics = {
        "direct_mean": rep.direct_mean, "deficit_mean": rep.deficit_mean,
        "direct_stderr": rep.direct_stderr,
        "dominance_margin": rep.dominance_margin,
        "dominance_sigma": rep.dominance_sigma,
        "agreement": rep.agreement, "radius": rep.radius,
    }
    return metrics, [], 0


def _run_selftest(cfg: RunConfig):
    """Quick closed-form checks across all modules; raises on failure."""
    import math

    from . import densities as dn
    from . import exact2d, wulff
    from .geometry import (
        BallPolyhedron, DirectionGrid, SupportBody, project_onto_ballpoly,
    )
    from .intrinsic import exact_disk_intersection_2d, mean_width, omega, unit_ball_intrinsic

    checks = []

    def check(name, ok):
        checks.append((name, bool(ok)))
        _log(f"  {'ok' if ok else 'FAIL'}  {name}")

    lens = BallPolyhedron.from_arrays([[0.5, 0.0], [-0.5, 0.0]], 1.0)
    area, perim = exact_disk_intersection_2d(lens)
    check("lens area", abs(area - (2 * math.pi / 3 - math.sqrt(3) / 2)) < 1e-12)
    check("lens perimeter", abs(perim - 4 * math.pi / 3) < 1e-12)
    proj = project_onto_ballpoly(
        BallPolyhedron.from_arrays([[2.0, 0.0]], 1.0), np.array([0.0, 0.0]))
    check("single-ball projection", np.allclose(proj, [1.0, 0.0], atol=1e-9))
    check("omega_2", abs(omega(2) - math.pi) < 1e-15)
    check("omega_3", abs(omega(3) - 4 * math.pi / 3) < 1e-15)
    check("V_1 of planar unit ball", abs(unit_ball_intrinsic(2, 1) - math.pi) < 1e-12)
    g = DirectionGrid.uniform_2d(2048)
    sq = SupportBody.cube(1.0, 2, g)
    check("square mean width", abs(mean_width(sq) - 4 / math.pi) < 1e-4)
    f = dn.Box1DStep([0.0, 1.0], [1.0]).rearranged()
    check("interval rearrangement", abs(f.radii[0] - 0.5) < 1e-15)
    W = wulff.wulff_shape(wulff.SphericalFunction.from_support_body(sq))
    probe = DirectionGrid.uniform_2d(256).directions
    check("Wulff of a cube support", np.max(np.abs(W.support(probe) - sq.support(probe))) < 1e-9)
    reg = exact2d.region_of(lens)
    check("lens support (exact arcs)",
          abs(exact2d.support_from_region(reg, np.array([[0.0, 1.0]]))[0]
              - math.sqrt(3) / 2) < 1e-12)
    bad = [name for name, ok in checks if not ok]
    if bad:
        raise RuntimeError(f"selftest failures: {', '.join(bad)}")
    return {"checks": len(checks), "failures": 0}, [], 0


_RUNNERS = {
    "dominance-ball": lambda cfg: _run_dominance(cfg, cube=False),
    "dominance-cube": lambda cfg: _run_dominance(cfg, cube=True),
    "moments": _run_moments,
    "wulff-convergence": _run_wulff_convergence,
    "vr-asymptotics": _run_vr_asymptotics,
    "minimize": _run_minimize,
    "schneider": _run_schneider,
    "simplex-bound": _run_simplex_bound,
    "gorbovickis": _run_gorbovickis,
    "hull-bridge": _run_hull_bridge,
    "selftest": _run_selftest,
}


def run(cfg: RunConfig):
    """Dispatch a validated config; returns the ResultRecord."""
    started = now_iso()
    _log(f"running {cfg.kind} (seed={cfg.seed}, workers={cfg.workers})")
    metrics, curves, failed = _RUNNERS[cfg.kind](cfg)
    record = make_record(cfg, started, metrics, curves, failed)
    _log(f"finished {cfg.kind}: " + ", ".join(
        f"{k}={v}" for k, v in list(metrics.items())[:4]))
    return record


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ballpoly",
        description="Run a configured ball-polyhedron experiment.",
    )
    parser.add_argument("config", help="path to the YAML run configuration")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--workers", type=int, help="override the worker count")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--kind", help="override the experiment kind")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out = args.out
        if args.kind is not None:
            from .config import validate

            doc = {"kind": args.kind, "seed": cfg.seed, "params": cfg.params,
                   "workers": cfg.workers, "out": cfg.out}
            cfg = validate(doc)
    except (ParseError, SchemaError, FileNotFoundError) as exc:
        _log(f"configuration error: {exc}")
        return 2

    try:
        record = run(cfg)
        paths = write_results(record, cfg.out)
    except (BallPolyError, RuntimeError, ValueError) as exc:
        _log(f"experiment failed: {exc}")
        return 3
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
