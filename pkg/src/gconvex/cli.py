"""Command-line front end.

Every command writes line-delimited JSON records to stdout: a header, one
record per item, and a summary.  ``--out DIR`` also stores the records and
any CSV export in DIR.

Exit codes: 0 all checks passed, 1 configuration error, 2 solver failure,
3 invariant or tolerance breach.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .barycenter import (
    SimplexSpec,
    hull_sample,
    iterated_barycenter,
    jacobian_F_closed_form,
    jacobian_F_numeric,
    mean_stepsizes,
)
from .config import ConfigError, load_config
from .errors import ChartError, DegenerateSimplexError, GeometryError
from .functions import parse_function
from .lemma import (
    affine_stepsizes,
    bound_certificate,
    convexity_check,
    coverage_sweep,
    lipschitz_probe,
    polar_targets,
)
from .manifold import (
    geodesic_bvp,
    make_metric,
    path_length,
    scaled_metric,
    sphere_embed,
    sphere_project,
)
from .star import (
    StarPoint,
    StarSequence,
    classify_geodesic_boundary,
    compactness_witness,
    discontinuity_witness,
    star_geodesic,
)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BREACH = 0, 1, 2, 3
RANDOMIZED = {"jacobian-check", "convexity", "lipschitz"}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


class Emitter:
    def __init__(self, command, seed, out_dir=None):
        self.lines = []
        self.out_dir = out_dir
        self.emit({"record": "header", "command": command, "seed": seed, "version": __version__})

    def emit(self, record):
        line = json.dumps(_clean(record), sort_keys=True)
        self.lines.append(line)
        print(line)

    def write_csv(self, name, writer):
        if self.out_dir is None:
            return
        with open(os.path.join(self.out_dir, name), "w", newline="") as fh:
            writer(fh)

    def close(self):
        if self.out_dir is not None:
            with open(os.path.join(self.out_dir, "records.jsonl"), "w") as fh:
                fh.write("\n".join(self.lines) + "\n")


def _summary(em, passed, **fields):
    em.emit({"record": "summary", "passed": passed, **fields})
    return EXIT_OK if passed else EXIT_BREACH


def _solver_kw(cfg):
    return {"tol": cfg.bvp_tolerance, "steps": cfg.ode_steps}


def cmd_geodesic(cfg, em):
    m = cfg.metric
    p = cfg.vector("geodesic", "p", np.zeros(cfg.dim))
    q = cfg.vector("geodesic", "q", np.eye(cfg.dim)[0] * 0.5)
    path = geodesic_bvp(m, p, q, **_solver_kw(cfg))
    em.write_csv("path.csv", path.to_csv)
    for t, x in zip(path.params, path.samples):
        em.emit({"record": "sample", "t": t, "x": x})
    oracle = None
    if m.kind == "euclidean":
        ts = path.params[:, None]
        oracle = float(np.abs(path.samples - ((1 - ts) * p + ts * q)).max())
        limit = 1e-10
    elif m.kind == "sphere-chart":
        a, b = sphere_embed(p), sphere_embed(q)
        om = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
        if om > 0:
            ts = path.params[:, None]
            arc = (np.sin((1 - ts) * om) * a + np.sin(ts * om) * b) / math.sin(om)
            oracle = float(np.abs(sphere_project(arc) - path.samples).max())
        else:
            oracle = float(np.abs(path.samples - p).max())
        limit = 1e-6
    passed = oracle is None or oracle <= limit
    return _summary(em, passed, metric=m.tag, length=path_length(m, path),
                    residual=path.residual, oracle_deviation=oracle)


def cmd_barycenter(cfg, em):
    pts = cfg.simplex_points()
    t = cfg.vector("barycenter", "t", mean_stepsizes(cfg.dim)) if cfg.get("barycenter", "t").strip() \
        else mean_stepsizes(cfg.dim)
    h = cfg.getfloat("barycenter", "h")
    x = iterated_barycenter(scaled_metric(cfg.metric, h), pts, t, **_solver_kw(cfg))
    return _summary(em, True, metric=cfg.metric.tag, h=h, points=pts, stepsizes=t, barycenter=x)


def cmd_hull(cfg, em):
    simplex = SimplexSpec(cfg.simplex_points(), cfg.metric)
    h = cfg.getfloat("hull", "h")
    hull = hull_sample(simplex, h, cfg.getint("hull", "resolution"), **_solver_kw(cfg))
    em.write_csv("hull.csv", hull.to_csv)
    for t, x in zip(hull.stepsizes, hull.points):
        em.emit({"record": "node", "stepsizes": t, "x": x})
    contained = None
    if cfg.metric.kind == "euclidean" and len(hull.points):
        # every node is a convex combination of the vertices
        A = np.vstack([simplex.points.T, np.ones(cfg.dim + 1)])
        lam = np.linalg.solve(A, np.vstack([hull.points.T, np.ones(len(hull.points))]))
        contained = bool(lam.min() >= -1e-12)
    return _summary(em, contained is not False, metric=cfg.metric.tag, h=h,
                    nodes=len(hull.points), failed=hull.failed, contained=contained)


def _random_simplex(rng, d):
    while True:
        pts = rng.standard_normal((d + 1, d))
        try:
            jacobian_F_closed_form(pts)
        except DegenerateSimplexError:
            continue
        return pts


def cmd_jacobian_check(cfg, em):
    rng = np.random.default_rng(cfg.seed)
    tol = cfg.getfloat("jacobian", "tolerance")
    n = cfg.getint("jacobian", "n_simplexes")
    dims = [int(v) for v in cfg.get("jacobian", "dims").split(",") if v.strip()]
    kind = cfg.metric.kind
    worst = 0.0
    for d in dims:
        m = make_metric(kind, d, coefficient=cfg.getfloat("metric", "coefficient"))
        for i in range(n):
            simplex = SimplexSpec(_random_simplex(rng, d), m)
            closed = jacobian_F_closed_form(simplex)
            numeric = jacobian_F_numeric(simplex, h=0.0, step=cfg.fd_step)
            dev = float(np.abs(closed.T - numeric).max())
            worst = max(worst, dev)
            em.emit({"record": "simplex", "dim": d, "index": i, "max_deviation": dev,
                     "condition_number": simplex.condition_number})
    planted = np.zeros((3, 2))
    planted[:, 0] = [0.0, 1.0, 2.0]
    try:
        jacobian_F_closed_form(planted)
        degenerate_detected = False
    except DegenerateSimplexError:
        degenerate_detected = True
    return _summary(em, worst < tol and degenerate_detected, max_deviation=worst,
                    tolerance=tol, degenerate_detected=degenerate_detected)


def cmd_lemma(cfg, em):
    simplex = SimplexSpec(cfg.simplex_points(), cfg.metric)
    if not simplex.is_centered(1e-9):
        raise ConfigError("the lemma sweep needs simplex points summing to zero")
    h = cfg.getfloat("lemma", "h")
    grid = (cfg.getint("lemma", "grid_angular"), cfg.getint("lemma", "grid_radial"))
    try:
        report = coverage_sweep(simplex, h, cfg.getfloat("lemma", "eta"), grid,
                                bisect=cfg.getbool("lemma", "bisect"),
                                bisect_iterations=cfg.getint("lemma", "bisect_iterations"),
                                fd_step=cfg.fd_step, bvp_tol=cfg.bvp_tolerance,
                                steps=cfg.ode_steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for rec in report.records():
        em.emit({"record": "target", **rec})
    oracle = None
    if cfg.metric.kind == "euclidean" and report.ok.any():
        oracle = max(float(np.abs(affine_stepsizes(simplex.points, x) - t).max())
                     for x, t in zip(report.targets[report.ok], report.stepsizes[report.ok]))
    passed = report.certified and report.eta_estimate > 0 and (oracle is None or oracle <= 1e-7)
    return _summary(em, passed, metric=cfg.metric.tag, oracle_deviation=oracle,
                    **report.summary())


def cmd_convexity(cfg, em):
    f = parse_function(cfg.get("convexity", "function"))
    report = convexity_check(cfg.metric, f, cfg.getint("convexity", "n_pairs"),
                             cfg.getint("convexity", "n_t"), cfg.seed,
                             radius=cfg.getfloat("convexity", "radius"),
                             tol=cfg.getfloat("convexity", "tolerance"),
                             bvp_tol=cfg.bvp_tolerance, steps=cfg.ode_steps)
    return _summary(em, report.convex, metric=cfg.metric.tag,
                    function=cfg.get("convexity", "function"), **report.summary())


def cmd_bound(cfg, em):
    f = parse_function(cfg.get("bound", "function"))
    simplex = SimplexSpec(cfg.simplex_points(), cfg.metric)
    h = cfg.getfloat("lemma", "h")
    targets = h * polar_targets(cfg.dim, cfg.getfloat("lemma", "eta"),
                                cfg.getint("lemma", "grid_angular"),
                                cfg.getint("lemma", "grid_radial"))
    cert = bound_certificate(cfg.metric, f, simplex, h, targets,
                             bvp_tol=cfg.bvp_tolerance, steps=cfg.ode_steps)
    for y, v, gaps in zip(targets, cert.values, cert.chain_gaps):
        em.emit({"record": "target", "target": y, "value": v, "chain_gaps": gaps})
    return _summary(em, cert.verified, metric=cfg.metric.tag, bound=cert.bound,
                    chain_holds=cert.chain_holds, max_excess=cert.max_excess,
                    max_chain_gap=cert.max_chain_gap)


def cmd_lipschitz(cfg, em):
    f = parse_function(cfg.get("lipschitz", "function"))
    center = cfg.vector("lipschitz", "center", np.zeros(cfg.dim))
    value = lipschitz_probe(cfg.metric, f, center, cfg.getfloat("lipschitz", "radius"),
                            cfg.getint("lipschitz", "n_pairs"), cfg.seed,
                            bvp_tol=cfg.bvp_tolerance, steps=cfg.ode_steps)
    return _summary(em, math.isfinite(value), metric=cfg.metric.tag, lipschitz_estimate=value)


def cmd_star(cfg, em):
    demo = cfg.get("star", "demo")
    tag = cfg.get("star", "tag")
    kind = cfg.get("star", "kind")
    try:
        if demo == "witness":
            rows = discontinuity_witness(kind, tag, range(1, cfg.getint("star", "p_max") + 1))
            if rows is None:
                return _summary(em, True, kind=kind, tag=tag, witness=None)
            for r in rows:
                em.emit({"record": "witness", **r, "f": r["x"], "g": r["branch"] * r["x"]})
            passed = all(r["gap"] == 1 and r["distance"] == Fraction(1, r["p"]) for r in rows)
            return _summary(em, passed, kind=kind, tag=tag, witness=len(rows))
        if demo == "classify":
            x, n = cfg.star_point("point")
            res = classify_geodesic_boundary(tag, StarPoint(x, n))
            return _summary(em, True, tag=tag, point=[x, n], interior=res.interior,
                            epsilon=res.epsilon, witness=res.witness, reading=res.reading)
        if demo == "geodesic":
            a, b = StarPoint(*cfg.star_point("a")), StarPoint(*cfg.star_point("b"))
            gamma = star_geodesic(tag, a, b)
            pt = gamma(Fraction(cfg.get("star", "t")))
            return _summary(em, True, tag=tag, a=a.as_tuple(), b=b.as_tuple(),
                            length=gamma.length, breakpoint=gamma.breakpoint, point=pt.as_tuple())
        if demo == "compactness":
            base, slope, lim, rate = (Fraction(v) for v in cfg.get("star", "sequence").split(","))
            seq = StarSequence(int(base), int(slope), lim, rate)
            res = compactness_witness(tag, seq, cfg.getint("star", "horizon"))
            return _summary(em, res.status != "undecided", tag=tag, status=res.status,
                            limit=None if res.limit is None else res.limit.as_tuple(),
                            separation=res.separation, diagnostics=res.diagnostics,
                            subsequence_length=len(res.subsequence))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown star demo {demo!r}")


COMMANDS = {
    "geodesic": cmd_geodesic,
    "barycenter": cmd_barycenter,
    "hull": cmd_hull,
    "jacobian-check": cmd_jacobian_check,
    "lemma": cmd_lemma,
    "convexity": cmd_convexity,
    "bound": cmd_bound,
    "lipschitz": cmd_lipschitz,
    "star": cmd_star,
}

# named flags -> config keys
FLAGS = {
    "kind": ["metric.kind"],
    "dim": ["metric.dim"],
    "bvp_tolerance": ["solver.bvp_tolerance"],
    "ode_steps": ["solver.ode_steps"],
    "h": ["lemma.h", "hull.h"],
    "eta": ["lemma.eta"],
    "n_pairs": ["convexity.n_pairs", "lipschitz.n_pairs"],
    "n_t": ["convexity.n_t"],
    "function": ["convexity.function", "bound.function", "lipschitz.function"],
    "resolution": ["hull.resolution"],
    "demo": ["star.demo"],
    "star_kind": ["star.kind"],
    "star_tag": ["star.tag"],
}


def build_parser():
    parser = argparse.ArgumentParser(prog="gconvex", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--out", help="directory for records.jsonl and CSV exports")
    parser.add_argument("--seed", type=int, help="required for randomized commands")
    parser.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE")
    parser.add_argument("--grid", help="polar grid as ANGULARxRADIAL, e.g. 16x8")
    parser.add_argument("--bisect", action="store_true", help="bisect on eta in the lemma sweep")
    for name in FLAGS:
        parser.add_argument("--" + name.replace("_", "-"), dest=name)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    for name, keys in FLAGS.items():
        value = getattr(args, name)
        if value is not None:
            overrides += [f"{k}={value}" for k in keys]
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.bisect:
        overrides.append("lemma.bisect=true")
    try:
        if args.grid:
            ang, _, rad = args.grid.lower().partition("x")
            overrides += [f"lemma.grid_angular={int(ang)}", f"lemma.grid_radial={int(rad)}"]
        cfg = load_config(args.config, overrides)
        if args.command in RANDOMIZED and cfg.seed is None:
            raise ConfigError(f"{args.command} is randomized and needs --seed")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    em = Emitter(args.command, cfg.seed, args.out)
    try:
        code = COMMANDS[args.command](cfg, em)
    except (ConfigError, ChartError, DegenerateSimplexError) as exc:
        # bad input points are configuration problems, not solver failures
        print(f"config error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except GeometryError as exc:
        em.emit({"record": "error", "type": type(exc).__name__, "message": str(exc)})
        code = EXIT_SOLVER
    em.close()
    return code


if __name__ == "__main__":
    sys.exit(main())
