"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The lines are echoed at the end of the session by the ``verdicts`` fixture,
so they show up in plain ``pytest -v`` output without ``-s``.
"""

import io
import math
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction as Fr

import numpy as np
import pytest

from conftest import great_circle
from gconvex.barycenter import SimplexSpec, centered_simplex, jacobian_F_closed_form, jacobian_F_numeric
from gconvex.cli import main
from gconvex.errors import DegenerateSimplexError
from gconvex.functions import neg_sqnorm, quadratic, sqnorm
from gconvex.lemma import (
    affine_stepsizes,
    bound_certificate,
    convexity_check,
    coverage_sweep,
    polar_targets,
)
from gconvex.manifold import (
    bvp_batch,
    conformal_test,
    euclidean,
    sample_ball,
    scaled_geodesic_check,
    sphere_chart,
    sphere_embed,
    sphere_project,
)
from gconvex.star import (
    ORIGIN,
    StarPoint,
    classify_geodesic_boundary,
    discontinuity_witness,
    star_dist,
    star_function,
    star_geodesic,
)

TRIANGLE = [[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]
LINES = []


@pytest.fixture(scope="module", autouse=True)
def verdicts(request):
    yield
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None and LINES:
        reporter.write_line("")
        reporter.write_line("acceptance criteria:")
        for line in LINES:
            reporter.write_line("  " + line)


def verdict(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    LINES.append(line)
    print(line)
    assert ok, line


def test_geodesic_closed_forms():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    flat_dev = 0.0
    for d in (1, 2, 3):
        P, Q = rng.uniform(-2, 2, (2, 20, d))
        xs, _, _, ok = bvp_batch(euclidean(d), P, Q)
        assert ok.all()
        ts = np.linspace(0, 1, xs.shape[1])[None, :, None]
        flat_dev = max(flat_dev, float(np.abs(xs - ((1 - ts) * P[:, None] + ts * Q[:, None])).max()))
    sphere = sphere_chart(2)
    P = sample_ball(rng, 50, 2, math.pi / 4)
    Q = sample_ball(rng, 50, 2, math.pi / 4)
    xs, _, _, ok = bvp_batch(sphere, P, Q)
    oracle = sphere_project(great_circle(sphere_embed(P), sphere_embed(Q), np.linspace(0, 1, xs.shape[1])))
    sphere_dev = float(np.abs(oracle - xs).max()) if ok.all() else math.inf
    elapsed = time.perf_counter() - start
    verdict("geodesic solver vs closed forms", flat_dev <= 1e-10 and sphere_dev <= 1e-6 and elapsed < 10,
            f"euclidean {flat_dev:.2e} (<=1e-10), sphere 50 pairs {sphere_dev:.2e} (<=1e-6), "
            f"{elapsed:.1f}s (<10s)")


def test_scaling_identity():
    rng = np.random.default_rng(2)
    m = conformal_test(2)
    pairs = sample_ball(rng, 20, 2, 0.8).reshape(10, 2, 2)
    worst = max(scaled_geodesic_check(m, p, q, h)["max_deviation"]
                for h in (-1.0, -0.5, 0.25, 0.5, 1.0) for p, q in pairs)
    verdict("scaling identity", worst <= 1e-8, f"max deviation {worst:.2e} (<=1e-8) over 5 h x 10 pairs")


def test_jacobian_formula():
    rng = np.random.default_rng(3)
    worst = {}
    for d in (1, 2, 3):
        m = conformal_test(d)
        devs = []
        while len(devs) < 20:
            pts = rng.standard_normal((d + 1, d))
            try:
                s = SimplexSpec(pts, m)
            except DegenerateSimplexError:
                continue
            devs.append(float(np.abs(jacobian_F_closed_form(s).T - jacobian_F_numeric(s, h=0.0)).max()))
        worst[d] = max(devs)
    try:
        jacobian_F_closed_form(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
        singular = False
    except DegenerateSimplexError:
        singular = True
    ok = max(worst.values()) < 1e-6 and singular
    verdict("Jacobian formula", ok,
            "max deviation " + ", ".join(f"d={d} {v:.2e}" for d, v in worst.items())
            + f" (<1e-6); planted degenerate simplex flagged: {singular}")


def test_main_lemma_coverage():
    start = time.perf_counter()
    conformal = centered_simplex(TRIANGLE, conformal_test(2))
    rep = coverage_sweep(conformal, 0.25, 1.0, grid=(16, 8), bisect=True)
    flat = centered_simplex(TRIANGLE, euclidean(2))
    ctl = coverage_sweep(flat, 0.25, 0.3, grid=(16, 8))
    oracle = np.array([affine_stepsizes(flat.points, x) for x in ctl.targets])
    oracle_dev = float(np.abs(oracle - ctl.stepsizes).max())
    elapsed = time.perf_counter() - start
    ok = (rep.certified and rep.eta_estimate > 0 and rep.success_fraction == 1.0
          and rep.max_residual <= 1e-9 and ctl.certified and oracle_dev <= 1e-7 and elapsed < 60)
    verdict("ball coverage by the iterated simplex", ok,
            f"conformal h=0.25 certified eta={rep.eta_estimate:.4f} on 16x8, "
            f"max residual {rep.max_residual:.2e} (<=1e-9); euclidean oracle {oracle_dev:.2e} (<=1e-7); "
            f"{elapsed:.1f}s (<60s)")


def test_bound_certificate():
    m = conformal_test(2)
    simplex = centered_simplex(TRIANGLE, m)
    h = 0.25
    targets = h * polar_targets(2, 0.2, 16, 8)
    rng = np.random.default_rng(4)
    functions = [("|x|^2", sqnorm)]
    while len(functions) < 6:
        a = rng.uniform(0.5, 2.0)
        b = rng.uniform(-0.1, 0.1, 2) * a
        f = quadratic(a, b)
        if convexity_check(m, f, 200, 20, seed=int(rng.integers(1 << 30)), radius=0.5).convex:
            functions.append((f"{a:.2f}|x|^2+<{b[0]:.2f},{b[1]:.2f}>", f))
    failures, worst_excess, worst_gap = [], -math.inf, -math.inf
    for name, f in functions:
        cert = bound_certificate(m, f, simplex, h, targets)
        worst_excess = max(worst_excess, cert.max_excess)
        worst_gap = max(worst_gap, cert.max_chain_gap)
        if not (cert.verified and cert.chain_holds):
            failures.append(name)
    verdict("upper-bound certificate", not failures,
            f"{len(functions)} g-convex functions on {len(targets)} targets; "
            f"max f - bound {worst_excess:.2e}, max chain gap {worst_gap:.2e} (<=1e-9)"
            + (f"; failed: {failures}" if failures else ""))


def test_convexity_discrimination():
    good = convexity_check(euclidean(2), sqnorm, 500, 20, seed=5)
    bad = convexity_check(euclidean(2), neg_sqnorm, 500, 20, seed=5)
    ok = good.worst_violation <= 1e-9 and bad.worst_violation > 0 and bad.witness is not None
    verdict("convexity checker discrimination", ok,
            f"|x|^2 worst {good.worst_violation:.2e} (<=1e-9); "
            f"-|x|^2 worst {bad.worst_violation:.3f} at t={bad.witness['t']:.2f}")


def _rational_point(rnd):
    return StarPoint(Fr(rnd.randint(0, 60), 60), rnd.randint(1, 8))


def test_star_space_exact():
    start = time.perf_counter()
    rnd = random.Random(6)
    axioms = 0
    for _ in range(1000):
        a, b, c = (_rational_point(rnd) for _ in range(3))
        for tag in ("d1", "d2"):
            d = lambda u, v: star_dist(tag, u, v)  # noqa: E731
            axioms += (d(a, b) == d(b, a) and (d(a, b) == 0) == (a == b) and d(a, c) <= d(a, b) + d(b, c))
    ident = convex = total = 0
    grid = [Fr(k, 12) for k in range(13)]
    for _ in range(60):
        a, b = _rational_point(rnd), _rational_point(rnd)
        for tag in ("d1", "d2"):
            g = star_geodesic(tag, a, b)
            pts = {s: g(s) for s in (Fr(k, 24) for k in range(25))}
            vals = {s: (star_function("f", p), star_function("g", p)) for s, p in pts.items()}
            for s in grid:
                for t in grid:
                    total += 1
                    ident += star_dist(tag, pts[s], pts[t]) == abs(s - t) * g.length
                    mid = vals[(s + t) / 2]
                    convex += all(mid[k] <= (vals[s][k] + vals[t][k]) / 2 for k in (0, 1))
    indices = sorted(set(range(1, 10 ** 4 + 1)) | set(random.Random(7).sample(range(1, 10 ** 6 + 1), 2000))
                     | {10 ** k for k in range(7)})
    witnesses_ok = all(
        all(r["distance"] == Fr(1, r["p"]) and r["gap"] == 1 for r in discontinuity_witness(kind, tag, indices))
        for kind, tag in (("f", "d1"), ("g", "d2")))
    origin = (not classify_geodesic_boundary("d1", ORIGIN).interior
              and classify_geodesic_boundary("d2", ORIGIN).interior)
    elapsed = time.perf_counter() - start
    ok = axioms == 2000 and ident == total and convex == total and witnesses_ok and origin and elapsed < 5
    verdict("star space, exact", ok,
            f"axioms {axioms}/2000, geodesic identity {ident}/{total}, convexity {convex}/{total}, "
            f"witnesses 1/p with gap 1 on {len(indices)} indices up to 10^6: {witnesses_ok}, "
            f"origin boundary under d1 / interior under d2: {origin}; {elapsed:.1f}s (<5s)")


RUNS = [
    ["geodesic", "--kind", "sphere-chart", "--set", "geodesic.p=0.3 -0.1", "--set", "geodesic.q=-0.2 0.25"],
    ["barycenter"],
    ["hull", "--resolution", "3"],
    ["jacobian-check", "--seed", "8", "--set", "jacobian.n_simplexes=3"],
    ["lemma", "--grid", "8x4"],
    ["convexity", "--seed", "8", "--n-pairs", "50"],
    ["bound", "--grid", "8x2"],
    ["lipschitz", "--seed", "8", "--n-pairs", "50"],
    ["star"],
    ["star", "--demo", "compactness", "--star-tag", "d2", "--set", "star.sequence=0,1,1/2,0"],
]


def _capture(argv):
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def test_cli_determinism():
    differing = []
    for argv in RUNS:
        first, second = _capture(argv), _capture(argv)
        if first != second or not first[1]:
            differing.append(argv[0])
    verdict("CLI determinism", not differing,
            f"{len(RUNS)} runs across all 9 commands byte-identical on rerun"
            + (f"; differing: {differing}" if differing else ""))
