"""Numerical covering of a ball by an iterated simplex, and what follows from it.

The stepsize map ``F(.; h)`` is inverted by Newton's method; a ball is
certified when every node of a polar target grid inverts to stepsizes in
``(0, 1)^d``.  The upper-bound certificate, the convexity checker and the
Lipschitz probe are sampling tools built on the same solvers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .barycenter import (
    SimplexSpec,
    barycenter_stages,
    bary_map_batch,
    fd_jacobian_batch,
    mean_stepsizes,
)
from .errors import CannotCertifyError, DegenerateConfigurationError, InversionFailure
from .manifold import (
    BVP_TOLERANCE,
    FD_STEP,
    ODE_STEPS,
    MetricField,
    bvp_batch,
    sample_ball,
    speeds,
)

INVERSION_TOLERANCE = 1e-9
MAX_INVERSION_STEPS = 50
CLIP = 1e-6
CONVEXITY_TOLERANCE = 1e-9
SINGULAR_CONDITION = 1e12
MAX_HALVINGS = 10
RETRYABLE = ("outside-box", "stalled", "max-iterations")


@dataclass
class InversionResult:
    stepsizes: np.ndarray
    residual: np.ndarray
    ok: np.ndarray
    reason: list


def invert_batch(simplex: SimplexSpec, h: float, X, t0=None, *,
                 tol: float = INVERSION_TOLERANCE, max_iter: int = MAX_INVERSION_STEPS,
                 fd_step: float = FD_STEP, bvp_tol: float = BVP_TOLERANCE,
                 steps: int = ODE_STEPS, fail_fast: bool = False,
                 max_halvings: int = MAX_HALVINGS, restarts: bool = False) -> InversionResult:
    """Solve ``F(t; h) = x`` for every row of ``X``.

    Damped Newton with a central-difference Jacobian and a halving line search
    on the residual; iterates are clipped to ``[1e-6, 1 - 1e-6]``.  A row whose
    Newton step points out of the box for three consecutive iterations, or
    whose line search fails on the box boundary, is declared outside the box;
    a line-search failure in the interior is reported as stalled.
    Rows are independent; ``fail_fast`` abandons the whole batch at the first
    failure (remaining rows are reported as ``"aborted"``).  With ``restarts``,
    rows that end outside the box, stalled or out of iterations are retried
    from the starts ``{0.2, 0.5, 0.8}^d``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    B, d = X.shape
    kw = dict(tol=tol, max_iter=max_iter, fd_step=fd_step, bvp_tol=bvp_tol, steps=steps,
              max_halvings=max_halvings)
    if restarts:
        out = invert_batch(simplex, h, X, t0, fail_fast=fail_fast, **kw)
        for start in itertools.product((0.2, 0.5, 0.8), repeat=d):
            retry = np.flatnonzero([r in RETRYABLE for r in out.reason])
            if retry.size == 0:
                break
            again = invert_batch(simplex, h, X[retry], np.array(start), fail_fast=fail_fast, **kw)
            for j, i in enumerate(retry):
                out.reason[i] = again.reason[j]
            out.stepsizes[retry] = again.stepsizes
            out.residual[retry] = again.residual
            out.ok[retry] = again.ok
        return out
    t0 = mean_stepsizes(d) if t0 is None else np.asarray(t0, dtype=float)
    T = np.tile(np.clip(t0, CLIP, 1 - CLIP), (B, 1))
    reason = ["max-iterations"] * B
    done = np.zeros(B, dtype=bool)
    failed = np.zeros(B, dtype=bool)
    pushing = np.zeros(B, dtype=int)

    Fx, okF = bary_map_batch(simplex, T, h, tol=bvp_tol, steps=steps)
    residual = np.where(okF, np.linalg.norm(X - Fx, axis=-1), np.inf)

    def settle(rows, why):
        for i in rows:
            reason[i] = why
        failed[rows] = True

    settle(np.flatnonzero(~okF), "bvp-failure")
    conv = okF & (residual <= tol)
    done[conv] = True
    for i in np.flatnonzero(conv):
        reason[i] = "converged"

    for _ in range(max_iter):
        if fail_fast and failed.any():
            break
        act = np.flatnonzero(~done & ~failed)
        if act.size == 0:
            break
        J, okJ = fd_jacobian_batch(simplex, T[act], h, fd_step, tol=bvp_tol, steps=steps)
        s = np.linalg.svd(np.where(okJ[:, None, None], J, 0.0), compute_uv=False)
        singular = okJ & (s[:, -1] <= s[:, 0] / SINGULAR_CONDITION)
        settle(act[~okJ], "bvp-failure")
        settle(act[singular], "singular-jacobian")
        keep = okJ & ~singular
        act, J = act[keep], J[keep]
        if act.size == 0:
            continue
        delta = np.linalg.solve(J, (X[act] - Fx[act])[..., None])[..., 0]
        full = T[act] + delta
        outward = np.any((full < CLIP) | (full > 1 - CLIP), axis=1)
        pushing[act] = np.where(outward, pushing[act] + 1, 0)

        lam = np.ones(act.size)
        pending = np.arange(act.size)
        for _ in range(max_halvings + 1):
            rows = act[pending]
            trial = np.clip(T[rows] + lam[pending, None] * delta[pending], CLIP, 1 - CLIP)
            Ft, okt = bary_map_batch(simplex, trial, h, tol=bvp_tol, steps=steps)
            rt = np.where(okt, np.linalg.norm(X[rows] - Ft, axis=-1), np.inf)
            better = rt < residual[rows]
            acc = rows[better]
            T[acc], Fx[acc], residual[acc] = trial[better], Ft[better], rt[better]
            pending = pending[~better]
            if pending.size == 0:
                break
            lam[pending] *= 0.5

        stuck = act[pending]
        on_edge = np.any((T[stuck] <= CLIP) | (T[stuck] >= 1 - CLIP), axis=1) | outward[pending]
        settle(stuck[on_edge], "outside-box")
        settle(stuck[~on_edge], "stalled")
        conv = act[residual[act] <= tol]
        done[conv] = True
        for i in conv:
            reason[i] = "converged"
        settle(act[~done[act] & ~failed[act] & (pushing[act] >= 3)], "outside-box")

    if fail_fast and failed.any():
        for i in np.flatnonzero(~done & ~failed):
            reason[i] = "aborted"
    return InversionResult(T, residual, done, reason)


def invert_stepsizes(simplex: SimplexSpec, h: float, x, t0=None, *,
                     tol: float = INVERSION_TOLERANCE, max_iter: int = MAX_INVERSION_STEPS,
                     fd_step: float = FD_STEP, bvp_tol: float = BVP_TOLERANCE,
                     steps: int = ODE_STEPS, restarts: bool = True) -> np.ndarray:
    """Stepsizes ``t`` with ``|F(t; h) - x| <= tol``.

    Newton starts at ``t0`` (the mean stepsizes by default); with
    ``restarts`` a failed solve is retried from a small grid of starts.

    Raises
    ------
    InversionFailure
        Newton did not converge inside ``(0, 1)^d``; ``x`` is probably not
        in the covered neighbourhood.
    DegenerateConfigurationError
        The Jacobian of F became singular.
    """
    x = np.asarray(x, dtype=float)
    if t0 is not None:
        t0 = np.asarray(t0, dtype=float)
        if np.any(t0 <= 0) or np.any(t0 >= 1):
            raise ValueError("initial stepsizes must lie in (0, 1)")
    out = invert_batch(simplex, h, x[None], t0, tol=tol, max_iter=max_iter,
                       fd_step=fd_step, bvp_tol=bvp_tol, steps=steps, restarts=restarts)
    if out.ok[0]:
        return out.stepsizes[0]
    if out.reason[0] == "singular-jacobian":
        raise DegenerateConfigurationError(f"singular Jacobian at t={out.stepsizes[0]}")
    raise InversionFailure(f"could not invert F at x={x} ({out.reason[0]})",
                           float(out.residual[0]), out.stepsizes[0])


def affine_stepsizes(points, x) -> np.ndarray:
    """Exact inverse of F for a flat metric, through barycentric coordinates.

    ``x = sum_j lam_j p_j`` gives ``t_k = lam_k / (lam_1 + ... + lam_k)``.
    """
    pts = np.asarray(points, dtype=float)
    A = np.vstack([pts.T, np.ones(len(pts))])
    lam = np.linalg.solve(A, np.append(np.asarray(x, dtype=float), 1.0))
    return lam[1:] / np.cumsum(lam)[1:]


# ---------------------------------------------------------------------------
# coverage


def _directions(d: int, angular: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        a = 2 * np.pi * np.arange(angular) / angular
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    if d == 3:
        # Fibonacci sphere
        i = np.arange(angular) + 0.5
        z = 1 - 2 * i / angular
        r = np.sqrt(1 - z * z)
        phi = np.pi * (3 - np.sqrt(5)) * i
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    dirs = np.random.default_rng(0).standard_normal((angular, d))
    return dirs / np.linalg.norm(dirs, axis=1, keepdims=True)


def polar_targets(d: int, eta: float, angular: int = 16, radial: int = 8) -> np.ndarray:
    """Nodes ``eta * j / radial * u`` over ``j = 1..radial`` and unit directions ``u``.

    In d = 1 the two directions are fixed; in d = 3 the directions are a
    Fibonacci sphere with ``angular`` points.
    """
    dirs = _directions(d, angular)
    radii = eta * np.arange(1, radial + 1) / radial
    return (radii[:, None, None] * dirs[None]).reshape(-1, d)


@dataclass
class CoverageReport:
    h: float
    eta_estimate: float
    grid_size: int
    success_fraction: float
    max_residual: float
    stepsize_box: list
    certified: bool
    targets: np.ndarray = field(repr=False)
    stepsizes: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    ok: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {
            "h": self.h,
            "eta_estimate": self.eta_estimate,
            "grid_size": self.grid_size,
            "success_fraction": self.success_fraction,
            "max_residual": self.max_residual,
            "stepsize_box": self.stepsize_box,
            "certified": self.certified,
        }

    def records(self):
        for x, t, r, ok in zip(self.targets, self.stepsizes, self.residuals, self.ok):
            yield {"target": x.tolist(), "stepsizes": t.tolist(),
                   "residual": float(r), "ok": bool(ok)}


def _sweep(simplex, h, eta, angular, radial, fail_fast=False, **kw) -> CoverageReport:
    X = polar_targets(simplex.dim, eta, angular, radial)
    inv = invert_batch(simplex, h, X, fail_fast=fail_fast, **kw)
    ok = inv.ok
    good = inv.stepsizes[ok]
    box = ([[float(good[:, k].min()), float(good[:, k].max())] for k in range(good.shape[1])]
           if ok.any() else [])
    succ_res = inv.residual[ok]
    return CoverageReport(
        h=float(h),
        eta_estimate=float(eta),
        grid_size=len(X),
        success_fraction=float(ok.mean()),
        max_residual=float(succ_res.max()) if ok.any() else math.inf,
        stepsize_box=box,
        certified=bool(ok.all()),
        targets=X,
        stepsizes=inv.stepsizes,
        residuals=inv.residual,
        ok=ok,
    )


def coverage_sweep(simplex: SimplexSpec, h: float, eta: float, grid=(16, 8), *,
                   bisect: bool = False, bisect_iterations: int = 8, **kw) -> CoverageReport:
    """Invert F on a polar grid of ``B(0, eta)`` and report whether all of it is covered.

    ``grid`` is ``(angular, radial)``.  With ``bisect=True``, ``eta`` is an
    upper bracket and the report describes the largest certified radius
    found by bisection (``eta_estimate = 0`` when none is).
    """
    if not simplex.is_centered(1e-9):
        raise ValueError("coverage needs a centered simplex (vertices summing to zero)")
    gh_radius = simplex.metric.chart_radius / abs(h) if h else math.inf
    if not eta < gh_radius:
        raise ValueError("eta must be smaller than the chart radius")
    angular, radial = grid
    report = _sweep(simplex, h, eta, angular, radial, fail_fast=bisect, **kw)
    if not bisect or report.certified:
        return report
    lo, hi, best = 0.0, eta, None
    for _ in range(bisect_iterations):
        mid = 0.5 * (lo + hi)
        trial = _sweep(simplex, h, mid, angular, radial, fail_fast=True, **kw)
        if trial.certified:
            lo, best = mid, trial
        else:
            hi = mid
    if best is None:
        report.eta_estimate = 0.0
        return report
    return best


# ---------------------------------------------------------------------------
# consequences for convex functions


def _values(f, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    flat = X.reshape(-1, X.shape[-1])
    return np.array([float(f(x)) for x in flat]).reshape(X.shape[:-1])


@dataclass
class BoundCertificate:
    bound: float
    verified: bool
    chain_holds: bool
    max_excess: float
    max_chain_gap: float
    stepsizes: np.ndarray = field(repr=False)
    chain_gaps: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)


def bound_certificate(m: MetricField, f: Callable, simplex: SimplexSpec, h: float, targets, *,
                      tol: float = CONVEXITY_TOLERANCE, bvp_tol: float = BVP_TOLERANCE,
                      steps: int = ODE_STEPS) -> BoundCertificate:
    """Certify ``f <= max_j f(h p_j)`` on targets covered by the iterated simplex.

    Targets are in the coordinates of ``m``.  The iterated simplex of the
    vertices ``p_j`` under g_h is the iterated simplex of ``h p_j`` under g,
    shrunk by ``h``; so each target ``y`` is inverted as ``y / h`` under g_h
    and the convexity chain is replayed under ``m`` with vertices ``h p_j``:

        f(B_k) <= (1 - t_k) f(B_{k-1}) + t_k f(h p_k).

    ``chain_gaps[b, k]`` is the left side minus the right side at stage k.
    """
    if h == 0:
        raise ValueError("the certificate needs h != 0")
    Y = np.atleast_2d(np.asarray(targets, dtype=float))
    inv = invert_batch(simplex, h, Y / h, bvp_tol=bvp_tol, steps=steps)
    if not inv.ok.all():
        bad = int((~inv.ok).sum())
        raise CannotCertifyError(f"{bad} of {len(Y)} targets are not covered")
    vertices = h * simplex.points
    fv = _values(f, vertices)
    bound = float(fv.max())
    stages, ok = barycenter_stages(m, vertices, inv.stepsizes, tol=bvp_tol, steps=steps)
    if not ok.all():
        raise CannotCertifyError("the convexity chain could not be replayed")
    fs = _values(f, stages)
    T = inv.stepsizes
    rhs = (1 - T) * fs[:, :-1] + T * fv[None, 1:]
    gaps = fs[:, 1:] - rhs
    fy = _values(f, Y)
    excess = fy - bound
    chain_holds = bool(np.all(gaps <= tol))
    verified = bool(np.all(excess <= tol)) and chain_holds
    return BoundCertificate(bound, verified, chain_holds, float(excess.max()),
                            float(gaps.max()), T, gaps, fy)


@dataclass
class ConvexityReport:
    pairs_tested: int
    failed_pairs: int
    worst_violation: float
    witness: dict | None
    tolerance: float

    @property
    def convex(self) -> bool:
        return self.worst_violation <= self.tolerance

    def summary(self) -> dict:
        return {"pairs_tested": self.pairs_tested, "failed_pairs": self.failed_pairs,
                "worst_violation": self.worst_violation, "witness": self.witness,
                "tolerance": self.tolerance, "convex": self.convex}


def _sample_pairs(m, n_pairs, seed, center, radius):
    rng = np.random.default_rng(seed)
    center = np.zeros(m.dim) if center is None else np.asarray(center, dtype=float)
    if np.linalg.norm(center) + radius > m.chart_radius:
        raise ValueError("sampling ball is not inside the chart")
    return sample_ball(rng, n_pairs, m.dim, radius, center), sample_ball(rng, n_pairs, m.dim, radius, center)


def convexity_check(m: MetricField, f: Callable, n_pairs: int, n_t: int, seed, *,
                    center=None, radius: float = 0.5, tol: float = CONVEXITY_TOLERANCE,
                    bvp_tol: float = BVP_TOLERANCE, steps: int = ODE_STEPS) -> ConvexityReport:
    """Largest sampled value of ``f(gamma(t)) - (1 - t) f(p) - t f(q)``.

    Pairs are uniform in ``B(center, radius)``; the gap is evaluated at
    ``n_t`` parameters spread over the path samples (endpoints included).
    Pairs whose geodesic fails are counted and left out.
    """
    if n_t < 2:
        raise ValueError("n_t must be at least 2")
    P, Q = _sample_pairs(m, n_pairs, seed, center, radius)
    xs, _, _, ok = bvp_batch(m, P, Q, tol=bvp_tol, steps=steps)
    idx = np.unique(np.rint(np.linspace(0, steps, n_t)).astype(int))
    t = idx / steps
    worst, witness = -math.inf, None
    good = np.flatnonzero(ok)
    if good.size:
        vals = _values(f, xs[good][:, idx])
        fp, fq = _values(f, P[good]), _values(f, Q[good])
        gap = vals - (1 - t)[None] * fp[:, None] - t[None] * fq[:, None]
        b, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
        worst = float(gap[b, j])
        i = good[b]
        witness = {"p": P[i].tolist(), "q": Q[i].tolist(), "t": float(t[j])}
    return ConvexityReport(int(good.size), int(n_pairs - good.size), worst, witness, tol)


def lipschitz_probe(m: MetricField, f: Callable, center, radius: float, n_pairs: int, seed, *,
                    bvp_tol: float = BVP_TOLERANCE, steps: int = ODE_STEPS) -> float:
    """Largest sampled ``|f(a) - f(b)| / dist(a, b)`` over pairs in ``B(center, radius)``.

    A lower bound on the local Lipschitz constant; coincident pairs are skipped.
    """
    P, Q = _sample_pairs(m, n_pairs, seed, center, radius)
    xs, vs, _, ok = bvp_batch(m, P, Q, tol=bvp_tol, steps=steps)
    sp = speeds(m, xs, vs)
    dist = (0.5 * (sp[:, 1:] + sp[:, :-1])).sum(axis=1) / steps
    use = ok & (dist >= 1e-12)
    if not use.any():
        return 0.0
    diff = np.abs(_values(f, P[use]) - _values(f, Q[use]))
    return float((diff / dist[use]).max())
