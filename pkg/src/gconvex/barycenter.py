"""Iterated barycenters and the stepsize map F(t; h) over the scaled metrics."""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import BVPFailure, ChartError, DegenerateSimplexError
from .manifold import (
    BVP_TOLERANCE,
    FD_STEP,
    ODE_STEPS,
    MetricField,
    integrate,
    scaled_metric,
    shoot,
)

MAX_CONDITION = 1e8


def as_stepsizes(t, k: int) -> np.ndarray:
    """Validate a stepsize vector ``(t_2, ..., t_k)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (k - 1,):
        raise ValueError(f"expected {k - 1} stepsizes, got shape {t.shape}")
    if np.any(t < 0) or np.any(t > 1) or not np.all(np.isfinite(t)):
        raise ValueError(f"stepsizes must lie in [0, 1], got {t}")
    return t


def mean_stepsizes(d: int) -> np.ndarray:
    """``(1/2, 1/3, ..., 1/(d+1))``, the stepsizes that produce the centroid."""
    return 1.0 / np.arange(2, d + 2)


def barycenter_stages(m: MetricField, points, T, *, tol=BVP_TOLERANCE, steps=ODE_STEPS):
    """All partial barycenters ``B_1, ..., B_k`` for a batch of stepsize vectors.

    Parameters
    ----------
    points : ndarray, shape (k, d)
    T : ndarray, shape (B, k - 1)
        Values outside ``[0, 1]`` are allowed here and extend the geodesics.

    Returns
    -------
    stages : ndarray, shape (B, k, d)
    ok : ndarray of bool, shape (B,)
        False where some geodesic could not be solved.
    """
    points = np.asarray(points, dtype=float)
    T = np.asarray(T, dtype=float).reshape(-1, len(points) - 1)
    B = len(T)
    stages = np.empty((B, len(points), points.shape[1]))
    stages[:, 0] = points[0]
    ok = np.ones(B, dtype=bool)
    current = np.broadcast_to(points[0], (B, points.shape[1])).copy()
    for k in range(1, len(points)):
        target = np.broadcast_to(points[k], current.shape)
        V, _, conv = shoot(m, current, target, tol, steps)
        ok &= conv
        nxt, _, exit_t = integrate(m, current, V, T[:, k - 1], steps, record=False)
        ok &= np.isnan(exit_t)
        nxt[~ok] = current[~ok]
        stages[:, k] = nxt
        current = nxt
    return stages, ok


def iterated_barycenter(m: MetricField, points, t, *, tol: float = BVP_TOLERANCE,
                        steps: int = ODE_STEPS) -> np.ndarray:
    """``B_k(p_1, ..., p_k; t_2, ..., t_k)``.

    ``B_1 = p_1`` and ``B_k`` is the point at parameter ``t_k`` on the
    geodesic from ``B_{k-1}`` to ``p_k``.  The result depends on the order
    of ``points``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != m.dim:
        raise ValueError("point dimension does not match the metric")
    for p in points:
        if not m.in_chart(p):
            raise ChartError(f"point {p} lies outside the chart")
    t = as_stepsizes(t, len(points))
    if len(points) == 1:
        return points[0].copy()
    stages, ok = barycenter_stages(m, points, t[None], tol=tol, steps=steps)
    if not ok[0]:
        raise BVPFailure("a geodesic in the barycenter chain did not converge", np.inf)
    return stages[0, -1]


@dataclass(frozen=True, eq=False)
class SimplexSpec:
    """Ordered vertices ``p_1, ..., p_{d+1}`` with the metric they live in.

    Construction fails with :class:`DegenerateSimplexError` when the vertices
    are numerically affinely dependent.
    """

    points: np.ndarray
    metric: MetricField
    condition_number: float = field(init=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        d = self.metric.dim
        if pts.shape != (d + 1, d):
            raise ValueError(f"a simplex in dimension {d} needs shape {(d + 1, d)}, got {pts.shape}")
        for p in pts:
            if not self.metric.in_chart(p):
                raise ChartError(f"vertex {p} lies outside the chart")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "condition_number", _condition(closed_form_matrix(pts)))
        if self.condition_number > MAX_CONDITION:
            raise DegenerateSimplexError(
                f"vertices are affinely dependent (condition number {self.condition_number:.3g})")

    @property
    def dim(self) -> int:
        return self.metric.dim

    def is_centered(self, tol: float = 1e-12) -> bool:
        scale = max(1.0, float(np.abs(self.points).max()))
        return bool(np.abs(self.points.sum(axis=0)).max() <= tol * scale)


def centered_simplex(points, metric: MetricField) -> SimplexSpec:
    """Shift the vertices so that they sum to zero."""
    pts = np.asarray(points, dtype=float)
    return SimplexSpec(pts - pts.mean(axis=0), metric)


def _condition(mat) -> float:
    s = np.linalg.svd(mat, compute_uv=False)
    return float(np.inf) if s[-1] == 0 else float(s[0] / s[-1])


def closed_form_matrix(points) -> np.ndarray:
    """Rows ``k (p_k - mean(p_1..p_{k-1})) / (d + 1)`` for ``k = 2..d+1``."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    running = np.cumsum(pts, axis=0) / np.arange(1, n + 1)[:, None]
    k = np.arange(2, n + 1)[:, None]
    return k * (pts[1:] - running[:-1]) / n


def jacobian_F_closed_form(simplex) -> np.ndarray:
    """Jacobian of F with respect to t at ``t = (1/2, ..., 1/(d+1))``, ``h = 0``.

    Row ``k`` holds the derivative with respect to ``t_{k+1}``, so this is the
    transpose of the usual ``dF_i / dt_k`` layout.  Accepts a
    :class:`SimplexSpec` or a raw ``(d+1, d)`` vertex array.
    """
    pts = simplex.points if isinstance(simplex, SimplexSpec) else np.asarray(simplex, float)
    mat = closed_form_matrix(pts)
    cond = _condition(mat)
    if cond > MAX_CONDITION:
        raise DegenerateSimplexError(f"closed-form Jacobian is singular (condition {cond:.3g})")
    return mat


def bary_map_batch(simplex: SimplexSpec, T, h: float, *, tol=BVP_TOLERANCE, steps=ODE_STEPS):
    """F evaluated row-wise; returns ``(points, ok)``."""
    gh = scaled_metric(simplex.metric, h)
    stages, ok = barycenter_stages(gh, simplex.points, T, tol=tol, steps=steps)
    return stages[:, -1], ok


def bary_map_F(simplex: SimplexSpec, t, h: float, *, tol: float = BVP_TOLERANCE,
               steps: int = ODE_STEPS) -> np.ndarray:
    """Iterated barycenter of the simplex vertices under the scaled metric g_h."""
    t = as_stepsizes(t, simplex.dim + 1)
    X, ok = bary_map_batch(simplex, t[None], h, tol=tol, steps=steps)
    if not ok[0]:
        raise BVPFailure(f"F could not be evaluated at t={t}, h={h}", np.inf)
    return X[0]


def fd_jacobian_batch(simplex: SimplexSpec, T, h: float, step: float = FD_STEP, *,
                      tol=BVP_TOLERANCE, steps=ODE_STEPS):
    """Central-difference Jacobians ``J[b, i, k] = dF_i / dt_k``; returns ``(J, ok)``."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    B, d = T.shape
    shifts = step * np.eye(d)
    rows = np.concatenate([T[:, None, :] + shifts, T[:, None, :] - shifts], axis=1)
    X, ok = bary_map_batch(simplex, rows.reshape(-1, d), h, tol=tol, steps=steps)
    X = X.reshape(B, 2 * d, d)
    J = ((X[:, :d] - X[:, d:]) / (2 * step)).swapaxes(1, 2)
    return J, ok.reshape(B, 2 * d).all(axis=1)


def jacobian_F_numeric(simplex: SimplexSpec, t=None, h: float = 0.0,
                       step: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian ``dF_i / dt_k`` (defaults to mean stepsizes)."""
    t = mean_stepsizes(simplex.dim) if t is None else np.asarray(t, dtype=float)
    J, ok = fd_jacobian_batch(simplex, t[None], h, step)
    if not ok[0]:
        raise BVPFailure("F could not be evaluated around t", np.inf)
    return J[0]


@dataclass(frozen=True, eq=False)
class HullSample:
    """Grid of stepsize vectors with the barycenters they produce."""

    stepsizes: np.ndarray
    points: np.ndarray
    failed: list = field(default_factory=list)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        d = self.points.shape[1]
        writer.writerow([f"t_{k}" for k in range(2, d + 2)] + [f"x_{i + 1}" for i in range(d)])
        for t, x in zip(self.stepsizes, self.points):
            writer.writerow([repr(float(v)) for v in t] + [repr(float(v)) for v in x])


def hull_sample(simplex: SimplexSpec, h: float, resolution: int, *,
                tol: float = BVP_TOLERANCE, steps: int = ODE_STEPS) -> HullSample:
    """Evaluate F on the grid ``{0, 1/r, ..., 1}^d``.

    Grid nodes whose geodesics fail, or whose image leaves the chart, are
    listed in ``failed`` and skipped.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    d = simplex.dim
    axis = np.arange(resolution + 1) / resolution
    grid = np.array(list(itertools.product(axis, repeat=d)))
    X, ok = bary_map_batch(simplex, grid, h, tol=tol, steps=steps)
    gh = scaled_metric(simplex.metric, h)
    ok &= np.linalg.norm(X, axis=-1) < gh.chart_radius
    failed = [tuple(float(v) for v in grid[i]) for i in np.flatnonzero(~ok)]
    return HullSample(grid[ok], X[ok], failed)
