"""Metric fields on a chart ball, geodesic solvers and the scaled family g_h.

Points and tangent vectors are plain numpy arrays of shape ``(d,)``.  The
chart is always a ball centred at the origin of R^d; ``chart_radius`` on a
metric gives its radius (``inf`` when the metric is defined everywhere).

Every metric callable is vectorized: it accepts arrays of shape ``(..., d)``.
The solvers exploit this and integrate whole batches of geodesics at once.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    BVPFailure,
    ChartError,
    ChartExitError,
    MetricDegeneracyError,
    MetricEvaluationError,
)

FD_STEP = 1e-5
BVP_TOLERANCE = 1e-10
ODE_STEPS = 100
MAX_NEWTON = 30


@dataclass(frozen=True, eq=False)
class MetricField:
    """A smooth field of symmetric positive-definite matrices on a chart.

    Parameters
    ----------
    dim : int
        Chart dimension d.
    matrix_fn : callable
        ``(..., d) -> (..., d, d)``.
    partials_fn : callable, optional
        ``(..., d) -> (..., d, d, d)`` with ``[..., i, j, k] = d g_ij / d x_k``.
        Central differences with step ``fd_step`` are used when absent.
    accel_fn : callable, optional
        ``(x, v) -> -Gamma(x)(v, v)``, a fast path for the geodesic equation.
    kind : str
        One of ``euclidean``, ``sphere-chart``, ``hyperbolic-ball``,
        ``conformal-test``, ``scaled`` or ``custom``.
    """

    dim: int
    matrix_fn: Callable[[np.ndarray], np.ndarray]
    partials_fn: Callable[[np.ndarray], np.ndarray] | None = None
    accel_fn: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    kind: str = "custom"
    chart_radius: float = math.inf
    fd_step: float = FD_STEP
    params: dict = field(default_factory=dict)
    h: float | None = None
    inner: "MetricField | None" = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dim}")
        if not self.chart_radius > 0:
            raise ValueError("chart radius must be positive")

    @property
    def tag(self) -> str:
        if self.kind == "scaled":
            return f"scaled({self.h!r}, {self.inner.tag})"
        return self.kind

    def matrix(self, p) -> np.ndarray:
        return self.matrix_fn(np.asarray(p, dtype=float))

    def partials(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.partials_fn is not None:
            return self.partials_fn(p)
        return fd_partials(self.matrix_fn, p, self.fd_step)

    def accel(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Geodesic acceleration ``-Gamma^k_ij v^i v^j`` for batches of states."""
        if self.accel_fn is not None:
            return self.accel_fn(x, v)
        g = self.matrix_fn(x)
        dg = self.partials(x)
        # w_l = d_i g_jl v^i v^j - 1/2 d_l g_ij v^i v^j
        w = np.einsum("...jli,...i,...j->...l", dg, v, v) - 0.5 * np.einsum(
            "...ijl,...i,...j->...l", dg, v, v
        )
        return -np.linalg.solve(g, w[..., None])[..., 0]

    def in_chart(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.isfinite(p)) and np.linalg.norm(p) < self.chart_radius)


def fd_partials(matrix_fn, p, step=FD_STEP):
    """Central-difference partials ``[..., i, j, k] = d g_ij / d x_k``."""
    p = np.asarray(p, dtype=float)
    d = p.shape[-1]
    cols = []
    for k in range(d):
        e = np.zeros(d)
        e[k] = step
        cols.append((matrix_fn(p + e) - matrix_fn(p - e)) / (2 * step))
    return np.stack(cols, axis=-1)


# ---------------------------------------------------------------------------
# metric zoo


def conformal_metric(dim, phi, grad_phi, *, kind="custom", chart_radius=math.inf,
                     params=None) -> MetricField:
    """Metric ``exp(2 phi(p)) I`` with analytic partials and fast geodesic acceleration."""
    eye = np.eye(dim)

    def matrix(p):
        return np.exp(2.0 * phi(p))[..., None, None] * eye

    def partials(p):
        scale = 2.0 * np.exp(2.0 * phi(p))
        grad = grad_phi(p)
        return scale[..., None, None, None] * eye[:, :, None] * grad[..., None, None, :]

    def accel(x, v):
        grad = grad_phi(x)
        vg = np.einsum("...i,...i->...", v, grad)[..., None]
        vv = np.einsum("...i,...i->...", v, v)[..., None]
        return vv * grad - 2.0 * vg * v

    return MetricField(dim, matrix, partials, accel, kind=kind,
                       chart_radius=chart_radius, params=dict(params or {}))


def euclidean(dim: int) -> MetricField:
    eye = np.eye(dim)

    def matrix(p):
        return np.broadcast_to(eye, p.shape[:-1] + (dim, dim)).copy()

    def partials(p):
        return np.zeros(p.shape[:-1] + (dim, dim, dim))

    def accel(x, v):
        return np.zeros_like(v)

    return MetricField(dim, matrix, partials, accel, kind="euclidean")


def conformal_test(dim: int = 2, coefficient: float = 1.0, chart_radius=math.inf) -> MetricField:
    """``g(p) = exp(2 a |p|^2) I``; the default test metric with a = 1."""
    a = float(coefficient)
    return conformal_metric(
        dim,
        lambda p: a * np.sum(p * p, axis=-1),
        lambda p: 2.0 * a * p,
        kind="conformal-test",
        chart_radius=chart_radius,
        params={"coefficient": a},
    )


def sphere_chart(dim: int = 2, chart_radius=math.inf) -> MetricField:
    """Unit sphere in stereographic coordinates from the antipode of the chart centre.

    ``g(u) = 4 / (1 + |u|^2)^2 I``; the chart centre ``u = 0`` is the pole
    ``(0, ..., 0, 1)`` of the embedding.
    """
    return conformal_metric(
        dim,
        lambda p: math.log(2.0) - np.log1p(np.sum(p * p, axis=-1)),
        lambda p: -2.0 * p / (1.0 + np.sum(p * p, axis=-1))[..., None],
        kind="sphere-chart",
        chart_radius=chart_radius,
    )


def hyperbolic_ball(dim: int = 2) -> MetricField:
    """Poincare ball model, ``g(p) = 4 (1 - |p|^2)^-2 I`` on the unit ball."""
    return conformal_metric(
        dim,
        lambda p: math.log(2.0) - np.log1p(-np.sum(p * p, axis=-1)),
        lambda p: 2.0 * p / (1.0 - np.sum(p * p, axis=-1))[..., None],
        kind="hyperbolic-ball",
        chart_radius=1.0,
    )


def sphere_embed(u) -> np.ndarray:
    """Inverse stereographic projection of chart coordinates onto the unit sphere."""
    u = np.asarray(u, dtype=float)
    r2 = np.sum(u * u, axis=-1, keepdims=True)
    return np.concatenate([2.0 * u, 1.0 - r2], axis=-1) / (1.0 + r2)


def sphere_project(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., :-1] / (1.0 + x[..., -1:])


def make_metric(kind: str, dim: int = 2, **params) -> MetricField:
    """Build a zoo metric from its kind tag, as used by config files."""
    if kind == "euclidean":
        return euclidean(dim)
    if kind == "conformal-test":
        return conformal_test(dim, params.get("coefficient", 1.0),
                              params.get("radius", math.inf))
    if kind == "sphere-chart":
        return sphere_chart(dim, params.get("radius", math.inf))
    if kind == "hyperbolic-ball":
        return hyperbolic_ball(dim)
    raise ValueError(f"unknown metric kind {kind!r}")


def scaled_metric(m: MetricField, h: float) -> MetricField:
    """The field ``p -> g(h p)``.

    For ``h = 0`` the result is the frozen constant field ``p -> g(0)``.
    """
    h = float(h)
    if not abs(h) <= 1.0:
        raise ValueError(f"scale h must lie in [-1, 1], got {h}")
    d = m.dim
    radius = math.inf if h == 0 else m.chart_radius / abs(h)

    if h == 0.0:
        g0 = np.array(m.matrix(np.zeros(d)), dtype=float)

        def matrix(p):
            return np.broadcast_to(g0, p.shape[:-1] + (d, d)).copy()

        def partials(p):
            return np.zeros(p.shape[:-1] + (d, d, d))

        def accel(x, v):
            return np.zeros_like(v)
    else:
        def matrix(p):
            return m.matrix_fn(h * p)

        def partials(p):
            return h * m.partials(h * p)

        accel = None
        if m.accel_fn is not None:
            def accel(x, v):
                return h * m.accel_fn(h * x, v)

    return MetricField(d, matrix, partials, accel, kind="scaled", chart_radius=radius,
                       fd_step=m.fd_step, params=dict(m.params), h=h, inner=m)


# ---------------------------------------------------------------------------
# pointwise operations


def _check_point(m: MetricField, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (m.dim,):
        raise ValueError(f"expected a point of shape ({m.dim},), got {p.shape}")
    if not m.in_chart(p):
        raise ChartError(f"point {p} lies outside the chart of radius {m.chart_radius}")
    return p


def checked_matrix(m: MetricField, p) -> np.ndarray:
    """``g(p)`` after verifying finiteness, symmetry and positive definiteness."""
    p = _check_point(m, p)
    g = np.asarray(m.matrix(p), dtype=float)
    if not np.all(np.isfinite(g)):
        raise MetricEvaluationError(f"non-finite metric at {p}")
    scale = max(np.max(np.abs(g)), np.finfo(float).tiny)
    if np.max(np.abs(g - g.T)) > 1e-12 * scale:
        raise MetricDegeneracyError(f"metric not symmetric at {p}")
    if np.linalg.eigvalsh(g)[0] <= 0:
        raise MetricDegeneracyError(f"metric not positive definite at {p}")
    return g


def metric_eval(m: MetricField, p, u, v) -> float:
    """Inner product ``u^T g(p) v``, exactly symmetric in ``u`` and ``v``."""
    g = checked_matrix(m, p)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (m.dim,) or v.shape != (m.dim,):
        raise ValueError("tangent vector dimension does not match the metric")
    return float(0.5 * (u @ g @ v + v @ g @ u))


def christoffel(m: MetricField, p) -> np.ndarray:
    """Christoffel symbols ``Gamma[k, i, j]`` of the second kind at ``p``."""
    g = checked_matrix(m, p)
    dg = m.partials(np.asarray(p, dtype=float))
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise MetricDegeneracyError(f"singular metric at {p}") from exc
    # t[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    t = np.einsum("jli->ijl", dg) + np.einsum("ilj->ijl", dg) - dg
    return 0.5 * np.einsum("kl,ijl->kij", ginv, t)


# ---------------------------------------------------------------------------
# geodesic integration


@dataclass(frozen=True, eq=False)
class GeodesicPath:
    """Geodesic sampled at the parameters ``t_i = i / N``."""

    samples: np.ndarray
    metric: MetricField
    velocities: np.ndarray | None = None
    residual: float = 0.0

    @property
    def p(self) -> np.ndarray:
        return self.samples[0]

    @property
    def q(self) -> np.ndarray:
        return self.samples[-1]

    @property
    def params(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, len(self.samples))

    @property
    def initial_velocity(self) -> np.ndarray:
        return self.velocities[0]

    def scaled(self, factor: float, metric: MetricField) -> "GeodesicPath":
        vel = None if self.velocities is None else factor * self.velocities
        return GeodesicPath(factor * self.samples, metric, vel, self.residual)

    def to_csv(self, fh) -> None:
        writer = csv.writer(fh, lineterminator="\n")
        d = self.samples.shape[1]
        writer.writerow(["t"] + [f"x_{i + 1}" for i in range(d)])
        for t, x in zip(self.params, self.samples):
            writer.writerow([repr(float(t))] + [repr(float(c)) for c in x])


def integrate(m: MetricField, x0, v0, t_end=1.0, steps=ODE_STEPS, record=True):
    """Fixed-step RK4 for batches of geodesic initial-value problems.

    Parameters
    ----------
    x0, v0 : ndarray, shape (B, d)
    t_end : float or ndarray, shape (B,)
        Integration horizon per row; the step is ``t_end / steps``.

    Returns
    -------
    xs, vs : ndarray
        Shape ``(B, steps + 1, d)`` when ``record`` else ``(B, d)``.
    exit_t : ndarray, shape (B,)
        Parameter at which each row left the chart, ``nan`` if it stayed.
    """
    x = np.array(x0, dtype=float)
    v = np.array(v0, dtype=float)
    B, d = x.shape
    dt = (np.broadcast_to(np.asarray(t_end, dtype=float), (B,)) / steps)[:, None]
    radius = m.chart_radius
    bounded = math.isfinite(radius)
    exit_t = np.full(B, np.nan)
    if record:
        xs = np.empty((B, steps + 1, d))
        vs = np.empty((B, steps + 1, d))
        xs[:, 0], vs[:, 0] = x, v
    outside = np.zeros(B, dtype=bool)

    def acc(y, w):
        if bounded:
            out = ~(np.linalg.norm(y, axis=-1) < radius)
            if out.any():
                outside[out] = True
                y = np.where(out[:, None], 0.0, y)
        return m.accel(y, w)

    with np.errstate(all="ignore"):
        for n in range(steps):
            k1v = acc(x, v)
            k2x = v + 0.5 * dt * k1v
            k2v = acc(x + 0.5 * dt * v, k2x)
            k3x = v + 0.5 * dt * k2v
            k3v = acc(x + 0.5 * dt * k2x, k3x)
            k4x = v + dt * k3v
            k4v = acc(x + dt * k3x, k4x)
            x = x + dt / 6.0 * (v + 2.0 * k2x + 2.0 * k3x + k4x)
            v = v + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
            if bounded:
                bad = outside | ~(np.linalg.norm(x, axis=-1) < radius)
                fresh = bad & np.isnan(exit_t)
                if fresh.any():
                    exit_t[fresh] = (n + 1) * dt[fresh, 0]
                    x[bad] = 0.0
                    v[bad] = 0.0
                outside[:] = False
            if record:
                xs[:, n + 1], vs[:, n + 1] = x, v
    blown = ~np.all(np.isfinite(x) & np.isfinite(v), axis=-1) & np.isnan(exit_t)
    exit_t[blown] = np.broadcast_to(np.asarray(t_end, dtype=float), (B,))[blown]
    if record:
        return xs, vs, exit_t
    return x, v, exit_t


def exp_map(m: MetricField, p, v, steps: int = ODE_STEPS) -> GeodesicPath:
    """Geodesic ``t -> Exp_p(t v)`` on ``[0, 1]``."""
    p = _check_point(m, p)
    v = np.asarray(v, dtype=float)
    if v.shape != p.shape:
        raise ValueError("tangent vector dimension does not match the base point")
    xs, vs, exit_t = integrate(m, p[None], v[None], 1.0, steps)
    if not np.isnan(exit_t[0]):
        raise ChartExitError(f"geodesic left the chart at t={exit_t[0]:.6g}", float(exit_t[0]))
    return GeodesicPath(xs[0], m, vs[0])


def shoot(m: MetricField, P, Q, tol=BVP_TOLERANCE, steps=ODE_STEPS,
          max_iter=MAX_NEWTON, fd_eps=1e-7, max_halvings=30, polish=1.0):
    """Batched single shooting for the boundary-value problems ``P[b] -> Q[b]``.

    Damped Newton on the initial velocity, started from ``Q - P``, with a
    forward-difference sensitivity matrix.  Rows keep iterating down to
    ``polish * tol`` while that still makes progress; success means ``tol``.

    Returns
    -------
    V : ndarray, shape (B, d)
        Initial velocities.
    residual : ndarray, shape (B,)
        Terminal miss ``|gamma(1) - Q|`` (``inf`` if the chart was left).
    ok : ndarray of bool, shape (B,)
    """
    P = np.array(P, dtype=float)
    Q = np.array(Q, dtype=float)
    B, d = P.shape
    V = Q - P

    def endpoint(x, w):
        end, _, ex = integrate(m, x, w, 1.0, steps, record=False)
        return end, ex

    end, ex = endpoint(P, V)
    with np.errstate(all="ignore"):
        res = np.where(np.isnan(ex), np.linalg.norm(end - Q, axis=-1), np.inf)
    res[~np.isfinite(res)] = np.inf
    stalled = np.zeros(B, dtype=bool)
    eye = np.eye(d)

    for _ in range(max_iter):
        act = np.flatnonzero((res > polish * tol) & ~stalled)
        if act.size == 0:
            break
        n = act.size
        Pa, Va, Qa = P[act], V[act], Q[act]
        eps = fd_eps * np.maximum(1.0, np.linalg.norm(Va, axis=-1))
        Pp = np.repeat(Pa, d, axis=0)
        Vp = (Va[:, None, :] + eps[:, None, None] * eye).reshape(n * d, d)
        ep, _ = endpoint(Pp, Vp)
        jac = ((ep.reshape(n, d, d) - end[act][:, None, :]) / eps[:, None, None]).swapaxes(1, 2)
        rhs = Qa - end[act]
        delta = _solve_rows(jac, rhs)

        lam = np.ones(n)
        pending = np.arange(n)
        for _ in range(max_halvings):
            trial = Va[pending] + lam[pending, None] * delta[pending]
            et, ext = endpoint(Pa[pending], trial)
            with np.errstate(all="ignore"):
                rt = np.linalg.norm(et - Qa[pending], axis=-1)
            rt[~np.isnan(ext) | ~np.isfinite(rt)] = np.inf
            better = rt < res[act[pending]]
            rows = act[pending[better]]
            V[rows] = trial[better]
            end[rows] = et[better]
            res[rows] = rt[better]
            pending = pending[~better]
            if pending.size == 0:
                break
            lam[pending] *= 0.5
        stalled[act[pending]] = True

    return V, res, res <= tol


def _solve_rows(jac, rhs):
    try:
        return np.linalg.solve(jac, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.empty_like(rhs)
        for i in range(len(rhs)):
            out[i] = np.linalg.lstsq(jac[i], rhs[i], rcond=None)[0]
        return out


def geodesic_bvp(m: MetricField, p, q, *, tol: float = BVP_TOLERANCE,
                 steps: int = ODE_STEPS, max_iter: int = MAX_NEWTON) -> GeodesicPath:
    """The geodesic from ``p`` to ``q`` by damped single shooting.

    Raises :class:`BVPFailure` carrying the terminal residual if Newton does
    not reach ``tol``.
    """
    p = _check_point(m, p)
    q = _check_point(m, q)
    V, res, ok = shoot(m, p[None], q[None], tol, steps, max_iter)
    if not ok[0]:
        raise BVPFailure(f"shooting from {p} to {q} did not converge "
                         f"(residual {res[0]:.3g})", float(res[0]))
    xs, vs, _ = integrate(m, p[None], V, 1.0, steps)
    samples = xs[0]
    samples[-1] = q
    return GeodesicPath(samples, m, vs[0], float(res[0]))


def bvp_batch(m: MetricField, P, Q, *, tol=BVP_TOLERANCE, steps=ODE_STEPS,
              max_iter=MAX_NEWTON):
    """Solve many boundary-value problems; returns ``(xs, vs, residual, ok)``.

    Failed rows are kept (their samples are meaningless) so callers can
    record and skip them.
    """
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    V, res, ok = shoot(m, P, Q, tol, steps, max_iter)
    xs, vs, _ = integrate(m, P, V, 1.0, steps)
    xs[ok, -1] = Q[ok]
    return xs, vs, res, ok


def speeds(m: MetricField, samples, velocities) -> np.ndarray:
    g = m.matrix(samples)
    sq = np.einsum("...i,...ij,...j->...", velocities, g, velocities)
    return np.sqrt(np.maximum(sq, 0.0))


def _path_velocities(path: GeodesicPath) -> np.ndarray:
    if path.velocities is not None:
        return path.velocities
    n = len(path.samples) - 1
    if n < 2:
        return np.diff(path.samples, axis=0).repeat(2, axis=0) * n
    return np.gradient(path.samples, 1.0 / n, axis=0, edge_order=2)


def cumulative_length(m: MetricField, path: GeodesicPath) -> np.ndarray:
    """Trapezoidal arc length from ``t = 0`` to every sample."""
    s = speeds(m, path.samples, _path_velocities(path))
    dt = 1.0 / (len(s) - 1)
    return np.concatenate([[0.0], np.cumsum(0.5 * dt * (s[1:] + s[:-1]))])


def path_length(m: MetricField, path: GeodesicPath) -> float:
    """Length ``int_0^1 sqrt(g(eta)(eta', eta'))`` by the composite trapezoid rule.

    Uses the stored velocities of solver-produced paths and second-order
    finite differences of the samples otherwise.
    """
    if len(path.samples) < 2:
        return 0.0
    return float(cumulative_length(m, path)[-1])


def scaled_geodesic_check(m: MetricField, p, q, h: float, *, tol: float = BVP_TOLERANCE,
                          steps: int = ODE_STEPS) -> dict:
    """Compare the g_h geodesic p -> q with ``h^-1`` times the g geodesic hp -> hq."""
    if h == 0:
        raise ValueError("the scaling identity needs h != 0")
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    gh = scaled_metric(m, h)
    scaled_path = geodesic_bvp(gh, p, q, tol=tol, steps=steps)
    inner_path = geodesic_bvp(m, h * p, h * q, tol=tol, steps=steps)
    dev = np.linalg.norm(scaled_path.samples - inner_path.samples / h, axis=-1)
    return {"h": float(h), "max_deviation": float(dev.max()),
            "argmax_t": float(scaled_path.params[int(dev.argmax())])}


# ---------------------------------------------------------------------------
# charts


def sample_ball(rng: np.random.Generator, n: int, dim: int, radius: float,
                center=None) -> np.ndarray:
    """``n`` points uniformly distributed in an open ball."""
    dirs = rng.standard_normal((n, dim))
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    r = radius * rng.random(n) ** (1.0 / dim)
    pts = dirs * r[:, None]
    if center is not None:
        pts += np.asarray(center, dtype=float)
    return pts


@dataclass(frozen=True, eq=False)
class ChartSpec:
    """A ball inside a metric's chart that is meant to be totally normal."""

    metric: MetricField
    radius: float
    center: np.ndarray | None = None
    bvp_tolerance: float = BVP_TOLERANCE
    ode_steps: int = ODE_STEPS

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("chart radius must be positive")
        c = np.zeros(self.metric.dim) if self.center is None else np.asarray(self.center, float)
        object.__setattr__(self, "center", c)
        if np.linalg.norm(c) + self.radius > self.metric.chart_radius:
            raise ChartError("chart ball is not contained in the metric's chart")
        if self.bvp_tolerance <= 0 or self.ode_steps < 1:
            raise ValueError("solver parameters must be positive")

    def contains(self, p) -> bool:
        return bool(np.linalg.norm(np.asarray(p, float) - self.center) < self.radius)

    def sample(self, rng, n) -> np.ndarray:
        return sample_ball(rng, n, self.metric.dim, self.radius, self.center)

    def validate(self, n_pairs: int = 50, seed: int = 0) -> float:
        """Check that shooting converges for random pairs; returns the worst residual.

        Raises :class:`BVPFailure` when any pair fails, which suggests the ball
        is not totally normal.
        """
        rng = np.random.default_rng(seed)
        P = self.sample(rng, n_pairs)
        Q = self.sample(rng, n_pairs)
        _, res, ok = shoot(self.metric, P, Q, self.bvp_tolerance, self.ode_steps)
        if not ok.all():
            raise BVPFailure(f"{int((~ok).sum())} of {n_pairs} sampled pairs failed",
                             float(res.max()))
        return float(res.max())
