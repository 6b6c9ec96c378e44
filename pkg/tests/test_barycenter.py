import numpy as np
import pytest

from gconvex.barycenter import (
    SimplexSpec,
    bary_map_F,
    centered_simplex,
    hull_sample,
    iterated_barycenter,
    jacobian_F_closed_form,
    jacobian_F_numeric,
    mean_stepsizes,
)
from gconvex.errors import DegenerateSimplexError
from gconvex.manifold import (
    conformal_test,
    euclidean,
    exp_map,
    geodesic_bvp,
    hyperbolic_ball,
    scaled_metric,
    sphere_chart,
)

TRIANGLE = [[1.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]


def flat_iterated(points, t):
    """Convex-combination recursion, the flat-metric oracle for B_k."""
    b = np.asarray(points[0], dtype=float)
    for p, s in zip(points[1:], t):
        b = (1 - s) * b + s * np.asarray(p, dtype=float)
    return b


def test_single_point():
    m = conformal_test(2)
    np.testing.assert_array_equal(iterated_barycenter(m, [[0.3, 0.2]], []), [0.3, 0.2])


def test_midpoint():
    np.testing.assert_allclose(iterated_barycenter(euclidean(2), [[0, 0], [1, 1]], [0.5]), [0.5, 0.5],
                               atol=1e-15)


@pytest.mark.parametrize("k", range(1, 7))
def test_euclidean_collapse_to_mean(k, rng):
    d = 3
    pts = rng.standard_normal((k, d))
    got = iterated_barycenter(euclidean(d), pts, 1.0 / np.arange(2, k + 1))
    np.testing.assert_allclose(got, pts.mean(axis=0), atol=1e-12)


def test_centered_simplex_mean_stepsizes_is_origin():
    got = iterated_barycenter(euclidean(2), TRIANGLE, mean_stepsizes(2))
    np.testing.assert_allclose(got, [0, 0], atol=1e-15)


def test_ordering_dependence():
    m = conformal_test(2)
    a = iterated_barycenter(m, TRIANGLE, [0.5, 1 / 3])
    b = iterated_barycenter(m, [TRIANGLE[0], TRIANGLE[2], TRIANGLE[1]], [0.5, 1 / 3])
    assert np.linalg.norm(a - b) > 1e-3


def test_swapping_first_two_at_midpoint_is_harmless():
    # the midpoint of p1, p2 is symmetric, so only discretization error remains
    m = conformal_test(2)
    a = iterated_barycenter(m, TRIANGLE, [0.5, 1 / 3])
    b = iterated_barycenter(m, [TRIANGLE[1], TRIANGLE[0], TRIANGLE[2]], [0.5, 1 / 3])
    assert np.linalg.norm(a - b) < 1e-6
    c = iterated_barycenter(m, [TRIANGLE[1], TRIANGLE[0], TRIANGLE[2]], [0.3, 1 / 3])
    assert np.linalg.norm(iterated_barycenter(m, TRIANGLE, [0.3, 1 / 3]) - c) > 1e-3


def test_euclidean_ordering_independent_at_mean():
    a = iterated_barycenter(euclidean(2), TRIANGLE, [0.5, 1 / 3])
    b = iterated_barycenter(euclidean(2), TRIANGLE[::-1], [0.5, 1 / 3])
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("metric", [euclidean(2), conformal_test(2), sphere_chart(2), hyperbolic_ball(2)],
                         ids=lambda m: m.kind)
def test_endpoint_consistency(metric):
    pts = 0.4 * np.array(TRIANGLE)
    b2 = iterated_barycenter(metric, pts[:2], [0.3])
    np.testing.assert_allclose(iterated_barycenter(metric, pts, [0.3, 0.0]), b2, atol=1e-15)
    np.testing.assert_allclose(iterated_barycenter(metric, pts, [0.3, 1.0]), pts[2], atol=1e-10)
    np.testing.assert_allclose(iterated_barycenter(metric, pts, [0.0, 0.0]), pts[0], atol=1e-15)


def test_stepsize_validation():
    m = euclidean(2)
    with pytest.raises(ValueError):
        iterated_barycenter(m, TRIANGLE, [0.5])
    with pytest.raises(ValueError):
        iterated_barycenter(m, TRIANGLE, [0.5, 1.5])


def test_F_at_h0_mean_is_origin():
    s = SimplexSpec(TRIANGLE, conformal_test(2))
    np.testing.assert_allclose(bary_map_F(s, mean_stepsizes(2), 0.0), [0, 0], atol=1e-15)


@pytest.mark.parametrize("h", [-1.0, 0.0, 0.25, 1.0])
def test_F_zero_stepsizes_is_first_vertex(h):
    s = SimplexSpec(TRIANGLE, conformal_test(2))
    np.testing.assert_array_equal(bary_map_F(s, [0.0, 0.0], h), TRIANGLE[0])


def test_F_matches_recomposition_from_primitives():
    m = conformal_test(2)
    s = SimplexSpec(TRIANGLE, m)
    h, t = 0.5, (0.5, 1 / 3)
    gh = scaled_metric(m, h)
    b = np.array(TRIANGLE[0])
    for p, tk in zip(TRIANGLE[1:], t):
        v = geodesic_bvp(gh, b, p).initial_velocity
        b = exp_map(gh, b, tk * v).samples[-1]
    np.testing.assert_allclose(bary_map_F(s, t, h), b, atol=1e-9)


def test_F_euclidean_matches_convex_recursion(rng):
    s = SimplexSpec(rng.standard_normal((4, 3)), euclidean(3))
    for _ in range(5):
        t = rng.random(3)
        np.testing.assert_allclose(bary_map_F(s, t, 0.7), flat_iterated(s.points, t), atol=1e-13)


def test_F_continuity_in_t_and_h():
    s = SimplexSpec(TRIANGLE, conformal_test(2))
    t = np.array([0.4, 0.3])
    base = bary_map_F(s, t, 0.5)
    for dt, dh in [(1e-6, 0), (0, 1e-6)]:
        near = bary_map_F(s, t + dt, 0.5 + dh)
        assert np.linalg.norm(near - base) < 1e-5


def test_closed_form_d1():
    pts = np.array([[0.3], [-1.2]])
    np.testing.assert_allclose(jacobian_F_closed_form(pts), [[-1.5]])


def test_closed_form_d2_values():
    np.testing.assert_allclose(jacobian_F_closed_form(np.array(TRIANGLE)),
                               [[-4 / 3, -2 / 3], [0.0, -1.5]], atol=1e-15)


def test_closed_form_vs_finite_differences_d2():
    s = SimplexSpec(TRIANGLE, conformal_test(2))
    np.testing.assert_allclose(jacobian_F_closed_form(s).T, jacobian_F_numeric(s, h=0.0), atol=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_closed_form_vs_fd_random(d, rng):
    m = conformal_test(d)
    for _ in range(5):
        s = SimplexSpec(rng.standard_normal((d + 1, d)), m)
        dev = np.abs(jacobian_F_closed_form(s).T - jacobian_F_numeric(s, h=0.0)).max()
        assert dev < 1e-6


def test_degenerate_simplex():
    collinear = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]])
    with pytest.raises(DegenerateSimplexError):
        jacobian_F_closed_form(collinear)
    with pytest.raises(DegenerateSimplexError):
        SimplexSpec(collinear, euclidean(2))
    assert abs(np.linalg.det(collinear[1:] - collinear[0])) == 0


def test_simplex_shape_and_centering():
    with pytest.raises(ValueError):
        SimplexSpec([[0, 0], [1, 0]], euclidean(2))
    s = centered_simplex([[0, 0], [2, 0], [0, 2]], euclidean(2))
    assert s.is_centered()
    assert not SimplexSpec([[0, 0], [2, 0], [0, 2]], euclidean(2)).is_centered()


def test_hull_segment():
    s = SimplexSpec([[0.0], [1.0]], euclidean(1))
    hull = hull_sample(s, 1.0, 2)
    np.testing.assert_allclose(hull.points[:, 0], [0.0, 0.5, 1.0], atol=1e-15)
    assert hull.failed == []


def test_hull_euclidean_contained_in_simplex():
    s = SimplexSpec(TRIANGLE, euclidean(2))
    hull = hull_sample(s, 0.5, 6)
    A = np.vstack([s.points.T, np.ones(3)])
    lam = np.linalg.solve(A, np.vstack([hull.points.T, np.ones(len(hull.points))]))
    assert lam.min() >= -1e-12


def test_hull_corner_is_last_vertex():
    for m in (euclidean(2), conformal_test(2)):
        hull = hull_sample(SimplexSpec(TRIANGLE, m), 0.5, 3)
        corner = np.all(hull.stepsizes == 1.0, axis=1)
        np.testing.assert_allclose(hull.points[corner][0], TRIANGLE[2], atol=1e-10)


def test_hull_points_in_chart_and_reproducible():
    m = hyperbolic_ball(2)
    s = SimplexSpec(0.5 * np.array(TRIANGLE), m)
    a = hull_sample(s, 1.0, 4)
    b = hull_sample(s, 1.0, 4)
    assert np.all(np.linalg.norm(a.points, axis=1) < 1)
    np.testing.assert_array_equal(a.points, b.points)


def test_hull_rejects_low_resolution():
    with pytest.raises(ValueError):
        hull_sample(SimplexSpec(TRIANGLE, euclidean(2)), 1.0, 1)


def test_hull_csv(tmp_path):
    hull = hull_sample(SimplexSpec(TRIANGLE, euclidean(2)), 1.0, 2)
    with open(tmp_path / "h.csv", "w") as fh:
        hull.to_csv(fh)
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "t_2,t_3,x_1,x_2"
    assert len(lines) == 1 + 9
