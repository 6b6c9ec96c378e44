"""Countably many unit segments glued at their origins, with two metrics.

Points are ``(x, n)`` with ``x`` in ``[0, 1]`` and branch ``n >= 1``; every
``(0, n)`` is the same point and is stored as ``(0, 1)``.  On branch ``n`` a
unit of ``x`` has length ``1 / n`` under ``d1`` and ``1`` under ``d2``:

    d1((x, m), (y, n)) = |x - y| / m   if m == n,   x / m + y / n  otherwise
    d2((x, m), (y, n)) = |x - y|       if m == n,   x + y          otherwise

Arithmetic is exact when the inputs are ints or Fractions; floats fall
through Python's numeric tower unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

TAGS = ("d1", "d2")
KINDS = ("f", "g")


def _exact(x):
    return Fraction(x) if isinstance(x, Rational) else x


@dataclass(frozen=True)
class StarPoint:
    x: Fraction
    branch: int = 1

    def __post_init__(self):
        x = _exact(self.x)
        if not 0 <= x <= 1:
            raise ValueError(f"coordinate must lie in [0, 1], got {x}")
        if int(self.branch) != self.branch or self.branch < 1:
            raise ValueError(f"branch must be a positive integer, got {self.branch}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "branch", 1 if x == 0 else int(self.branch))

    @property
    def is_origin(self) -> bool:
        return self.x == 0

    def as_tuple(self):
        return (self.x, self.branch)


ORIGIN = StarPoint(0, 1)


def _check_tag(tag):
    if tag not in TAGS:
        raise ValueError(f"metric tag must be one of {TAGS}, got {tag!r}")


def branch_scale(tag: str, n: int):
    """Length of one unit of ``x`` on branch ``n``."""
    _check_tag(tag)
    return Fraction(1, n) if tag == "d1" else Fraction(1)


def star_dist(tag: str, a: StarPoint, b: StarPoint):
    _check_tag(tag)
    if a.branch == b.branch:
        return abs(a.x - b.x) * branch_scale(tag, a.branch)
    return a.x * branch_scale(tag, a.branch) + b.x * branch_scale(tag, b.branch)


def dist_to_origin(tag: str, a: StarPoint):
    return a.x * branch_scale(tag, a.branch)


@dataclass(frozen=True)
class StarGeodesic:
    """The geodesic from ``a`` to ``b``; ``breakpoint`` is where it crosses the origin."""

    a: StarPoint
    b: StarPoint
    tag: str
    length: object
    breakpoint: object | None

    def __call__(self, t) -> StarPoint:
        return geodesic_eval(self, t)


def star_geodesic(tag: str, a: StarPoint, b: StarPoint) -> StarGeodesic:
    length = star_dist(tag, a, b)
    if a.branch == b.branch or a.is_origin or b.is_origin:
        return StarGeodesic(a, b, tag, length, None)
    return StarGeodesic(a, b, tag, length, dist_to_origin(tag, a) / length)


def geodesic_eval(gamma: StarGeodesic, t) -> StarPoint:
    t = _exact(t)
    if not 0 <= t <= 1:
        raise ValueError("geodesic parameter must lie in [0, 1]")
    a, b = gamma.a, gamma.b
    if gamma.breakpoint is None:
        branch = b.branch if a.is_origin else a.branch
        return StarPoint((1 - t) * a.x + t * b.x, branch)
    travelled = t * gamma.length
    da = dist_to_origin(gamma.tag, a)
    if t <= gamma.breakpoint:
        return StarPoint((da - travelled) / branch_scale(gamma.tag, a.branch), a.branch)
    return StarPoint((travelled - da) / branch_scale(gamma.tag, b.branch), b.branch)


def star_function(kind: str, p: StarPoint):
    """``f((x, n)) = x`` and ``g((x, n)) = n x``."""
    if kind == "f":
        return p.x
    if kind == "g":
        return p.branch * p.x
    raise ValueError(f"function kind must be 'f' or 'g', got {kind!r}")


def discontinuity_witness(kind: str, tag: str, indices=range(1, 11)):
    """Records along the sequence showing the function is discontinuous at 0.

    ``(f, d1)`` uses the points ``(1, p)``; ``(g, d2)`` uses ``(1/p, p)``.
    Both have distance ``1/p`` to the origin and function gap 1.  The other two
    pairings have no witness (the function is continuous there) and return
    ``None``.
    """
    _check_tag(tag)
    if (kind, tag) == ("f", "d1"):
        make = lambda p: StarPoint(1, p)  # noqa: E731
    elif (kind, tag) == ("g", "d2"):
        make = lambda p: StarPoint(Fraction(1, p), p)  # noqa: E731
    elif kind in KINDS:
        return None
    else:
        raise ValueError(f"function kind must be 'f' or 'g', got {kind!r}")
    f0 = star_function(kind, ORIGIN)
    out = []
    for p in indices:
        pt = make(p)
        out.append({
            "p": p,
            "branch": pt.branch,
            "x": pt.x,
            "distance": star_dist(tag, pt, ORIGIN),
            "gap": abs(star_function(kind, pt) - f0),
        })
    return out


# ---------------------------------------------------------------------------
# compactness


@dataclass(frozen=True)
class StarSequence:
    """``p -> (coord_limit + coord_rate / p, branch_base + branch_slope * p)``, ``p >= 1``.

    ``branch_slope = 0`` gives a constant branch, a positive slope a strictly
    increasing one.
    """

    branch_base: int = 1
    branch_slope: int = 0
    coord_limit: Fraction = Fraction(0)
    coord_rate: Fraction = Fraction(0)

    def __post_init__(self):
        if self.branch_slope < 0:
            raise ValueError("branch slope must be non-negative")
        if self.branch_base + self.branch_slope < 1:
            raise ValueError("branches must be positive")
        lim, rate = _exact(self.coord_limit), _exact(self.coord_rate)
        # x_p is monotone in p, so checking p = 1 and the limit suffices
        if not (0 <= lim <= 1 and 0 <= lim + rate <= 1):
            raise ValueError("sequence leaves [0, 1]")
        object.__setattr__(self, "coord_limit", lim)
        object.__setattr__(self, "coord_rate", rate)

    def coord(self, p):
        return self.coord_limit + self.coord_rate * Fraction(1, p)

    def branch(self, p) -> int:
        return self.branch_base + self.branch_slope * p

    def __getitem__(self, p) -> StarPoint:
        return StarPoint(self.coord(p), self.branch(p))


@dataclass
class CompactnessResult:
    status: str  # "convergent", "non-compact" or "undecided"
    subsequence: list
    limit: StarPoint | None
    separation: object | None
    diagnostics: dict


def compactness_witness(tag: str, seq: StarSequence, horizon: int = 10_000,
                        decide_tol=Fraction(1, 1000)) -> CompactnessResult:
    """Find a convergent subsequence of ``seq`` or certify that none exists.

    Constant branch: the coordinates converge, so the whole sequence does.
    Increasing branches under d1: ``d1(seq[p], 0) <= 1 / n_p`` forces
    convergence to the origin.  Increasing branches under d2 converge to the
    origin only when the coordinates tend to 0; otherwise distinct terms are
    ``x_p + x_q >= 2 inf x`` apart and no subsequence is Cauchy.

    A convergent case is only reported once the distance to the limit at
    ``horizon`` is at most ``decide_tol``; otherwise the result is
    ``undecided``.
    """
    _check_tag(tag)
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    indices = list(range(1, horizon + 1))
    if seq.branch_slope == 0 or tag == "d1" or seq.coord_limit == 0:
        if seq.branch_slope == 0:
            limit = StarPoint(seq.coord_limit, seq.branch_base)
            case = "constant-branch"
        else:
            limit = ORIGIN
            case = "increasing-branch"
        dists = [star_dist(tag, seq[p], limit) for p in (1, horizon)]
        diag = {"case": case, "distance_at_1": dists[0], "distance_at_horizon": dists[1],
                "horizon": horizon}
        if dists[1] > decide_tol:
            return CompactnessResult("undecided", [], None, None, diag)
        return CompactnessResult("convergent", indices, limit, None, diag)
    inf_x = seq.coord_limit if seq.coord_rate >= 0 else seq.coord(1)
    separation = 2 * inf_x
    sampled = [seq[p] for p in indices[:50]]
    observed = min(star_dist(tag, a, b) for i, a in enumerate(sampled) for b in sampled[i + 1:])
    diag = {"case": "increasing-branch", "observed_min_separation": observed,
            "horizon": horizon}
    return CompactnessResult("non-compact", [], None, separation, diag)


# ---------------------------------------------------------------------------
# geodesic boundary


@dataclass
class BoundaryClass:
    interior: bool
    epsilon: object | None
    witness: dict | None
    reading: str


def classify_geodesic_boundary(tag: str, p: StarPoint, reading: str = "extension") -> BoundaryClass:
    """Decide whether ``p`` is geodesically interior.

    The ``extension`` reading asks that every geodesic through ``p`` extend to
    one containing it whose endpoints are at least ``epsilon`` from ``p``.
    The ``literal`` reading only asks for some geodesic through ``p`` with
    far endpoints.  ``epsilon`` is the largest admissible value.

    Under either reading a maximal geodesic through an inner branch point
    ends at the tip of its own branch on one side and, past the origin, at the
    tip of another branch; the extension reading lets the given geodesic pin
    that other branch.
    """
    _check_tag(tag)
    if reading not in ("extension", "literal"):
        raise ValueError("reading must be 'extension' or 'literal'")
    if p.x == 1:
        return BoundaryClass(False, None, {
            "family": "geodesics ending at the tip",
            "geodesic": [(1, p.branch), (0, 1)],
        }, reading)
    if p.is_origin:
        if tag == "d2":
            return BoundaryClass(True, Fraction(1), None, reading)
        if reading == "literal":
            return BoundaryClass(True, Fraction(1, 2), {"geodesic": [(1, 1), (1, 2)]}, reading)
        return BoundaryClass(False, None, {
            "family": "tip-to-tip geodesics through the origin on branches m, m + 1",
            "branches": "m > 1 / epsilon",
            "endpoint_distances": "1/m, 1/(m + 1)",
            "examples": [{"epsilon": Fraction(1, 10 ** k), "branches": (10 ** k + 1, 10 ** k + 2)}
                         for k in range(1, 4)],
        }, reading)
    s = branch_scale(tag, p.branch)
    own_tip = (1 - p.x) * s
    if reading == "extension":
        other = 0 if tag == "d1" else 1
    else:
        other = max(branch_scale(tag, m) for m in (1, 2) if m != p.branch)
    return BoundaryClass(True, min(own_tip, p.x * s + other), None, reading)
