"""Exact arithmetic of closed bounded convex sets: intervals in R and
convex hulls of finite point sets in R^r (r <= 3)"""
from collections import namedtuple
import logging
import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull
from .errors import DimensionMismatch, NotInterval, OrderViolation
from .utils import EPS, HULL_EPS, MAX_DIMENSION, as_points, check_finite

LOG = logging.getLogger(__name__)
__Interval = namedtuple('Interval', 'lo hi')


class Interval(__Interval):
    """Closed interval [lo, hi] with finite endpoints

    >>> Interval(0, 1)
    Interval(lo=0.0, hi=1.0)
    >>> Interval(3, 3).degenerate
    True
    """
    __slots__ = ()
    dimension = 1

    def __new__(cls, lo, hi):
        lo, hi = float(lo), float(hi)
        check_finite(lo, hi)
        if lo > hi:
            raise OrderViolation('lower endpoint {} above upper endpoint {}'.format(lo, hi))
        # normalise -0.0 so that equality and JSON output are structural
        return super().__new__(cls, lo + 0.0, hi + 0.0)

    @property
    def width(self):
        return self.hi - self.lo

    @property
    def degenerate(self):
        return self.lo == self.hi

    @property
    def generators(self):
        if self.degenerate:
            return np.array([[self.lo]])
        return np.array([[self.lo], [self.hi]])

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)


def _affine_frame(pts):
    """Return an origin and an orthonormal basis (k by r) for the
    affine hull of a set of points"""
    origin = pts.mean(axis=0)
    if len(pts) == 1:
        return origin, np.zeros((0, pts.shape[1]))
    _, singular, vt = np.linalg.svd(pts - origin, full_matrices=False)
    rank = int(np.sum(singular > EPS * max(1.0, singular[0])))
    return origin, vt[:rank]


def _extreme_points(pts):
    """Prune a set of points down to the vertices of its convex hull,
    sorted lexicographically"""
    pts = np.unique(pts, axis=0)
    origin, basis = _affine_frame(pts)
    if len(basis) == 0:
        vertices = pts[:1]
    elif len(basis) == 1:
        coords = (pts - origin) @ basis[0]
        vertices = pts[[np.argmin(coords), np.argmax(coords)]]
    else:
        coords = (pts - origin) @ basis.T
        vertices = pts[ConvexHull(coords).vertices]
    order = np.lexsort(vertices.T[::-1])
    return vertices[order]


class ConvexBody:
    """Convex hull of a finite, nonempty set of points in R^r.
    Redundant generators are pruned on construction.

    >>> ConvexBody([[0, 0], [1, 0], [0.5, 0], [0, 1]]).points.tolist()
    [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]
    """
    __slots__ = ('points',)

    def __init__(self, points):
        pts = as_points(points)
        if pts.shape[1] > MAX_DIMENSION:
            raise DimensionMismatch('dimension {} exceeds {}'.format(pts.shape[1], MAX_DIMENSION))
        pts = _extreme_points(pts)
        pts.setflags(write=False)
        self.points = pts

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def generators(self):
        return self.points

    @property
    def degenerate(self):
        return len(self.points) == 1

    def __eq__(self, other):
        if not isinstance(other, ConvexBody):
            return NotImplemented
        return (self.points.shape == other.points.shape and
                np.allclose(self.points, other.points, rtol=0.0, atol=EPS))

    __hash__ = None

    def __repr__(self):
        return 'ConvexBody({})'.format(self.points.tolist())


def convex_body(points):
    """Construct the convex hull of points: an Interval when r = 1,
    otherwise a ConvexBody

    >>> convex_body([2.0, -1.0, 0.5])
    Interval(lo=-1.0, hi=2.0)
    """
    pts = np.array(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts.reshape(-1, 1)
    pts = as_points(pts)
    if pts.shape[1] == 1:
        return Interval(pts[:, 0].min(), pts[:, 0].max())
    return ConvexBody(pts)


def as_body(value):
    """Coerce a body, a real or a point to a convex body"""
    if isinstance(value, (Interval, ConvexBody)):
        return value
    pts = as_points(value)
    return convex_body(pts)


def _check_dimensions(A, B):
    if A.dimension != B.dimension:
        raise DimensionMismatch('dimensions {} and {} differ'.format(A.dimension, B.dimension))


def mk_interval(a, b):
    """Construct [a, b], raising OrderViolation if a > b

    >>> mk_interval(1, 0)
    Traceback (most recent call last):
    ...
    setval.errors.OrderViolation: lower endpoint 1.0 above upper endpoint 0.0
    """
    return Interval(a, b)


def minkowski_add(A, B):
    """Minkowski sum {x + y: x in A, y in B}

    >>> minkowski_add(Interval(1, 2), Interval(3, 5))
    Interval(lo=4.0, hi=7.0)
    """
    _check_dimensions(A, B)
    if isinstance(A, Interval) and isinstance(B, Interval):
        return Interval(A.lo + B.lo, A.hi + B.hi)
    sums = A.generators[:, None, :] + B.generators[None, :, :]
    return convex_body(sums.reshape(-1, A.dimension))


def minkowski_sum(bodies):
    """Minkowski sum of a nonempty sequence of bodies"""
    bodies = iter(bodies)
    total = next(bodies)
    for body in bodies:
        total = minkowski_add(total, body)
    return total


def scalar_mul(lam, A):
    """The set {lam * x: x in A}

    >>> scalar_mul(-1, Interval(0, 1))
    Interval(lo=-1.0, hi=0.0)
    >>> scalar_mul(0, Interval(-3, 2))
    Interval(lo=0.0, hi=0.0)
    """
    lam = float(lam)
    check_finite(lam)
    if isinstance(A, Interval):
        if lam >= 0:
            return Interval(lam * A.lo, lam * A.hi)
        return Interval(lam * A.hi, lam * A.lo)
    return convex_body(lam * A.generators)


def translate(A, x):
    """Shift a body by a point"""
    return minkowski_add(A, as_body(x))


def width(A):
    if not isinstance(A, Interval):
        raise NotInterval('width is only defined for intervals')
    return A.width


def support(A, direction):
    """Support function h_A(u) = max over x in A of <x, u>"""
    direction = np.asarray(direction, dtype=np.float64).reshape(-1)
    if len(direction) != A.dimension:
        raise DimensionMismatch('direction has dimension {}'.format(len(direction)))
    return float(np.max(A.generators @ direction))


def _in_hull(x, vertices):
    """Exact linear programming feasibility test for x in conv(vertices)"""
    n = len(vertices)
    a_eq = np.vstack((vertices.T, np.ones((1, n))))
    b_eq = np.append(x, 1.0)
    result = linprog(np.zeros(n), A_eq=a_eq, b_eq=b_eq, bounds=(0, None),
                     method='highs',
                     options={'primal_feasibility_tolerance': 1e-10})
    return result.status == 0


def _segment_distance(p, a, b):
    direction = b - a
    length_sq = direction @ direction
    t = 0.0 if length_sq == 0 else np.clip((p - a) @ direction / length_sq, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * direction)))


def _distance_to_hull(x, pts):
    """Euclidean distance from x to conv(pts). The hull is expressed in
    its own affine frame; the orthogonal part is added back at the end"""
    origin, basis = _affine_frame(pts)
    offset = x - origin
    local = basis @ offset
    perp = offset - basis.T @ local
    rank = len(basis)
    if rank == 0:
        inner = 0.0
    elif rank == 1:
        coords = (pts - origin) @ basis[0]
        inner = max(coords.min() - local[0], 0.0, local[0] - coords.max())
    else:
        coords = (pts - origin) @ basis.T
        hull = ConvexHull(coords)
        if np.all(hull.equations[:, :-1] @ local + hull.equations[:, -1] <= EPS):
            inner = 0.0
        elif rank == 2:
            inner = min(_segment_distance(local, coords[i], coords[j])
                        for i, j in hull.simplices)
        else:
            inner = min(_distance_to_hull(local, coords[simplex])
                        for simplex in hull.simplices)
    return float(np.sqrt(perp @ perp + inner ** 2))


def contains(A, B, tol=None):
    """True iff B is a subset of A.
    Exact on endpoints for intervals (up to EPS); for r >= 2 each
    generator of B must pass an LP membership test in conv(A), or
    lie within tol (default HULL_EPS) of it.

    >>> contains(Interval(-1, 1), Interval(0, 0))
    True
    >>> contains(Interval(0, 1), Interval(-1, 2))
    False
    """
    _check_dimensions(A, B)
    if isinstance(A, Interval) and isinstance(B, Interval):
        tol = EPS if tol is None else tol
        return A.lo <= B.lo + tol and B.hi <= A.hi + tol
    tol = HULL_EPS if tol is None else tol
    vertices = A.generators
    for point in B.generators:
        if _in_hull(point, vertices):
            continue
        if _distance_to_hull(point, vertices) > tol:
            return False
    return True


def hausdorff_distance(A, B):
    """Hausdorff distance between two bodies. For polytopes the sup of
    the distance to the other body is attained at a vertex.

    >>> hausdorff_distance(Interval(0, 1), Interval(1, 3))
    2.0
    """
    _check_dimensions(A, B)
    if isinstance(A, Interval) and isinstance(B, Interval):
        return max(abs(A.lo - B.lo), abs(A.hi - B.hi))
    gaps = [_distance_to_hull(v, B.generators) for v in A.generators]
    gaps += [_distance_to_hull(v, A.generators) for v in B.generators]
    return max(gaps)


def bodies_equal(A, B, tol=None):
    if tol is None:
        tol = EPS if isinstance(A, Interval) and isinstance(B, Interval) else HULL_EPS
    return hausdorff_distance(A, B) <= tol


def set_norm(A):
    """sup of |x| over A, attained at a generator

    >>> set_norm(convex_body([[3, 4], [0, 0]]))
    5.0
    """
    if isinstance(A, Interval):
        return max(abs(A.lo), abs(A.hi))
    return float(np.max(np.linalg.norm(A.generators, axis=1)))


def hukuhara_diff(A, B):
    """The unique C with B + C = A, or None when no such C exists

    >>> hukuhara_diff(Interval(0, 3), Interval(0, 1))
    Interval(lo=0.0, hi=2.0)
    >>> hukuhara_diff(Interval(0, 1), Interval(0, 3)) is None
    True
    """
    if not (isinstance(A, Interval) and isinstance(B, Interval)):
        raise NotInterval('Hukuhara differences are implemented for intervals only')
    if A.width + EPS < B.width:
        return None
    lo = A.lo - B.lo
    return Interval(lo, max(A.hi - B.hi, lo))


def segment(x, y):
    """conv{x, y}

    >>> segment(2, -1)
    Interval(lo=-1.0, hi=2.0)
    """
    x, y = as_points(x), as_points(y)
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch('points of dimension {} and {}'.format(x.shape[1], y.shape[1]))
    return convex_body(np.vstack((x, y)))


def body_to_dict(A):
    if isinstance(A, Interval):
        return {'lo': A.lo, 'hi': A.hi}
    return {'dim': A.dimension, 'points': A.generators.tolist()}


def body_from_dict(data):
    """Inverse of body_to_dict

    >>> body_from_dict({'lo': 0, 'hi': 2})
    Interval(lo=0.0, hi=2.0)
    """
    if 'lo' in data:
        return Interval(data['lo'], data['hi'])
    pts = as_points(data['points'])
    if pts.shape[1] != data['dim']:
        raise DimensionMismatch('points do not have dimension {}'.format(data['dim']))
    return convex_body(pts)
