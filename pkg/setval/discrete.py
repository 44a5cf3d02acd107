"""Set-valued martingale transform on a binary Rademacher tree.

Nodes are sign strings such as '+-+'; leaves of length N are the atoms
of a uniform space with 2**N atoms, and P_k groups leaves by their
length-k prefix. Increments are unit signs, so all the arithmetic on
dyadic inputs is exact.
"""
from collections import namedtuple
import itertools
import logging
import numpy as np
from .convex import (Interval, ConvexBody, convex_body, hukuhara_diff,
                     minkowski_add, scalar_mul, segment, set_norm)
from .errors import (DegenerateInput, IdenticalIntegrands, IncompleteProcess, InvalidConfig,
                     NotInterval)
from .finite import (Classification, FiniteProbSpace, Filtration, Partition,
                     PointRV, SetRV, aumann_expectation, classify_point_process,
                     is_degenerate_by_expectation, step_classifications, combine_steps)
from .utils import EPS, castaing_weights

LOG = logging.getLogger(__name__)
MAX_DEPTH = 16

Ex1Report = namedtuple('Ex1Report',
                       'expectations first_nondegenerate classification steps witness passed')
EzzakiReport = namedtuple('EzzakiReport',
                          'member_classes classification expectations norms bounds passed')
SegmentReport = namedtuple('SegmentReport',
                           'lower_class upper_class classification steps strict_at passed')
HukuharaReport = namedtuple('HukuharaReport', 'increments defined martingale_difference')
SetIntegrandReport = namedtuple('SetIntegrandReport', 'expectations classification')
RandomIntervalMartingale = namedtuple('RandomIntervalMartingale', 'lower upper C g')


class BinaryTree:
    """Binary tree of depth N carrying the uniform space on {+,-}^N"""
    def __init__(self, depth):
        if not 0 <= depth <= MAX_DEPTH:
            raise InvalidConfig('tree depth must lie in [0, {}]'.format(MAX_DEPTH))
        self.depth = depth
        self._space = None
        self._filtration = None
        self._prefixes = {}

    def prefixes(self, level):
        """All nodes at a level, '+' branches first"""
        if level not in self._prefixes:
            self._prefixes[level] = [''.join(signs)
                                     for signs in itertools.product('+-', repeat=level)]
        return self._prefixes[level]

    @property
    def space(self):
        if self._space is None:
            self._space = FiniteProbSpace.uniform(self.prefixes(self.depth))
        return self._space

    @property
    def filtration(self):
        if self._filtration is None:
            leaves = self.space.atoms
            partitions = []
            for level in range(self.depth + 1):
                cells = {}
                for leaf in leaves:
                    cells.setdefault(leaf[:level], []).append(leaf)
                partitions.append(Partition(self.space, cells.values()))
            self._filtration = Filtration(partitions)
        return self._filtration

    def __repr__(self):
        return 'BinaryTree(depth={})'.format(self.depth)


class TreeProcess:
    """Adapted process on a tree: levels[k] maps each level-k node to
    a value (a float or a convex body)"""
    def __init__(self, tree, levels):
        self.tree = tree
        self.levels = [dict(level) for level in levels]
        for k, level in enumerate(self.levels):
            missing = set(tree.prefixes(k)) - set(level)
            if missing:
                raise IncompleteProcess('level {} has no value at {}'.format(
                    k, sorted(missing)[:3]))

    def __getitem__(self, k):
        return self.levels[k]

    def __len__(self):
        return len(self.levels)

    @property
    def set_valued(self):
        return isinstance(self.levels[0][''], (Interval, ConvexBody))

    def values(self):
        for level in self.levels:
            yield from level.values()

    def to_variables(self):
        """List of SetRV (or PointRV) on the tree's leaf space, one per level"""
        space = self.tree.space
        kind = SetRV if self.set_valued else PointRV
        return [kind(space, {leaf: level[leaf[:k]] for leaf in space.atoms})
                for k, level in enumerate(self.levels)]

    @property
    def filtration(self):
        return Filtration(self.tree.filtration.partitions[:len(self.levels)])


def constant_integrand(tree, body):
    """G_k = body at every node of levels 0..N-1"""
    return TreeProcess(tree, [{s: body for s in tree.prefixes(k)} for k in range(tree.depth)])


def point_integrand(tree, fn):
    """Degenerate integrand {g} with g(prefix) = fn(prefix)"""
    levels = []
    for k in range(tree.depth):
        levels.append({s: Interval(fn(s), fn(s)) for s in tree.prefixes(k)})
    return TreeProcess(tree, levels)


def _point_value(value):
    if isinstance(value, Interval):
        return value.lo
    return float(value)


def transform(G):
    """
    Discrete set-valued stochastic integral: I_0 = {0} and
    I_{n+1}(s+) = I_n(s) + G_n(s), I_{n+1}(s-) = I_n(s) + (-1) G_n(s).
    This is the per-atom value of the decomposable hull of the point
    transforms of all selections of G.

    >>> I = transform(constant_integrand(BinaryTree(2), Interval(0, 1)))
    >>> I[2]['+-']
    Interval(lo=-1.0, hi=1.0)
    """
    tree = G.tree
    dimension = G[0][''].dimension if len(G) else 1
    levels = [{'': convex_body(np.zeros((1, dimension)))}]
    for k in range(len(G)):
        level = {}
        for s, current in levels[k].items():
            step = G[k][s]
            level[s + '+'] = minkowski_add(current, step)
            level[s + '-'] = minkowski_add(current, scalar_mul(-1, step))
        levels.append(level)
    LOG.debug('Transformed integrand over %d levels', len(G))
    return TreeProcess(tree, levels)


def point_transform(g):
    """Classical discrete stochastic integral of a point integrand"""
    levels = [{'': 0.0}]
    for k in range(len(g)):
        level = {}
        for s, current in levels[k].items():
            step = _point_value(g[k][s])
            level[s + '+'] = current + step
            level[s + '-'] = current - step
        levels.append(level)
    return TreeProcess(g.tree, levels)


def verify_ex1(G):
    """
    Certify that the transform of a non-degenerate integrand starts at
    {0}, acquires a non-degenerate expectation and is a submartingale but
    not a martingale.

    Raises DegenerateInput (with the classical martingale report attached)
    when G is point-valued everywhere.
    """
    I = transform(G)
    variables = I.to_variables()
    filtration = I.filtration
    expectations = [aumann_expectation(F) for F in variables]
    steps = step_classifications(variables, filtration)
    classification = combine_steps(steps)
    if all(body.degenerate for body in G.values()):
        report = Ex1Report(expectations, None, classification, steps, None,
                           classification == Classification.MARTINGALE)
        raise DegenerateInput('integrand is degenerate; transform is a classical martingale', report)
    first = next((n for n, E in enumerate(expectations) if not E.degenerate), None)
    witness = None
    if first is not None:
        _, witness = is_degenerate_by_expectation(variables[first])
    passed = (expectations[0].degenerate and first is not None and
              classification == Classification.SUBMARTINGALE)
    LOG.info('Set-valued integral: %s, first non-degenerate mean at step %s',
             classification.value, first)
    return Ex1Report(expectations, first, classification, steps, witness, passed)


def ezzaki_counterexample(depth):
    """
    f_n = sum of the first n signs, M_n = [min(f_n, 2 f_n), max(f_n, 2 f_n)].
    Every Castaing member (2 - lam) f_n is a martingale while M is not, and
    the integrated norms obey int |M_n| <= 2 int |f_n| < inf.
    """
    tree = BinaryTree(depth)
    ones = TreeProcess(tree, [{s: 1.0 for s in tree.prefixes(k)} for k in range(depth)])
    f = point_transform(ones)
    filtration = f.filtration
    M = TreeProcess(tree, [{s: segment(x, 2 * x) for s, x in level.items()}
                           for level in f.levels])
    member_classes = []
    for lam in castaing_weights(9):
        member = TreeProcess(tree, [{s: lam * x + 2 * (1 - lam) * x for s, x in level.items()}
                                    for level in f.levels])
        member_classes.append(classify_point_process(member.to_variables(), filtration))
    variables = M.to_variables()
    classification = combine_steps(step_classifications(variables, filtration))
    space = tree.space
    norms, bounds = [], []
    for F, fn in zip(variables, f.to_variables()):
        norms.append(sum(space.p(w) * set_norm(F[w]) for w in space.atoms))
        bounds.append(2 * sum(space.p(w) * abs(fn[w]) for w in space.atoms))
    passed = (all(c == Classification.MARTINGALE for c in member_classes) and
              classification != Classification.MARTINGALE and
              all(a <= b + EPS and np.isfinite(b) for a, b in zip(norms, bounds)))
    return EzzakiReport(member_classes, classification,
                        [aumann_expectation(F) for F in variables], norms, bounds, passed)


def segment_process_discrete(f, g):
    """
    Segment process M_n = [min(xi_n, eta_n), max(xi_n, eta_n)] of two point
    transforms. min is a supermartingale, max a submartingale and M a
    strict set-valued submartingale when the integrands differ.

    Arguments:
    f, g -- degenerate integrands (TreeProcess of singleton intervals)
    """
    for name, integrand in (('f', f), ('g', g)):
        wide = next(((k, s) for k in range(len(integrand)) for s, value in integrand[k].items()
                     if not getattr(value, 'degenerate', True)), None)
        if wide is not None:
            raise NotInterval('{} is not degenerate at level {}, node {!r}'.format(name, *wide))
    tree = f.tree
    xi, eta = point_transform(f), point_transform(g)
    filtration = xi.filtration
    lower = TreeProcess(tree, [{s: min(x, level_eta[s]) for s, x in level.items()}
                               for level, level_eta in zip(xi.levels, eta.levels)])
    upper = TreeProcess(tree, [{s: max(x, level_eta[s]) for s, x in level.items()}
                               for level, level_eta in zip(xi.levels, eta.levels)])
    M = TreeProcess(tree, [{s: Interval(lower[k][s], upper[k][s]) for s in lower[k]}
                           for k in range(len(lower))])
    steps = step_classifications(M.to_variables(), filtration)
    classification = combine_steps(steps)
    lower_class = classify_point_process(lower.to_variables(), filtration)
    upper_class = classify_point_process(upper.to_variables(), filtration)
    strict_at = next((k for k, step in enumerate(steps)
                      if step == Classification.SUBMARTINGALE), None)
    identical = all(abs(_point_value(f[k][s]) - _point_value(g[k][s])) <= EPS
                    for k in range(len(f)) for s in f[k])
    if identical:
        report = SegmentReport(lower_class, upper_class, classification, steps, None,
                               classification == Classification.MARTINGALE)
        raise IdenticalIntegrands('integrands agree; the segment process is degenerate', report)
    passed = (lower_class in (Classification.SUPERMARTINGALE, Classification.MARTINGALE) and
              upper_class in (Classification.SUBMARTINGALE, Classification.MARTINGALE) and
              classification == Classification.SUBMARTINGALE)
    return SegmentReport(lower_class, upper_class, classification, steps, strict_at, passed)


def hukuhara_increments(M):
    """
    Hukuhara increments u_{n+1}(s+-) = M_{n+1}(s+-) - M_n(s) of an
    interval-valued tree process, None where undefined, and whether
    they form a martingale difference sequence: E(u_{n+1} | P_n) = [0, 0]
    on every cell.
    """
    increments = []
    mds = True
    zero = Interval(0, 0)
    for k in range(len(M) - 1):
        level = {}
        for s, current in M[k].items():
            up = hukuhara_diff(M[k + 1][s + '+'], current)
            down = hukuhara_diff(M[k + 1][s + '-'], current)
            level[s + '+'], level[s + '-'] = up, down
            if up is None or down is None:
                mds = False
                continue
            mean = minkowski_add(scalar_mul(0.5, up), scalar_mul(0.5, down))
            mds = mds and abs(mean.lo - zero.lo) <= EPS and abs(mean.hi - zero.hi) <= EPS
        increments.append(level)
    defined = all(u is not None for level in increments for u in level.values())
    return HukuharaReport(increments, defined, mds and defined)


def set_integrand_counterexample(C, G):
    """M_n = C + transform(G)_n: a set-valued integrand added to the
    expected initial set. Not a martingale whenever G is non-degenerate."""
    I = transform(G)
    M = TreeProcess(G.tree, [{s: minkowski_add(C, body) for s, body in level.items()}
                             for level in I.levels])
    variables = M.to_variables()
    return SetIntegrandReport([aumann_expectation(F) for F in variables],
                              combine_steps(step_classifications(variables, M.filtration)))


def _dyadic(rng, low, high, denominator):
    return int(rng.integers(low, high + 1)) / denominator


def random_interval_martingale(tree, rng, representable=True):
    """
    Random interval martingale [a_n, b_n] on a tree with dyadic data.
    a_n = C.lo + transform({g}); b_n = a_n + w_n where w is constant when
    representable, otherwise a positive martingale that moves at the root.
    """
    lo = _dyadic(rng, -8, 8, 4)
    C = Interval(lo, lo + _dyadic(rng, 0 if representable else 4, 8, 4))
    g = TreeProcess(tree, [{s: _dyadic(rng, -8, 8, 8) for s in tree.prefixes(k)}
                           for k in range(tree.depth)])
    xi = point_transform(g)
    width_levels = [{'': C.width}]
    for k in range(tree.depth):
        level = {}
        for s, w in width_levels[k].items():
            if representable:
                h = 0.0
            elif k == 0:
                h = w / 4
            else:
                h = w * _dyadic(rng, -2, 2, 4)
            level[s + '+'], level[s + '-'] = w + h, w - h
        width_levels.append(level)
    lower = TreeProcess(tree, [{s: C.lo + x for s, x in level.items()} for level in xi.levels])
    upper = TreeProcess(tree, [{s: lower[k][s] + width_levels[k][s] for s in lower[k]}
                               for k in range(len(lower))])
    return RandomIntervalMartingale(lower, upper, C, g)
