"""Representation checks for interval-valued martingales.

An interval martingale [a_t, b_t] driven by a Brownian motion (or a
Rademacher walk) is C + {int g dB} exactly when its width b_t - a_t is
a.s. constant, equivalently when the differences of its Castaing members
are deterministic and constant in time. Both criteria are evaluated
here and cross-checked; on trees the integrand is recovered as well.
"""
from collections import namedtuple
import itertools
import logging
import numpy as np
from .convex import Interval
from .discrete import (BinaryTree, TreeProcess, point_integrand, point_transform,
                       random_interval_martingale, transform)
from .errors import (EmptyFamily, Inconsistent, NotInterval, NotMartingale,
                     NotRepresentable, OrderViolation)
from .finite import (Classification, aumann_expectation, classify_point_process,
                     interval_endpoint_martingale_check, interval_process)
from .simulate import (SampledProcess, default_pairs, ito_integral,
                       martingale_test)
from .utils import EPS, castaing_weights

LOG = logging.getLogger(__name__)
SAMPLED_TOL = 1e-10
FAMILY_SIZE = 9

__IntervalMartingaleInput = namedtuple('IntervalMartingaleInput', 'lo hi carrier')
WidthStats = namedtuple('WidthStats',
                        'times mean spread variance variance_stderr drift alternative_variance')
Recovery = namedtuple('Recovery', 'C g error')
RepresentationReport = namedtuple('RepresentationReport',
                                  'representable constant_set width condition_iii '
                                  'integrand roundtrip_error expectations witnesses')


class IntervalMartingaleInput(__IntervalMartingaleInput):
    """Endpoints of an interval process with their carrier: TreeProcess
    endpoints on a BinaryTree, or SampledProcess endpoints with the
    PathBundle that generated them"""
    __slots__ = ()

    @property
    def is_tree(self):
        return isinstance(self.carrier, BinaryTree)

    def widths(self):
        if self.is_tree:
            return [np.array([self.hi[k][s] - self.lo[k][s] for s in self.carrier.prefixes(k)])
                    for k in range(len(self.lo))]
        return self.hi.values - self.lo.values


def tree_input(lower, upper):
    for k in range(len(lower)):
        for s, a in lower[k].items():
            if a > upper[k][s] + EPS:
                raise OrderViolation('a > b at level {}, node {}'.format(k, s or 'root'),
                                     location=(k, s))
    return IntervalMartingaleInput(lower, upper, lower.tree)


def sampled_input(M, paths):
    """Wrap a SampledIntervalProcess and its paths"""
    return IntervalMartingaleInput(M.lo, M.hi, paths)


def _tree_interval_variables(M):
    return interval_process(M.lo.to_variables(), M.hi.to_variables())


def certify_martingale(M, alpha=0.01, pairs=None):
    """Raise NotMartingale unless both endpoints pass the martingale
    check: exact on trees, statistical on sampled paths"""
    if M.is_tree:
        if not interval_endpoint_martingale_check(M.lo.to_variables(), M.hi.to_variables(),
                                                  M.lo.filtration):
            raise NotMartingale('endpoints are not exact tree martingales')
        return
    pairs = pairs or default_pairs(M.carrier.grid)
    for name, endpoint in (('lower', M.lo), ('upper', M.hi)):
        report = martingale_test(endpoint, pairs, M.carrier, alpha)
        if not report.verdict:
            raise NotMartingale('{} endpoint rejected by the martingale test'.format(name))


def width_constancy_test(M, tol=None, alpha=0.01, pairs=None, check_martingale=True):
    """
    Is b_t - a_t a constant for each t (and hence across t)?

    Tree form compares node widths exactly (up to tol, default EPS).
    Sampled form compares the per-time sample variance of the width with
    tol (default 1e-10) and reports its standard error together with the
    variance e^t - 1 of the non-representable width exp(B_t - t/2).

    Returns (constant, WidthStats).
    """
    if check_martingale:
        certify_martingale(M, alpha, pairs)
    widths = M.widths()
    if M.is_tree:
        tol = EPS if tol is None else tol
        times = list(range(len(widths)))
        mean = np.array([w.mean() for w in widths])
        spread = np.array([w.max() - w.min() for w in widths])
        variance = np.array([w.var() for w in widths])
        variance_stderr = np.zeros(len(widths))
        alternative = None
        per_time = bool(np.all(spread <= tol))
    else:
        tol = SAMPLED_TOL if tol is None else tol
        times = M.carrier.grid.times.tolist()
        mean = widths.mean(axis=0)
        spread = widths.max(axis=0) - widths.min(axis=0)
        variance = widths.var(axis=0, ddof=1)
        centred = widths - mean
        fourth = np.mean(centred ** 4, axis=0)
        variance_stderr = np.sqrt(np.maximum(fourth - variance ** 2, 0.0) / widths.shape[0])
        alternative = np.expm1(M.carrier.grid.times)
        per_time = bool(np.all(variance <= tol))
    drift = float(mean.max() - mean.min())
    constant = per_time and drift <= tol
    LOG.debug('Width test: per-time constant %s, drift %g', per_time, drift)
    return constant, WidthStats(times, mean, spread, variance, variance_stderr, drift, alternative)


def iter_castaing_family(M, n=FAMILY_SIZE):
    """Endpoint mixtures lam * a + (1 - lam) * b for the dyadic lam
    sequence, generated one member at a time"""
    for lam in castaing_weights(n):
        if M.is_tree:
            levels = [{s: lam * a + (1 - lam) * M.hi[k][s] for s, a in M.lo[k].items()}
                      for k in range(len(M.lo))]
            yield TreeProcess(M.carrier, levels)
        else:
            yield SampledProcess(M.lo.grid, lam * M.lo.values + (1 - lam) * M.hi.values, True)


def castaing_family(M, n=FAMILY_SIZE):
    return list(iter_castaing_family(M, n))


def _tree_member_ok(member, first, filtration, tol):
    if classify_point_process(member.to_variables(), filtration) != Classification.MARTINGALE:
        raise NotMartingale('family member is not a tree martingale')
    diffs = [np.array([member[k][s] - first[k][s] for s in first[k]])
             for k in range(len(first))]
    if any(d.max() - d.min() > tol for d in diffs):
        return False
    return max(d[0] for d in diffs) - min(d[0] for d in diffs) <= tol


def _sampled_member_ok(member, first, tol):
    diff = member.values - first.values
    if np.any(diff.max(axis=0) - diff.min(axis=0) > tol):
        return False
    return np.ptp(diff.mean(axis=0)) <= tol


def condition_iii_test(family, tol=None, paths=None, alpha=0.01):
    """
    True iff every difference f^i - f^j is non-random and constant in time.
    Differences against the first member suffice: d_ij = d_i0 - d_j0.
    family may be any iterable; members are consumed one at a time.

    Keyword arguments:
    tol -- slack on spreads (default EPS on trees, 1e-9 for samples)
    paths -- PathBundle; when given, sampled members are martingale-tested
    alpha -- level of those tests
    """
    members = iter(family)
    first = next(members, None)
    if first is None:
        raise EmptyFamily('condition (iii) needs at least one martingale')
    tree = isinstance(first, TreeProcess)
    if tree:
        tol = EPS if tol is None else tol
        filtration = first.filtration
        _tree_member_ok(first, first, filtration, tol)
    else:
        tol = 1e-9 if tol is None else tol
        pairs = default_pairs(paths.grid) if paths is not None else None
    holds = True
    for member in itertools.chain([first], members):
        if not tree and pairs is not None:
            if not martingale_test(member, pairs, paths, alpha).verdict:
                raise NotMartingale('family member rejected by the martingale test')
        if member is first:
            continue
        ok = _tree_member_ok(member, first, filtration, tol) if tree else _sampled_member_ok(member, first, tol)
        holds = holds and ok
    return holds


def build_representation(C, g, carrier):
    """
    M_t = C + {int_0^t g dB}: endpoints C.lo + xi and C.hi + xi.

    Arguments:
    C -- Interval
    g -- TreeProcess integrand (levels 0..N-1) or adapted SampledProcess
    carrier -- BinaryTree or PathBundle
    """
    if not isinstance(C, Interval):
        raise NotInterval('representations are built from an interval C')
    if isinstance(carrier, BinaryTree):
        xi = point_transform(g)
        lower = TreeProcess(carrier, [{s: C.lo + x for s, x in level.items()} for level in xi.levels])
        upper = TreeProcess(carrier, [{s: C.hi + x for s, x in level.items()} for level in xi.levels])
        return IntervalMartingaleInput(lower, upper, carrier)
    xi = ito_integral(g, carrier)
    return IntervalMartingaleInput(SampledProcess(xi.grid, C.lo + xi.values, True),
                                   SampledProcess(xi.grid, C.hi + xi.values, True), carrier)


def _roundtrip_error(M, other):
    error = 0.0
    for k in range(len(M.lo)):
        for s in M.lo[k]:
            error = max(error, abs(M.lo[k][s] - other.lo[k][s]), abs(M.hi[k][s] - other.hi[k][s]))
    return error


def recover_integrand_tree(M, tol=None):
    """
    Recover (C, g) of a representable tree interval martingale with
    g_k(s) = (a_{k+1}(s+) - a_{k+1}(s-)) / 2 and C = [E a_0, E a_0 + width].
    The returned error is the Hausdorff error of the rebuilt process.
    """
    if not M.is_tree:
        raise NotRepresentable('integrand recovery is implemented on trees only')
    constant, _ = width_constancy_test(M, tol)
    if not constant:
        raise NotRepresentable('width b - a is not constant')
    tree = M.carrier
    g = TreeProcess(tree, [{s: (M.lo[k + 1][s + '+'] - M.lo[k + 1][s + '-']) / 2
                            for s in tree.prefixes(k)} for k in range(len(M.lo) - 1)])
    a0 = M.lo[0]['']
    C = Interval(a0, a0 + (M.hi[0][''] - a0))
    error = _roundtrip_error(M, build_representation(C, g, tree))
    return Recovery(C, g, error)


def expectation_path(M):
    """E(M_t) for each time: exact Aumann expectations on trees, the
    interval of endpoint sample means on paths"""
    if M.is_tree:
        return [aumann_expectation(F) for F in _tree_interval_variables(M)]
    return [Interval(lo, max(lo, hi))
            for lo, hi in zip(M.lo.values.mean(axis=0), M.hi.values.mean(axis=0))]


def degeneracy_gate(M):
    """A martingale with singleton E(M_0) must be degenerate at every time.
    Returns True when the implication holds (vacuously if its premise fails)"""
    variables = _tree_interval_variables(M)
    if not aumann_expectation(variables[0]).degenerate:
        return True
    if not interval_endpoint_martingale_check(M.lo.to_variables(), M.hi.to_variables(),
                                              M.lo.filtration):
        return True
    return all(F[w].degenerate for F in variables for w in F.space.atoms)


def _width_witness(M, stats):
    if M.is_tree:
        for k, w in enumerate(M.widths()):
            if w.max() - w.min() > EPS:
                nodes = M.carrier.prefixes(k)
                return {'level': k, 'narrowest': nodes[int(np.argmin(w))],
                        'widest': nodes[int(np.argmax(w))],
                        'widths': [float(w.min()), float(w.max())]}
        return {'drift': stats.drift}
    i = int(np.argmax(stats.variance))
    return {'time': stats.times[i], 'width_variance': float(stats.variance[i]),
            'stderr': float(stats.variance_stderr[i])}


def theorem_main_crosscheck(M, tol=None, alpha=0.01, n_castaing=FAMILY_SIZE):
    """
    Evaluate the width criterion and the Castaing-difference criterion,
    require them to agree and, on trees, exhibit the integrand and check
    M_t = E(M_0) + transform({g})_t.
    """
    width_ok, stats = width_constancy_test(M, tol, alpha)
    condition_iii = condition_iii_test(iter_castaing_family(M, n_castaing),
                                       None if tol is None or not M.is_tree else tol)
    if width_ok != condition_iii:
        raise Inconsistent('width test says {} but condition (iii) says {}'.format(width_ok, condition_iii))
    expectations = expectation_path(M)
    constant_set = expectations[0]
    integrand, error, witnesses = None, None, {}
    representable = width_ok
    if width_ok and M.is_tree:
        recovery = recover_integrand_tree(M, tol)
        integrand, constant_set = recovery.g, recovery.C
        I = transform(point_integrand(M.carrier, lambda s: recovery.g[len(s)][s]))
        error = 0.0
        for k, level in enumerate(I.levels):
            for s, body in level.items():
                error = max(error, abs(constant_set.lo + body.lo - M.lo[k][s]),
                            abs(constant_set.hi + body.hi - M.hi[k][s]))
        representable = error <= (EPS if tol is None else tol)
    if not width_ok:
        witnesses = _width_witness(M, stats)
    LOG.info('Representation check: width %s, condition (iii) %s', width_ok, condition_iii)
    return RepresentationReport(representable, constant_set if representable else None, stats,
                                condition_iii, integrand, error, expectations, witnesses)


def random_tree_martingale(tree, rng, representable=True):
    """IntervalMartingaleInput drawn by discrete.random_interval_martingale"""
    drawn = random_interval_martingale(tree, rng, representable)
    return IntervalMartingaleInput(drawn.lower, drawn.upper, tree)


def width_perturbed_martingale(tree, rng):
    """Non-representable tree martingale whose width moves at the root"""
    return random_tree_martingale(tree, rng, representable=False)
