"""Random-set calculus on finite probability spaces.

Aumann expectation, set-valued conditional expectation, selections,
decomposable hulls, Castaing sequences and martingale classification.
Everything here is exact up to the endpoint slack EPS (intervals) or
the hull slack HULL_EPS (r >= 2).
"""
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
import itertools
import logging
import numpy as np
from .convex import (Interval, as_body, bodies_equal, body_from_dict,
                     contains, convex_body, minkowski_sum, scalar_mul)
from .errors import (EmptyFamily, LengthMismatch, NotAdapted, NotInterval,
                     OrderViolation, SetValuedError)
from .utils import EPS, castaing_weights

LOG = logging.getLogger(__name__)
MeanWitness = namedtuple('MeanWitness', 'f1 f2 cell selection')


class Classification(str, Enum):
    MARTINGALE = 'martingale'
    SUBMARTINGALE = 'submartingale'
    SUPERMARTINGALE = 'supermartingale'
    NONE = 'none'

    @staticmethod
    def from_flags(sub, sup):
        if sub and sup:
            return Classification.MARTINGALE
        if sub:
            return Classification.SUBMARTINGALE
        if sup:
            return Classification.SUPERMARTINGALE
        return Classification.NONE


class FiniteProbSpace:
    """Finite set of atoms with strictly positive probabilities"""
    def __init__(self, atoms, probabilities):
        self.atoms = tuple(atoms)
        self.probabilities = np.array(probabilities, dtype=np.float64)
        if len(set(self.atoms)) != len(self.atoms):
            raise SetValuedError('atom ids must be distinct')
        if len(self.atoms) != len(self.probabilities) or not self.atoms:
            raise SetValuedError('need one probability per atom')
        if np.any(self.probabilities <= 0):
            raise SetValuedError('atom probabilities must be strictly positive')
        if abs(self.probabilities.sum() - 1.0) > EPS:
            raise SetValuedError('probabilities sum to {}'.format(self.probabilities.sum()))
        self._prob = dict(zip(self.atoms, self.probabilities.tolist()))

    @staticmethod
    def uniform(atoms):
        atoms = list(atoms)
        return FiniteProbSpace(atoms, np.full(len(atoms), 1.0 / len(atoms)))

    def p(self, atom):
        return self._prob[atom]

    def prob(self, cell):
        return sum(self._prob[atom] for atom in cell)

    def __len__(self):
        return len(self.atoms)

    def __repr__(self):
        return 'FiniteProbSpace({} atoms)'.format(len(self.atoms))


class Partition:
    """Finite partition of the atoms of a space, playing the role of
    a sigma-algebra"""
    def __init__(self, space, cells):
        self.space = space
        self.cells = tuple(tuple(cell) for cell in cells)
        seen = [atom for cell in self.cells for atom in cell]
        if any(not cell for cell in self.cells):
            raise SetValuedError('partition cells must be nonempty')
        if len(seen) != len(set(seen)) or set(seen) != set(space.atoms):
            raise SetValuedError('cells must be disjoint and cover the space')
        self._cell_of = {atom: i for i, cell in enumerate(self.cells) for atom in cell}

    @staticmethod
    def trivial(space):
        return Partition(space, [space.atoms])

    @staticmethod
    def finest(space):
        return Partition(space, [[atom] for atom in space.atoms])

    def cell_index(self, atom):
        return self._cell_of[atom]

    def refines(self, other):
        """True if every cell of self lies inside one cell of other"""
        return all(len({other.cell_index(atom) for atom in cell}) == 1
                   for cell in self.cells)

    def __len__(self):
        return len(self.cells)


class Filtration:
    """Increasing sequence of partitions P_0, ..., P_N"""
    def __init__(self, partitions):
        self.partitions = list(partitions)
        if not self.partitions:
            raise EmptyFamily('a filtration needs at least one partition')
        for k, (coarse, fine) in enumerate(zip(self.partitions, self.partitions[1:])):
            if not fine.refines(coarse):
                raise SetValuedError('P_{} does not refine P_{}'.format(k + 1, k))

    @property
    def space(self):
        return self.partitions[0].space

    def __getitem__(self, k):
        return self.partitions[k]

    def __len__(self):
        return len(self.partitions)


class SetRV:
    """Atom-indexed convex-set-valued random variable"""
    def __init__(self, space, values):
        self.space = space
        self.values = {atom: as_body(values[atom]) for atom in space.atoms}
        dims = {body.dimension for body in self.values.values()}
        if len(dims) != 1:
            raise SetValuedError('values have mixed dimensions {}'.format(sorted(dims)))
        self.dimension = dims.pop()

    def __getitem__(self, atom):
        return self.values[atom]

    @staticmethod
    def constant(space, body):
        return SetRV(space, {atom: body for atom in space.atoms})


class PointRV:
    """Atom-indexed point-valued random variable; values are floats
    when r = 1 and arrays otherwise"""
    def __init__(self, space, values):
        self.space = space
        self.values = {}
        for atom in space.atoms:
            value = np.asarray(values[atom], dtype=np.float64)
            self.values[atom] = float(value) if value.size == 1 and value.ndim <= 1 else value
        first = self.values[space.atoms[0]]
        self.dimension = 1 if isinstance(first, float) else len(first)

    def __getitem__(self, atom):
        return self.values[atom]

    def mean(self):
        return expectation(self)


def expectation(f):
    """E(f) of a point-valued random variable"""
    space = f.space
    if f.dimension == 1:
        return float(sum(space.p(atom) * f[atom] for atom in space.atoms))
    return sum(space.p(atom) * f[atom] for atom in space.atoms)


def is_measurable(X, partition):
    """True if X (SetRV or PointRV) is constant on each cell"""
    for cell in partition.cells:
        first = X[cell[0]]
        for atom in cell[1:]:
            if isinstance(X, SetRV):
                if not bodies_equal(first, X[atom]):
                    return False
            elif np.max(np.abs(np.asarray(first) - np.asarray(X[atom]))) > EPS:
                return False
    return True


def aumann_expectation(F):
    """E(F) as the Minkowski sum of p_i * F(w_i)

    >>> space = FiniteProbSpace.uniform(['w1', 'w2'])
    >>> aumann_expectation(SetRV(space, {'w1': Interval(1, 2), 'w2': Interval(-2, -1)}))
    Interval(lo=-0.5, hi=0.5)
    """
    space = F.space
    return minkowski_sum(scalar_mul(space.p(atom), F[atom]) for atom in space.atoms)


def conditional_expectation(F, partition):
    """E(F | P): on each cell A the value sum_{w in A} p_w F(w) / P(A)"""
    space = F.space
    values = {}
    for cell in partition.cells:
        mass = space.prob(cell)
        body = minkowski_sum(scalar_mul(space.p(atom) / mass, F[atom]) for atom in cell)
        for atom in cell:
            values[atom] = body
    return SetRV(space, values)


def conditional_mean(f, partition):
    """E(f | P) of a point-valued random variable"""
    space = f.space
    values = {}
    for cell in partition.cells:
        mass = space.prob(cell)
        mean = sum(space.p(atom) / mass * np.asarray(f[atom]) for atom in cell)
        for atom in cell:
            values[atom] = mean
    return PointRV(space, values)


def decomposable_hull(fs):
    """Per-atom convex hull of a family of selections.
    On a finite space the decomposable hull decouples across atoms."""
    fs = list(fs)
    if not fs:
        raise EmptyFamily('decomposable hull of an empty family')
    space = fs[0].space
    if any(f.space is not space for f in fs):
        raise SetValuedError('selections live on different spaces')
    values = {}
    for atom in space.atoms:
        pts = np.array([np.atleast_1d(f[atom]) for f in fs])
        values[atom] = convex_body(pts)
    return SetRV(space, values)


def castaing_sequence(F, n):
    """
    n selections lam_k * lo + (1 - lam_k) * hi of an interval-valued F,
    lam_k running through 0, 1, 1/2, 1/4, 3/4, ...

    Arguments:
    F -- interval-valued SetRV
    n -- number of selections (>= 1)
    """
    if F.dimension != 1:
        raise NotInterval('Castaing sequences are built for interval-valued F only')
    if n < 1:
        raise ValueError('need at least one selection')
    return [PointRV(F.space, {atom: lam * F[atom].lo + (1 - lam) * F[atom].hi
                              for atom in F.space.atoms})
            for lam in castaing_weights(n)]


def _check_process(process, filtration):
    if len(process) != len(filtration):
        raise LengthMismatch('{} variables for {} partitions'.format(len(process), len(filtration)))
    for k, (X, partition) in enumerate(zip(process, filtration.partitions)):
        if not is_measurable(X, partition):
            raise NotAdapted('variable {} is not measurable w.r.t. P_{}'.format(k, k))


def step_classifications(process, filtration):
    """Classification of each one-step transition k -> k + 1, comparing
    E(F_{k+1} | P_k) with F_k on every cell of P_k by inclusion both ways"""
    _check_process(process, filtration)
    steps = []
    for k in range(len(process) - 1):
        partition = filtration[k]
        expected = conditional_expectation(process[k + 1], partition)
        sub = sup = True
        for cell in partition.cells:
            atom = cell[0]
            sub = sub and contains(expected[atom], process[k][atom])
            sup = sup and contains(process[k][atom], expected[atom])
        steps.append(Classification.from_flags(sub, sup))
        LOG.debug('Step %d classified as %s', k, steps[-1].value)
    return steps


def combine_steps(steps):
    sub = all(s in (Classification.MARTINGALE, Classification.SUBMARTINGALE) for s in steps)
    sup = all(s in (Classification.MARTINGALE, Classification.SUPERMARTINGALE) for s in steps)
    return Classification.from_flags(sub, sup)


def classify_process(process, filtration):
    """Classify F_0..F_N as a set-valued martingale, submartingale
    (E(F_t|A_s) contains F_s), supermartingale or none.
    One-step checks suffice by the tower property and monotonicity
    of conditional expectation."""
    return combine_steps(step_classifications(process, filtration))


def point_step_classifications(process, filtration):
    _check_process(process, filtration)
    steps = []
    for k in range(len(process) - 1):
        expected = conditional_mean(process[k + 1], filtration[k])
        gaps = [expected[cell[0]] - process[k][cell[0]] for cell in filtration[k].cells]
        sub = all(np.all(np.asarray(gap) >= -EPS) for gap in gaps)
        sup = all(np.all(np.asarray(gap) <= EPS) for gap in gaps)
        steps.append(Classification.from_flags(sub, sup))
    return steps


def classify_point_process(process, filtration):
    """Real-valued classification with E[x_{k+1} | P_k] >= x_k for
    submartingales and <= for supermartingales"""
    return combine_steps(point_step_classifications(process, filtration))


def _span_rank(points):
    return np.linalg.matrix_rank(points - points[0]) if len(points) > 1 else 0


def _chord(body, centre, direction):
    """Largest t among 1, 1/2, 1/4, ... with centre +- t direction in body"""
    t = 1.0
    for _ in range(64):
        if all(contains(body, convex_body((centre + sign * t * direction).reshape(1, -1)))
               for sign in (1, -1)):
            return t
        t /= 2
    return 0.0


def _shared_direction(F, wide):
    """Two wide atoms and a direction lying in both affine hulls, or None"""
    for a, b in itertools.combinations(wide, 2):
        gens_a, gens_b = F[a].generators, F[b].generators
        rank_b = _span_rank(gens_b)
        for direction in gens_a[1:] - gens_a[0]:
            if _span_rank(np.vstack((gens_b, gens_b[0] + direction))) == rank_b:
                return a, b, direction
    return None


def is_degenerate_by_expectation(F):
    """
    Return (True, None) when E(F) is a singleton, otherwise (False, witness).
    When two atoms carry non-degenerate values whose affine hulls share a
    direction d, the witness follows the partition argument: f1, f2 are
    distinct selections moved by +-d/p on those atoms with E(f1) = E(f2),
    and the glued selection 1_A f1 + 1_B f2 has a different mean. Otherwise
    f1, f2 already have different means and the witness is f2.

    >>> space = FiniteProbSpace.uniform(['w1', 'w2'])
    >>> F = SetRV.constant(space, Interval(-1, 1))
    >>> degenerate, witness = is_degenerate_by_expectation(F)
    >>> degenerate, witness.selection.mean()
    (False, 1.0)
    """
    if aumann_expectation(F).degenerate:
        return True, None
    space = F.space
    wide = [atom for atom in space.atoms if not F[atom].degenerate]
    shared = _shared_direction(F, wide) if F.dimension > 1 else None
    if F.dimension == 1 and len(wide) >= 2:
        a, b = wide[:2]
        p_a, p_b = space.p(a), space.p(b)
        delta = min(p_a * F[a].width, p_b * F[b].width) / 2
        centre = {atom: F[atom].midpoint for atom in space.atoms}
        f1, f2 = dict(centre), dict(centre)
        f1[a], f2[a] = centre[a] + delta / p_a, centre[a] - delta / p_a
        f1[b], f2[b] = centre[b] - delta / p_b, centre[b] + delta / p_b
        cell = (a,)
    elif shared is not None:
        a, b, direction = shared
        p_a, p_b = space.p(a), space.p(b)
        centre = {atom: F[atom].generators.mean(axis=0) for atom in space.atoms}
        delta = min(p_a * _chord(F[a], centre[a], direction),
                    p_b * _chord(F[b], centre[b], direction)) / 2
        f1, f2 = dict(centre), dict(centre)
        f1[a], f2[a] = centre[a] + delta / p_a * direction, centre[a] - delta / p_a * direction
        f1[b], f2[b] = centre[b] - delta / p_b * direction, centre[b] + delta / p_b * direction
        cell = (a,)
    else:
        a = wide[0]
        f1 = {atom: F[atom].generators[0] for atom in space.atoms}
        f2 = dict(f1)
        f2[a] = F[a].generators[-1]
        cell = tuple(atom for atom in space.atoms if atom != a)
    selection = {atom: f1[atom] if atom in cell else f2[atom] for atom in space.atoms}
    witness = MeanWitness(PointRV(space, f1), PointRV(space, f2), cell, PointRV(space, selection))
    return False, witness


def interval_endpoint_martingale_check(lower, upper, filtration):
    """True iff both endpoint processes are exact martingales

    Arguments:
    lower -- list of real PointRV a_0..a_N
    upper -- list of real PointRV b_0..b_N
    filtration -- Filtration with N + 1 partitions
    """
    if len(lower) != len(upper):
        raise LengthMismatch('endpoint processes have different lengths')
    for k, (a, b) in enumerate(zip(lower, upper)):
        for atom in a.space.atoms:
            if a[atom] > b[atom] + EPS:
                raise OrderViolation('a > b at time {}, atom {}'.format(k, atom),
                                     location=(k, atom))
    return (classify_point_process(lower, filtration) == Classification.MARTINGALE and
            classify_point_process(upper, filtration) == Classification.MARTINGALE)


def interval_process(lower, upper):
    """Interval-valued SetRV list [a_k, b_k] from endpoint PointRV lists"""
    return [SetRV(a.space, {atom: Interval(a[atom], b[atom]) for atom in a.space.atoms})
            for a, b in zip(lower, upper)]


def _candidates(body, grid):
    """Grid of selection values of a body"""
    gens = body.generators
    if len(gens) == 1:
        return gens
    lam = np.linspace(0.0, 1.0, grid)[:, None]
    return np.vstack([lam * u + (1 - lam) * v for u, v in itertools.combinations(gens, 2)])


def _selection_means(weighted, prune):
    sums = weighted[0]
    for cands in weighted[1:]:
        sums = (sums[:, None, :] + cands[None, :, :]).reshape(-1, sums.shape[1])
        if prune:
            sums = convex_body(sums).generators
    return sums


def _oracle_chunk(args):
    weighted, prune = args
    return convex_body(_selection_means(weighted, prune)).generators


def selection_oracle(F, grid=21, jobs=1):
    """
    Brute-force E(F): hull of {E(f)} over selections taking grid values
    at each atom. Full cross product for <= 3 atoms, otherwise partial
    sums are hull-pruned after each atom.

    Keyword arguments:
    grid -- number of grid points per segment (default 21)
    jobs -- number of worker processes over the first atom's grid
    (default 1)
    """
    space = F.space
    weighted = [space.p(atom) * _candidates(F[atom], grid) for atom in space.atoms]
    prune = len(space) > 3
    LOG.debug('Selection oracle over %d atoms (prune=%s, jobs=%d)', len(space), prune, jobs)
    if jobs <= 1:
        return convex_body(_selection_means(weighted, prune))
    shares = np.array_split(weighted[0], jobs)
    tasks = [([share] + weighted[1:], prune) for share in shares if len(share)]
    with ProcessPoolExecutor(max_workers=jobs) as executor:
        parts = list(executor.map(_oracle_chunk, tasks))
    return convex_body(np.vstack(parts))


def random_set_rv(rng, n_atoms, dim=1, degenerate_fraction=0.3):
    """Random convex-valued SetRV on a space of n_atoms atoms; each atom
    is a singleton with probability degenerate_fraction"""
    probabilities = rng.dirichlet(np.ones(n_atoms))
    probabilities /= probabilities.sum()
    space = FiniteProbSpace(['w{}'.format(i) for i in range(n_atoms)], probabilities)
    values = {}
    for atom in space.atoms:
        centre = rng.normal(size=dim)
        if rng.random() < degenerate_fraction:
            values[atom] = convex_body(centre.reshape(1, dim))
        else:
            count = 2 if dim == 1 else int(rng.integers(2, 5))
            values[atom] = convex_body(centre + rng.normal(size=(count, dim)))
    return SetRV(space, values)


def expectation_of_product_counterexample():
    """E(f)*[0,1] versus E(f*[0,1]) for f = +-1 on a fair two-atom space

    >>> expectation_of_product_counterexample()
    (Interval(lo=0.0, hi=0.0), Interval(lo=-0.5, hi=0.5))
    """
    space = FiniteProbSpace.uniform(['+', '-'])
    f = PointRV(space, {'+': 1.0, '-': -1.0})
    unit = Interval(0, 1)
    product = SetRV(space, {atom: scalar_mul(f[atom], unit) for atom in space.atoms})
    return scalar_mul(expectation(f), unit), aumann_expectation(product)


def load_problem(data):
    """Build (space, filtration, process) from the JSON form

    {"atoms": [{"id": "w1", "p": 0.5}, ...],
     "filtration": [[["w1", "w2"]], [["w1"], ["w2"]]],
     "process": [{"w1": {"lo": 0, "hi": 1}, ...}, ...]}
    """
    space = FiniteProbSpace([a['id'] for a in data['atoms']], [a['p'] for a in data['atoms']])
    filtration = Filtration([Partition(space, cells) for cells in data['filtration']])
    process = [SetRV(space, {atom: body_from_dict(value) for atom, value in step.items()})
               for step in data['process']]
    return space, filtration, process
