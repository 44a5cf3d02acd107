import gc
import itertools
import weakref
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from setval.convex import Interval, convex_body, contains
from setval.discrete import (BinaryTree, TreeProcess, constant_integrand, ezzaki_counterexample,
                             hukuhara_increments, point_integrand, point_transform,
                             random_interval_martingale, segment_process_discrete,
                             set_integrand_counterexample, transform, verify_ex1)
from setval.errors import (DegenerateInput, IdenticalIntegrands, IncompleteProcess, InvalidConfig,
                           NotInterval)
from setval.finite import (Classification, classify_point_process, classify_process,
                           step_classifications)


def test_tree_layout():
    tree = BinaryTree(3)
    assert tree.prefixes(2) == ['++', '+-', '-+', '--']
    assert len(tree.space) == 8
    assert [len(p) for p in tree.filtration.partitions] == [1, 2, 4, 8]
    with pytest.raises(InvalidConfig):
        BinaryTree(17)


def test_tree_process_requires_every_node():
    tree = BinaryTree(1)
    with pytest.raises(IncompleteProcess):
        TreeProcess(tree, [{'': 0.0}, {'+': 1.0}])


def test_transform_of_unit_interval():
    I = transform(constant_integrand(BinaryTree(2), Interval(0, 1)))
    assert I[1]['+'] == Interval(0, 1)
    assert I[1]['-'] == Interval(-1, 0)
    assert I[2]['++'] == Interval(0, 2)
    assert I[2]['+-'] == Interval(-1, 1)


def test_ex1_at_depth_four():
    report = verify_ex1(constant_integrand(BinaryTree(4), Interval(0, 1)))
    assert report.expectations[0] == Interval(0, 0)
    assert report.expectations[1] == Interval(-0.5, 0.5)
    assert report.first_nondegenerate == 1
    assert report.classification == Classification.SUBMARTINGALE
    assert all(step == Classification.SUBMARTINGALE for step in report.steps)
    assert report.passed
    # the witness selections are drawn from I_1
    assert report.witness.selection.mean() != report.witness.f1.mean()


def test_ex1_expectations_grow():
    report = verify_ex1(constant_integrand(BinaryTree(3), Interval(0, 1)))
    widths = [E.width for E in report.expectations]
    assert widths == sorted(widths)
    assert widths[-1] > widths[1]


def test_ex1_degenerate_integrand_is_a_martingale():
    G = point_integrand(BinaryTree(3), lambda s: 1.0 + len(s))
    with pytest.raises(DegenerateInput) as info:
        verify_ex1(G)
    assert info.value.report.classification == Classification.MARTINGALE
    assert info.value.report.passed


def test_planar_transform():
    square = convex_body([[0, 0], [1, 0], [0, 1], [1, 1]])
    report = verify_ex1(constant_integrand(BinaryTree(2), square))
    assert report.expectations[0].degenerate
    assert contains(report.expectations[1], convex_body([[0.5, 0.5], [-0.5, -0.5]]))
    assert report.classification == Classification.SUBMARTINGALE


@pytest.mark.parametrize('depth', [1, 3, 6])
def test_ezzaki_counterexample(depth):
    report = ezzaki_counterexample(depth)
    assert len(report.member_classes) == 9
    assert all(c == Classification.MARTINGALE for c in report.member_classes)
    assert report.classification != Classification.MARTINGALE
    assert all(n <= b for n, b in zip(report.norms, report.bounds))
    assert report.passed


def test_segment_process():
    tree = BinaryTree(4)
    report = segment_process_discrete(point_integrand(tree, lambda s: 1.0),
                                      point_integrand(tree, lambda s: 2.0))
    assert report.lower_class == Classification.SUPERMARTINGALE
    assert report.upper_class == Classification.SUBMARTINGALE
    assert report.classification == Classification.SUBMARTINGALE
    assert report.strict_at == 0
    assert report.passed


def test_segment_process_identical_integrands():
    tree = BinaryTree(2)
    f = point_integrand(tree, lambda s: 1.0)
    with pytest.raises(IdenticalIntegrands) as info:
        segment_process_discrete(f, f)
    assert info.value.report.classification == Classification.MARTINGALE


def test_point_transform_is_martingale():
    tree = BinaryTree(3)
    g = TreeProcess(tree, [{s: 0.5 * (k + 1) for s in tree.prefixes(k)} for k in range(3)])
    xi = point_transform(g)
    assert xi[3]['+++'] == 3.0
    assert classify_point_process(xi.to_variables(), xi.filtration) == Classification.MARTINGALE


def test_hukuhara_increments_of_constant_width_martingale():
    rng = np.random.default_rng(3)
    drawn = random_interval_martingale(BinaryTree(3), rng, representable=True)
    M = TreeProcess(drawn.lower.tree, [{s: Interval(drawn.lower[k][s], drawn.upper[k][s])
                                        for s in drawn.lower[k]} for k in range(4)])
    report = hukuhara_increments(M)
    assert report.defined
    assert report.martingale_difference
    assert all(u.degenerate for level in report.increments for u in level.values())


def test_hukuhara_increments_of_transform():
    I = transform(constant_integrand(BinaryTree(2), Interval(0, 1)))
    report = hukuhara_increments(I)
    assert report.defined
    assert report.increments[0]['+'] == Interval(0, 1)
    assert not report.martingale_difference


def test_set_integrand_counterexample():
    tree = BinaryTree(3)
    report = set_integrand_counterexample(Interval(1, 2), constant_integrand(tree, Interval(0, 1)))
    assert report.expectations[0] == Interval(1, 2)
    assert report.classification == Classification.SUBMARTINGALE
    assert report.expectations[-1].width > 1


def test_random_interval_martingale_widths():
    rng = np.random.default_rng(5)
    tree = BinaryTree(4)
    drawn = random_interval_martingale(tree, rng, representable=True)
    widths = {drawn.upper[k][s] - drawn.lower[k][s] for k in range(5) for s in drawn.lower[k]}
    assert widths == {drawn.C.width}
    perturbed = random_interval_martingale(tree, rng, representable=False)
    level = [perturbed.upper[1][s] - perturbed.lower[1][s] for s in tree.prefixes(1)]
    assert level[0] != level[1]
    assert min(level) > 0


def test_prefixes_cached_per_tree():
    tree = BinaryTree(4)
    assert tree.prefixes(3) is tree.prefixes(3)
    ref = weakref.ref(tree)
    del tree
    gc.collect()
    assert ref() is None


def test_segment_process_rejects_wide_integrands():
    tree = BinaryTree(2)
    f = point_integrand(tree, lambda s: 1.0)
    g = TreeProcess(tree, [{'': Interval(0, 1)}, {'+': Interval(2, 2), '-': Interval(2, 2)}])
    with pytest.raises(NotInterval):
        segment_process_discrete(f, g)


def test_segment_process_of_opposite_integrands():
    tree = BinaryTree(3)
    report = segment_process_discrete(point_integrand(tree, lambda s: 1.0),
                                      point_integrand(tree, lambda s: -1.0))
    assert report.lower_class == Classification.SUPERMARTINGALE
    assert report.upper_class == Classification.SUBMARTINGALE
    assert report.classification == Classification.SUBMARTINGALE
    assert report.passed


def _random_integrand(tree, rng, wide_fraction):
    levels = []
    for k in range(tree.depth):
        level = {}
        for s in tree.prefixes(k):
            lo = int(rng.integers(-8, 9)) / 4
            wide = rng.random() < wide_fraction
            level[s] = Interval(lo, lo + (int(rng.integers(1, 9)) / 4 if wide else 0.0))
        levels.append(level)
    return TreeProcess(tree, levels)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 6))
def test_degenerate_integrand_transform_is_a_martingale(seed, depth):
    tree = BinaryTree(depth)
    I = transform(_random_integrand(tree, np.random.default_rng(seed), 0.0))
    assert classify_process(I.to_variables(), I.filtration) == Classification.MARTINGALE


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.sampled_from([0.1, 0.5, 1.0]))
def test_transform_is_a_submartingale_and_martingale_iff_degenerate(seed, depth, wide_fraction):
    tree = BinaryTree(depth)
    G = _random_integrand(tree, np.random.default_rng(seed), wide_fraction)
    I = transform(G)
    steps = step_classifications(I.to_variables(), I.filtration)
    assert all(step in (Classification.SUBMARTINGALE, Classification.MARTINGALE)
               for step in steps)
    degenerate = all(value.degenerate for value in G.values())
    assert (classify_process(I.to_variables(), I.filtration) == Classification.MARTINGALE) == \
        degenerate


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
def test_transform_width_recursion(seed, depth):
    tree = BinaryTree(depth)
    G = _random_integrand(tree, np.random.default_rng(seed), 0.5)
    I = transform(G)
    for k in range(depth):
        for s in tree.prefixes(k):
            for child in (s + '+', s + '-'):
                assert I[k + 1][child].width == I[k][s].width + G[k][s].width


@pytest.mark.parametrize('depth,seed', [(1, 0), (2, 1), (3, 2), (3, 3)])
def test_transform_matches_selection_enumeration(depth, seed):
    tree = BinaryTree(depth)
    G = _random_integrand(tree, np.random.default_rng(seed), 0.7)
    nodes = [(k, s) for k in range(depth) for s in tree.prefixes(k)]
    I = transform(G)
    extremes = [{s: [np.inf, -np.inf] for s in tree.prefixes(k)} for k in range(depth + 1)]
    for choice in itertools.product((0, 1), repeat=len(nodes)):
        values = [{} for _ in range(depth)]
        for (k, s), pick in zip(nodes, choice):
            values[k][s] = G[k][s].hi if pick else G[k][s].lo
        xi = point_transform(TreeProcess(tree, values))
        for k, level in enumerate(xi.levels):
            for s, x in level.items():
                extremes[k][s][0] = min(extremes[k][s][0], x)
                extremes[k][s][1] = max(extremes[k][s][1], x)
    for k, level in enumerate(extremes):
        for s, (lo, hi) in level.items():
            assert I[k][s] == Interval(lo, hi)


def test_ex1_with_late_set_valued_step():
    tree = BinaryTree(2)
    G = TreeProcess(tree, [{'': Interval(1, 1)},
                           {'+': Interval(0, 2), '-': Interval(0, 2)}])
    report = verify_ex1(G)
    assert report.steps == [Classification.MARTINGALE, Classification.SUBMARTINGALE]
    assert report.expectations[1] == Interval(0, 0)
    assert report.expectations[2] == Interval(-1, 1)
    assert report.first_nondegenerate == 2
    assert report.passed
