import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from setval.convex import Interval
from setval.discrete import BinaryTree, TreeProcess, random_interval_martingale
from setval.errors import EmptyFamily, NotInterval, NotMartingale, NotRepresentable, OrderViolation
from setval.represent import (IntervalMartingaleInput, build_representation, castaing_family,
                              condition_iii_test, degeneracy_gate, expectation_path,
                              random_tree_martingale, recover_integrand_tree, sampled_input,
                              theorem_main_crosscheck, tree_input, width_constancy_test,
                              width_perturbed_martingale)
from setval.simulate import (SampledProcess, TimeGrid, brownian_process, build_example,
                             gen_brownian, geometric_martingale)


@pytest.fixture(scope='module')
def paths():
    return gen_brownian(TimeGrid(1.0, 128), 20000, 99)


def _constant(tree, value):
    return TreeProcess(tree, [{s: value for s in tree.prefixes(k)} for k in range(tree.depth)])


def test_unit_integrand_round_trip():
    tree = BinaryTree(3)
    M = build_representation(Interval(0, 1), _constant(tree, 1.0), tree)
    recovery = recover_integrand_tree(M)
    assert recovery.C == Interval(0, 1)
    assert all(v == 1.0 for v in recovery.g.values())
    assert recovery.error == 0.0


def test_zero_integrand_gives_constant_set():
    tree = BinaryTree(2)
    M = build_representation(Interval(0, 1), _constant(tree, 0.0), tree)
    report = theorem_main_crosscheck(M)
    assert report.representable and report.condition_iii
    assert report.constant_set == Interval(0, 1)
    assert all(v == 0.0 for v in report.integrand.values())
    assert all(E == Interval(0, 1) for E in report.expectations)


def test_singleton_constant_is_degenerate():
    tree = BinaryTree(3)
    rng = np.random.default_rng(1)
    g = random_interval_martingale(tree, rng).g
    M = build_representation(Interval(0.5, 0.5), g, tree)
    constant, _ = width_constancy_test(M)
    assert constant
    assert degeneracy_gate(M)
    assert all(E.degenerate for E in expectation_path(M))


def test_build_requires_interval():
    tree = BinaryTree(1)
    with pytest.raises(NotInterval):
        build_representation((0, 1), _constant(tree, 1.0), tree)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_round_trip(seed):
    rng = np.random.default_rng(seed)
    tree = BinaryTree(5)
    drawn = random_interval_martingale(tree, rng, representable=True)
    M = IntervalMartingaleInput(drawn.lower, drawn.upper, tree)
    constant, _ = width_constancy_test(M)
    assert constant
    assert condition_iii_test(castaing_family(M))
    recovery = recover_integrand_tree(M)
    assert recovery.C == drawn.C
    assert recovery.error == 0.0
    assert all(recovery.g[k][s] == drawn.g[k][s] for k in range(5) for s in tree.prefixes(k))
    path = expectation_path(M)
    assert all(E == drawn.C for E in path)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5))
def test_perturbed_width_fails_both_criteria(seed, depth):
    M = width_perturbed_martingale(BinaryTree(depth), np.random.default_rng(seed))
    report = theorem_main_crosscheck(M)
    assert not report.representable
    assert not report.condition_iii
    assert report.witnesses['level'] == 1
    with pytest.raises(NotRepresentable):
        recover_integrand_tree(M)


def test_representable_draw_cross_check():
    M = random_tree_martingale(BinaryTree(4), np.random.default_rng(8))
    report = theorem_main_crosscheck(M)
    assert report.representable
    assert report.roundtrip_error == 0.0
    assert report.width.drift == 0.0


def test_doubled_segment_process_is_not_a_martingale():
    tree = BinaryTree(3)
    lower = TreeProcess(tree, [{s: min(x, 2 * x) for s, x in level.items()} for level in
                               _sums(tree)])
    upper = TreeProcess(tree, [{s: max(x, 2 * x) for s, x in level.items()} for level in
                               _sums(tree)])
    M = tree_input(lower, upper)
    with pytest.raises(NotMartingale):
        width_constancy_test(M)
    with pytest.raises(NotMartingale):
        recover_integrand_tree(M)


def _sums(tree):
    return [{s: float(s.count('+') - s.count('-')) for s in tree.prefixes(k)}
            for k in range(tree.depth + 1)]


def test_tree_input_order():
    tree = BinaryTree(1)
    lower = TreeProcess(tree, [{'': 0.0}, {'+': 1.0, '-': -1.0}])
    upper = TreeProcess(tree, [{'': 0.0}, {'+': 0.0, '-': 0.0}])
    with pytest.raises(OrderViolation) as info:
        tree_input(lower, upper)
    assert info.value.location == (1, '+')


def test_condition_iii_on_trees():
    tree = BinaryTree(2)
    xi = _sums(tree)
    shifted = [TreeProcess(tree, [{s: c + x for s, x in level.items()} for level in xi])
               for c in (0.0, 0.5, 3.0)]
    assert condition_iii_test(shifted)
    assert condition_iii_test(shifted[:1])
    doubled = TreeProcess(tree, [{s: 2 * x for s, x in level.items()} for level in xi])
    assert not condition_iii_test([shifted[0], doubled])
    with pytest.raises(EmptyFamily):
        condition_iii_test([])
    drifting = TreeProcess(tree, [{s: float(k) for s in level} for k, level in enumerate(xi)])
    with pytest.raises(NotMartingale):
        condition_iii_test([shifted[0], drifting])


def test_condition_iii_on_paths(paths):
    B = brownian_process(paths)
    shifted = [SampledProcess(paths.grid, c + paths.values, True) for c in (0.0, 1.0, 2.5)]
    assert condition_iii_test(shifted, paths=paths)
    doubled = SampledProcess(paths.grid, 2 * paths.values, True)
    assert not condition_iii_test([B, doubled])


def test_sampled_representable_example(paths):
    M = sampled_input(build_example('exp-representable', paths), paths)
    report = theorem_main_crosscheck(M)
    assert report.representable
    assert report.condition_iii
    assert report.constant_set == Interval(1, 2)
    assert report.witnesses == {}


def test_sampled_nonrepresentable_example(paths):
    M = sampled_input(build_example('exp-nonrepresentable', paths), paths)
    constant, stats = width_constancy_test(M)
    assert not constant
    target = np.expm1(1.0)
    assert abs(stats.variance[-1] - target) <= max(5 * stats.variance_stderr[-1], 0.15 * target)
    assert stats.alternative_variance[-1] == pytest.approx(target)
    report = theorem_main_crosscheck(M)
    assert not report.representable and not report.condition_iii
    assert report.constant_set is None
    assert report.witnesses['width_variance'] > 0


def test_sampled_build_representation(paths):
    X = geometric_martingale(paths)
    M = build_representation(Interval(1, 2), X, paths)
    widths = M.hi.values - M.lo.values
    assert np.allclose(widths, 1.0)
    constant, _ = width_constancy_test(M)
    assert constant


def test_sampled_drift_is_not_a_martingale(paths):
    drifted = SampledProcess(paths.grid, paths.values + paths.grid.times, True)
    M = IntervalMartingaleInput(drifted, SampledProcess(paths.grid, drifted.values + 1, True), paths)
    with pytest.raises(NotMartingale):
        width_constancy_test(M)
