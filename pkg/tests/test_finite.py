import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from setval.convex import (Interval, bodies_equal, convex_body, contains, hausdorff_distance,
                           scalar_mul)
from setval.discrete import BinaryTree, TreeProcess, random_interval_martingale
from setval.errors import (EmptyFamily, LengthMismatch, NotAdapted, NotInterval, OrderViolation,
                           SetValuedError)
from setval.finite import (Classification, Filtration, FiniteProbSpace, Partition, PointRV,
                           SetRV, aumann_expectation, castaing_sequence, classify_point_process,
                           classify_process, conditional_expectation, decomposable_hull,
                           expectation, interval_endpoint_martingale_check, interval_process,
                           is_degenerate_by_expectation, load_problem, random_set_rv,
                           selection_oracle)


@pytest.fixture
def coin():
    return FiniteProbSpace.uniform(['+', '-'])


@pytest.fixture
def coin_filtration(coin):
    return Filtration([Partition.trivial(coin), Partition.finest(coin)])


def test_space_validation():
    with pytest.raises(SetValuedError):
        FiniteProbSpace(['a', 'b'], [0.5, 0.6])
    with pytest.raises(SetValuedError):
        FiniteProbSpace(['a', 'a'], [0.5, 0.5])
    with pytest.raises(SetValuedError):
        FiniteProbSpace(['a', 'b'], [1.0, 0.0])


def test_partition_must_cover(coin):
    with pytest.raises(SetValuedError):
        Partition(coin, [['+']])
    assert Partition.finest(coin).refines(Partition.trivial(coin))
    assert not Partition.trivial(coin).refines(Partition.finest(coin))


def test_filtration_must_increase(coin):
    with pytest.raises(SetValuedError):
        Filtration([Partition.finest(coin), Partition.trivial(coin)])


def test_aumann_expectation(coin):
    F = SetRV(coin, {'+': Interval(1, 2), '-': Interval(-2, -1)})
    assert aumann_expectation(F) == Interval(-0.5, 0.5)
    assert aumann_expectation(SetRV.constant(coin, Interval(0, 1))) == Interval(0, 1)


def test_conditional_expectation_on_cells():
    space = FiniteProbSpace(['a', 'b', 'c'], [0.25, 0.25, 0.5])
    partition = Partition(space, [['a', 'b'], ['c']])
    F = SetRV(space, {'a': Interval(0, 2), 'b': Interval(2, 2), 'c': Interval(-1, 1)})
    expected = conditional_expectation(F, partition)
    assert expected['a'] == expected['b'] == Interval(1, 2)
    assert expected['c'] == Interval(-1, 1)


def test_unit_interval_transform_is_submartingale(coin, coin_filtration):
    F0 = SetRV.constant(coin, Interval(0, 0))
    F1 = SetRV(coin, {'+': Interval(0, 1), '-': Interval(-1, 0)})
    assert classify_process([F0, F1], coin_filtration) == Classification.SUBMARTINGALE


def test_constant_process_is_martingale(coin, coin_filtration):
    F = SetRV.constant(coin, Interval(-1, 3))
    assert classify_process([F, F], coin_filtration) == Classification.MARTINGALE


def test_shrinking_process_is_supermartingale(coin, coin_filtration):
    F0 = SetRV.constant(coin, Interval(-1, 1))
    F1 = SetRV.constant(coin, Interval(0, 0))
    assert classify_process([F0, F1], coin_filtration) == Classification.SUPERMARTINGALE


def test_classification_errors(coin, coin_filtration):
    F0 = SetRV(coin, {'+': Interval(0, 1), '-': Interval(0, 0)})
    with pytest.raises(NotAdapted):
        classify_process([F0, F0], coin_filtration)
    with pytest.raises(LengthMismatch):
        classify_process([F0], coin_filtration)


def test_degenerate_by_expectation(coin):
    points = SetRV(coin, {'+': Interval(1, 1), '-': Interval(-3, -3)})
    assert is_degenerate_by_expectation(points) == (True, None)
    F = SetRV(coin, {'+': Interval(0, 1), '-': Interval(0, 0)})
    degenerate, witness = is_degenerate_by_expectation(F)
    assert not degenerate
    assert witness.selection.mean() != witness.f1.mean()


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 6), st.sampled_from([1, 2]))
def test_singleton_mean_iff_singleton_values(seed, n_atoms, dim):
    rng = np.random.default_rng(seed)
    F = random_set_rv(rng, n_atoms, dim, degenerate_fraction=0.5)
    singletons = all(F[atom].degenerate for atom in F.space.atoms)
    degenerate, witness = is_degenerate_by_expectation(F)
    assert degenerate == singletons
    if witness is not None:
        gap = np.abs(np.asarray(witness.selection.mean()) - np.asarray(witness.f1.mean()))
        assert np.any(gap > 0)
        assert contains(aumann_expectation(F), convex_body(np.atleast_2d(witness.selection.mean())))


def test_equal_mean_witness_uses_two_wide_atoms():
    space = FiniteProbSpace.uniform(['a', 'b', 'c', 'd'])
    F = SetRV(space, {'a': Interval(0, 1), 'b': Interval(0, 2), 'c': Interval(5, 5), 'd': Interval(0, 0)})
    _, witness = is_degenerate_by_expectation(F)
    assert witness.f1.mean() == pytest.approx(witness.f2.mean())
    assert witness.cell == ('a',)
    assert witness.selection.mean() != pytest.approx(witness.f1.mean())


def test_planar_equal_mean_witness():
    space = FiniteProbSpace.uniform(['a', 'b'])
    square = convex_body([[0, 0], [1, 0], [0, 1], [1, 1]])
    F = SetRV.constant(space, square)
    degenerate, witness = is_degenerate_by_expectation(F)
    assert not degenerate
    assert witness.cell == ('a',)
    assert np.allclose(witness.f1.mean(), witness.f2.mean())
    assert not np.allclose(witness.f1['a'], witness.f2['a'])
    assert not np.allclose(witness.selection.mean(), witness.f1.mean())
    for f in (witness.f1, witness.f2):
        for atom in space.atoms:
            assert contains(square, convex_body(f[atom].reshape(1, 2)))


def test_crossing_segments_have_no_equal_mean_selections():
    space = FiniteProbSpace.uniform(['a', 'b'])
    F = SetRV(space, {'a': convex_body([[0, 0], [1, 0]]), 'b': convex_body([[0, 0], [0, 1]])})
    _, witness = is_degenerate_by_expectation(F)
    assert not np.allclose(witness.f1.mean(), witness.f2.mean())
    assert witness.selection.mean().tolist() == witness.f2.mean().tolist()


def test_castaing_sequence(coin):
    F = SetRV(coin, {'+': Interval(0, 4), '-': Interval(-4, 0)})
    members = castaing_sequence(F, 4)
    assert [f['+'] for f in members] == [4.0, 0.0, 2.0, 3.0]
    hull = decomposable_hull(members)
    assert hull['+'] == F['+'] and hull['-'] == F['-']
    with pytest.raises(NotInterval):
        castaing_sequence(SetRV.constant(coin, convex_body([[0, 0], [1, 1]])), 2)
    with pytest.raises(EmptyFamily):
        decomposable_hull([])


def test_selection_oracle_matches_exact_expectation():
    space = FiniteProbSpace(['a', 'b', 'c'], [0.5, 0.25, 0.25])
    F = SetRV(space, {'a': convex_body([[0, 0], [1, 0], [0, 1]]),
                      'b': convex_body([[0, 0], [2, 2]]),
                      'c': convex_body([[1, -1]])})
    oracle = selection_oracle(F, grid=5)
    assert contains(aumann_expectation(F), oracle)
    assert contains(oracle, aumann_expectation(F))


def test_selection_oracle_prunes_many_atoms():
    rng = np.random.default_rng(11)
    F = random_set_rv(rng, 5, dim=1, degenerate_fraction=0.0)
    oracle = selection_oracle(F, grid=3)
    exact = aumann_expectation(F)
    assert oracle.lo == pytest.approx(exact.lo)
    assert oracle.hi == pytest.approx(exact.hi)


def test_endpoint_order_violation(coin, coin_filtration):
    a = [PointRV(coin, {'+': 0, '-': 0}), PointRV(coin, {'+': 1, '-': -1})]
    b = [PointRV(coin, {'+': 0, '-': 0}), PointRV(coin, {'+': 0, '-': 0})]
    with pytest.raises(OrderViolation) as info:
        interval_endpoint_martingale_check(a, b, coin_filtration)
    assert info.value.location == (1, '+')


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 4), st.booleans())
def test_endpoint_characterisation(seed, depth, representable):
    rng = np.random.default_rng(seed)
    tree = BinaryTree(depth)
    drawn = random_interval_martingale(tree, rng, representable)
    a, b = drawn.lower.to_variables(), drawn.upper.to_variables()
    filtration = drawn.lower.filtration
    assert interval_endpoint_martingale_check(a, b, filtration)
    assert classify_process(interval_process(a, b), filtration) == Classification.MARTINGALE
    # lifting the upper endpoint at one leaf breaks both
    top = dict(drawn.upper[depth])
    leaf = tree.prefixes(depth)[0]
    top[leaf] += 1.0
    upper = TreeProcess(tree, drawn.upper.levels[:-1] + [top])
    b = upper.to_variables()
    assert not interval_endpoint_martingale_check(a, b, filtration)
    assert classify_process(interval_process(a, b), filtration) != Classification.MARTINGALE


def test_point_classification(coin, coin_filtration):
    x0 = PointRV(coin, {'+': 0, '-': 0})
    up = PointRV(coin, {'+': 2, '-': 0})
    assert classify_point_process([x0, up], coin_filtration) == Classification.SUBMARTINGALE
    assert expectation(up) == 1.0


def test_load_problem():
    data = {'atoms': [{'id': 'w1', 'p': 0.5}, {'id': 'w2', 'p': 0.5}],
            'filtration': [[['w1', 'w2']], [['w1'], ['w2']]],
            'process': [{'w1': {'lo': 0, 'hi': 0}, 'w2': {'lo': 0, 'hi': 0}},
                        {'w1': {'lo': 0, 'hi': 1}, 'w2': {'lo': -1, 'hi': 0}}]}
    space, filtration, process = load_problem(data)
    assert len(space) == 2
    assert classify_process(process, filtration) == Classification.SUBMARTINGALE


def test_conditional_expectation_of_two_intervals(coin):
    F = SetRV(coin, {'+': Interval(0, 1), '-': Interval(0, 3)})
    expected = conditional_expectation(F, Partition.trivial(coin))
    assert expected['+'] == expected['-'] == Interval(0, 2)


def _dyadic_set_rv(space, rng):
    values = {}
    for atom in space.atoms:
        lo = int(rng.integers(-8, 9)) / 4
        values[atom] = Interval(lo, lo + int(rng.integers(0, 9)) / 4)
    return SetRV(space, values)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_tower_property(seed):
    rng = np.random.default_rng(seed)
    filtration = BinaryTree(3).filtration
    F = _dyadic_set_rv(filtration.space, rng)
    for coarse, fine in [(0, 1), (1, 2), (0, 3), (1, 3)]:
        nested = conditional_expectation(conditional_expectation(F, filtration[fine]),
                                         filtration[coarse])
        direct = conditional_expectation(F, filtration[coarse])
        assert all(nested[atom] == direct[atom] for atom in filtration.space.atoms)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(2, 5))
def test_planar_tower_property(seed, n_atoms):
    rng = np.random.default_rng(seed)
    F = random_set_rv(rng, n_atoms, dim=2)
    space = F.space
    fine = Partition(space, [space.atoms[:2], space.atoms[2:]] if n_atoms > 2 else [space.atoms])
    coarse = Partition.trivial(space)
    nested = conditional_expectation(conditional_expectation(F, fine), coarse)
    direct = conditional_expectation(F, coarse)
    assert all(bodies_equal(nested[atom], direct[atom]) for atom in space.atoms)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(-16, 16))
def test_aumann_expectation_commutes_with_scalars(seed, numerator):
    lam = numerator / 8
    space = BinaryTree(2).space
    F = _dyadic_set_rv(space, np.random.default_rng(seed))
    scaled = SetRV(space, {atom: scalar_mul(lam, F[atom]) for atom in space.atoms})
    assert aumann_expectation(scaled) == scalar_mul(lam, aumann_expectation(F))


def test_selection_oracle_agrees_on_random_instances():
    rng = np.random.default_rng(2021)
    for trial in range(200):
        dim = 1 if trial % 2 == 0 else 2
        n_atoms = int(rng.integers(2, 7)) if dim == 1 else int(rng.choice([2, 4, 5, 6]))
        F = random_set_rv(rng, n_atoms, dim)
        oracle = selection_oracle(F, grid=21)
        assert hausdorff_distance(oracle, aumann_expectation(F)) < 1e-9, trial
