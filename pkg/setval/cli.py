"""Command line entry point: runs the experiments and writes reports"""
from collections import namedtuple
from enum import Enum
from functools import partial
import argparse
import json
import logging
import os
from pathlib import Path
import time
import numpy as np
import pandas as pd
from tqdm import tqdm
from . import __version__, discrete, finite, represent, simulate
from .convex import (ConvexBody, Interval, body_to_dict, contains, hukuhara_diff,
                     minkowski_add, scalar_mul)
from .errors import (IdenticalIntegrands, InvalidConfig, IoError, NotMartingale,
                     SetValuedError, UnknownExperiment)
from .finite import Classification

LOG = logging.getLogger(__name__)
SCHEMA = '1'
OUTPUT_FORMATS = ('json', 'csv', 'text')

ExperimentConfig = namedtuple('ExperimentConfig',
                              'experiment seed paths steps horizon depth alpha '
                              'out output_dir jobs trials timings')
DEFAULT_CONFIG = ExperimentConfig(experiment='all', seed=2021, paths=100000, steps=512,
                                  horizon=1.0, depth=4, alpha=0.01, out='json',
                                  output_dir='.', jobs=1, trials=100, timings=False)
Check = namedtuple('Check', 'name passed detail')
ExperimentResult = namedtuple('ExperimentResult', 'experiment description checks statistics tables')
RunReport = namedtuple('RunReport', 'schema version config results passed seconds')


def _check(name, passed, detail=None):
    return Check(name, bool(passed), detail)


def _result(experiment, checks, statistics=None, tables=None):
    return ExperimentResult(experiment, EXPERIMENTS[experiment][0], checks,
                            statistics or {}, tables or {})


def _yes_no(flag):
    return 'yes' if flag else 'no'


def _paths(config):
    grid = simulate.TimeGrid(config.horizon, config.steps)
    return simulate.gen_brownian(grid, config.paths, config.seed, jobs=config.jobs)


def interval_ops(config):
    A = Interval(0, 1)
    lam, eta = 1.0, -1.0
    combined = scalar_mul(lam + eta, A)
    separate = minkowski_add(scalar_mul(lam, A), scalar_mul(eta, A))
    product_of_means, mean_of_product = finite.expectation_of_product_counterexample()
    checks = [
        _check('(lam + eta) A = {0}', combined == Interval(0, 0), combined),
        _check('lam A + eta A = [-1, 1]', separate == Interval(-1, 1), separate),
        _check('(lam + eta) A strictly inside lam A + eta A',
               contains(separate, combined) and not contains(combined, separate)),
        _check('E(f) [0, 1] differs from E(f [0, 1])', product_of_means != mean_of_product,
               [product_of_means, mean_of_product]),
        _check('[0, 3] - [0, 1] = [0, 2]',
               hukuhara_diff(Interval(0, 3), Interval(0, 1)) == Interval(0, 2)),
        _check('[0, 1] - [0, 3] undefined', hukuhara_diff(Interval(0, 1), Interval(0, 3)) is None),
    ]
    return _result('interval-ops', checks)


def mean0(config):
    rng = np.random.default_rng(config.seed)
    trials, disagreements, witnesses, wide = 200, 0, 0, 0
    for trial in range(trials):
        n_atoms = int(rng.integers(2, 7))
        dim = 1 if trial % 2 == 0 else 2
        fraction = 1.0 if trial % 10 == 0 else 0.3
        F = finite.random_set_rv(rng, n_atoms, dim, fraction)
        singletons = all(F[atom].degenerate for atom in F.space.atoms)
        degenerate, witness = finite.is_degenerate_by_expectation(F)
        disagreements += degenerate != singletons
        if witness is not None:
            wide += 1
            gap = np.abs(np.asarray(witness.selection.mean()) - np.asarray(witness.f1.mean()))
            witnesses += bool(np.any(gap > 0))
    checks = [
        _check('singleton mean iff degenerate', disagreements == 0, disagreements),
        _check('witness selection changes the mean', witnesses == wide, witnesses),
    ]
    return _result('mean0', checks, {'trials': trials, 'non_degenerate': wide})


def _random_endpoints(tree, rng):
    lower = discrete.TreeProcess(tree, [{s: int(rng.integers(-8, 9)) / 4 for s in tree.prefixes(k)}
                                        for k in range(tree.depth + 1)])
    upper = discrete.TreeProcess(tree, [{s: a + int(rng.integers(0, 9)) / 4 for s, a in level.items()}
                                        for level in lower.levels])
    return lower, upper


def endpoints(config):
    rng = np.random.default_rng(config.seed)
    disagreements, martingales = 0, 0
    for trial in range(config.trials):
        tree = discrete.BinaryTree(int(rng.integers(1, 5)))
        if trial % 3 == 2:
            lower, upper = _random_endpoints(tree, rng)
        else:
            drawn = discrete.random_interval_martingale(tree, rng, representable=trial % 3 == 0)
            lower, upper = drawn.lower, drawn.upper
        a, b = lower.to_variables(), upper.to_variables()
        filtration = lower.filtration
        set_valued = finite.classify_process(finite.interval_process(a, b), filtration)
        endpoint = finite.interval_endpoint_martingale_check(a, b, filtration)
        martingales += endpoint
        disagreements += (set_valued == Classification.MARTINGALE) != endpoint
    checks = [_check('set martingale iff both endpoints are martingales', disagreements == 0,
                     disagreements)]
    return _result('endpoints', checks, {'trials': config.trials, 'martingales': martingales})


def ex1_discrete(config):
    tree = discrete.BinaryTree(config.depth)
    report = discrete.verify_ex1(discrete.constant_integrand(tree, Interval(0, 1)))
    inclusion = all(step in (Classification.MARTINGALE, Classification.SUBMARTINGALE)
                    for step in report.steps)
    sub = report.classification in (Classification.MARTINGALE, Classification.SUBMARTINGALE)
    mart = report.classification == Classification.MARTINGALE
    checks = [
        _check('E(I_0) = {0}', report.expectations[0] == Interval(0, 0), report.expectations[0]),
        _check('E(I_1) = [-1/2, 1/2]', report.expectations[1] == Interval(-0.5, 0.5),
               report.expectations[1]),
        _check('E(I_n+1 | P_n) contains I_n on every cell', inclusion),
        _check('submartingale, not martingale', report.passed, report.classification),
    ]
    statistics = {'summary': 'submartingale: {}; martingale: {}'.format(_yes_no(sub), _yes_no(mart)),
                  'expectations': report.expectations, 'steps': report.steps,
                  'first_nondegenerate': report.first_nondegenerate,
                  'witness': report.witness}
    return _result('ex1-discrete', checks, statistics)


def ezzaki(config):
    report = discrete.ezzaki_counterexample(config.depth)
    checks = [
        _check('every Castaing member is a martingale',
               all(c == Classification.MARTINGALE for c in report.member_classes),
               report.member_classes),
        _check('M is not a martingale', report.classification != Classification.MARTINGALE,
               report.classification),
        _check('int |M_n| <= 2 int |f_n| < inf', report.passed,
               {'norms': report.norms, 'bounds': report.bounds}),
    ]
    return _result('ezzaki', checks, {'expectations': report.expectations})


def parse_integrand(text, tree):
    """
    Degenerate integrand on a tree from its command line form: a number
    for a constant integrand, or a JSON list with one entry per level,
    each a number or an object mapping every node of the level to a value.

    >>> parse_integrand('-1', discrete.BinaryTree(1))[0]
    {'': Interval(lo=-1.0, hi=-1.0)}
    """
    try:
        data = json.loads(text)
    except ValueError:
        raise InvalidConfig('integrand {!r} is neither a number nor JSON'.format(text))
    if isinstance(data, bool) or not isinstance(data, (int, float, list)):
        raise InvalidConfig('integrand must be a number or a list of levels')
    if not isinstance(data, list):
        return discrete.point_integrand(tree, lambda s: float(data))
    if len(data) != tree.depth:
        raise InvalidConfig('integrand has {} levels for a tree of depth {}'.format(
            len(data), tree.depth))
    levels = []
    try:
        for k, level in enumerate(data):
            if isinstance(level, dict):
                levels.append({s: Interval(level[s], level[s]) for s in tree.prefixes(k)})
            else:
                levels.append({s: Interval(level, level) for s in tree.prefixes(k)})
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidConfig('bad integrand level {}: {!r}'.format(len(levels), exc))
    return discrete.TreeProcess(tree, levels)


def _segment_discrete_checks(config, f='1', g='2'):
    tree = discrete.BinaryTree(config.depth)
    statistics = {'f': f, 'g': g}
    try:
        report = discrete.segment_process_discrete(parse_integrand(f, tree),
                                                   parse_integrand(g, tree))
    except IdenticalIntegrands as exc:
        report = exc.report
        checks = [
            _check('discrete min and max coincide', report.lower_class == report.upper_class,
                   report.lower_class),
            _check('discrete degenerate segment process is a martingale', report.passed,
                   report.classification),
        ]
        statistics.update(identical=True, steps=report.steps)
        return checks, statistics
    checks = [
        _check('discrete min is a supermartingale',
               report.lower_class in (Classification.SUPERMARTINGALE, Classification.MARTINGALE),
               report.lower_class),
        _check('discrete max is a submartingale',
               report.upper_class in (Classification.SUBMARTINGALE, Classification.MARTINGALE),
               report.upper_class),
        _check('discrete segment process is a strict submartingale', report.passed,
               report.classification),
    ]
    statistics.update(strict_at=report.strict_at, steps=report.steps)
    return checks, statistics


def segment(config, sampled=True, f='1', g='2'):
    checks, statistics = _segment_discrete_checks(config, f, g)
    tables = {}
    if sampled:
        paths = _paths(config)
        M = simulate.build_example('segment', paths)
        pairs = simulate.default_pairs(paths.grid)
        lower = simulate.directional_test(M.lo, 'super', pairs, paths, config.alpha)
        upper = simulate.directional_test(M.hi, 'sub', pairs, paths, config.alpha)
        checks += [_check('sampled min is a supermartingale', lower.verdict, lower.direction),
                   _check('sampled max is a submartingale', upper.verdict, upper.direction)]
        statistics['threshold'] = lower.threshold
        tables = {'lower': lower.table, 'upper': upper.table}
    return _result('segment', checks, statistics, tables)


def _crosscheck(M, config):
    try:
        return represent.theorem_main_crosscheck(M, alpha=config.alpha), None
    except NotMartingale as exc:
        return None, str(exc)


def exp_representable(config):
    paths = _paths(config)
    horizon = paths.grid.horizon
    X = simulate.geometric_martingale(paths)
    terminal = simulate.mc_mean(X.values[:, -1])
    energy = simulate.mc_energy(X)
    target = float(np.expm1(horizon))
    M = simulate.build_example('exp-representable', paths)
    lo, hi = simulate.mc_interval_expectation(M, horizon)
    pairs = simulate.default_pairs(paths.grid)
    lower = simulate.martingale_test(M.lo, pairs, paths, config.alpha)
    upper = simulate.martingale_test(M.hi, pairs, paths, config.alpha)
    report, failure = _crosscheck(represent.sampled_input(M, paths), config)
    checks = [
        _check('E(X_T) = 1', abs(terminal.mean - 1) <= max(4 * terminal.stderr, 0.01), terminal),
        _check('E int X^2 dt = e^T - 1',
               abs(energy.mean - target) <= max(4 * energy.stderr, 0.02 * target), energy),
        _check('E(M_T) = [1, 2]', abs(lo.mean - 1) <= 4 * lo.stderr and abs(hi.mean - 2) <= 4 * hi.stderr,
               [lo, hi]),
        _check('lower endpoint is a martingale', lower.verdict, lower.direction),
        _check('upper endpoint is a martingale', upper.verdict, upper.direction),
        _check('representable', report is not None and report.representable,
               failure or (report.constant_set if report else None)),
    ]
    statistics = {'threshold': lower.threshold, 'energy_target': target,
                  'width_variance_T': float(report.width.variance[-1]) if report else None}
    return _result('exp-representable', checks, statistics,
                   {'lower': lower.table, 'upper': upper.table})


def exp_nonrepresentable(config):
    paths = _paths(config)
    M = simulate.build_example('exp-nonrepresentable', paths)
    target = float(np.expm1(paths.grid.horizon))
    report, failure = _crosscheck(represent.sampled_input(M, paths), config)
    if report is None:
        return _result('exp-nonrepresentable', [_check('endpoints are martingales', False, failure)])
    variance, stderr = float(report.width.variance[-1]), float(report.width.variance_stderr[-1])
    checks = [
        _check('width variance at T = e^T - 1', abs(variance - target) <= 4 * stderr,
               {'variance': variance, 'stderr': stderr, 'target': target}),
        _check('width is not constant', not report.representable, report.witnesses),
        _check('Castaing differences are random', not report.condition_iii),
    ]
    width = pd.DataFrame({'t': report.width.times, 'width_mean': report.width.mean,
                          'width_variance': report.width.variance,
                          'stderr': report.width.variance_stderr,
                          'alternative': report.width.alternative_variance})
    return _result('exp-nonrepresentable', checks, {'energy_target': target}, {'width': width})


def roundtrip(config):
    rng = np.random.default_rng(config.seed)
    tree = discrete.BinaryTree(config.depth)
    violations, inconsistent = 0, 0
    for _ in tqdm(range(config.trials), desc='roundtrip', unit='trial', disable=None):
        drawn = discrete.random_interval_martingale(tree, rng, representable=True)
        M = represent.IntervalMartingaleInput(drawn.lower, drawn.upper, tree)
        perturbed = represent.width_perturbed_martingale(tree, rng)
        try:
            report = represent.theorem_main_crosscheck(M)
            other = represent.theorem_main_crosscheck(perturbed)
        except SetValuedError as exc:
            LOG.warning('Round trip trial failed: %s', exc)
            inconsistent += 1
            continue
        recovered = report.integrand is not None and all(
            report.integrand[k][s] == drawn.g[k][s] for k in range(len(drawn.g)) for s in drawn.g[k])
        constant_mean = all(E == report.expectations[0] for E in report.expectations)
        ok = (report.representable and report.condition_iii and report.roundtrip_error == 0.0 and
              report.constant_set == drawn.C and recovered and constant_mean and
              represent.degeneracy_gate(M))
        violations += not ok
        violations += other.representable or other.condition_iii
    degenerate = represent.build_representation(Interval(0.5, 0.5), drawn.g, tree)
    checks = [
        _check('representable draws round trip exactly', violations == 0, violations),
        _check('criteria agree', inconsistent == 0, inconsistent),
        _check('singleton C gives a degenerate martingale', represent.degeneracy_gate(degenerate) and
               all(E.degenerate for E in represent.expectation_path(degenerate))),
    ]
    return _result('roundtrip', checks, {'trials': config.trials, 'depth': config.depth})


EXPERIMENTS = {
    'interval-ops': ('Scalar distributivity fails for sets: (lam + eta) A versus lam A + eta A',
                     interval_ops),
    'mean0': ('A singleton expectation forces a singleton-valued random set', mean0),
    'endpoints': ('An interval process is a martingale iff both endpoints are', endpoints),
    'ex1-discrete': ('Transform of G = [0, 1] on a Rademacher tree is a strict submartingale',
                     ex1_discrete),
    'ezzaki': ('Martingale Castaing members do not make a set-valued martingale', ezzaki),
    'segment': ('Segment process of two stochastic integrals', segment),
    'exp-representable': ('M_t = [X_t, 1 + X_t] with X = exp(B - t/2) is representable',
                          exp_representable),
    'exp-nonrepresentable': ('M_t = [X_t, 2 X_t] is a martingale without representation',
                             exp_nonrepresentable),
    'roundtrip': ('Integrand recovery and criterion agreement on random tree martingales',
                  roundtrip),
}


def validate_config(config):
    if config.experiment != 'all' and config.experiment not in EXPERIMENTS:
        raise UnknownExperiment('unknown experiment {}'.format(config.experiment))
    for name in ('seed', 'paths', 'steps', 'depth', 'jobs', 'trials'):
        value = getattr(config, name)
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool):
            raise InvalidConfig('{} must be an integer, got {!r}'.format(name, value))
    if config.seed < 0:
        raise InvalidConfig('seed must be non-negative')
    if config.paths < 2 or config.steps < 4 or config.jobs < 1 or config.trials < 1:
        raise InvalidConfig('paths >= 2, steps >= 4, jobs >= 1 and trials >= 1 are required')
    if not 1 <= config.depth <= discrete.MAX_DEPTH:
        raise InvalidConfig('depth must lie in [1, {}]'.format(discrete.MAX_DEPTH))
    if not 0 < config.alpha < 1:
        raise InvalidConfig('alpha must lie in (0, 1)')
    if not config.horizon > 0:
        raise InvalidConfig('horizon must be positive')
    if config.out not in OUTPUT_FORMATS:
        raise InvalidConfig('output format must be one of {}'.format(', '.join(OUTPUT_FORMATS)))
    return config


def load_config(path=None, environ=None, **flags):
    """
    Resolve an ExperimentConfig: defaults, then SETVAL_SEED, then the
    JSON file at path, then flags that are not None.
    """
    values = DEFAULT_CONFIG._asdict()
    environ = os.environ if environ is None else environ
    if environ.get('SETVAL_SEED'):
        try:
            values['seed'] = int(environ['SETVAL_SEED'])
        except ValueError:
            raise InvalidConfig('SETVAL_SEED must be an integer')
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise IoError('cannot read config {}: {}'.format(path, exc))
        except ValueError as exc:
            raise InvalidConfig('config {} is not valid JSON: {}'.format(path, exc))
        unknown = set(data) - set(values)
        if unknown:
            raise InvalidConfig('unknown config keys: {}'.format(', '.join(sorted(unknown))))
        values.update(data)
    values.update({k: v for k, v in flags.items() if v is not None})
    if isinstance(values['horizon'], int):
        values['horizon'] = float(values['horizon'])
    return validate_config(ExperimentConfig(**values))


def jsonable(value):
    """Plain JSON data for reports: bodies become their dict forms,
    namedtuples become objects and DataFrames lists of records"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (Interval, ConvexBody)):
        return body_to_dict(value)
    if isinstance(value, pd.DataFrame):
        return jsonable(value.to_dict(orient='records'))
    if isinstance(value, discrete.TreeProcess):
        return jsonable(value.levels)
    if isinstance(value, (finite.PointRV, finite.SetRV)):
        return jsonable(value.values)
    if isinstance(value, tuple) and hasattr(value, '_asdict'):
        return {k: jsonable(v) for k, v in value._asdict().items()}
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


def _run_report(config, results, seconds):
    passed = all(check.passed for result in results for check in result.checks)
    return RunReport(SCHEMA, __version__, config, results, passed,
                     seconds if config.timings else None)


def _execute(experiments, config):
    start = time.perf_counter()
    results = []
    for experiment, runner in tqdm(experiments, desc='experiments', unit='exp', disable=None):
        LOG.info('Running %s', experiment)
        tick = time.perf_counter()
        results.append(runner(config))
        LOG.info('%s finished in %.2fs', experiment, time.perf_counter() - tick)
    seconds = time.perf_counter() - start
    return _run_report(config, results, seconds)


def run_example(experiment, config=DEFAULT_CONFIG):
    """Run one experiment by id and return its RunReport"""
    if experiment not in EXPERIMENTS:
        raise UnknownExperiment('unknown experiment {}'.format(experiment))
    config = validate_config(config._replace(experiment=experiment))
    return _execute([(experiment, EXPERIMENTS[experiment][1])], config)


def run_all(config=DEFAULT_CONFIG, **overrides):
    """Run every experiment with one shared configuration"""
    config = validate_config(config._replace(experiment='all', **overrides))
    return _execute([(name, entry[1]) for name, entry in EXPERIMENTS.items()], config)


def _load_input(path, parse):
    """Read a JSON input file and build objects from it with parse;
    malformed content becomes InvalidConfig"""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoError('cannot read {}: {}'.format(path, exc))
    except ValueError as exc:
        raise InvalidConfig('{} is not valid JSON: {}'.format(path, exc))
    try:
        return parse(data)
    except InvalidConfig:
        raise
    except (SetValuedError, KeyError, IndexError, TypeError, ValueError) as exc:
        raise InvalidConfig('{} is not a valid input file: {!r}'.format(path, exc))


def _finite_problem(data):
    space, filtration, process = finite.load_problem(data)
    if len(process) != len(filtration):
        raise InvalidConfig('{} variables for {} partitions'.format(len(process), len(filtration)))
    return space, filtration, process


def finite_check(path, config=DEFAULT_CONFIG):
    """Classify the process described by a finite-space problem file"""
    _, filtration, process = _load_input(path, _finite_problem)
    unmeasurable = [k for k, (F, partition) in enumerate(zip(process, filtration.partitions))
                    if not finite.is_measurable(F, partition)]
    checks = [_check('process is adapted', not unmeasurable, unmeasurable or None)]
    statistics = {}
    if not unmeasurable:
        steps = finite.step_classifications(process, filtration)
        expectations = [finite.aumann_expectation(F) for F in process]
        singleton = [finite.is_degenerate_by_expectation(F)[0] for F in process]
        degenerate = [all(F[atom].degenerate for atom in F.space.atoms) for F in process]
        checks.append(_check('singleton expectation iff singleton values', singleton == degenerate,
                             {'singleton_expectation': singleton, 'singleton_values': degenerate}))
        statistics = {'classification': finite.combine_steps(steps), 'steps': steps,
                      'expectations': expectations, 'singleton_expectation': singleton}
    result = ExperimentResult('finite-check', 'Classification of {}'.format(path), checks,
                              statistics, {})
    return _run_report(config._replace(experiment='finite-check'), [result], 0.0)


def _tree_problem(data):
    tree = discrete.BinaryTree(len(data['lower']) - 1)
    return represent.tree_input(discrete.TreeProcess(tree, data['lower']),
                                discrete.TreeProcess(tree, data['upper']))


def represent_check(path, config=DEFAULT_CONFIG):
    """
    Representation report for a tree interval process stored as
    {"lower": [{node: value}, ...], "upper": [...]}, one object per level
    """
    M = _load_input(path, _tree_problem)
    report, failure = _crosscheck(M, config)
    checks = [_check('endpoints are martingales', report is not None, failure)]
    if report is not None:
        checks.append(_check('representable', report.representable, report.witnesses))
    result = ExperimentResult('represent-check', 'Representation of {}'.format(path), checks,
                              {'report': report}, {})
    return _run_report(config._replace(experiment='represent-check'), [result], 0.0)


def _format_body(body):
    if isinstance(body, Interval):
        return '[{:g}, {:g}]'.format(body.lo, body.hi)
    return 'conv{}'.format(np.round(body.generators, 6).tolist())


def _classification_table(statistics):
    """Per-time table of E(F_k), the step k -> k + 1 class and, when
    known, whether E(F_k) is a singleton"""
    expectations = statistics['expectations']
    steps = list(statistics.get('steps', []))
    rows = []
    for k, E in enumerate(expectations):
        row = {'k': k, 'E(F_k)': _format_body(E),
               'step k -> k+1': steps[k].value if k < len(steps) else '-'}
        if 'singleton_expectation' in statistics:
            row['singleton E'] = _yes_no(statistics['singleton_expectation'][k])
        rows.append(row)
    return pd.DataFrame(rows).to_string(index=False)


def render_text(report):
    lines = ['setval {} report (schema {})'.format(report.version, report.schema)]
    for result in report.results:
        passed = all(check.passed for check in result.checks)
        lines.append('{}: {}'.format(result.experiment, 'PASS' if passed else 'FAIL'))
        lines.append('  {}'.format(result.description))
        for check in result.checks:
            lines.append('  [{}] {}'.format('pass' if check.passed else 'fail', check.name))
        statistics = result.statistics
        if 'summary' in statistics:
            lines.append('  {}'.format(statistics['summary']))
        if 'classification' in statistics:
            lines.append('  classification: {}'.format(statistics['classification'].value))
        if 'expectations' in statistics:
            table = _classification_table(statistics)
            lines.extend('  ' + line for line in table.splitlines())
    if report.seconds is not None:
        lines.append('wall clock: {:.2f}s'.format(report.seconds))
    lines.append('overall: {}'.format('PASS' if report.passed else 'FAIL'))
    return '\n'.join(lines) + '\n'


def _report_data(report):
    data = jsonable(report)
    if data['seconds'] is None:
        del data['seconds']
    return data


def write_report(report, output_dir, out='json'):
    """Write a RunReport, returning the list of files written"""
    directory = Path(output_dir)
    stem = 'setval-{}'.format(report.config.experiment)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        if out == 'json':
            path = directory / (stem + '.json')
            path.write_text(json.dumps(_report_data(report), indent=2) + '\n')
            written.append(path)
        elif out == 'csv':
            checks = pd.DataFrame([{'experiment': r.experiment, 'check': c.name,
                                    'passed': c.passed, 'detail': json.dumps(jsonable(c.detail))}
                                   for r in report.results for c in r.checks])
            path = directory / (stem + '-checks.csv')
            checks.to_csv(path, index=False)
            written.append(path)
            statistics = pd.DataFrame([{'experiment': r.experiment, 'statistic': k,
                                        'value': json.dumps(jsonable(v))}
                                       for r in report.results for k, v in r.statistics.items()],
                                      columns=['experiment', 'statistic', 'value'])
            path = directory / (stem + '-statistics.csv')
            statistics.to_csv(path, index=False)
            written.append(path)
            for result in report.results:
                for name, table in result.tables.items():
                    path = directory / '{}-{}-{}.csv'.format(stem, result.experiment, name)
                    table.to_csv(path, index=False)
                    written.append(path)
        else:
            path = directory / (stem + '.txt')
            path.write_text(render_text(report))
            written.append(path)
    except OSError as exc:
        raise IoError('cannot write report to {}: {}'.format(directory, exc))
    return written


def _common_arguments():
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--config', default=None,
                        help='JSON file of configuration values')
    parser.add_argument('--seed', type=int, default=None,
                        help='Random seed (default 2021 or $SETVAL_SEED)')
    parser.add_argument('--paths', type=int, default=None,
                        help='Number of Monte Carlo paths')
    parser.add_argument('--steps', type=int, default=None,
                        help='Number of time steps')
    parser.add_argument('--horizon', type=float, default=None,
                        help='Time horizon T')
    parser.add_argument('--depth', type=int, default=None,
                        help='Rademacher tree depth')
    parser.add_argument('--alpha', type=float, default=None,
                        help='Family-wise test level')
    parser.add_argument('--trials', type=int, default=None,
                        help='Random instances for the property experiments')
    parser.add_argument('--jobs', '-j', type=int, default=None,
                        help='Number of parallel jobs for path generation')
    parser.add_argument('--out', choices=OUTPUT_FORMATS, default=None,
                        help='Report format')
    parser.add_argument('--output-dir', '-o', default=None,
                        help='Directory to store reports')
    parser.add_argument('--timings', action='store_true', default=None,
                        help='Include wall clock time in reports')
    parser.add_argument('--log-level', default='INFO',
                        help='Log level')
    parser.add_argument('--log-file', default=None,
                        help='Log to file instead of stderr')
    return parser


def build_parser():
    common = _common_arguments()
    parser = argparse.ArgumentParser(prog='setval',
                                     description='Set-valued stochastic calculus experiments')
    parser.add_argument('--version', action='version', version=__version__)
    commands = parser.add_subparsers(dest='command')
    commands.required = True

    run = commands.add_parser('run', parents=[common], help='Run one experiment or all')
    run.add_argument('--experiment', '-e', default=None,
                     help='Experiment id or "all": {}'.format(', '.join(EXPERIMENTS)))
    run.set_defaults(handler=_run_command)

    finite_parser = commands.add_parser('finite', help='Finite probability space checks')
    finite_commands = finite_parser.add_subparsers(dest='action')
    finite_commands.required = True
    check = finite_commands.add_parser('check', parents=[common], help='Classify a process file')
    check.add_argument('--input', '-i', required=True)
    check.set_defaults(handler=lambda args, config: finite_check(args.input, config))

    discrete_parser = commands.add_parser('discrete', parents=[common],
                                          help='Exact certifications on Rademacher trees')
    discrete_parser.add_argument('example', choices=('ex1', 'ezzaki', 'segment'))
    discrete_parser.add_argument('--f', default='1',
                                 help='Segment integrand f: a constant or a JSON list of levels')
    discrete_parser.add_argument('--g', default='2',
                                 help='Segment integrand g: a constant or a JSON list of levels')
    discrete_parser.set_defaults(handler=_discrete_command)

    simulate_parser = commands.add_parser('simulate', parents=[common], help='Monte Carlo suites')
    simulate_parser.add_argument('--example', default=None,
                                 choices=('exp-representable', 'exp-nonrepresentable', 'segment'))
    simulate_parser.set_defaults(handler=_simulate_command)

    represent_parser = commands.add_parser('represent', help='Representation checks')
    represent_commands = represent_parser.add_subparsers(dest='action')
    represent_commands.required = True
    rcheck = represent_commands.add_parser('check', parents=[common],
                                           help='Check a tree interval process file')
    rcheck.add_argument('--input', '-i', required=True)
    rcheck.set_defaults(handler=lambda args, config: represent_check(args.input, config))
    rtrip = represent_commands.add_parser('roundtrip', parents=[common],
                                          help='Random round trips on trees')
    rtrip.set_defaults(handler=lambda args, config: run_example('roundtrip', config))
    return parser


def _run_command(args, config):
    if config.experiment == 'all':
        return run_all(config)
    return run_example(config.experiment, config)


def _discrete_command(args, config):
    if args.example == 'ex1':
        return run_example('ex1-discrete', config)
    if args.example == 'ezzaki':
        return run_example('ezzaki', config)
    config = config._replace(experiment='segment')
    return _execute([('segment', partial(segment, sampled=False, f=args.f, g=args.g))], config)


def _simulate_command(args, config):
    if args.example:
        return run_example(args.example, config)
    names = ('exp-representable', 'exp-nonrepresentable', 'segment')
    config = config._replace(experiment='simulate')
    return _execute([(name, EXPERIMENTS[name][1]) for name in names], config)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.log_file:
        logging.basicConfig(filename=args.log_file, level=args.log_level.upper())
    else:
        logging.basicConfig(level=args.log_level.upper())
    flags = {name: getattr(args, name, None) for name in ExperimentConfig._fields}
    try:
        config = load_config(args.config, **flags)
        report = args.handler(args, config)
        written = write_report(report, config.output_dir, config.out)
    except (UnknownExperiment, InvalidConfig, IoError) as exc:
        LOG.error('%s', exc)
        return 2
    except SetValuedError as exc:
        LOG.error('%s', exc)
        return 1
    if config.out == 'text':
        print(render_text(report), end='')
    for path in written:
        LOG.info('Wrote %s', path)
    return 0 if report.passed else 1


if __name__ == '__main__':
    raise SystemExit(main())
