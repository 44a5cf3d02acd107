"""Monte Carlo layer: Brownian paths, Ito sums, the exponential
martingale and statistical (sub/super)martingale tests"""
from collections import namedtuple
from concurrent.futures import ProcessPoolExecutor
import logging
import numpy as np
import pandas as pd
from scipy.stats import norm
from .errors import GridMismatch, InvalidConfig, NotAdapted, OrderViolation
from .utils import EPS, bonferroni_threshold

LOG = logging.getLogger(__name__)
CHUNK_SIZE = 8192
N_BINS = 8

__TimeGrid = namedtuple('TimeGrid', 'horizon steps')
__PathBundle = namedtuple('PathBundle', 'grid values seed chunk_size')
SampledProcess = namedtuple('SampledProcess', 'grid values adapted')
SampledIntervalProcess = namedtuple('SampledIntervalProcess', 'lo hi')
McEstimate = namedtuple('McEstimate', 'mean stderr n')
TestReport = namedtuple('TestReport', 'table threshold verdict direction seed config')


class TimeGrid(__TimeGrid):
    """Uniform grid t_i = i T / n, i = 0..n"""
    __slots__ = ()

    def __new__(cls, horizon, steps):
        if not horizon > 0 or not np.isfinite(horizon):
            raise InvalidConfig('horizon must be a positive number, got {}'.format(horizon))
        if int(steps) != steps or steps < 1:
            raise InvalidConfig('steps must be a positive integer, got {}'.format(steps))
        return super().__new__(cls, float(horizon), int(steps))

    @property
    def dt(self):
        return self.horizon / self.steps

    @property
    def times(self):
        return np.arange(self.steps + 1) * self.dt

    def index(self, t):
        """Grid index of time t, raising GridMismatch off the grid

        >>> TimeGrid(1.0, 4).index(0.5)
        2
        """
        i = int(round(t / self.dt))
        if not 0 <= i <= self.steps or abs(i * self.dt - t) > 1e-9 * max(1.0, self.horizon):
            raise GridMismatch('time {} is not on the grid {}'.format(t, self))
        return i


class PathBundle(__PathBundle):
    """Brownian paths: values[p, i] is B at t_i on path p"""
    __slots__ = ()

    @property
    def n_paths(self):
        return self.values.shape[0]


def _brownian_chunk(args):
    seed_sequence, size, steps, dt = args
    rng = np.random.default_rng(seed_sequence)
    return rng.standard_normal((size, steps)) * np.sqrt(dt)


def gen_brownian(grid, n_paths, seed, jobs=1, chunk_size=CHUNK_SIZE):
    """
    Simulate n_paths Brownian paths on a grid. Chunk i of chunk_size paths
    draws from SeedSequence(seed).spawn(...)[i], so the bundle does not
    depend on the number of workers.

    Arguments:
    grid -- TimeGrid
    n_paths -- number of paths (>= 1)
    seed -- integer seed

    Keyword arguments:
    jobs -- number of worker processes (default 1)
    chunk_size -- paths per random substream (default 8192)
    """
    if n_paths < 1:
        raise InvalidConfig('need at least one path')
    n_chunks = -(-n_paths // chunk_size)
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    tasks = [(child, min(chunk_size, n_paths - i * chunk_size), grid.steps, grid.dt)
             for i, child in enumerate(children)]
    values = np.zeros((n_paths, grid.steps + 1))
    LOG.debug('Generating %d paths x %d steps in %d chunks', n_paths, grid.steps, n_chunks)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            chunks = executor.map(_brownian_chunk, tasks)
            for i, increments in enumerate(chunks):
                start = i * chunk_size
                values[start:start + len(increments), 1:] = np.cumsum(increments, axis=1)
    else:
        for i, task in enumerate(tasks):
            start = i * chunk_size
            increments = _brownian_chunk(task)
            values[start:start + len(increments), 1:] = np.cumsum(increments, axis=1)
    return PathBundle(grid, values, seed, chunk_size)


def _check_grid(process, paths):
    if process.grid != paths.grid or process.values.shape != paths.values.shape:
        raise GridMismatch('process on {} does not match paths on {}'.format(process.grid, paths.grid))


def constant_process(grid, n_paths, value):
    return SampledProcess(grid, np.full((n_paths, grid.steps + 1), float(value)), True)


def brownian_process(paths):
    return SampledProcess(paths.grid, paths.values, True)


def ito_integral(integrand, paths):
    """Left-endpoint Ito sums: value at t_k is sum_{i<k} g(t_i) (B(t_{i+1}) - B(t_i))"""
    _check_grid(integrand, paths)
    if not integrand.adapted:
        raise NotAdapted('integrand is not adapted')
    increments = integrand.values[:, :-1] * np.diff(paths.values, axis=1)
    values = np.zeros_like(paths.values)
    values[:, 1:] = np.cumsum(increments, axis=1)
    return SampledProcess(paths.grid, values, True)


def geometric_martingale(paths):
    """X_t = exp(B_t - t/2)"""
    return SampledProcess(paths.grid, np.exp(paths.values - 0.5 * paths.grid.times), True)


def interval_process(lo, hi):
    """Pathwise interval process [lo, hi]; OrderViolation carries the first
    offending (path, time index)"""
    if lo.grid != hi.grid or lo.values.shape != hi.values.shape:
        raise GridMismatch('endpoint processes live on different grids')
    offending = np.argwhere(lo.values > hi.values + EPS)
    if len(offending):
        path, time = (int(i) for i in offending[0])
        raise OrderViolation('lower endpoint above upper endpoint at path {}, step {}'.format(path, time),
                             location=(path, time))
    return SampledIntervalProcess(lo, hi)


def segment_pair(f, g, paths):
    """xi = int f dB, eta = int g dB and the segment process [min, max]"""
    xi, eta = ito_integral(f, paths), ito_integral(g, paths)
    lo = SampledProcess(paths.grid, np.minimum(xi.values, eta.values), True)
    hi = SampledProcess(paths.grid, np.maximum(xi.values, eta.values), True)
    return xi, eta, SampledIntervalProcess(lo, hi)


def mc_mean(values):
    values = np.asarray(values)
    n = len(values)
    stderr = float(values.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return McEstimate(float(values.mean()), stderr, n)


def mc_interval_expectation(M, t):
    """Endpoint estimates of E[a_t, b_t] = [E a_t, E b_t]"""
    i = M.lo.grid.index(t)
    return mc_mean(M.lo.values[:, i]), mc_mean(M.hi.values[:, i])


def mc_energy(x):
    """Estimate of E int_0^T x_t^2 dt by left Riemann sums"""
    return mc_mean(np.sum(x.values[:, :-1] ** 2, axis=1) * x.grid.dt)


def default_pairs(grid):
    """Three (s, t) pairs on the grid away from t = 0"""
    quarter, half = grid.steps // 4, grid.steps // 2
    times = grid.times
    pairs = [(times[max(quarter, 1)], times[max(half, 1)]),
             (times[max(half, 1)], times[-1]),
             (times[max(quarter, 1)], times[-1])]
    return sorted(set((float(s), float(t)) for s, t in pairs if s < t))


def _bin_labels(b_s, s):
    """Index of the equiprobable N(0, s) bin holding each B_s"""
    edges = norm.ppf(np.arange(1, N_BINS) / N_BINS) * np.sqrt(s)
    return np.digitize(b_s, edges)


def _row(s, t, name, statistic, stderr, threshold, passed):
    return {'s': s, 't': t, 'test_function': name, 'statistic': statistic,
            'stderr': stderr, 'threshold': threshold, 'verdict': 'pass' if passed else 'reject'}


def _direction(table):
    rejected = table[(table.verdict == 'reject') & (table.test_function != 'B_s')]
    if rejected.empty:
        return None
    signs = set(np.sign(rejected.statistic))
    if signs == {1.0}:
        return 'sub'
    if signs == {-1.0}:
        return 'super'
    return 'mixed'


def martingale_test(x, pairs, paths, alpha=0.01):
    """
    Orthogonality tests E[(x_t - x_s) Z] = 0 for Z = 1, Z = B_s and the
    indicators of 8 equiprobable bins of B_s, Bonferroni-corrected over
    all pairs and test functions. direction reports the sign of the
    rejected drift ('sub' for upward drift).
    """
    _check_grid(x, paths)
    grid = paths.grid
    threshold = bonferroni_threshold(alpha, len(pairs) * (2 + N_BINS))
    rows = []
    for s, t in pairs:
        i, j = grid.index(s), grid.index(t)
        if i >= j:
            raise GridMismatch('pair ({}, {}) is not increasing'.format(s, t))
        increment = x.values[:, j] - x.values[:, i]
        b_s = paths.values[:, i]
        labels = _bin_labels(b_s, s)
        functions = [('1', None), ('B_s', b_s)]
        functions += [('bin{}'.format(k), labels == k) for k in range(N_BINS)]
        for name, z in functions:
            estimate = mc_mean(increment if z is None else increment * z)
            passed = abs(estimate.mean) <= threshold * estimate.stderr + EPS
            rows.append(_row(s, t, name, estimate.mean, estimate.stderr, threshold, passed))
    table = pd.DataFrame(rows)
    verdict = bool((table.verdict == 'pass').all())
    LOG.debug('Martingale test over %d rows: %s', len(table), verdict)
    config = {'alpha': alpha, 'pairs': [list(p) for p in pairs], 'paths': paths.n_paths,
              'chunk_size': paths.chunk_size}
    return TestReport(table, threshold, verdict, _direction(table), paths.seed, config)


def directional_test(x, direction, pairs, paths, alpha=0.01):
    """
    One-sided tests on binned conditional means E[x_t - x_s | B_s in bin].
    'sub' fails when a bin mean is significantly negative, 'super' when
    one is significantly positive.
    """
    if direction not in ('sub', 'super'):
        raise InvalidConfig('direction must be sub or super')
    _check_grid(x, paths)
    grid = paths.grid
    threshold = bonferroni_threshold(alpha, len(pairs) * N_BINS, two_sided=False)
    sign = 1.0 if direction == 'sub' else -1.0
    rows = []
    for s, t in pairs:
        i, j = grid.index(s), grid.index(t)
        increment = x.values[:, j] - x.values[:, i]
        labels = _bin_labels(paths.values[:, i], s)
        for k in range(N_BINS):
            members = increment[labels == k]
            if len(members) < 2:
                continue
            estimate = mc_mean(members)
            passed = sign * estimate.mean >= -threshold * estimate.stderr - EPS
            rows.append(_row(s, t, 'bin{}'.format(k), estimate.mean, estimate.stderr,
                             threshold, passed))
    table = pd.DataFrame(rows)
    verdict = bool((table.verdict == 'pass').all())
    config = {'alpha': alpha, 'pairs': [list(p) for p in pairs], 'paths': paths.n_paths,
              'chunk_size': paths.chunk_size, 'direction': direction}
    return TestReport(table, threshold, verdict, direction if verdict else _direction(table),
                      paths.seed, config)


def ito_strong_error(paths, levels=4):
    """
    Errors of 1 + int X dB - X on successively coarser copies of one
    fine bundle (every 2**j-th grid point). Returns a DataFrame with the
    step count, RMS error at T and mean pathwise max error.
    """
    stride_max = 2 ** (levels - 1)
    if paths.grid.steps % stride_max:
        raise GridMismatch('{} steps cannot be halved {} times'.format(paths.grid.steps, levels - 1))
    rows = []
    for j in reversed(range(levels)):
        stride = 2 ** j
        grid = TimeGrid(paths.grid.horizon, paths.grid.steps // stride)
        coarse = PathBundle(grid, paths.values[:, ::stride], paths.seed, paths.chunk_size)
        X = geometric_martingale(coarse)
        error = np.abs(1.0 + ito_integral(X, coarse).values - X.values)
        rows.append({'steps': grid.steps,
                     'rms_error': float(np.sqrt(np.mean(error[:, -1] ** 2))),
                     'max_error': float(np.mean(error.max(axis=1)))})
    return pd.DataFrame(rows)


def build_example(name, paths):
    """
    Sampled interval processes used by the Monte Carlo experiments:
    exp-representable [X, 1 + X], exp-nonrepresentable [X, 2X] and
    segment [min(B, 2B), max(B, 2B)] (integrands f = 1, g = 2).
    """
    if name == 'segment':
        n = paths.n_paths
        return segment_pair(constant_process(paths.grid, n, 1.0),
                            constant_process(paths.grid, n, 2.0), paths)[2]
    X = geometric_martingale(paths)
    if name == 'exp-representable':
        return interval_process(X, SampledProcess(X.grid, 1.0 + X.values, True))
    if name == 'exp-nonrepresentable':
        return interval_process(X, SampledProcess(X.grid, 2.0 * X.values, True))
    raise InvalidConfig('unknown example {}'.format(name))
