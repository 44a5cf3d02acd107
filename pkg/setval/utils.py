"""Utility functions"""
import math
import numpy as np
from scipy.stats import norm
from .errors import NonFinite

# absolute slack for interval endpoints / coordinates
EPS = 1e-12
# Hausdorff slack for hull arithmetic in r >= 2
HULL_EPS = 1e-9
MAX_DIMENSION = 3


def check_finite(*values):
    """Raise NonFinite unless every value is a finite real number

    >>> check_finite(1.0, -2)
    >>> check_finite(1.0, float('nan'))
    Traceback (most recent call last):
    ...
    setval.errors.NonFinite: non-finite value: nan
    """
    for value in values:
        if not math.isfinite(value):
            raise NonFinite('non-finite value: {}'.format(value))


def as_points(points):
    """
    Given a point, a list of points or an array, return an
    N by r float array of points.

    Arguments:
    points -- a scalar, a sequence of coordinates or a nested sequence

    >>> as_points(3.0).shape
    (1, 1)
    >>> as_points([[0, 0], [1, 0]]).shape
    (2, 2)
    """
    pts = np.array(points, dtype=np.float64)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if not np.all(np.isfinite(pts)):
        raise NonFinite('non-finite coordinates in {}'.format(points))
    return pts


def castaing_weights(n):
    """
    The first n terms of the enumeration of dyadic rationals in [0, 1]
    used for Castaing sequences: 0, 1, then 1/2, 1/4, 3/4, 1/8, ...

    >>> castaing_weights(6)
    [0.0, 1.0, 0.5, 0.25, 0.75, 0.125]
    """
    weights = [0.0, 1.0][:n]
    level = 1
    while len(weights) < n:
        denominator = 2 ** level
        for numerator in range(1, denominator, 2):
            if len(weights) == n:
                break
            weights.append(numerator / denominator)
        level += 1
    return weights


def bonferroni_threshold(alpha, m, two_sided=True):
    """Standard normal critical value for a family of m tests at
    family level alpha"""
    m = max(m, 1)
    tail = alpha / (2 * m) if two_sided else alpha / m
    return float(norm.ppf(1.0 - tail))
