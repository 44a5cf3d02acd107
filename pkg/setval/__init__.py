"""Set-valued stochastic integrals and martingale representation checks"""
__version__ = '0.1.0'

from .convex import Interval, ConvexBody, convex_body
from .errors import SetValuedError

__all__ = ['Interval', 'ConvexBody', 'convex_body', 'SetValuedError', '__version__']
