"""Periodically weighted random plane partitions.

Exact finite measures on skew plane partitions with semilocal (q,t)
interactions, contour-integral moment formulas, MCMC sampling, limit-shape
height functions, frozen-boundary parametrizations, and limiting Gaussian
covariances.
"""

from .backwall import DiscreteBackWall, LimitBackWall, SMultiset
from .partitions import SkewPlanePartition, SkewSupport, Turn
from .weights import WeightSpec

__all__ = [
    "DiscreteBackWall",
    "LimitBackWall",
    "SMultiset",
    "SkewPlanePartition",
    "SkewSupport",
    "Turn",
    "WeightSpec",
]

__version__ = "0.1.0"
