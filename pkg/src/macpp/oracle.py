"""Brute-force ground truth: exact expectations, cross-checks, cumulants."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .backwall import DiscreteBackWall
from .partitions import enumerate_skew_pp, support_from_wall
from .weights import (WeightSpec, log_measure_weight,
                      log_measure_weight_via_coefficients)


@dataclass(frozen=True)
class CumulantRequest:
    """Order-nu joint cumulant of the listed (diagonal, order) observables."""

    order: int
    variables: tuple

    def __post_init__(self):
        if not (1 <= self.order <= 4):
            raise ValueError("cumulant order must be between 1 and 4")
        if len(self.variables) != self.order:
            raise ValueError("need one variable per slot")


def set_partitions(n: int):
    """All set partitions of {0, ..., n-1} as tuples of blocks."""
    if n == 0:
        return [()]
    out = []

    def rec(i, blocks):
        if i == n:
            out.append(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        rec(i + 1, blocks)
        blocks.pop()

    rec(0, [])
    return out


def _logsumexp(values):
    m = max(values)
    if m == -math.inf:
        return -math.inf
    return m + math.log(sum(math.exp(v - m) for v in values))


def exact_expectation(wall: DiscreteBackWall, spec: WeightSpec, observable,
                      cap: int, budget: int = 500_000):
    """Weighted average of `observable` over the capped enumeration.

    Returns (value, tail_bound) where tail_bound is a crude relative bound on
    the discarded mass: cells * (s_max r)^{cap+1} / (1 - s_max r).
    """
    support = support_from_wall(wall)
    swall = support.wall()
    logws = []
    vals = []
    for pp in enumerate_skew_pp(support, cap, budget):
        logws.append(log_measure_weight(pp, swall, spec))
        vals.append(observable(pp))
    logz = _logsumexp(logws)
    total = sum(v * math.exp(lw - logz) for v, lw in zip(vals, logws))
    smax = max(spec.s_at(v) for v in swall.interior_diagonals()) * spec.r
    tail = math.inf
    if smax < 1.0:
        tail = support.n_cells() * smax ** (cap + 1) / (1.0 - smax)
    return total, tail


def distribution_crosscheck(wall: DiscreteBackWall, spec: WeightSpec, cap: int,
                            budget: int = 500_000) -> float:
    """Max |p1/p2 - 1| between the two normalized weight assignments."""
    support = support_from_wall(wall)
    swall = support.wall()
    l1 = []
    l2 = []
    for pp in enumerate_skew_pp(support, cap, budget):
        l1.append(log_measure_weight(pp, swall, spec))
        l2.append(log_measure_weight_via_coefficients(pp, swall, spec))
    z1 = _logsumexp(l1)
    z2 = _logsumexp(l2)
    worst = 0.0
    for a, b in zip(l1, l2):
        worst = max(worst, abs(math.expm1((b - z2) - (a - z1))))
    return worst


def cumulant(moment, request: CumulantRequest) -> float:
    """Joint cumulant from mixed moments via the set-partition formula.

    `moment` maps a tuple of variables to E[prod of them]; the order-nu
    cumulant is sum over set partitions of (-1)^{d-1} (d-1)! prod of block
    moments.
    """
    nu = request.order
    vs = request.variables
    total = 0.0
    for blocks in set_partitions(nu):
        d = len(blocks)
        prod = 1.0
        for b in blocks:
            prod *= moment(tuple(vs[i] for i in b))
        total += (-1) ** (d - 1) * math.factorial(d - 1) * prod
    return total


def cumulant_from_samples(samples, order: int) -> float:
    """Plug-in joint cumulant of sampled vectors with `order` columns.

    A single column is broadcast, giving the marginal cumulant of that order.
    """
    import numpy as np

    arr = np.asarray(samples, dtype=float)
    if arr.ndim == 1:
        arr = np.repeat(arr[:, None], order, axis=1)
    if arr.shape[1] != order:
        raise ValueError("need one column per cumulant slot")
    total = 0.0
    for blocks in set_partitions(order):
        d = len(blocks)
        prod = 1.0
        for b in blocks:
            p = np.ones(arr.shape[0])
            for c in b:
                p = p * arr[:, c]
            prod *= float(p.mean())
        total += (-1) ** (d - 1) * math.factorial(d - 1) * prod
    return total
