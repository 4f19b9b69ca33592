"""Measure weights on skew plane partitions, two independent ways.

The first route multiplies semilocal turn interactions with the per-diagonal
volume factors; the second chains single-variable skew branching coefficients
along the wall edges. Both are kept in log space; their agreement up to one
support-wide constant is the central consistency check of the package.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .backwall import DiscreteBackWall
from .partitions import (SkewPlanePartition, Turn, part, support_from_wall,
                         turn_levels)
from .qseries import (interlaces, log_qpochhammer_inf, phi_coeff, psi_coeff)

LOG_EPS = 1e-300


@dataclass(frozen=True)
class WeightSpec:
    """Parameters (p, s, r, frak_t, alpha) of the weighted measure.

    Derived: t = r^frak_t, q = t^alpha, epsilon = -log r. The period
    weights s are indexed periodically by the diagonal, s_v = s[v mod p].
    """

    p: int
    s: tuple
    r: float
    frak_t: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        if len(self.s) != self.p or self.p < 1:
            raise ValueError("need exactly p period weights")
        if any(v <= 0 for v in self.s):
            raise ValueError("period weights must be positive")
        if not (0.0 < self.r < 1.0):
            raise ValueError("r must be in (0, 1)")
        if self.frak_t <= 0 or self.alpha <= 0:
            raise ValueError("frak_t and alpha must be positive")

    @property
    def t(self) -> float:
        return self.r ** self.frak_t

    @property
    def q(self) -> float:
        return self.t ** self.alpha

    @property
    def epsilon(self) -> float:
        return -math.log(self.r)

    def s_at(self, v: int) -> float:
        return self.s[v % self.p]

    def balanced(self) -> bool:
        """True when one period of weights multiplies to 1 (limit regime)."""
        return abs(math.prod(self.s) - 1.0) < 1e-12

    def to_json(self) -> str:
        return json.dumps({"p": self.p, "s": list(self.s), "r": self.r,
                           "frak_t": self.frak_t, "alpha": self.alpha})

    @classmethod
    def from_json(cls, text) -> "WeightSpec":
        d = json.loads(text) if isinstance(text, str) else text
        return cls(int(d["p"]), tuple(d["s"]), float(d["r"]),
                   float(d.get("frak_t", 1.0)), float(d.get("alpha", 1.0)))

    @classmethod
    def schur(cls, r: float, p: int = 1, s=None) -> "WeightSpec":
        """Non-interacting case q = t (alpha = 1)."""
        return cls(p, tuple(s) if s is not None else (1.0,) * p, r, 1.0, 1.0)


def log_turn_value(lam, k: int, z: int, spec: WeightSpec) -> float:
    """log of the interaction of one turn with the horizontal tiles above it.

    For the turn in gap k at level z, exactly the tiles of parts 1..k sit
    above, and the factor for part i is
    (1 - t^{alpha(lam_i - z - 1) + k - i + 1}) / (1 - t^{alpha(lam_i - z) + k - i}).
    """
    t = spec.t
    a = spec.alpha
    lt = math.log(t)
    out = 0.0
    for i in range(1, k + 1):
        num = a * (part(lam, i) - z - 1) + (k - i + 1)
        den = a * (part(lam, i) - z) + (k - i)
        out += math.log1p(-math.exp(num * lt)) - math.log1p(-math.exp(den * lt))
    return out


def turn_weight(pp: SkewPlanePartition, turn: Turn, spec: WeightSpec) -> float:
    """Interaction weight of a single turn of pp (1.0 above the top gap)."""
    lam = pp.diagonal(turn.x)
    return math.exp(log_turn_value(lam, turn.gap, turn.level, spec))


def log_diagonal_turn_sum(lam, mu_left, nu_right, b_left, b_right,
                          spec: WeightSpec) -> float:
    """Signed sum of log turn values on one diagonal.

    External turns count +1, internal turns -1; only gaps k >= 1 can carry a
    value different from 1, so the sum is finite.
    """
    if spec.alpha == 1.0 or not lam:
        return 0.0
    total = 0.0
    for k, z, kind in turn_levels(lam, mu_left, nu_right, b_left, b_right,
                                  z_top=part(lam, 1)):
        if k == 0:
            continue
        sign = 1.0 if kind == "external" else -1.0
        total += sign * log_turn_value(lam, k, z, spec)
    return total


def log_macdonald_weight(pp: SkewPlanePartition, spec: WeightSpec,
                         wall: DiscreteBackWall | None = None) -> float:
    """log of the product of turn interactions over all diagonals."""
    if wall is None:
        wall = pp.support.wall()
    total = 0.0
    for x in wall.interior_diagonals():
        total += log_diagonal_turn_sum(
            pp.diagonal(x), pp.diagonal(x - 1), pp.diagonal(x + 1),
            wall.bit(x - 0.5), wall.bit(x + 0.5), spec)
    return total


def macdonald_weight(pp: SkewPlanePartition, spec: WeightSpec) -> float:
    return math.exp(log_macdonald_weight(pp, spec))


def log_measure_weight(pp: SkewPlanePartition, wall: DiscreteBackWall,
                       spec: WeightSpec) -> float:
    """Unnormalized log weight: turn interactions times prod_v (s_v r)^{|pi^v|}."""
    total = log_macdonald_weight(pp, spec, wall)
    logr = math.log(spec.r)
    for v in wall.interior_diagonals():
        n = sum(pp.diagonal(v))
        if n:
            total += n * (math.log(spec.s_at(v)) + logr)
    return total


def measure_weight(pp, wall, spec) -> float:
    return math.exp(log_measure_weight(pp, wall, spec))


def log_edge_specialization(wall: DiscreteBackWall, spec: WeightSpec) -> dict:
    """log a_e for each edge e: the running product of r_v over diagonals v < e."""
    out = {}
    acc = 0.0
    logr = math.log(spec.r)
    for e in wall.edges():
        out[e] = acc
        v = int(e + 0.5)  # the diagonal just right of e
        if v < wall.v_max:
            acc += math.log(spec.s_at(v)) + logr
    return out


def log_measure_weight_via_coefficients(pp: SkewPlanePartition,
                                        wall: DiscreteBackWall,
                                        spec: WeightSpec) -> float:
    """log weight from the chain of skew branching coefficients along the wall.

    Each edge e contributes psi (rising) or phi (falling) at the adjacent
    diagonal pair together with a_e^{+-(size difference)}. Equals the turn
    route up to one constant per support. Returns -inf on interlacing failure.
    """
    q, t = spec.q, spec.t
    loga = log_edge_specialization(wall, spec)
    chain = [()] + [pp.diagonal(v) for v in wall.interior_diagonals()] + [()]
    total = 0.0
    for k, e in enumerate(wall.edges()):
        lo, hi = chain[k], chain[k + 1]
        dsize = sum(hi) - sum(lo)
        if wall.bit(e) == 1:
            coef = psi_coeff(hi, lo, q, t)
        else:
            coef = phi_coeff(lo, hi, q, t)
        if coef <= 0.0:
            return -math.inf
        total += math.log(coef) - dsize * loga[e]
    return total


def measure_weight_via_coefficients(pp, wall, spec) -> float:
    return math.exp(log_measure_weight_via_coefficients(pp, wall, spec))


def summability_check(wall: DiscreteBackWall, spec: WeightSpec):
    """(ok, witness): a_e1^{-1} a_e2 < 1 for every rise e1 left of a fall e2."""
    loga = log_edge_specialization(wall, spec)
    edges = wall.edges()
    best = None
    run_max = -math.inf  # max log a_e1 over rises seen so far
    arg = None
    for e in edges:
        if wall.bit(e) == 1 and loga[e] > run_max:
            run_max, arg = loga[e], e
        elif wall.bit(e) == 0 and arg is not None:
            val = loga[e] - run_max
            if best is None or val > best[0]:
                best = (val, arg, e)
    if best is None or best[0] < 0.0:
        return True, None
    return False, (best[1], best[2])


def log_partition_function(wall: DiscreteBackWall, spec: WeightSpec) -> float:
    """log of the exact normalizing constant of the coefficient route.

    Product over rise/fall edge pairs e1 < e2 of
    (t a_e2/a_e1; q)_infty / (a_e2/a_e1; q)_infty.
    """
    ok, witness = summability_check(wall, spec)
    if not ok:
        raise ValueError("weights not summable; witness pair %r" % (witness,))
    q, t = spec.q, spec.t
    loga = log_edge_specialization(wall, spec)
    edges = wall.edges()
    total = 0.0
    for i, e1 in enumerate(edges):
        if wall.bit(e1) != 1:
            continue
        for e2 in edges[i + 1:]:
            if wall.bit(e2) != 0:
                continue
            u = math.exp(loga[e2] - loga[e1])
            total += log_qpochhammer_inf(t * u, q) - log_qpochhammer_inf(u, q)
    return total


def partition_function_exact(wall, spec) -> float:
    return math.exp(log_partition_function(wall, spec))
