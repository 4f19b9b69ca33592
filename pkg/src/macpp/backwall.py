"""Back-wall profiles: discrete 0/1-slope walls and their piecewise-linear limits.

A discrete wall records the slope bit of every lattice edge of the upper
boundary of a skew support. A limit wall is continuous piecewise linear with
slopes in {i/p}; which limit walls actually arise from summable measures is
governed by a family of exponential inequalities encoded here, together with
the derived quantities rho_<, rho_> and the singular points where they touch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

INF = float("inf")


class SMultiset:
    """Multiset of cumulative products of one period of positive weights.

    Built from the period (s_0, ..., s_{p-1}); holds the sorted labels
    tau_1 >= ... >= tau_p (with tau_0 = +inf, tau_{p+1} = 0), the distinct
    values sigma_1 > ... > sigma_d with multiplicities, and the cumulative
    slope ladder varsigma_0 = 0 < ... < varsigma_d = 1.
    """

    def __init__(self, s: Sequence[float]):
        if not s or any(v <= 0 for v in s):
            raise ValueError("period weights must be positive")
        self.s = tuple(float(v) for v in s)
        self.p = len(self.s)
        prods = []
        acc = 1.0
        for v in self.s:
            acc *= v
            prods.append(acc)
        self.products = tuple(prods)          # s_0...s_i, i = 0..p-1
        self.tau = tuple(sorted(prods, reverse=True))
        dist = sorted(set(prods), reverse=True)
        self.sigma = tuple(dist)              # sigma_1 > ... > sigma_d
        self.d = len(dist)
        self.mult = tuple(prods.count(v) for v in dist)
        cum = [0.0]
        for m in self.mult:
            cum.append(cum[-1] + m / self.p)
        self.varsigma = tuple(cum)            # varsigma_0..varsigma_d

    def tau_at(self, i: int) -> float:
        """tau_i with the conventions tau_0 = +inf and tau_{p+1} = 0."""
        if i <= 0:
            return INF
        if i > self.p:
            return 0.0
        return self.tau[i - 1]

    def varsigma_of(self, sigma: float) -> float:
        """Cumulative slope attached to the distinct value sigma."""
        for a, v in enumerate(self.sigma, start=1):
            if v == sigma:
                return self.varsigma[a]
        raise ValueError("%r is not a value of the multiset" % (sigma,))

    def slope_level(self, slope: float, tol: float = 1e-12):
        """Index a with varsigma_a == slope, or None."""
        for a, v in enumerate(self.varsigma):
            if abs(v - slope) <= tol:
                return a
        return None

    def smallest_indices(self, count: int):
        """Indices a of the `count` smallest products s_0..s_a (ties: lowest a)."""
        order = sorted(range(self.p), key=lambda a: (self.products[a], a))
        return sorted(order[:count])


@dataclass(frozen=True)
class LimitBackWall:
    """Continuous piecewise-linear wall profile.

    kinks[0] may be -inf and kinks[-1] may be +inf; slopes[l] is the slope
    on (kinks[l], kinks[l+1]). The anchor fixes the additive constant.
    Conventions: slope 0 to the left of the domain, slope 1 to the right.
    """

    kinks: tuple
    slopes: tuple
    anchor: tuple = (0.0, 0.0)

    def __post_init__(self):
        kinks = tuple(float(v) for v in self.kinks)
        slopes = tuple(float(v) for v in self.slopes)
        object.__setattr__(self, "kinks", kinks)
        object.__setattr__(self, "slopes", slopes)
        if len(kinks) != len(slopes) + 1:
            raise ValueError("need one more kink than slopes")
        if any(a >= b for a, b in zip(kinks, kinks[1:])):
            raise ValueError("kinks must be strictly increasing")
        if math.isinf(kinks[0]) and kinks[0] > 0:
            raise ValueError("left end may only be -inf")
        if math.isinf(kinks[-1]) and kinks[-1] < 0:
            raise ValueError("right end may only be +inf")
        for a, b in zip(slopes, slopes[1:]):
            if a == b:
                raise ValueError("kinks must separate distinct slopes")
        x0 = self.anchor[0]
        if math.isinf(x0) or not (kinks[0] <= x0 <= kinks[-1]):
            raise ValueError("anchor must be a finite point of the domain")

    @property
    def n_pieces(self) -> int:
        return len(self.slopes)

    def interior_kinks(self):
        return self.kinks[1:-1]

    def slope_on_piece(self, ell: int) -> float:
        """Slope on (kinks[ell-1], kinks[ell]), 1-indexed like the kinks."""
        return self.slopes[ell - 1]

    def slope_left(self, x: float) -> float:
        """One-sided slope at x from the left (0 left of the domain)."""
        if x <= self.kinks[0]:
            return 0.0
        for ell in range(self.n_pieces, 0, -1):
            if x > self.kinks[ell - 1]:
                return self.slopes[ell - 1]
        return 0.0

    def slope_right(self, x: float) -> float:
        """One-sided slope at x from the right (1 right of the domain)."""
        if x >= self.kinks[-1]:
            return 1.0
        for ell in range(1, self.n_pieces + 1):
            if x < self.kinks[ell]:
                return self.slopes[ell - 1]
        return 1.0

    def value(self, x: float) -> float:
        """Wall height at x, from the anchor and the slopes."""
        x0, b0 = self.anchor
        lo, hi = (x0, x) if x0 <= x else (x, x0)
        total = 0.0
        for ell in range(1, self.n_pieces + 1):
            a = max(lo, self.kinks[ell - 1])
            b = min(hi, self.kinks[ell])
            if b > a:
                total += (b - a) * self.slopes[ell - 1]
        return b0 + total if x >= x0 else b0 - total

    def to_json(self) -> str:
        def enc(v):
            if v == -INF:
                return "-inf"
            if v == INF:
                return "+inf"
            return v
        return json.dumps({
            "kinks": [enc(v) for v in self.kinks],
            "slopes": list(self.slopes),
            "anchor": list(self.anchor),
        })

    @classmethod
    def from_json(cls, text: str) -> "LimitBackWall":
        data = json.loads(text) if isinstance(text, str) else text
        def dec(v):
            if v in ("-inf", "-Infinity"):
                return -INF
            if v in ("+inf", "inf", "Infinity"):
                return INF
            return float(v)
        return cls(tuple(dec(v) for v in data["kinks"]),
                   tuple(data["slopes"]),
                   tuple(data.get("anchor", (0.0, 0.0))))


@dataclass(frozen=True)
class DiscreteBackWall:
    """Lattice wall on the interval (v_min, v_max): one slope bit per edge.

    Edges sit at half-integers v_min + 1/2, ..., v_max - 1/2; bit 1 means the
    wall rises across that edge. Heights B(v) are anchored at B(v_min).
    """

    v_min: int
    v_max: int
    bits: tuple
    anchor: float = 0.0

    def __post_init__(self):
        if self.v_max <= self.v_min:
            raise ValueError("empty wall interval")
        if len(self.bits) != self.v_max - self.v_min:
            raise ValueError("expected one bit per edge")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("slope bits must be 0 or 1")

    def edges(self):
        """All edge positions as half-integers."""
        return [self.v_min + 0.5 + k for k in range(len(self.bits))]

    def interior_diagonals(self):
        return range(self.v_min + 1, self.v_max)

    def bit(self, e: float) -> int:
        """Slope bit at edge e (a half-integer in the interval)."""
        k = e - self.v_min - 0.5
        ik = int(round(k))
        if abs(k - ik) > 1e-9 or not (0 <= ik < len(self.bits)):
            raise ValueError("edge %r outside the wall" % (e,))
        return self.bits[ik]

    def height(self, v: int) -> float:
        """Wall height B(v) at an integer diagonal."""
        if not (self.v_min <= v <= self.v_max):
            raise ValueError("diagonal %r outside the wall" % (v,))
        return self.anchor + sum(self.bits[: v - self.v_min])

    @property
    def n_rises(self) -> int:
        return sum(self.bits)

    def to_json(self) -> str:
        return json.dumps({"v_min": self.v_min, "v_max": self.v_max,
                           "bits": list(self.bits), "anchor": self.anchor})

    @classmethod
    def from_json(cls, text: str) -> "DiscreteBackWall":
        d = json.loads(text) if isinstance(text, str) else text
        return cls(int(d["v_min"]), int(d["v_max"]),
                   tuple(int(b) for b in d["bits"]), float(d.get("anchor", 0.0)))


def _kink_pairs(bw: LimitBackWall):
    """All ordered kink pairs (V, W), V <= W, including V == W."""
    ks = bw.kinks
    for a in range(len(ks)):
        for b in range(a, len(ks)):
            yield ks[a], ks[b]


def validate_limit_backwall(bw: LimitBackWall, S: SMultiset, tol: float = 1e-12):
    """Membership report for the admissible class of limit walls.

    Checks that every slope is a multiple of 1/p and that for every ordered
    pair of kinks V <= W with left slope i/p at V and right slope j/p at W,
    tau_i^{-1} tau_{j+1} e^{-(W-V)} <= 1. Returns (member, violations) where
    each violation is (V, W, product).
    """
    violations = []
    p = S.p
    for sl in bw.slopes:
        i = round(sl * p)
        if abs(sl * p - i) > 1e-9 or not (0 <= i <= p):
            violations.append((None, None, sl))
    for V, W in _kink_pairs(bw):
        i = round(bw.slope_left(V) * p)
        j = round(bw.slope_right(W) * p)
        ti = S.tau_at(i)
        tj = S.tau_at(j + 1)
        if ti == INF or tj == 0.0:
            continue
        gap = 0.0 if (math.isinf(V) or math.isinf(W)) else W - V
        if math.isinf(W) or math.isinf(V):
            # e^{-(W-V)} = 0 when the pair spans an infinite gap
            if W != V:
                continue
        prod = (tj / ti) * math.exp(-gap)
        if prod > 1.0 + tol:
            violations.append((V, W, prod))
    return (len(violations) == 0), violations


def rho_less(bw: LimitBackWall, S: SMultiset, x: float) -> float:
    """Largest rescaled pole position produced by the wall left of x.

    max over pieces (V_{l-1}, V_l) with V_{l-1} < x of tau_i^{-1} e^{min(x, V_l)}
    where i/p is the piece slope; empty max is 0.
    """
    best = 0.0
    for ell in range(1, bw.n_pieces + 1):
        if bw.kinks[ell - 1] < x:
            i = round(bw.slope_on_piece(ell) * S.p)
            ti = S.tau_at(i)
            if ti == INF:
                continue
            e = min(x, bw.kinks[ell])
            best = max(best, math.exp(e) / ti)
    return best


def rho_greater(bw: LimitBackWall, S: SMultiset, x: float) -> float:
    """Smallest rescaled pole position produced by the wall right of x."""
    best = INF
    for ell in range(1, bw.n_pieces + 1):
        if bw.kinks[ell] > x:
            i = round(bw.slope_on_piece(ell) * S.p)
            tj = S.tau_at(i + 1)
            if tj == 0.0:
                continue
            e = max(x, bw.kinks[ell - 1])
            best = min(best, math.exp(e) / tj)
    return best


def is_regular(bw: LimitBackWall, S: SMultiset, tol: float = 1e-12) -> bool:
    """True iff the wall is admissible with finitely many singular points.

    Requires every slope to sit on the cumulative ladder {varsigma_a} and
    rho_<(V) < rho_>(W) strictly for all kinks V < W.
    """
    member, _ = validate_limit_backwall(bw, S, tol)
    if not member:
        return False
    for sl in bw.slopes:
        if S.slope_level(sl, tol) is None:
            return False
    finite = [v for v in bw.kinks if not math.isinf(v)]
    for a in range(len(finite)):
        for b in range(a + 1, len(finite)):
            if rho_less(bw, S, finite[a]) >= rho_greater(bw, S, finite[b]) * (1.0 - tol):
                return False
    return True


def singular_points(bw: LimitBackWall, S: SMultiset):
    """Kinks where the slope strictly drops; there rho_< = rho_> = sigma_i^{-1} e^V.

    Only defined for regular walls (otherwise singular points form a continuum).
    """
    if not is_regular(bw, S):
        raise ValueError("wall is not regular: singular points are not isolated")
    out = []
    for V in bw.kinks:
        if math.isinf(V):
            continue
        if bw.slope_right(V) < bw.slope_left(V):
            out.append(V)
    return sorted(out)


def discretize(bw: LimitBackWall, S: SMultiset, s: Sequence[float], epsilon: float,
               window: int | None = None) -> DiscreteBackWall:
    """Lattice wall with kinks v_l = floor(V_l / eps) + l and p-periodic bits.

    Within a block of limiting slope i/p the raised edges sit at residues
    carrying the i smallest products s_0..s_a (ties resolved by lowest index).
    Infinite ends are cut at +-floor(1/eps^2) unless `window` overrides that.
    """
    member, viol = validate_limit_backwall(bw, S)
    if not member:
        raise ValueError("wall is not admissible: %r" % (viol[:3],))
    if tuple(S.s) != tuple(float(v) for v in s):
        S = SMultiset(s)
    p = S.p
    cut = window if window is not None else int(1.0 / epsilon ** 2)
    vks = []
    for ell, V in enumerate(bw.kinks):
        if V == -INF:
            vks.append(-cut)
        elif V == INF:
            vks.append(cut)
        else:
            vks.append(int(math.floor(V / epsilon)) + ell)
    if any(b - a < p for a, b in zip(vks, vks[1:])):
        raise ValueError("epsilon too coarse: a block holds less than one period")
    v_min, v_max = vks[0], vks[-1]
    bits = []
    for k in range(v_max - v_min):
        e = v_min + 0.5 + k
        ell = next(l for l in range(1, len(vks)) if e < vks[l])
        slope = bw.slope_on_piece(ell)
        i = round(slope * p)
        members = S.smallest_indices(i)
        bits.append(1 if (int(math.floor(e)) % p) in members else 0)
    # centre the anchor: the weights ignore it, so pick the height offset
    # that best approximates the limiting profile across the window
    cum = 0
    devs = []
    for k, v in enumerate(range(v_min, v_max + 1)):
        if k > 0:
            cum += bits[k - 1]
        xv = min(max(bw.kinks[0], epsilon * v), bw.kinks[-1])
        devs.append(cum - bw.value(xv) / epsilon)
    anchor = -0.5 * (max(devs) + min(devs))
    return DiscreteBackWall(v_min, v_max, tuple(bits), anchor)
