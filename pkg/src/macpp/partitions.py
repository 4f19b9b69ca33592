"""Partitions, skew plane partitions, diagonal sections, turns, heights.

Plane partitions are stored densely per diagonal (one ordinary partition per
integer diagonal of the support) with interlacing validated against the wall
bits; the (i, j) grid view is derived. Turns are computed from the interlacing
pattern of neighbouring diagonals, never from rasterized tilings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

from .backwall import DiscreteBackWall
from .qseries import interlaces

__all__ = [
    "SkewSupport", "SkewPlanePartition", "Turn", "interlaces",
    "normalize_partition", "diagonal_sections", "enumerate_skew_pp",
    "turns", "height_function", "support_from_wall",
]


def normalize_partition(parts):
    """Canonical tuple form: weakly decreasing, trailing zeros stripped."""
    parts = tuple(int(v) for v in parts)
    if any(a < b for a, b in zip(parts, parts[1:])):
        raise ValueError("parts must be weakly decreasing")
    if parts and parts[-1] < 0:
        raise ValueError("parts must be nonnegative")
    n = len(parts)
    while n > 0 and parts[n - 1] == 0:
        n -= 1
    return parts[:n]


def part(parts, i):
    """1-indexed part with zero padding."""
    return parts[i - 1] if 1 <= i <= len(parts) else 0


@dataclass(frozen=True)
class SkewSupport:
    """Skew shape (N^M)/mu: an M x N rectangle minus the partition mu."""

    N: int
    M: int
    mu: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "mu", normalize_partition(self.mu))
        if self.N <= 0 or self.M <= 0:
            raise ValueError("rectangle dimensions must be positive")
        if len(self.mu) > self.M or (self.mu and self.mu[0] > self.N):
            raise ValueError("mu must fit inside the rectangle")

    def wall(self) -> DiscreteBackWall:
        """Slope bits of the upper boundary on the interval (-M, N).

        The wall rises exactly at the edges mu_i - i + 1/2 for i = 1..M.
        """
        rises = {self.mu[i - 1] - i if i <= len(self.mu) else -i
                 for i in range(1, self.M + 1)}
        bits = tuple(1 if v in rises else 0 for v in range(-self.M, self.N))
        return DiscreteBackWall(-self.M, self.N, bits)

    def diagonals(self):
        """Interior diagonal indices v with -M < v < N."""
        return range(-self.M + 1, self.N)

    def max_length(self, v: int) -> int:
        """Largest possible number of parts of the diagonal-v section."""
        w = self.wall()
        left = sum(w.bits[: v - w.v_min])
        right = (w.v_max - v) - sum(w.bits[v - w.v_min:])
        return min(left, right)

    def n_cells(self) -> int:
        return self.N * self.M - sum(self.mu)

    def first_row(self, v: int) -> int:
        """Least row index a such that (a, v+a) is a cell, or 0 if none."""
        for a in range(1, self.M + 1):
            j = v + a
            if 1 <= j <= self.N and part(self.mu, a) < j:
                return a
        return 0


def support_from_wall(wall: DiscreteBackWall) -> SkewSupport:
    """Rebuild (N^M)/mu from wall slope bits: rises at mu_i - i + 1/2."""
    M = wall.n_rises
    N = len(wall.bits) - M
    if M == 0 or N == 0:
        raise ValueError("wall must rise and fall at least once")
    rise_edges = [e for e, b in zip(wall.edges(), wall.bits) if b == 1]
    offset = wall.v_min + M  # shift so the interval becomes (-M, N)
    mu = []
    for i, e in enumerate(sorted(rise_edges, reverse=True), start=1):
        mu.append(int(round(e - 0.5 - offset)) + i)
    return SkewSupport(N, M, normalize_partition(mu))


@dataclass(frozen=True)
class SkewPlanePartition:
    """Diagonal sections of a skew plane partition, interlacing-validated."""

    support: SkewSupport
    diagonals: tuple = field(default=None)

    def __post_init__(self):
        if self.diagonals is None:
            object.__setattr__(
                self, "diagonals",
                tuple(() for _ in self.support.diagonals()))
        diags = tuple(normalize_partition(d) for d in self.diagonals)
        object.__setattr__(self, "diagonals", diags)
        vs = list(self.support.diagonals())
        if len(diags) != len(vs):
            raise ValueError("need one partition per interior diagonal")
        wall = self.support.wall()
        chain = [()] + list(diags) + [()]
        for k, e in enumerate(wall.edges()):
            lo, hi = chain[k], chain[k + 1]
            if wall.bits[k] == 1:
                if not interlaces(lo, hi):
                    raise ValueError("diagonals fail interlacing at edge %r" % e)
            else:
                if not interlaces(hi, lo):
                    raise ValueError("diagonals fail interlacing at edge %r" % e)

    def diagonal(self, v: int):
        vs = self.support.diagonals()
        if not (vs.start <= v < vs.stop):
            return ()
        return self.diagonals[v - vs.start]

    def volume(self) -> int:
        return sum(sum(d) for d in self.diagonals)

    def entry(self, i: int, j: int) -> int:
        """Grid entry pi_{i,j}; derived from the diagonal storage."""
        v = j - i
        a = self.support.first_row(v)
        if a == 0 or i < a:
            raise KeyError((i, j))
        return part(self.diagonal(v), i - a + 1)

    def to_grid(self):
        """Dense {(i, j): entry} map over the support cells."""
        out = {}
        for v in self.support.diagonals():
            a = self.support.first_row(v)
            if a == 0:
                continue
            for k in range(self.support.max_length(v)):
                out[(a + k, v + a + k)] = part(self.diagonal(v), k + 1)
        return out

    @classmethod
    def from_grid(cls, support: SkewSupport, entries) -> "SkewPlanePartition":
        """Build from {(i, j): value} or a row-major list of rows."""
        if not isinstance(entries, dict):
            grid = {}
            for i, row in enumerate(entries, start=1):
                for j, val in enumerate(row, start=1):
                    grid[(i, j)] = val
            entries = grid
        diags = []
        for v in support.diagonals():
            a = support.first_row(v)
            vals = []
            if a > 0:
                for k in range(support.max_length(v)):
                    vals.append(int(entries.get((a + k, v + a + k), 0)))
            diags.append(normalize_partition(vals))
        return cls(support, tuple(diags))

    def to_json(self) -> str:
        return json.dumps({
            "N": self.support.N, "M": self.support.M,
            "mu": list(self.support.mu),
            "diagonals": [list(d) for d in self.diagonals],
        })

    @classmethod
    def from_json(cls, text: str) -> "SkewPlanePartition":
        d = json.loads(text) if isinstance(text, str) else text
        sup = SkewSupport(int(d["N"]), int(d["M"]), tuple(d["mu"]))
        return cls(sup, tuple(tuple(row) for row in d["diagonals"]))


def diagonal_sections(pp: SkewPlanePartition):
    """[(v, partition)] over the interior diagonals of the support."""
    return [(v, pp.diagonal(v)) for v in pp.support.diagonals()]


@dataclass(frozen=True)
class Turn:
    """Vertical unit of the tiling profile where the two slant kinds meet."""

    x: int
    y_minus: float
    y_plus: float
    kind: str            # "internal" | "external"
    gap: int             # index k of the gap below part k (0 = above the top)
    level: int           # integer height z of the unit (z, z+1)


# A convex corner of the stepped surface (both neighbouring columns lower)
# is an external turn; fixed against the coefficient-route measure.
CONVEX_KIND = "external"
CONCAVE_KIND = "internal"


def _gap_partners(lam, mu_left, nu_right, b_left, b_right, k):
    """Neighbour column heights flanking gap k of lam (inf = wall above)."""
    if b_left == 1:
        left = float("inf") if k == 0 else part(mu_left, k)
    else:
        left = part(mu_left, k + 1)
    if b_right == 0:
        right = float("inf") if k == 0 else part(nu_right, k)
    else:
        right = part(nu_right, k + 1)
    return left, right


def turn_levels(lam, mu_left, nu_right, b_left, b_right, z_top=None):
    """Classified turn levels (gap k, level z, kind) for one diagonal.

    Levels run over every unit step of every gap of lam; a level carries a
    turn iff both flanking columns are on the same side of it. Gap 0 levels
    (above the top part) are reported up to z_top (default: one level above
    everything in sight).
    """
    out = []
    if z_top is None:
        tops = [part(lam, 1), part(mu_left, 1), part(nu_right, 1)]
        z_top = max(tops) + 1
    ell = len(lam)
    for k in range(0, ell + 1):
        hi = part(lam, k) if k >= 1 else z_top
        lo = part(lam, k + 1)
        if k == 0:
            hi = max(z_top, lo)
        for z in range(lo, hi):
            left, right = _gap_partners(lam, mu_left, nu_right, b_left, b_right, k)
            if left >= z + 1 and right >= z + 1:
                out.append((k, z, CONCAVE_KIND))
            elif left <= z and right <= z:
                out.append((k, z, CONVEX_KIND))
    return out


def turns(pp: SkewPlanePartition, spec, x: int, z_top=None):
    """All turns of pp on diagonal x, in alpha-coordinates.

    `spec` provides alpha; y-positions are anchored at the wall height B(x)
    of the support wall. Turns above the top tile are cut off at z_top.
    """
    wall = pp.support.wall()
    if not (wall.v_min < x < wall.v_max):
        raise ValueError("diagonal %r outside the support" % x)
    alpha = spec.alpha if hasattr(spec, "alpha") else float(spec)
    lam = pp.diagonal(x)
    mu_left = pp.diagonal(x - 1)
    nu_right = pp.diagonal(x + 1)
    b_left = wall.bit(x - 0.5)
    b_right = wall.bit(x + 0.5)
    bx = wall.height(x)
    out = []
    for k, z, kind in turn_levels(lam, mu_left, nu_right, b_left, b_right, z_top):
        y0 = alpha * z - k + bx
        out.append(Turn(x, y0, y0 + alpha, kind, k, z))
    return out


def height_function(pp: SkewPlanePartition, wall: DiscreteBackWall, alpha: float,
                    x: int, y: float) -> float:
    """Piecewise-linear height of the stepped surface at (x, y).

    h(x, y) = (1/alpha) (y - B(x) + sum_i clamp(Y_i - y, 0, 1)) where
    Y_i = alpha*lam_i - i + 1 + B(x) runs over the horizontal tiles of the
    diagonal; slope in {0, 1/alpha}, identically 0 far below.
    """
    if not (wall.v_min < x < wall.v_max):
        raise ValueError("diagonal %r outside the wall interval" % x)
    bx = wall.height(x)
    lam = pp.diagonal(x)
    ell = len(lam)
    total = y - bx
    for i in range(1, ell + 1):
        yi = alpha * lam[i - 1] - i + 1 + bx
        total += min(1.0, max(0.0, yi - y))
    # the zero parts contribute a closed-form tail (1 per fully covered tile)
    total += max(0.0, (bx - y) - ell)
    return total / alpha


def count_pp_in_box(a: int, b: int, c: int) -> int:
    """Number of plane partitions in an a x b x c box (product formula)."""
    num = 1
    den = 1
    for i in range(1, a + 1):
        for j in range(1, b + 1):
            for k in range(1, c + 1):
                num *= i + j + k - 1
                den *= i + j + k - 2
    return num // den


@lru_cache(maxsize=None)
def _bounded_partitions(max_len: int, cap: int):
    """All partitions with at most max_len parts, each at most cap."""
    if max_len == 0 or cap == 0:
        return ((),)
    out = []
    def rec(prefix, remaining, bound):
        out.append(tuple(prefix))
        if remaining == 0:
            return
        for v in range(bound, 0, -1):
            prefix.append(v)
            rec(prefix, remaining - 1, v)
            prefix.pop()
    rec([], max_len, cap)
    return tuple(normalize_partition(p) for p in out)


def enumerate_skew_pp(support: SkewSupport, height_cap: int, budget: int = 500_000):
    """Yield every skew plane partition on the support with entries <= cap.

    Refuses when cells * cap exceeds the budget guard (the full enumeration
    would be far larger still).
    """
    est = support.n_cells() * max(1, height_cap)
    if est > budget:
        raise ValueError(
            "enumeration guard: cells*cap = %d exceeds budget %d" % (est, budget))
    wall = support.wall()
    vs = list(support.diagonals())
    bits = wall.bits

    def rec(idx, prev, acc):
        if idx == len(vs):
            closing_ok = interlaces(prev, ()) if bits[-1] == 1 else interlaces((), prev)
            if closing_ok:
                yield SkewPlanePartition(support, tuple(acc))
            return
        v = vs[idx]
        rising = bits[idx] == 1   # edge between the previous diagonal and this one
        for cand in _bounded_partitions(support.max_length(v), height_cap):
            ok = interlaces(prev, cand) if rising else interlaces(cand, prev)
            if not ok:
                continue
            acc.append(cand)
            yield from rec(idx + 1, cand, acc)
            acc.pop()

    yield from rec(0, (), [])
