"""Contour-integral moment formulas for the diagonal observables.

The order-k observable of a partition is
wp_k(lam; q, t) = (1 - t^{-k}) sum_i q^{k lam_i} t^{k(1-i)} + t^{-k l(lam)}.
Joint expectations over the weighted measure equal multidimensional contour
integrals built from two edge products G_<x, G_>x; quadrature is the
trapezoid rule on circles (spectrally accurate for these integrands) with
node doubling until a Cauchy criterion is met.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backwall import DiscreteBackWall
from .weights import WeightSpec, log_edge_specialization

QUAD_TOL = 1e-10
QUAD_START = 64
QUAD_CAP = 1 << 16


def wp(k: int, lam, q: float, t: float) -> float:
    """The order-k diagonal observable of a partition."""
    if k < 1:
        raise ValueError("order must be a positive integer")
    total = 0.0
    tk = t ** (-k)
    for i, li in enumerate(lam, start=1):
        total += q ** (k * li) * t ** (k * (1 - i))
    return (1.0 - tk) * total + t ** (-k * len(lam))


@dataclass
class GFunctions:
    """Edge products around a diagonal, with their pole bookkeeping.

    less(z) has poles at 1/a_e for rising edges e < x; greater(z) has poles
    at 1/(t a_e) for falling edges e > x. rho_less/rho_greater are the
    extremal poles (0 and +inf when the corresponding product is empty).
    """

    poles_less: np.ndarray     # sorted ascending
    poles_greater: np.ndarray  # sorted ascending
    zeros_less: np.ndarray
    zeros_greater: np.ndarray

    @property
    def rho_less(self) -> float:
        return float(self.poles_less[-1]) if self.poles_less.size else 0.0

    @property
    def rho_greater(self) -> float:
        return float(self.poles_greater[0]) if self.poles_greater.size else math.inf

    def less(self, z):
        """prod over rising e < x of (1 - (t a_e z)^{-1}) / (1 - (a_e z)^{-1})."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for pz, pp in zip(self.zeros_less, self.poles_less):
            out = out * (1.0 - pz / z) / (1.0 - pp / z)
        return out

    def greater(self, z):
        """prod over falling e > x of (1 - a_e z) / (1 - t a_e z)."""
        z = np.asarray(z, dtype=complex)
        out = np.ones_like(z)
        for zz, pp in zip(self.zeros_greater, self.poles_greater):
            out = out * (1.0 - z / zz) / (1.0 - z / pp)
        return out

    def both(self, z):
        return self.less(z) * self.greater(z)


def g_functions(wall: DiscreteBackWall, spec: WeightSpec, x: int) -> GFunctions:
    """Edge products of the wall around integer diagonal x."""
    if not (wall.v_min <= x <= wall.v_max):
        raise ValueError("diagonal %r outside the wall" % x)
    loga = log_edge_specialization(wall, spec)
    t = spec.t
    poles_l, zeros_l, poles_g, zeros_g = [], [], [], []
    for e in wall.edges():
        a = math.exp(loga[e])
        if e < x and wall.bit(e) == 1:
            poles_l.append(1.0 / a)
            zeros_l.append(1.0 / (t * a))
        elif e > x and wall.bit(e) == 0:
            poles_g.append(1.0 / (t * a))
            zeros_g.append(1.0 / a)
    order_l = np.argsort(poles_l) if poles_l else []
    order_g = np.argsort(poles_g) if poles_g else []
    return GFunctions(
        np.array(poles_l)[order_l] if len(poles_l) else np.empty(0),
        np.array(poles_g)[order_g] if len(poles_g) else np.empty(0),
        np.array(zeros_l)[order_l] if len(zeros_l) else np.empty(0),
        np.array(zeros_g)[order_g] if len(zeros_g) else np.empty(0),
    )


def default_radius(rho_less: float, rho_greater: float) -> float:
    """Geometric mean of the bracketing poles, with one-sided fallbacks."""
    if rho_less > 0.0 and math.isfinite(rho_greater):
        return math.sqrt(rho_less * rho_greater)
    if rho_less > 0.0:
        return 2.0 * rho_less
    if math.isfinite(rho_greater):
        return 0.5 * rho_greater
    return 1.0


def nested_radii(gs: list, ks: list, t: float):
    """Radii for the contours, in lexicographic order of (group, index).

    Each group-a radius must lie strictly between the extreme poles of its
    G pair, and consecutive radii in lex order must grow by more than 1/t.
    The chain is placed to maximize the smallest clearance (in log scale)
    between any contour and any constraint, which controls the trapezoid
    convergence rate. Raises on infeasibility.
    """
    bands = []
    for g, k in zip(gs, ks):
        bands.extend([(g.rho_less, g.rho_greater)] * k)
    tau = math.log(1.0 / t)
    los = [math.log(lo) if lo > 0.0 else None for lo, _ in bands]
    his = [math.log(hi) if math.isfinite(hi) else None for _, hi in bands]
    if all(l is None for l in los):
        base = math.log(default_radius(bands[0][0], bands[0][1])) - tau * len(bands)
        los = [base] + los[1:]

    def chain(m):
        us = []
        prev = None
        for d in range(len(bands)):
            u = -math.inf
            if los[d] is not None:
                u = los[d] + m
            if prev is not None:
                u = max(u, prev + tau + m)
            if u == -math.inf:
                u = (his[d] - m - tau * (len(bands) - d)) if his[d] is not None else 0.0
            if his[d] is not None and u > his[d] - m:
                return None
            us.append(u)
            prev = u
        return us

    if chain(0.0) is None:
        raise ValueError(
            "no admissible nested contours: the pole bands %r cannot hold a "
            "chain with consecutive ratio above 1/t = %g"
            % ([(lo, hi) for lo, hi in bands], 1.0 / t))
    m_lo, m_hi = 0.0, 8.0
    for _ in range(48):
        mid = 0.5 * (m_lo + m_hi)
        if chain(mid) is None:
            m_hi = mid
        else:
            m_lo = mid
    us = chain(m_lo)
    return [math.exp(u) for u in us]


def _circle_mean(f, radius: float, tol: float = QUAD_TOL,
                 start: int = QUAD_START, cap: int = QUAD_CAP):
    """(1/2 pi i) oint f(z) dz/z: the mean of f over the circle, doubling nodes."""
    n = start
    prev = None
    while True:
        th = 2.0 * math.pi * np.arange(n) / n
        z = radius * np.exp(1j * th)
        val = complex(np.mean(f(z)))
        if prev is not None and abs(val - prev) < tol * (1.0 + abs(val)):
            return val
        if n >= cap:
            return val
        prev = val
        n *= 2


def moment_k1(wall: DiscreteBackWall, spec: WeightSpec, x: int,
              tol: float = QUAD_TOL) -> float:
    """E wp_1(pi^x; q, t): a single contour integral of G_<x G_>x.

    The circle radius is the geometric mean of the bracketing poles; node
    count doubles until two successive values agree to `tol`.
    """
    g = g_functions(wall, spec, x)
    if g.rho_less >= g.rho_greater:
        raise ValueError("no contour: pole bands touch (%g >= %g); a wider "
                         "t-separation is needed" % (g.rho_less, g.rho_greater))
    radius = default_radius(g.rho_less, g.rho_greater)
    val = _circle_mean(g.both, radius, tol)
    return float(val.real)


def _group_factor(zs, q, t):
    """In-group kernel for one block of k nested variables, times prod z_i.

    For Z = (z_1..z_k) the kernel is
    [sum_i (q/t)^{i-1}/z_i] / prod_{j>=2}(z_j - (q/t) z_{j-1})
    * prod_{i<j} (z_j - z_i)(z_j - (q/t) z_i) / ((z_j - z_i/t)(z_j - q z_i));
    the extra prod z_i folds the plain dz measure into a torus mean.
    """
    k = len(zs)
    c = q / t
    if k == 1:
        return 1.0
    num = sum((c ** i) / zs[i] for i in range(k))
    den = 1.0
    for j in range(1, k):
        den = den * (zs[j] - c * zs[j - 1])
    cross = 1.0
    for i in range(k):
        for j in range(i + 1, k):
            cross = cross * (zs[j] - zs[i]) * (zs[j] - c * zs[i]) \
                / ((zs[j] - zs[i] / t) * (zs[j] - q * zs[i]))
    prodz = 1.0
    for z in zs:
        prodz = prodz * z
    return num * prodz / den * cross


def _cross_factor(zi, zj, q, t):
    """Between-group kernel C for a single variable pair (earlier, later)."""
    u = zi / zj
    return (1.0 - (q / t) * u) * (1.0 - u) / ((1.0 - q * u) * (1.0 - u / t))


def moment_multi(wall: DiscreteBackWall, spec: WeightSpec, xs, ks,
                 tol: float = 1e-9, start: int | None = None,
                 cap: int | None = None) -> float:
    """E prod_a wp_{k_a}(pi^{x_a}) by tensor-product trapezoid quadrature.

    xs must be sorted; total dimension sum(ks) <= 4. Nested circles follow
    the lexicographic t-separation rule; node counts double until two
    successive refinements agree (Richardson-style check).
    """
    xs = list(xs)
    ks = [int(k) for k in ks]
    if any(a > b for a, b in zip(xs, xs[1:])):
        raise ValueError("diagonals must be sorted")
    K = sum(ks)
    if K > 4:
        raise ValueError("total contour dimension capped at 4")
    if any(k < 1 for k in ks):
        raise ValueError("orders must be positive")
    q, t = spec.q, spec.t
    gs = [g_functions(wall, spec, x) for x in xs]
    radii = nested_radii(gs, ks, t)
    if start is None:
        start = {1: 64, 2: 48, 3: 32, 4: 24}[K]
    if cap is None:
        cap = {1: QUAD_CAP, 2: 3072, 3: 384, 4: 192}[K]

    pos = 0
    group_slots = []
    group_of = []
    for a, k in enumerate(ks):
        group_slots.append(list(range(pos, pos + k)))
        group_of.extend([a] * k)
        pos += k
    c = q / t

    def evaluate(n: int) -> complex:
        import itertools

        ring = np.exp(2j * math.pi * np.arange(n) / n)
        zv = [radii[d] * ring for d in range(K)]
        # per-variable factors: G values times z (folding the dz measure)
        base = [gs[group_of[d]].both(zv[d]) * zv[d] for d in range(K)]
        # pairwise factors as n x n matrices
        letters = "abcd"
        pair_mats = {}
        for i in range(K):
            for j in range(i + 1, K):
                zi = zv[i][:, None]
                zj = zv[j][None, :]
                if group_of[i] == group_of[j]:
                    m = (zj - zi) * (zj - c * zi) / ((zj - zi / t) * (zj - q * zi))
                    if j == i + 1:
                        m = m / (zj - c * zi)   # chain denominator
                else:
                    u = zi / zj
                    m = (1.0 - c * u) * (1.0 - u) / ((1.0 - q * u) * (1.0 - u / t))
                pair_mats[(i, j)] = m

        def contract(vecs):
            ops = list(vecs)
            sub = [letters[d] for d in range(K)]
            for (i, j), m in pair_mats.items():
                ops.append(m)
                sub.append(letters[i] + letters[j])
            return complex(np.einsum(",".join(sub) + "->", *ops, optimize=True))

        # expand each group's sum term sum_i (q/t)^{i-1}/z_i over the choice
        # of the index i carrying the 1/z factor
        total = 0.0 + 0.0j
        choices = [range(len(slots)) for slots in group_slots]
        for combo in itertools.product(*choices):
            vecs = list(base)
            for a, pick in enumerate(combo):
                d = group_slots[a][pick]
                vecs[d] = vecs[d] * (c ** pick) / zv[d]
            total += contract(vecs)
        return total / (n ** K)

    n = start
    prev = evaluate(n)
    while n < cap:
        n *= 2
        cur = evaluate(n)
        if abs(cur - prev) < tol * (1.0 + abs(cur)):
            return float(cur.real)
        prev = cur
    return float(prev.real)


def dimension_reduction_check(f, gs, poles, k: int, tol: float = QUAD_TOL) -> float:
    """Residual of the nested-contour collapse identity for symmetric kernels.

    |(1/(2 pi i)^k) oint..oint prod(f) prod_j(sum_i g_j(v_i)) / prod(v_{i+1}-v_i)
      - k^{s-1} (1/2 pi i) oint f^k prod_j g_j|
    with nested circles around the listed poles. Used as a quadrature
    self-test; f and each g are callables on complex arrays.
    """
    pmax = max(abs(p) for p in poles) if poles else 1.0
    radii = [pmax * (1.5 + 0.5 * i) for i in range(k)]
    s = len(gs)

    def lhs(n):
        th = 2.0 * math.pi * np.arange(n) / n
        ring = np.exp(1j * th)
        zs = []
        for d in range(k):
            shape = [1] * k
            shape[d] = n
            zs.append((radii[d] * ring).reshape(shape))
        val = 1.0
        for d in range(k):
            val = val * f(zs[d]) * zs[d]      # dz = z dtheta terms
        for j in range(k - 1):
            val = val / (zs[j + 1] - zs[j])
        for gj in gs:
            val = val * sum(gj(zs[d]) for d in range(k))
        return complex(np.asarray(val, dtype=complex).mean())

    def rhs(n):
        th = 2.0 * math.pi * np.arange(n) / n
        z = radii[-1] * np.exp(1j * th)
        val = f(z) ** k * z
        for gj in gs:
            val = val * gj(z)
        return complex(np.mean(val))

    n = 128
    l_prev, r_prev = lhs(n), rhs(n)
    while n < 4096:
        n *= 2
        l_cur, r_cur = lhs(n), rhs(n)
        if (abs(l_cur - l_prev) < tol * (1 + abs(l_cur))
                and abs(r_cur - r_prev) < tol * (1 + abs(r_cur))):
            break
        l_prev, r_prev = l_cur, r_cur
    return abs(l_cur - k ** (s - 1) * r_cur)
