"""Limit machinery: the rescaled edge transform, companion-equation roots,
the liquid region, height limits, local tile proportions, limiting moments.

The central object is the function script G_x(z) = P_x(z) / Q(z): P_x carries
the diagonal position, Q the whole wall profile. Fractional powers are taken
factorwise on principal branches; this makes script G analytic off the real
axis and equal to its upper-half-plane boundary values used everywhere below.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .backwall import INF, LimitBackWall, SMultiset, rho_greater, rho_less

ROOT_FILTER_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-8


@dataclass(frozen=True)
class LiquidPoint:
    """A liquid-region sample: the unique upper-half-plane companion root."""

    x: float
    y: float
    zeta: complex


@dataclass(frozen=True)
class LimitModel:
    """Precomputed branch data of Q and P_x for one wall profile.

    Q(z) = exp(log_const) * (-z)^{mono_n/p} * prod_j (1 - c_j z)^{n_j/p} with
    integer n_j; branch points of Q sit at b_j = 1/c_j (and 0 when the wall
    extends to -infinity, infinity when it extends to +infinity).
    """

    bw: LimitBackWall
    S: SMultiset
    log_const: float = field(init=False)
    mono_n: int = field(init=False)
    factors: tuple = field(init=False)   # (c_j, n_j) with n_j != 0
    junctions: tuple = field(init=False)  # finite branch points of Q, sorted
    has_inf_junction: bool = field(init=False)

    def __post_init__(self):
        bw, S = self.bw, self.S
        p = S.p
        factors = {}
        mono_n = 0
        const = 0.0
        if math.isinf(bw.kinks[0]):
            s1 = bw.slope_on_piece(1)
            v1 = bw.kinks[1]
            mono_n = sum(m for sig, m in zip(S.sigma, S.mult)
                         if s1 >= S.varsigma_of(sig) - 1e-12)
            const = bw.value(v1) - s1 * v1
            for sig, m in zip(S.sigma, S.mult):
                if s1 >= S.varsigma_of(sig) - 1e-12:
                    const += (m / p) * math.log(sig)
        else:
            const = bw.value(bw.kinks[0])
        for V in bw.kinks:
            if math.isinf(V):
                continue
            sl = bw.slope_left(V)
            sr = bw.slope_right(V)
            for sig, m in zip(S.sigma, S.mult):
                vs = S.varsigma_of(sig)
                n = m * (int(sr >= vs - 1e-12) - int(sl >= vs - 1e-12))
                if n:
                    c = math.exp(-V) * sig
                    factors[c] = factors.get(c, 0) + n
        fac = tuple(sorted(((c, n) for c, n in factors.items() if n), key=lambda f: f[0]))
        junc = sorted(1.0 / c for c, _ in fac)
        object.__setattr__(self, "log_const", const)
        object.__setattr__(self, "mono_n", mono_n)
        object.__setattr__(self, "factors", fac)
        object.__setattr__(self, "junctions", tuple(junc))
        object.__setattr__(self, "has_inf_junction", math.isinf(bw.kinks[-1]))

    @property
    def p(self) -> int:
        return self.S.p

    def junction_set(self, x: float | None = None):
        """All finite branch points of script G_x (of Q, plus P_x zeros)."""
        pts = set(self.junctions)
        if self.mono_n:
            pts.add(0.0)
        if x is not None:
            pts.update(math.exp(x) / sig for sig in self.S.sigma)
        return sorted(pts)

    # ----- logarithms with factorwise principal branches -----

    def log_Q(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full_like(z, self.log_const)
        if self.mono_n:
            out = out + (self.mono_n / self.p) * np.log(-z)
        for c, n in self.factors:
            out = out + (n / self.p) * np.log(1.0 - c * z)
        return out

    def log_P(self, x: float, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        ex = math.exp(-x)
        for sig, m in zip(self.S.sigma, self.S.mult):
            out = out + (m / self.p) * np.log(1.0 - ex * sig * z)
        return out

    def script_G(self, x: float, z):
        """script G_x(z) = P_x(z)/Q(z); real z is taken as its upper limit."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z).astype(complex)
        onreal = np.isreal(z)
        if np.any(onreal):
            z = z + 0j
            z[onreal] += 1e-13j * (1.0 + np.abs(z[onreal]))
        out = np.exp(self.log_P(x, z) - self.log_Q(z))
        return complex(out[0]) if scalar else out

    def G_at_zero(self, x: float) -> float:
        """script G_x(0): +inf when the wall extends to -infinity."""
        if self.mono_n:
            return math.inf
        return math.exp(-self.log_const)

    def dlog_G(self, x: float, z: complex) -> complex:
        """d/dz log script G_x(z)."""
        ex = math.exp(-x)
        out = 0j
        for sig, m in zip(self.S.sigma, self.S.mult):
            out += (m / self.p) / (z - 1.0 / (ex * sig))
        if self.mono_n:
            out -= (self.mono_n / self.p) / z
        for c, n in self.factors:
            out -= (n / self.p) / (z - 1.0 / c)
        return out

    # ----- exact boundary data on the real axis -----

    def arg_plus_Q_units(self, zeta: float) -> int:
        """p * arg_+ Q(zeta) / (-pi): an exact integer branch count."""
        total = 0
        if self.mono_n and zeta > 0.0:
            total += self.mono_n
        for c, n in self.factors:
            if zeta > 1.0 / c:
                total += n
        return total

    def arg_plus_P_units(self, x: float, zeta: float) -> int:
        ex = math.exp(x)
        return sum(m for sig, m in zip(self.S.sigma, self.S.mult)
                   if zeta > ex / sig)

    def log_abs_G(self, x: float, zeta: float) -> float:
        """log |script G_x| at real zeta (away from branch points)."""
        out = -self.log_const
        ex = math.exp(-x)
        for sig, m in zip(self.S.sigma, self.S.mult):
            out += (m / self.p) * math.log(abs(1.0 - ex * sig * zeta))
        if self.mono_n:
            out -= (self.mono_n / self.p) * math.log(abs(zeta))
        for c, n in self.factors:
            out -= (n / self.p) * math.log(abs(1.0 - c * zeta))
        return out

    # ----- rescaled one-sided edge products -----

    def log_G_less(self, x: float, z):
        """Factorwise principal log of the left edge product at position x."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        bw, S, p = self.bw, self.S, self.p
        for ell in range(1, bw.n_pieces + 1):
            v_lo, v_hi = bw.kinks[ell - 1], bw.kinks[ell]
            if not v_lo < x:
                continue
            sl = bw.slope_on_piece(ell)
            hi = math.exp(min(v_hi, x))
            lo = 0.0 if math.isinf(v_lo) else math.exp(v_lo)
            for sig, m in zip(S.sigma, S.mult):
                if sl >= S.varsigma_of(sig) - 1e-12:
                    out = out + (m / p) * (np.log(1.0 - hi / (sig * z))
                                           - np.log(1.0 - lo / (sig * z)))
        return out

    def log_G_greater(self, x: float, z):
        """Factorwise principal log of the right edge product at position x."""
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        bw, S, p = self.bw, self.S, self.p
        for ell in range(1, bw.n_pieces + 1):
            v_lo, v_hi = bw.kinks[ell - 1], bw.kinks[ell]
            if not v_hi > x:
                continue
            sl = bw.slope_on_piece(ell)
            lo = math.exp(-max(v_lo, x))
            hi = 0.0 if math.isinf(v_hi) else math.exp(-v_hi)
            for sig, m in zip(S.sigma, S.mult):
                if sl < S.varsigma_of(sig) - 1e-12:
                    out = out + (m / p) * (np.log(1.0 - lo * sig * z)
                                           - np.log(1.0 - hi * sig * z))
        return out

    def rho_less(self, x: float) -> float:
        return rho_less(self.bw, self.S, x)

    def rho_greater(self, x: float) -> float:
        return rho_greater(self.bw, self.S, x)


def make_corner_model() -> LimitModel:
    """The unbounded single-corner profile: slope 1 then 0, kink at 0."""
    S = SMultiset((1.0,))
    bw = LimitBackWall((-INF, 0.0, INF), (1.0, 0.0), anchor=(0.0, 0.0))
    return LimitModel(bw, S)


def companion_polynomial(model: LimitModel, x: float, y: float) -> np.ndarray:
    """Coefficients (descending) of P_x^p D(z) - e^{-p y} N(z).

    Q^p = e^{p const} (-1)^{mono} z^{mono} N1(z)/D(z) with polynomial N1, D;
    the roots of the returned polynomial contain every solution of the
    p-th-power companion equation.
    """
    p = model.p
    px = np.array([1.0])
    ex = math.exp(-x)
    for sig, m in zip(model.S.sigma, model.S.mult):
        for _ in range(m):
            px = np.convolve(px, [-ex * sig, 1.0])   # descending: 1 - c z
    num = np.array([1.0])
    den = np.array([1.0])
    for c, n in model.factors:
        for _ in range(abs(n)):
            if n > 0:
                num = np.convolve(num, [-c, 1.0])
            else:
                den = np.convolve(den, [-c, 1.0])
    # N(z) = e^{p const} (-1)^{mono} z^{mono} num(z)
    scale = math.exp(p * model.log_const + (-p) * y) * (-1.0) ** model.mono_n
    nz = np.concatenate([num, np.zeros(model.mono_n)]) * scale
    lhs = np.convolve(px, den)
    n_deg = max(len(lhs), len(nz))
    lhs = np.concatenate([np.zeros(n_deg - len(lhs)), lhs])
    nz = np.concatenate([np.zeros(n_deg - len(nz)), nz])
    return lhs - nz


def companion_roots(model: LimitModel, x: float, y: float):
    """(pair, real_roots): solutions of script G_x(zeta) = e^{-y}.

    All roots of the p-th-power polynomial are filtered back to the honest
    branch by checking script G itself; nonreal survivors form at most one
    conjugate pair (returned as the upper-half-plane member).
    """
    coeffs = companion_polynomial(model, x, y)
    coeffs = np.trim_zeros(coeffs, "f")
    if len(coeffs) <= 1:
        return None, []
    roots = np.roots(coeffs)
    target = math.exp(-y)
    pair = []
    reals = []
    for z in roots:
        if abs(z.imag) < 1e-9 * (1.0 + abs(z)):
            zr = z.real
            units = model.arg_plus_P_units(x, zr) - model.arg_plus_Q_units(zr)
            if units % (2 * model.p) != 0:
                continue
            try:
                resid = model.log_abs_G(x, zr) + y
            except ValueError:
                continue
            if abs(resid) < 1e-7 * (1.0 + abs(y)):
                reals.append(zr)
        elif z.imag > 0:
            val = model.script_G(x, complex(z))
            if abs(val - target) < ROOT_FILTER_TOL * (1.0 + target):
                pair.append(complex(z))
    if len(pair) > 1:
        # distinct candidates within tolerance: genuine ambiguity
        resids = [abs(model.script_G(x, z) - target) for z in pair]
        best = min(range(len(pair)), key=lambda i: resids[i])
        for i, z in enumerate(pair):
            if i != best and abs(z - pair[best]) > 1e-6 * (1 + abs(z)):
                raise ArithmeticError(
                    "root filter ambiguity at (%g, %g): candidates %r with "
                    "residuals %r" % (x, y, pair, resids))
        pair = [pair[best]]
    zeta = None
    if pair:
        zeta = _newton_polish(model, x, y, pair[0])
    return zeta, sorted(reals)


def _newton_polish(model: LimitModel, x: float, y: float, z: complex,
                   steps: int = 3) -> complex:
    target = -y
    for _ in range(steps):
        g = model.script_G(x, z)
        f = cmath.log(g) - target
        df = model.dlog_G(x, z)
        if df == 0:
            break
        step = f / df
        if not cmath.isfinite(step):
            break
        z = z - step
        if z.imag <= 0:
            z = complex(z.real, max(1e-15, -z.imag))
    return z


def zeta_map(model: LimitModel, x: float, y: float):
    """The liquid-region coordinate, or None outside the liquid region."""
    zeta, _ = companion_roots(model, x, y)
    if zeta is None or zeta.imag <= 0:
        return None
    return LiquidPoint(x, y, zeta)


def liquid_slice(model: LimitModel, x: float, y_lo: float | None = None,
                 y_hi: float | None = None, coarse: int = 160,
                 tol: float = 1e-10):
    """(y_low, y_up) of the liquid slice at x; y_up = +inf for tentacles.

    Scans a coarse grid and bisects the two edges; raises if the slice is
    empty or disconnected on the scan grid.
    """
    bx = model.bw.value(min(max(x, model.bw.kinks[0]), model.bw.kinks[-1]))
    if y_lo is None:
        y_lo = bx - 12.0
    if y_hi is None:
        y_hi = bx + 25.0
    grid = np.linspace(y_lo, y_hi, coarse)
    flags = [zeta_map(model, x, float(y)) is not None for y in grid]
    if not any(flags):
        raise ValueError("no liquid found on the scan grid at x = %g" % x)
    idx = [i for i, f in enumerate(flags) if f]
    if idx[-1] - idx[0] + 1 != len(idx):
        raise ValueError("liquid slice disconnected on the scan grid at x = %g" % x)

    def bisect(lo, hi, want_upper):
        # invariant: exactly one endpoint is liquid
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if hi - lo < tol:
                break
            if (zeta_map(model, x, mid) is not None) == want_upper:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    if idx[0] == 0:
        y_low = float(grid[0])
    else:
        y_low = bisect(float(grid[idx[0] - 1]), float(grid[idx[0]]), True)
    if idx[-1] == len(grid) - 1:
        y_up = math.inf
    else:
        y_up = bisect(float(grid[idx[-1]]), float(grid[idx[-1] + 1]), False)
    return y_low, y_up


def zeta_tilde(model: LimitModel, x: float, y: float):
    """Continuous root extension: the liquid root, or the tracked real root.

    Below the liquid slice the root in the external junction component is
    selected on the side continuing from the smallest junction point.
    """
    zeta, reals = companion_roots(model, x, y)
    if zeta is not None:
        return zeta
    if not reals:
        return None
    pts = model.junction_set(x)
    lo = min(pts)
    hi = max(pts)
    external = [r for r in reals if r < lo - 1e-12 or r > hi + 1e-12]
    if external:
        def key(r):
            return (0, lo - r) if r <= lo else (1, -r)
        return complex(min(external, key=key))
    # above or between liquid intervals: nearest real root to the slice edge
    return complex(min(reals, key=lambda r: abs(r - lo)))


def grad_H(model: LimitModel, x: float, y: float):
    """(d/dx, d/dy) of the limiting height at (x, y).

    In the liquid region dH/dy = 1 - arg zeta / pi and
    dH/dx = (1/(p pi)) sum over the multiset of arg(1 - sigma e^{-x} zeta).
    Outside, the tracked real root gives the frozen values through one-sided
    argument limits.
    """
    z = zeta_tilde(model, x, y)
    if z is None:
        raise ValueError("no companion root at (%g, %g)" % (x, y))
    p = model.p
    ex = math.exp(-x)
    if abs(z.imag) > 1e-12:
        dy = 1.0 - cmath.phase(z) / math.pi
        dx = sum(m * cmath.phase(1.0 - sig * ex * z)
                 for sig, m in zip(model.S.sigma, model.S.mult)) / (p * math.pi)
        return dx, dy
    zr = z.real
    indicator = 1.0 if math.exp(-y) < model.G_at_zero(x) else 0.0
    arg_z = math.pi if zr < 0 else 0.0
    dy = indicator - arg_z / math.pi
    dx = sum(-m * math.pi * (zr > 1.0 / (sig * ex))
             for sig, m in zip(model.S.sigma, model.S.mult)) / (p * math.pi)
    return dx, dy


def H(model: LimitModel, x: float, y: float, tol: float = 1e-6,
      slice_hint=None) -> float:
    """Limiting height: integral of dH/dy from below the liquid slice."""
    y_low, y_up = slice_hint if slice_hint is not None else liquid_slice(model, x)
    if y <= y_low:
        return 0.0
    top = min(y, y_up)
    from scipy.integrate import quad

    def density(u):
        z = zeta_map(model, x, float(u))
        if z is None:
            # frozen gap inside/above: slope is 0 below the slice, 1 above
            return 1.0 if u >= y_up else 0.0
        return 1.0 - cmath.phase(z.zeta) / math.pi

    val, _ = quad(density, y_low, top, epsabs=tol, epsrel=tol, limit=200)
    if y > y_up:
        val += y - y_up
    return val


def local_proportions(model: LimitModel, x: float, y: float):
    """(p_vertical, p_left, p_right): tile densities at a liquid point."""
    pt = zeta_map(model, x, y)
    if pt is None:
        raise ValueError("(%g, %g) is outside the liquid region" % (x, y))
    z = math.exp(-x) * pt.zeta
    p_vert = cmath.phase(z) / math.pi
    p_left = sum(m * abs(cmath.phase(1.0 - sig * z))
                 for sig, m in zip(model.S.sigma, model.S.mult)) \
        / (model.p * math.pi)
    return p_vert, p_left, 1.0 - p_vert - p_left


def limit_moment(model: LimitModel, x: float, kt: float,
                 tol: float = 1e-10) -> float:
    """(1/2 pi i) oint [G_<x G_>x]^{kt} dz/z on the circle between the bands."""
    lo = model.rho_less(x)
    hi = model.rho_greater(x)
    if not lo < hi:
        raise ValueError("singular position x = %g: no contour between the "
                         "pole bands" % x)
    if lo > 0.0 and math.isfinite(hi):
        radius = math.sqrt(lo * hi)
    elif lo > 0.0:
        radius = 2.0 * lo
    elif math.isfinite(hi):
        radius = 0.5 * hi
    else:
        radius = 1.0

    def f(z):
        return np.exp(kt * (model.log_G_less(x, z) + model.log_G_greater(x, z)))

    n = 64
    prev = None
    while True:
        th = 2.0 * math.pi * np.arange(n) / n
        z = radius * np.exp(1j * th)
        val = complex(np.mean(f(z)))
        if prev is not None and abs(val - prev) < tol * (1.0 + abs(val)):
            return float(val.real)
        if n >= (1 << 15):
            return float(val.real)
        prev = val
        n *= 2


def spectral_inequality(model: LimitModel, zeta: complex):
    """(arg zeta, -arg Q(zeta)): both in (0, pi) with their sum below pi
    at genuine liquid coordinates."""
    eta = np.exp(model.log_Q(np.array([zeta])))[0]
    return cmath.phase(zeta), -cmath.phase(eta)
