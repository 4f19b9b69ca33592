"""Limiting Gaussian covariances of the diagonal observables, two ways.

The double contour integral couples the one-sided edge products of the two
positions through a (z - w)^{-2} kernel. Independently, the same covariance
is the log-kernel pairing of the liquid coordinate along the two vertical
slices. Agreement of the two routes is a strong end-to-end test of the
whole limit machinery.
"""

from __future__ import annotations

import math

import numpy as np

from .limitshape import LimitModel, liquid_slice, zeta_map


def _band_radii(model: LimitModel, x1: float, x2: float, gap: float = 0.15):
    """(Rz, Rw): admissible circle radii with the w-circle strictly outside."""
    lo1, hi1 = model.rho_less(x1), model.rho_greater(x1)
    lo2, hi2 = model.rho_less(x2), model.rho_greater(x2)
    if not (lo1 < hi1 and lo2 < hi2):
        raise ValueError("singular position: no contour band")
    lo = max(lo1, lo2 * 0.0)
    # z-circle in band 1, w-circle in band 2, Rw > Rz
    if lo2 < hi1:
        # bands overlap (or x1 == x2): place both in the common band
        a = max(lo1, lo2)
        b = min(hi1, hi2)
        if math.isinf(b):
            b = 4.0 * a if a > 0 else 4.0
        if a == 0.0:
            a = b / 16.0
        rz = a * (b / a) ** (1.0 / 3.0)
        rw = a * (b / a) ** (2.0 / 3.0)
    else:
        rz = math.sqrt(lo1 * hi1) if lo1 > 0 and math.isfinite(hi1) else \
            (2 * lo1 if lo1 > 0 else 0.5 * hi1)
        rw = math.sqrt(lo2 * hi2) if lo2 > 0 and math.isfinite(hi2) else \
            (2 * lo2 if lo2 > 0 else 0.5 * hi2)
        if rw <= rz:
            raise ValueError("cannot nest the w-contour outside the z-contour")
    if abs(rw - rz) < gap * rz:
        rw = rz * (1.0 + gap)
    return rz, rw


def limit_covariance_contour(model: LimitModel, x1: float, k1t: float,
                             x2: float, k2t: float, tol: float = 1e-9) -> float:
    """Limiting covariance of the rescaled order-k observables at x1 <= x2.

    (k1t k2t/(2 pi i)^2) oint oint [G_<x1 G_>x1(z)]^{k1t} [G_<x2 G_>x2(w)]^{k2t}
    / (z - w)^2 dz dw over nested circles.
    """
    if x1 > x2:
        x1, x2, k1t, k2t = x2, x1, k2t, k1t
    rz, rw = _band_radii(model, x1, x2)

    def eval_n(n):
        th = 2.0 * math.pi * np.arange(n) / n
        z = rz * np.exp(1j * th)
        w = rw * np.exp(1j * th)
        fz = np.exp(k1t * (model.log_G_less(x1, z) + model.log_G_greater(x1, z))) * z
        fw = np.exp(k2t * (model.log_G_less(x2, w) + model.log_G_greater(x2, w))) * w
        kern = 1.0 / (z[:, None] - w[None, :]) ** 2
        return complex(fz @ kern @ fw) / (n * n)

    n = 64
    prev = eval_n(n)
    while n < (1 << 13):
        n *= 2
        cur = eval_n(n)
        if abs(cur - prev) < tol * (1.0 + abs(cur)):
            break
        prev = cur
    return float((k1t * k2t * cur).real)


def _slice_spline(model: LimitModel, x: float, kt: float, y_cap: float = None,
                  n: int = 400):
    """Sampled liquid coordinate along the slice at x, ready for quadrature.

    Returns (ys, zetas, y_low, y_top). Unbounded slices are cut where the
    e^{-kt y} weight makes the remainder negligible.
    """
    y_low, y_up = liquid_slice(model, x)
    if math.isinf(y_up):
        y_top = max(y_low + 1.0, 45.0 / kt) if y_cap is None else y_cap
    else:
        y_top = y_up
    ys = y_low + (y_top - y_low) * (1.0 - np.cos(np.pi * np.linspace(0, 1, n))) / 2.0
    zetas = []
    for y in ys:
        pt = zeta_map(model, x, float(y))
        if pt is None:
            # boundary grid point: nudge inside
            yy = min(max(float(y), y_low + 1e-9), y_top - 1e-9)
            pt = zeta_map(model, x, yy)
        zetas.append(pt.zeta if pt is not None else complex(float("nan")))
    return ys, np.array(zetas), y_low, y_top


def gff_pullback_covariance(model: LimitModel, x1: float, k1t: float,
                            x2: float, k2t: float, n: int = 240) -> float:
    """The same covariance through the log-kernel along the liquid slices.

    Computes I = int int e^{-k1t y1 - k2t y2}
    log |(zeta1 - zeta2)/(zeta1 - conj zeta2)| dy1 dy2 and converts to the
    contour normalization:
    cov = -(k1t^2 k2t^2 / (2 pi^2)) e^{k1t B(x1) + k2t B(x2)} I.
    The diagonal log singularity at x1 = x2 is integrable; panels are graded
    toward it by the cosine sampling.
    """
    if x1 > x2:
        x1, x2, k1t, k2t = x2, x1, k2t, k1t
    ys1, z1, lo1, top1 = _slice_spline(model, x1, k1t, n=n)
    ys2, z2, lo2, top2 = _slice_spline(model, x2, k2t, n=n)

    from scipy.interpolate import CubicSpline
    s1r = CubicSpline(ys1, z1.real)
    s1i = CubicSpline(ys1, z1.imag)
    s2r = CubicSpline(ys2, z2.real)
    s2i = CubicSpline(ys2, z2.imag)

    from numpy.polynomial.legendre import leggauss
    nodes, wts = leggauss(24)

    def zeta1(y):
        return s1r(y) + 1j * s1i(y)

    def zeta2(y):
        return s2r(y) + 1j * s2i(y)

    def inner(y2v, zeta2v):
        """int over y1 of e^{-k1t y1} log |(z1-z2)/(z1-z2bar)| with a split at y2."""
        total = 0.0
        cuts = [lo1, top1]
        if x1 == x2 and lo1 < y2v < top1:
            cuts = [lo1, y2v, top1]
        for a, b in zip(cuts, cuts[1:]):
            # graded subpanels toward the singular end(s)
            edges = np.unique(np.concatenate([
                a + (b - a) * 0.5 * (1 - np.cos(np.pi * np.linspace(0, 1, 14))),
            ]))
            for pa, pb in zip(edges, edges[1:]):
                ym = 0.5 * (pa + pb) + 0.5 * (pb - pa) * nodes
                zz = zeta1(ym)
                ratio = np.abs((zz - zeta2v) / (zz - np.conj(zeta2v)))
                ratio = np.clip(ratio, 1e-300, None)
                vals = np.exp(-k1t * ym) * np.log(ratio)
                total += 0.5 * (pb - pa) * float(vals @ wts)
        return total

    # outer integral over y2, graded toward the slice edges
    m_outer = max(48, n // 3)
    u = 0.5 * (1 - np.cos(np.pi * np.linspace(0, 1, m_outer)))
    y2s = lo2 + (top2 - lo2) * u
    vals = []
    for y2v in y2s:
        z2v = zeta2(y2v)
        vals.append(math.exp(-k2t * y2v) * inner(float(y2v), z2v))
    kernel_integral = float(np.trapz(vals, y2s))

    b1 = model.bw.value(min(max(x1, model.bw.kinks[0]), model.bw.kinks[-1]))
    b2 = model.bw.value(min(max(x2, model.bw.kinks[0]), model.bw.kinks[-1]))
    conv = (k1t ** 2) * (k2t ** 2) / math.pi * math.exp(k1t * b1 + k2t * b2)
    return -conv * kernel_integral / (2.0 * math.pi)


def covariance_matrix(model: LimitModel, points) -> np.ndarray:
    """Contour covariance matrix over [(x, kt), ...] pairs."""
    k = len(points)
    out = np.zeros((k, k))
    for i in range(k):
        for j in range(i, k):
            (xi, ki), (xj, kj) = points[i], points[j]
            if xi <= xj:
                val = limit_covariance_contour(model, xi, ki, xj, kj)
            else:
                val = limit_covariance_contour(model, xj, kj, xi, ki)
            out[i, j] = out[j, i] = val
    return out


def prelimit_covariance_convergence(bw_limit, S, spec_factory, x1, k1, x2, k2,
                                    epsilons, window=None):
    """Table of prelimit covariances against the limiting contour value.

    For each eps the wall is discretized, the joint and single moments are
    computed exactly, and Cov/eps^2 is reported next to the limit. Returns
    a list of (eps, prelimit_value, limit_value) rows.
    """
    from .backwall import discretize
    from .observables import moment_k1, moment_multi

    model = LimitModel(bw_limit, S)
    kt1 = None
    rows = []
    for eps in epsilons:
        spec = spec_factory(eps)
        wall = discretize(bw_limit, S, spec.s, eps, window=window)
        xi1 = int(round(x1 / eps))
        xi2 = int(round(x2 / eps))
        joint = moment_multi(wall, spec, sorted((xi1, xi2)), (k1, k2))
        m1 = moment_k1(wall, spec, xi1) if k1 == 1 else \
            moment_multi(wall, spec, [xi1], [k1])
        m2 = moment_k1(wall, spec, xi2) if k2 == 1 else \
            moment_multi(wall, spec, [xi2], [k2])
        cov = (joint - m1 * m2) / eps ** 2
        kt1 = k1 * spec.frak_t
        kt2 = k2 * spec.frak_t
        lim = limit_covariance_contour(model, x1, kt1, x2, kt2)
        rows.append((eps, cov, lim))
    return rows
