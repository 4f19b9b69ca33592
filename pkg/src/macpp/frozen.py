"""Double roots of the companion equation: the frozen-boundary curve.

Each real parameter off the junction set yields exactly one double root,
hence one boundary point (x, y); the curve decomposes into one segment per
junction component, with finite cusps at slope-increase kinks and vertical
tentacles at slope-decrease kinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backwall import singular_points
from .limitshape import LimitModel

RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class FrozenPoint:
    zeta: float
    x: float
    y: float
    branch: int
    residual: float


@dataclass(frozen=True)
class CurveSegment:
    """One frozen-boundary arc: samples plus endpoint behaviour tags.

    endpoint kinds: "cusp" (finite limit at a slope-increase kink),
    "tentacle" (y -> +inf above a singular kink, at the recorded x), or
    "limb" (runs off toward an infinite wall end).
    """

    component: tuple
    points: tuple
    left_kind: str
    right_kind: str
    left_x: float | None = None
    right_x: float | None = None


def Sigma(model: LimitModel, zeta: float) -> float:
    """Logarithmic derivative of Q at a real point off the junctions.

    Sum over branch factors of (n/p)/(zeta - b); the monomial contributes
    (mono/p)/zeta.
    """
    zeta = float(zeta)
    for b in model.junction_set():
        if abs(zeta - b) < 1e-14 * (1.0 + abs(b)):
            raise ZeroDivisionError("pole of Sigma at junction point %r" % b)
    out = 0.0
    if model.mono_n:
        out += (model.mono_n / model.p) / zeta
    for c, n in model.factors:
        out += (n / model.p) / (zeta - 1.0 / c)
    return out


def f_of(model: LimitModel, u: float) -> float:
    """f(u) = (1/p) sum over the multiset of 1/(1 - sigma^{-1} u)."""
    return sum(m / (1.0 - u / sig)
               for sig, m in zip(model.S.sigma, model.S.mult)) / model.p


def invert_f(model: LimitModel, w: float, j: int) -> float:
    """The unique u in component E_j with f(u) = w.

    Components of the complement of the multiset values: E_0 wraps through
    infinity (right of sigma_1 and left of 0, domain w < 1), E_j between
    sigma_{j+1} and sigma_j for interior j (all of R), E_d between 0 and
    sigma_d (domain w > 1).
    """
    S = model.S
    d = S.d
    if not 0 <= j <= d:
        raise ValueError("branch index out of range")
    if j == 0 and w >= 1.0:
        raise ValueError("w = %g outside the domain of the wrap branch" % w)
    if j == d and w <= 1.0:
        raise ValueError("w = %g outside the domain of the inner branch" % w)
    if w == 0.0:
        if j != 0:
            raise ValueError("f = 0 only on the wrap branch")
        return math.inf
    # polynomial: (1/p) sum_k m_k prod_{l != k}(1 - u/sigma_l) = w prod_l (1 - u/sigma_l)
    poly = -w * _prod_poly(S.sigma)
    for k, (sig, m) in enumerate(zip(S.sigma, S.mult)):
        others = [s for i, s in enumerate(S.sigma) if i != k]
        term = (m / S.p) * _prod_poly(others)
        poly = _poly_add(poly, term)
    roots = np.roots(poly)
    tol = 1e-9
    cands = [float(r.real) for r in roots if abs(r.imag) < 1e-9 * (1 + abs(r))]
    def in_component(u):
        # sigma_j of the ladder is S.sigma[j - 1]
        if j == 0:
            return u > S.sigma[0] + tol or u < -tol
        if j == d:
            return tol < u < S.sigma[-1] - tol
        return S.sigma[j] + tol < u < S.sigma[j - 1] - tol
    hits = [u for u in cands if in_component(u)]
    if not hits:
        raise ArithmeticError("no inverse of f on component %d at w = %g "
                              "(real candidates %r)" % (j, w, cands))
    best = min(hits, key=lambda u: abs(f_of(model, u) - w))
    if abs(f_of(model, best) - w) > 1e-6 * (1.0 + abs(w)):
        raise ArithmeticError("inverse of f failed the round trip at w = %g" % w)
    return best


def _prod_poly(values):
    """Descending coefficients of prod (1 - u/v) over v in values."""
    poly = np.array([1.0])
    for v in values:
        poly = np.convolve(poly, [-1.0 / v, 1.0])
    return poly


def _poly_add(a, b):
    n = max(len(a), len(b))
    a = np.concatenate([np.zeros(n - len(a)), a])
    b = np.concatenate([np.zeros(n - len(b)), b])
    return a + b


def branch_index(model: LimitModel, zeta: float) -> int:
    """j with arg_+ Q(zeta) = -pi varsigma_j, via exact exponent counting."""
    units = model.arg_plus_Q_units(zeta)  # p * arg_+Q/(-pi)
    target = units / model.p
    for j, vs in enumerate(model.S.varsigma):
        if abs(vs - target) < 1e-9:
            return j
    raise ArithmeticError("arg count %g/%d is not on the slope ladder"
                          % (units, model.p))


def frozen_point(model: LimitModel, zeta: float) -> FrozenPoint:
    """The boundary point parametrized by a real zeta off the junctions.

    x solves e^x = zeta * phi_j(zeta Sigma(zeta)) on the branch j selected
    by the argument count of Q; y comes from magnitudes alone and the
    double-root residual is verified.
    """
    if zeta == 0.0:
        if model.mono_n:
            raise ZeroDivisionError("0 is a junction point of this wall")
        # e^{-x} (1/p) sum of the multiset = -Sigma(0)
        exm = -Sigma(model, 0.0) * model.p \
            / sum(m * sig for sig, m in zip(model.S.sigma, model.S.mult))
        if exm <= 0:
            raise ArithmeticError("no boundary point at zeta = 0")
        x = -math.log(exm)
        y = model.bw.value(model.bw.kinks[0])
        return FrozenPoint(0.0, x, y, 0, 0.0)
    j = branch_index(model, zeta)
    w = zeta * Sigma(model, zeta)
    u = invert_f(model, w, j)
    exval = zeta * u
    if not exval > 0.0:
        raise ArithmeticError("nonpositive e^x at zeta = %g (branch %d)" % (zeta, j))
    x = math.log(exval)
    # |P_x(zeta)| via 1 - sigma/u; |Q| via the branch factors
    logP = sum((m / model.p) * math.log(abs(1.0 - sig / u))
               for sig, m in zip(model.S.sigma, model.S.mult))
    logQ = model.log_const
    if model.mono_n:
        logQ += (model.mono_n / model.p) * math.log(abs(zeta))
    for c, n in model.factors:
        logQ += (n / model.p) * math.log(abs(1.0 - c * zeta))
    y = logQ - logP
    resid = abs(f_of(model, exval / zeta) - w)
    dbl = abs(sum(m / model.p / (zeta - exval / sig)
                  for sig, m in zip(model.S.sigma, model.S.mult))
              - Sigma(model, zeta))
    if dbl > RESIDUAL_TOL * (1.0 + abs(Sigma(model, zeta))):
        raise ArithmeticError(
            "double-root residual %g at zeta = %g: branch mismatch" % (dbl, zeta))
    return FrozenPoint(zeta, x, y, j, max(resid, dbl))


def _component_list(model: LimitModel):
    """Connected components of the real line minus the junction set."""
    pts = sorted(model.junction_set())
    comps = []
    for a, b in zip(pts, pts[1:]):
        comps.append((a, b))
    if model.has_inf_junction:
        comps.append((pts[-1], math.inf))
        comps.append((-math.inf, pts[0]))
    else:
        comps.append((pts[-1], math.inf))   # wrap: right part
        comps.append((-math.inf, pts[0]))   # wrap: left part
    return comps, pts


def _endpoint_kind(model: LimitModel, b: float):
    """Classify an endpoint of a junction component."""
    if math.isinf(b):
        return "limb", None
    if b == 0.0 and model.mono_n:
        return "limb", None
    for V in model.bw.kinks:
        if math.isinf(V):
            continue
        for sig in model.S.sigma:
            if abs(b - math.exp(V) / sig) < 1e-12 * (1.0 + abs(b)):
                drop = model.bw.slope_right(V) < model.bw.slope_left(V)
                return ("tentacle" if drop else "cusp"), V
    return "cusp", None


def frozen_boundary(model: LimitModel, samples: int = 120):
    """Sampled boundary segments, one per junction component.

    Sampling is graded toward the endpoints and refined where consecutive
    points are farther apart than 1% of the bounding box.
    """
    comps, _ = _component_list(model)
    segments = []
    for lo, hi in comps:
        pts = []
        for s in _component_grid(lo, hi, samples):
            try:
                fp = frozen_point(model, s)
            except (ArithmeticError, ZeroDivisionError, ValueError):
                continue
            pts.append(fp)
        if len(pts) < 4:
            continue
        pts = _refine(model, pts)
        lk, lx = _endpoint_kind(model, lo)
        rk, rx = _endpoint_kind(model, hi)
        segments.append(CurveSegment((lo, hi), tuple(pts), lk, rk, lx, rx))
    return segments


def _component_grid(lo, hi, n):
    if math.isinf(lo) and math.isinf(hi):
        return list(np.linspace(-50, 50, n))
    if math.isinf(lo):
        return list(hi - np.logspace(math.log10(1e-7 * (1 + abs(hi))), 2.5, n)[::-1])
    if math.isinf(hi):
        return list(lo + np.logspace(math.log10(1e-7 * (1 + abs(lo))), 2.5, n))
    # graded toward both endpoints
    u = (1.0 - np.cos(np.pi * np.linspace(0.0, 1.0, n + 2)[1:-1])) / 2.0
    eps = 1e-9
    u = eps + (1 - 2 * eps) * u
    return list(lo + (hi - lo) * u)


def _refine(model: LimitModel, pts, max_extra: int = 400):
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    span = max(max(xs) - min(xs), 1e-9) + max(ys) - min(ys)
    out = list(pts)
    added = 0
    i = 0
    while i < len(out) - 1 and added < max_extra:
        a, b = out[i], out[i + 1]
        if math.hypot(b.x - a.x, b.y - a.y) > 0.01 * span:
            mid = 0.5 * (a.zeta + b.zeta)
            try:
                fp = frozen_point(model, mid)
                out.insert(i + 1, fp)
                added += 1
                continue
            except (ArithmeticError, ZeroDivisionError, ValueError):
                pass
        i += 1
    return out


def tentacle_positions(model: LimitModel):
    """x-coordinates of the vertical tentacles: the singular kinks."""
    return singular_points(model.bw, model.S)
