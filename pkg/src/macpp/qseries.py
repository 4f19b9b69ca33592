"""q-series primitives: Pochhammer symbols and skew branching coefficients.

Everything here works with 0 < q, t < 1. Infinite products are truncated
once the running factor is below machine noise; the branching coefficients
psi/phi are evaluated through exact finite products (the infinite parts
telescope pairwise), so they carry no truncation error.
"""

from __future__ import annotations

import math

TRUNC = 1e-17
MIN_FACTORS = 8


def qpochhammer(a, q, n=None):
    """(a; q)_n = prod_{i=0}^{n-1} (1 - a q^i); n=None means the infinite product.

    Accepts complex a. The infinite case truncates once |a q^i| < 1e-17,
    with at least 8 factors taken; requires |q| < 1.
    """
    if n is not None:
        out = 1.0
        x = a
        for _ in range(n):
            out *= 1.0 - x
            x *= q
        return out
    if abs(q) >= 1.0:
        raise ValueError("infinite q-Pochhammer needs |q| < 1")
    out = 1.0
    x = a
    i = 0
    while i < MIN_FACTORS or abs(x) >= TRUNC:
        out *= 1.0 - x
        x *= q
        i += 1
        if i > 100000:
            break
    return out


def log_qpochhammer_inf(a, q):
    """log (a; q)_infty for real a < 1, 0 < q < 1, via summed log1p terms."""
    if a >= 1.0:
        raise ValueError("log of q-Pochhammer needs a < 1 for a real result")
    total = 0.0
    x = a
    i = 0
    while i < MIN_FACTORS or abs(x) >= TRUNC:
        total += math.log1p(-x)
        x *= q
        i += 1
        if i > 100000:
            break
    return total


def f_ratio(u, q, t):
    """f(u) = (tu; q)_infty / (qu; q)_infty."""
    den = qpochhammer(q * u, q)
    if den == 0.0:
        raise ZeroDivisionError("denominator (qu;q)_infty vanishes at u=%r" % (u,))
    return qpochhammer(t * u, q) / den


def _f_shift_ratio(a, c, v, q, t):
    """f(q^a v) / f(q^c v) as an exact finite product, for integers a <= c.

    The infinite tails of the two Pochhammer ratios cancel, leaving
    prod_{s=a}^{c-1} (1 - t q^s v) / prod_{s=a+1}^{c} (1 - q^s v).
    """
    if a > c:
        return 1.0 / _f_shift_ratio(c, a, v, q, t)
    num = 1.0
    den = 1.0
    qa = q ** a * v
    for s in range(a, c):
        num *= 1.0 - t * qa
        qa *= q
    qa = q ** (a + 1) * v
    for s in range(a + 1, c + 1):
        den *= 1.0 - qa
        qa *= q
    return num / den


def _part(parts, i):
    """1-indexed part with zero padding."""
    return parts[i - 1] if 1 <= i <= len(parts) else 0


def interlaces(mu, lam):
    """True iff lam_i >= mu_i >= lam_{i+1} for all i."""
    n = max(len(mu), len(lam))
    for i in range(1, n + 1):
        if not (_part(lam, i) >= _part(mu, i) >= _part(lam, i + 1)):
            return False
    return True


def psi_coeff(lam, mu, q, t):
    """Branching coefficient of the single-variable skew P function.

    Returns 0 when mu does not interlace below lam.
    """
    if not interlaces(mu, lam):
        return 0.0
    out = 1.0
    ell = len(lam)
    for j in range(1, ell + 1):
        for i in range(1, j + 1):
            tv = t ** (j - i)
            # f(q^{mu_i-mu_j} t^{j-i}) / f(q^{lam_i-mu_j} t^{j-i})
            out *= _f_shift_ratio(_part(mu, i) - _part(mu, j),
                                  _part(lam, i) - _part(mu, j), tv, q, t)
            # f(q^{lam_i-lam_{j+1}} t^{j-i}) / f(q^{mu_i-lam_{j+1}} t^{j-i})
            out /= _f_shift_ratio(_part(mu, i) - _part(lam, j + 1),
                                  _part(lam, i) - _part(lam, j + 1), tv, q, t)
    return out


def phi_coeff(lam, mu, q, t):
    """Branching coefficient of the single-variable skew Q function.

    Returns 0 when mu does not interlace below lam.
    """
    if not interlaces(mu, lam):
        return 0.0
    out = 1.0
    ell = len(lam)
    for j in range(1, ell + 1):
        for i in range(1, j + 1):
            tv = t ** (j - i)
            # f(q^{lam_i-lam_j} t^{j-i}) / f(q^{lam_i-mu_j} t^{j-i})
            out *= _f_shift_ratio(_part(lam, i) - _part(lam, j),
                                  _part(lam, i) - _part(mu, j), tv, q, t)
            # f(q^{mu_i-mu_{j+1}} t^{j-i}) / f(q^{mu_i-lam_{j+1}} t^{j-i})
            out /= _f_shift_ratio(_part(mu, i) - _part(lam, j + 1),
                                  _part(mu, i) - _part(mu, j + 1), tv, q, t)
    return out


def psi_coeff_literal(lam, mu, q, t):
    """psi via the literal double product of infinite-Pochhammer f ratios.

    Slower and carries truncation error; kept as an independent cross-check
    of the telescoped implementation.
    """
    if not interlaces(mu, lam):
        return 0.0
    out = 1.0
    ell = len(lam)
    for j in range(1, ell + 1):
        for i in range(1, j + 1):
            tv = t ** (j - i)
            out *= f_ratio(q ** (_part(mu, i) - _part(mu, j)) * tv, q, t)
            out *= f_ratio(q ** (_part(lam, i) - _part(lam, j + 1)) * tv, q, t)
            out /= f_ratio(q ** (_part(lam, i) - _part(mu, j)) * tv, q, t)
            out /= f_ratio(q ** (_part(mu, i) - _part(lam, j + 1)) * tv, q, t)
    return out


def phi_coeff_literal(lam, mu, q, t):
    """phi via the literal double product of infinite-Pochhammer f ratios."""
    if not interlaces(mu, lam):
        return 0.0
    out = 1.0
    ell = len(lam)
    for j in range(1, ell + 1):
        for i in range(1, j + 1):
            tv = t ** (j - i)
            out *= f_ratio(q ** (_part(lam, i) - _part(lam, j)) * tv, q, t)
            out *= f_ratio(q ** (_part(mu, i) - _part(mu, j + 1)) * tv, q, t)
            out /= f_ratio(q ** (_part(lam, i) - _part(mu, j)) * tv, q, t)
            out /= f_ratio(q ** (_part(mu, i) - _part(lam, j + 1)) * tv, q, t)
    return out
