"""Airy function of the first kind and its decaying antiderivatives.

Ai is evaluated from its Maclaurin series for |z| <= 6 (7.5 outside the
sector |arg z| < pi/3) and from the large-argument expansion beyond that.
On the far left the expansion is only used through the connection formula Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z),
w = exp(2 pi i/3), which moves both arguments into the sector where the
expansion is valid.

The n-th antiderivative decaying along the ray exp(i pi/6) R_+ is

    Ai(z, n) = (-1)^n/(n-1)! int_0^inf (t e)^(n-1) Ai(z + t e) e dt,  e = exp(i pi/6).
"""

from math import factorial, gamma

import numpy as np

from ._quad import panel_rule
from .errors import DomainError

SERIES_RADIUS = 6.0
SERIES_EXTENDED = 7.5
Z_MAX = 50.0
RAY = np.exp(1j * np.pi / 6.0)
_W = np.exp(2j * np.pi / 3.0)

_C1 = 1.0 / (3.0 ** (2.0 / 3.0) * gamma(2.0 / 3.0))
_C2 = 1.0 / (3.0 ** (1.0 / 3.0) * gamma(1.0 / 3.0))


def _series(z, terms=90):
    z3 = z ** 3
    f = np.ones_like(z)
    g = z.copy()
    tf, tg = np.ones_like(z), z.copy()
    for k in range(1, terms):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        f = f + tf
        g = g + tg
        if np.all(np.abs(tf) + np.abs(tg) <= 1e-18 * (np.abs(f) + np.abs(g))):
            break
    return _C1 * f - _C2 * g


def _asym_coeffs(n):
    # u_k = Gamma(3k + 1/2) / (54^k k! Gamma(k + 1/2))
    u = [1.0]
    for k in range(1, n):
        u.append(u[-1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / (216.0 * k * (2 * k - 1)))
    return np.array(u)


_U = _asym_coeffs(40)


def _asym_sector(z):
    # valid for |arg z| < 2 pi/3 with |z| large; optimal truncation
    zeta = (2.0 / 3.0) * z ** 1.5
    s = np.ones_like(z)
    term_prev = np.full(z.shape, np.inf)
    done = np.zeros(z.shape, dtype=bool)
    p = np.ones_like(z)
    for k in range(1, len(_U)):
        p = p * (-1.0 / zeta)
        term = _U[k] * p
        grow = np.abs(term) >= term_prev
        done = done | grow
        s = np.where(done, s, s + term)
        term_prev = np.where(done, term_prev, np.abs(term))
        if np.all(done):
            break
    return np.exp(-zeta) / (2.0 * np.sqrt(np.pi) * z ** 0.25) * s


def _asym(z):
    out = np.empty_like(z)
    arg = np.abs(np.angle(z))
    inner = arg < 2.0 * np.pi / 3.0
    out[inner] = _asym_sector(z[inner])
    zz = z[~inner]
    if zz.size:
        out[~inner] = -_W * _asym_sector(_W * zz) - _W ** 2 * _asym_sector(_W ** 2 * zz)
    return out


def _ai(z):
    z = np.asarray(z, dtype=complex)
    flat = np.atleast_1d(z).ravel()
    if np.any(np.abs(flat) > Z_MAX):
        raise DomainError(f"|z| > {Z_MAX}: outside the overflow guard")
    out = np.empty_like(flat)
    r = np.abs(flat)
    # off the decaying sector the expansion loses accuracy just beyond
    # |z| = 6, so the series is kept a little further out there
    small = (r <= SERIES_RADIUS) | ((r <= SERIES_EXTENDED) & (np.abs(np.angle(flat)) >= np.pi / 3.0))
    if np.any(small):
        out[small] = _series(flat[small])
    if np.any(~small):
        out[~small] = _asym(flat[~small])
    return out.reshape(z.shape) if z.ndim else complex(out[0])


def _ray_length(z):
    # Re zeta grows like (t^1.5)/(1.5 sqrt 2) along the ray; stop after ~40 e-folds
    return float(np.abs(z) + 30.0)


def _ray_quadrature(z, n):
    T = _ray_length(z)
    # panels shrink near t = 0 where the integrand varies fastest
    breaks = np.unique(np.concatenate([np.linspace(0.0, 2.0, 9), np.arange(2.0, T + 0.5, 0.5)]))
    t, w = panel_rule(breaks, 16)
    s = z + t * RAY
    keep = np.abs(s) <= Z_MAX
    vals = np.zeros_like(s)
    vals[keep] = _ai(s[keep])
    kern = (t * RAY) ** (n - 1) * RAY
    return complex((-1) ** n / factorial(n - 1) * np.sum(w * kern * vals))


def _segment_quadrature(z, n):
    # Ai(z,1) = -1/3 + int_0^z Ai,  Ai(z,2) = -Ai'(0) - z/3 + int_0^z (z - s) Ai(s) ds
    if z == 0:
        return -1.0 / 3.0 + 0j if n == 1 else complex(_C2)
    m = max(2, int(np.ceil(abs(z) / 0.4)))
    t, w = panel_rule(np.linspace(0.0, 1.0, m + 1), 16)
    s = t * z
    vals = _ai(s) * z
    if n == 1:
        return complex(-1.0 / 3.0 + np.sum(w * vals))
    return complex(_C2 - z / 3.0 + np.sum(w * (z - s) * vals))


def airy(z, n=0, method="auto"):
    """Ai(z) for n = 0, or its n-th decaying antiderivative for n = 1, 2.

    The antiderivatives are computed either by integrating Ai from the
    origin with the known values at 0 (``segment``) or directly along the
    decay ray (``ray``). The ray route suffers cancellation when Ai is
    exponentially large at z (far left, |z| beyond ~15); the segment route
    cannot resolve the exponentially small values in the decaying sector.
    ``auto`` picks the ray inside |arg z| <= pi/3, |z| > 2 and the segment
    elsewhere.
    """
    if n == 0:
        return _ai(z)
    if n not in (1, 2):
        raise DomainError("n must be 0, 1 or 2")
    z = complex(z)
    if abs(z) > Z_MAX:
        raise DomainError(f"|z| > {Z_MAX}: outside the overflow guard")
    if method == "auto":
        method = "ray" if abs(z) > 2.0 and abs(np.angle(z)) <= np.pi / 3.0 else "segment"
    if method == "ray":
        return _ray_quadrature(z, n)
    if method != "segment":
        raise DomainError(f"unknown method {method!r}")
    return _segment_quadrature(z, n)


def airy_derivative(z):
    """Ai'(z) from the differentiated Maclaurin series (|z| <= 6)."""
    z = complex(z)
    if abs(z) > SERIES_RADIUS:
        raise DomainError("series derivative only for |z| <= 6")
    z3 = z ** 3
    fp, gp = 0j, 1.0 + 0j
    tf, tg = 1.0 + 0j, 1.0 + 0j
    for k in range(1, 90):
        tf = tf * z3 / ((3 * k - 1) * (3 * k))
        tg = tg * z3 / ((3 * k) * (3 * k + 1))
        fp += tf * 3 * k / z if z != 0 else 0.0
        gp += tg * (3 * k + 1)
        if abs(tf) + abs(tg) < 1e-20:
            break
    return complex(_C1 * fp - _C2 * gp)
