"""Composite Gauss-Legendre rules on graded panels."""

import numpy as np

_GL_CACHE = {}


def gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


def panel_rule(breaks, order=16):
    """Nodes and weights of a Gauss rule with `order` points on each panel."""
    breaks = np.asarray(breaks, dtype=float)
    x, w = gauss_legendre(order)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) * 0.5 + half * x[None, :]
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_breaks(lo, hi, focus=None, hmin=None, hmax=0.1, ratio=2.0,
                  end_grading=None, extra=()):
    """Panel breakpoints on [lo, hi].

    Panels shrink geometrically (by `ratio`) toward `focus` down to `hmin`,
    and toward `hi` down to `end_grading` when given. Elsewhere panels are at
    most `hmax` wide. `extra` points are always included as breaks.
    """
    pts = [lo, hi]
    pts.extend(p for p in extra if lo < p < hi)
    if focus is not None and hmin is not None and lo <= focus <= hi:
        pts.append(focus)
        d = hmin
        while d < (hi - lo):
            if focus - d > lo:
                pts.append(focus - d)
            if focus + d < hi:
                pts.append(focus + d)
            d *= ratio
    if end_grading is not None:
        d = end_grading
        while d < 0.5 * (hi - lo):
            pts.append(hi - d)
            d *= ratio
    pts = np.unique(np.asarray(pts, dtype=float))
    # subdivide long panels
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        m = int(np.ceil((b - a) / hmax))
        if m > 1:
            out.extend(np.linspace(a, b, m + 1)[1:])
        else:
            out.append(b)
    return np.asarray(out)
