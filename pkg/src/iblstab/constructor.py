"""Synthesis of shear flows with a prescribed inviscid dispersion value.

A profile is described through the density h = H' of its inverse y = H(u).
In the variable u,

    Phi_inv(mu) = int_0^1 (1-x) |mu-x|^-4 p_mu(x) h(x) dx,
    Delta_s     = int_0^1 (1-x) h(x) dx,

with p_mu(x) = (2mu - 1 - x)(conj(mu) - x)^2, so every target is a linear
condition on h. Taking h as a sum of narrow bumps plus a tail beta/(1-x)
turns the condition into a positive combination of three (or two) complex
numbers, which is solvable whenever those numbers positively span the plane
(or the needed cone).
"""

import os
from dataclasses import dataclass, field

import numpy as np

from ._quad import panel_rule
from .errors import DomainError, NumericError
from .inviscid import G_of, SpectralPoint, phi_inv_value
from .shear_flow import InverseProfile, inverse_family, validate_assumptions

DOMAINS = ("gamma1", "gamma2", "gamma3")
_ALIASES = {"g1": "gamma1", "1": "gamma1", "pdt": "gamma1",
            "g2": "gamma2", "2": "gamma2", "ibl_zero": "gamma2",
            "g3": "gamma3", "3": "gamma3", "ibl_gamma": "gamma3"}


def _domain(which):
    w = str(which).lower().replace("γ", "gamma").replace("Γ", "gamma")
    w = _ALIASES.get(w, w)
    if w not in DOMAINS:
        raise DomainError(f"unknown spectral domain {which!r}")
    return w


def domain_bound(a, which):
    """Upper bound on b for membership of a + ib (0 outside the a-range)."""
    which = _domain(which)
    if not 0.0 < a < 1.0:
        return 0.0
    if which == "gamma1":
        return float(np.sqrt(3.0 * a * (1.0 - a) ** 2 / (4.0 - 3.0 * a)))
    if which == "gamma2":
        return float(np.sqrt(a * (2.0 - 3.0 * a) / 3.0)) if a < 2.0 / 3.0 else 0.0
    return float(np.sqrt(a * (1.0 - a)))


def in_gamma(mu, which):
    """Strict membership of mu in the spectral domain ``which``."""
    p = SpectralPoint.of(mu)
    return bool(p.b > 0.0 and p.b < domain_bound(p.a, which))


def p_mu(mu, x):
    mu = SpectralPoint.of(mu).mu
    x = np.asarray(x, dtype=float)
    return (2.0 * mu - 1.0 - x) * (np.conj(mu) - x) ** 2


def q_mu(mu, x):
    mu = SpectralPoint.of(mu).mu
    x = np.asarray(x, dtype=float)
    return np.abs(mu - x) ** 4 - p_mu(mu, x)


def crossing_x0(mu, which):
    """Point where Im p_mu (gamma2, gamma3) or Im q_mu (gamma1) vanishes."""
    a, b = SpectralPoint.of(mu).a, SpectralPoint.of(mu).b
    if _domain(which) == "gamma1":
        return (a * (1.0 - a) - b * b) / (1.0 - a)
    return a - b * b / (1.0 - a)


# --------------------------------------------------------------------------
# positive spanning


def _cross(z, w):
    return z.real * w.imag - z.imag * w.real


def spans_plane(points, tol=0.0):
    """True when 0 lies strictly inside the triangle of the three points."""
    z = [complex(p) for p in points]
    s = [_cross(z[i], z[(i + 1) % 3]) for i in range(3)]
    scale = max(abs(v) for v in s) or 1.0
    return bool(all(v > tol * scale for v in s) or all(v < -tol * scale for v in s))


def positive_combination(points, target):
    """Non-negative weights w with sum w_i points_i = target.

    The solution set is a segment of a line along the positive null vector;
    the returned point has minimal l1 norm (one weight is zero). For target
    0 the normalised null vector itself is returned.
    """
    z = np.array([complex(p) for p in points])
    if z.shape != (3,):
        raise DomainError("need exactly three points")
    if not spans_plane(z):
        raise DomainError("points do not positively span the plane")
    # null vector of the 2x3 real system: cyclic cross products
    n = np.array([_cross(z[1], z[2]), _cross(z[2], z[0]), _cross(z[0], z[1])])
    if n[0] < 0.0:
        n = -n
    n = n / np.sum(n)
    target = complex(target)
    if target == 0.0:
        return n
    # particular solution with w_2 = 0, then shift along n to reach w >= 0
    M = np.array([[z[0].real, z[1].real], [z[0].imag, z[1].imag]])
    w01 = np.linalg.solve(M, [target.real, target.imag])
    wp = np.array([w01[0], w01[1], 0.0])
    j = int(np.argmax(-wp / n))
    w = wp - wp[j] / n[j] * n
    # the weight that fixed the shift is zero by construction, not by roundoff
    w[j] = 0.0
    return np.maximum(w, 0.0)


# --------------------------------------------------------------------------
# bumps


_BUMP_C = 315.0 / 256.0


def bump(t):
    """theta(t) = (315/256)(1 - t^2)^4 on [-1, 1], unit mass."""
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1.0, _BUMP_C * (1.0 - t * t) ** 4, 0.0)


def bump_d1(t):
    t = np.asarray(t, dtype=float)
    return np.where(np.abs(t) < 1.0, -8.0 * _BUMP_C * t * (1.0 - t * t) ** 3, 0.0)


def bump_d2(t):
    t = np.asarray(t, dtype=float)
    s = 1.0 - t * t
    return np.where(np.abs(t) < 1.0, _BUMP_C * (-8.0 * s ** 3 + 48.0 * t * t * s * s), 0.0)


def bump_cdf(t):
    """Antiderivative of theta from -1 (0 below -1, 1 above 1)."""
    t = np.clip(np.asarray(t, dtype=float), -1.0, 1.0)
    # (1-t^2)^4 = 1 - 4t^2 + 6t^4 - 4t^6 + t^8
    prim = t - 4.0 * t ** 3 / 3.0 + 6.0 * t ** 5 / 5.0 - 4.0 * t ** 7 / 7.0 + t ** 9 / 9.0
    return _BUMP_C * prim + 0.5


def _bump_integral(fun, center, width, order=24, panels=8):
    """int fun(x) theta((x - c)/w)/w dx."""
    t, w = panel_rule(np.linspace(-1.0, 1.0, panels + 1), order)
    return complex(np.sum(w * bump(t) * fun(center + width * t)))


def _tail_integral(fun, order=24, panels=64):
    x, w = panel_rule(np.linspace(0.0, 1.0, panels + 1), order)
    return complex(np.sum(w * fun(x)))


def bump_profile(centers, width, weights, tail_weight=1.0, kind="constructed", params=None):
    """Profile with h = sum weights_i theta((u - c_i)/width)/width + tail/(1-u)."""
    c = np.asarray(centers, dtype=float)
    al = np.asarray(weights, dtype=float)
    eps = float(width)
    if np.any(al < 0.0) or tail_weight <= 0.0:
        raise DomainError("weights must be non-negative and the tail weight positive")
    if np.any(c - eps <= 0.0) or np.any(c + eps >= 1.0):
        raise DomainError("bump width too large for the chosen centres")

    def P(u):
        u = np.asarray(u, dtype=float)
        return sum(a * bump_cdf((u - ci) / eps) for a, ci in zip(al, c)) + 0.0 * u

    def dP(u):
        u = np.asarray(u, dtype=float)
        return sum(a / eps * bump((u - ci) / eps) for a, ci in zip(al, c)) + 0.0 * u

    def d2P(u):
        u = np.asarray(u, dtype=float)
        return sum(a / eps ** 2 * bump_d1((u - ci) / eps) for a, ci in zip(al, c)) + 0.0 * u

    def d3P(u):
        u = np.asarray(u, dtype=float)
        return sum(a / eps ** 3 * bump_d2((u - ci) / eps) for a, ci in zip(al, c)) + 0.0 * u

    breaks = sorted(set(float(v) for ci in c for v in (ci - eps, ci, ci + eps)))
    par = {"centers": [float(v) for v in c], "width": eps, "weights": [float(v) for v in al],
           "tail_weight": float(tail_weight)}
    par.update(params or {})
    return InverseProfile(kind, par, tail_weight, P, dP, d2P, d3P, (0.0, float(np.sum(al))), breaks)


# --------------------------------------------------------------------------
# construction


def _psi(fun, mu, centers, eps):
    def dens(x):
        return (1.0 - x) * fun(mu, x) / np.abs(mu - x) ** 4
    return np.array([_bump_integral(dens, ci, eps) for ci in centers])


def spanning_points(mu, which, eps=None):
    """Abscissae whose p_mu (or q_mu) values serve as generating directions.

    gamma1: (d, x0', 1-d) for q_mu; gamma2: (d, x0, 1-d) for p_mu, where d
    keeps bumps of width ``eps`` inside (0, 1) (d = 0 when eps is None).
    gamma3: (x0, x_-, x_+) with Re p_mu(x_+-) > 0 and +-Im p_mu(x_+-) > 0.
    """
    which = _domain(which)
    mu = SpectralPoint.of(mu).mu
    if not in_gamma(mu, which):
        raise DomainError(f"mu = {mu} is not in {which}")
    x0 = crossing_x0(mu, which)
    if which in ("gamma1", "gamma2"):
        d = 0.0 if eps is None else 2.0 * eps
        xs = np.array([d, x0, 1.0 - d])
        if not (xs[0] < xs[1] < xs[2]):
            raise DomainError("bump width too large for the crossing point")
        fun = q_mu if which == "gamma1" else p_mu
        if not spans_plane(fun(mu, xs)):
            raise DomainError("hull verification failed: mu is numerically outside the domain")
        return xs
    # Im p_mu is decreasing in x, so x_+ sits left of x0 and x_- right of it
    step = 0.5 * min(x0, 1.0 - x0)
    margin = 0.0 if eps is None else 1.5 * eps
    for _ in range(60):
        xp, xm = x0 - step, x0 + step
        vp, vm = p_mu(mu, xp), p_mu(mu, xm)
        if (xp > margin and xm < 1.0 - margin and vp.real > 0.0 and vm.real > 0.0
                and vp.imag > 0.0 and vm.imag < 0.0):
            return np.array([x0, xm, xp])
        step *= 0.5
    raise DomainError("no points x_+- found around x0")


@dataclass
class ConstructionResult:
    profile: InverseProfile
    centers: np.ndarray
    width: float
    weights: np.ndarray
    tail_weight: float
    mu: complex
    target: str
    gamma: float
    achieved: complex
    defect: float
    delta_s: float
    sigma: float = None
    notes: dict = field(default_factory=dict)


def _parse_target(target, gamma):
    t = str(target).lower()
    if t in ("pdt", "gamma1"):
        return "pdt", None
    if t in ("ibl0", "ibl_zero", "gamma2"):
        return "ibl_zero", 0.0
    if t.startswith("ibl:"):
        return "ibl_gamma", float(t.split(":", 1)[1])
    if t in ("ibl_gamma", "gamma3"):
        if gamma is None or not gamma > 0.0:
            raise DomainError("ibl_gamma needs gamma > 0")
        return "ibl_gamma", float(gamma)
    raise DomainError(f"unknown construction target {target!r}")


def construct_flow(mu, target="pdt", eps=0.02, tol=1e-6, gamma=None, validate=True):
    """Profile with Phi_inv(mu) = Delta_s (pdt), 0 (ibl_zero) or gamma (ibl_gamma)."""
    mu = SpectralPoint.of(mu).mu
    kind, gam = _parse_target(target, gamma)
    if kind == "ibl_gamma" and not gam > 0.0:
        raise DomainError("ibl_gamma needs gamma > 0")
    if not eps > 0.0:
        raise DomainError("bump width must be positive")
    sigma = None
    if kind in ("pdt", "ibl_zero"):
        which = "gamma1" if kind == "pdt" else "gamma2"
        fun = q_mu if kind == "pdt" else p_mu
        xs = spanning_points(mu, which, eps)
        psi = _psi(fun, mu, xs, eps)
        if not spans_plane(psi):
            raise DomainError("bump width too large: smoothed directions do not span the plane")
        tail = _tail_integral(lambda x: fun(mu, x) / np.abs(mu - x) ** 4)
        beta = 1.0
        alphas = positive_combination(psi, -tail)
        centers = xs
    else:
        which = "gamma3"
        x0, xm, xp = spanning_points(mu, which, eps)
        centers = np.array([xm, xp])
        psi_m, psi_p = _psi(p_mu, mu, centers, eps)
        if not (psi_p.real > 0.0 and psi_m.real > 0.0 and psi_p.imag > 0.0 and psi_m.imag < 0.0):
            raise DomainError("bump width too large: smoothed directions lost their signs")
        psi = _tail_integral(lambda x: p_mu(mu, x) / np.abs(mu - x) ** 4)
        cross = psi_p.imag * psi_m.real - psi_m.imag * psi_p.real
        sigma = None
        for j in range(-20, 61):
            s = 2.0 ** j
            if psi.imag >= 0.0:
                am, ap = s * psi_p.imag + psi.imag / (-psi_m.imag), -s * psi_m.imag
            else:
                am, ap = s * psi_p.imag, -s * psi_m.imag + (-psi.imag) / psi_p.imag
            bracket = (am * psi_m + ap * psi_p + psi).real
            if bracket > 0.0:
                sigma = s
                break
        if sigma is None or not cross > 0.0:
            raise DomainError("tail-weight search failed: sigma exhausted")
        beta = gam / bracket
        alphas = np.array([am, ap]) * beta
    prof = bump_profile(centers, eps, alphas, beta,
                        params={"mu": [mu.real, mu.imag], "target": kind,
                                "gamma": gam if gam is not None else "delta_s"})
    delta_s = float(np.sum(alphas * (1.0 - centers)) + beta)
    goal = delta_s if kind == "pdt" else gam
    achieved = phi_inv_value(prof, mu)
    defect = abs(achieved - goal)
    res = ConstructionResult(prof, centers, float(eps), alphas, float(beta), mu, kind,
                             float(goal), complex(achieved), float(defect), delta_s, sigma)
    if validate:
        rep = validate_assumptions(prof)
        res.notes["validation"] = rep
        if not np.all(prof.h(np.linspace(0.0, 1.0 - 1e-9, 20001)) > 0.0):
            raise NumericError("constructed density h is not positive")
    if defect > tol:
        raise NumericError(f"construction defect {defect:.3e} exceeds tolerance {tol:g}")
    return res


# --------------------------------------------------------------------------
# explicit family


CRIT2_THRESHOLD = 64.0 / (1.0 + np.sqrt(17.0)) ** 2


def chi_u0_closed(u0):
    """Closed-form crossing abscissa at the inflection point of the explicit family."""
    return 1.0 / u0 + (u0 - 1.5) / (1.0 - u0) ** 2


def _crit1_cubic(u):
    # chi(y0) = Delta_s multiplied out with alpha = (1-u)^-2
    return u ** 3 - 4.0 * u ** 2 + 13.0 / 3.0 * u - 1.0


def crit1_threshold():
    """alpha above which chi(y0) < Delta_s for the explicit family."""
    from scipy.optimize import brentq
    u = brentq(_crit1_cubic, 0.1, 0.5, xtol=1e-15)
    return 1.0 / (1.0 - u) ** 2, u


@dataclass
class FamilyReport:
    alpha: float
    u0: float
    y0: float
    chi_y0: float
    delta_s: float
    criterion1: bool
    criterion2: bool
    alpha_min_1: float
    alpha_min_2: float


def explicit_family(alpha):
    """Explicit family H(u) = -log(1-u) - alpha u^2/2 with its closed-form report."""
    alpha = float(alpha)
    if not 1.0 < alpha < 4.0:
        raise DomainError("explicit family needs 1 < alpha < 4")
    prof = inverse_family(alpha)
    u0 = 1.0 - 1.0 / np.sqrt(alpha)
    chi = chi_u0_closed(u0)
    ds = 1.0 - alpha / 6.0
    a1, _ = crit1_threshold()
    rep = FamilyReport(alpha, float(u0), float(prof.H(u0)), float(chi), ds,
                       bool(chi < ds), bool(chi < 0.0), float(a1), float(CRIT2_THRESHOLD))
    return prof, rep


def chi_numeric(profile, u):
    """Crossing abscissa Re G(u) computed by the inviscid module."""
    return G_of(profile, float(u)).value.real


# --------------------------------------------------------------------------
# export


def export_profile(result, table_path, config_path=None, n=4001, dy=0.01):
    """Write the synthesised profile as a y,u,du,d2u,d3u table plus a config file.

    The table is sampled uniformly in s = -log(1-u) and in y, with extra
    nodes across every bump, so the tabulated interpolant stays consistent.
    """
    prof = result.profile
    s = np.linspace(0.0, 36.0, n)
    extra = []
    eps = result.width
    for c in result.centers:
        extra.append(np.linspace(c - eps, c + eps, 2001))
    u = np.unique(np.concatenate([-np.expm1(-s)] + extra))
    u = u[u < 1.0]
    y = prof.H(u)
    # heavy bumps stretch y, so also cap the spacing in y
    y = np.unique(np.concatenate([[0.0], y[y > 0.0], np.arange(0.0, y[-1], dy)]))
    y = y[np.concatenate([[True], np.diff(y) > 1e-9])]
    uu, u1, u2, u3 = prof.derivs(y)
    lines = [_provenance(result), "y,u,du,d2u,d3u"]
    for row in zip(y, uu, u1, u2, u3):
        lines.append(",".join(repr(float(v)) for v in row))
    with open(table_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    if config_path is not None:
        with open(config_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(_provenance(result) + "\n")
            fh.write("kind = tabulated\n")
            rel = os.path.relpath(table_path, os.path.dirname(os.path.abspath(config_path)))
            fh.write(f"table_path = {rel}\n")
    return table_path


def _provenance(result):
    mu = result.mu
    rows = ["# provenance",
            f"# mu = {mu.real!r},{mu.imag!r}",
            f"# target = {result.target}",
            f"# gamma = {result.gamma!r}",
            f"# width = {result.width!r}",
            f"# centers = {','.join(repr(float(c)) for c in result.centers)}",
            f"# weights = {','.join(repr(float(a)) for a in result.weights)}",
            f"# tail_weight = {result.tail_weight!r}",
            f"# defect = {result.defect!r}"]
    return "\n".join(rows)
