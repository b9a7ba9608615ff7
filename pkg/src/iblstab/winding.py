"""Trapping contours, adaptive curve tracing, winding numbers and criteria.

Roots of Phi_inv(mu) = gamma with Im mu > 0 can only lie in the disc
|mu - 1/2| < 1/2. The standard contour closes the segment i*eta + [-eta, 1+eta]
with the upper half circle of radius 1/2 + eta centred at 1/2 + i*eta, so it
encloses that disc above height eta. The winding number of the image curve
around gamma counts the enclosed roots.

The winding number is compared with the crossing count xi_-(gamma) -
xi_+(gamma), built from the zeros of U'' and the real parts chi of the
boundary values there.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, RefinementNeeded
from .inviscid import G_of, phi_inv_value
from .shear_flow import inflection_points


class DistanceZeroError(NumericError):
    """A traced sample coincides with the winding centre."""


@dataclass(frozen=True)
class Contour:
    vertices: np.ndarray
    eta: float
    kind: str = "standard"


@dataclass
class TracedCurve:
    mu: np.ndarray
    phi: np.ndarray
    depth: np.ndarray          # refinement depth used on each original edge
    flagged: list              # original edges that hit max_depth
    tag: str = "inviscid"

    def to_csv(self, path):
        rows = ["re_mu,im_mu,re_phi,im_phi"]
        for m, p in zip(self.mu, self.phi):
            rows.append(",".join(repr(float(v)) for v in (m.real, m.imag, p.real, p.imag)))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(rows) + "\n")


def standard_contour(eta=1e-3, samples_per_unit=200):
    """Segment i*eta + [-eta, 1+eta] followed by the upper half circle."""
    if not 0.0 < eta < 0.5:
        raise DomainError("eta must lie in (0, 0.5)")
    r = 0.5 + eta
    n_seg = max(int(np.ceil(2.0 * r * samples_per_unit)), 2)
    n_arc = max(int(np.ceil(np.pi * r * samples_per_unit)), 4)
    seg = np.linspace(-eta, 1.0 + eta, n_seg + 1) + 1j * eta
    theta = np.linspace(0.0, np.pi, n_arc + 1)[1:]
    arc = 0.5 + 1j * eta + r * np.exp(1j * theta)
    arc = arc.real + 1j * np.maximum(arc.imag, eta)
    verts = np.concatenate([seg, arc])
    verts[-1] = verts[0]
    return Contour(verts, float(eta), "standard")


def shoelace_area(vertices):
    x, y = vertices.real, vertices.imag
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))


def trace_curve(evaluator, contour, gamma_ref=0.0, max_depth=26, max_step=np.pi / 4, tag="inviscid"):
    """Evaluate along the contour, bisecting edges until argument steps are small.

    ``gamma_ref`` may be a number or a sequence; the step bound is enforced
    relative to each value.
    """
    refs = np.atleast_1d(np.asarray(gamma_ref, dtype=complex))
    verts = np.asarray(contour.vertices, dtype=complex)
    vals = [_eval(evaluator, m) for m in verts]
    mus, phis, depth, flagged = [verts[0]], [vals[0]], [], []
    for j in range(len(verts) - 1):
        seg_mu, seg_phi, dmax, hit = _refine_edge(evaluator, verts[j], verts[j + 1],
                                                  vals[j], vals[j + 1], refs, max_depth, max_step)
        mus.extend(seg_mu)
        phis.extend(seg_phi)
        depth.append(dmax)
        if hit:
            flagged.append(j)
    return TracedCurve(np.asarray(mus), np.asarray(phis), np.asarray(depth), flagged, tag)


def _eval(evaluator, mu):
    try:
        val = complex(evaluator(mu))
    except (ZeroDivisionError, FloatingPointError, DomainError) as exc:
        raise NumericError(f"evaluator failed at mu = {mu}: {exc}") from exc
    if not np.isfinite(val):
        raise NumericError(f"evaluator singular at mu = {mu}")
    return val


def _step(p, q, refs):
    if np.any(p == refs) or np.any(q == refs):
        raise DistanceZeroError(f"a contour sample maps exactly onto {refs[(p == refs) | (q == refs)][0]}")
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(np.max(np.abs(np.angle((q - refs) / (p - refs)))))


def _refine_edge(evaluator, m0, m1, p0, p1, refs, max_depth, max_step):
    # depth-first bisection; returns the samples after m0 up to and including m1
    out_mu, out_phi = [], []
    stack = [(m1, p1, 0)]
    cur_m, cur_p = m0, p0
    dmax, hit = 0, False
    while stack:
        m, p, d = stack[-1]
        if _step(cur_p, p, refs) >= max_step and d < max_depth:
            mm = 0.5 * (cur_m + m)
            stack.append((mm, _eval(evaluator, mm), d + 1))
            continue
        if d >= max_depth and _step(cur_p, p, refs) >= max_step:
            hit = True
        stack.pop()
        dmax = max(dmax, d)
        out_mu.append(m)
        out_phi.append(p)
        cur_m, cur_p = m, p
    return out_mu, out_phi, dmax, hit


def winding_number(curve, gamma=0.0):
    """Integer winding number of the traced image around gamma."""
    z = np.asarray(curve.phi, dtype=complex) - complex(gamma)
    if np.min(np.abs(z)) == 0.0:
        raise DistanceZeroError(f"curve passes through gamma = {gamma}")
    if abs(z[0] - z[-1]) > 1e-9 * max(1.0, abs(z[0])):
        raise DomainError("curve is not closed")
    inc = np.angle(z[1:] / z[:-1])
    total = float(np.sum(inc)) / (2.0 * np.pi)
    w = int(round(total))
    if abs(total - w) > 0.05 or np.max(np.abs(inc)) > 0.9 * np.pi:
        raise RefinementNeeded(f"winding residue {abs(total - w):.3g}, max step {np.max(np.abs(inc)):.3g}")
    return w


def inviscid_evaluator(profile):
    def ev(mu):
        return phi_inv_value(profile, mu)
    return ev


def inviscid_winding(profile, gamma, eta=1e-3, samples_per_unit=100, contour=None):
    """Winding of Phi_inv(C_eta) around gamma."""
    c = contour if contour is not None else standard_contour(eta, samples_per_unit)
    curve = trace_curve(inviscid_evaluator(profile), c, gamma)
    return winding_number(curve, gamma)


def stabilized_winding(profile, gamma, etas=(1e-2, 5e-3, 2.5e-3, 1e-3), samples_per_unit=100):
    """Winding numbers over a decreasing eta sequence; returns (value, list)."""
    ws = [inviscid_winding(profile, gamma, eta, samples_per_unit) for eta in etas]
    tail = ws[-2:]
    if len(set(tail)) != 1:
        raise RefinementNeeded(f"winding not stabilized over eta: {ws}")
    return tail[-1], ws


# --------------------------------------------------------------------------
# crossing table and criteria


@dataclass
class Crossing:
    y: float
    a: float
    chi: float
    sign: str
    cls: str     # minus | plus | on_level | above


@dataclass
class CrossingTable:
    gamma: float
    entries: list
    xi: int
    xi_plus: int
    xi_minus: int


def crossing_data(profile):
    """Inflection points with their crossing abscissae chi = Re G(U(y_i))."""
    out = []
    for r in inflection_points(profile):
        out.append((r.y, r.a, G_of(profile, r.a).value.real, r.sign))
    return out


def crossing_table(profile, gamma, tol_level=None, data=None):
    """Classify the crossings relative to the level gamma.

    Crossings with chi > gamma belong to none of the counted classes and are
    tagged ``above``.
    """
    gamma = float(gamma)
    tol = 1e-6 * (1.0 + abs(gamma)) if tol_level is None else float(tol_level)
    entries = []
    for y, a, c, sign in (crossing_data(profile) if data is None else data):
        if abs(c - gamma) <= tol:
            cls = "on_level"
        elif c < gamma:
            cls = "minus" if sign == "+-" else "plus"
        else:
            cls = "above"
        entries.append(Crossing(y, a, c, sign, cls))
    count = {k: sum(e.cls == k for e in entries) for k in ("on_level", "plus", "minus")}
    return CrossingTable(gamma, entries, count["on_level"], count["plus"], count["minus"])


@dataclass
class CriterionReport:
    criterion: int
    gamma: float
    xi: int
    xi_plus: int
    xi_minus: int
    verdict: bool
    window: tuple = None
    windows: list = field(default_factory=list)

    def to_text(self):
        lines = [f"criterion={self.criterion}", f"gamma={self.gamma!r}", f"xi={self.xi}",
                 f"xi_plus={self.xi_plus}", f"xi_minus={self.xi_minus}",
                 f"verdict={'true' if self.verdict else 'false'}"]
        if self.window is not None:
            lines.append(f"window={self.window[0]!r},{self.window[1]!r}")
        return "\n".join(lines) + "\n"


def _holds(t):
    return t.xi == 0 and t.xi_minus > t.xi_plus


def check_criterion(profile, which, gamma=None, scan=(1e-3, 1e3, 200), data=None):
    """Verdict of criterion 1 (gamma = Delta_s), 2 (gamma = 0) or 3 (gamma > 0)."""
    if data is None:
        data = crossing_data(profile)
    if which == 1:
        t = crossing_table(profile, profile.delta_s, data=data)
    elif which == 2:
        t = crossing_table(profile, 0.0, data=data)
    elif which == 3:
        if gamma is not None:
            if gamma <= 0.0:
                raise DomainError("criterion 3 needs gamma > 0")
            t = crossing_table(profile, gamma, data=data)
        else:
            grid = np.geomspace(scan[0], scan[1], int(scan[2]))
            tabs = [crossing_table(profile, gm, data=data) for gm in grid]
            ok = np.array([_holds(tb) for tb in tabs])
            windows = _runs(grid, ok)
            if windows:
                lo, hi = windows[0]
                t = crossing_table(profile, lo, data=data)
                return CriterionReport(3, float(lo), t.xi, t.xi_plus, t.xi_minus, True,
                                       windows[0], windows)
            t = tabs[0]
            return CriterionReport(3, float(grid[0]), t.xi, t.xi_plus, t.xi_minus, False, None, [])
    else:
        raise DomainError("criterion id must be 1, 2 or 3")
    return CriterionReport(which, t.gamma, t.xi, t.xi_plus, t.xi_minus, _holds(t))


def _runs(grid, ok):
    out, start = [], None
    for i, flag in enumerate(ok):
        if flag and start is None:
            start = i
        if start is not None and (not flag or i == len(ok) - 1):
            end = i if flag else i - 1
            out.append((float(grid[start]), float(grid[end])))
            start = None
    return out


# --------------------------------------------------------------------------
# physical regime


@dataclass
class PhysicalConstants:
    c: float
    c_G: float
    d0: float
    C: float
    gamma_min: float

    @property
    def scale(self):
        return min(self.c ** 2, self.c_G ** 2, (self.d0 * self.c_G / (4.0 * self.C)) ** 2)


def estimate_physical_constants(profile, kappa=0.25, rho=0.05, margin=4.0):
    """Sampled surrogates for the constants of the large-gamma contour height.

    Each constant is measured on a small sample and then weakened by
    ``margin`` (divided, or multiplied for the Plemelj constant).
    """
    a = np.geomspace(1e-3, rho, 12)
    G = np.array([G_of(profile, ai).value for ai in a])
    c_G = float(min(np.min(G.imag), np.min(a * G.real)))
    if c_G <= 0.0:
        raise DomainError("boundary values near 0 do not dominate; U''(0) > 0 required")
    lows = []
    for ai in (0.95, 0.975, 0.99):
        for b in (1e-3, 1e-2, 0.05):
            lows.append(-phi_inv_value(profile, complex(ai, b)).imag / b ** kappa)
    c = float(min(lows))
    C = 0.0
    for ai in (0.02, 0.05, 0.1, 0.3):
        g = G_of(profile, ai).value
        for b in (1e-4, 1e-3):
            C = max(C, abs(phi_inv_value(profile, complex(ai, b)) - g) * ai / np.sqrt(b))
    chis = [x[2] for x in crossing_data(profile)]
    gamma_min = max([0.0] + chis) + 1.0
    return PhysicalConstants(c / margin, c_G / margin, 1.0 / margin, C * margin, gamma_min)


def physical_contour(profile, gamma, constants=None, samples_per_unit=100):
    """Standard contour at height scale*(gamma+1)^-2 for large gamma."""
    _, _, u2, _ = profile.derivs(0.0)
    if not u2 > 0.0:
        raise DomainError("physical contour needs U''(0) > 0")
    k = constants if constants is not None else estimate_physical_constants(profile)
    if gamma < k.gamma_min:
        raise DomainError(f"gamma below the physical-regime threshold {k.gamma_min:.4g}")
    eta = min(k.scale, 0.25) / (gamma + 1.0) ** 2
    return standard_contour(eta, samples_per_unit), eta
