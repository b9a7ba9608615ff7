"""Monotone shear-flow profiles: evaluation, inversion and assumption checks.

A profile is an increasing function U with U(0) = 0 and U -> 1 as y -> inf.
Two representations are supported:

* closed forms in ``y`` (``exponential``, ``two_exponential``, ``tabulated``);
* profiles defined through their inverse ``H = U^{-1}`` written as
  ``H(u) = -beta*log(1-u) + P(u)`` with ``P`` bounded (``inverse_family`` and
  the bump profiles produced by :mod:`iblstab.constructor`).

Inverse-defined profiles are evaluated by solving ``y = beta*s + P(1-e^{-s})``
for ``s = -log(1-U)``. Working in ``s`` keeps the velocity deficit ``1-U``
accurate far from the wall, where ``1-U`` underflows relative to 1.

Every profile can also produce a quadrature :class:`Sample` of the measures
``dU`` and ``F dy`` used by the inviscid integrals; y-profiles integrate in
``y`` and inverse-defined profiles in ``u``.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.optimize import brentq

from ._quad import graded_breaks, panel_rule
from .errors import ConfigError, DomainError, ValidationError

DEFICIT_TOL = 1e-12
Y_CAP = 60.0


def weight(y):
    """Standard weight 1 + y^2 of the weighted L2 norms."""
    return 1.0 + np.asarray(y, dtype=float) ** 2


@dataclass
class Sample:
    """Quadrature sample of a profile.

    ``du_w`` are weights for integrals in the velocity variable and ``f_w``
    are the weights of ``F dy``. ``tail_F`` approximates the integral of F
    beyond the last node and ``u_end`` is U there.
    """
    u: np.ndarray
    deficit: np.ndarray
    g: np.ndarray
    du_w: np.ndarray
    f_w: np.ndarray
    tail_F: float
    u_end: float


class ShearFlowProfile:
    """Base class. Subclasses set ``kind``, ``params`` and ``variable``."""

    kind = "abstract"
    variable = "y"

    def __init__(self):
        self.params = {}
        self._delta_s = None

    # evaluation -----------------------------------------------------------
    def derivs(self, y):
        raise NotImplementedError

    def deficit(self, y):
        raise NotImplementedError

    def inverse(self, u):
        raise NotImplementedError

    def inverse_deficit(self, d):
        """H(1 - d). Accurate for small deficits, where 1 - d loses digits."""
        d = np.asarray(d, dtype=float)
        if np.any(d <= 0.0) or np.any(d > 1.0):
            raise DomainError("deficit must lie in (0, 1]")
        y = np.asarray(self.inverse(1.0 - d), dtype=float)
        for _ in range(8):
            _, u1, _, _ = self.derivs(y)
            y = np.maximum(y + (self.deficit(y) - d) / u1, 0.0)
        return float(y) if y.ndim == 0 else y

    def g(self, u):
        """(1-u)^2 U''/U'^3 evaluated at y = H(u)."""
        y = self.inverse(u)
        _, u1, u2, _ = self.derivs(y)
        d = self.deficit(y)
        return d * d * u2 / u1 ** 3

    @property
    def beta(self):
        return float(self.derivs(0.0)[1])

    @property
    def delta_s(self):
        if self._delta_s is None:
            self._delta_s = displacement_thickness(self)
        return self._delta_s

    @property
    def y_end(self):
        """Largest admissible y (inf for analytic kinds)."""
        return np.inf

    def y_far(self, tol=DEFICIT_TOL, cap=Y_CAP):
        """Smallest y with 1 - U(y) < tol, capped."""
        cap = min(cap, self.y_end)
        if self.deficit(cap) >= tol:
            return cap
        y = brentq(lambda t: self.deficit(t) - tol, 0.0, cap, xtol=1e-12)
        return min(y, self.y_end)

    def tail_F(self, Y):
        """Integral of F beyond Y.

        The deficit is taken to decay like d(Y) exp(-r (y - Y)) with
        r = U'(Y)/d(Y), which is exact for exponential tails.
        """
        _, u1, _, _ = self.derivs(Y)
        d = float(self.deficit(Y))
        if u1 <= 0.0 or d <= 0.0:
            return 0.0
        return float(Y * d + 2.0 * d * d / u1)

    def inflection_scan(self, y_max, n=20001):
        ys = np.linspace(0.0, y_max, n)
        return ys, self.derivs(ys)[2]

    def sample(self, focus=None, scale=None, y_upper=None):
        raise NotImplementedError

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


# --------------------------------------------------------------------------
# profiles given in y


class _YProfile(ShearFlowProfile):
    variable = "y"

    def sample(self, focus=None, scale=None, y_upper=None, hmax=0.5, order=16):
        Y = self.y_far() if y_upper is None else min(float(y_upper), self.y_end)
        fy, hmin = None, None
        if focus is not None and scale is not None and 0.0 <= focus < 1.0:
            fy = float(self.inverse(focus))
            _, s1, _, _ = self.derivs(fy)
            hmin = max(scale / max(s1, 1e-300) / 4.0, 1e-14 * (1.0 + fy))
            if fy >= Y:
                fy = None
        if Y <= 0.0:
            z = np.zeros(0)
            return Sample(z, z, z, z, z, 0.0, 0.0)
        breaks, order = self._breaks(Y, fy, hmin, hmax, order)
        y, w = panel_rule(breaks, order)
        u, u1, u2, _ = self.derivs(y)
        d = self.deficit(y)
        F = d + y * u1
        g = d * d * u2 / u1 ** 3
        tail = self.tail_F(Y) if y_upper is None else 0.0
        u_end = float(self.derivs(Y)[0])
        return Sample(u, d, g, u1 * w, F * w, tail, u_end)

    def _breaks(self, Y, focus, hmin, hmax, order):
        return graded_breaks(0.0, Y, focus, hmin, hmax=hmax), order


class ExponentialProfile(_YProfile):
    """U = 1 - exp(-y): concave, no inflection point."""

    kind = "exponential"

    def derivs(self, y):
        y = np.asarray(y, dtype=float)
        e = np.exp(-y)
        return -np.expm1(-y), e, -e, e

    def deficit(self, y):
        return np.exp(-np.asarray(y, dtype=float))

    def inverse(self, u):
        u = _check_u(u)
        return -np.log1p(-u)

    def inverse_deficit(self, d):
        return -np.log(np.asarray(d, dtype=float))

    def g(self, u):
        u = _check_u(u)
        return -np.ones_like(np.asarray(u, dtype=float))

    @property
    def beta(self):
        return 1.0


class TwoExponentialProfile(_YProfile):
    """U = 1 + exp(-2y)/2 - 3 exp(-y)/2, one inflection point at ln(4/3)."""

    kind = "two_exponential"

    def derivs(self, y):
        y = np.asarray(y, dtype=float)
        t = np.exp(-y)
        t2 = t * t
        u = 1.0 + 0.5 * t2 - 1.5 * t
        return u, 1.5 * t - t2, 2.0 * t2 - 1.5 * t, 1.5 * t - 4.0 * t2

    def deficit(self, y):
        t = np.exp(-np.asarray(y, dtype=float))
        return 1.5 * t - 0.5 * t * t

    def inverse(self, u):
        u = _check_u(u)
        # t^2 - 3t + 2(1-u) = 0, smaller root, written without cancellation
        t = 4.0 * (1.0 - u) / (3.0 + np.sqrt(1.0 + 8.0 * u))
        return -np.log(t)

    @property
    def beta(self):
        return 0.5


class TabulatedProfile(_YProfile):
    """Profile sampled on a grid with all four derivative columns.

    Values between nodes come from cubic Hermite interpolation that uses the
    next derivative column as slope data, so no column is differentiated
    numerically. The third derivative uses shape-preserving PCHIP.
    """

    kind = "tabulated"

    def __init__(self, y, u, du, d2u, d3u, source=None, check=True):
        super().__init__()
        y, u, du, d2u, d3u = (np.asarray(c, dtype=float) for c in (y, u, du, d2u, d3u))
        if y.ndim != 1 or y.size < 4 or not (y.size == u.size == du.size == d2u.size == d3u.size):
            raise ValidationError("table columns must be 1-d with equal length >= 4")
        if y[0] != 0.0 or np.any(np.diff(y) <= 0.0):
            raise ValidationError("table y must start at 0 and increase strictly")
        self.table = np.column_stack([y, u, du, d2u, d3u])
        self.params = {"source": source, "rows": int(y.size)}
        if check:
            _check_table_consistency(y, u, du)
        self._U = CubicHermiteSpline(y, u, du)
        self._D = CubicHermiteSpline(y, 1.0 - u, -du)
        self._U1 = CubicHermiteSpline(y, du, d2u)
        self._U2 = CubicHermiteSpline(y, d2u, d3u)
        self._U3 = PchipInterpolator(y, d3u)

    @property
    def y_end(self):
        return float(self.table[-1, 0])

    def _breaks(self, Y, focus, hmin, hmax, order):
        # the interpolant is only piecewise smooth: panels end at table nodes
        nodes = self.table[:, 0]
        breaks = graded_breaks(0.0, Y, focus, hmin, hmax=hmax, extra=nodes[nodes < Y])
        return breaks, min(order, 6)

    def _check_y(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0.0) or np.any(y > self.y_end * (1.0 + 1e-12)):
            raise DomainError(f"y outside table range [0, {self.y_end}]")
        return np.minimum(y, self.y_end)

    def derivs(self, y):
        y = self._check_y(y)
        return self._U(y), self._U1(y), self._U2(y), self._U3(y)

    def deficit(self, y):
        return self._D(self._check_y(y))

    def inverse(self, u):
        u = _check_u(u)
        scalar = np.ndim(u) == 0
        uu = np.atleast_1d(np.asarray(u, dtype=float))
        ty, tu = self.table[:, 0], self.table[:, 1]
        if np.any(uu > tu[-1]):
            raise DomainError("u beyond the tabulated range")
        y = np.interp(uu, tu, ty)
        for _ in range(50):
            r = self._U(y) - uu
            y = np.clip(y - r / self._U1(y), 0.0, self.y_end)
            if np.all(np.abs(r) <= 1e-15):
                break
        return float(y[0]) if scalar else y

    @property
    def beta(self):
        return float(self.table[0, 2])


def _check_table_consistency(y, u, du, rtol=1e-4):
    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    fd = (hm ** 2 * u[2:] - hp ** 2 * u[:-2] - (hm ** 2 - hp ** 2) * u[1:-1]) / (hm * hp * (hm + hp))
    scale = max(np.max(np.abs(du)), 1e-300)
    err = np.max(np.abs(fd - du[1:-1])) / scale
    if err > rtol:
        raise ValidationError(f"table derivative column inconsistent with u (relative {err:.2e})")
    return err


# --------------------------------------------------------------------------
# profiles given through their inverse


class InverseProfile(ShearFlowProfile):
    """Profile with inverse H(u) = -beta*log(1-u) + P(u).

    ``P`` must vanish at 0, be bounded with values in ``p_range`` and have
    derivatives ``dP, d2P, d3P``. Then H' = beta/(1-u) + P' must stay
    positive on [0, 1).
    """

    variable = "u"

    def __init__(self, kind, params, tail_weight, P, dP, d2P, d3P, p_range, u_breaks=()):
        super().__init__()
        self.kind = kind
        self.params = dict(params)
        self.tail_weight = float(tail_weight)
        self._P, self._dP, self._d2P, self._d3P = P, dP, d2P, d3P
        self.p_range = (float(p_range[0]), float(p_range[1]))
        self.u_breaks = tuple(sorted(float(b) for b in u_breaks))

    def H(self, u):
        u = np.asarray(u, dtype=float)
        return -self.tail_weight * np.log1p(-u) + self._P(u)

    def h(self, u):
        """H'(u)."""
        u = np.asarray(u, dtype=float)
        return self.tail_weight / (1.0 - u) + self._dP(u)

    def dh(self, u):
        u = np.asarray(u, dtype=float)
        return self.tail_weight / (1.0 - u) ** 2 + self._d2P(u)

    def inverse(self, u):
        u = _check_u(u)
        return self.H(u)

    def inverse_deficit(self, d):
        d = np.asarray(d, dtype=float)
        return -self.tail_weight * np.log(d) + self._P(1.0 - d)

    def _solve_s(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < 0.0):
            raise DomainError("y must be non-negative")
        b = self.tail_weight
        pmin, pmax = self.p_range
        lo = np.maximum((y - pmax) / b, 0.0)
        hi = np.maximum((y - pmin) / b, lo)
        s = np.clip(y / b, lo, hi)
        for _ in range(200):
            w = np.exp(-s)
            u = -np.expm1(-s)
            r = b * s + self._P(u) - y
            lo = np.where(r < 0.0, s, lo)
            hi = np.where(r > 0.0, s, hi)
            dyds = b + w * self._dP(u)
            s_new = s - r / dyds
            bad = ~((s_new > lo) & (s_new < hi))
            s_new = np.where(bad, 0.5 * (lo + hi), s_new)
            if np.all(np.abs(r) <= 4e-16 * (1.0 + y)):
                break
            done = np.abs(s_new - s) <= 1e-16 * (1.0 + s)
            s = s_new
            if np.all(done):
                break
        return s

    def derivs(self, y):
        s = self._solve_s(y)
        w = np.exp(-s)
        u = -np.expm1(-s)
        b = self.tail_weight
        D = b + w * self._dP(u)
        A = b + w * w * self._d2P(u)
        u1 = w / D
        u2 = -w * A / D ** 3
        u3 = w * (-(2.0 * b + w ** 3 * self._d3P(u)) / D ** 4 + 3.0 * A * A / D ** 5)
        return u, u1, u2, u3

    def deficit(self, y):
        return np.exp(-self._solve_s(y))

    def g(self, u):
        u = _check_u(u)
        w = 1.0 - np.asarray(u, dtype=float)
        return -(self.tail_weight + w * w * self._d2P(u))

    @property
    def beta(self):
        return float(1.0 / self.h(0.0))

    def y_far(self, tol=DEFICIT_TOL, cap=Y_CAP):
        return float(min(self.H(1.0 - tol), cap))

    def inflection_scan(self, y_max, n=20001):
        u_max = float(self.derivs(y_max)[0])
        us = np.unique(np.concatenate([np.linspace(0.0, u_max, n), self._in_range(u_max)]))
        w = 1.0 - us
        q = self.tail_weight + w * w * self._d2P(us)
        return self.H(us), -q

    def _in_range(self, u_max):
        return np.asarray([b for b in self.u_breaks if 0.0 < b < u_max])

    def sample(self, focus=None, scale=None, y_upper=None, hmax=0.05, order=16):
        b = self.tail_weight
        if y_upper is None:
            u_hi, end = 1.0 - 1e-15, 1e-15
        else:
            u_hi, end = float(self.derivs(float(y_upper))[0]), None
        fu, hmin = None, None
        if focus is not None and scale is not None and 0.0 <= focus <= u_hi:
            fu, hmin = float(focus), max(scale / 4.0, 1e-15)
        end_grading = 1e-15 if end is not None else None
        breaks = graded_breaks(0.0, u_hi, fu, hmin, hmax=hmax, end_grading=end_grading,
                               extra=self.u_breaks)
        u, w = panel_rule(breaks, order)
        d = 1.0 - u
        g = -(b + d * d * self._d2P(u))
        fdens = b + d * self._dP(u) + self.H(u)
        tail = 0.0
        if end is not None:
            tail = end * (2.0 * b - b * np.log(end) + float(self._P(np.array(1.0 - end))))
        return Sample(u, d, g, w, fdens * w, tail, u_hi)


def inverse_family(alpha):
    """Profile with H(u) = -log(1-u) - alpha u^2/2 (requires alpha < 4)."""
    alpha = float(alpha)
    if not alpha < 4.0:
        raise DomainError("inverse_family needs alpha < 4 for H' > 0")
    return InverseProfile(
        "inverse_family", {"alpha": alpha}, 1.0,
        P=lambda u: -0.5 * alpha * np.asarray(u) ** 2,
        dP=lambda u: -alpha * np.asarray(u),
        d2P=lambda u: np.full(np.shape(u), -alpha),
        d3P=lambda u: np.zeros(np.shape(u)),
        p_range=(-0.5 * alpha, 0.0),
    )


def exponential():
    return ExponentialProfile()


def two_exponential():
    return TwoExponentialProfile()


def _check_u(u):
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0.0) or np.any(arr >= 1.0) or np.any(~np.isfinite(arr)):
        raise DomainError("u must lie in [0, 1)")
    return u if np.ndim(u) else float(arr)


# --------------------------------------------------------------------------
# public operations


def eval_profile(profile, y):
    """Return (U, U', U'', U''') at y >= 0."""
    if np.any(np.asarray(y) < 0.0):
        raise DomainError("y must be non-negative")
    return profile.derivs(y)


def invert_profile(profile, u=None, deficit=None):
    """Return H(u) = U^{-1}(u) for 0 <= u < 1.

    Far from the wall 1 - u carries few significant digits; passing the
    deficit 1 - u instead keeps the inverse accurate there.
    """
    if (u is None) == (deficit is None):
        raise DomainError("give exactly one of u and deficit")
    if deficit is not None:
        return profile.inverse_deficit(deficit)
    return profile.inverse(u)


def displacement_thickness(profile, y_cap=Y_CAP):
    """Integral of 1 - U over the half line.

    Uses a composite Gauss rule up to the truncation point and an analytic
    exponential tail beyond it.
    """
    if isinstance(profile, InverseProfile):
        # integral of (1-u) H'(u) du = beta + integral of P (P(0) = 0)
        breaks = graded_breaks(0.0, 1.0, hmax=0.05, extra=profile.u_breaks)
        u, w = panel_rule(breaks, 16)
        return float(profile.tail_weight + np.sum(w * profile._P(u)))
    Y = profile.y_far(cap=y_cap)
    breaks = graded_breaks(0.0, Y, hmax=0.5)
    y, w = panel_rule(breaks, 16)
    val = float(np.sum(w * profile.deficit(y)))
    _, u1, _, _ = profile.derivs(Y)
    d = float(profile.deficit(Y))
    if d > 0.0:
        if u1 <= 0.0:
            raise ValidationError("deficit does not decay at the truncation point")
        val += d * d / float(u1)
    if not np.isfinite(val):
        raise ValidationError("displacement thickness diverges")
    return val


@dataclass
class Inflection:
    y: float
    a: float
    sign: str  # "+-" (U'' positive then negative) or "-+"


def inflection_points(profile, y_max=None):
    """Simple zeros of U'' in (0, y_max), left to right."""
    if y_max is None:
        y_max = profile.y_far()
    ys, s2 = profile.inflection_scan(y_max)
    scale = max(np.max(np.abs(s2)), 1e-300)
    tiny = 1e-14 * scale
    out = []
    sgn = np.sign(np.where(np.abs(s2) <= tiny, 0.0, s2))
    for j in range(1, len(ys) - 1):
        if sgn[j] == 0.0 and sgn[j - 1] == sgn[j + 1] and sgn[j - 1] != 0.0:
            raise DomainError(f"tangential zero of U'' near y = {ys[j]:.6g}")
    idx = np.nonzero(sgn[:-1] * sgn[1:] < 0.0)[0]
    zeros = [j for j in range(1, len(ys) - 1) if sgn[j] == 0.0 and sgn[j - 1] * sgn[j + 1] < 0.0]

    def u2(t):
        return float(profile.derivs(t)[2])

    for j in idx:
        y0 = brentq(u2, ys[j], ys[j + 1], xtol=1e-15)
        out.append(Inflection(float(y0), float(profile.derivs(y0)[0]), "+-" if sgn[j] > 0 else "-+"))
    for j in zeros:
        out.append(Inflection(float(ys[j]), float(profile.derivs(ys[j])[0]),
                              "+-" if sgn[j - 1] > 0 else "-+"))
    out.sort(key=lambda r: r.y)
    return [r for r in out if 0.0 < r.y < y_max]


@dataclass
class ProfileValidationReport:
    flags: dict
    constants: dict = field(default_factory=dict)
    window: tuple = (0.0, 0.0)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return all(self.flags.values())


def poincare_constant(Y=Y_CAP, n=200001):
    """C_omega of the standard weight 1+y^2 evaluated on [0, Y]."""
    y = np.linspace(0.0, Y, n)
    om = weight(y)
    l1 = np.trapezoid(1.0 / om, y)
    return float(max(l1, np.max(2.0 * y / om), np.max(np.log(om) / (1.0 + y))))


def validate_assumptions(profile, kappa=0.25, window=None):
    """Numerical check of the standing assumptions on the window [0, Y]."""
    if not 0.0 < kappa < 0.5:
        raise DomainError("kappa must lie in (0, 1/2)")
    if window is None:
        # 40 decay lengths, stretched for profiles whose deficit decays late
        window = max(40.0, 1.25 * profile.y_far(tol=1e-14, cap=200.0))
    Y = float(window)
    Y = min(Y, profile.y_end)
    y = np.linspace(0.0, Y, 8001)
    u, u1, u2, u3 = profile.derivs(y)
    d = np.asarray(profile.deficit(y), dtype=float)
    flags, const, notes = {}, {}, []
    flags["monotone"] = bool(np.all(u1 > 0.0) and abs(u[0]) <= 1e-12 and np.all(d > 0.0))
    flags["wall_curvature"] = bool(abs(u2[0]) > 1e-12)
    try:
        ds = displacement_thickness(profile)
        flags["hyp_ds"] = bool(np.isfinite(ds) and ds > 0.0)
        const["delta_s"] = ds
    except ValidationError as exc:
        flags["hyp_ds"] = False
        notes.append(str(exc))
    flags["hyp_uj_infty"] = bool(all(np.all(np.isfinite(c)) for c in (u1, u2, u3)))
    om = weight(y)
    l2 = [np.trapezoid(d * d * om, y)] + [np.trapezoid(((1 + y) * c) ** 2 * om, y) for c in (u1, u2, u3)]
    const["weighted_l2"] = [float(v) for v in l2]
    tail = slice(int(0.75 * len(y)), None)
    tail_l2 = [np.trapezoid((d * d * om)[tail], y[tail])] + [
        np.trapezoid((((1 + y) * c) ** 2 * om)[tail], y[tail]) for c in (u1, u2, u3)]
    flags["hyp_uj_2"] = bool(all(np.isfinite(v) for v in l2)
                             and all(t <= 1e-6 * max(v, 1e-300) + 1e-20 for t, v in zip(tail_l2, l2)))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r1 = d * d / u1
        r2 = d * y
        r3 = d * d * u2 / u1 ** 2
    const["ratio1_max"] = float(np.max(np.abs(r1)))
    const["ratio2_max"] = float(np.max(np.abs(r2)))
    flags["hyp_us_ratio1"] = _tends_to_zero(r1)
    flags["hyp_us_ratio2"] = _tends_to_zero(r2)
    i3 = np.trapezoid(np.abs(r3), y)
    i3_tail = np.trapezoid(np.abs(r3[tail]), y[tail])
    const["ratio3_l1"] = float(i3)
    flags["hyp_us_ratio3"] = bool(np.isfinite(i3) and i3_tail <= 1e-3 * max(i3, 1e-300) + 1e-12)
    # kappa condition beyond the last sign change of U''
    neg = u2 < 0.0
    last_pos = np.nonzero(~neg)[0]
    start = 0 if last_pos.size == 0 else last_pos[-1] + 1
    if start >= len(y) - 1:
        flags["hyp_kappa"] = False
        notes.append("U'' not negative near the end of the window")
    else:
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio = -(d[start:] ** (2.0 - kappa)) * u2[start:] / u1[start:] ** 3
        ratio = ratio[np.isfinite(ratio)]
        c_k = float(np.min(ratio)) if ratio.size else 0.0
        const["y_kappa"] = float(y[start])
        const["c_kappa"] = c_k
        flags["hyp_kappa"] = bool(c_k > 0.0)
    const["C_omega"] = poincare_constant(max(Y, 1.0))
    if Y < 10.0:
        notes.append("window shorter than 10 decay lengths")
    notes.append(f"inflection search capped at y = {Y:g}")
    return ProfileValidationReport(flags, const, (0.0, Y), notes)


def _tends_to_zero(r):
    r = np.abs(np.asarray(r, dtype=float))
    if not np.all(np.isfinite(r)):
        return False
    n = len(r)
    head = np.max(r[: max(n // 4, 1)])
    end = np.max(r[-max(n // 10, 1):])
    return bool(end <= 1e-3 * max(head, 1e-300) or end <= 1e-12)


def load_table(path):
    """Read a CSV table with header y,u,du,d2u,d3u."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or [c.strip() for c in lines[0].split(",")] != ["y", "u", "du", "d2u", "d3u"]:
        raise ValidationError("table header must be y,u,du,d2u,d3u")
    data = np.array([[float(c) for c in ln.split(",")] for ln in lines[1:]])
    return TabulatedProfile(*data.T, source=str(path))


CONFIG_KEYS = ("kind", "alpha", "table_path")
KINDS = ("exponential", "two_exponential", "inverse_family", "tabulated")


def parse_config(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    cfg = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key '{key}'")
        if key in cfg:
            raise ConfigError(f"duplicate key '{key}'")
        cfg[key] = val
    return cfg


def profile_from_config(cfg, base_dir="."):
    if "kind" not in cfg:
        raise ConfigError("missing key 'kind'")
    kind = cfg["kind"]
    if kind not in KINDS:
        raise ConfigError(f"key 'kind': unknown profile kind {kind!r}")
    if kind == "inverse_family":
        if "alpha" not in cfg:
            raise ConfigError("missing key 'alpha'")
        try:
            alpha = float(cfg["alpha"])
        except ValueError:
            raise ConfigError("key 'alpha': not a number") from None
        return inverse_family(alpha)
    if kind == "tabulated":
        if "table_path" not in cfg:
            raise ConfigError("missing key 'table_path'")
        path = Path(cfg["table_path"])
        if not path.is_absolute():
            path = Path(base_dir) / path
        if not path.exists():
            raise ConfigError(f"key 'table_path': no such file {path}")
        return load_table(path)
    return exponential() if kind == "exponential" else two_exponential()


def load_config(path):
    """Profile described by a config file (relative table paths resolve next to it)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return profile_from_config(parse_config(text), path.parent)
