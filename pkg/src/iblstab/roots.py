"""Eigenvalue location and refinement.

Inviscid-persistent roots of Phi(mu, k) = gamma are counted by the
argument principle on a contour, seeded from a sampling grid inside it and
polished by Newton's method, first on Phi_inv and then on the viscous Phi at
the requested k. The viscosity-induced branch is followed in the variable
alpha = mu/(ik) from its closed-form seed, and Tollmien-Schlichting modes are
solved in the scaled variables k = K nu^(-3/8), mu = M nu^(1/8).
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .airy import airy
from .errors import ConvergenceError, DomainError, NoRootError
from .viscous import corrector_vc, far_field_Y, make_grid, solve_eigen_bvp
from .winding import (DistanceZeroError, check_criterion, estimate_physical_constants,
                      inviscid_evaluator, physical_contour, standard_contour, trace_curve,
                      winding_number)

S_MIN = 5.0
REGIMES = ("pdt", "ibl_inviscid", "ibl_physical", "ibl_strong", "ts", "inviscid")


@dataclass
class RootResult:
    mu: complex
    k: float
    nu: float
    residual: float
    iterations: int
    regime: str
    alpha: complex = None
    target: complex = None
    notes: dict = field(default_factory=dict)

    @property
    def lam(self):
        """Temporal exponent lambda = -ik mu."""
        if self.k is None:
            return complex("nan")
        return -1j * self.k * self.mu

    @property
    def growth_rate(self):
        return self.lam.real

    CSV_HEADER = "regime,k,nu,re_mu,im_mu,re_lambda,im_lambda,residual,iters"

    def csv_row(self):
        lam = self.lam
        vals = [self.k, self.nu, self.mu.real, self.mu.imag, lam.real, lam.imag, self.residual]
        body = ",".join(repr(float("nan") if v is None else float(v)) for v in vals)
        return f"{self.regime},{body},{self.iterations}"


# --------------------------------------------------------------------------
# generic localisation and Newton refinement


@dataclass
class Localization:
    count: int
    seeds: list


def _inside(contour, mu):
    eta = contour.eta
    centre = complex(0.5, eta)
    return mu.imag > eta and abs(mu - centre) < 0.5 + eta


def _interior_grid(contour, n_re=41, n_im=24):
    eta = contour.eta
    # roots of large gamma sit close to mu = 0, so Re mu is also graded there
    a = np.linspace(-eta, 1.0 + eta, n_re)[1:-1]
    a = np.unique(np.concatenate([a, np.geomspace(max(eta, 1e-6), a[0], n_im // 2, endpoint=False)]))
    b = eta + np.geomspace(max(eta, 1e-12), 0.5, n_im)
    A, B = np.meshgrid(a, b)
    return A + 1j * B


def localize_roots(evaluator, contour, gamma, grid=(41, 24), trace=None):
    """Root count of evaluator - gamma inside ``contour`` and seed points.

    The count is the winding number of the traced image. Seeds are the grid
    cells where both Re and Im of evaluator - gamma change sign, ordered by
    |evaluator - gamma|, followed by the remaining local minima.
    """
    curve = trace if trace is not None else trace_curve(evaluator, contour, gamma)
    count = winding_number(curve, gamma)
    mesh = _interior_grid(contour, *grid)
    vals = np.empty(mesh.shape, dtype=complex)
    for idx in np.ndindex(mesh.shape):
        mu = mesh[idx]
        vals[idx] = evaluator(mu) - gamma if _inside(contour, mu) else np.nan
    cand = []
    ni, nj = mesh.shape
    for i in range(ni - 1):
        for j in range(nj - 1):
            block = vals[i:i + 2, j:j + 2].ravel()
            if np.any(np.isnan(block)):
                continue
            if np.ptp(np.sign(block.real)) > 0 and np.ptp(np.sign(block.imag)) > 0:
                k = int(np.argmin(np.abs(block)))
                cand.append(mesh[i:i + 2, j:j + 2].ravel()[k])
    mags = np.abs(vals)
    for i in range(ni):
        for j in range(nj):
            win = mags[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2]
            if np.isfinite(mags[i, j]) and mags[i, j] == np.nanmin(win):
                cand.append(mesh[i, j])
    seen, seeds = set(), []
    for mu in sorted(cand, key=lambda m: abs(evaluator(m) - gamma)):
        key = (round(mu.real, 12), round(mu.imag, 12))
        if key not in seen:
            seen.add(key)
            seeds.append(complex(mu))
    return Localization(count, seeds)


def _fd_derivative(evaluator, mu, h):
    return (evaluator(mu + h) - evaluator(mu - h)) / (2.0 * h)


def refine_root(evaluator, mu0, gamma, tol=1e-10, max_iter=50, regime="inviscid", k=None, nu=None):
    """Newton iteration on evaluator(mu) - gamma with a centred difference derivative."""
    mu = complex(mu0)
    gamma = complex(gamma)
    r = evaluator(mu) - gamma
    trace = [(mu, abs(r))]
    for it in range(1, max_iter + 1):
        if abs(r) <= tol:
            return RootResult(mu, k, nu, float(abs(r)), it - 1, regime, target=gamma)
        h = 1e-6 * (1.0 + abs(mu))
        d = _fd_derivative(evaluator, mu, h)
        if d == 0.0 or not np.isfinite(d):
            raise ConvergenceError("vanishing derivative", trace)
        step = -r / d
        # damped step: accept the first trial that reduces the residual
        for _ in range(12):
            try:
                r_new = evaluator(mu + step) - gamma
            except DomainError:
                r_new = complex("nan")
            if np.isfinite(r_new) and abs(r_new) < abs(r):
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"no descent at iteration {it}", trace)
        mu, r = mu + step, r_new
        trace.append((mu, abs(r)))
    if abs(r) <= tol:
        return RootResult(mu, k, nu, float(abs(r)), max_iter, regime, target=gamma)
    raise ConvergenceError(f"no convergence after {max_iter} iterations", trace)


# --------------------------------------------------------------------------
# inviscid and viscous roots


def inviscid_roots(profile, gamma, contour=None, eta=1e-3, tol=1e-12):
    """All roots of Phi_inv(mu) = gamma inside the contour (upper half plane)."""
    contour = contour if contour is not None else standard_contour(eta, 100)
    ev = inviscid_evaluator(profile)
    loc = localize_roots(ev, contour, gamma)
    found = []
    for s in loc.seeds:
        if len(found) >= loc.count:
            break
        try:
            r = refine_root(ev, s, gamma, tol=tol)
        except (ConvergenceError, DomainError):
            continue
        if r.mu.imag <= 0.0 or not _inside(contour, r.mu):
            continue
        if all(abs(r.mu - f.mu) > 1e-8 * (1.0 + abs(r.mu)) for f in found):
            found.append(r)
    return loc.count, found


def _grid_for(profile, mu, k, n_per_layer, Y=None):
    return make_grid(mu, k, far_field_Y(profile) if Y is None else Y, n_per_layer)


def _same_grid(g1, g2):
    return g1.y.shape == g2.y.shape and np.array_equal(g1.y, g2.y)


def refine_viscous_root(profile, mu0, k, gamma, tol=1e-8, n_per_layer=12, regime="pdt", nu=None,
                        max_rebuilds=6):
    """Newton on Phi(mu, k) - gamma, rebuilding the grid at each converged point.

    Within one pass the grid is frozen, so the iteration sees an analytic
    function; the pass is repeated until the grid built at the converged mu
    equals the one used, which makes re-evaluation from scratch reproduce the
    residual exactly.
    """
    Y = far_field_Y(profile)
    mu = complex(mu0)
    total = 0
    for _ in range(max_rebuilds):
        grid = _grid_for(profile, mu, k, n_per_layer, Y)

        def ev(m, grid=grid):
            return solve_eigen_bvp(profile, m, k, grid=grid).Phi
        res = refine_root(ev, mu, gamma, tol=tol, regime=regime, k=k, nu=nu)
        total += res.iterations
        mu = res.mu
        if _same_grid(grid, _grid_for(profile, mu, k, n_per_layer, Y)):
            res.iterations = total
            res.notes["grid_nodes"] = grid.N
            return res
    raise ConvergenceError("grid did not settle during refinement", [])


def phi_from_scratch(profile, mu, k, n_per_layer=12):
    """Phi(mu, k) on the default grid, used to re-verify returned roots."""
    return solve_eigen_bvp(profile, mu, k, n_per_layer=n_per_layer).Phi


def find_pdt_eigenvalue(profile, k, eta_hint=None, tol=1e-8, n_per_layer=12, eta=1e-3):
    """Viscous PDT eigenvalue: Phi(mu, k) = Delta_s with Im mu > 0.

    Returns the root of largest growth rate. ``notes['growth_ok']`` records
    whether Re lambda >= eta_hint k (default eta_hint: half of Im mu of the
    inviscid root).
    """
    if k < 100:
        raise DomainError("k must be at least 100")
    gamma = profile.delta_s
    count, inv = inviscid_roots(profile, gamma, eta=eta)
    if count == 0 or not inv:
        raise NoRootError("no inviscid root of Phi_inv = Delta_s: criterion 1 fails at this resolution",
                          {"count": count, "gamma": gamma})
    results = []
    for r in inv:
        vr = refine_viscous_root(profile, r.mu, k, gamma, tol=tol, n_per_layer=n_per_layer, regime="pdt")
        vr.notes["inviscid_mu"] = r.mu
        if vr.mu.imag > 0.0:
            results.append(vr)
    if not results:
        raise NoRootError("viscous refinement left the upper half plane", {"count": count})
    best = max(results, key=lambda x: x.mu.imag)
    hint = 0.5 * best.notes["inviscid_mu"].imag if eta_hint is None else eta_hint
    best.notes["eta_hint"] = hint
    best.notes["growth_ok"] = bool(best.growth_rate >= hint * k)
    return best


def find_ibl_eigenvalue(profile, k, nu, tol=1e-8, n_per_layer=12, eta=1e-3):
    """Viscous IBL eigenvalue: Phi(mu, k) = 1/(sqrt(nu) k) with Im mu > 0.

    The inviscid root is located on the standard contour when gamma lies in a
    winding window, else on the physical contour when U''(0) > 0 and gamma is
    large; the regime tag records which one was used.
    """
    if nu <= 0.0 or k <= 0.0:
        raise DomainError("k and nu must be positive")
    gamma = 1.0 / (math.sqrt(nu) * k)
    regime, count, inv = "ibl_inviscid", 0, []
    try:
        count, inv = inviscid_roots(profile, gamma, eta=eta)
    except DistanceZeroError:
        count = 0
    if count == 0 or not inv:
        regime = "ibl_physical"
        try:
            consts = estimate_physical_constants(profile)
            contour, eta_p = physical_contour(profile, gamma, consts)
            count, inv = inviscid_roots(profile, gamma, contour=contour)
        except DomainError:
            count, inv = 0, []
    if count == 0 or not inv:
        rep = check_criterion(profile, 3)
        raise NoRootError(f"gamma = {gamma:.6g} lies outside every winding window",
                          {"gamma": gamma, "windows": rep.windows, "nearest": _nearest(gamma, rep.windows)})
    results = []
    for r in inv:
        for seed in (r.mu, _corrector_homotopy(profile, r.mu, k, gamma)):
            if seed is None:
                continue
            try:
                vr = refine_viscous_root(profile, seed, k, gamma, tol=tol, n_per_layer=n_per_layer,
                                         regime=regime, nu=nu)
            except (ConvergenceError, DomainError):
                continue
            if vr.mu.imag > 0.0:
                vr.notes["inviscid_mu"] = r.mu
                results.append(vr)
                break
    if not results:
        raise NoRootError("viscous refinement found no root with Im mu > 0", {"gamma": gamma})
    return max(results, key=lambda x: x.mu.imag)


def _corrector_homotopy(profile, mu, k, gamma, steps=10):
    """Follow the root of Phi_inv + t v_c(inf) = gamma from t = 0 to t = 1.

    Near mu = 0 the wall corrector is comparable to gamma itself, and the
    inviscid root is then a poor Newton seed for the viscous problem.
    """
    ev0 = inviscid_evaluator(profile)
    for t in np.linspace(1.0 / steps, 1.0, steps):
        def ev(m, t=t):
            return ev0(m) + t * corrector_vc(m, k, np.inf)
        try:
            mu = refine_root(ev, mu, gamma, tol=1e-10).mu
        except (ConvergenceError, DomainError):
            return None
    return mu if mu.imag > 0.0 else None


def _nearest(gamma, windows):
    if not windows:
        return None
    return min(windows, key=lambda w: 0.0 if w[0] <= gamma <= w[1] else min(abs(gamma - w[0]), abs(gamma - w[1])))


# --------------------------------------------------------------------------
# viscosity-induced branch


def _sqrt_branch(alpha):
    alpha = complex(alpha)
    if alpha.imag == 0.0 and alpha.real <= 0.0:
        raise DomainError(f"alpha = {alpha} lies on the branch cut")
    return np.sqrt(alpha)


def f_alpha(delta_s, alpha):
    """Reduced dispersion function -2i Delta_s/alpha + 1/sqrt(alpha)."""
    alpha = complex(alpha)
    return complex(-2j * delta_s / alpha + 1.0 / _sqrt_branch(alpha))


def viscosity_induced_seed(delta_s, nu):
    """Closed-form roots (alpha_+, alpha_-) of f(alpha) = 1/sqrt(nu)."""
    if delta_s == 0.0:
        raise DomainError("degenerate profile: Delta_s = 0")
    if nu <= 0.0:
        raise DomainError("nu must be positive")
    # alpha - sqrt(nu) sqrt(alpha) + 2i Delta_s sqrt(nu) = 0, quadratic in sqrt(alpha)
    q = 4j * delta_s / math.sqrt(nu)
    root = np.sqrt(1.0 - 2.0 * q)
    a_plus = complex(0.5 * nu * (1.0 + root - q))
    a_minus = complex(0.5 * nu * (1.0 - root - q))
    if not a_plus.real > 0.0:
        raise DomainError(f"nu too large: Re alpha_+ = {a_plus.real} <= 0")
    return a_plus, a_minus


def _strong_grid(profile, alpha, k, n_per_layer, Y):
    return make_grid(1j * alpha * k, k, Y, n_per_layer)


def find_strong_instability(profile, k, nu, tol=None, s_min=S_MIN, n_per_layer=12, max_rebuilds=6):
    """Root alpha of k Phi(i alpha k, k) = 1/sqrt(nu) near alpha_+ (Re alpha > 0)."""
    if k * nu ** 0.75 < s_min:
        raise DomainError(f"k nu^(3/4) = {k * nu ** 0.75:.3g} below {s_min}")
    ds = profile.delta_s
    a_plus, _ = viscosity_induced_seed(ds, nu)
    target = 1.0 / math.sqrt(nu)
    tol = 1e-6 * target if tol is None else tol
    Y = far_field_Y(profile)
    alpha, total = a_plus, 0
    for _ in range(max_rebuilds):
        grid = _strong_grid(profile, alpha, k, n_per_layer, Y)

        def ev(a, grid=grid):
            return k * solve_eigen_bvp(profile, 1j * a * k, k, grid=grid).Phi
        res = refine_root(ev, alpha, target, tol=tol, regime="ibl_strong", k=k, nu=nu)
        total += res.iterations
        alpha = res.mu
        if _same_grid(grid, _strong_grid(profile, alpha, k, n_per_layer, Y)):
            break
    else:
        raise ConvergenceError("grid did not settle during refinement", [])
    if not alpha.real > 0.0:
        raise ConvergenceError(f"strong root left Re alpha > 0: {alpha}", [])
    out = RootResult(1j * alpha * k, k, nu, res.residual, total, "ibl_strong", alpha=alpha,
                     target=target)
    out.notes["alpha_plus"] = a_plus
    out.notes["eta_fit"] = alpha.real / nu ** 0.75
    out.notes["asymptotic_re_alpha"] = 2.0 * nu ** 0.75 * math.sqrt(abs(ds))
    return out


# --------------------------------------------------------------------------
# Tollmien-Schlichting relation


def ts_eta(beta, mu, k):
    return -k ** (1.0 / 3.0) * beta ** (-2.0 / 3.0) * complex(mu) * np.exp(1j * np.pi / 6.0)


def ts_dispersion_residual(beta, mu, k, nu, pole_tol=1e-12):
    """(1 - sqrt(nu) k/(mu beta)) - Ai(eta, 2)/(eta Ai(eta, 1))."""
    mu = complex(mu)
    if mu == 0.0:
        raise DomainError("mu must be non-zero")
    if beta <= 0.0:
        raise DomainError("beta must be positive")
    eta = ts_eta(beta, mu, k)
    a1, a2 = airy(eta, 1), airy(eta, 2)
    # both antiderivatives decay together, so the pole test is relative
    if abs(eta * a1) < pole_tol * abs(a2):
        warnings.warn("Ai(eta, 1) is close to zero: residual near a pole", RuntimeWarning)
    return complex((1.0 - math.sqrt(nu) * k / (mu * beta)) - a2 / (eta * a1))


def ts_reduced_residual(beta, K, M):
    """The TS residual in the scaled variables; independent of nu."""
    eta = -K ** (1.0 / 3.0) * beta ** (-2.0 / 3.0) * complex(M) * np.exp(1j * np.pi / 6.0)
    return complex((1.0 - K / (complex(M) * beta)) - airy(eta, 2) / (eta * airy(eta, 1)))


TS_BOX = ((0.5, 4.0), (0.5, 5.0), (-1.5, 1.5))


def find_ts_mode(beta, nu, box=TS_BOX, n_K=6, n_M=(20, 20), tol=1e-10):
    """TS root in the scaled window k = K nu^(-3/8), mu = M nu^(1/8).

    For each K on a scan of the box, the minima of |residual| over a grid of
    M are polished by Newton in M; the root with the largest Im M is
    returned. The relation has one complex equation for (K, M), so K is a
    free parameter and the result depends on the scan.
    """
    if nu > 1e-4:
        raise DomainError("TS scaling needs nu <= 1e-4")
    (k_lo, k_hi), (mr_lo, mr_hi), (mi_lo, mi_hi) = box
    Ms = (np.linspace(mr_lo, mr_hi, n_M[0])[:, None] + 1j * np.linspace(mi_lo, mi_hi, n_M[1])[None, :])
    best = None
    for K in np.linspace(k_lo, k_hi, n_K):
        def ev(M, K=K):
            return ts_reduced_residual(beta, K, M)
        vals = np.full(Ms.shape, np.inf)
        for idx in np.ndindex(Ms.shape):
            try:
                vals[idx] = abs(ev(Ms[idx]))
            except DomainError:
                pass
        for i in range(1, Ms.shape[0] - 1):
            for j in range(1, Ms.shape[1] - 1):
                win = vals[i - 1:i + 2, j - 1:j + 2]
                if not (np.isfinite(vals[i, j]) and vals[i, j] == np.min(win)):
                    continue
                try:
                    r = refine_root(ev, Ms[i, j], 0.0, tol=tol, regime="ts")
                except (ConvergenceError, DomainError):
                    continue
                M = r.mu
                if not (mr_lo <= M.real <= mr_hi and mi_lo <= M.imag <= mi_hi):
                    continue
                if best is None or M.imag > best[1].imag:
                    best = (K, M, r)
    if best is None:
        raise NoRootError("no TS root in the search box", {"box": box})
    K, M, r = best
    k = K * nu ** (-3.0 / 8.0)
    mu = M * nu ** (1.0 / 8.0)
    res = abs(ts_dispersion_residual(beta, mu, k, nu))
    out = RootResult(complex(mu), float(k), nu, float(res), r.iterations, "ts", target=0.0)
    out.notes.update({"K": float(K), "M": complex(M)})
    return out
