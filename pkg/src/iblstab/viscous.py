"""Viscous spectral boundary-value problem and the dispersion function Phi(mu, k).

The third-order problem

    (mu - U) phi' + U' phi - (i/k) phi''' = f,   phi(0) = 0, phi'(0) = s,

is written for the pair (phi, psi = phi'). The psi equation

    psi'' = -ik [(mu - U) psi + U' phi - f]

is discretised by a three-point compact (Numerov-type) formula that is exact
for quartics on any local spacing, and phi is linked to psi by four-point
cell integrals. The unknowns are interleaved (phi_0, psi_0, phi_1, ...) so
the system is banded and solved directly.

Since Im mu > 0 the coefficient -ik(mu - U) has positive real part, and the
scheme stays diagonally dominant even on cells much wider than the viscous
scale 1/|sigma|. Fine cells are therefore only needed in the wall layer of
width 1/Re sigma_0 and where the critical layer lives.

At the far end y = Y the decaying mode exp(-sigma_inf y) is imposed through
the Robin condition psi' + sigma_inf psi = 0, and Phi adds the analytic tail
of the particular solution beyond Y.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from ._quad import panel_rule
from .errors import DomainError, NumericError
from .inviscid import DispersionValue, SpectralPoint

N_CAP = 20000


def sqrt_decaying(z):
    """Principal square root, required to have a strictly positive real part."""
    s = np.sqrt(complex(z))
    if not s.real > 0.0:
        raise DomainError(f"branch ambiguity: Re sqrt({z}) = {s.real}")
    return s


@dataclass(frozen=True)
class SolverGrid:
    y: np.ndarray
    h0: float
    n_bl: int

    @property
    def N(self):
        return len(self.y) - 1

    @property
    def Y(self):
        return float(self.y[-1])


def far_field_Y(profile, rel=1e-12, cap=60.0):
    """Smallest y beyond which F <= rel * max F, capped."""
    y = np.linspace(0.0, min(cap, profile.y_end), 1201)
    _, u1, _, _ = profile.derivs(y)
    F = np.abs(profile.deficit(y) + y * u1)
    big = np.nonzero(F > rel * np.max(F))[0]
    if big.size == 0 or big[-1] + 1 >= len(y):
        return float(y[-1])
    return float(y[big[-1] + 1])


def make_grid(mu, k, Y, n_per_layer=12, h_inner=None):
    """Graded grid resolving the wall layer of width 1/Re sigma_0.

    Cells of size about h0/8, h0 = 1/(n Re sigma_0), cover [0, 5/Re sigma_0]; they
    then grow geometrically (ratio 1 + min(0.15, 1.8/n)) up to the interior
    spacing, which resolves the viscous critical-layer scale (k)^(-1/3).
    All sizes scale like 1/n, so doubling n refines the whole grid.
    """
    mu = SpectralPoint.of(mu).mu
    if k <= 0.0 or Y <= 0.0:
        raise DomainError("k and Y must be positive")
    sig0 = sqrt_decaying(-1j * k * mu)
    n = int(n_per_layer)
    h0 = 1.0 / (n * sig0.real)
    # the construction uses Re sigma_0 snapped down to a 2^(1/8) lattice, so
    # nearby mu share one grid and Phi is exactly analytic on each cell of it
    s_q = 2.0 ** (np.floor(8.0 * np.log2(sig0.real)) / 8.0)
    hb = 0.125 / (n * s_q)
    L = 5.0 / s_q
    growth = min(0.15, 1.8 / n)
    if h_inner is None:
        delta = float(k) ** (-1.0 / 3.0)
        h_inner = (6.0 / n) * min(0.08, 0.3 * delta)
    h_inner = max(h_inner, hb)
    while True:
        y = _build(Y, hb, L, growth, h_inner)
        if len(y) - 1 <= N_CAP:
            break
        h_inner *= 1.25
        if h_inner > Y:
            raise NumericError("grid cap exceeded")
    n_bl = int(np.searchsorted(y, L))
    return SolverGrid(y, float(h0), n_bl)


def bisect_grid(grid):
    """Grid with every cell halved (used for self-convergence and order tests)."""
    y = grid.y
    mid = 0.5 * (y[:-1] + y[1:])
    out = np.empty(2 * len(y) - 1)
    out[0::2], out[1::2] = y, mid
    return SolverGrid(out, 0.5 * grid.h0, 2 * grid.n_bl)


def _build(Y, hb, L, growth, h_inner):
    m = int(np.ceil(min(L, Y) / hb))
    pts = list(np.linspace(0.0, min(L, Y), m + 1))
    y, h = pts[-1], pts[1] - pts[0]
    while y < Y:
        h = min(h * (1.0 + growth), h_inner)
        y = y + h
        pts.append(y)
    pts = np.asarray(pts)
    if pts[-1] > Y:
        pts[-1] = Y
        if len(pts) > 2 and pts[-1] - pts[-2] < 0.5 * (pts[-2] - pts[-3]):
            # share a short last cell with its neighbour instead of merging
            pts[-2] = 0.5 * (pts[-3] + pts[-1])
    return pts


# --------------------------------------------------------------------------
# stencils


def _numerov_coeffs(y):
    """Coefficients (A, B) with sum A psi = sum B psi'' exact for quartics."""
    hm = y[1:-1] - y[:-2]
    hp = y[2:] - y[1:-1]
    hbar = 0.5 * (hm + hp)
    t = np.stack([-hm / hbar, np.zeros_like(hm), hp / hbar], axis=1)
    n = len(hm)
    M = np.zeros((n, 6, 6))
    rhs = np.zeros((n, 6))
    for d in range(5):
        M[:, d, 0:3] = t ** d
        if d >= 2:
            M[:, d, 3:6] = -d * (d - 1) * t ** (d - 2)
    M[:, 5, 3:6] = 1.0
    rhs[:, 5] = 1.0
    sol = np.linalg.solve(M, rhs[..., None])[..., 0]
    A = sol[:, 0:3] / hbar[:, None] ** 2
    B = sol[:, 3:6]
    return A, B


def _stencil_start(c, N):
    # first node of the 4-point stencil for cell [c-1, c]
    return min(max(c - 2, 0), N - 3)


def _cell_weights(y):
    """Weights of the cubic-interpolation integral over each cell."""
    N = len(y) - 1
    starts = np.array([_stencil_start(c, N) for c in range(1, N + 1)])
    idx = starts[:, None] + np.arange(4)[None, :]
    yc = y[idx]
    a, b = y[:-1], y[1:]
    h = b - a
    t = (yc - a[:, None]) / h[:, None]
    V = np.stack([t ** d for d in range(4)], axis=1)
    mom = np.array([1.0 / (d + 1) for d in range(4)])
    w = np.linalg.solve(V, np.broadcast_to(mom, (N, 4))[..., None])[..., 0]
    return idx, w * h[:, None]


def _end_derivative(y):
    """Four-point one-sided derivative weights at the last node."""
    yy = y[-4:]
    h = yy[-1] - yy[0]
    t = (yy - yy[-1]) / h
    V = np.stack([t ** d for d in range(4)])
    rhs = np.array([0.0, 1.0, 0.0, 0.0])
    return np.linalg.solve(V, rhs) / h


# --------------------------------------------------------------------------
# solver core


@dataclass
class ViscousSolution:
    grid: SolverGrid
    phi: np.ndarray
    dphi: np.ndarray
    d2phi_0: complex
    d2phi_Y: complex
    Phi: complex
    residual: float
    tail: complex
    mu: complex
    k: float

    def to_csv(self, path):
        rows = ["y,re_phi,im_phi,re_dphi,im_dphi"]
        for yv, p, d in zip(self.grid.y, self.phi, self.dphi):
            rows.append(",".join(repr(float(v)) for v in (yv, p.real, p.imag, d.real, d.imag)))
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(rows) + "\n")


def _solve_core(y, U, U1, f, mu, k, slope, u_far):
    N = len(y) - 1
    if N < 4:
        raise DomainError("grid too small")
    mu = complex(mu)
    sig_inf = sqrt_decaying(-1j * k * (mu - u_far))
    A, B = _numerov_coeffs(y)
    idx, W = _cell_weights(y)
    dY = _end_derivative(y)
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(np.atleast_1d(r))
        cols.append(np.atleast_1d(c))
        vals.append(np.atleast_1d(np.asarray(v, dtype=complex)))

    n_unk = 2 * (N + 1)
    rhs = np.zeros(n_unk, dtype=complex)
    # wall conditions
    put(0, 0, 1.0)
    put(1, 1, 1.0)
    rhs[1] = slope
    # cell integrals: phi_c - phi_{c-1} - sum W psi = 0
    c = np.arange(1, N + 1)
    put(2 * c, 2 * c, np.ones(N))
    put(2 * c, 2 * (c - 1), -np.ones(N))
    for m in range(4):
        put(2 * c, 2 * idx[:, m] + 1, -W[:, m])
    # compact rows at interior nodes
    j = np.arange(1, N)
    ik = 1j * k
    for i, off in enumerate((-1, 0, 1)):
        nb = j + off
        put(2 * j + 1, 2 * nb + 1, A[:, i] + ik * B[:, i] * (mu - U[nb]))
        put(2 * j + 1, 2 * nb, ik * B[:, i] * U1[nb])
        rhs[2 * j + 1] += ik * B[:, i] * f[nb]
    # far-field Robin condition psi' + sigma psi = 0
    last = np.arange(N - 3, N + 1)
    coef = dY.astype(complex)
    coef[-1] += sig_inf
    put(np.full(4, 2 * N + 1), 2 * last + 1, coef)

    r = np.concatenate(rows)
    cc = np.concatenate(cols)
    v = np.concatenate(vals)
    # compact rows carry 1/h^2 next to O(1) cell rows: equilibrate before pivoting
    scale = np.zeros(n_unk)
    np.maximum.at(scale, r, np.abs(v))
    v = v / scale[r]
    rhs = rhs / scale
    lower = int(np.max(r - cc))
    upper = int(np.max(cc - r))
    ab = np.zeros((lower + upper + 1, n_unk), dtype=complex)
    np.add.at(ab, (upper + r - cc, cc), v)
    with np.errstate(all="raise"):
        try:
            x = solve_banded((lower, upper), ab, rhs, check_finite=False)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
            raise NumericError(f"banded solve failed: {exc}") from exc
    Ax = np.zeros(n_unk, dtype=complex)
    np.add.at(Ax, r, v * x[cc])
    scale = max(np.max(np.abs(rhs)), 1e-300)
    res = float(np.max(np.abs(Ax - rhs)) / scale)
    if not np.all(np.isfinite(x)) or res > 1e-8:
        cond = float(np.max(np.abs(v)) * np.max(np.abs(x)) / scale)
        raise NumericError(f"discrete residual {res:.2e} (condition estimate {cond:.2e})")
    phi, psi = x[0::2], x[1::2]
    return phi, psi, sig_inf, res


def _second_derivative_ends(y, psi):
    # phi'' = psi' at both ends, from four-point one-sided formulas
    t0 = y[:4]
    V = np.stack([(t0 - t0[0]) ** d for d in range(4)])
    w0 = np.linalg.solve(V, np.array([0.0, 1.0, 0.0, 0.0]))
    return complex(np.dot(w0, psi[:4])), complex(np.dot(_end_derivative(y), psi[-4:]))


def _sample_f(f, y):
    if callable(f):
        return np.asarray(f(y), dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f.shape != y.shape:
        raise DomainError("sampled forcing must match the grid")
    return f


def _check_mu(mu, k):
    if k < 50.0:
        warnings.warn("k below 50: the viscous problem may be ill-conditioned", RuntimeWarning)
    if complex(mu).imag <= 0.0 and sqrt_decaying(-1j * k * complex(mu)).real <= 0.0:
        raise DomainError("need Im mu > 0 or a decaying wall mode")


def _default_grid(profile, mu, k, n_per_layer=12):
    return make_grid(mu, k, far_field_Y(profile), n_per_layer)


def solve_resolvent(profile, mu, k, f, grid=None, n_per_layer=12):
    """Solve with forcing f, phi(0) = phi'(0) = 0 and the far-field closure."""
    mu = SpectralPoint.of(mu).mu
    _check_mu(mu, k)
    grid = grid or _default_grid(profile, mu, k, n_per_layer)
    y = grid.y
    U, U1, _, _ = profile.derivs(y)
    fy = _sample_f(f, y)
    phi, psi, sig, res = _solve_core(y, U, U1, fy, mu, k, 0.0, float(U[-1]))
    d20, d2Y = _second_derivative_ends(y, psi)
    return ViscousSolution(grid, phi, psi, d20, d2Y, complex(phi[-1] + psi[-1] / sig), res, 0j, mu, float(k))


def solve_eigen_bvp(profile, mu, k, grid=None, n_per_layer=12):
    """Solve with the forcing F, phi(0) = 0 and phi'(0) = 1; records Phi(mu, k)."""
    mu = SpectralPoint.of(mu).mu
    _check_mu(mu, k)
    grid = grid or _default_grid(profile, mu, k, n_per_layer)
    y = grid.y
    U, U1, _, _ = profile.derivs(y)
    F = profile.deficit(y) + y * U1
    u_far = float(U[-1])
    phi, psi, sig, res = _solve_core(y, U, U1, F.astype(complex), mu, k, 1.0, u_far)
    Y = grid.Y
    tail = profile.tail_F(Y) / (mu - u_far) + (psi[-1] - F[-1] / (mu - u_far)) / sig
    d20, d2Y = _second_derivative_ends(y, psi)
    return ViscousSolution(grid, phi, psi, d20, d2Y, complex(phi[-1] + tail), res, complex(tail), mu, float(k))


def solve_frozen(mu, k, grid=None, n_per_layer=12):
    """Frozen problem U = 0, F = 0 with wall slope 1 - 1/mu.

    Its limit value is the closed-form corrector (1 - 1/mu)/sqrt(-ik mu).
    """
    mu = SpectralPoint.of(mu).mu
    sig0 = sqrt_decaying(-1j * k * mu)
    if grid is None:
        grid = make_grid(mu, k, 40.0 / sig0.real, n_per_layer, h_inner=0.1 / sig0.real)
    y = grid.y
    z = np.zeros_like(y)
    phi, psi, sig, res = _solve_core(y, z, z, z.astype(complex), mu, k, 1.0 - 1.0 / mu, 0.0)
    d20, d2Y = _second_derivative_ends(y, psi)
    return ViscousSolution(grid, phi, psi, d20, d2Y, complex(phi[-1] + psi[-1] / sig), res, 0j, mu, float(k))


def Phi_viscous(profile, mu, k, n_per_layer=12, grid=None, estimate=False):
    """Viscous dispersion function Phi(mu, k).

    With ``estimate`` the value is recomputed on a grid with half the
    resolution and the Richardson-style difference is reported.
    """
    sol = solve_eigen_bvp(profile, mu, k, grid=grid, n_per_layer=n_per_layer)
    err = 0.0
    if estimate:
        coarse = solve_eigen_bvp(profile, mu, k, n_per_layer=max(n_per_layer // 2, 2))
        err = abs(sol.Phi - coarse.Phi) / 15.0
    return DispersionValue(sol.Phi, float(err), "viscous_bvp")


def viscous_evaluator(profile, k, grid_mu=None, n_per_layer=12):
    """Callable mu -> Phi(mu, k).

    With ``grid_mu`` the grid is frozen at the one built for that point, so
    the evaluator is an analytic function of mu (used by Newton steps).
    """
    grid = None
    if grid_mu is not None:
        grid = _default_grid(profile, grid_mu, k, n_per_layer)

    def ev(mu):
        return solve_eigen_bvp(profile, mu, k, grid=grid, n_per_layer=n_per_layer).Phi
    return ev


# --------------------------------------------------------------------------
# closed-form correctors


def corrector_vc(mu, k, y):
    """Wall corrector (1 - 1/mu) int_0^y exp(-sigma_0 z) dz, sigma_0 = sqrt(-ik mu)."""
    mu = SpectralPoint.of(mu).mu
    sig = sqrt_decaying(-1j * k * mu)
    amp = 1.0 - 1.0 / mu
    y = np.asarray(y, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        val = amp * (-np.expm1(-sig * y)) / sig
    val = np.where(np.isinf(y), amp / sig, val)
    return complex(val) if val.ndim == 0 else val


def corrector_vf(profile, alpha, k, y):
    """Flat-regime particular solution -(i/(alpha k)) int_0^y F."""
    alpha = complex(alpha)
    if alpha == 0.0:
        raise DomainError("alpha must be non-zero")
    pref = -1j / (alpha * k)
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(ys.shape, dtype=complex)
    for i, yi in enumerate(ys):
        if np.isinf(yi):
            out[i] = pref * 2.0 * profile.delta_s
            continue
        if yi <= 0.0:
            out[i] = 0.0
            continue
        z, w = panel_rule(np.linspace(0.0, yi, int(np.ceil(yi / 0.5)) + 1), 16)
        # int_0^y F = 2 int_0^y (1-U) - y (1-U(y))
        out[i] = pref * (2.0 * np.sum(w * profile.deficit(z)) - yi * float(profile.deficit(yi)))
    return out if np.ndim(y) else complex(out[0])


def weighted_norm(y, v):
    """L2 norm with the standard weight 1 + y^2 (trapezoidal rule)."""
    return float(np.sqrt(np.trapezoid(np.abs(v) ** 2 * (1.0 + y ** 2), y)))
