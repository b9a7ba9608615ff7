"""Acceptance suite: each criterion at its stated tolerance and time budget.

Every test records a PASS/FAIL line through the ``report`` fixture; the lines
are printed together at the end of the pytest run. Two parts are out of reach
for the model as implemented and run as strict xfails at full tolerance:
the chi(y0) - Delta_s sign change sits near alpha = 2.133 rather than 1.45,
and the PDT growth rate Re lambda_k / k has not settled between k = 1e3 and
1e4 (Im mu_k = 0.0137 versus 0.089).
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from iblstab import constructor as cs
from iblstab import inviscid as inv
from iblstab import roots
from iblstab import shear_flow as sf
from iblstab import viscous as vs
from iblstab import winding as wd

PROFILES = Path(__file__).resolve().parent.parent / "profiles"


def _shipped():
    return {p.stem: sf.load_config(p) for p in sorted(PROFILES.glob("*.cfg"))}


def _chi_minus(alpha, shift):
    p = sf.inverse_family(alpha)
    u0 = 1 - 1 / math.sqrt(alpha)
    return inv.G_of(p, u0).value.real - (p.delta_s if shift else 0.0)


# --------------------------------------------------------------------------


def test_criterion_01_plemelj_oracle(report):
    t0 = time.perf_counter()
    p = sf.exponential()
    errs = []
    for a in (0.1, 0.25, 0.5, 0.75, 0.9):
        ref = 1 / a + math.log(a / (1 - a)) - 1j * math.pi
        errs.append(abs(inv.G_of(p, a).value - ref))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-8 and dt < 1.0
    report(1, "G_of vs closed form", ok, f"max err {max(errs):.1e}, {dt:.2f} s")
    assert ok


def test_criterion_02_plemelj_rate(report):
    t0 = time.perf_counter()
    p = sf.exponential()
    bs = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    G = inv.G_of(p, 0.5).value
    err = [abs(inv.phi_inv_value(p, 0.5 + 1j * b) - G) for b in bs]
    slope = np.polyfit(np.log(bs), np.log(err), 1)[0]
    dt = time.perf_counter() - t0
    ok = slope >= 0.45 and dt < 5.0
    report(2, "log-log slope", ok, f"slope {slope:.3f}, {dt:.2f} s")
    assert ok


def test_criterion_03_chi_closed_form_and_crit2(report):
    t0 = time.perf_counter()
    errs = []
    for alpha in (1.6, 2.0, 3.0, 3.5):
        u0 = 1 - 1 / math.sqrt(alpha)
        errs.append(abs(_chi_minus(alpha, False) - cs.chi_u0_closed(u0)))
    a2 = 64 / (1 + math.sqrt(17)) ** 2
    lo, hi = _chi_minus(a2 - 0.01, False), _chi_minus(a2 + 0.01, False)
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-6 and lo > 0.0 > hi and dt < 10.0
    report(3, "chi closed form + 2.44 bracket", ok,
           f"max err {max(errs):.1e}, chi {lo:+.4f} -> {hi:+.4f} across {a2:.4f}, {dt:.2f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="chi(y0) - Delta_s changes sign near alpha = 2.133, not 1.45")
def test_criterion_03_crit1_bracket(report):
    t0 = time.perf_counter()
    lo, hi = _chi_minus(1.45 - 0.01, True), _chi_minus(1.45 + 0.01, True)
    actual = brentq(lambda a: _chi_minus(a, True), 1.5, 3.0, xtol=1e-6)
    dt = time.perf_counter() - t0
    ok = np.sign(lo) != np.sign(hi) and dt < 10.0
    report(3, "1.45 bracket", ok,
           f"chi - Delta_s {lo:+.4f}, {hi:+.4f} at 1.44, 1.46; sign change at alpha = {actual:.4f}")
    assert ok


def test_criterion_04_winding_count(report):
    t0 = time.perf_counter()
    mismatches, checked = [], 0
    profs = _shipped()
    for name, p in profs.items():
        chis = sorted(x[2] for x in wd.crossing_data(p))
        levels = [0.0, p.delta_s] + [0.5 * (a + b) for a, b in zip(chis[:-1], chis[1:])]
        for gamma in levels:
            t = wd.crossing_table(p, gamma)
            if t.xi != 0:
                continue
            w, _ = wd.stabilized_winding(p, gamma)
            checked += 1
            if w != t.xi_minus - t.xi_plus:
                mismatches.append((name, gamma, w, t.xi_minus - t.xi_plus))
    verdicts = {name: tuple(wd.check_criterion(p, i).verdict for i in (1, 2, 3)) for name, p in profs.items()}
    exp_quiet = all(wd.inviscid_winding(profs["exponential"], g) == 0 for g in (0.0, 0.5, 1.0, 2.0, 10.0))
    facts = (verdicts["exponential"] == (False, False, False) and exp_quiet
             and verdicts["two_exponential"] == (False, False, True)
             and verdicts["inverse_alpha3p5"] == (True, True, True))
    dt = time.perf_counter() - t0
    ok = not mismatches and checked > 0 and facts and dt < 30.0
    report(4, "W = xi_minus - xi_plus + qualitative facts", ok,
           f"{checked} levels, {len(mismatches)} mismatches, facts {facts}, {dt:.1f} s")
    assert ok, mismatches


def test_criterion_05_viscous_convergence(report):
    t0 = time.perf_counter()
    p = sf.exponential()
    mu = 0.3 + 0.3j
    ks = np.array([100.0, 400.0, 1600.0, 6400.0])
    target = inv.phi_inv_value(p, mu)
    err = [abs(vs.Phi_viscous(p, mu, k).value - target) for k in ks]
    slope = np.polyfit(np.log(ks), np.log(err), 1)[0]
    dt = time.perf_counter() - t0
    ok = slope <= -0.45 and dt < 60.0
    report(5, "log-log slope", ok, f"slope {slope:.3f}, {dt:.2f} s")
    assert ok


def test_criterion_06_corrector_oracle(report):
    t0 = time.perf_counter()
    mu, k = 1j, 100.0
    closed = (1 - 1 / mu) / np.sqrt(-1j * k * mu)
    val = vs.solve_frozen(mu, k).Phi
    dt = time.perf_counter() - t0
    ok = abs(val - closed) <= 1e-6 and abs(closed - (0.1 + 0.1j)) <= 1e-15 and dt < 5.0
    report(6, "frozen problem vs v_c", ok, f"|diff| {abs(val - closed):.1e}, {dt:.2f} s")
    assert ok


@pytest.fixture(scope="module")
def pdt_pair():
    t0 = time.perf_counter()
    p = sf.inverse_family(3.0)
    res = {k: roots.find_pdt_eigenvalue(p, k, tol=1e-8) for k in (1e3, 1e4)}
    return res, time.perf_counter() - t0


def test_criterion_07_pdt_roots(report, pdt_pair):
    res, dt = pdt_pair
    ok = all(r.mu.imag > 0.0 and r.residual <= 1e-8 for r in res.values()) and dt < 60.0
    report(7, "roots at k = 1e3, 1e4", ok,
           ", ".join(f"mu = {r.mu.real:.4f}{r.mu.imag:+.4f}i res {r.residual:.1e}" for r in res.values())
           + f", {dt:.1f} s")
    assert ok


@pytest.mark.xfail(strict=True, reason="Im mu_k is 0.0137 at k = 1e3 and 0.089 at k = 1e4")
def test_criterion_07_growth_linearity(report, pdt_pair):
    res, _ = pdt_pair
    g3, g4 = (res[k].growth_rate / k for k in (1e3, 1e4))
    rel = abs(g3 - g4) / abs(g4)
    ok = rel <= 0.05
    report(7, "Re lambda / k within 5%", ok, f"{g3:.4f} vs {g4:.4f}, rel {rel:.2f}")
    assert ok


def test_criterion_08_strong_instability(report):
    t0 = time.perf_counter()
    p = sf.exponential()
    nu = 1e-4
    k = 10.0 / nu ** 0.75
    r = roots.find_strong_instability(p, k, nu)
    ratio = r.alpha.real / (2 * nu ** 0.75 * math.sqrt(p.delta_s))
    ap, _ = roots.viscosity_induced_seed(p.delta_s, nu)
    seed_err = abs(roots.f_alpha(p.delta_s, ap) * math.sqrt(nu) - 1.0)
    dt = time.perf_counter() - t0
    ok = r.alpha.real > 0.0 and 0.5 <= ratio <= 2.0 and seed_err <= 1e-12 and dt < 60.0
    report(8, "strong root", ok, f"Re alpha ratio {ratio:.3f}, seed err {seed_err:.1e}, {dt:.2f} s")
    assert ok


def test_criterion_09_construction_loop(report):
    t0 = time.perf_counter()
    mu = 0.3 + 0.2j
    c = cs.construct_flow(mu, "pdt")
    defect = abs(inv.phi_inv_value(c.profile, mu) - c.profile.delta_s)
    r = roots.find_pdt_eigenvalue(c.profile, 1e4)
    dist = abs(r.mu - mu)
    dt = time.perf_counter() - t0
    ok = defect <= 1e-6 and dist <= 0.05 and dt < 120.0
    report(9, "loop closure", ok, f"defect {defect:.1e}, |mu_k - mu| {dist:.4f}, {dt:.1f} s")
    assert ok


def _forcing(rng):
    c = rng.normal(size=3) + 1j * rng.normal(size=3)
    decay, freq = 1.0 + rng.uniform(0, 2), rng.uniform(0, 2)
    return lambda y: (c[0] + c[1] * y + c[2] * y * y) * np.exp(-decay * y) * np.cos(freq * y)


def test_criterion_10_property_suites(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20261015)
    p = sf.exponential()
    # energy envelope: weighted H1 response to random forcings, uniform in k
    forcings = [_forcing(rng) for _ in range(10)]
    env = []
    for k in (1e2, 1e3, 1e4):
        r = []
        for f in forcings:
            s = vs.solve_resolvent(p, 0.4 + 0.3j, k, f)
            r.append(vs.weighted_norm(s.grid.y, s.dphi) / vs.weighted_norm(s.grid.y, f(s.grid.y)))
        env.append(max(r))
    energy_ok = max(env) <= 1.5 * env[0]
    # holomorphy of Phi_inv and Phi(., k)
    def cr(f, mu, h):
        return abs((f(mu + h) - f(mu - h)) / (2 * h) + 1j * (f(mu + 1j * h) - f(mu - 1j * h)) / (2 * h))
    cr_inv = max(cr(lambda m: inv.phi_inv_value(p, m), mu, 1e-4) for mu in (0.3 + 0.3j, 0.7 + 0.02j, 1.4 + 0.5j))
    ev = vs.viscous_evaluator(p, 1e3, grid_mu=0.4 + 0.4j)
    cr_visc = cr(ev, 0.4 + 0.4j, 1e-4)
    holo_ok = cr_inv <= 1e-5 and cr_visc <= 1e-4
    # manufactured solution order
    mu, k = 0.3 + 0.3j, 1e3

    def f(y):
        U, U1, _, _ = p.derivs(y)
        e = np.exp(-y)
        return (mu - U) * (2 * y - y * y) * e + U1 * y * y * e - (1j / k) * (-6 + 6 * y - y * y) * e
    g = vs.make_grid(mu, k, vs.far_field_Y(p), n_per_layer=4)
    errs = []
    for _ in range(3):
        s = vs.solve_resolvent(p, mu, k, f, grid=g)
        errs.append(np.max(np.abs(s.phi - g.y ** 2 * np.exp(-g.y))))
        g = vs.bisect_grid(g)
    order = np.polyfit(np.log([1, 0.5, 0.25]), np.log(errs), 1)[0]
    order_ok = order >= 3.5
    # TS scaling
    a, b = roots.find_ts_mode(1.0, 1e-6), roots.find_ts_mode(1.0, 1e-8)
    slope = math.log(b.k / a.k) / math.log(1e-8 / 1e-6)
    ts_ok = abs(slope + 0.375) <= 0.0375
    dt = time.perf_counter() - t0
    for part, ok, detail in (("energy envelope", energy_ok, f"envelopes {np.round(env, 3).tolist()}"),
                             ("holomorphy", holo_ok, f"CR inv {cr_inv:.1e}, visc {cr_visc:.1e}"),
                             ("manufactured order", order_ok, f"order {order:.2f}"),
                             ("TS slope", ts_ok, f"slope {slope:.4f}, {dt:.1f} s total")):
        report(10, part, ok, detail)
    assert energy_ok and holo_ok and order_ok and ts_ok
