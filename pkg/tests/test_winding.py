import numpy as np
import pytest

from iblstab import shear_flow as sf
from iblstab import winding as wd
from iblstab.errors import DomainError, RefinementNeeded


def _polygon_winding(verts, z):
    d = verts - z
    return int(round(np.sum(np.angle(d[1:] / d[:-1])) / (2 * np.pi)))


def _circle(n=64):
    t = np.linspace(0.0, 2 * np.pi, n + 1)
    v = np.exp(1j * t)
    v[-1] = v[0]
    return wd.Contour(v, 1.0, "standard")


def test_standard_contour_geometry():
    c = wd.standard_contour(1e-3, 200)
    v = c.vertices
    assert v[0] == v[-1]
    assert np.all(v.imag >= 1e-3 * (1 - 1e-9))
    assert wd.shoelace_area(v) > 0.0
    # the root-carrying disc b^2 <= a(1-a), b >= eta, lies inside
    a = np.linspace(0.01, 0.99, 40)
    for ai in a:
        for frac in (0.0, 0.5, 0.99):
            b = max(1.5e-3, frac * np.sqrt(ai * (1 - ai)))
            assert _polygon_winding(v, complex(ai, b)) == 1
    assert _polygon_winding(v, 0.5 + 0.6j) == 0
    seg = np.abs(np.diff(v))
    assert np.max(seg) <= 1.0 / 200 + 1e-12


@pytest.mark.parametrize("eta", [0.0, 0.5, -1e-3])
def test_standard_contour_range(eta):
    with pytest.raises(DomainError):
        wd.standard_contour(eta)


def test_identity_on_circle():
    c = _circle()
    curve = wd.trace_curve(lambda m: m, c, 0.0)
    assert len(curve.mu) == len(c.vertices) and np.all(curve.depth == 0) and not curve.flagged
    assert wd.winding_number(curve, 0.0) == 1
    assert wd.winding_number(curve, 2.0) == 0


def test_distance_zero_and_refinement():
    c = _circle()
    curve = wd.trace_curve(lambda m: m, c, 0.0)
    with pytest.raises(wd.DistanceZeroError):
        wd.winding_number(curve, complex(curve.phi[3]))
    ph = np.exp(1j * np.array([0.0, 3.0, 0.0]))
    coarse = wd.TracedCurve(ph, ph, np.zeros(2), [])
    with pytest.raises(RefinementNeeded):
        wd.winding_number(coarse, 0.0)


def test_refinement_depth_and_step_bound(inv3):
    c = wd.standard_contour(1e-3, 20)
    curve = wd.trace_curve(wd.inviscid_evaluator(inv3), c, 0.5)
    z = curve.phi - 0.5
    assert np.max(np.abs(np.angle(z[1:] / z[:-1]))) < np.pi / 2
    assert np.max(curve.depth) > 0


def test_curve_csv(tmp_path, inv3):
    c = wd.standard_contour(1e-2, 20)
    curve = wd.trace_curve(wd.inviscid_evaluator(inv3), c, 0.0)
    curve.to_csv(tmp_path / "a.csv")
    curve.to_csv(tmp_path / "b.csv")
    data = (tmp_path / "a.csv").read_bytes()
    assert data == (tmp_path / "b.csv").read_bytes()
    lines = data.decode().split("\n")
    assert lines[0] == "re_mu,im_mu,re_phi,im_phi" and b"\r" not in data
    row = [float(x) for x in lines[1].split(",")]
    assert complex(row[0], row[1]) == curve.mu[0] and complex(row[2], row[3]) == curve.phi[0]


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 2.0, 10.0])
def test_exponential_never_winds(exp_profile, gamma):
    assert wd.inviscid_winding(exp_profile, gamma, eta=1e-3) == 0


@pytest.mark.parametrize("gamma", [0.0, 0.5])
def test_inverse_family_winds_once(inv3, gamma):
    assert wd.inviscid_winding(inv3, gamma, eta=1e-3) == 1


def test_crossing_tables(exp_profile, inv3):
    t = wd.crossing_table(exp_profile, 0.7)
    assert t.entries == [] and (t.xi, t.xi_plus, t.xi_minus) == (0, 0, 0)
    t = wd.crossing_table(inv3, 0.5)
    (e,) = t.entries
    assert e.chi == pytest.approx(-0.8660254, abs=1e-6) and e.cls == "minus"
    assert (t.xi, t.xi_plus, t.xi_minus) == (0, 0, 1)
    t = wd.crossing_table(inv3, e.chi)
    assert t.xi == 1 and t.entries[0].cls == "on_level"
    t = wd.crossing_table(inv3, -2.0)
    assert t.entries[0].cls == "above" and t.xi + t.xi_plus + t.xi_minus == 0


def test_criteria(exp_profile, two_exp, inv3):
    for i in (1, 2, 3):
        assert not wd.check_criterion(exp_profile, i).verdict
    r3 = wd.check_criterion(two_exp, 3)
    assert r3.verdict and r3.window[0] > 0.0
    assert not wd.check_criterion(two_exp, 1).verdict and not wd.check_criterion(two_exp, 2).verdict
    assert wd.check_criterion(inv3, 1).verdict and wd.check_criterion(inv3, 2).verdict
    txt = wd.check_criterion(inv3, 1).to_text()
    for key in ("criterion", "gamma", "xi", "xi_plus", "xi_minus", "verdict"):
        assert f"{key}=" in txt
    with pytest.raises(DomainError):
        wd.check_criterion(inv3, 4)


def _levels(profile):
    chis = sorted(x[2] for x in wd.crossing_data(profile))
    g = [0.0, profile.delta_s] + [0.5 * (a + b) for a, b in zip(chis[:-1], chis[1:])]
    if chis:
        g += [chis[0] - 1.0, chis[-1] + 1.0]
    return [x for x in g if wd.crossing_table(profile, x).xi == 0]


@pytest.mark.parametrize("name", ["exp_profile", "two_exp", "inv3", "inv35"])
def test_winding_equals_crossing_balance(request, name):
    prof = request.getfixturevalue(name)
    for gamma in _levels(prof):
        w, ws = wd.stabilized_winding(prof, gamma)
        t = wd.crossing_table(prof, gamma)
        assert w == t.xi_minus - t.xi_plus, (gamma, ws)
        assert ws[-1] == ws[-2]


def test_reflection_consistency(inv3):
    c = wd.standard_contour(1e-3, 100)
    curve = wd.trace_curve(wd.inviscid_evaluator(inv3), c, 0.5)
    mirrored = wd.TracedCurve(np.conj(curve.mu[::-1]), np.conj(curve.phi[::-1]), curve.depth, [])
    assert wd.winding_number(mirrored, 0.5) == wd.winding_number(curve, 0.5)


def test_physical_contour(inv3, exp_profile):
    k = wd.estimate_physical_constants(inv3)
    etas = [wd.physical_contour(inv3, g, k, 20)[1] for g in (1e3, 2e3)]
    assert etas[1] / etas[0] == pytest.approx(0.25, rel=2e-3)
    c, eta = wd.physical_contour(inv3, 50.0, k)
    assert c.eta == eta and np.all(c.vertices.imag >= eta * (1 - 1e-9)) and c.vertices[0] == c.vertices[-1]
    curve = wd.trace_curve(wd.inviscid_evaluator(inv3), c, 50.0)
    assert wd.winding_number(curve, 50.0) == 1
    with pytest.raises(DomainError):
        wd.physical_contour(exp_profile, 50.0)
