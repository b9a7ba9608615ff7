import numpy as np
import pytest
import sympy as sp

from iblstab import shear_flow as sf
from iblstab.errors import ConfigError, DomainError, ValidationError


def _symbolic_derivs(expr, y0):
    y = sp.Symbol("y")
    f = expr(y)
    return [float(sp.diff(f, y, n).subs(y, y0)) for n in range(4)]


def test_exponential_at_wall(exp_profile):
    np.testing.assert_allclose(sf.eval_profile(exp_profile, 0.0), (0.0, 1.0, -1.0, 1.0), atol=1e-15)


@pytest.mark.parametrize("y0", [0.0, 0.3, 2.0, 11.0])
def test_two_exponential_matches_symbolic(two_exp, y0):
    ref = _symbolic_derivs(lambda y: 1 + sp.exp(-2 * y) / 2 - sp.Rational(3, 2) * sp.exp(-y), y0)
    np.testing.assert_allclose(sf.eval_profile(two_exp, y0), ref, rtol=1e-13, atol=1e-15)


def test_two_exponential_wall_values(two_exp):
    u, u1, u2, u3 = sf.eval_profile(two_exp, 0.0)
    assert u == 0.0 and u1 == pytest.approx(0.5) and u2 == pytest.approx(0.5)
    assert u3 == pytest.approx(-2.5)


def test_inverse_family_wall_slope(inv3):
    u, u1, _, _ = sf.eval_profile(inv3, 0.0)
    assert abs(u) <= 1e-15 and u1 == pytest.approx(1.0, abs=1e-13)


def test_inverse_family_derivatives_against_symbolic_inverse(inv3):
    # U' = 1/H', U'' = -H''/H'^3, U''' = (3H''^2 - H' H''')/H'^5 at u = 0.3
    u = sp.Symbol("u")
    H = -sp.log(1 - u) - sp.Rational(3, 2) * u ** 2
    d = [float(sp.diff(H, u, n).subs(u, sp.Rational(3, 10))) for n in range(4)]
    ref = (0.3, 1 / d[1], -d[2] / d[1] ** 3, (3 * d[2] ** 2 - d[1] * d[3]) / d[1] ** 5)
    np.testing.assert_allclose(sf.eval_profile(inv3, d[0]), ref, rtol=1e-11)


@pytest.mark.parametrize("name,expected", [("exp_profile", 1.0), ("two_exp", 1.25), ("inv3", 0.5)])
def test_displacement_thickness(request, name, expected):
    prof = request.getfixturevalue(name)
    assert sf.displacement_thickness(prof) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("alpha", [1.5, 2.0, 3.5])
def test_displacement_thickness_inverse_family(alpha):
    assert sf.displacement_thickness(sf.inverse_family(alpha)) == pytest.approx(1 - alpha / 6, rel=1e-10)


@pytest.mark.parametrize("cap", [30.0, 45.0, 60.0])
def test_displacement_thickness_truncation_invariance(two_exp, cap):
    assert sf.displacement_thickness(two_exp, y_cap=cap) == pytest.approx(1.25, rel=1e-9)


def test_invert_profile_examples(exp_profile, inv3):
    assert sf.invert_profile(exp_profile, 1 - np.exp(-1)) == pytest.approx(1.0, abs=1e-12)
    assert sf.invert_profile(inv3, 0.5) == pytest.approx(np.log(2) - 0.375, abs=1e-14)
    for p in (exp_profile, inv3):
        assert sf.invert_profile(p, 0.0) == 0.0
    with pytest.raises(DomainError):
        sf.invert_profile(exp_profile, 1.0)


@pytest.mark.parametrize("name", ["exp_profile", "two_exp", "inv3", "inv35"])
def test_round_trip_and_monotone(request, name):
    prof = request.getfixturevalue(name)
    y = np.linspace(0.0, 20.0, 401)
    u, u1, _, _ = sf.eval_profile(prof, y)
    d = prof.deficit(y[1:])
    assert np.max(np.abs(sf.invert_profile(prof, deficit=d) - y[1:])) <= 1e-10
    # through u itself the round trip is limited by the rounding of 1 - u
    err = np.abs(sf.invert_profile(prof, u) - y)
    assert np.all(err <= 1e-10 + 4 * np.finfo(float).eps / u1)
    y40 = np.linspace(0.0, 40.0, 801)
    u, u1, _, _ = sf.eval_profile(prof, y40)
    # U < 1 is checked on the deficit: U itself rounds to 1 beyond y ~ 37
    assert np.all(u >= 0.0) and np.all(prof.deficit(y40) > 0.0) and np.all(u1 > 0.0)
    uu = np.linspace(0.0, 0.999, 50)
    assert np.max(np.abs(sf.eval_profile(prof, sf.invert_profile(prof, uu))[0] - uu)) <= 1e-12


def test_inflection_points(exp_profile, two_exp, inv3):
    assert sf.inflection_points(exp_profile) == []
    (r,) = sf.inflection_points(two_exp)
    assert r.y == pytest.approx(np.log(4 / 3), abs=1e-10) and r.sign == "+-"
    (r,) = sf.inflection_points(inv3)
    assert r.a == pytest.approx(1 - 1 / np.sqrt(3), abs=1e-10) and r.sign == "+-"
    assert r.y == pytest.approx(sf.invert_profile(inv3, 1 - 1 / np.sqrt(3)), abs=1e-10)


@pytest.mark.parametrize("name", ["exp_profile", "two_exp", "inv3"])
def test_validation_passes(request, name):
    rep = sf.validate_assumptions(request.getfixturevalue(name), kappa=0.25, window=40.0)
    assert rep.ok, rep.flags


def test_kappa_constant_exponential(exp_profile):
    rep = sf.validate_assumptions(exp_profile, kappa=0.25, window=40.0)
    assert rep.constants["c_kappa"] >= 1.0 - 1e-12


def test_validation_flags_non_monotone_table():
    y = np.linspace(0.0, 30.0, 3001)
    u = 1 - np.exp(-y) + 0.3 * np.exp(-(y - 2.0) ** 2 * 20) * (y - 2.0)
    du = np.gradient(u, y, edge_order=2)
    d2u = np.gradient(du, y, edge_order=2)
    d3u = np.gradient(d2u, y, edge_order=2)
    prof = sf.TabulatedProfile(y, u, du, d2u, d3u, check=False)
    assert np.min(du) < 0.0
    assert not sf.validate_assumptions(prof, window=30.0).flags["monotone"]


def _table(y, n_cols=None):
    return [1 - np.exp(-y), np.exp(-y), -np.exp(-y), np.exp(-y)]


def test_tabulated_profile_accuracy_and_range(tmp_path):
    y = np.linspace(0.0, 30.0, 3001)
    prof = sf.TabulatedProfile(y, *_table(y))
    yy = np.linspace(0.0, 29.9, 997)
    ref = np.array(_table(yy))
    np.testing.assert_allclose(np.array(prof.derivs(yy)), ref, atol=1e-8)
    with pytest.raises(DomainError):
        prof.derivs(31.0)
    assert sf.displacement_thickness(prof) == pytest.approx(1.0, rel=1e-8)


def test_tabulated_consistency_check():
    y = np.linspace(0.0, 30.0, 301)
    u, du, d2u, d3u = _table(y)
    with pytest.raises(ValidationError):
        sf.TabulatedProfile(y, u, 1.1 * du, d2u, d3u)


def test_table_and_config_loading(tmp_path):
    y = np.linspace(0.0, 30.0, 1501)
    rows = ["y,u,du,d2u,d3u"] + [",".join(repr(float(v)) for v in r) for r in zip(y, *_table(y))]
    (tmp_path / "t.csv").write_text("\n".join(rows) + "\n")
    (tmp_path / "p.cfg").write_text("# tabulated exponential\nkind = tabulated\ntable_path = t.csv\n")
    prof = sf.load_config(tmp_path / "p.cfg")
    assert prof.kind == "tabulated" and prof.y_end == 30.0
    (tmp_path / "q.cfg").write_text("kind = inverse_family\nalpha = 3\n")
    assert sf.load_config(tmp_path / "q.cfg").delta_s == pytest.approx(0.5)


@pytest.mark.parametrize("text,key", [("alpha = 3\n", "kind"), ("kind = inverse_family\n", "alpha"),
                                      ("kind = tabulated\n", "table_path"), ("kind = blob\n", "kind"),
                                      ("kind = exponential\ncolour = red\n", "colour")])
def test_config_errors_name_the_key(tmp_path, text, key):
    (tmp_path / "c.cfg").write_text(text)
    with pytest.raises(ConfigError, match=key):
        sf.load_config(tmp_path / "c.cfg")


def test_poincare_inequality(rng):
    Y = 40.0
    C = sf.poincare_constant(Y)
    y = np.linspace(0.0, Y, 20001)
    w = sf.weight(y)
    for _ in range(20):
        c = rng.normal(size=4)
        psi = np.tanh(c[0] * y) * np.exp(-abs(c[1]) * y) + c[2] * y * np.exp(-(1 + abs(c[3])) * y)
        dpsi = np.gradient(psi, y, edge_order=2)
        rhs = np.sqrt(np.trapezoid(dpsi ** 2 * w, y))
        assert np.max(np.abs(psi)) <= C * rhs
