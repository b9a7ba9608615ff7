"""Inviscid dispersion function and its boundary values on the real segment.

For a profile U with forcing F = 1 - U + y U' the inviscid dispersion function

    Phi_inv(mu) = (mu - 1) * int_0^inf F / (mu - U)^2 dy

is holomorphic off the segment [0, 1]. Integrating by parts twice gives the
Cauchy-type form

    Phi_inv(mu) = 1/(mu U'(0)) + int_0^1 g(u) / (u - mu) du,
    g(u) = (1-u)^2 U''/U'^3 at y = H(u),

whose boundary values from above are

    G(a) = 1/(a U'(0)) + PV int_0^1 g(u)/(u - a) du + i pi g(a).

Far from the segment the first form is integrated directly. Close to it the
second form is used after subtracting g at the critical point, which leaves
a bounded integrand plus an explicit logarithm.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

SWITCH = 0.05
ENDPOINT_GUARD = 1e-4


@dataclass(frozen=True)
class SpectralPoint:
    """mu = a + ib together with the derived quantities lambda and alpha."""
    a: float
    b: float

    @classmethod
    def of(cls, mu):
        if isinstance(mu, SpectralPoint):
            return mu
        mu = complex(mu)
        return cls(mu.real, mu.imag)

    @property
    def mu(self):
        return complex(self.a, self.b)

    def lam(self, k):
        """Growth exponent lambda = -i k mu."""
        return -1j * k * self.mu

    def alpha(self, k):
        """alpha with mu = i alpha k."""
        return self.mu / (1j * k)


@dataclass
class DispersionValue:
    value: complex
    est_error: float
    representation: str
    warnings: list = field(default_factory=list)

    def __complex__(self):
        return complex(self.value)


def _mu(mu):
    return SpectralPoint.of(mu).mu


def forcing_F(profile, y):
    """F(y) = 1 - U(y) + y U'(y)."""
    y = np.asarray(y, dtype=float)
    if np.any(y < 0.0):
        raise DomainError("y must be non-negative")
    _, u1, _, _ = profile.derivs(y)
    return profile.deficit(y) + y * u1


def _on_segment(mu):
    return mu.imag == 0.0 and 0.0 <= mu.real <= 1.0


def _direct(profile, mu, order=16):
    s = profile.sample(focus=min(max(mu.real, 0.0), 1.0 - 1e-12), scale=abs(mu.imag), order=order)
    inner = np.sum(s.f_w / (mu - s.u) ** 2) + s.tail_F / (mu - s.u_end) ** 2
    return (mu - 1.0) * inner


def _log_term(mu, limit=False):
    # int_0^1 du/(u - mu); `limit` takes the boundary value from above
    if limit:
        a = mu.real
        return np.log((1.0 - a) / a) + 1j * np.pi
    return np.log((mu - 1.0) / mu)


def _singular(profile, mu, limit=False, order=16):
    a_c = min(max(mu.real, 0.0), 1.0 - 1e-12)
    g_c = float(profile.g(a_c))
    # on the segment the subtracted integrand is smooth: mild grading suffices
    scale = 1e-2 if limit else max(abs(mu.imag), 1e-15)
    s = profile.sample(focus=a_c, scale=scale, order=order)
    den = s.u - mu
    safe = den != 0.0
    body = np.sum(np.where(safe, (s.g - g_c) * s.du_w / np.where(safe, den, 1.0), 0.0))
    if s.u.size:
        body += (s.g[-1] - g_c) * (1.0 - s.u_end) / (1.0 - mu)
    return 1.0 / (mu * profile.beta) + body + g_c * _log_term(mu, limit)


def Phi_inv(profile, mu, estimate=True):
    """Inviscid dispersion function at mu off the real segment [0, 1].

    Returns a :class:`DispersionValue`; ``est_error`` compares two Gauss
    orders on the same panels.
    """
    mu = _mu(mu)
    if _on_segment(mu):
        raise DomainError(f"mu = {mu} lies on the singular segment [0, 1]; use G_of")
    if abs(mu.imag) >= SWITCH or not (-SWITCH < mu.real < 1.0 + SWITCH):
        rep, fn = "rational_integral", _direct
    else:
        rep, fn = "singular_integral", _singular
    val = fn(profile, mu)
    err = abs(val - fn(profile, mu, order=10)) if estimate else 0.0
    return DispersionValue(complex(val), float(err), rep)


def phi_inv_value(profile, mu):
    """Phi_inv(mu) as a plain complex number, without the error estimate."""
    return Phi_inv(profile, mu, estimate=False).value


def phi_inv_pointwise(profile, mu, y):
    """Inviscid solution (mu - U(y)) int_0^y F/(mu - U)^2 at one or more y."""
    mu = _mu(mu)
    if _on_segment(mu):
        raise DomainError(f"mu = {mu} lies on the singular segment [0, 1]")
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(ys.shape, dtype=complex)
    focus = min(max(mu.real, 0.0), 1.0 - 1e-12)
    for i, yi in enumerate(ys):
        if yi < 0.0:
            raise DomainError("y must be non-negative")
        if yi == 0.0:
            out[i] = 0.0
            continue
        s = profile.sample(focus=focus, scale=abs(mu.imag), y_upper=yi)
        uy = profile.derivs(yi)[0]
        out[i] = (mu - uy) * np.sum(s.f_w / (mu - s.u) ** 2)
    return out if np.ndim(y) else complex(out[0])


def g_of(profile, a):
    """g(a) = (1-a)^2 U''(H(a)) / U'(H(a))^3 for 0 < a < 1."""
    if not np.all((np.asarray(a) > 0.0) & (np.asarray(a) < 1.0)):
        raise DomainError("g_of needs 0 < a < 1")
    return profile.g(a)


def G_of(profile, a):
    """Boundary value of Phi_inv from the upper half plane at 0 < a < 1."""
    a = float(a)
    if not 0.0 < a < 1.0:
        raise DomainError("G_of needs 0 < a < 1")
    warnings = []
    if a < ENDPOINT_GUARD or a > 1.0 - ENDPOINT_GUARD:
        warnings.append("endpoint proximity: accuracy not guaranteed")
    mu = complex(a, 0.0)
    val = _singular(profile, mu, limit=True)
    err = abs(val - _singular(profile, mu, limit=True, order=10))
    return DispersionValue(complex(val), float(err), "plemelj_limit", warnings)


def chi(profile, y):
    """Crossing abscissa Re G(U(y))."""
    if y <= 0.0:
        raise DomainError("chi needs y > 0")
    return G_of(profile, float(profile.derivs(float(y))[0])).value.real
