"""
Viscosity-driven instability at large wavenumber
================================================

Once the interaction parameter is switched on, the dispersion relation
k Phi(i alpha k) = 1/sqrt(nu) has a root with Re alpha > 0 even for a flow
with no inflection point.  The seed comes from the algebraic large-k
approximation; the solver then refines it on the full viscous problem.
"""

import math

from iblstab import roots
from iblstab import shear_flow as sf

p = sf.exponential()
nu = 1e-4

a_plus, a_minus = roots.viscosity_induced_seed(p.delta_s, nu)
print(f"seed roots alpha+ = {a_plus:.6f}, alpha- = {a_minus:.6f}")

for k in (1e4, 3e4, 1e5):
    r = roots.find_strong_instability(p, k, nu)
    print(f"k = {k:7.0f}  alpha = {r.alpha:.6f}  growth {r.growth_rate:9.3f}  "
          f"residual {r.residual:.1e}")

# Re alpha against its leading-order size nu^{3/4} sqrt(delta_s)
scale = nu ** 0.75 * math.sqrt(p.delta_s)
print(f"Re alpha / (nu^3/4 sqrt(delta_s)) = {r.alpha.real / scale:.3f}")

# the unscaled relation at small beta still carries a Tollmien-Schlichting branch
ts = roots.find_ts_mode(1.0, 1e-6)
print(f"TS mode: mu = {ts.mu:.6f}, k = {ts.k:.3f}, residual {ts.residual:.1e}")
