"""
Tracking an unstable eigenvalue with the wavenumber
===================================================

For a profile that passes the inflection test, the viscous dispersion
function has a root mu_k near an inviscid root.  This demo follows it over
a few wavenumbers: the root climbs towards the inviscid one as k grows.
"""

import numpy as np

from iblstab import roots
from iblstab import shear_flow as sf

p = sf.inverse_family(3.0)

count, inv = roots.inviscid_roots(p, p.delta_s)
print("roots inside the contour:", count)
print("inviscid roots:", [f"{r.mu:.6f}" for r in inv])
mu_inf = inv[0].mu

ks = np.array([1e3, 4e3, 1.6e4])
dist = []
for k in ks:
    r = roots.find_pdt_eigenvalue(p, k)
    dist.append(abs(r.mu - mu_inf))
    print(f"k = {k:8.0f}  mu = {r.mu:.6f}  growth rate {r.growth_rate:10.4f}  "
          f"|mu - mu_inf| = {dist[-1]:.3e}  residual {r.residual:.1e}")

slope = np.polyfit(np.log(ks), np.log(dist), 1)[0]
print(f"log-log slope of the distance: {slope:.3f}")

# growth is Im(mu) k, so it increases with k even though mu itself settles
print(roots.RootResult.CSV_HEADER)
print(r.csv_row())
