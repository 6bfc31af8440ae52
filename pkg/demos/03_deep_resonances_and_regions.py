"""Deep resonances and the regions of the lambda plane.

For V = (m**2 - 1/4)/x**2 with a Dirichlet condition at x = 1 the outgoing
solution is sqrt(x) H_m^(1)(lambda x), so resonances are zeros of the Hankel
function.  This gives an exact check far below the real axis.  We then test
membership of these resonances in the strip M_sigma and the parabola region
Omega_sigma.
"""
import numpy as np
from scipy.optimize import newton
from scipy.special import hankel1

from reslab.gevrey import PotentialSpec
from reslab.regions import RegionSpec, region_contains
from reslab.resonance import Window
from reslab.scaling import assemble_scaled_operator, default_contour, scaled_resonances, theta_for_window
from reslab.shooting import shooting_resonances

m = 6
spec = PotentialSpec.analytic(lambda x: (m * m - 0.25) / x ** 2, name=f"inverse-square m={m}")
window = Window(3.0, 5.0, -3.0, -1.5)
theta = theta_for_window(window)
sc = scaled_resonances(assemble_scaled_operator(spec, default_contour(spec, theta)), window)
sh = shooting_resonances(spec, window)
for lam in sc.values:
    exact = complex(newton(lambda z: hankel1(m, z), lam, tol=1e-14))
    near = sh.values[np.argmin(np.abs(sh.values - lam))]
    print(f"scaling {lam:.12f}  shooting {near:.12f}  Hankel zero {exact:.12f}")

print("\nregion membership (sigma = 1)")
omega, strip = RegionSpec("omega_sigma", sigma=1.0), RegionSpec("m_sigma", sigma=1.0)
for lam in [2 - 0.1j, 4 - 0.45j, 8 - 2.5j, *sc.values]:
    print(f"  {lam:.4f}: in Omega_1 {bool(region_contains(omega, lam))}, in M_1 {bool(region_contains(strip, lam))}")
