"""Gevrey-2 potentials: splitting V = V1 + V2 and the asymptotics behind it.

The potential V(x) = x**-1 W(1/x) is given by the divergent Taylor series of
W with f_n = (-1)**n n! (the Euler series, Gevrey class sigma = 1).  A
truncated Borel-Laplace (Watson) sum gives a part V2 that continues
analytically into a sector, and the rest V1 decays like exp(-rho1 x).
We check the decay of V1, the a priori bound on the Taylor defect of W2, and
the Gevrey rate of exp(i z / x) read off from its Fourier transform.
"""
import numpy as np

from reslab.diagnostics import (ExpWindow, default_xi_grid, exponential_class_params, fit_gevrey_sigma,
                                windowed_fourier)
from reslab.gevrey import asymptotic_defect, constant_potential, decompose, euler_potential

for rho1 in (0.5, 0.8, 0.9):
    d = decompose(euler_potential(), rho1)
    print(f"Euler, rho1={rho1}: fitted decay of V1 = {d.fitted_decay:.4f}")
d = decompose(constant_potential(), 1.0)
x = np.array([1.0, 2.0, 5.0, 10.0])
print("W = 1, rho1 = 1: x V1(x) =", np.round(x * d.v1_sample(x), 12), " exp(-x) =", np.round(np.exp(-x), 12))

print("\nTaylor defect of W2 against its a priori bound (z = 0.1)")
series = euler_potential().series
for N in range(7):
    err, bound = asymptotic_defect(series, 0.9, 0.1, N)
    print(f"  N={N}: defect {err:.3e}  bound {bound:.3e}")

print("\nGevrey rates of exp(i z / x) from the decay of its windowed Fourier transform")
xi = default_xi_grid(10, 1e4)
for z in (2j, 3 + 4j):
    p = exponential_class_params(z)
    plus = fit_gevrey_sigma(windowed_fourier(lambda s: np.exp(1j * z / s), ExpWindow(), xi), 1)
    minus = fit_gevrey_sigma(windowed_fourier(lambda s: np.exp(1j * z / s), ExpWindow(), -xi[::-1]), -1)
    print(f"  z={z}: sigma+ fit {plus:.3f} (exact {p.sigma_plus:.3f}), sigma- fit {minus:.3f} (exact {p.sigma_minus:.3f})")
