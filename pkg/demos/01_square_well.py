"""Square well V = 8 on [1, 2]: three independent resonance solvers against the closed form.

The outgoing solution is explicit for a piecewise constant potential, so the
resonances are the zeros of k cos k - i lambda sin k with k = sqrt(lambda**2 - 8).
We compute them by complex scaling (eigenvalues of a deformed operator), by
shooting (zeros of the outgoing Dirichlet trace) and through a Fredholm
determinant, then compare all three with the closed form.
"""
import time

import numpy as np
from scipy.optimize import newton

from reslab.fredholm import fredholm_resonances
from reslab.gevrey import split_compact, square_well
from reslab.resonance import Window
from reslab.scaling import assemble_scaled_operator, default_contour, scaled_resonances, theta_for_window
from reslab.shooting import shooting_resonances

well = square_well()
window = Window(0.5, 8, -1.5, -0.01)


def closed_form(lam):
    k = np.sqrt(lam * lam - 8.0)
    return k * np.cos(k) - 1j * lam * np.sin(k)


runs = {}
t = time.perf_counter()
theta = theta_for_window(window)
runs["scaling"] = scaled_resonances(assemble_scaled_operator(well, default_contour(well, theta)), window)
print(f"scaling   theta={theta:.3f}  {time.perf_counter() - t:5.1f} s")
t = time.perf_counter()
runs["shooting"] = shooting_resonances(well, window)
print(f"shooting                {time.perf_counter() - t:5.1f} s")
t = time.perf_counter()
runs["fredholm"] = fredholm_resonances(split_compact(well), window)
print(f"fredholm                {time.perf_counter() - t:5.1f} s\n")

print(f"{'method':10s} {'lambda':>36s} {'|lambda - closed form|':>24s}")
for name, rs in runs.items():
    for lam in rs.values:
        ref = complex(newton(closed_form, lam, tol=1e-15))
        print(f"{name:10s} {lam.real:17.12f} {lam.imag:+17.12f}i {abs(lam - ref):24.2e}")
