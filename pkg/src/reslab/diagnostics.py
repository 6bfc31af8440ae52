"""Fourier-side Gevrey diagnostics for ``x -> exp(i z / x)``.

The sharp Gevrey-2 class of ``exp(i z/x)`` on ``[0, oo)`` is
``sigma(z) = (|z| - |Re z|)/2``.  It shows up in the decay of the Fourier
transform of the windowed function, ``|u^(xi)| ~ |xi|**-3/4 exp(-2 sqrt(sigma_pm |xi|))``
with ``sigma_+ = |z| cos(arg z / 2)**2`` for ``xi > 0`` and
``sigma_- = |z| sin(arg z / 2)**2`` for ``xi < 0``.

Transforms of analytic integrands are computed along the steepest-descent
ray through the saddle point, which avoids the catastrophic cancellation of
real-axis quadrature once ``|u^|`` drops below ``1e-13``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError, FitError, ParameterError

__all__ = [
    "ExponentialClassParams",
    "exponential_class_params",
    "Spectrum",
    "ExpWindow",
    "BumpWindow",
    "windowed_fourier",
    "default_xi_grid",
    "fit_gevrey_sigma",
    "steepest_descent_model",
    "calibrate_model",
    "write_spectrum_csv",
    "write_fit_report",
]


@dataclass(frozen=True)
class ExponentialClassParams:
    sigma: float
    sigma_plus: float
    sigma_minus: float
    phi_plus: float
    phi_minus: float


def exponential_class_params(z) -> ExponentialClassParams:
    """Gevrey parameters of ``exp(i z / x)``; requires ``Im z > 0``."""
    z = complex(z)
    if not z.imag > 0:
        raise DomainError(f"need Im z > 0, got z={z}")
    r = abs(z)
    a = np.angle(z)
    return ExponentialClassParams(
        sigma=0.5 * (r - abs(z.real)),
        sigma_plus=math.cos(0.5 * a) ** 2 * r,
        sigma_minus=math.sin(0.5 * a) ** 2 * r,
        phi_plus=0.5 * (a + np.pi),
        phi_minus=0.5 * a,
    )


@dataclass(frozen=True)
class Spectrum:
    xi: np.ndarray
    amp: np.ndarray
    window_id: str = ""

    def __post_init__(self):
        xi = np.asarray(self.xi, float)
        amp = np.asarray(self.amp, complex)
        if xi.shape != amp.shape or xi.ndim != 1:
            raise ParameterError("xi and amp must be 1-d arrays of equal length")
        if np.any(np.diff(xi) <= 0):
            raise ParameterError("xi must be strictly increasing")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "amp", amp)


class ExpWindow:
    """``chi(x) = exp(-rate x)`` on ``x > 0``: smooth on ``(0, oo)`` and entire.

    Being entire, it lets the transform integral be rotated onto a
    steepest-descent ray; its own contribution to ``u^`` is a pole at
    ``xi = -i rate`` and does not affect the large-``|xi|`` rate.
    """

    analytic = True

    def __init__(self, rate=1.0):
        self.rate = float(rate)
        self.id = f"exp(rate={self.rate:g})"
        self.support = math.inf

    def __call__(self, x):
        return np.exp(-self.rate * x)


class BumpWindow:
    """Compact ``gamma^2`` bump ``exp(1 - 1/(1 - (x/L)**2)**2)`` on ``|x| < L``.

    Real-axis quadrature only; transforms are limited by cancellation.
    """

    analytic = False

    def __init__(self, L=1.0):
        self.L = float(L)
        self.id = f"bump(L={self.L:g})"
        self.support = self.L

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        t = 1.0 - (x / self.L) ** 2
        out = np.zeros_like(x)
        m = t > 0
        out[m] = np.exp(1.0 - 1.0 / t[m] ** 2)
        return out


def default_xi_grid(lo=10.0, hi=1e4, per_decade=16):
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return np.geomspace(lo, hi, n)


def _ray_log_profile(f, xi, beta, sgn, r):
    x = r * np.exp(-1j * sgn * beta)
    with np.errstate(all="ignore"):
        val = f(x) * np.exp(-1j * x * xi) * x
        out = np.log(np.abs(val))
    out[~np.isfinite(out)] = -np.inf
    # blow-up at small r signals an inadmissible rotation
    with np.errstate(all="ignore"):
        bad = ~np.isfinite(np.abs(f(x[:4])))
    if np.any(bad):
        return np.full(r.shape, np.inf)
    return out


def _ray_transform(f, xi, rtol=1e-12):
    sgn = 1.0 if xi > 0 else -1.0
    r = np.geomspace(1e-30, 1e4, 900)
    betas = np.linspace(0.0, 0.5 * np.pi - 0.02, 90)
    peaks = np.array([_ray_log_profile(f, xi, b, sgn, r).max() for b in betas])
    k = int(np.argmin(peaks))
    beta = betas[k]
    prof = _ray_log_profile(f, xi, beta, sgn, r)
    peak = prof.max()
    if not np.isfinite(peak):
        raise AccuracyError(f"no admissible ray at xi={xi}")
    alive = np.nonzero(prof > peak - 60.0)[0]
    s_lo = math.log(r[max(alive[0] - 1, 0)])
    s_hi = math.log(r[min(alive[-1] + 1, r.size - 1)])
    e = np.exp(-1j * sgn * beta)

    def trap(n):
        s = np.linspace(s_lo, s_hi, n)
        x = np.exp(s) * e
        h = f(x) * np.exp(-1j * x * xi) * x
        return (s[1] - s[0]) * (h.sum() - 0.5 * (h[0] + h[-1]))

    n = 257
    prev = trap(n)
    while n < 2 ** 20:
        n = 2 * n - 1
        cur = trap(n)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise AccuracyError(f"ray quadrature did not converge at xi={xi}")


def _real_axis_transform(f, xi, L, max_nodes=2_000_000):
    # graded panels: geometric near 0, then width <= pi/(4|xi|)
    hmax = min(math.pi / (4 * abs(xi)), L / 16)
    edges = [0.0, 1e-4 * L]
    while edges[-1] < L:
        edges.append(min(L, edges[-1] + min(hmax, edges[-1])))
    edges = np.array(edges)
    nodes = 16 * (edges.size - 1)
    if nodes > max_nodes:
        raise AccuracyError(f"oscillation at xi={xi} exceeds node budget")
    g, w = np.polynomial.legendre.leggauss(16)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    x = (mid[:, None] + half[:, None] * g).ravel()
    wt = (half[:, None] * w).ravel()
    h = f(x) * np.exp(-1j * x * xi)
    val = np.sum(wt * h)
    floor = 1e-14 * np.sum(wt * np.abs(h))
    if abs(val) < 1e3 * floor:
        raise AccuracyError(f"|u^({xi})| ~ {abs(val):.2e} is below the cancellation floor {floor:.2e}")
    return val


def windowed_fourier(u, window, xi_grid, deform=True) -> Spectrum:
    """``u^(xi) = int_0^oo chi(x) u(x) exp(-i x xi) dx`` on ``xi_grid``.

    ``u`` must accept complex arguments when the integral is deformed
    (``deform=True`` and an analytic window): the ray ``arg x = -/+ beta``
    is picked to minimise the peak of the integrand, which is the
    steepest-descent ray through the saddle.  Otherwise composite
    Gauss-Legendre on the real axis is used and :class:`AccuracyError`
    flags results lost to cancellation.
    """
    xi_grid = np.asarray(xi_grid, float)
    if np.any(xi_grid == 0):
        raise ParameterError("xi = 0 is not supported")

    def f(x):
        return window(x) * u(x)

    use_ray = deform and getattr(window, "analytic", False)
    amps = np.empty(xi_grid.size, complex)
    for k, xi in enumerate(xi_grid):
        if use_ray:
            amps[k] = _ray_transform(f, xi)
        else:
            amps[k] = _real_axis_transform(f, xi, window.support)
    return Spectrum(xi_grid, amps, window.id)


def fit_gevrey_sigma(spec: Spectrum, sign=1, prefactor_power=0.75, floor=1e-280,
                     full_output=False):
    """Fit ``sigma`` in ``|u^(xi)| ~ C |xi|**-q exp(-2 sqrt(sigma |xi|))``.

    Least squares of ``log|u^| + q log|xi|`` against ``-2 |xi|**0.5``; the
    slope is ``sqrt(sigma)``.  ``q = prefactor_power``.
    """
    m = (np.sign(spec.xi) == np.sign(sign)) & (np.abs(spec.amp) > floor)
    if m.sum() < 12:
        raise FitError(f"only {int(m.sum())} usable frequencies of sign {sign:+d}")
    ax = np.abs(spec.xi[m])
    y = np.log(np.abs(spec.amp[m])) + prefactor_power * np.log(ax)
    X = -2.0 * np.sqrt(ax)
    A = np.column_stack([X, np.ones_like(X)])
    coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
    slope = coef[0]
    sigma = float(np.sign(slope) * slope ** 2)
    if not full_output:
        return sigma
    resid = float(np.sqrt(np.mean((A @ coef - y) ** 2)))
    return sigma, {"sigma_hat": sigma, "residual": resid, "n_points": int(m.sum()),
                   "prefactor_power": prefactor_power}


def steepest_descent_model(z, xi, calibration=1.0):
    """Leading steepest-descent term of the transform of ``x_+**0 exp(i z/x)``.

    ``c |xi|**-3/4 |z|**1/4 exp(i exp(i phi) 2 |z|**1/2 |xi|**1/2)`` with
    ``phi = phi_+`` for ``xi > 0`` and ``phi_-`` for ``xi < 0``.  The constant
    ``c`` is not known in closed form and is passed as ``calibration``.
    """
    p = exponential_class_params(z)
    xi = np.asarray(xi, float)
    if np.any(np.abs(xi) < 1):
        raise DomainError("the model is asymptotic: need |xi| >= 1")
    phi = np.where(xi > 0, p.phi_plus, p.phi_minus)
    ax = np.abs(xi)
    out = (calibration * ax ** -0.75 * abs(complex(z)) ** 0.25
           * np.exp(1j * np.exp(1j * phi) * 2.0 * math.sqrt(abs(complex(z))) * np.sqrt(ax)))
    return out if out.ndim else complex(out)


def calibrate_model(spec: Spectrum, z, sign=1) -> complex:
    """Least-squares constant ``c`` in ``u^ ~ c * model`` over frequencies of one sign."""
    m = np.sign(spec.xi) == np.sign(sign)
    if not np.any(m):
        raise FitError("no frequencies of the requested sign")
    ratio = spec.amp[m] / steepest_descent_model(z, spec.xi[m])
    return complex(np.mean(ratio))


def write_spectrum_csv(spec: Spectrum, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["xi", "re_amp", "im_amp", "abs_amp"])
        for x, a in zip(spec.xi, spec.amp):
            w.writerow([repr(float(x)), repr(float(a.real)), repr(float(a.imag)), repr(float(abs(a)))])


def write_fit_report(report: dict, path):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=1, sort_keys=True)
