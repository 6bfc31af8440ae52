"""Resonances as zeros of the Dirichlet trace of the outgoing solution.

For ``u'' = (V - lambda**2) u`` let ``u`` be the solution that behaves like
``exp(i lambda x)`` at infinity.  Then ``F(lambda) = u(1)`` vanishes exactly at
resonances.  ``F`` and ``dF/dlambda`` (from the variational equation) are
computed by integrating inward with DOP853.

* Compactly supported ``V``: exact outgoing data at ``start_x >= x_supp``,
  integration along the real axis through the table knots.
* Analytic non-compact ``V``: integration along the ray
  ``1 + s exp(i phi)`` from ``s = S`` with WKB initial data.  On the ray the
  outgoing branch is the dominant one in the inward direction, so
  contamination by the incoming branch decays instead of growing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError, ParameterError
from .gevrey import PotentialSpec, potential_eval
from .resonance import Resonance, ResonanceSet, Window
from .zeros import find_zeros, newton, rect_from_center, winding_number

__all__ = [
    "OutgoingTrace",
    "ShootingFunction",
    "outgoing_solution",
    "argument_principle_count",
    "newton_refine",
    "shooting_resonances",
    "ray_angle_for",
]

RTOL = 1e-12
CHUNK = 256
GROWTH_PER_SEGMENT = 200.0
OVERFLOW = 1e280
ZERO_BALL = 0.05
MAX_RAY_ANGLE = 1.45


@dataclass(frozen=True)
class OutgoingTrace:
    lam: complex
    value_at_1: complex
    deriv_at_1: complex
    dF_dlam: complex
    start_x: float
    asymptotic_order: int
    ray_angle: float = 0.0


def _cauchy_derivs(V, z0, r, kmax=3, n=32):
    """Derivatives ``V^(k)(z0)``, ``k = 0..kmax``, from a circle of radius ``r``."""
    t = 2 * np.pi * np.arange(n) / n
    vals = np.asarray(V(z0 + r * np.exp(1j * t)), complex)
    return [math.factorial(k) * np.mean(vals * np.exp(-1j * k * t)) / r ** k for k in range(kmax + 1)]


def _wkb_logderiv(lam, d, order):
    """``u'/u`` of the outgoing WKB solution from ``V`` derivatives ``d``."""
    q = lam ** 2 - d[0]
    q1, q2 = -d[1], -d[2]
    w0 = 1j * lam * np.sqrt(1.0 - d[0] / lam ** 2)
    w = w0
    if order >= 1:
        w1 = -q1 / (4 * q)
        w = w + w1
    if order >= 2:
        w1p = -q2 / (4 * q) + q1 ** 2 / (4 * q ** 2)
        w = w - (w1p + w1 ** 2) / (2 * w0)
    return w


def ray_length(rate):
    """Ray length giving an ``exp(-40)`` suppression of the incoming branch."""
    return float(min(2000.0, max(20.0, 20.0 / rate)))


class ShootingFunction:
    """Vectorised ``lambda -> (F, dF/dlambda)`` for a fixed potential.

    Parameters
    ----------
    spec : PotentialSpec
    start_x : float, optional
        Compact case: starting abscissa (default ``x_supp``).  Analytic case:
        ray length ``S`` (default chosen from the lambda batch).
    asymptotic_order : int
        WKB corrections in the initial log-derivative (analytic case).
    branch : {"outgoing", "incoming"}
    ray_angle : float
        Angle ``phi`` of the integration ray (analytic case only).
    """

    def __init__(self, spec: PotentialSpec, start_x=None, asymptotic_order=1, branch="outgoing",
                 ray_angle=0.5):
        if branch not in ("outgoing", "incoming"):
            raise ParameterError("branch must be 'outgoing' or 'incoming'")
        if asymptotic_order not in (0, 1, 2):
            raise ParameterError("asymptotic_order must be 0, 1 or 2")
        self.spec = spec
        self.sign = 1.0 if branch == "outgoing" else -1.0
        self.order = asymptotic_order
        self.compact = spec.kind == "tabulated_compact"
        if self.compact:
            xs = spec.x_supp
            if start_x is None:
                start_x = xs
            if start_x < xs - 1e-12:
                raise ParameterError(f"start_x={start_x} lies inside the support [1, {xs}]")
            self.start_x = float(start_x)
            self.ray_angle = 0.0
        else:
            if not spec.analytic_continuation:
                raise ParameterError("shooting needs a compact or analytically continuable potential")
            if abs(ray_angle) > MAX_RAY_ANGLE + 1e-12:
                raise ParameterError(f"|ray_angle| must not exceed {MAX_RAY_ANGLE}")
            self.start_x = None if start_x is None else float(start_x)
            self.ray_angle = float(ray_angle)

    def _V(self, z):
        return potential_eval(self.spec, z)

    def _path(self, lams):
        """Straight segments from the start point down to 1."""
        amax = max(1.0, float(np.max(np.abs(lams))))
        if self.compact:
            knots = [1.0] + [b for b in self.spec.breakpoints if b < self.start_x] + [self.start_x]
            pts = sorted(set(knots), reverse=True)
            z0 = complex(self.start_x)
            S = self.start_x - 1.0
        else:
            e = np.exp(1j * self.ray_angle)
            rate = np.min(np.imag(self.sign * lams * e))
            if rate <= 0:
                raise DomainError("lambda outside the sector where the chosen branch decays on the ray")
            if self.start_x is None:
                # frozen on first use: F must be one function of lambda
                self.start_x = ray_length(rate)
            S = self.start_x
            z0 = 1.0 + S * e
            pts = [z0, 1.0 + 0j]
        segs = []
        for a, b in zip(pts[:-1], pts[1:]):
            m = max(1, int(math.ceil(amax * abs(b - a) / GROWTH_PER_SEGMENT)))
            nodes = [a + (b - a) * k / m for k in range(m + 1)]
            segs.extend(zip(nodes[:-1], nodes[1:]))
        return complex(z0), float(S), segs

    def _initial(self, lams, z0):
        s = self.sign
        if self.compact:
            # normalised exp(i s lam x): u = 1, u' = i s lam
            w = 1j * s * lams
            dw = 1j * s * np.ones_like(lams)
            return w, dw
        r = min(0.25 * abs(z0), 0.9 * (z0.real - 1.0))
        d = _cauchy_derivs(self._V, z0, r)
        h = 1e-5 * np.maximum(1.0, np.abs(lams))
        w = s * _wkb_logderiv(s * lams, d, self.order)
        wp = s * _wkb_logderiv(s * (lams + h), d, self.order)
        wm = s * _wkb_logderiv(s * (lams - h), d, self.order)
        return w, (wp - wm) / (2 * h)

    def _chunk(self, lams):
        z0, S, segs = self._path(lams)
        w, dw = self._initial(lams, z0)
        m = lams.size
        y = np.concatenate([np.ones(m), w, np.zeros(m), dw]).astype(complex)
        logscale = np.zeros(m, complex)
        l2 = lams ** 2
        for a, b in segs:
            dz = b - a

            def rhs(t, yy, a=a, dz=dz):
                u, up, ul, ulp = yy.reshape(4, -1)
                vq = complex(self._V(np.array([a + t * dz]))[0]) - l2
                return dz * np.concatenate([up, vq * u, ulp, vq * ul - 2 * lams * u])

            # solve_ivp uses an RMS error norm; tighten so every lambda meets RTOL
            tol = RTOL / math.sqrt(y.size)
            sol = solve_ivp(rhs, (0.0, 1.0), y, method="DOP853", rtol=tol, atol=1e-2 * tol)
            if not sol.success:
                raise ConvergenceError(f"integration failed: {sol.message}")
            y = sol.y[:, -1].reshape(4, -1)
            if not np.all(np.isfinite(y)):
                raise DomainError("overflow in the shooting integration")
            c = np.maximum(np.abs(y[0]), np.abs(y[1]) / max(1.0, float(np.max(np.abs(lams)))))
            c = np.where(c > 0, c, 1.0)
            if np.any(c > OVERFLOW):
                raise DomainError("solution growth beyond 1e280 within one segment")
            y = (y / c).ravel()
            logscale += np.log(c)
        u, up, ul, _ = y.reshape(4, -1)
        norm = np.exp(logscale + 1j * self.sign * lams * z0)
        F = norm * u
        dF = norm * (ul + 1j * self.sign * z0 * u)
        return F, dF, norm * up, S

    def evaluate(self, lams):
        lams = np.atleast_1d(np.asarray(lams, complex))
        if np.any(np.abs(lams) < ZERO_BALL):
            raise DomainError(f"|lambda| < {ZERO_BALL} is excluded")
        F = np.empty(lams.size, complex)
        dF = np.empty(lams.size, complex)
        up = np.empty(lams.size, complex)
        S = 0.0
        for k in range(0, lams.size, CHUNK):
            sl = slice(k, k + CHUNK)
            F[sl], dF[sl], up[sl], S = self._chunk(lams[sl])
        self.last_start = S
        return F, dF, up

    def __call__(self, lams):
        F, dF, _ = self.evaluate(lams)
        return F, dF


def ray_angle_for(window: Window, margin=0.1, max_angle=MAX_RAY_ANGLE):
    """Ray angle ``phi`` with ``0 < arg(lambda) + phi < pi`` on the whole window.

    Windows in the left half plane use negative angles (rays below the axis).
    """
    c = window.corners
    args = np.angle(c)
    if window.re_max > 0 and window.re_min < 0 and window.im_min < 0:
        raise ParameterError("window straddles the negative imaginary axis; split it at Re lambda = 0")
    if window.re_max <= 0 and window.im_min < 0:
        args = np.where(args < 0, args + 2 * np.pi, args)
    lo, hi = args.min(), args.max()
    # the smallest rotation that clears the window: steep rays lose accuracy
    if lo < 0.3:
        phi = 0.3 - lo
    elif hi > np.pi - 0.3:
        phi = np.pi - 0.3 - hi
    else:
        phi = 0.0
    phi = float(np.clip(phi, -max_angle, max_angle))
    if lo + phi < margin or hi + phi > np.pi - margin:
        raise ParameterError(f"window {window.as_tuple()} does not fit in one shooting sector")
    return phi


def _make_function(spec, window=None, **kw):
    if spec.kind != "tabulated_compact" and window is not None:
        if kw.get("ray_angle") is None:
            kw["ray_angle"] = ray_angle_for(window)
        if kw.get("start_x") is None:
            rate = np.min(np.imag(window.corners * np.exp(1j * kw["ray_angle"])))
            kw["start_x"] = ray_length(rate)
    return ShootingFunction(spec, **kw)


def outgoing_solution(spec: PotentialSpec, lam, start_x=None, asymptotic_order=1, branch="outgoing",
                      ray_angle=None) -> OutgoingTrace:
    """Dirichlet trace ``F(lambda) = u(1)`` of the outgoing solution."""
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is excluded")
    kw = dict(start_x=start_x, asymptotic_order=asymptotic_order, branch=branch)
    if spec.kind != "tabulated_compact":
        if ray_angle is None:
            ray_angle = float(np.clip(0.5 * np.pi - np.angle(lam), -MAX_RAY_ANGLE, MAX_RAY_ANGLE))
        kw["ray_angle"] = ray_angle
    f = ShootingFunction(spec, **kw)
    F, dF, up = f.evaluate(np.array([lam]))
    return OutgoingTrace(lam, complex(F[0]), complex(up[0]), complex(dF[0]),
                         float(f.start_x if f.compact else f.last_start), asymptotic_order, f.ray_angle)


def _check_rect(window: Window):
    # distance from 0 to the rectangle
    dx = max(window.re_min, 0.0, -window.re_max)
    dy = max(window.im_min, 0.0, -window.im_max)
    if math.hypot(dx, dy) < ZERO_BALL:
        raise ParameterError(f"rectangle {window.as_tuple()} reaches the excluded ball |lambda| < {ZERO_BALL}")


def argument_principle_count(spec, rect: Window, nodes_per_side=64, **kw) -> int:
    """Zeros of ``F`` in ``rect`` counted with multiplicity.

    ``spec`` may also be a vectorised callable ``lams -> (F, dF)``.
    """
    if isinstance(spec, PotentialSpec):
        _check_rect(rect)
        f = _make_function(spec, rect, **kw)
    else:
        f = spec
    return winding_number(f, rect, nodes_per_side)


def newton_refine(spec, lam0, maxiter=50, tol=1e-13, trust=0.5, mult_radii=(1e-2, 1e-3), **kw) -> Resonance:
    """Newton from ``lam0``; multiplicity from shrinking argument-principle squares."""
    lam0 = complex(lam0)
    if isinstance(spec, PotentialSpec):
        if spec.kind != "tabulated_compact" and "ray_angle" not in kw:
            kw["ray_angle"] = float(np.clip(0.5 * np.pi - np.angle(lam0), -MAX_RAY_ANGLE, MAX_RAY_ANGLE))
        f = ShootingFunction(spec, **kw)
    else:
        f = spec
    lam, _ = newton(f, lam0, tol=tol, maxiter=maxiter, trust=trust)
    mult = 0
    for r in mult_radii:
        try:
            m = winding_number(f, rect_from_center(lam, r))
        except Exception:  # noqa: BLE001 -- count is advisory on failure
            continue
        if m >= 1:
            mult = m
    mult = max(mult, 1)
    F, _ = f(np.array([lam]))
    theta = getattr(f, "ray_angle", math.nan)
    return Resonance(lam, mult, "shooting", float(abs(F[0])), 0.0, theta, 0)


def shooting_resonances(spec: PotentialSpec, window: Window, nodes_per_side=64, **kw) -> ResonanceSet:
    """All zeros of ``F`` in ``window`` (argument principle, moments, Newton)."""
    _check_rect(window)
    f = _make_function(spec, window, **kw)
    roots = find_zeros(f, window, nodes_per_side)
    items = []
    for lam, mult in roots:
        F, dF = f(np.array([lam]))
        step = abs(F[0] / dF[0]) if dF[0] != 0 else math.inf
        items.append(Resonance(lam, mult, "shooting", float(abs(F[0])), float(step),
                               f.ray_angle if not f.compact else math.nan, nodes_per_side))
    rs = ResonanceSet("shooting", items, window, {"ray_angle": f.ray_angle, "nodes_per_side": nodes_per_side})
    return rs.sorted()
