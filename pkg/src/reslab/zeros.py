"""Zeros of analytic functions in rectangles by the argument principle.

Functions are passed as vectorised callables ``f(lams) -> (F, dF)``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, ParameterError, RepositionError
from .resonance import Window

__all__ = ["winding_number", "contour_moments", "newton", "find_zeros"]


_G16, _W16 = np.polynomial.legendre.leggauss(16)


def _panel_nodes(a, b):
    return 0.5 * (a + b) + 0.5 * (b - a) * _G16, 0.5 * (b - a) * _W16


def _boundary_rule(f, window: Window, nodes_per_side=64, tol=1e-4, max_level=30):
    """Adaptive Gauss-Legendre rule for ``(1/2 pi i) int F'/F dz`` over the boundary.

    Each side starts with ``nodes_per_side // 16`` panels of 16 nodes; a panel
    is halved until the integral over it agrees with the sum over its halves
    to ``tol``.  Returns nodes, weights ``dz`` and the values ``F'/F``.
    Panels that still need halving after ``max_level`` rounds sit on a zero
    of ``F``: :class:`RepositionError`.
    """
    c = window.corners
    panels = []
    m = max(1, int(nodes_per_side) // 16)
    for a, b in zip(c, np.roll(c, -1)):
        e = [a + (b - a) * k / m for k in range(m + 1)]
        panels.extend(zip(e[:-1], e[1:]))

    def evaluate(pans):
        z = np.concatenate([_panel_nodes(a, b)[0] for a, b in pans])
        F, dF = f(z)
        F = np.asarray(F, complex)
        if not np.all(np.isfinite(F)) or np.any(F == 0) or not np.all(np.isfinite(dF)):
            raise RepositionError(
                f"|F| nearly vanishes on the boundary of {window.as_tuple()}; perturb the rectangle")
        return (np.asarray(dF, complex) / F).reshape(len(pans), 16)

    vals = evaluate(panels)
    done_z, done_w, done_r = [], [], []
    level = 0
    while panels:
        halves = [h for a, b in panels for h in ((a, 0.5 * (a + b)), (0.5 * (a + b), b))]
        hv = evaluate(halves)
        keep, keep_v = [], []
        for k, (a, b) in enumerate(panels):
            w = _panel_nodes(a, b)[1]
            coarse = np.sum(vals[k] * w)
            fine = 0j
            for h in (0, 1):
                ha, hb = halves[2 * k + h]
                fine += np.sum(hv[2 * k + h] * _panel_nodes(ha, hb)[1])
            if level >= max_level:
                raise RepositionError(f"a zero of F lies on the boundary of {window.as_tuple()}; perturb it")
            if abs(fine - coarse) / (2 * np.pi) <= tol:
                for h in (0, 1):
                    z, wz = _panel_nodes(*halves[2 * k + h])
                    done_z.append(z)
                    done_w.append(wz)
                    done_r.append(hv[2 * k + h])
            else:
                keep.extend(halves[2 * k: 2 * k + 2])
                keep_v.extend([hv[2 * k], hv[2 * k + 1]])
        panels = keep
        vals = np.array(keep_v) if keep_v else None
        level += 1
    return np.concatenate(done_z), np.concatenate(done_w), np.concatenate(done_r)


def contour_moments(f, window: Window, kmax=0, nodes_per_side=64):
    """``(1/2 pi i) int (z - zc)**k F'/F dz`` for ``k = 0..kmax`` around the centre ``zc``."""
    z, dz, r = _boundary_rule(f, window, nodes_per_side)
    zc = 0.5 * (window.corners[0] + window.corners[2])
    r = r * dz / (2j * np.pi)
    return np.array([np.sum(r * (z - zc) ** k) for k in range(kmax + 1)]), zc


def winding_number(f, window: Window, nodes_per_side=64):
    """Number of zeros (with multiplicity) of ``F`` inside ``window``."""
    w = contour_moments(f, window, 0, nodes_per_side)[0][0]
    k = round(w.real)
    if abs(w - k) >= 0.05:
        raise ConvergenceError(f"winding number {w:.4f} in {window.as_tuple()} is not near an integer", last=w)
    return int(k)


def newton(f, lam0, tol=1e-13, maxiter=50, trust=None):
    """Newton iteration for a simple zero; raises :class:`ConvergenceError`.

    ``trust`` bounds the total distance from ``lam0``; leaving that disc
    counts as non-convergence.
    """
    lam = complex(lam0)
    for it in range(maxiter):
        F, dF = f(np.array([lam]))
        F, dF = complex(F[0]), complex(dF[0])
        if F == 0:
            return lam, it
        if dF == 0 or not np.isfinite(dF):
            raise ConvergenceError("zero derivative in Newton iteration", last=lam)
        step = F / dF
        lam -= step
        if trust is not None and abs(lam - lam0) > trust:
            raise ConvergenceError(f"Newton left the trust region around {lam0}", last=lam)
        if abs(step) <= tol * max(1.0, abs(lam)):
            return lam, it + 1
    raise ConvergenceError(f"Newton did not converge in {maxiter} iterations", last=lam)


def _split_lines(window):
    re_m = 0.5 * (window.re_min + window.re_max)
    im_m = 0.5 * (window.im_min + window.im_max)
    return re_m, im_m


def _quadrants(window, shift):
    re_m, im_m = _split_lines(window)
    re_m += shift * (window.re_max - window.re_min)
    im_m += shift * (window.im_max - window.im_min)
    return [Window(window.re_min, re_m, window.im_min, im_m), Window(re_m, window.re_max, window.im_min, im_m),
            Window(re_m, window.re_max, im_m, window.im_max), Window(window.re_min, re_m, im_m, window.im_max)]


def _roots_from_moments(s, zc, count):
    """Zeros from contour moments (Newton identities) for a low count."""
    # power sums p_k -> elementary symmetric e_k
    e = [1.0 + 0j]
    for k in range(1, count + 1):
        acc = 0j
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * s[i]
        e.append(acc / k)
    coeffs = [(-1) ** k * e[k] for k in range(count + 1)]
    return np.roots(coeffs) + zc


def find_zeros(f, window: Window, nodes_per_side=64, max_local=3, min_size=1e-3, depth=0,
               tol=1e-13):
    """All zeros of ``F`` in ``window`` as ``[(lam, multiplicity)]``.

    The rectangle is split into quadrants until each holds at most
    ``max_local`` zeros; those are estimated from contour moments and
    polished by Newton.  Clusters closer than ``1e-6`` are reported once
    with their winding count as multiplicity.
    """
    if depth > 24:
        raise ConvergenceError("subdivision too deep")
    s, zc = contour_moments(f, window, max_local, nodes_per_side)
    count = round(s[0].real)
    if abs(s[0] - count) >= 0.05:
        raise ConvergenceError(f"winding number {s[0]:.4f} in {window.as_tuple()} is not near an integer",
                               last=s[0])
    if count == 0:
        return []
    size = max(window.re_max - window.re_min, window.im_max - window.im_min)
    if count <= max_local:
        est = _roots_from_moments(s, zc, count)
        est = est[np.argsort(est.real + 1e-3 * est.imag)]
        roots = []
        for z0 in est:
            if any(abs(z0 - r) < 1e-6 * max(1.0, abs(r)) for r, _ in roots):
                continue
            near = est[np.abs(est - z0) < 1e-4 * max(1.0, abs(z0))]
            mult = int(near.size)
            try:
                z, _ = newton(f, z0, tol=tol, trust=0.25 * size) if mult == 1 else (near.mean(), 0)
            except ConvergenceError:
                z = z0
            roots.append((complex(z), mult))
        # a failed separation (count mismatch) falls back to subdivision
        if sum(m for _, m in roots) == count and all(window.contains(r, pad=1e-9 * size) for r, _ in roots):
            return roots
    if size < min_size:
        raise ConvergenceError(f"could not separate {count} zeros in {window.as_tuple()}")
    out = []
    for shift in (0.0, 0.0137, -0.0219):
        try:
            quads = _quadrants(window, shift)
            parts = [find_zeros(f, q, nodes_per_side, max_local, min_size, depth + 1, tol) for q in quads]
            break
        except RepositionError:
            continue
    else:
        raise RepositionError(f"could not split {window.as_tuple()} away from zeros")
    for p in parts:
        out.extend(p)
    return out


def rect_from_center(lam, radius):
    lam = complex(lam)
    if radius <= 0 or not math.isfinite(radius):
        raise ParameterError("radius must be positive")
    return Window(lam.real - radius, lam.real + radius, lam.imag - radius, lam.imag + radius)
