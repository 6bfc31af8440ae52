"""Lambda-plane regions: the Gevrey parabola region, the strip and the wedge.

* ``omega_sigma``: ``{|lam| - |Re lam| < sigma}`` minus the cut sector; its
  boundary is ``2 sigma |Re lam| = (Im lam)**2 - sigma**2``.
* ``m_sigma``: ``{Im lam > -sigma/2}`` minus the cut ``i(-oo, 0]``.
* ``w_alpha``: ``{-alpha < arg lam < pi + alpha}`` with ``arg`` in ``(-pi/2, 3pi/2]``.

The cut is widened to the sector ``|arg lam + pi/2| < cut_halfwidth``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = ["RegionSpec", "region_contains", "region_boundary", "boundary_branches", "write_boundary_csv",
           "DEFAULT_BBOX", "INTERIOR_CONVENTION"]

KINDS = ("omega_sigma", "m_sigma", "w_alpha")
DEFAULT_BBOX = (-10.0, 10.0, -6.0, 2.0)
# recorded in output metadata: the interior of the parabola region is our choice
INTERIOR_CONVENTION = "omega_sigma interior taken as the sublevel set |lam| - |Re lam| < sigma"


@dataclass(frozen=True)
class RegionSpec:
    kind: str
    sigma: float = 1.0
    alpha: float = 0.5
    cut_halfwidth: float = 0.05

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"region kind must be one of {KINDS}, got {self.kind!r}")
        if self.kind != "w_alpha" and not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ParameterError(f"sigma must be positive and finite, got {self.sigma}")
        if self.kind == "w_alpha" and not 0 < self.alpha < math.pi:
            raise ParameterError(f"alpha must lie in (0, pi), got {self.alpha}")
        if not self.cut_halfwidth >= 0:
            raise ParameterError("cut_halfwidth must be >= 0")


def _arg_wedge(lam):
    """``arg`` with values in ``(-pi/2, 3pi/2]``."""
    a = np.angle(lam)
    return np.where(a <= -0.5 * np.pi, a + 2 * np.pi, a)


def _on_cut(lam, halfwidth):
    lam = np.asarray(lam, complex)
    near = np.abs(np.angle(lam) + 0.5 * np.pi) <= halfwidth
    return (lam == 0) | ((lam.imag < 0) & near) | ((lam.real == 0) & (lam.imag <= 0))


def region_contains(spec: RegionSpec, lam):
    """Membership of ``lam`` (scalar or array) in the region."""
    z = np.asarray(lam, complex)
    if spec.kind == "omega_sigma":
        out = (np.abs(z) - np.abs(z.real) < spec.sigma) & ~_on_cut(z, spec.cut_halfwidth)
    elif spec.kind == "m_sigma":
        out = (z.imag > -0.5 * spec.sigma) & ~_on_cut(z, spec.cut_halfwidth)
    else:
        a = _arg_wedge(z)
        out = (z != 0) & (a > -spec.alpha) & (a < np.pi + spec.alpha)
    return bool(out) if out.ndim == 0 else out


def _split(n, lengths):
    """Distribute ``n`` points over pieces proportionally, at least 2 each."""
    lengths = np.asarray(lengths, float)
    k = np.maximum(2, np.floor(n * lengths / lengths.sum()).astype(int))
    i = int(np.argmax(lengths))
    k[i] = max(2, k[i] + n - k.sum())
    return [int(v) for v in k]


def boundary_branches(spec: RegionSpec, n: int = 400, bbox=DEFAULT_BBOX):
    """Boundary pieces ``[(branch, points)]`` inside ``bbox = (re0, re1, im0, im1)``.

    Each piece is ordered by its curve parameter (``Re lam`` for curves,
    distance from the origin for rays).
    """
    if n < 2:
        raise ParameterError("need n >= 2 boundary points")
    re0, re1, im0, im1 = map(float, bbox)
    if not (re0 < re1 and im0 < im1):
        raise ParameterError(f"degenerate bounding box {bbox}")
    pieces = []
    if spec.kind == "omega_sigma":
        s = spec.sigma
        # |Re| reach of each branch: (Im^2 - sigma^2) / (2 sigma) with |Im| up to the box edge
        for branch, lim, sgn in (("lower", -im0, -1.0), ("upper", im1, 1.0)):
            if lim <= s:
                continue
            reach = (lim * lim - s * s) / (2 * s)
            a, b = max(re0, -reach), min(re1, reach)
            if a < b:
                pieces.append((branch, a, b, sgn))
        if not pieces:
            return []
        ks = _split(n, [b - a for _, a, b, _ in pieces])
        out = []
        for (branch, a, b, sgn), k in zip(pieces, ks):
            x = np.linspace(a, b, k)
            y = sgn * np.sqrt(s * s + 2 * s * np.abs(x))
            out.append((branch, x + 1j * y))
        return out
    if spec.kind == "m_sigma":
        h = -0.5 * spec.sigma
        segs = []
        if im0 <= h <= im1:
            segs.append(("line", re1 - re0))
        depth = min(-h, -im0)
        for name in ("cut_left", "cut_right"):
            segs.append((name, depth / math.cos(spec.cut_halfwidth)))
        ks = _split(n, [L for _, L in segs])
        out = []
        for (name, L), k in zip(segs, ks):
            if name == "line":
                out.append((name, np.linspace(re0, re1, k) + 1j * h))
            else:
                ang = -0.5 * np.pi + (-1 if name == "cut_left" else 1) * spec.cut_halfwidth
                out.append((name, np.linspace(0.0, L, k) * np.exp(1j * ang)))
        return out
    # wedge: two rays from the origin to the box edge
    out = []
    rays = [("ray_lower_right", -spec.alpha), ("ray_lower_left", np.pi + spec.alpha)]
    lengths = [_ray_to_box(a, bbox) for _, a in rays]
    for (name, a), L, k in zip(rays, lengths, _split(n, lengths)):
        out.append((name, np.linspace(0.0, L, k) * np.exp(1j * a)))
    return out


def _ray_to_box(angle, bbox):
    re0, re1, im0, im1 = bbox
    c, s = math.cos(angle), math.sin(angle)
    ts = []
    for d, lo, hi in ((c, re0, re1), (s, im0, im1)):
        if d > 0:
            ts.append(hi / d)
        elif d < 0:
            ts.append(lo / d)
    return max(0.0, min(ts))


def region_boundary(spec: RegionSpec, n: int = 400, bbox=DEFAULT_BBOX) -> np.ndarray:
    """``n`` boundary points inside ``bbox``, branches concatenated in order.

    Every piece gets at least two points, so tiny ``n`` may be exceeded.
    """
    pieces = boundary_branches(spec, n, bbox)
    if not pieces:
        return np.empty(0, complex)
    return np.concatenate([p for _, p in pieces])


def write_boundary_csv(path, specs, n=400, bbox=DEFAULT_BBOX):
    """Boundary dump with columns ``re, im, region, branch``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re", "im", "region", "branch"])
        for spec in specs:
            for branch, pts in boundary_branches(spec, n, bbox):
                for z in pts:
                    w.writerow([repr(float(z.real)), repr(float(z.imag)), spec.kind, branch])
