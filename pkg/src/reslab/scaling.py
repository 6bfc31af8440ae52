"""Complex scaling (perfectly matched layer) discretisation of ``D_x**2 + V``.

The half-line ``[1, x_max]`` is parametrised by ``t`` and mapped to the
contour

    x(t) = t + (t - R)_+ (exp(i theta) - 1) s((t - R)/w)

with the quintic ramp ``s``; beyond ``R + w`` the contour is the ray
``R + (t - R) exp(i theta)``.  Outgoing waves ``exp(i lambda x)`` decay along
the ray when ``-theta < arg lambda``, so resonances become eigenvalues
``mu = lambda**2`` of

    -(1/x') d/dt (1/x') d/dt + V(x(t))

with Dirichlet conditions at ``t = 1`` and ``t = x_max``.  The operator is
discretised by Chebyshev collocation on panels (breakpoints at the contour
junction and at potential discontinuities) with flux continuity across
panel interfaces.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DomainError, ParameterError
from .gevrey import Decomposition, PotentialSpec, potential_eval
from .resonance import Resonance, ResonanceSet, Window

__all__ = [
    "Contour",
    "ScaledOperator",
    "build_contour",
    "default_contour",
    "assemble_scaled_operator",
    "scaled_resonances",
    "lambda_from_mu",
    "compactified_apply",
    "chebyshev_lobatto",
    "theta_for_window",
]

CUT_HALFWIDTH = 0.05
# scaling onset for potentials that continue analytically off the real axis
ANALYTIC_R = 1.5


def chebyshev_lobatto(p):
    """Nodes on ``[-1, 1]`` (increasing) and the differentiation matrix."""
    n = np.arange(p + 1)
    x = np.cos(np.pi * n / p)
    c = np.where((n == 0) | (n == p), 2.0, 1.0) * (-1.0) ** n
    dX = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dX + np.eye(p + 1))
    D -= np.diag(D.sum(axis=1))
    return x[::-1].copy(), D[::-1, ::-1].copy()


def _ramp(u):
    u = np.clip(u, 0.0, 1.0)
    return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)


def _dramp(u):
    inside = (u > 0) & (u < 1)
    return np.where(inside, 30.0 * u ** 2 * (1.0 - u) ** 2, 0.0)


@dataclass(frozen=True, eq=False)
class Contour:
    R: float
    theta: float
    x_max: float
    width: float
    order: int
    edges: np.ndarray
    nodes: np.ndarray
    points: np.ndarray
    jacobian: np.ndarray

    @property
    def N(self) -> int:
        return self.nodes.size

    @property
    def real_mask(self) -> np.ndarray:
        """Nodes where the contour is still the real axis."""
        return self.nodes <= self.R

    def map(self, t):
        t = np.asarray(t, float)
        e = np.exp(1j * self.theta) - 1.0
        u = (t - self.R) / self.width
        p = np.maximum(t - self.R, 0.0)
        x = t + p * e * _ramp(u)
        dx = 1.0 + e * (_ramp(u) + p * _dramp(u) / self.width)
        return x, dx

    def with_(self, **changes):
        """Rebuild with some parameters changed (``N``, ``theta``, ...)."""
        kw = dict(R=self.R, theta=self.theta, x_max=self.x_max, N=self.N,
                  breaks=list(self.edges), width=self.width)
        kw.update(changes)
        return build_contour(**kw)


def build_contour(R, theta, x_max, N=800, breaks=(), panel_width=2.0, width=1.0,
                  max_theta=0.5 * np.pi, order=None) -> Contour:
    """Panelled contour with about ``N`` Chebyshev-Lobatto nodes.

    Panels end at ``R``, ``R + width`` and at every entry of ``breaks``;
    none is longer than ``panel_width``.  The polynomial order per panel is
    ``ceil((N - 1) / panels)`` (at least 8), so doubling ``N`` doubles it.
    Passing ``order`` fixes the per-panel order instead.
    """
    if not (1.0 < R and R + width < x_max):
        raise ParameterError(f"need 1 < R < R + width < x_max, got R={R}, x_max={x_max}")
    if not (0.0 <= theta < max_theta):
        raise ParameterError(f"contour exits sector of holomorphy: theta={theta} not in [0, {max_theta:.4f})")
    if N < 32:
        raise ParameterError("need N >= 32")
    cuts = sorted({1.0, float(x_max), float(R), float(R + width)}
                  | {float(b) for b in breaks if 1.0 < b < x_max})
    edges = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        m = max(1, int(math.ceil((b - a) / panel_width - 1e-9)))
        edges.extend(np.linspace(a, b, m + 1)[:-1])
    edges = np.array(edges + [float(x_max)])
    P = edges.size - 1
    p = max(8, int(math.ceil((N - 1) / P))) if order is None else int(order)
    if p < 4:
        raise ParameterError("panel order must be >= 4")
    s, _ = chebyshev_lobatto(p)
    t = np.empty(P * p + 1)
    for j in range(P):
        a, b = edges[j], edges[j + 1]
        t[j * p: j * p + p + 1] = a + 0.5 * (b - a) * (s + 1.0)
    c = Contour(R, theta, x_max, width, p, edges, t, t.astype(complex), np.ones(t.size, complex))
    x, dx = c.map(t)
    x[t <= R] = t[t <= R]
    object.__setattr__(c, "points", x)
    object.__setattr__(c, "jacobian", dx)
    return c


def _source_info(source):
    if isinstance(source, Decomposition):
        return source.breakpoints, (source.v1_support if source.v2_zero else math.inf)
    return source.breakpoints, source.x_supp


class _NearestEigen:
    """Eigenvalues of ``op`` near a shift, by shift-invert Arnoldi on the banded pencil.

    Falls back to the dense eigensolver when Arnoldi does not converge.
    """

    def __init__(self, op: ScaledOperator, theta, k=4):
        self.op, self.theta, self.k = op, theta, k
        self._dense = None
        n = op.A.shape[0]
        self._B = spla.aslinearoperator(sp.diags(op.colloc.astype(float)))
        self._A = spla.LinearOperator((n, n), matvec=lambda x: op.A @ x, dtype=complex)
        # fixed start vector keeps the output reproducible
        self._v0 = np.cos(np.arange(n) + 0.5).astype(complex)

    def _all(self):
        if self._dense is None:
            self._dense = lambda_from_mu(self.op.eigen(), self.theta)
        return self._dense

    def distance(self, mu0, lam0) -> float:
        """Distance from ``lam0`` to the nearest eigenvalue of ``op`` (in lambda)."""
        if self._dense is None:
            lu = self.op.band_lu(mu0)
            if not lu.singular:
                n = self.op.A.shape[0]
                inv = spla.LinearOperator((n, n), matvec=lu.solve, dtype=complex)
                try:
                    vals = spla.eigs(self._A, k=self.k, M=self._B, sigma=mu0, OPinv=inv, tol=1e-13,
                                     return_eigenvectors=False, maxiter=200, v0=self._v0)
                    return float(np.min(np.abs(lambda_from_mu(vals, self.theta) - lam0)))
                except spla.ArpackNoConvergence:
                    pass
        return float(np.min(np.abs(self._all() - lam0)))


def default_contour(source, theta=0.5, N=800, R=None, x_max=None, panel_width=2.0) -> Contour:
    """Contour with ``x_max = R + 20/max(0.2, sin theta)``.

    ``R`` defaults to ``max(5, x_supp + 2)`` for compact support and to
    ``ANALYTIC_R`` otherwise: a mode of a resonance grows like
    ``exp(2 |Im lambda| (R - 1))`` along the unscaled segment, which makes the
    eigenvalue ill-conditioned for deep resonances.
    """
    breaks, xs = _source_info(source)
    if R is None:
        R = max(5.0, xs + 2.0) if math.isfinite(xs) else ANALYTIC_R
    if x_max is None:
        x_max = R + 20.0 / max(0.2, math.sin(theta))
    max_theta = source.sector_halfangle if isinstance(source, Decomposition) else 0.5 * np.pi
    return build_contour(R, theta, x_max, N, breaks=breaks, panel_width=panel_width, max_theta=max_theta)


def _potential_on_contour(source, contour):
    x = contour.points
    real = contour.real_mask
    out = np.zeros(x.shape, complex)
    try:
        if isinstance(source, Decomposition):
            if contour.theta >= source.sector_halfangle:
                raise ParameterError("contour exits sector of holomorphy of V2")
            if not source.v2_zero:
                out[real] = source.v2_eval(x[real].real)
                out[~real] = source.v2_eval(x[~real])
        else:
            if source.kind == "tabulated_compact":
                if source.x_supp > contour.R:
                    raise ParameterError(f"support end {source.x_supp} must not exceed R={contour.R}")
                out[real] = potential_eval(source, x[real].real)
            else:
                if not source.analytic_continuation and np.any(~real):
                    raise ParameterError("potential has no continuation off the real axis; decompose it first")
                out[real] = potential_eval(source, x[real].real)
                if np.any(~real):
                    out[~real] = potential_eval(source, x[~real])
    except DomainError as exc:
        raise DomainError(f"potential evaluation failed on the contour: {exc}") from exc
    bad = ~np.isfinite(out)
    if np.any(bad):
        raise DomainError(f"non-finite potential at contour point {x[np.argmax(bad)]}")
    return out


@dataclass(eq=False)
class ScaledOperator:
    """Collocation system for ``-(1/x') d/dt (1/x') d/dt + V(x(t))``.

    ``A`` acts on the interior unknowns (Dirichlet nodes removed).  Rows
    flagged in ``colloc`` are collocation equations (they carry ``-mu``);
    the others impose flux continuity at panel interfaces.
    """

    A: np.ndarray
    colloc: np.ndarray
    contour: Contour
    vvals: np.ndarray
    source: object = None
    disc_order: dict = field(default_factory=dict)

    @property
    def interior(self) -> np.ndarray:
        """Indices of the unknowns in the full node list."""
        return np.arange(1, self.contour.N - 1)

    @cached_property
    def _schur(self):
        c = self.colloc
        i = ~c
        A = self.A
        Aii = A[np.ix_(i, i)]
        X = np.linalg.solve(Aii, A[np.ix_(i, c)])
        return X

    @cached_property
    def matrix(self) -> np.ndarray:
        """Dense operator on collocation unknowns (interface values eliminated)."""
        c = self.colloc
        i = ~c
        return self.A[np.ix_(c, c)] - self.A[np.ix_(c, i)] @ self._schur

    def eigen(self, vectors=False):
        if vectors:
            return sla.eig(self.matrix, check_finite=False)
        return sla.eigvals(self.matrix, check_finite=False)

    def lu(self, mu):
        M = self.A.astype(complex, copy=True)
        idx = np.nonzero(self.colloc)[0]
        M[idx, idx] -= mu
        return sla.lu_factor(M, check_finite=False), M

    @property
    def bandwidth(self) -> int:
        return self.contour.order

    @cached_property
    def _band(self):
        """``A`` in LAPACK band storage with room for the pivoting fill-in."""
        k = self.bandwidth
        n = self.A.shape[0]
        ab = np.zeros((3 * k + 1, n), complex)
        for d in range(-k, k + 1):
            diag = np.diagonal(self.A, d)
            if d >= 0:
                ab[2 * k - d, d:] = diag
            else:
                ab[2 * k - d, :n + d] = diag
        return ab

    def band_lu(self, mu, extra=None):
        """Banded LU of ``A - mu B + diag(extra)`` (``B`` selects collocation rows)."""
        k = self.bandwidth
        ab = self._band.copy()
        shift = np.where(self.colloc, -complex(mu), 0.0)
        if extra is not None:
            shift = shift + extra
        ab[2 * k] += shift
        lu, piv, info = sla.lapack.zgbtrf(ab, k, k, overwrite_ab=1)
        if info < 0:
            raise RuntimeError(f"zgbtrf argument error {info}")
        return BandLU(lu, piv, k, info > 0)

    def expand(self, vc):
        """Full interior vector from values on collocation unknowns."""
        out = np.empty(self.colloc.size, complex)
        out[self.colloc] = vc
        out[~self.colloc] = -self._schur @ vc
        return out


@dataclass(eq=False)
class BandLU:
    lu: np.ndarray
    piv: np.ndarray
    k: int
    singular: bool

    @property
    def logdet(self) -> complex:
        """``log det`` up to multiples of ``2 pi i``."""
        d = self.lu[2 * self.k]
        if self.singular or np.any(d == 0):
            return complex(-np.inf)
        swaps = np.count_nonzero(self.piv != np.arange(self.piv.size))
        return complex(np.sum(np.log(d.astype(complex)))) + 1j * np.pi * (swaps % 2)

    def solve(self, b, trans=0):
        x, info = sla.lapack.zgbtrs(self.lu, self.k, self.k, np.asarray(b, complex), self.piv, trans=trans)
        if info != 0:
            raise RuntimeError(f"zgbtrs failed with info={info}")
        return x


def assemble_scaled_operator(source, contour: Contour) -> ScaledOperator:
    """Assemble the scaled operator for a potential or for the ``V2`` part of a split."""
    if not isinstance(source, (Decomposition, PotentialSpec)):
        raise ParameterError("source must be a Decomposition or PotentialSpec")
    v = _potential_on_contour(source, contour)
    p = contour.order
    P = contour.edges.size - 1
    n = contour.N
    s, D0 = chebyshev_lobatto(p)
    A = np.zeros((n, n), complex)
    dx = contour.jacobian
    for j in range(P):
        a, b = contour.edges[j], contour.edges[j + 1]
        idx = np.arange(j * p, j * p + p + 1)
        Dx = (2.0 / (b - a)) * D0 / dx[idx][:, None]
        L = -Dx @ Dx
        L[np.arange(p + 1), np.arange(p + 1)] += v[idx]
        A[idx[1:-1][:, None], idx[None, :]] = L[1:-1]
        if j < P - 1:
            A[idx[-1], idx] += Dx[-1]
        if j > 0:
            A[idx[0], idx] -= Dx[0]
    keep = np.arange(1, n - 1)
    A = A[np.ix_(keep, keep)]
    colloc = (keep % p) != 0
    return ScaledOperator(A, colloc, contour, v, source,
                          {"scheme": "chebyshev-panels", "order": p, "panels": P, "N": n})


def lambda_from_mu(mu, theta):
    """Square root of ``mu`` on the branch ``-theta < arg lambda <= pi - theta``."""
    lam = np.sqrt(np.asarray(mu, complex))
    a = np.angle(lam)
    lam = np.where(a <= -theta, -lam, lam)
    lam = np.where(np.angle(lam) > np.pi - theta, -lam, lam)
    return lam


def _off_cut(lam, halfwidth):
    return np.abs(np.angle(lam) + 0.5 * np.pi) >= halfwidth


def _check_window(window, theta, mirror):
    """Raise unless the window (or its right-half image) lies in ``-theta < arg < pi - theta``."""
    pts = np.append(window.corners, complex(min(max(0.0, window.re_min), window.re_max), window.im_min))
    if mirror:
        pts = np.where(pts.real < 0, -np.conj(pts), pts)
    arg = np.angle(pts)
    arg = np.where(arg < -0.5 * np.pi - theta, arg + 2 * np.pi, arg)
    if np.any(arg <= -theta) or np.any(arg >= np.pi - theta):
        raise ParameterError(f"window {window.as_tuple()} leaves the scaled sector "
                             f"{-theta:.3f} < arg(lambda) < {np.pi - theta:.3f}")


def theta_for_window(window: Window, max_theta=0.5 * np.pi, base=0.5, margin=0.15, mirror=True):
    """Scaling angle that keeps ``window`` (and the rotated check contour) inside the sector."""
    pts = np.append(window.corners, complex(min(max(0.0, window.re_min), window.re_max), window.im_min))
    if mirror:
        pts = np.where(pts.real < 0, -np.conj(pts), pts)
    lo = float(np.min(np.angle(pts)))
    theta = max(base, -lo + margin)
    if theta >= max_theta - 1e-9:
        raise ParameterError(f"window {window.as_tuple()} needs a scaling angle {theta:.3f} beyond the sector "
                             f"of holomorphy {max_theta:.3f}")
    return float(theta)


def _in_union(lam, window, mirror):
    inside = window.contains(lam)
    if mirror:
        inside |= window.contains(-np.conj(lam))
    return inside


def scaled_resonances(op: ScaledOperator, window: Window, drift_tol=1e-5, theta_step=0.1,
                      refine_factor=2, mirror=None, cut_halfwidth=CUT_HALFWIDTH) -> ResonanceSet:
    """Resonances in ``window`` that are stable under refinement and rotation.

    An eigenvalue is kept when it moves by less than ``drift_tol`` both when
    ``N`` is multiplied by ``refine_factor`` and when ``theta`` changes by
    ``theta_step``; PML continua and box modes move and are discarded.  For
    real potentials (``mirror`` defaults to that) the mirror images
    ``-conj(lambda)`` of resonances are added, which covers the left half of
    the window.
    """
    c = op.contour
    src = op.source
    real_v = src.real if isinstance(src, Decomposition) else src.is_real
    if mirror is None:
        mirror = real_v
    if mirror and not real_v:
        raise ParameterError("mirror symmetry needs a real potential")
    max_theta = src.sector_halfangle if isinstance(src, Decomposition) else 0.5 * np.pi
    theta2 = c.theta + theta_step
    if theta2 >= max_theta - 1e-9:
        theta2 = c.theta - theta_step
    if theta2 <= 0:
        raise ParameterError("no room to rotate the contour inside the sector")
    _check_window(window, min(c.theta, theta2), mirror)

    mu, vecs = op.eigen(vectors=True)
    lam = lambda_from_mu(mu, c.theta)
    sel = np.nonzero(_in_union(lam, window, mirror) & _off_cut(lam, cut_halfwidth))[0]
    result = ResonanceSet("scaling", [], window,
                          {"theta": c.theta, "N": c.N, "theta2": theta2, "drift_tol": drift_tol})
    if sel.size == 0:
        return result
    op_n = assemble_scaled_operator(src, c.with_(N=refine_factor * (c.N - 1) + 1))
    op_t = assemble_scaled_operator(src, c.with_(theta=theta2))
    near_n = _NearestEigen(op_n, c.theta)
    near_t = _NearestEigen(op_t, theta2)
    result.meta["N2"] = op_n.contour.N
    M = op.matrix
    accepted = []
    for k in sel:
        d1 = near_n.distance(mu[k], lam[k])
        d2 = near_t.distance(mu[k], lam[k])
        drift = max(d1, d2)
        if drift >= drift_tol:
            continue
        v = vecs[:, k]
        res = float(np.linalg.norm(M @ v - mu[k] * v) / np.linalg.norm(v))
        accepted.append((lam[k], res, float(drift)))
    # cluster coincident eigenvalues
    accepted.sort(key=lambda a: (a[0].real, a[0].imag))
    clusters = []
    for lam_k, res, drift in accepted:
        for cl in clusters:
            if abs(cl[0] - lam_k) < max(10 * max(drift, cl[2]), 1e-12):
                cl[3] += 1
                break
        else:
            clusters.append([lam_k, res, drift, 1])
    items = []
    for lam_k, res, drift, mult in clusters:
        images = [lam_k]
        if mirror:
            m = -np.conj(lam_k)
            if abs(m - lam_k) > drift_tol:
                images.append(m)
        for z in images:
            if window.contains(z):
                items.append(Resonance(z, mult, "scaling", res, drift, c.theta, c.N))
    result.items = items
    return result.sorted()


def compactified_apply(lam, spec: PotentialSpec, u, y):
    """Finite-difference ``Q_V(lambda) u = -(y**2 u')' + 2 i lambda u' + y**-2 V(1/y) u``.

    ``y`` is an increasing grid in ``(0, 1]``; the flux ``y**2 u'`` is formed at
    midpoints.  Returns the residual at the interior nodes ``y[1:-1]``.
    """
    y = np.asarray(y, float)
    u = np.asarray(u, complex)
    if y.shape != u.shape or y.size < 3:
        raise ParameterError("u and y must be matching arrays with >= 3 points")
    if y[0] <= 0 or y[-1] > 1 or np.any(np.diff(y) <= 0):
        raise ParameterError("y must increase inside (0, 1]")
    lam = complex(lam)
    h = np.diff(y)
    if abs(lam) > 0 and h[0] * 2 * abs(lam) / y[0] ** 2 > 1.0:
        warnings.warn("grid too coarse near y = 0 to resolve exp(-2 i lambda / y)", RuntimeWarning,
                      stacklevel=2)
    ym = 0.5 * (y[1:] + y[:-1])
    flux = ym ** 2 * np.diff(u) / h
    hl, hr = h[:-1], h[1:]
    dflux = (flux[1:] - flux[:-1]) / (0.5 * (hl + hr))
    du = (hl ** 2 * u[2:] - hr ** 2 * u[:-2] + (hr ** 2 - hl ** 2) * u[1:-1]) / (hl * hr * (hl + hr))
    yi = y[1:-1]
    v = np.asarray(potential_eval(spec, 1.0 / yi), complex)
    return -dflux + 2j * lam * du + v / yi ** 2 * u[1:-1]
