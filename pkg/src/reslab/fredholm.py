"""Perturbation of the analytic part: ``R_V = R_{V2} (I + V1 R_{V2})**-1``.

``R_{V2}(lambda)`` is realised by the complex-scaled collocation operator of
``D_x**2 + V2`` restricted to the real segment ``[1, R]`` of the contour,
where ``V1`` lives (``V1`` is truncated at ``R``, chosen so that the tail is
below ``1e-14``).  With ``B`` the projector on collocation rows and
``G = (A2 - mu B)**-1 B`` the discrete resolvent, the Nystrom matrix of
``V1 R_{V2}`` is ``K = diag(V1) G`` and, by Sylvester's identity,

    det(I + K) = det(A2 + B V1 - mu B) / det(A2 - mu B),

which is evaluated with banded LU factorisations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse.linalg import LinearOperator, onenormest

from .errors import ConvergenceError, DomainError, NearResonanceError, ParameterError
from .gevrey import Decomposition, PotentialSpec, potential_eval, split_compact
from .resonance import Resonance, ResonanceSet, Window
from .scaling import CUT_HALFWIDTH, _check_window, assemble_scaled_operator, build_contour, theta_for_window
from .zeros import find_zeros, newton

__all__ = [
    "WeightedGrid",
    "BSOperator",
    "weighted_grid",
    "working_weight",
    "resolvent_apply",
    "bs_operator",
    "write_det_trace",
    "birman_schwinger_det",
    "fredholm_resonances",
    "growth_bound",
    "apriori_check",
]

COND_MAX = 1e12
TAIL_TOL = 1e-14
R_CAP = 40.0
# LU determinants on [1, R] lose about log10 of this many digits at the window bottom
GROWTH_BUDGET = 1e6


# determinant values carry ~1e-10 relative noise, so Newton stops there
NEWTON_TOL = 1e-10


def _clenshaw_curtis(p):
    """Clenshaw-Curtis weights on increasing Chebyshev-Lobatto nodes of ``[-1, 1]``."""
    theta = np.pi * np.arange(p + 1) / p
    w = np.zeros(p + 1)
    v = np.ones(p - 1)
    inner = theta[1:-1]
    if p % 2 == 0:
        w[0] = w[p] = 1.0 / (p ** 2 - 1)
        for k in range(1, p // 2):
            v -= 2 * np.cos(2 * k * inner) / (4 * k ** 2 - 1)
        v -= np.cos(p * inner) / (p ** 2 - 1)
    else:
        w[0] = w[p] = 1.0 / p ** 2
        for k in range(1, (p - 1) // 2 + 1):
            v -= 2 * np.cos(2 * k * inner) / (4 * k ** 2 - 1)
    w[1:-1] = 2 * v / p
    return w[::-1]


@dataclass(frozen=True, eq=False)
class WeightedGrid:
    """Real nodes ``[1, R]`` of the scaling contour with quadrature weights.

    ``gamma`` is the working weight exponent ``gamma'`` of the spaces
    ``exp(-gamma' x / 2) L**2``.
    """

    nodes: np.ndarray
    gamma: float
    quad_weights: np.ndarray
    contour: object

    def __post_init__(self):
        if np.any(np.diff(self.nodes) <= 0):
            raise ParameterError("grid nodes must increase")
        if np.any(self.quad_weights <= 0):
            raise ParameterError("quadrature weights must be positive")
        if not self.gamma >= 0:
            raise ParameterError("gamma must be >= 0")

    @property
    def R(self) -> float:
        return self.contour.R

    def with_gamma(self, gamma):
        return WeightedGrid(self.nodes, float(gamma), self.quad_weights, self.contour)


@dataclass(frozen=True, eq=False)
class BSOperator:
    """Weighted Nystrom matrix of ``V1 R_{V2}(lambda)`` on the support nodes of ``V1``."""

    lam: complex
    matrix: np.ndarray
    gamma_prime: float
    nodes: np.ndarray

    def det(self) -> complex:
        return complex(np.linalg.det(np.eye(self.matrix.shape[0]) + self.matrix))


def _as_decomposition(source) -> Decomposition:
    if isinstance(source, Decomposition):
        return source
    if isinstance(source, PotentialSpec) and source.kind == "tabulated_compact":
        return split_compact(source)
    raise ParameterError("need a Decomposition (or a compactly supported PotentialSpec)")


def _default_R(decomp):
    if decomp.v2_zero and math.isfinite(decomp.v1_support):
        return max(5.0, decomp.v1_support + 2.0)
    g = decomp.fitted_decay
    if not (math.isfinite(g) and g > 0):
        return R_CAP
    return float(min(R_CAP, max(5.0, 1.0 + math.log(1.0 / TAIL_TOL) / g)))


def window_R(decomp, window: Window) -> float:
    """Default ``R`` capped so that ``exp(2 |Im lambda| (R - 1))`` stays within ``GROWTH_BUDGET``."""
    R = _default_R(decomp)
    if window.im_min < 0:
        R = min(R, max(5.0, 1.0 + math.log(GROWTH_BUDGET) / (2.0 * abs(window.im_min))))
    return float(R)


def working_weight(decomp, window: Window = None, margin=0.02) -> float:
    """``gamma'`` with ``2 |Im lambda| < gamma' < gamma`` over the window."""
    decomp = _as_decomposition(decomp)
    g = decomp.fitted_decay
    need = 0.0 if window is None else max(0.0, -2.0 * window.im_min)
    cand = 1.2 * need + margin
    if math.isfinite(g):
        # stay strictly between the two bounds when they are close
        cand = min(cand, need + 0.5 * (g - need)) if window is not None else 0.9 * g
    if window is not None and not cand > need:
        raise ParameterError(
            f"weight inconsistency: need 2|Im lambda| < gamma' < gamma, but 2|Im lambda| = {need:.4g} "
            f"and the V1 decay rate is gamma = {g:.4g}")
    return float(cand)


def weighted_grid(decomp, gamma=None, theta=0.5, order=48, R=None, panel_width=2.0,
                  layer=20.0) -> WeightedGrid:
    """Contour for ``R_{V2}`` and the weighted grid on its real segment.

    The scaled layer beyond ``R`` has length ``layer / sin(theta)``.
    """
    decomp = _as_decomposition(decomp)
    if R is None:
        R = _default_R(decomp)
    x_max = R + layer / max(0.2, math.sin(theta))
    c = build_contour(R, theta, x_max, breaks=decomp.breakpoints, panel_width=panel_width,
                      max_theta=decomp.sector_halfangle, order=order)
    p = c.order
    w = np.zeros(c.N)
    cc = _clenshaw_curtis(p)
    for j in range(c.edges.size - 1):
        a, b = c.edges[j], c.edges[j + 1]
        w[j * p: j * p + p + 1] += 0.5 * (b - a) * cc
    m = c.nodes <= R + 1e-12
    if gamma is None:
        gamma = working_weight(decomp)
    return WeightedGrid(c.nodes[m].copy(), float(gamma), w[m].copy(), c)


@lru_cache(maxsize=16)
def _setup(decomp, grid):
    op = assemble_scaled_operator(decomp, grid.contour)
    idx = np.arange(1, grid.contour.N - 1)
    real = grid.contour.nodes[idx] <= grid.R + 1e-12
    sel = op.colloc & real
    v1 = np.zeros(idx.size, complex)
    x = grid.contour.nodes[idx][sel]
    v1[sel] = decomp.v1_sample(x)
    if not np.all(np.isfinite(v1)):
        raise DomainError("non-finite V1 samples on the grid")
    return op, v1, sel


def _cond_estimate(op, lu):
    n = op.A.shape[0]
    inv = LinearOperator((n, n), matvec=lambda b: lu.solve(b), rmatvec=lambda b: lu.solve(b, trans=2),
                         dtype=complex)
    A = op.A.copy()
    # |A - mu B|_1 is dominated by the differentiation part
    return float(onenormest(inv)) * float(np.max(np.sum(np.abs(A), axis=0)))


def _grid_for(decomp, grid):
    return grid if grid is not None else weighted_grid(decomp)


def resolvent_apply(decomp, lam, f, grid: WeightedGrid = None, check=True):
    """``u = R_{V2}(lambda) f`` at the grid nodes.

    ``f`` is a callable or an array of samples at ``grid.nodes``; it is
    treated as zero beyond ``R``.  Raises :class:`NearResonanceError` when
    the solve is too ill-conditioned.
    """
    decomp = _as_decomposition(decomp)
    grid = _grid_for(decomp, grid)
    op, _, sel = _setup(decomp, grid)
    lam = complex(lam)
    fx = f(grid.nodes) if callable(f) else np.asarray(f)
    fx = np.asarray(fx, complex)
    if fx.shape != grid.nodes.shape:
        raise ParameterError("f must be sampled on grid.nodes")
    lu = op.band_lu(lam * lam)
    if lu.singular:
        raise NearResonanceError(f"singular resolvent at lambda={lam}", lam=lam)
    if check:
        cond = _cond_estimate(op, lu)
        if cond > COND_MAX:
            raise NearResonanceError(f"near resonance of V2: condition {cond:.2e} at lambda={lam}", lam=lam)
    nreal = grid.nodes.size
    rhs = np.zeros(op.A.shape[0], complex)
    rhs[sel] = fx[1:nreal][sel[: nreal - 1]]
    u = lu.solve(rhs)
    out = np.zeros(nreal, complex)
    out[1:] = u[: nreal - 1]
    return out


def _check_weight(decomp, lam, grid):
    g = decomp.fitted_decay
    gp = grid.gamma
    if math.isfinite(g) and not gp < g:
        raise ParameterError(f"weight inconsistency: gamma' = {gp:.4g} must be < gamma = {g:.4g}")
    if lam.imag < 0 and not 2 * abs(lam.imag) < gp:
        raise ParameterError(f"weight inconsistency: need 2|Im lambda| = {2 * abs(lam.imag):.4g} < gamma' = {gp:.4g}")


def bs_operator(decomp, lam, grid: WeightedGrid = None) -> BSOperator:
    """Explicit weighted matrix of ``V1 R_{V2}(lambda)`` on the support of ``V1``."""
    decomp = _as_decomposition(decomp)
    grid = _grid_for(decomp, grid)
    lam = complex(lam)
    _check_weight(decomp, lam, grid)
    op, v1, sel = _setup(decomp, grid)
    s = np.nonzero(sel & (v1 != 0))[0]
    x = grid.contour.nodes[1:-1][s]
    if s.size == 0:
        return BSOperator(lam, np.zeros((0, 0), complex), grid.gamma, x)
    lu = op.band_lu(lam * lam)
    E = np.zeros((op.A.shape[0], s.size), complex)
    E[s, np.arange(s.size)] = 1.0
    G = lu.solve(E)[s]
    K = v1[s][:, None] * G
    # coordinates of exp(-gamma' x / 2) L^2: a similarity, so det(I + K) is unchanged
    d = np.sqrt(grid.quad_weights[s + 1]) * np.exp(0.5 * grid.gamma * (x - 1.0))
    K = d[:, None] * K / d[None, :]
    return BSOperator(lam, K, grid.gamma, x)


class _DetFunction:
    """``lambda -> det(I + V1 R_{V2}) * det(P_{V2,theta} - lambda**2)`` up to a constant.

    The second factor removes the poles at resonances of ``V2``; zeros are
    those of the Fredholm determinant away from them.
    """

    def __init__(self, decomp, grid, lam_ref):
        self.op, self.v1, _ = _setup(decomp, grid)
        self.ref = self._logN(complex(lam_ref))

    def _logN(self, lam):
        return self.op.band_lu(lam * lam, extra=self.v1).logdet

    def _logD(self, lam):
        return self.op.band_lu(lam * lam).logdet

    def __call__(self, lams):
        lams = np.atleast_1d(np.asarray(lams, complex))
        F = np.empty(lams.size, complex)
        dF = np.empty(lams.size, complex)
        for k, lam in enumerate(lams):
            h = 1e-5 * max(1.0, abs(lam))
            l0 = self._logN(lam)
            lp = self._logN(lam + h)
            lm = self._logN(lam - h)
            F[k] = np.exp(l0 - self.ref)
            dF[k] = (np.exp(lp - self.ref) - np.exp(lm - self.ref)) / (2 * h)
        return F, dF


def birman_schwinger_det(decomp, lam, grid: WeightedGrid = None, normalize=False) -> complex:
    """``det(I + V1 R_{V2}(lambda))`` on the grid.

    With ``normalize=True`` the value is divided by the determinant at
    ``lambda_ref = 10 i``, where the Neumann series regime makes it close to 1.
    """
    decomp = _as_decomposition(decomp)
    grid = _grid_for(decomp, grid)
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is excluded")
    _check_weight(decomp, lam, grid)
    op, v1, _ = _setup(decomp, grid)
    if not np.any(v1):
        return 1.0 + 0j
    num = op.band_lu(lam * lam, extra=v1)
    den = op.band_lu(lam * lam)
    if den.singular:
        raise NearResonanceError(f"lambda={lam} is a resonance of V2", lam=lam)
    d = np.exp(num.logdet - den.logdet)
    if normalize:
        d /= birman_schwinger_det(decomp, 10j, grid)
    return complex(d)


def _check_cut(window, cut_halfwidth):
    c = window.corners
    if window.im_min < 0 < window.re_max and window.re_min < 0:
        raise ParameterError(f"window {window.as_tuple()} touches the cut i(-oo, 0]")
    for z in c[c.imag < 0]:
        if abs(np.angle(z) + 0.5 * np.pi) < cut_halfwidth:
            raise ParameterError(f"window {window.as_tuple()} touches the cut sector around i(-oo, 0]")


def _validate_window(decomp, window, grid, cut_halfwidth):
    _check_cut(window, cut_halfwidth)
    gp = grid.gamma
    if window.im_min < 0 and not 2 * abs(window.im_min) < gp:
        raise ParameterError(
            f"window leaves the strip 2 Im lambda > -gamma' = {-gp:.4g} (need 2|Im lambda| < gamma' < gamma)")
    g = decomp.fitted_decay
    if math.isfinite(g) and not gp < g:
        raise ParameterError(f"weight inconsistency: gamma' = {gp:.4g} must be < gamma = {g:.4g}")


def write_det_trace(path, decomp, lams, grid: WeightedGrid = None, normalize=True):
    """Determinant samples as CSV ``re_lambda, im_lambda, re_det, im_det, abs_det``."""
    decomp = _as_decomposition(decomp)
    grid = _grid_for(decomp, grid)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_lambda", "im_lambda", "re_det", "im_det", "abs_det"])
        for lam in np.ravel(np.asarray(lams, complex)):
            d = birman_schwinger_det(decomp, lam, grid, normalize=normalize)
            w.writerow([repr(float(lam.real)), repr(float(lam.imag)), repr(d.real), repr(d.imag), repr(abs(d))])


def fredholm_resonances(decomp, window: Window, grid: WeightedGrid = None, nodes_per_side=64,
                        cut_halfwidth=CUT_HALFWIDTH, refine=True, theta=None, order=48,
                        drift_tol=1e-6) -> ResonanceSet:
    """Zeros of the Birman-Schwinger determinant in ``window``.

    Windows reaching into ``Re lambda < 0`` are handled through the mirror
    symmetry ``lambda -> -conj(lambda)`` of real potentials.  With
    ``refine`` each zero is recomputed on a grid of order ``1.5 * order``
    with a 1.5 times longer scaled layer; the drift is stored as its
    stability and zeros drifting more than ``drift_tol`` (truncation
    artefacts of the layer) are dropped.
    """
    decomp = _as_decomposition(decomp)
    _check_cut(window, cut_halfwidth)
    if grid is None:
        if theta is None:
            theta = theta_for_window(window, decomp.sector_halfangle, margin=0.1)
        grid = weighted_grid(decomp, working_weight(decomp, window), theta=theta, order=order,
                             R=window_R(decomp, window))
    _validate_window(decomp, window, grid, cut_halfwidth)
    parts = []
    if window.re_min < 0:
        if not decomp.real:
            raise ParameterError("windows in Re lambda < 0 need a real potential")
        left = Window(window.re_min, min(window.re_max, 0.0), window.im_min, window.im_max)
        parts.append((left.mirrored(), True))
        if window.re_max > 0:
            parts.append((Window(0.0, window.re_max, window.im_min, window.im_max), False))
    else:
        parts.append((window, False))
    items = []
    meta = {"gamma_prime": grid.gamma, "R": grid.R, "order": grid.contour.order, "theta": grid.contour.theta,
            "N": grid.contour.N}
    fine = None
    if decomp.v2_zero and not np.any(_setup(decomp, grid)[1]):
        # V == 0: the determinant is identically 1
        return ResonanceSet("fredholm", [], window, meta)
    for w, mirrored in parts:
        if w.im_min >= 0 or w.re_max <= 0:
            continue
        _check_window(w, grid.contour.theta, False)
        center = complex(0.5 * (w.re_min + w.re_max), 0.5 * (w.im_min + w.im_max))
        f = _DetFunction(decomp, grid, center)
        for lam, mult in find_zeros(f, w, nodes_per_side, tol=NEWTON_TOL):
            den = f.op.band_lu(lam * lam)
            drift = 0.0
            if refine:
                if fine is None:
                    fine = weighted_grid(decomp, grid.gamma, theta=grid.contour.theta,
                                         order=int(1.5 * grid.contour.order), R=grid.R,
                                         layer=30.0)
                try:
                    lam2, _ = newton(_DetFunction(decomp, fine, center), lam, tol=NEWTON_TOL, trust=1e-2)
                    drift = abs(lam2 - lam)
                except ConvergenceError as exc:
                    drift = abs(exc.last - lam) if exc.last is not None else math.inf
                if not drift <= drift_tol * max(1.0, abs(lam)):
                    continue
            # |det(I + V1 R_V2)|, or the normalised numerator where V2 shares the zero
            lognum = f._logN(lam)
            resid = abs(np.exp(lognum - (f.ref if den.singular else den.logdet)))
            z = -np.conj(lam) if mirrored else lam
            items.append(Resonance(z, mult, "fredholm", float(resid), float(drift), grid.contour.theta,
                                   grid.contour.N))
    return ResonanceSet("fredholm", items, window, meta).sorted()


def growth_bound(lam, v) -> float:
    """Top eigenvalue of ``i (A - A*)`` for ``A = [[0, lam], [lam - v/lam, 0]]``.

    Closed form ``|2 Im lam + i v / lam|``; it reduces to
    ``|2 Im lam - i v / lam|`` whenever ``v / lam`` is real.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda = 0 is excluded")
    return abs(2.0 * lam.imag + 1j * complex(v) / lam)


def _h2_weighted(x, u, weight):
    d1 = np.gradient(u, x, edge_order=2)
    d2 = np.gradient(d1, x, edge_order=2)
    dens = weight ** 2 * (np.abs(u) ** 2 + np.abs(d1) ** 2 + np.abs(d2) ** 2)
    return math.sqrt(np.trapezoid(dens, x))


def apriori_check(spec, lam, gamma, u, f=None, x=None) -> float:
    """Ratio of the two sides of the weighted a priori estimate.

    ``|| exp(-gamma x) u ||_{H^2}`` divided by
    ``|| exp(gamma x) (P_V - lam**2) u ||_{L^2} + || u ||_{L^2(1, 4)}``.
    ``f`` defaults to ``(P_V - lam**2) u`` by finite differences with the
    potential of ``spec``.  Norms use trapezoid sums on ``x``.
    """
    u = np.asarray(u, complex)
    x = np.asarray(x, float)
    if x.shape != u.shape or x.ndim != 1 or x.size < 5:
        raise ParameterError("u and x must be matching 1-d arrays")
    if np.any(np.diff(x) <= 0):
        raise ParameterError("x must increase")
    lam = complex(lam)
    if not gamma > abs(lam.imag):
        raise ParameterError(f"need gamma > |Im lambda|, got gamma={gamma}")
    if f is None:
        if isinstance(spec, Decomposition):
            vx = spec.v1_sample(x) + (0 if spec.v2_zero else spec.v2_eval(x))
        else:
            vx = potential_eval(spec, x)
        d2 = np.gradient(np.gradient(u, x, edge_order=2), x, edge_order=2)
        f = -d2 + (vx - lam * lam) * u
    f = np.asarray(f, complex)
    if f.shape != u.shape:
        raise ParameterError("f must be sampled on the same grid as u")
    if not np.any(u) and not np.any(f):
        return 0.0
    lhs = _h2_weighted(x, u, np.exp(-gamma * (x - 1.0)))
    rhs = math.sqrt(np.trapezoid(np.exp(2 * gamma * (x - 1.0)) * np.abs(f) ** 2, x))
    m = x <= 4.0
    if m.sum() >= 2:
        rhs += math.sqrt(np.trapezoid(np.abs(u[m]) ** 2, x[m]))
    if rhs == 0:
        return math.inf
    return lhs / rhs
