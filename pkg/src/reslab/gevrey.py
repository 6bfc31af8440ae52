"""Gevrey-2-at-infinity potentials and their Watson/Borel splitting.

A potential on ``[1, oo)`` of the form ``V(x) = x**(-gamma_pow) * W(1/x)`` with
``W`` Gevrey-2 at ``0`` is split as ``V = V1 + V2`` where

* ``V2(z) = z**(-gamma_pow) * W2(1/z)`` and ``W2(z) = z**-1 int_0^rho1 g(s) exp(-s/z) ds``
  is the truncated Laplace transform of the Borel transform ``g`` of the
  Taylor series of ``W``; it is holomorphic in a sector around the positive
  axis;
* ``V1 = V - V2`` decays like ``exp(-rho1 * x)``.

Taylor coefficients ``f_n = W^(n)(0)/n!`` of a Gevrey-2 function grow like
``n!``, so a :class:`GevreySeries` stores the Borel coefficients
``b_n = f_n/n!`` (which stay bounded by ``K * sigma**-n``).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import exp1, gammaln

from .errors import DomainError, FitError, ParameterError

__all__ = [
    "GevreySeries",
    "PotentialSpec",
    "Decomposition",
    "borel_transform_eval",
    "watson_w2_eval",
    "decompose",
    "split_compact",
    "asymptotic_defect",
    "fit_decay_rate",
    "potential_eval",
    "constant_potential",
    "euler_potential",
    "barrier_potential",
    "polynomial_potential",
    "square_well",
    "zero_potential",
    "read_series",
    "write_series",
    "dump_decomposition",
]

UNDERFLOW_FLOOR = 1e-280
TAYLOR_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class GevreySeries:
    """Borel-normalised Taylor data of ``W`` at ``0``.

    Parameters
    ----------
    borel : array_like
        ``b_n = f_n / n!`` for ``n = 0..M``.
    bound_K, bound_sigma : float
        Constants of the factorial bound ``|f_n| <= K sigma**-n n!``.
    polynomial : bool
        True when all coefficients beyond ``M`` vanish (``W`` is a polynomial).
    """

    borel: np.ndarray
    bound_K: float = 1.0
    bound_sigma: float = 1.0
    order_a: float = 2.0
    polynomial: bool = False
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        b = np.array(self.borel, dtype=complex).ravel()
        if b.size == 0:
            raise ParameterError("a GevreySeries needs at least one coefficient")
        b.setflags(write=False)
        object.__setattr__(self, "borel", b)
        if not (self.bound_K > 0 and self.bound_sigma > 0):
            raise ParameterError("bound_K and bound_sigma must be positive")
        if self.order_a != 2:
            raise ParameterError("only Gevrey order 2 is supported")

    @classmethod
    def from_taylor(cls, coeffs, bound_K=1.0, bound_sigma=1.0, polynomial=False):
        """Build from Taylor coefficients ``f_n = W^(n)(0)/n!``."""
        f = np.asarray(coeffs, dtype=complex).ravel()
        n = np.arange(f.size)
        return cls(f * np.exp(-gammaln(n + 1)), bound_K, bound_sigma, polynomial=polynomial)

    @property
    def M(self) -> int:
        return self.borel.size - 1

    @property
    def coeffs(self) -> np.ndarray:
        """Taylor coefficients ``f_n``; entries overflow to ``inf`` for ``n > 170``."""
        n = np.arange(self.borel.size)
        with np.errstate(over="ignore", invalid="ignore"):
            f = self.borel * np.exp(gammaln(n + 1))
        return np.where(self.borel == 0, 0, f)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.borel)

    @property
    def is_real(self) -> bool:
        return not np.any(self.borel.imag)

    def satisfies_bound(self, rtol=1e-12) -> bool:
        """Check ``|f_n| <= K sigma**-n n!`` for every stored ``n``."""
        n = np.arange(self.borel.size)
        return bool(np.all(np.abs(self.borel) <= self.bound_K * self.bound_sigma ** (-n) * (1 + rtol)))

    def tail_bound(self, r) -> float:
        """Bound on the Borel-series remainder at ``|zeta| = r``."""
        if self.polynomial:
            return 0.0
        q = r / self.bound_sigma
        if q >= 1:
            return math.inf
        return self.bound_K * q ** (self.M + 1) / (1 - q)

    def borel_sum(self, zeta):
        """Partial sum of ``g`` at array ``zeta`` (no domain check)."""
        return np.polynomial.polynomial.polyval(np.asarray(zeta, dtype=complex), self.borel)

    def taylor_terms(self, y):
        """Terms ``f_n y**n`` at a scalar ``y``, computed in log form."""
        n = np.arange(self.borel.size)
        y = complex(y)
        if y == 0:
            t = np.zeros(n.size, complex)
            t[0] = self.borel[0]
            return t
        with np.errstate(over="ignore", invalid="ignore"):
            t = self.borel * np.exp(gammaln(n + 1) + n * np.log(y))
        return np.where(self.borel == 0, 0, t)

    def _borel_nodes(self, zmax, npanel, nodes):
        key = (zmax, npanel, nodes)
        hit = self._cache.get(key)
        if hit is None:
            x, w = np.polynomial.legendre.leggauss(nodes)
            edges = np.linspace(0.0, zmax, npanel + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            zeta = (mid[:, None] + half[:, None] * x[None, :]).ravel()
            wts = (half[:, None] * w[None, :]).ravel()
            hit = (zeta, wts, self.borel_sum(zeta))
            if len(self._cache) < 256:
                self._cache[key] = hit
        return hit


def borel_transform_eval(series: GevreySeries, zeta):
    """Evaluate the Borel transform ``g(zeta) = sum f_n zeta**n / n!``.

    Returns
    -------
    value : complex
        Partial sum over the stored coefficients.
    tail_bound : float
        ``K (|zeta|/sigma)**(M+1) / (1 - |zeta|/sigma)``; the true ``g`` lies
        within this distance of ``value``.
    """
    zeta = complex(zeta)
    if abs(zeta) >= series.bound_sigma:
        raise DomainError(f"zeta={zeta} outside Borel disk |zeta| < {series.bound_sigma}")
    return complex(series.borel_sum(zeta)), series.tail_bound(abs(zeta))


def _panel_layout(series, rho1, z):
    """Panel count and truncation point for ``int_0^rho1 g(s) exp(-s/z) ds``."""
    w = 1.0 / z
    decay = w.real
    zmax = rho1
    # drop the range where exp(-s Re(1/z)) < e^-45
    while zmax * decay > 90.0:
        zmax *= 0.5
    h = 3.0 * abs(z)
    if np.isfinite(series.bound_sigma) and not series.polynomial:
        h = min(h, max(series.bound_sigma - rho1, 1e-3))
    npanel = 8
    while zmax / npanel > h and npanel < 4096:
        npanel *= 2
    return zmax, npanel


def watson_w2_eval(series: GevreySeries, rho1: float, z, quad_nodes: int = 16):
    """Truncated Laplace transform ``W2(z) = z**-1 int_0^rho1 g(s) exp(-s/z) ds``.

    Composite Gauss-Legendre with ``quad_nodes`` points per panel; panels are
    sized to the scale ``|z|`` of the exponential factor.  ``z`` may be an
    array; every entry needs ``Re(1/z) > 0``.
    """
    if not (0 < rho1 < series.bound_sigma):
        raise ParameterError(f"need 0 < rho1 < sigma = {series.bound_sigma}, got rho1={rho1}")
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    zf = z.ravel()
    out = np.empty(zf.shape, complex)
    for k, zk in enumerate(zf):
        if zk == 0 or (1.0 / zk).real <= 0:
            raise DomainError(f"W2 needs Re(1/z) > 0, got z={zk}")
        zmax, npanel = _panel_layout(series, rho1, zk)
        zeta, wts, g = series._borel_nodes(zmax, npanel, quad_nodes)
        wk = 1.0 / zk
        out[k] = wk * np.sum(wts * g * np.exp(-zeta * wk))
    return complex(out[0]) if scalar else out.reshape(z.shape)


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """A potential on ``[1, oo)`` with Dirichlet condition at ``x = 1``.

    ``kind`` is one of ``gevrey_compactified`` (``x**-gamma_pow W(1/x)``),
    ``closed_form`` (a callable valid at complex points) or
    ``tabulated_compact`` (piecewise-linear table on ``[1, x_supp]``, zero
    beyond).  Use the classmethods rather than the raw constructor.
    """

    kind: str
    series: Optional[GevreySeries] = None
    gamma_pow: int = 1
    closed_form: Optional[Callable] = None
    table: Optional[tuple] = None
    w_func: Optional[Callable] = None
    name: str = ""
    real: Optional[bool] = None

    KINDS = ("gevrey_compactified", "closed_form", "tabulated_compact")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown potential kind {self.kind!r}")
        if self.kind == "gevrey_compactified":
            if self.series is None:
                raise ParameterError("gevrey_compactified needs a series")
            if self.gamma_pow not in (1, 2):
                raise ParameterError("gamma_pow must be 1 or 2")
        elif self.kind == "closed_form":
            if not callable(self.closed_form):
                raise ParameterError("closed_form needs a callable")
        else:
            if self.table is None:
                raise ParameterError("tabulated_compact needs a table")
            x = np.asarray(self.table[0], dtype=float)
            v = np.asarray(self.table[1], dtype=complex)
            if x.size < 2 or x.size != v.size:
                raise ParameterError("table needs >= 2 matching samples")
            if x[0] != 1.0 or np.any(np.diff(x) <= 0) or not np.isfinite(x[-1]):
                raise ParameterError("table abscissae must start at 1 and increase to a finite x_supp")
            object.__setattr__(self, "table", (x, v))

    @classmethod
    def gevrey(cls, series, gamma_pow=1, w_func=None, name=""):
        return cls("gevrey_compactified", series=series, gamma_pow=gamma_pow, w_func=w_func, name=name)

    @classmethod
    def analytic(cls, func, name="", real=True):
        return cls("closed_form", closed_form=func, name=name, real=real)

    @classmethod
    def tabulated(cls, x, v, name=""):
        return cls("tabulated_compact", table=(x, v), name=name)

    @property
    def x_supp(self) -> float:
        return float(self.table[0][-1]) if self.kind == "tabulated_compact" else math.inf

    @property
    def breakpoints(self) -> list:
        """Abscissae where the potential may fail to be smooth."""
        if self.kind != "tabulated_compact":
            return []
        x = self.table[0]
        return [float(t) for t in x[1:]] if x.size <= 64 else [self.x_supp]

    @property
    def is_zero(self) -> bool:
        if self.kind == "tabulated_compact":
            return not np.any(self.table[1])
        if self.kind == "gevrey_compactified":
            return self.series.is_zero
        return False

    @property
    def is_real(self) -> bool:
        """True when V is real on the real axis."""
        if self.real is not None:
            return self.real
        if self.kind == "tabulated_compact":
            return not np.any(self.table[1].imag)
        return self.series.is_real

    @property
    def analytic_continuation(self) -> bool:
        """Whether V can be evaluated off the real axis."""
        return self.kind == "closed_form" or (
            self.kind == "gevrey_compactified" and (self.w_func is not None or self.series.polynomial)
        )


def _taylor_w(series, y):
    t = series.taylor_terms(y)
    s = t.sum()
    if series.polynomial:
        return s
    last = np.abs(t[-3:])
    if not (np.all(np.isfinite(t)) and np.all(np.diff(np.abs(t[-4:])) <= 0)
            and last.max() <= TAYLOR_RTOL * max(abs(s), 1e-300)):
        raise DomainError(f"Taylor series of W not reliable at y={y}")
    return s


def potential_eval(spec: PotentialSpec, point):
    """Value of ``V`` at real ``x >= 1`` or, where it exists, at complex points.

    Gevrey potentials without a closed-form ``W`` are summed from their
    Taylor series; that is only accepted where the stored terms have
    decayed below ``1e-13`` relative, otherwise :class:`DomainError`.
    """
    p = np.asarray(point)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    is_cplx = np.iscomplexobj(p) and np.any(p.imag != 0)
    if np.any(np.real(p) < 1 - 1e-12):
        raise DomainError("V is defined for Re x >= 1 only")
    if spec.kind == "tabulated_compact":
        x, v = spec.table
        pr = np.real(p)
        if is_cplx and np.any((p.imag != 0) & (pr <= spec.x_supp)):
            raise DomainError("tabulated potential has no continuation inside its support")
        out = np.interp(pr, x, v.real) + 1j * np.interp(pr, x, v.imag)
        out = np.where(pr > spec.x_supp, 0.0, out)
    elif spec.kind == "closed_form":
        out = np.asarray(spec.closed_form(p), dtype=complex) * np.ones(p.shape)
    else:
        pc = p.astype(complex)
        if spec.w_func is not None:
            out = pc ** (-spec.gamma_pow) * np.asarray(spec.w_func(1.0 / pc), dtype=complex)
        else:
            if is_cplx and not spec.series.polynomial:
                raise DomainError("complex evaluation needs w_func or the V2 branch of a Decomposition")
            out = np.array([q ** (-spec.gamma_pow) * _taylor_w(spec.series, 1.0 / q) for q in pc])
    return complex(out[0]) if scalar else out


# -- catalog ---------------------------------------------------------------


def _exp_e1(z):
    """``exp(z) E1(z)`` for ``Re z > 0`` without overflow."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, complex)
    big = np.abs(z) > 40
    zs = z[~big]
    out[~big] = np.exp(zs) * exp1(zs)
    zb = z[big]
    if zb.size:
        term = 1.0 / zb
        acc = term.copy()
        for k in range(1, 40):
            term = -term * k / zb
            acc += term
        out[big] = acc
    return out


def constant_potential(c=1.0, gamma_pow=1):
    """``W == c``: ``V = c x**-gamma_pow``; the Borel transform is entire."""
    series = GevreySeries([c], bound_K=max(abs(c), 1e-300), bound_sigma=1e6, polynomial=True)
    return PotentialSpec.gevrey(series, gamma_pow, w_func=lambda y: c + 0 * y, name=f"const{c:g}")


def polynomial_potential(taylor, gamma_pow=1, bound_sigma=1e6):
    """``W`` a polynomial with Taylor coefficients ``taylor``."""
    f = np.asarray(taylor, dtype=complex)
    n = np.arange(f.size)
    K = float(np.max(np.abs(f) * bound_sigma ** n / np.exp(gammaln(n + 1)))) or 1.0
    series = GevreySeries.from_taylor(f, bound_K=K, bound_sigma=bound_sigma, polynomial=True)
    return PotentialSpec.gevrey(series, gamma_pow,
                                w_func=lambda y: np.polynomial.polynomial.polyval(y, f), name="poly")


def barrier_potential(height=1e4, gamma_pow=1):
    """Polynomial ``W(y) = height * y**2 (1 - y)**8``.

    For ``gamma_pow = 1``, ``V`` vanishes at ``x = 1`` and peaks at ``x = 11/3``
    with height about ``height * 1.6e-3``; the barrier traps a few narrow resonances.
    """
    P = np.polynomial.polynomial
    return polynomial_potential(height * P.polymul([0.0, 0.0, 1.0], P.polypow([1.0, -1.0], 8)), gamma_pow)


def euler_potential(M=400, gamma_pow=1):
    """Euler's series ``f_n = (-1)**n n!``: ``g(zeta) = 1/(1+zeta)``, class ``G^{2,1}``.

    ``W(y) = int_0^oo exp(-t)/(1+y t) dt = exp(1/y) E1(1/y) / y``; for
    ``gamma_pow = 1`` this gives ``V(x) = exp(x) E1(x)``.
    """
    b = (-1.0) ** np.arange(M + 1)
    series = GevreySeries(b, bound_K=1.0, bound_sigma=1.0)
    return PotentialSpec.gevrey(series, gamma_pow, w_func=lambda y: _exp_e1(1.0 / y) / y, name="euler")


def square_well(depth=8.0, a=2.0):
    """``V = depth`` on ``[1, a]``, zero beyond."""
    return PotentialSpec.tabulated([1.0, a], [depth, depth], name=f"well{depth:g}")


def zero_potential():
    return PotentialSpec.tabulated([1.0, 2.0], [0.0, 0.0], name="free")


# -- decomposition ---------------------------------------------------------


@dataclass(eq=False)
class Decomposition:
    """``V = V1 + V2`` with ``V2`` holomorphic in ``|arg z| < pi/2 - epsilon_sector``."""

    rho1: float
    v2_eval: Callable
    v1_sample: Callable
    epsilon_sector: float
    fitted_decay: float
    quad_nodes: int = 16
    spec: Optional[PotentialSpec] = None
    v1_support: float = math.inf
    breakpoints: list = field(default_factory=list)
    real: bool = True
    v2_zero: bool = False

    @property
    def sector_halfangle(self) -> float:
        return 0.5 * np.pi - self.epsilon_sector


def split_compact(spec: PotentialSpec) -> Decomposition:
    """Degenerate split of a compactly supported potential: ``V1 = V``, ``V2 = 0``."""
    if spec.kind != "tabulated_compact":
        raise ParameterError("split_compact needs a tabulated_compact potential")

    def v2(z):
        return np.zeros(np.shape(z), complex)

    def v1(x):
        return np.asarray(potential_eval(spec, np.asarray(x, float)), dtype=complex)

    return Decomposition(rho1=math.inf, v2_eval=v2, v1_sample=v1, epsilon_sector=0.05,
                         fitted_decay=math.inf, spec=spec, v1_support=spec.x_supp,
                         breakpoints=spec.breakpoints, real=spec.is_real, v2_zero=True)


def fit_decay_rate(x, v) -> float:
    """Least-squares slope of ``-log|v|`` against ``x``.

    Uses the samples up to the first one that falls below the underflow
    floor ``1e-280``.
    """
    x = np.asarray(x, dtype=float)
    a = np.abs(np.asarray(v))
    if x.size < 8 or x.size != a.size:
        raise FitError("need at least 8 samples")
    if np.any(np.diff(x) <= 0):
        raise FitError("x must be strictly increasing")
    below = np.nonzero(a <= UNDERFLOW_FLOOR)[0]
    n = below[0] if below.size else a.size
    if n < 2:
        raise FitError("decayed to machine zero")
    slope = np.polyfit(x[:n], -np.log(a[:n]), 1)[0]
    return float(slope) + 0.0


def decompose(spec: PotentialSpec, rho1: Optional[float] = None, epsilon: float = 0.1,
              quad_nodes: int = 16, fit_x=None) -> Decomposition:
    """Split a Gevrey potential into exponentially decaying and sector-analytic parts.

    ``rho1`` defaults to ``0.9 * sigma``.  The decay rate of ``V1`` is fitted
    on the ``W`` variable, i.e. on ``x**gamma_pow V1(x) = W1(1/x)``, over a
    log-spaced grid (``fit_x``) after discarding samples lost to cancellation.
    """
    if spec.kind != "gevrey_compactified":
        raise ParameterError("decompose needs a gevrey_compactified potential")
    series = spec.series
    if rho1 is None:
        rho1 = 0.9 * series.bound_sigma
    if not (0 < rho1 < series.bound_sigma):
        raise ParameterError(f"need 0 < rho1 < sigma = {series.bound_sigma}")
    if not (0 < epsilon < 0.5 * np.pi):
        raise ParameterError("epsilon must lie in (0, pi/2)")
    gp = spec.gamma_pow

    if series.is_zero:
        def zero(z):
            return np.zeros(np.shape(z), complex)
        return Decomposition(rho1, zero, zero, epsilon, math.inf, quad_nodes, spec,
                             real=True, v2_zero=True)

    def v2(z):
        z = np.asarray(z, dtype=complex)
        return z ** (-gp) * watson_w2_eval(series, rho1, 1.0 / z, quad_nodes)

    def v1(x):
        x = np.asarray(x, dtype=float)
        return np.asarray(potential_eval(spec, x), dtype=complex) - v2(x)

    xs = np.geomspace(2.0, 60.0, 48) if fit_x is None else np.asarray(fit_x, float)
    fitted = math.nan
    try:
        w1 = xs ** gp * v1(xs)
        wv = np.abs(xs ** gp * np.asarray(potential_eval(spec, xs)))
        keep = np.abs(w1) > 1e-12 * np.maximum(wv, 1.0)
        stop = np.nonzero(~keep)[0]
        n = stop[0] if stop.size else xs.size
        a = np.abs(w1[:n])
        if n >= 8 and np.any(np.diff(a) > 0):
            warnings.warn("|V1| is not monotone on the fit grid", RuntimeWarning, stacklevel=2)
        fitted = fit_decay_rate(xs[:n], w1[:n])
    except (FitError, DomainError) as exc:
        warnings.warn(f"decay fit failed: {exc}", RuntimeWarning, stacklevel=2)

    return Decomposition(rho1, v2, v1, epsilon, fitted, quad_nodes, spec,
                         real=spec.is_real)


def asymptotic_defect(series: GevreySeries, rho1: float, z, N: int, quad_nodes: int = 16):
    """Distance of ``W2(z)`` from its ``N``-term Taylor polynomial, with the a priori bound.

    The bound is ``K * max(N, 1) * (sigma/(sigma - rho1) + 2) * eps**-1 |z|**N N! (eps rho1)**-N``
    with ``eps = cos(arg z)``; it dominates the three terms of the error
    chain for the truncated Laplace integral (the tail term
    ``exp(-eps rho1/|z|)`` is absorbed with ``exp(-t) t**N <= N!``).
    """
    if N < 0 or N > series.M + 1:
        raise ParameterError(f"N={N} exceeds the {series.M + 1} stored coefficients")
    z = complex(z)
    eps = math.cos(np.angle(z))
    if eps <= 0:
        raise DomainError("need cos(arg z) > 0")
    w2 = watson_w2_eval(series, rho1, z, quad_nodes)
    partial = series.taylor_terms(z)[:N].sum() if N else 0.0
    error = abs(w2 - partial)
    sigma = series.bound_sigma
    c = sigma / (sigma - rho1) + 2.0
    logb = (math.log(series.bound_K * max(N, 1) * c / eps) + N * math.log(abs(z))
            + math.lgamma(N + 1) - N * math.log(eps * rho1))
    return error, math.exp(min(logb, 700.0))


# -- file formats ----------------------------------------------------------


def read_series(path):
    """Read a series file: ``K=``, ``sigma=``, ``gamma_pow=`` headers then ``n re im`` lines.

    An optional ``normalization=borel`` header means the lines hold ``f_n/n!``;
    ``polynomial=1`` marks a terminating series.  Returns ``(series, gamma_pow)``.
    """
    head = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" in line:
                k, v = line.split("=", 1)
                head[k.strip()] = v.strip()
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ParameterError(f"bad coefficient line: {line!r}")
            rows.append((int(parts[0]), float(parts[1]), float(parts[2])))
    if not rows:
        raise ParameterError("series file has no coefficients")
    M = max(r[0] for r in rows)
    c = np.zeros(M + 1, complex)
    for n, re, im in rows:
        c[n] = re + 1j * im
    K = float(head.get("K", 1.0))
    sigma = float(head.get("sigma", 1.0))
    poly = head.get("polynomial", "0").lower() in ("1", "true", "yes")
    if head.get("normalization", "taylor").lower() == "borel":
        series = GevreySeries(c, K, sigma, polynomial=poly)
    else:
        series = GevreySeries.from_taylor(c, K, sigma, polynomial=poly)
    return series, int(head.get("gamma_pow", 1))


def write_series(path, series: GevreySeries, gamma_pow=1):
    """Write ``series`` in the Borel-normalised variant of the series format."""
    with open(path, "w") as fh:
        fh.write(f"K={series.bound_K!r}\nsigma={series.bound_sigma!r}\ngamma_pow={gamma_pow}\n")
        fh.write("normalization=borel\n")
        if series.polynomial:
            fh.write("polynomial=1\n")
        for n, b in enumerate(series.borel):
            fh.write(f"{n} {float(b.real)!r} {float(b.imag)!r}\n")


def dump_decomposition(decomp: Decomposition, path, x=None):
    """JSON dump of sampled ``(x, V, V1, V2)`` plus the fit data."""
    x = np.geomspace(1.0, 50.0, 64) if x is None else np.asarray(x, float)
    v1 = np.asarray(decomp.v1_sample(x), complex)
    v2 = np.asarray(decomp.v2_eval(x), complex)
    v = v1 + v2

    def pack(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}

    data = {
        "rho1": decomp.rho1,
        "epsilon_sector": decomp.epsilon_sector,
        "fitted_decay": decomp.fitted_decay,
        "quad_nodes": decomp.quad_nodes,
        "x": x.tolist(),
        "V": pack(v),
        "V1": pack(v1),
        "V2": pack(v2),
    }
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1)
    return data
