import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from conftest import BARRIER_ROOTS, WELL_ROOTS, scaled_solve
from reslab.errors import DomainError, NearResonanceError, ParameterError
from reslab.fredholm import (apriori_check, birman_schwinger_det, bs_operator, fredholm_resonances, growth_bound,
                             resolvent_apply, weighted_grid, window_R, working_weight, write_det_trace)
from reslab.gevrey import (GevreySeries, PotentialSpec, barrier_potential, decompose, euler_potential,
                           split_compact, square_well, zero_potential)
from reslab.resonance import Window
from reslab.scaling import assemble_scaled_operator

BARRIER_WINDOW = Window(3.5, 4.5, -0.3, -0.001)


def bump(x):
    x = np.asarray(x, float)
    t = np.clip(1 - (x - 2.5) ** 2, 1e-300, None)
    return np.where(np.abs(x - 2.5) < 1, np.exp(-1 / t), 0.0)


def cquad(f, a, b):
    kw = dict(limit=400, epsabs=1e-14, epsrel=1e-13)
    return quad(lambda y: f(y).real, a, b, **kw)[0] + 1j * quad(lambda y: f(y).imag, a, b, **kw)[0]


def free_green(lam, x):
    """Outgoing Dirichlet resolvent of -d^2 on [1, oo) applied to ``bump``."""
    s = lambda y: bump(y) * np.sin(lam * (y - 1))
    e = lambda y: bump(y) * np.exp(1j * lam * (y - 1))
    a = cquad(s, 1.0, min(x, 3.5)) if x > 1 else 0.0
    b = cquad(e, max(x, 1.5), 3.5) if x < 3.5 else 0.0
    return (np.exp(1j * lam * (x - 1)) * a + np.sin(lam * (x - 1)) * b) / lam


@pytest.fixture(scope="module")
def free():
    return split_compact(zero_potential())


@pytest.fixture(scope="module")
def well_split():
    return split_compact(square_well())


class TestResolvent:
    def test_green_kernel_oracle(self, free):
        lam = 1 + 0.5j
        g = weighted_grid(free, gamma=1.0, order=96)
        u = resolvent_apply(free, lam, bump, g)
        xs = g.nodes[::5]
        ref = np.array([free_green(lam, x) for x in xs])
        assert np.max(np.abs(u[::5] - ref)) < 1e-8

    def test_zero_source(self, well_split):
        g = weighted_grid(well_split, gamma=1.0)
        assert not np.any(resolvent_apply(well_split, 2 + 0.1j, np.zeros_like(g.nodes), g))

    @given(st.floats(0.3, 6), st.floats(-0.4, 1))
    def test_linearity(self, a, b):
        d = split_compact(zero_potential())
        g = weighted_grid(d, gamma=1.0)
        lam = complex(a, b)
        f1 = bump(g.nodes)
        f2 = np.sin(g.nodes) * (g.nodes < 4)
        lhs = resolvent_apply(d, lam, f1 + 2 * f2, g, check=False)
        rhs = resolvent_apply(d, lam, f1, g, check=False) + 2 * resolvent_apply(d, lam, f2, g, check=False)
        assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.max(np.abs(lhs))))

    def test_shape_check(self, free):
        g = weighted_grid(free, gamma=1.0)
        with pytest.raises(ParameterError):
            resolvent_apply(free, 1.0, np.ones(3), g)


class TestDeterminant:
    def test_v1_zero(self, free):
        assert birman_schwinger_det(free, 2 - 0.3j, weighted_grid(free, gamma=1.0)) == 1
        d = decompose(PotentialSpec.gevrey(GevreySeries([0.0], polynomial=True)), 0.5)
        assert birman_schwinger_det(d, 2 + 0.1j) == 1
        assert bs_operator(free, 2 - 0.3j, weighted_grid(free, gamma=1.0)).matrix.size == 0

    def test_neumann_regime(self, well_split):
        g = weighted_grid(well_split, gamma=1.0)
        assert abs(birman_schwinger_det(well_split, 200j, g) - 1) < 0.1
        assert birman_schwinger_det(well_split, 10j, g, normalize=True) == pytest.approx(1.0, abs=1e-12)

    def test_matrix_det_matches_banded(self, well_split):
        g = weighted_grid(well_split, gamma=1.0)
        lam = 3.0 - 0.2j
        assert bs_operator(well_split, lam, g).det() == pytest.approx(birman_schwinger_det(well_split, lam, g),
                                                                       rel=1e-8)

    def test_conjugation_symmetry(self, well_split):
        g = weighted_grid(well_split, gamma=1.0, theta=0.1)
        for lam in (2 + 1j, 1 + 0.5j, 0.5 + 2j):
            a = birman_schwinger_det(well_split, lam, g)
            b = birman_schwinger_det(well_split, -np.conj(lam), g)
            assert b == pytest.approx(np.conj(a), rel=1e-9)

    def test_weight_error_message(self):
        d = decompose(barrier_potential(), 2.0)
        g = weighted_grid(d, gamma=0.2)
        with pytest.raises(ParameterError, match=r"2\|Im lambda\|"):
            birman_schwinger_det(d, 3 - 0.3j, g)
        with pytest.raises(ParameterError, match="gamma' = .* must be < gamma"):
            birman_schwinger_det(d, 3 - 0.01j, g.with_gamma(5.0))
        with pytest.raises(ParameterError, match="weight inconsistency"):
            working_weight(d, Window(1, 2, -1.5, -0.1))

    def test_zero_excluded(self, well_split):
        with pytest.raises(DomainError):
            birman_schwinger_det(well_split, 0.0, weighted_grid(well_split, gamma=1.0))

    def test_trace_csv(self, tmp_path, well_split):
        g = weighted_grid(well_split, gamma=1.0)
        lams = [10j, 3 - 0.2j]
        write_det_trace(tmp_path / "t.csv", well_split, lams, g)
        rows = list(csv.reader(open(tmp_path / "t.csv")))
        assert rows[0] == ["re_lambda", "im_lambda", "re_det", "im_det", "abs_det"]
        assert float(rows[1][4]) == pytest.approx(1.0, abs=1e-12)
        d = birman_schwinger_det(well_split, lams[1], g, normalize=True)
        assert complex(float(rows[2][2]), float(rows[2][3])) == pytest.approx(d, rel=1e-12)


class TestResonances:
    def test_free_empty(self, free):
        assert len(fredholm_resonances(free, Window(0.5, 8, -1.5, -0.01))) == 0

    def test_well_degenerate_split(self, well_split):
        rs = fredholm_resonances(well_split, Window(0.5, 8, -1.5, -0.01))
        assert np.allclose(rs.values, WELL_ROOTS, atol=1e-6)
        assert all(r.method == "fredholm" and r.multiplicity == 1 for r in rs)

    def test_barrier_split_independence(self):
        sets = [fredholm_resonances(decompose(barrier_potential(), rho), BARRIER_WINDOW) for rho in (2.0, 3.0)]
        for s in sets:
            assert np.allclose(s.values, BARRIER_ROOTS, atol=1e-8)
        assert np.allclose(sets[0].values, sets[1].values, atol=1e-5)

    def test_cut_rejected(self, well_split):
        with pytest.raises(ParameterError, match="cut"):
            fredholm_resonances(well_split, Window(-1, 1, -1, -0.1))

    def test_strip_rejected(self):
        d = decompose(barrier_potential(), 2.0)
        g = weighted_grid(d, gamma=0.5)
        with pytest.raises(ParameterError, match="strip"):
            fredholm_resonances(d, Window(3, 4, -0.4, -0.01), grid=g)

    def test_window_R_budget(self):
        d = decompose(euler_potential(), 0.9)
        default = 1 + np.log(1e14) / d.fitted_decay
        assert window_R(d, Window(1, 2, 0.1, 1)) == pytest.approx(default)
        assert window_R(d, Window(1, 2, -0.38, -0.01)) == pytest.approx(1 + np.log(1e6) / 0.76)


class TestGrowthBound:
    def test_examples(self):
        assert growth_bound(1j, 0) == pytest.approx(2.0)
        assert growth_bound(2.0, 3.0) == pytest.approx(1.5)
        assert growth_bound(1.5 - 0.7j, 0) == pytest.approx(1.4)
        with pytest.raises(DomainError):
            growth_bound(0, 1)

    def test_eigensolve(self):
        rng = np.random.default_rng(11)
        lam = rng.normal(size=1000) + 1j * rng.normal(size=1000)
        v = rng.normal(size=1000) * 3 + 1j * rng.normal(size=1000) * 3
        for l, vv in zip(lam, v):
            A = np.array([[0, l], [l - vv / l, 0]])
            top = np.max(np.linalg.eigvalsh(1j * (A - A.conj().T)))
            assert growth_bound(l, vv) == pytest.approx(top, rel=1e-13, abs=1e-13)

    @given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
    def test_real_ratio_forms_agree(self, a, b, v):
        lam = complex(a, b)
        if abs(lam) < 1e-3 or abs(lam.imag) > 1e-12 * abs(lam):
            lam = complex(a if abs(a) > 1e-3 else 1.0, 0.0)
        assert growth_bound(lam, v) == pytest.approx(abs(2 * lam.imag - 1j * v / lam), rel=1e-13)


class TestApriori:
    def test_degenerate(self):
        x = np.linspace(1, 5, 50)
        assert apriori_check(zero_potential(), 1 + 0.1j, 0.5, np.zeros(50), np.zeros(50), x) == 0.0

    def test_grid_doubling(self, free):
        lam = 1 + 0.3j
        ratios = []
        for order in (48, 96):
            g = weighted_grid(free, gamma=1.0, order=order)
            u = resolvent_apply(free, lam, bump, g)
            ratios.append(apriori_check(zero_potential(), lam, 0.5, u, x=g.nodes))
        assert np.isfinite(ratios).all() and abs(ratios[1] / ratios[0] - 1) < 0.2

    def test_sweep_bounded_off_resonances(self):
        lams = np.linspace(0.5, 8, 30) - 0.2j
        r = []
        for lam in lams:
            x, u = scaled_solve(square_well(), lam, bump)
            r.append(apriori_check(square_well(), lam, 0.5, u, f=bump(x), x=x))
        r = np.array(r)
        assert np.all(np.isfinite(r)) and r.max() < 10 * np.median(r)

    def test_errors(self):
        x = np.linspace(1, 5, 50)
        with pytest.raises(ParameterError):
            apriori_check(zero_potential(), 1 - 1j, 0.5, np.ones(50), x=x)
        with pytest.raises(ParameterError):
            apriori_check(zero_potential(), 1.0, 0.5, np.ones(49), x=x)
        with pytest.raises(ParameterError):
            apriori_check(zero_potential(), 1.0, 0.5, np.ones(50), f=np.ones(3), x=x)

    def test_near_resonance_flagged(self):
        d = decompose(barrier_potential(), 2.0)
        g = weighted_grid(d, gamma=1.0)
        # a resonance of V2 alone, from the eigenvalues of its scaled operator
        mu = assemble_scaled_operator(d, g.contour).eigen()
        lam = np.sqrt(mu[np.argmin(np.abs(mu - BARRIER_ROOTS[0] ** 2))])
        with pytest.raises(NearResonanceError) as exc:
            resolvent_apply(d, lam, bump, g)
        assert exc.value.lam == lam
