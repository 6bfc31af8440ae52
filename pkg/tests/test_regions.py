import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reslab.diagnostics import exponential_class_params
from reslab.errors import ParameterError
from reslab.regions import (RegionSpec, boundary_branches, region_boundary, region_contains,
                            write_boundary_csv)

OMEGA = RegionSpec("omega_sigma", sigma=1.0)
STRIP = RegionSpec("m_sigma", sigma=1.0)
WEDGE = RegionSpec("w_alpha", alpha=0.5)


def test_examples():
    assert region_contains(OMEGA, 0.5 - 0.5j)
    assert not region_contains(OMEGA, -1.5j)
    assert region_contains(OMEGA, 10 - 4.0j)  # 2 * 10 > 16 - 1
    assert not region_contains(OMEGA, 1 - 2.0j)
    assert region_contains(STRIP, 3 - 0.4j) and not region_contains(STRIP, 3 - 0.6j)
    assert not region_contains(STRIP, -0.3j)  # on the cut
    assert region_contains(WEDGE, -1 - 0.3j) and not region_contains(WEDGE, -1 - 0.7j)
    assert not region_contains(WEDGE, 0)


def test_array_input():
    z = np.array([0.5 - 0.5j, -1.5j, 10 - 4j])
    assert region_contains(OMEGA, z).tolist() == [True, False, True]


@given(st.floats(-20, 20), st.floats(0.01, 20))
def test_sigma_identity(a, b):
    """The Gevrey class of exp(-2 i lam / x) is |lam| - |Re lam|, the function defining Omega_sigma."""
    lam = complex(a, -b)
    sigma = exponential_class_params(-2 * lam).sigma
    assert sigma == pytest.approx(abs(lam) - abs(lam.real), rel=1e-9, abs=1e-12)


@given(st.floats(0.1, 3), st.floats(-8, 8), st.floats(-5, 0))
def test_nesting(sigma, a, b):
    """In the lower half plane M_sigma (minus the cut sector) lies inside Omega_sigma."""
    lam = complex(a, b)
    o = RegionSpec("omega_sigma", sigma=sigma)
    m = RegionSpec("m_sigma", sigma=sigma)
    if region_contains(m, lam):
        assert region_contains(o, lam)


def test_upper_half_plane_convention():
    # the sublevel set excludes points near i[sigma, oo) that the strip contains
    assert region_contains(STRIP, 1j) and not region_contains(OMEGA, 1j)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.5])
def test_omega_boundary_identity(sigma):
    spec = RegionSpec("omega_sigma", sigma=sigma)
    for branch, pts in boundary_branches(spec, 400):
        lhs = 2 * sigma * np.abs(pts.real)
        rhs = pts.imag ** 2 - sigma ** 2
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.max(np.abs(rhs)))
        assert np.all(np.diff(pts.real) > 0)


def test_omega_boundary_separates():
    for _, pts in boundary_branches(OMEGA, 200):
        inward = pts * (1 - 1e-6)
        outward = pts * (1 + 1e-6)
        assert np.all(region_contains(OMEGA, inward) | (np.abs(inward.real) < 1e-9))
        assert not np.any(region_contains(OMEGA, outward))


def test_strip_boundary():
    pieces = dict(boundary_branches(STRIP, 300))
    assert set(pieces) == {"line", "cut_left", "cut_right"}
    assert np.allclose(pieces["line"].imag, -0.5)
    assert np.all(np.diff(pieces["line"].real) > 0)
    for name in ("cut_left", "cut_right"):
        d = np.abs(pieces[name])
        assert np.all(np.diff(d) > 0)
        assert np.allclose(np.abs(np.angle(pieces[name][1:]) + np.pi / 2), 0.05)


def test_wedge_rays():
    pieces = dict(boundary_branches(WEDGE, 100))
    assert np.allclose(np.angle(pieces["ray_lower_right"][1:]), -0.5)
    assert np.allclose(np.angle(pieces["ray_lower_left"][1:]), -np.pi + 0.5)


def test_point_budget():
    assert region_boundary(OMEGA, 400).size == 400
    assert region_boundary(STRIP, 401).size == 401


def test_validation():
    with pytest.raises(ParameterError):
        RegionSpec("disc")
    with pytest.raises(ParameterError):
        RegionSpec("omega_sigma", sigma=0.0)
    with pytest.raises(ParameterError):
        RegionSpec("w_alpha", alpha=4.0)
    with pytest.raises(ParameterError):
        boundary_branches(OMEGA, 1)
    with pytest.raises(ParameterError):
        boundary_branches(OMEGA, 10, bbox=(1, 0, -1, 1))


def test_csv(tmp_path):
    write_boundary_csv(tmp_path / "b.csv", [OMEGA, STRIP], n=50)
    rows = list(csv.DictReader(open(tmp_path / "b.csv")))
    assert set(rows[0]) == {"re", "im", "region", "branch"}
    assert {r["region"] for r in rows} == {"omega_sigma", "m_sigma"}
    assert len(rows) == 100
