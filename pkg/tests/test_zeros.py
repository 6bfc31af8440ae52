import numpy as np
import pytest
from hypothesis import given, strategies as st

from reslab.errors import ConvergenceError, RepositionError
from reslab.resonance import Window
from reslab.zeros import contour_moments, find_zeros, newton, winding_number

UNIT = Window(-1.0, 1.0, -1.0, 1.0)


def poly(roots):
    c = np.polynomial.polynomial.polyfromroots(np.asarray(roots, complex))
    dc = np.polynomial.polynomial.polyder(c)
    P = np.polynomial.polynomial.polyval
    return lambda z: (P(np.asarray(z, complex), c), P(np.asarray(z, complex), dc))


def test_winding_counts_multiplicity():
    assert winding_number(poly([0.1, 0.2j, 0.2j, 3.0]), UNIT) == 3


def test_moments_are_power_sums():
    roots = np.array([0.3 + 0.1j, -0.4 - 0.5j])
    s, zc = contour_moments(poly(roots), UNIT, kmax=3)
    assert zc == 0
    assert np.allclose(s, [np.sum(roots ** k) for k in range(4)], atol=1e-10)


def test_zero_on_boundary():
    with pytest.raises(RepositionError):
        winding_number(poly([1.0 + 0.3j]), UNIT)


def test_entire_function_roots():
    f = lambda z: (np.sin(z), np.cos(z))
    roots = find_zeros(f, Window(-7.1, 7.2, -1, 1))
    assert np.allclose(sorted(r.real for r, _ in roots), np.pi * np.arange(-2, 3), atol=1e-12)


def test_double_root_cluster():
    roots = find_zeros(poly([0.25 - 0.1j, 0.25 - 0.1j, -0.5j]), UNIT)
    mults = sorted(m for _, m in roots)
    assert mults == [1, 2]


@given(st.lists(st.tuples(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9)), min_size=1, max_size=7))
def test_random_roots(pts):
    roots = np.array([complex(a, b) for a, b in pts])
    # keep roots apart from each other and from the split lines of the recursion
    d = np.abs(roots[:, None] - roots[None, :]) + np.eye(roots.size)
    if d.min() < 0.05:
        return
    try:
        found = find_zeros(poly(roots), UNIT)
    except RepositionError:
        return
    got = np.array([r for r, m in found for _ in range(m)])
    assert got.size == roots.size
    assert np.max(np.min(np.abs(got[:, None] - roots[None, :]), axis=0)) < 1e-10


def test_newton():
    z, it = newton(poly([0.5 + 0.5j]), 0.4 + 0.6j)
    assert abs(z - (0.5 + 0.5j)) < 1e-14 and it < 10
    with pytest.raises(ConvergenceError):
        newton(lambda z: (np.exp(z), np.exp(z)), 0.0, maxiter=5)
    with pytest.raises(ConvergenceError):
        newton(poly([5.0]), 0.0, trust=0.5)
