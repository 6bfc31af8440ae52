import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from reslab.errors import ParameterError
from reslab.resonance import (CSV_FIELDS, Resonance, ResonanceSet, Window, match_sets, read_resonance_csv,
                              write_resonance_csv)


def test_window():
    w = Window.parse("1, 2, -0.5, 0.5")
    assert w.as_tuple() == (1, 2, -0.5, 0.5)
    assert w.contains(1.5) and not w.contains(3)
    assert w.mirrored().as_tuple() == (-2, -1, -0.5, 0.5)
    assert sum(q.contains(1.25 + 0.25j) for q in w.split()) == 1
    with pytest.raises(ParameterError):
        Window(1, 1, 0, 1)
    with pytest.raises(ParameterError):
        Window.parse("1,2,3")


def test_resonance_validation():
    with pytest.raises(ParameterError):
        Resonance(1.0, multiplicity=0)
    with pytest.raises(ParameterError):
        Resonance(1.0, residual=-1.0)


def test_set_values_repeat_multiplicity():
    s = ResonanceSet("scaling", [Resonance(2 - 1j), Resonance(1 - 1j, multiplicity=2)])
    assert s.count == 3 and len(s) == 2
    assert s.values.tolist() == [1 - 1j, 1 - 1j, 2 - 1j]


def test_csv_roundtrip(tmp_path):
    items = [Resonance(4.012627304385411 - 0.6697075474310245j, 1, "shooting", 1e-14, 2e-12, 0.3, 64),
             Resonance(1 / 3 - 1e-300j, 2, "fredholm", 0.0, 0.0, math.nan, 0)]
    write_resonance_csv(tmp_path / "r.csv", items)
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(CSV_FIELDS)
    back = read_resonance_csv(tmp_path / "r.csv")
    by_method = {r.method: r for r in back}
    assert by_method["shooting"].lam == items[0].lam
    assert by_method["fredholm"].lam == items[1].lam and math.isnan(by_method["fredholm"].theta)


def test_csv_rejects_bad_header(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ParameterError):
        read_resonance_csv(tmp_path / "bad.csv")


@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), max_size=8),
       st.floats(0, 1e-3))
def test_matching_perturbed_copy(values, eps):
    a = np.array(values, complex)
    b = a[::-1] + eps
    pairs, ua, ub = match_sets(a, b, tol=2 * eps + 1e-12)
    if len(set(np.round(a, 6))) == a.size:
        assert len(pairs) == a.size and not ua and not ub
        assert all(d <= eps * 1.0000001 + 1e-15 for _, _, d in pairs)


def test_matching_extra_entry():
    pairs, ua, ub = match_sets([1, 2], [1, 2, 5], tol=1e-6)
    assert len(pairs) == 2 and ua == [] and ub == [2]
