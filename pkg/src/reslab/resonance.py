"""Resonance records, resonance tables and table matching."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = ["Resonance", "ResonanceSet", "Window", "match_sets", "CSV_FIELDS",
           "write_resonance_csv", "read_resonance_csv"]

CSV_FIELDS = ["re_lambda", "im_lambda", "multiplicity", "method", "residual", "stability", "theta", "N"]
METHODS = ("scaling", "shooting", "fredholm")


@dataclass(frozen=True)
class Window:
    """Closed rectangle ``[re_min, re_max] x [im_min, im_max]`` in the lambda plane."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ParameterError(f"degenerate window {self}")

    @classmethod
    def parse(cls, text):
        parts = [float(p) for p in str(text).replace(" ", "").split(",")]
        if len(parts) != 4:
            raise ParameterError(f"window needs 4 numbers 're_min,re_max,im_min,im_max', got {text!r}")
        return cls(*parts)

    @property
    def corners(self):
        return np.array([complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                         complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)])

    def contains(self, lam, pad=0.0):
        lam = np.asarray(lam)
        return ((lam.real >= self.re_min - pad) & (lam.real <= self.re_max + pad)
                & (lam.imag >= self.im_min - pad) & (lam.imag <= self.im_max + pad))

    def mirrored(self):
        """Image under ``lambda -> -conj(lambda)``."""
        return Window(-self.re_max, -self.re_min, self.im_min, self.im_max)

    def split(self):
        """Four quadrants, counter-clockwise from the lower left."""
        rm = 0.5 * (self.re_min + self.re_max)
        im = 0.5 * (self.im_min + self.im_max)
        return [Window(self.re_min, rm, self.im_min, im), Window(rm, self.re_max, self.im_min, im),
                Window(rm, self.re_max, im, self.im_max), Window(self.re_min, rm, im, self.im_max)]

    def as_tuple(self):
        return (self.re_min, self.re_max, self.im_min, self.im_max)


@dataclass
class Resonance:
    lam: complex
    multiplicity: int = 1
    method: str = "scaling"
    residual: float = 0.0
    stability: float = 0.0
    theta: float = math.nan
    N: int = 0

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ParameterError("multiplicity must be >= 1")
        if not self.residual >= 0:
            raise ParameterError("residual must be >= 0")
        self.lam = complex(self.lam)


@dataclass
class ResonanceSet:
    method: str
    items: list = field(default_factory=list)
    window: Window | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, k):
        return self.items[k]

    @property
    def values(self) -> np.ndarray:
        """Resonances repeated by multiplicity, in canonical order."""
        out = [r.lam for r in self.sorted().items for _ in range(r.multiplicity)]
        return np.array(out, dtype=complex)

    @property
    def count(self) -> int:
        return sum(r.multiplicity for r in self.items)

    def sorted(self):
        items = sorted(self.items, key=lambda r: (round(r.lam.real, 9), round(r.lam.imag, 9)))
        return ResonanceSet(self.method, items, self.window, dict(self.meta))

    def to_csv(self, path):
        write_resonance_csv(path, self.items)


def _fmt(v):
    if isinstance(v, float) and math.isnan(v):
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_resonance_csv(path, resonances):
    rows = sorted(resonances, key=lambda r: (r.method, round(r.lam.real, 9), round(r.lam.imag, 9)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([_fmt(float(r.lam.real)), _fmt(float(r.lam.imag)), r.multiplicity, r.method,
                        _fmt(float(r.residual)), _fmt(float(r.stability)), _fmt(float(r.theta)), r.N])


def read_resonance_csv(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if header != CSV_FIELDS:
            raise ParameterError(f"{path}: resonance table header {header} != {CSV_FIELDS}")
        out = []
        for row in rd:
            if not row:
                continue
            if len(row) != len(CSV_FIELDS):
                raise ParameterError(f"{path}: malformed row {row}")
            fl = [float(x) if x else math.nan for x in (row[0], row[1], row[4], row[5], row[6])]
            out.append(Resonance(complex(fl[0], fl[1]), int(row[2]), row[3], fl[2], fl[3], fl[4],
                                 int(row[7]) if row[7] else 0))
    return out


def match_sets(a, b, tol=math.inf):
    """Greedy bipartite matching of two lists of complex values by distance.

    Returns ``(pairs, unmatched_a, unmatched_b)`` where ``pairs`` holds
    ``(i, j, distance)``.  Only pairs closer than ``tol`` are matched.
    """
    a = np.asarray(a, complex)
    b = np.asarray(b, complex)
    cand = sorted((abs(a[i] - b[j]), i, j) for i in range(a.size) for j in range(b.size))
    used_a, used_b, pairs = set(), set(), []
    for d, i, j in cand:
        if d > tol:
            break
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        pairs.append((i, j, float(d)))
    pairs.sort()
    ua = [i for i in range(a.size) if i not in used_a]
    ub = [j for j in range(b.size) if j not in used_b]
    return pairs, ua, ub
