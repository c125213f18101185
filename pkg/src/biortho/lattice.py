"""Finite windows of complex coefficients over Z^D.

A :class:`CoeffLattice` stores the coefficients a(l) for l in [-R, R]^D as a
dense array; indices outside the window read as exactly zero.  Every other
module (overlap sequences, dual coefficients, direct coefficients) is carried
by this type.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import signal

MultiIndex = tuple[int, ...]

VERDICTS = ("summable_l1", "summable_l2_only", "divergent", "inconclusive")


def as_index(index, dimension: int) -> MultiIndex:
    """Normalise an int or sequence of ints to a ``dimension``-tuple."""
    if isinstance(index, (int, np.integer)):
        index = (int(index),)
    index = tuple(int(i) for i in index)
    if len(index) != dimension:
        raise ValueError(f"index {index} does not have dimension {dimension}")
    return index


@dataclass(frozen=True)
class CoeffLattice:
    """Dense coefficient window of half-width ``radius`` in ``dimension`` axes.

    ``values[i_1, ..., i_D]`` holds a(i_1 - R, ..., i_D - R).
    """

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=complex)
        if arr.ndim < 1:
            raise ValueError("lattice needs at least one axis")
        n = arr.shape[0]
        if n % 2 != 1 or any(s != n for s in arr.shape):
            raise ValueError(f"values must be a cube of odd side, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    # -- construction -----------------------------------------------------

    @classmethod
    def zeros(cls, dimension: int, radius: int) -> "CoeffLattice":
        return cls(np.zeros((2 * radius + 1,) * dimension, dtype=complex))

    @classmethod
    def delta(cls, dimension: int = 1, radius: int = 0, value: complex = 1.0) -> "CoeffLattice":
        arr = np.zeros((2 * radius + 1,) * dimension, dtype=complex)
        arr[(radius,) * dimension] = value
        return cls(arr)

    @classmethod
    def from_function(cls, dimension: int, radius: int, func: Callable) -> "CoeffLattice":
        """Build a lattice by evaluating ``func(index_tuple)`` at every window index."""
        arr = np.zeros((2 * radius + 1,) * dimension, dtype=complex)
        for idx in np.ndindex(arr.shape):
            arr[idx] = func(tuple(i - radius for i in idx))
        return cls(arr)

    @classmethod
    def from_mapping(cls, dimension: int, radius: int, mapping: dict) -> "CoeffLattice":
        arr = np.zeros((2 * radius + 1,) * dimension, dtype=complex)
        for key, val in mapping.items():
            idx = as_index(key, dimension)
            if any(abs(i) > radius for i in idx):
                raise ValueError(f"index {idx} outside window of radius {radius}")
            arr[tuple(i + radius for i in idx)] = val
        return cls(arr)

    # -- basic accessors --------------------------------------------------

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def radius(self) -> int:
        return (self.values.shape[0] - 1) // 2

    def __getitem__(self, index) -> complex:
        idx = as_index(index, self.dimension)
        r = self.radius
        if any(abs(i) > r for i in idx):
            return 0j
        return complex(self.values[tuple(i + r for i in idx)])

    def take(self, indices: np.ndarray) -> np.ndarray:
        """Vectorised lookup; ``indices`` has shape (..., D), out-of-window gives 0."""
        indices = np.asarray(indices, dtype=int)
        r = self.radius
        inside = np.all(np.abs(indices) <= r, axis=-1)
        clipped = np.clip(indices + r, 0, 2 * r)
        out = self.values[tuple(np.moveaxis(clipped, -1, 0))]
        return np.where(inside, out, 0)

    def indices(self) -> Iterator[MultiIndex]:
        r = self.radius
        for idx in np.ndindex(self.values.shape):
            yield tuple(i - r for i in idx)

    def items(self) -> Iterator[tuple[MultiIndex, complex]]:
        r = self.radius
        for idx in np.ndindex(self.values.shape):
            yield tuple(i - r for i in idx), complex(self.values[idx])

    def resize(self, radius: int) -> "CoeffLattice":
        """Crop to, or zero-pad up to, a new radius."""
        r = self.radius
        if radius == r:
            return self
        d = self.dimension
        if radius < r:
            sl = (slice(r - radius, r + radius + 1),) * d
            return CoeffLattice(self.values[sl])
        arr = np.zeros((2 * radius + 1,) * d, dtype=complex)
        sl = (slice(radius - r, radius + r + 1),) * d
        arr[sl] = self.values
        return CoeffLattice(arr)

    def reflect(self) -> "CoeffLattice":
        """l -> a(-l)."""
        return CoeffLattice(self.values[(slice(None, None, -1),) * self.dimension])

    def conj(self) -> "CoeffLattice":
        return CoeffLattice(np.conj(self.values))

    def scale(self, factor: complex) -> "CoeffLattice":
        return CoeffLattice(self.values * factor)

    def __add__(self, other: "CoeffLattice") -> "CoeffLattice":
        _check_dims(self, other)
        r = max(self.radius, other.radius)
        return CoeffLattice(self.resize(r).values + other.resize(r).values)

    def __sub__(self, other: "CoeffLattice") -> "CoeffLattice":
        return self + other.scale(-1)

    def max_abs_diff(self, other: "CoeffLattice") -> float:
        _check_dims(self, other)
        r = max(self.radius, other.radius)
        return float(np.max(np.abs(self.resize(r).values - other.resize(r).values)))

    def axis_section(self, axis: int = 0) -> "CoeffLattice":
        """1D cross-section through the origin along ``axis``."""
        r = self.radius
        sl = [r] * self.dimension
        sl[axis] = slice(None)
        return CoeffLattice(self.values[tuple(sl)])

    def nonzero_count(self, floor: float = 0.0) -> int:
        return int(np.count_nonzero(np.abs(self.values) > floor))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        rows = [[*idx, val.real, val.imag] for idx, val in self.items()]
        return {"dimension": self.dimension, "radius": self.radius, "values": rows}

    @classmethod
    def from_dict(cls, data: dict) -> "CoeffLattice":
        d, r = int(data["dimension"]), int(data["radius"])
        arr = np.zeros((2 * r + 1,) * d, dtype=complex)
        for row in data["values"]:
            idx = tuple(int(i) + r for i in row[:d])
            arr[idx] = complex(row[d], row[d + 1])
        return cls(arr)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CoeffLattice":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"i{k + 1}" for k in range(self.dimension)] + ["re", "im"])
        for idx, val in self.items():
            writer.writerow([*idx, repr(val.real), repr(val.imag)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CoeffLattice":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        d = len(header) - 2
        idx = [tuple(int(v) for v in row[:d]) for row in body]
        r = max(max(abs(i) for i in ix) for ix in idx)
        return cls.from_mapping(d, r, {ix: complex(float(row[d]), float(row[d + 1])) for ix, row in zip(idx, body)})


def _check_dims(a: CoeffLattice, b: CoeffLattice):
    if a.dimension != b.dimension:
        raise ValueError(f"dimension mismatch: {a.dimension} vs {b.dimension}")


def convolve(a: CoeffLattice, b: CoeffLattice) -> CoeffLattice:
    """Discrete convolution (a*b)(l) = sum_n a(n) b(l-n); result radius is the sum of radii."""
    _check_dims(a, b)
    return CoeffLattice(signal.convolve(a.values, b.values, method="direct"))


def check_hermitian_symmetry(a: CoeffLattice, tol: float = 0.0) -> bool:
    """True iff |a(-l) - conj(a(l))| <= tol over the whole window."""
    diff = np.abs(a.reflect().values - np.conj(a.values))
    return bool(np.all(diff <= tol))


def lp_norm(a: CoeffLattice, p: float = 2) -> float:
    if p == 1:
        return float(np.sum(np.abs(a.values)))
    if p == 2:
        mags = np.abs(a.values)
        top = float(np.max(mags))
        if top == 0:
            return 0.0
        # scale by the largest entry so tiny coefficients do not underflow when squared
        return top * float(np.sqrt(np.sum((mags / top) ** 2)))
    if p == math.inf:
        return float(np.max(np.abs(a.values)))
    raise ValueError(f"unsupported p={p!r}; use 1, 2 or inf")


# -- summability ----------------------------------------------------------


@dataclass(frozen=True)
class SummabilityReport:
    """Partial l1 / squared-l2 sums against window radius plus a decay fit.

    ``l2_partial_sums`` holds sums of |a_l|^2 (squared norms).
    """

    l1_partial_sums: list
    l2_partial_sums: list
    decay_exponent_estimate: float
    verdict: str
    decay_class: str | None = None
    fit_residual: float = math.nan

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "decay_class": self.decay_class,
            "decay_exponent_estimate": self.decay_exponent_estimate,
            "fit_residual": self.fit_residual,
            "l1_partial_sums": [list(x) for x in self.l1_partial_sums],
            "l2_partial_sums": [list(x) for x in self.l2_partial_sums],
        }


BLOWUP = 1e6
GROWTH_FACTOR = 1.5
CONV_TOL = 1e-8


def classify_partial_sums(radii, l1, l2, *, blowup=BLOWUP, growth_factor=GROWTH_FACTOR,
                          conv_tol=CONV_TOL) -> str:
    """Verdict from l1 / squared-l2 partial sums sampled at increasing radii.

    Divergent: three consecutive radius doublings each growing l1 by more than
    ``growth_factor``, or an l1 sum above ``blowup`` that is still growing.
    """
    run = 0
    for i in range(1, len(radii)):
        doubled = radii[i] >= 2 * radii[i - 1]
        if doubled and l1[i - 1] > 0 and l1[i] > growth_factor * l1[i - 1]:
            run += 1
            if run >= 3:
                return "divergent"
        else:
            run = 0
    if len(l1) >= 2 and l1[-1] > blowup and l1[-1] > l1[-2]:
        return "divergent"
    if len(l1) < 2:
        return "inconclusive"

    def settled(seq):
        return abs(seq[-1] - seq[-2]) <= conv_tol * max(1.0, abs(seq[-1]))

    if settled(l1):
        return "summable_l1"
    if settled(l2):
        return "summable_l2_only"
    return "inconclusive"


def _window_sums(a: CoeffLattice, radius: int) -> tuple[float, float]:
    w = a.resize(min(radius, a.radius)).values
    mags = np.abs(w)
    return float(mags.sum()), float((mags**2).sum())


def decay_fit(a: CoeffLattice, floor_rel: float = 1e-13) -> SummabilityReport:
    """Fit the decay of |a_l| as exponential (log|a| ~ -k l) or polynomial (~ -s log l).

    2D lattices are fitted along both axis cross-sections and the slower decay
    is reported.  Fewer than 8 usable coefficients gives ``inconclusive``.
    """
    if a.dimension > 1:
        fits = [decay_fit(a.axis_section(ax), floor_rel) for ax in range(a.dimension)]
        failed = [f for f in fits if f.decay_class is None]
        if failed:
            slowest = failed[0]
        else:
            # polynomial decay is slower than any exponential one
            slowest = min(fits, key=lambda f: (f.decay_class == "exponential", f.decay_exponent_estimate))
        radii = _doubling_radii(a.radius)
        sums = [_window_sums(a, r) for r in radii]
        return SummabilityReport(
            [(r, s[0]) for r, s in zip(radii, sums)],
            [(r, s[1]) for r, s in zip(radii, sums)],
            slowest.decay_exponent_estimate, slowest.verdict,
            slowest.decay_class, slowest.fit_residual,
        )

    r = a.radius
    radii = _doubling_radii(r)
    sums = [_window_sums(a, rr) for rr in radii]
    l1 = [(rr, s[0]) for rr, s in zip(radii, sums)]
    l2 = [(rr, s[1]) for rr, s in zip(radii, sums)]

    vals = np.abs(a.values)
    side = np.maximum(vals[r + 1:], vals[:r][::-1])
    ls = np.arange(1, r + 1)
    floor = floor_rel * (vals.max() if vals.size else 0.0)
    keep = side > max(floor, 0.0)
    if np.count_nonzero(keep) < 8:
        return SummabilityReport(l1, l2, math.nan, "inconclusive")
    x, y = ls[keep].astype(float), np.log(side[keep])

    exp_coef, exp_res = _linfit(x, y)
    pol_coef, pol_res = _linfit(np.log(x), y)
    if exp_res <= pol_res:
        rate = -exp_coef
        verdict = "summable_l1" if rate > 0 else "inconclusive"
        return SummabilityReport(l1, l2, float(rate), verdict, "exponential", float(exp_res))
    s = -pol_coef
    if s > 1:
        verdict = "summable_l1"
    elif s > 0.5:
        verdict = "summable_l2_only"
    else:
        verdict = "inconclusive"
    return SummabilityReport(l1, l2, float(s), verdict, "polynomial", float(pol_res))


def _linfit(x, y):
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return coef[0], float(np.sqrt(np.mean(resid**2)))


def _doubling_radii(r: int) -> list[int]:
    out, k = [], 1
    while k < r:
        out.append(k)
        k *= 2
    out.append(r)
    return out


def summability(source, radii: Sequence[int] = (4, 8, 16, 32, 64), **thresholds) -> SummabilityReport:
    """Partial-sum summability diagnostics.

    ``source`` is either a fixed :class:`CoeffLattice` (truncated at each
    radius) or a callable ``radius -> CoeffLattice`` that regenerates the
    sequence for every radius (e.g. a dual computed on a growing window).
    """
    radii = [int(r) for r in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    l1, l2 = [], []
    last = None
    for r in radii:
        lat = source if isinstance(source, CoeffLattice) else source(r)
        s1, s2 = _window_sums(lat, r)
        l1.append(s1)
        l2.append(s2)
        last = lat
    verdict = classify_partial_sums(radii, l1, l2, **thresholds)
    fit = decay_fit(last.resize(min(radii[-1], last.radius)))
    return SummabilityReport(
        list(zip(radii, l1)), list(zip(radii, l2)),
        fit.decay_exponent_estimate, verdict, fit.decay_class, fit.fit_residual,
    )
