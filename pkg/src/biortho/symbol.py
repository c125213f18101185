"""Periodic symbol of an overlap lattice, its minimum modulus, and an invertibility verdict."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .lattice import CoeffLattice, check_hermitian_symmetry

TWO_PI = 2.0 * math.pi

ZERO_TOL = 1e-8
NEAR_TOL_REL = 1e-3
GRID_PER_AXIS = 256


@dataclass(frozen=True)
class SymbolFunction:
    """Truncated Fourier series sum_l a_l exp(i p.l) of a Hermitian-symmetric lattice."""

    overlaps: CoeffLattice

    def __post_init__(self):
        scale = max(1.0, float(np.max(np.abs(self.overlaps.values))))
        if not check_hermitian_symmetry(self.overlaps, 1e-10 * scale):
            raise ValueError("overlap lattice is not Hermitian-symmetric; symbol would not be real")

    @property
    def dimension(self) -> int:
        return self.overlaps.dimension

    def __call__(self, p) -> complex:
        return symbol_eval(self, p)

    def scaled(self, factor: float) -> "SymbolFunction":
        return SymbolFunction(self.overlaps.scale(factor))


def _point(p, dimension: int) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(p, dtype=float))
    if arr.shape != (dimension,):
        raise ValueError(f"point {p!r} does not have dimension {dimension}")
    return arr


def symbol_eval(s: SymbolFunction, p) -> complex:
    """Direct sum over the full window at a single point p (scalar in 1D, pair in 2D)."""
    lat = s.overlaps
    pt = _point(p, lat.dimension)
    r = lat.radius
    ks = np.arange(-r, r + 1)
    phase = np.exp(1j * np.outer(pt, ks))  # (D, 2R+1)
    out = lat.values
    for axis in range(lat.dimension):
        out = np.tensordot(phase[axis], out, axes=([0], [0]))
    return complex(out)


def grid_nodes(nodes: int, offset: float = 0.0) -> np.ndarray:
    """Equispaced nodes 2*pi*(j + offset)/nodes on [0, 2pi)."""
    return TWO_PI * (np.arange(nodes) + offset) / nodes


def evaluate_grid(s: SymbolFunction, nodes: int, offset: float = 0.0) -> np.ndarray:
    """Symbol on the tensor grid of :func:`grid_nodes`, via one inverse FFT.

    Coefficients are wrapped modulo ``nodes`` after multiplying by the offset
    phase, which is exact for a finite trigonometric sum at these nodes.
    """
    lat = s.overlaps
    d, r = lat.dimension, lat.radius
    ks = np.arange(-r, r + 1)
    vals = lat.values
    if offset:
        ph = np.exp(2j * math.pi * offset * ks / nodes)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = -1
            vals = vals * ph.reshape(shape)
    wrapped = np.zeros((nodes,) * d, dtype=complex)
    pos = np.mod(ks, nodes)
    np.add.at(wrapped, np.ix_(*([pos] * d)), vals)
    return np.fft.ifftn(wrapped) * nodes**d


@dataclass(frozen=True)
class InvertibilityVerdict:
    status: str
    min_abs: float
    argmin: tuple
    margin: float
    max_abs: float

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "min_abs": self.min_abs,
            "argmin": list(self.argmin) if len(self.argmin) > 1 else self.argmin[0],
            "margin": self.margin,
            "max_abs": self.max_abs,
        }


def _golden(f, lo: float, hi: float, tol: float) -> float:
    # bounded Brent: golden-section steps with parabolic acceleration, no bracket precondition
    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": tol})
    return float(res.x)


def find_min_abs(s: SymbolFunction, grid_per_axis: int = GRID_PER_AXIS,
                 refine_tol: float = 1e-10) -> tuple[tuple, float]:
    """Grid scan of |symbol| followed by golden-section (1D) or coordinate-descent (2D) refinement.

    The refined point replaces the grid point only if it is strictly better.
    """
    if grid_per_axis < 8:
        raise ValueError("grid_per_axis must be >= 8")
    d = s.dimension
    h = TWO_PI / grid_per_axis
    vals = np.abs(evaluate_grid(s, grid_per_axis))
    flat = int(np.argmin(vals))
    best = np.array(np.unravel_index(flat, vals.shape), dtype=float) * h
    best_val = float(vals.flat[flat])

    def fabs(x):
        return abs(symbol_eval(s, x))

    x = best.copy()
    for _ in range(50 if d > 1 else 1):
        moved = 0.0
        for axis in range(d):
            def along(t, axis=axis):
                y = x.copy()
                y[axis] = t
                return fabs(y)
            t0 = x[axis]
            t = _golden(along, t0 - h, t0 + h, refine_tol)
            if along(t) < along(t0):
                moved = max(moved, abs(t - t0))
                x[axis] = t
        if moved < refine_tol:
            break
    val = fabs(x)
    if val < best_val:
        best, best_val = x, val
    best = np.mod(best, TWO_PI)
    return tuple(float(v) for v in best), float(best_val)


def classify(s: SymbolFunction, zero_tol: float = ZERO_TOL, near_tol: float | None = None,
             grid_per_axis: int = GRID_PER_AXIS) -> InvertibilityVerdict:
    """Invertibility verdict: ``has_zero`` / ``near_singular`` / ``invertible``.

    ``near_tol`` defaults to ``1e-3 * max|symbol|``.
    """
    max_abs = float(np.max(np.abs(evaluate_grid(s, grid_per_axis))))
    if near_tol is None:
        near_tol = NEAR_TOL_REL * max_abs
    if not zero_tol < near_tol:
        raise ValueError("zero_tol must be smaller than near_tol")
    argmin, min_abs = find_min_abs(s, grid_per_axis)
    if min_abs <= zero_tol:
        status = "has_zero"
    elif min_abs <= near_tol:
        status = "near_singular"
    else:
        status = "invertible"
    margin = min_abs / max_abs if max_abs > 0 else 0.0
    return InvertibilityVerdict(status, min_abs, argmin, margin, max_abs)
