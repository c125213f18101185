"""Dual and direct coefficients by periodic trapezoid quadrature of 1/symbol and symbol.

The trapezoid rule on N equispaced nodes gives
``c_k = N^-D sum_j f(p_j) exp(-i p_j . k)``, i.e. one forward FFT; node
counts are doubled until every returned coefficient is stable to ``tol``.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergenceError, SymbolZeroError
from .lattice import (CoeffLattice, SummabilityReport, convolve, decay_fit,  # noqa: F401
                      summability)
from .symbol import SymbolFunction, classify, evaluate_grid

log = logging.getLogger(__name__)

START_NODES = 64
MAX_NODES = {1: 2**16, 2: 2**10}
DEFAULT_TOL = {1: 1e-12, 2: 1e-10}
DEFAULT_RADIUS = {1: 32, 2: 6}


def max_nodes(dimension: int) -> int:
    cap = MAX_NODES.get(dimension, 2**8)
    env = os.environ.get("BIORTHO_MAX_NODES")
    if env:
        cap = min(cap, int(env))
    return cap


def trapezoid_coefficients(values: np.ndarray, out_radius: int, offset: float = 0.0) -> CoeffLattice:
    """Fourier coefficients |k|_inf <= out_radius from samples on the grid of ``grid_nodes``.

    The discrete sum is N-periodic in k (up to the offset phase), so any k is
    read from FFT bin ``k mod N``.
    """
    d = values.ndim
    n = values.shape[0]
    spec = np.fft.fftn(values) / n**d
    ks = np.arange(-out_radius, out_radius + 1)
    out = spec[np.ix_(*([np.mod(ks, n)] * d))]
    if offset:
        ph = np.exp(-2j * math.pi * offset * ks / n)
        for axis in range(d):
            shape = [1] * d
            shape[axis] = -1
            out = out * ph.reshape(shape)
    return CoeffLattice(out)


def _doubling_quadrature(s: SymbolFunction, integrand, out_radius: int, tol: float, what: str):
    d = s.dimension
    cap = max_nodes(d)
    nodes = START_NODES
    older = None
    prev = trapezoid_coefficients(integrand(evaluate_grid(s, nodes).real), out_radius)
    change = math.inf
    while True:
        if 2 * nodes > cap:
            iterates = [x.to_dict() for x in (older, prev) if x is not None]
            raise NonConvergenceError(
                f"{what}: no convergence to tol={tol} within {cap} nodes per axis",
                nodes=nodes, last_change=change, last_iterates=iterates,
            )
        nodes *= 2
        cur = trapezoid_coefficients(integrand(evaluate_grid(s, nodes).real), out_radius)
        change = float(np.max(np.abs(cur.values - prev.values)))
        if change < tol:
            return cur, nodes
        older, prev = prev, cur


def _defaults(s: SymbolFunction, out_radius, tol):
    d = s.dimension
    return (DEFAULT_RADIUS.get(d, 4) if out_radius is None else out_radius,
            DEFAULT_TOL.get(d, 1e-10) if tol is None else tol)


def dual_coeffs(s: SymbolFunction, out_radius: int | None = None, tol: float | None = None,
                *, return_nodes: bool = False, **classify_kw):
    """c_l = (2 pi)^-D int exp(-i p.l) / symbol(p) dp.

    Refuses with :class:`SymbolZeroError` when the symbol has a zero.
    """
    out_radius, tol = _defaults(s, out_radius, tol)
    verdict = classify(s, **classify_kw)
    if verdict.status == "has_zero":
        raise SymbolZeroError(
            "symbol has a zero; the dual sequence does not exist in l1",
            argmin=verdict.argmin[0] if s.dimension == 1 else list(verdict.argmin),
            min_abs=verdict.min_abs,
        )
    if verdict.status == "near_singular":
        log.warning("symbol is near-singular (min |symbol| = %.3g); inverting anyway", verdict.min_abs)
    c, nodes = _doubling_quadrature(s, lambda v: 1.0 / v, out_radius, tol, "dual_coeffs")
    return (c, nodes) if return_nodes else c


def direct_coeffs(s: SymbolFunction, out_radius: int | None = None, tol: float | None = None,
                  *, return_nodes: bool = False):
    """d_l = (2 pi)^-D int exp(-i p.l) symbol(p) dp; reproduces the overlaps."""
    out_radius, tol = _defaults(s, out_radius, tol)
    d, nodes = _doubling_quadrature(s, lambda v: v, out_radius, tol, "direct_coeffs")
    return (d, nodes) if return_nodes else d


def forced_dual_coeffs(s: SymbolFunction, nodes: int, out_radius: int) -> CoeffLattice:
    """Trapezoid inversion of 1/symbol on a half-step-shifted grid, with no zero check.

    Only meant for demonstrating what happens when the symbol vanishes; the
    shift keeps the nodes off the symmetric zeros at p = pi.
    """
    vals = evaluate_grid(s, nodes, offset=0.5).real
    return trapezoid_coefficients(1.0 / vals, out_radius, offset=0.5)


def delta_residual(c: CoeffLattice, d: CoeffLattice, check_radius: int) -> tuple[float, complex]:
    """max over |l|_inf <= check_radius of |(c*d)(l) - delta_l0|, together with (c*d)(0)."""
    conv = convolve(c, d)
    window = conv.resize(check_radius)
    vals = np.array(window.values)
    centre = (check_radius,) * c.dimension
    unit = complex(vals[centre])
    vals[centre] -= 1.0
    return float(np.max(np.abs(vals))), unit


def inverse_symbol_integrals(s: SymbolFunction, nodes: int = 4096) -> dict:
    """(2 pi)^-D int 1/symbol and (2 pi)^-D int 1/symbol^2 by the trapezoid rule.

    The first equals c_0; the second equals sum |c_l|^2 (Parseval).
    """
    if s.dimension > 1:
        nodes = min(nodes, 256)
    vals = evaluate_grid(s, nodes).real
    return {
        "integral_inv_symbol": float(np.mean(1.0 / vals)),
        "integral_inv_symbol_sq": float(np.mean(1.0 / vals**2)),
        "nodes": nodes,
    }


@dataclass(frozen=True)
class DualPair:
    c: CoeffLattice
    d: CoeffLattice
    delta_residual: float
    check_radius: int
    quadrature_nodes: int
    c_summability: SummabilityReport
    d_summability: SummabilityReport
    unit_sum: complex

    def to_dict(self) -> dict:
        return {
            "c": self.c.to_dict(),
            "d": self.d.to_dict(),
            "delta_residual": self.delta_residual,
            "check_radius": self.check_radius,
            "quadrature_nodes": self.quadrature_nodes,
            "unit_sum": [self.unit_sum.real, self.unit_sum.imag],
            "c_summability": self.c_summability.to_dict(),
            "d_summability": self.d_summability.to_dict(),
        }


def build_pair(s: SymbolFunction, c_radius: int | None = None, d_radius: int | None = None,
               check_radius: int | None = None, tol: float | None = None) -> DualPair:
    c_radius, tol = _defaults(s, c_radius, tol)
    d_radius = c_radius if d_radius is None else d_radius
    check_radius = min(c_radius, d_radius) if check_radius is None else check_radius
    c, nodes = dual_coeffs(s, c_radius, tol, return_nodes=True)
    d = direct_coeffs(s, d_radius, tol)
    res, unit = delta_residual(c, d, check_radius)
    return DualPair(c, d, res, check_radius, nodes, decay_fit(c), decay_fit(d), unit)


def verify_delta(pair: DualPair, check_radius: int) -> float:
    return delta_residual(pair.c, pair.d, check_radius)[0]
