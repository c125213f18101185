"""Coherent-state lattices: perturbative and exact 2D duals, Gram checks, kq-representation.

Lattice states are phi_n = T1^n1 T2^n2 phi_0 with a^2 = 2 pi L, overlaps
I_n = (-1)^(L n1 n2) exp(-pi L |n|^2 / 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dual import dual_coeffs, forced_dual_coeffs
from .lattice import CoeffLattice, as_index, classify_partial_sums, convolve, lp_norm
from .models import box_model, coherent_model, coherent_overlap
from .symbol import SymbolFunction

GAMMA = ((1, 0), (-1, 0), (0, 1), (0, -1))

ZAK_A = math.sqrt(2 * math.pi)  # lattice constant for L = 1
THETA_NOME = math.exp(-math.pi)
P0 = (math.sqrt(math.pi / 2), math.sqrt(math.pi / 2))


# -- perturbative dual ----------------------------------------------------


@dataclass(frozen=True)
class PerturbativeDual:
    """First-order dual: c_0 = 1, c_s = -exp(-pi L / 2) on the four nearest neighbours."""

    L: int
    coefficients: CoeffLattice
    order: int = 1

    @property
    def neighbour_value(self) -> float:
        return self.coefficients[(1, 0)].real


def perturbative_dual(L: int) -> PerturbativeDual:
    eps = math.exp(-0.5 * math.pi * L)
    mapping = {(0, 0): 1.0}
    mapping.update({s: -eps for s in GAMMA})
    return PerturbativeDual(int(L), CoeffLattice.from_mapping(2, 1, mapping))


def gram_overlap(c: CoeffLattice, L: int, m, n, radius: int | None = None) -> complex:
    """<Psi_m, phi_n> = sum_k conj(c_k) I_{k+m-n} for Psi_0 = sum_k c_k phi_k."""
    m, n = as_index(m, 2), as_index(n, 2)
    lat = c if radius is None else c.resize(radius)
    shift = (m[0] - n[0], m[1] - n[1])
    total = 0j
    for k, ck in lat.items():
        if ck != 0:
            total += np.conj(ck) * coherent_overlap(L, k[0] + shift[0], k[1] + shift[1])
    return complex(total)


def neighbour_overlap_closed_form(L: int) -> float:
    """|<Psi_(1,0), phi_0>| for the perturbative dual, summed exactly.

    Equals exp(-3 pi L/2) (2 + (-1)^L exp(-pi L)); the sign of the correction
    depends on the parity of L through the (1, +-1) overlaps.
    """
    eps2 = math.exp(-math.pi * L)
    return math.exp(-1.5 * math.pi * L) * (2 + (-1) ** L * eps2)


def diagonal_overlap_closed_form(L: int) -> float:
    return 1 - 4 * math.exp(-math.pi * L)


def gamma_mask(value: float) -> CoeffLattice:
    return CoeffLattice.from_mapping(2, 1, {s: value for s in GAMMA})


@dataclass(frozen=True)
class NormBound:
    L: int
    bound: float
    l1_residual: float

    @property
    def holds(self) -> bool:
        return self.l1_residual <= self.bound * (1 + 1e-12)

    @property
    def reliable(self) -> bool:
        # the first-order inverse is only useful when the defect is small
        return self.bound < 0.1


def norm_bound_check(L: int) -> NormBound:
    """Compare 16 exp(-pi L) with ||(1 - eps K)(1 + eps K) - 1||_l1, K the neighbour mask.

    For commuting unitaries the l1 norm of the coefficient sequence bounds the
    operator norm.
    """
    eps = math.exp(-0.5 * math.pi * L)
    delta = CoeffLattice.delta(2, 1)
    approx_x = delta + gamma_mask(-eps)
    approx_y = delta + gamma_mask(eps)
    defect = convolve(approx_x, approx_y) - CoeffLattice.delta(2, 2)
    return NormBound(int(L), 16 * math.exp(-math.pi * L), lp_norm(defect, 1))


def exact_dual_2d(L: int, out_radius: int = 6, tol: float = 1e-10) -> CoeffLattice:
    """Quadrature inversion of the coherent symbol; refuses when L = 1 (symbol zero)."""
    return dual_coeffs(coherent_model(L).symbol(), out_radius, tol)


def coherent_table(Ls=(1, 2, 3, 4)) -> list[dict]:
    """Rows (L, offdiag, diag, bound) from the perturbative dual by direct summation."""
    rows = []
    for L in Ls:
        c = perturbative_dual(L).coefficients
        rows.append({
            "L": int(L),
            "offdiag": abs(gram_overlap(c, L, (1, 0), (0, 0))),
            "diag": abs(gram_overlap(c, L, (0, 0), (0, 0))),
            "bound": norm_bound_check(L).bound,
        })
    return rows


# -- kq representation ----------------------------------------------------


@dataclass(frozen=True)
class ZakPoint:
    k: float
    q: float
    a: float = ZAK_A

    def __post_init__(self):
        if not (0 <= self.k < self.a and 0 <= self.q < self.a):
            raise ValueError(f"({self.k}, {self.q}) outside [0, {self.a})^2")


def theta3(z: complex, t: float = THETA_NOME, tail_tol: float = 1e-18) -> complex:
    """theta_3(z, t) = 1 + 2 sum_{n>=1} t^(n^2) cos(2 n z).

    Terms are added until 2 t^(n^2) cosh(2 n |Im z|), a bound on the next
    term, drops below ``tail_tol``.
    """
    total = 1.0 + 0j
    y = abs(complex(z).imag)
    n = 1
    while True:
        total += 2 * t ** (n * n) * np.cos(2 * n * z)
        n += 1
        if 2 * t ** (n * n) * math.cosh(2 * n * y) < tail_tol:
            return complex(total)


def theta3_prime(z: complex, t: float = THETA_NOME, terms: int = 12) -> complex:
    return complex(sum(-4 * n * t ** (n * n) * np.sin(2 * n * z) for n in range(1, terms)))


ZAK_PREFACTOR = math.sqrt(1 / (math.sqrt(2) * math.pi))


def zak_gaussian(p, tail_tol: float = 1e-18) -> complex:
    """kq-representation of the oscillator ground state for a = sqrt(2 pi)."""
    k, q = (p.k, p.q) if isinstance(p, ZakPoint) else p
    z = math.sqrt(math.pi / 2) * (k - 1j * q)
    return ZAK_PREFACTOR * math.exp(-q * q / 2) * theta3(z, THETA_NOME, tail_tol)


def zak_gaussian_lattice(k, q, a: float, terms: int = 30):
    """Direct sum a^-1/2 pi^-1/4 sum_n exp(i k n a) g(q - n a), g(x) = exp(-x^2/2).

    Works for any lattice constant and vectorises over k, q.
    """
    k, q = np.asarray(k, dtype=float), np.asarray(q, dtype=float)
    total = np.zeros(np.broadcast(k, q).shape, dtype=complex)
    for n in range(-terms, terms + 1):
        total += np.exp(1j * k * n * a) * np.exp(-0.5 * (q - n * a) ** 2)
    return total / (math.sqrt(a) * math.pi**0.25)


@dataclass(frozen=True)
class ZakZero:
    point: ZakPoint
    value: float
    basins: list = field(default_factory=list)


def _newton_theta_zero(z: complex, tol: float, max_iter: int = 60) -> complex:
    for _ in range(max_iter):
        step = theta3(z) / theta3_prime(z)
        z -= step
        if abs(step) < tol:
            break
    return z


def locate_zak_zero(grid: int = 64, refine_tol: float = 1e-12, threshold: float = 0.05) -> ZakZero:
    """Find the zeros of |zak_gaussian| in [0, a)^2.

    Grid local minima (with periodic wrap, |Z| being periodic in both
    variables) below ``threshold`` are refined by Newton's method on theta_3
    and deduplicated.  The deepest one is returned as ``point``.
    """
    if grid < 32:
        raise ValueError("grid must be >= 32")
    a = ZAK_A
    ks = (np.arange(grid) + 0.5) * a / grid
    K, Q = np.meshgrid(ks, ks, indexing="ij")
    mags = np.abs(zak_gaussian_lattice(K, Q, a))
    is_min = np.ones_like(mags, dtype=bool)
    for dk in (-1, 0, 1):
        for dq in (-1, 0, 1):
            if dk or dq:
                is_min &= mags <= np.roll(np.roll(mags, dk, 0), dq, 1)
    candidates = np.argwhere(is_min & (mags < threshold))
    scale = math.sqrt(math.pi / 2)
    basins = []
    for i, j in candidates:
        z = _newton_theta_zero(scale * (ks[i] - 1j * ks[j]), refine_tol)
        k = float(np.mod(z.real / scale, a))
        q = float(np.mod(-z.imag / scale, a))
        val = abs(zak_gaussian((k, q)))
        if not any(abs(k - b.k) < 1e-6 and abs(q - b.q) < 1e-6 for b, _ in basins):
            basins.append((ZakPoint(k, q), val))
    if not basins:
        raise RuntimeError("no zero candidate found on the grid")
    best, val = min(basins, key=lambda bv: bv[1])
    return ZakZero(best, val, basins)


# -- obstruction probes ---------------------------------------------------


@dataclass(frozen=True)
class ObstructionProbe:
    case: str
    rows: list  # (nodes per axis, radius, l1 partial sum, l2 squared partial sum)
    verdict: str

    def to_dict(self) -> dict:
        return {
            "case": self.case,
            "verdict": self.verdict,
            "rows": [{"nodes": n, "radius": r, "l1": s1, "l2_squared": s2} for n, r, s1, s2 in self.rows],
        }


PROBE_CASES: dict[str, Callable[[], SymbolFunction]] = {
    "box_a2": lambda: box_model(2.0).symbol(),
    "box_a1.99": lambda: box_model(1.99).symbol(),
    "coherent_L1": lambda: coherent_model(1).symbol(),
}


def l1_obstruction_probe(case, node_doublings: int | None = None,
                         base_nodes: int | None = None) -> ObstructionProbe:
    """Force the inversion past a zero check and watch the would-be dual's partial sums.

    At step i the grid has ``base_nodes * 2^i`` nodes per axis and the dual is
    kept on radius nodes/4.  Partial sums that keep growing across the
    doublings give a ``divergent`` verdict.  Default doublings: 7 in 1D
    (enough for a margin of 0.01 to settle), 4 in 2D.
    """
    if isinstance(case, SymbolFunction):
        name, s = "custom", case
    else:
        name, s = case, PROBE_CASES[case]()
    if node_doublings is None:
        node_doublings = 7 if s.dimension == 1 else 4
    if node_doublings < 3:
        raise ValueError("node_doublings must be >= 3")
    if base_nodes is None:
        base_nodes = 64 if s.dimension == 1 else 32
    rows = []
    for i in range(node_doublings):
        nodes = base_nodes * 2**i
        radius = nodes // 4
        c = forced_dual_coeffs(s, nodes, radius)
        mags = np.abs(c.values)
        rows.append((nodes, radius, float(mags.sum()), float((mags**2).sum())))
    verdict = classify_partial_sums([r[1] for r in rows], [r[2] for r in rows], [r[3] for r in rows])
    return ObstructionProbe(name, rows, verdict)


# -- kq condition for L = 2 -------------------------------------------------

L2_A = 2 * math.sqrt(math.pi)  # a^2 = 4 pi
L2_HALF = 2 * math.pi / L2_A


def zak_gaussian_l2(k, q):
    return zak_gaussian_lattice(k, q, L2_A)


def extra2_terms(psi0: Callable, samples: int = 64, phi0: Callable = zak_gaussian_l2):
    """phi0 conj(psi0) at (k, q) plus the same at (k, q + 2 pi/a), on a midpoint grid.

    The grid covers [0, 2 pi/a)^2 for a = 2 sqrt(pi); midpoints avoid the
    zeros of the L = 2 Gaussian.
    """
    ks = (np.arange(samples) + 0.5) * L2_HALF / samples
    K, Q = np.meshgrid(ks, ks, indexing="ij")
    Qs = Q + L2_HALF
    return phi0(K, Q) * np.conj(psi0(K, Q)) + phi0(K, Qs) * np.conj(psi0(K, Qs))


def extra2_residual(psi0: Callable, samples: int = 64, phi0: Callable = zak_gaussian_l2) -> float:
    """max |phi0 conj(psi0) + phi0 conj(psi0)(q + 2 pi/a) - 1/2| over the sample grid."""
    return float(np.max(np.abs(extra2_terms(psi0, samples, phi0) - 0.5)))


def canonical_psi0(k, q):
    """psi0 = phi0 / (2 (|phi0(k,q)|^2 + |phi0(k,q+2pi/a)|^2)), which solves the L = 2 condition."""
    k, q = np.asarray(k, dtype=float), np.asarray(q, dtype=float)
    qq = np.mod(q, L2_HALF)
    norm = np.abs(zak_gaussian_l2(k, qq)) ** 2 + np.abs(zak_gaussian_l2(k, qq + L2_HALF)) ** 2
    return zak_gaussian_l2(k, q) / (2 * norm)
