"""Finite-window matrices of the biorthogonal construction and the isospectral triple.

Everything is written in phi-coordinates: a vector sum_n x_n phi_n is the
column x, indices run over [-R, R]^D in row-major order.  In these
coordinates the frame operator S_phi is the Gram matrix G, X is the
Toeplitz matrix of the dual coefficients and Y that of the direct ones.
Adjoints are taken with respect to the Gram inner product <x, y>_G = x^H G y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual import DualPair
from .errors import IndefiniteError, SymbolZeroError
from .lattice import CoeffLattice
from .models import OverlapModel
from .symbol import classify

PD_FLOOR = 1e-12


def window_indices(dimension: int, R: int) -> np.ndarray:
    axes = [np.arange(-R, R + 1)] * dimension
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


def toeplitz_from_lattice(lat: CoeffLattice, idx: np.ndarray) -> np.ndarray:
    """M[m, n] = lat(n - m) over the index list ``idx``."""
    diff = idx[None, :, :] - idx[:, None, :]
    return lat.take(diff)


def hermitian_sqrt(M: np.ndarray, inverse: bool = False) -> np.ndarray:
    """Principal (inverse) square root of a Hermitian positive definite matrix by eigh."""
    H = 0.5 * (M + M.conj().T)
    w, V = np.linalg.eigh(H)
    if w.min() < PD_FLOOR:
        raise IndefiniteError("matrix is not positive definite", min_eigenvalue=float(w.min()))
    f = w**-0.5 if inverse else np.sqrt(w)
    return (V * f) @ V.conj().T


@dataclass(frozen=True)
class FrameMatrices:
    R: int
    dimension: int
    indices: np.ndarray = field(repr=False)
    G: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    Y: np.ndarray = field(repr=False)
    min_eig_G: float = math.nan

    @property
    def X(self) -> np.ndarray:
        return self.C

    @property
    def size(self) -> int:
        return self.G.shape[0]

    def default_margin(self) -> int:
        return math.ceil(self.R / 4)

    def interior(self, margin: int) -> np.ndarray:
        return np.all(np.abs(self.indices) <= self.R - margin, axis=1)


def build_frame(model: OverlapModel, pair: DualPair, R: int) -> FrameMatrices:
    """Gram, dual and direct matrices on [-R, R]^D; the pair must reach radius 2R."""
    if min(pair.c.radius, pair.d.radius) < 2 * R:
        raise ValueError(f"dual pair radius {min(pair.c.radius, pair.d.radius)} < 2R = {2 * R}")
    verdict = classify(model.symbol())
    if verdict.status == "has_zero":
        raise SymbolZeroError("model symbol has a zero", argmin=list(verdict.argmin))
    idx = window_indices(model.dimension, R)
    G = toeplitz_from_lattice(model.lattice(max(2 * R, model.natural_radius)), idx)
    w = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    if w.min() < PD_FLOOR:
        raise IndefiniteError("Gram matrix is not positive definite", min_eigenvalue=float(w.min()))
    C = toeplitz_from_lattice(pair.c, idx)
    Y = toeplitz_from_lattice(pair.d, idx)
    return FrameMatrices(R, model.dimension, idx, G, C, Y, float(w.min()))


def _block_max(M: np.ndarray, mask: np.ndarray | None) -> float:
    if mask is not None:
        M = M[np.ix_(mask, mask)]
    return float(np.max(np.abs(M))) if M.size else 0.0


@dataclass(frozen=True)
class IdentityResiduals:
    margin: int
    interior: dict
    full_window: dict

    @property
    def residual(self) -> float:
        return max(self.interior.values())


def sop_report(f: FrameMatrices, margin: int | None = None) -> IdentityResiduals:
    """Residuals of G X = 1, X Y = 1 and S_Psi X^-1 = X S_phi.

    S_Psi = sum_n |Psi_n><Psi_n| is X X^H G in phi-coordinates.
    """
    margin = f.default_margin() if margin is None else margin
    if margin < 1:
        raise ValueError("margin must be >= 1")
    eye = np.eye(f.size)
    X, G, Y = f.X, f.G, f.Y
    s_psi = X @ X.conj().T @ G
    mats = {
        "gram_dual": G @ X - eye,
        "dual_direct": X @ Y - eye,
        "frame_relation": s_psi @ Y - X @ G,
    }
    mask = f.interior(margin)
    return IdentityResiduals(
        margin,
        {k: _block_max(v, mask) for k, v in mats.items()},
        {k: _block_max(v, None) for k, v in mats.items()},
    )


def sop_identities(f: FrameMatrices, margin: int | None = None) -> float:
    return sop_report(f, margin).residual


def make_eps(scheme: str, size: int, seed: int = 0, value: float = 1.0) -> np.ndarray:
    """Real spectra: ``linear`` (ordinal minus centre, i.e. eps_n = n in 1D),
    ``random-seeded`` (standard normal from ``seed``) or ``constant``."""
    if scheme == "linear":
        return np.arange(size, dtype=float) - (size - 1) / 2
    if scheme == "random-seeded":
        return np.random.default_rng(seed).standard_normal(size)
    if scheme == "constant":
        return np.full(size, float(value))
    raise ValueError(f"unknown eps scheme {scheme!r}")


@dataclass(frozen=True)
class TripleReport:
    spectra: dict
    intertwine_residuals: dict
    interior_margin: int
    full_window_residuals: dict = field(default_factory=dict)
    hermiticity_residual: float | None = None
    max_imag: dict = field(default_factory=dict)
    h_available: bool = True

    def to_dict(self) -> dict:
        return {
            "spectra": {k: list(v) for k, v in self.spectra.items()},
            "intertwine_residuals": self.intertwine_residuals,
            "full_window_residuals": self.full_window_residuals,
            "interior_margin": self.interior_margin,
            "hermiticity_residual": self.hermiticity_residual,
            "max_imag": self.max_imag,
            "h_available": self.h_available,
        }


def _sorted_spectrum(M: np.ndarray) -> tuple[np.ndarray, float]:
    ev = np.linalg.eigvals(M)
    return np.sort(ev.real), float(np.max(np.abs(ev.imag)))


def g_adjoint(f: FrameMatrices, M: np.ndarray) -> np.ndarray:
    """Adjoint with respect to <x, y>_G: G^-1 M^H G."""
    return np.linalg.solve(f.G, M.conj().T @ f.G)


def triple_matrices(f: FrameMatrices, eps) -> dict:
    """H = diag(eps), H^dagger = G^-1 diag(eps) G and h = X^1/2 diag(eps) X^-1/2.

    ``h`` is omitted when X is not positive definite on the window.
    """
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (f.size,):
        raise ValueError(f"eps must have length {f.size}")
    D = np.diag(eps)
    out = {"H": D, "H_dagger": np.linalg.solve(f.G, D @ f.G)}
    try:
        xh = hermitian_sqrt(f.X)
        xih = hermitian_sqrt(f.X, inverse=True)
    except IndefiniteError:
        return out
    out.update(h=xh @ D @ xih, X_half=xh, X_inv_half=xih)
    return out


def build_triple(f: FrameMatrices, eps, margin: int | None = None) -> TripleReport:
    margin = f.default_margin() if margin is None else margin
    m = triple_matrices(f, eps)
    H, Hd, X = m["H"], m["H_dagger"], f.X
    mats = {"X_H_vs_Hdag_X": X @ H - Hd @ X}
    spectra, imag = {}, {}
    for key in ("H", "H_dagger"):
        spectra[key], imag[key] = _sorted_spectrum(m[key])
    herm = None
    if "h" in m:
        h = m["h"]
        g_half = hermitian_sqrt(f.G)
        xih = m["X_inv_half"]
        mats["h_Ghalf_vs_Ghalf_Hdag"] = h @ g_half - g_half @ Hd
        mats["H_Ghalf_vs_Ghalf_h"] = H @ g_half - g_half @ h
        mats["h_Xinvhalf_vs_Xinvhalf_Hdag"] = h @ xih - xih @ Hd
        mats["H_Xinvhalf_vs_Xinvhalf_h"] = H @ xih - xih @ h
        spectra["h"], imag["h"] = _sorted_spectrum(h)
        mask = f.interior(margin)
        herm = _block_max(h - g_adjoint(f, h), mask)
    mask = f.interior(margin)
    return TripleReport(
        spectra,
        {k: _block_max(v, mask) for k, v in mats.items()},
        margin,
        {k: _block_max(v, None) for k, v in mats.items()},
        herm,
        imag,
        "h" in m,
    )


def orthonormalize(f: FrameMatrices) -> np.ndarray:
    """E = X^1/2: coordinates of e_n = X^1/2 phi_n."""
    return hermitian_sqrt(f.X)


def e_gram_residual(f: FrameMatrices, margin: int | None = None) -> float:
    """Interior max |E^H G E - 1|; zero when the e_n are orthonormal."""
    margin = f.default_margin() if margin is None else margin
    E = orthonormalize(f)
    return _block_max(E.conj().T @ f.G @ E - np.eye(f.size), f.interior(margin))
