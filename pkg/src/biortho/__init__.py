"""Biorthogonal duals of unitary-orbit families from their overlap sequences."""

from .coherent import (exact_dual_2d, gram_overlap, l1_obstruction_probe, locate_zak_zero,
                       norm_bound_check, perturbative_dual, zak_gaussian)
from .dual import DualPair, build_pair, delta_residual, direct_coeffs, dual_coeffs, verify_delta
from .errors import (DivergenceError, IndefiniteError, NonConvergenceError, Refusal,
                     RefusalReason, SymbolZeroError)
from .lattice import CoeffLattice, SummabilityReport, convolve, decay_fit, lp_norm, summability
from .models import (CATALOG, OverlapModel, box_model, coherent_model, dilation_model,
                     geometric_model, io_bound, make_model)
from .pseudo_hermitian import (FrameMatrices, TripleReport, build_frame, build_triple,
                               e_gram_residual, make_eps, orthonormalize, sop_identities)
from .symbol import InvertibilityVerdict, SymbolFunction, classify, find_min_abs, symbol_eval

__version__ = "0.1.0"
