"""Acceptance suite: one test per criterion, each recording its individual checks.

The terminal summary prints one PASS/FAIL line per criterion.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biortho.cli import main
from biortho.coherent import (GAMMA, P0, coherent_table, exact_dual_2d, l1_obstruction_probe,
                              locate_zak_zero)
from biortho.dual import build_pair, delta_residual, direct_coeffs, dual_coeffs, verify_delta
from biortho.errors import RefusalReason, SymbolZeroError
from biortho.lattice import CoeffLattice, check_hermitian_symmetry, convolve, lp_norm
from biortho.models import (box_model, coherent_model, dilation_model, geometric_model, io_bound,
                            overlap_energy)
from biortho.pseudo_hermitian import build_frame, build_triple, e_gram_residual, make_eps
from biortho.symbol import SymbolFunction, find_min_abs

SQ2 = math.sqrt(2)
NOISE = 1e-12  # residuals below this are treated as converged when checking monotonicity


def non_increasing(vals, floor=NOISE):
    return all(b <= a or b < floor for a, b in zip(vals, vals[1:]))


def test_criterion_01_golden_symbol(criterion):
    (p, ), v = find_min_abs(box_model(1.5).symbol())
    criterion.check(1, abs(v - 0.5) < 1e-9 and abs(p - math.pi) < 1e-9,
                    f"box 1.5 min {v:.12g} at {p:.12g}")
    s = dilation_model().symbol()
    (p2, ), vmin = find_min_abs(s)
    vmax = s(0.0).real
    criterion.check(1, abs(vmin - 0.171573) < 1e-6, f"dilation min {vmin:.9g}")
    criterion.check(1, abs(vmax - 5.828427) < 1e-6, f"dilation max {vmax:.9g}")
    criterion.verify()


def test_criterion_02_closed_form_duals(criterion):
    for r in (0.1, 0.3, 1 / SQ2, 0.9):
        c = dual_coeffs(geometric_model(r).symbol(), 12)
        den = 1 - r * r
        exact = {0: (1 + r * r) / den, 1: -r / den, -1: -r / den}
        err = max(abs(v - exact.get(i[0], 0.0)) for i, v in c.items())
        criterion.check(2, err < 1e-10, f"r={r:.6g} max err {err:.2e}")
    c = dual_coeffs(dilation_model().symbol(), 4)
    err = max(abs(c[0] - 3), abs(c[1] + SQ2), abs(c[-1] + SQ2))
    criterion.check(2, err < 1e-10, f"dilation {{3,-sqrt2,-sqrt2}} err {err:.2e}")
    criterion.verify()


def test_criterion_03_parseval(criterion):
    c = dual_coeffs(box_model(1.5).symbol(), 40)
    n2 = lp_norm(c, 2) ** 2
    target = 12 / (5 * math.sqrt(5))
    criterion.check(3, abs(n2 - target) < 1e-6, f"box 1.5 l2^2 {n2:.12g} vs {target:.12g}")
    c2 = dual_coeffs(dilation_model().symbol())
    n2 = lp_norm(c2, 2) ** 2
    criterion.check(3, abs(n2 - 13) < 1e-10, f"dilation l2^2 {n2:.14g}")
    criterion.verify()


def test_criterion_04_convolution_identity(criterion):
    for model in (box_model(1.5), dilation_model(), geometric_model(0.5)):
        pair = build_pair(model.symbol(), 32, 32, 10)
        criterion.check(4, pair.delta_residual < 1e-8, f"{model.name} residual {pair.delta_residual:.2e}")
        seq = [verify_delta(build_pair(model.symbol(), R, R, min(10, R)), min(10, R))
               for R in (4, 8, 16, 32, 64)]
        criterion.check(4, non_increasing(seq), f"{model.name} doublings " +
                        ",".join(f"{x:.1e}" for x in seq))
    criterion.verify()


def test_criterion_05_obstruction(criterion):
    try:
        dual_coeffs(box_model(2.0).symbol())
        refused = False
    except SymbolZeroError:
        refused = True
    probe = l1_obstruction_probe("box_a2")
    criterion.check(5, refused and probe.verdict == "divergent", f"box a=2 refused={refused}, probe {probe.verdict}")
    try:
        exact_dual_2d(1)
        refused = False
    except SymbolZeroError:
        refused = True
    probe = l1_obstruction_probe("coherent_L1")
    criterion.check(5, refused and probe.verdict == "divergent",
                    f"coherent L=1 refused={refused}, probe {probe.verdict}")
    pair = build_pair(box_model(1.99).symbol(), 64, 64, 10)
    probe = l1_obstruction_probe("box_a1.99")
    criterion.check(5, pair.delta_residual < 1e-8 and probe.verdict == "summable_l1",
                    f"box a=1.99 residual {pair.delta_residual:.1e}, probe {probe.verdict}")
    criterion.verify()


def _golden(x, digits):
    return round(x, digits)


def test_criterion_06_coherent_table(criterion):
    rows = {r["L"]: r for r in coherent_table((1, 2, 3, 4))}
    for L, golden, digits in ((2, 0.00016, 5), (3, 0.000001, 6)):
        v = rows[L]["offdiag"]
        criterion.check(6, _golden(v, digits) == golden, f"offdiag L={L} {v:.6g}")
    for L, golden in ((2, 0.99253), (3, 0.99968), (4, 0.99999)):
        v = rows[L]["diag"]
        criterion.check(6, _golden(v, 5) == golden, f"diag L={L} {v:.8g}")
    for L, golden in ((2, 0.029879), (3, 0.001291)):
        v = rows[L]["bound"]
        criterion.check(6, _golden(v, 6) == golden, f"bound L={L} {v:.8g}")
    for key, golden in (("offdiag", 0.018), ("diag", 0.827), ("bound", 0.691423)):
        v = rows[1][key]
        criterion.check(6, abs(v / golden - 1) < 0.05, f"L=1 {key} {v:.6g} vs {golden}")
    criterion.verify()


def test_criterion_07_overlap_energy(criterion):
    for L, golden in ((1, 1.0883), (2, 1.00374)):
        e = overlap_energy(coherent_model(L), 6)
        criterion.check(7, abs(e - golden) < 5e-4, f"energy L={L} {e:.7g} vs {golden}")
    for L, cap in ((2, 0.18), (3, 0.03), (4, 0.007)):
        b = io_bound(L)
        criterion.check(7, b <= cap + 1e-3, f"io_bound({L}) {b:.6g} <= {cap + 1e-3:g}")
    criterion.verify()


def test_criterion_08_zak_zero(criterion):
    z = locate_zak_zero()
    err = max(abs(z.point.k - P0[0]), abs(z.point.q - P0[1]))
    criterion.check(8, err < 1e-6, f"zero at ({z.point.k:.10g}, {z.point.q:.10g}), err {err:.1e}")
    criterion.check(8, abs(z.value) < 1e-8, f"|value| {abs(z.value):.1e}")
    criterion.check(8, len(z.basins) == 1, f"{len(z.basins)} basin(s)")
    criterion.verify()


def test_criterion_09_exact_vs_perturbative(criterion):
    for L in (2, 3, 4):
        c = exact_dual_2d(L)
        eps = math.exp(-0.5 * math.pi * L)
        dev = max(abs(c[s] + eps) for s in GAMMA)
        criterion.check(9, dev <= io_bound(L) ** 2, f"L={L} Gamma dev {dev:.2e} <= {io_bound(L) ** 2:.2e}")
    pair = build_pair(coherent_model(2).symbol(), 4, 4)
    criterion.check(9, pair.delta_residual < 1e-4, f"L=2 radius 4 residual {pair.delta_residual:.1e}")
    criterion.verify()


def _frame(model, R):
    return build_frame(model, build_pair(model.symbol(), 2 * R, 2 * R), R)


def test_criterion_10_pseudo_hermitian(criterion):
    model = geometric_model(0.5)
    f = _frame(model, 15)
    margin = f.default_margin()
    rep = build_triple(f, make_eps("linear", f.size))
    target = np.arange(-15, 16)
    iso = max(float(np.max(np.abs(rep.spectra[k] - target))) for k in ("H", "H_dagger", "h"))
    criterion.check(10, iso < 1e-8, f"isospectral err {iso:.1e}")
    relations = ("X_H_vs_Hdag_X", "h_Ghalf_vs_Ghalf_Hdag", "H_Ghalf_vs_Ghalf_h")
    for key in relations:
        v = rep.intertwine_residuals[key]
        criterion.check(10, v < 1e-6, f"R=15 margin {margin} {key} {v:.1e}")
    seqs = {key: [] for key in relations}
    for R in (8, 16, 32):
        fr = _frame(model, R)
        r = build_triple(fr, make_eps("linear", fr.size)).intertwine_residuals
        for key in relations:
            seqs[key].append(r[key])
    for key, seq in seqs.items():
        criterion.check(10, non_increasing(seq), f"{key} over R=8,16,32 " + ",".join(f"{x:.1e}" for x in seq))
    eg = e_gram_residual(f)
    criterion.check(10, eg < 1e-6, f"e-Gram {eg:.1e}")
    criterion.check(10, rep.hermiticity_residual < 1e-8, f"h Hermitian {rep.hermiticity_residual:.1e}")
    criterion.verify()


@st.composite
def _lattice(draw, dimension=1, max_radius=3):
    r = draw(st.integers(0, max_radius))
    n = (2 * r + 1) ** dimension
    fl = st.floats(-5, 5, allow_nan=False)
    re = np.array(draw(st.lists(fl, min_size=n, max_size=n)))
    im = np.array(draw(st.lists(fl, min_size=n, max_size=n)))
    return CoeffLattice((re + 1j * im).reshape((2 * r + 1,) * dimension))


@st.composite
def _symbol(draw):
    r = draw(st.integers(1, 3))
    coeffs, total = {}, 0.0
    for l in range(1, r + 1):
        z = complex(draw(st.floats(-1, 1)), draw(st.floats(-1, 1)))
        coeffs[l], coeffs[-l] = z, z.conjugate()
        total += abs(z)
    coeffs[0] = 2 * total + draw(st.floats(0.2, 3))
    return SymbolFunction(CoeffLattice.from_mapping(1, r, coeffs))


def _property(criterion, name, prop):
    try:
        settings(max_examples=100, deadline=None)(prop)()
        criterion.check(11, True, f"{name} (100 cases)")
    except Exception as exc:  # record the falsifying example instead of aborting the suite
        criterion.check(11, False, f"{name}: {type(exc).__name__}")


def test_criterion_11_properties(criterion):
    @given(_lattice(), _lattice())
    def commutative(a, b):
        tol = 1e-12 * (1 + lp_norm(a, 1) * lp_norm(b, 1))
        assert convolve(a, b).max_abs_diff(convolve(b, a)) <= tol

    @given(_lattice(), _lattice(), _lattice())
    def associative(a, b, c):
        tol = 1e-12 * (1 + lp_norm(a, 1) * lp_norm(b, 1) * lp_norm(c, 1))
        assert convolve(convolve(a, b), c).max_abs_diff(convolve(a, convolve(b, c))) <= tol

    @given(_symbol())
    def hermitian(s):
        assert check_hermitian_symmetry(dual_coeffs(s, 10), 1e-12)

    @given(_symbol())
    def roundtrip(s):
        r = s.overlaps.radius + 2
        assert direct_coeffs(s, r).max_abs_diff(s.overlaps.resize(r)) < 1e-10

    @given(_symbol(), st.floats(0.1, 10))
    def scaling(s, k):
        c = dual_coeffs(s, 8)
        assert dual_coeffs(s.scaled(k), 8).max_abs_diff(c.scale(1 / k)) <= 1e-12 * max(1, lp_norm(c, math.inf) / k)

    for name, prop in (("commutativity", commutative), ("associativity", associative),
                       ("hermitian preservation", hermitian), ("d = alpha round-trip", roundtrip),
                       ("scaling linearity", scaling)):
        _property(criterion, name, prop)
    criterion.verify()


GOLDEN = [
    ["dual", "--model", "box", "--a", "1.0"],
    ["dual", "--model", "box", "--a", "1.5", "--radius", "16"],
    ["dual", "--model", "dilation", "--format", "csv"],
    ["symbol", "--model", "box", "--a", "1.5", "--format", "csv"],
    ["verify", "--model", "geometric", "--r", "0.5"],
    ["coherent", "--L", "2", "--mode", "table", "--format", "csv"],
    ["coherent", "--mode", "exact", "--L", "2"],
    ["coherent", "--mode", "zak"],
    ["coherent", "--mode", "obstruction", "--case", "box_a1.99"],
    ["spectra", "--model", "geometric", "--r", "0.5", "--R", "15"],
    ["models", "list"],
]
REFUSALS = [
    (["dual", "--model", "box", "--a", "2.0"], "has_zero"),
    (["coherent", "--mode", "exact", "--L", "1"], "has_zero"),
    (["coherent", "--mode", "obstruction", "--case", "box_a2"], "divergent"),
    (["coherent", "--mode", "obstruction", "--case", "coherent_L1"], "divergent"),
]


def test_criterion_12_cli_determinism(criterion, tmp_path):
    reasons = {r.value for r in RefusalReason}
    for i, args in enumerate(GOLDEN + [a for a, _ in REFUSALS]):
        outs = []
        for j in range(2):
            path = tmp_path / f"{i}_{j}"
            code = main(args + ["--out", str(path)])
            outs.append((code, path.read_bytes()))
        criterion.check(12, outs[0] == outs[1], f"{' '.join(args[:3])}: identical" if outs[0] == outs[1]
                        else f"{' '.join(args)} differs")
    for args, reason in REFUSALS:
        path = tmp_path / "refusal"
        code = main(args + ["--out", str(path)])
        data = json.loads(path.read_text())
        ok = code == 2 and data.get("reason") == reason and data["reason"] in reasons
        criterion.check(12, ok, f"{' '.join(args[:4])} exit {code} reason {data.get('reason')}")
    criterion.verify()
