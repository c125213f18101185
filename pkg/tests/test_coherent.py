import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from biortho.coherent import (GAMMA, P0, ZAK_A, ZAK_PREFACTOR, ZakPoint, canonical_psi0,
                              coherent_table, diagonal_overlap_closed_form, exact_dual_2d,
                              extra2_residual, extra2_terms, gram_overlap, l1_obstruction_probe,
                              locate_zak_zero, neighbour_overlap_closed_form, norm_bound_check,
                              perturbative_dual, theta3, zak_gaussian, zak_gaussian_l2,
                              zak_gaussian_lattice)
from biortho.dual import delta_residual
from biortho.lattice import CoeffLattice, convolve
from biortho.errors import SymbolZeroError
from biortho.models import coherent_model, io_bound


def test_perturbative_values():
    assert perturbative_dual(2).neighbour_value == pytest.approx(-0.0432139, abs=1e-7)
    assert perturbative_dual(1).neighbour_value == pytest.approx(-0.2079, abs=1e-4)
    assert abs(perturbative_dual(30).neighbour_value) < 1e-20
    assert perturbative_dual(2).coefficients[(0, 0)] == 1


def test_gram_overlaps_golden_values():
    c = perturbative_dual(2).coefficients
    assert abs(gram_overlap(c, 2, (1, 0), (0, 0))) == pytest.approx(0.00016, abs=5e-6)
    assert abs(gram_overlap(c, 2, (0, 0), (0, 0))) == pytest.approx(0.99253, abs=5e-6)
    assert abs(gram_overlap(perturbative_dual(1).coefficients, 1, (0, 0), (0, 0))) == pytest.approx(0.827, abs=5e-4)


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_gram_overlap_closed_forms(L):
    c = perturbative_dual(L).coefficients
    off = gram_overlap(c, L, (1, 0), (0, 0))
    assert abs(off) == pytest.approx(neighbour_overlap_closed_form(L), rel=1e-12)
    diag = gram_overlap(c, L, (0, 0), (0, 0))
    assert diag.real == pytest.approx(diagonal_overlap_closed_form(L), rel=1e-12)


@pytest.mark.parametrize("L", [2, 4])
def test_sign_corrected_offdiag_differs_beyond_golden_digits(L):
    golden = math.exp(-1.5 * math.pi * L) * (2 - math.exp(-math.pi * L))
    computed = abs(gram_overlap(perturbative_dual(L).coefficients, L, (1, 0), (0, 0)))
    assert computed - golden == pytest.approx(2 * math.exp(-2.5 * math.pi * L), rel=1e-9)


def test_norm_bound():
    for L, golden in ((1, 0.691423), (2, 0.029879), (3, 0.001291)):
        nb = norm_bound_check(L)
        assert nb.bound == pytest.approx(golden, abs=1e-6)
        assert nb.holds
    assert not norm_bound_check(1).reliable
    assert norm_bound_check(2).reliable


def test_table_rows():
    rows = coherent_table((2,))
    assert rows[0]["L"] == 2
    assert set(rows[0]) == {"L", "offdiag", "diag", "bound"}


def test_exact_dual_l1_refused():
    with pytest.raises(SymbolZeroError) as exc:
        exact_dual_2d(1)
    assert exc.value.diagnostic["argmin"] == pytest.approx([math.pi, math.pi], abs=1e-6)


def test_exact_dual_l2_entry_00():
    c = exact_dual_2d(2)
    assert abs(c[(0, 0)].real - 1.0) < 4e-2
    assert abs(c[(0, 0)].real - 1.0) <= io_bound(2) ** 2


def test_exact_dual_l3_neighbour_expansion():
    # c_10 = -eps - (9 - 4 (-1)^L) eps^3 + O(eps^5) with eps = exp(-pi L / 2)
    L = 3
    eps = math.exp(-0.5 * math.pi * L)
    c = exact_dual_2d(L)
    third_order = (c[(1, 0)].real + eps) / eps ** 3
    assert third_order == pytest.approx(-(9 - 4 * (-1) ** L), rel=0.01)
    assert abs(c[(1, 0)].real / -eps - 1) < 2e-3


def neumann_dual(L, radius, terms=40):
    # 1/(1 + K) = sum (-K)^j, K the off-centre overlaps; convolution only, no quadrature
    lat = coherent_model(L).lattice(radius)
    K = lat - CoeffLattice.delta(2, radius)
    total = CoeffLattice.delta(2, radius)
    power = CoeffLattice.delta(2, radius)
    for _ in range(terms):
        power = convolve(power, K.scale(-1)).resize(radius)
        total = total + power
    return total


@pytest.mark.parametrize("L", [2, 3])
def test_exact_dual_matches_neumann_series(L):
    c = exact_dual_2d(L, 4)
    assert c.max_abs_diff(neumann_dual(L, 10).resize(4)) < 1e-10


def test_exact_dual_l4_residual():
    c = exact_dual_2d(4, 6)
    res, _ = delta_residual(c, coherent_model(4).lattice(6), 3)
    assert res < 1e-6


def test_exact_dual_symmetry():
    c = exact_dual_2d(2)
    for s in GAMMA:
        assert c[s].real == pytest.approx(c[(1, 0)].real, abs=1e-12)


def test_theta3_series():
    t = math.exp(-math.pi)
    assert theta3(0) == pytest.approx(1 + 2 * t + 2 * t ** 4 + 2 * t ** 9, rel=1e-14)
    # zero of theta3 in the nome exp(-pi) at z = pi/2 + i pi/2
    assert abs(theta3(complex(math.pi / 2, math.pi / 2))) < 1e-14


def test_theta3_against_50_terms():
    t = math.exp(-math.pi)
    z = complex(0.3, 0.7)
    ref = 1 + sum(2 * t ** (n * n) * np.cos(2 * n * z) for n in range(1, 51))
    assert theta3(z) == pytest.approx(ref, rel=1e-14)


def test_zak_gaussian_at_origin():
    assert ZAK_PREFACTOR == pytest.approx(math.sqrt(1 / (math.sqrt(2) * math.pi)), rel=1e-15)
    assert ZAK_PREFACTOR == pytest.approx(0.474425, abs=1e-6)
    t = math.exp(-math.pi)
    series = 1 + sum(2 * t ** (n * n) for n in range(1, 51))
    assert series == pytest.approx(1.08644, abs=1e-5)
    assert zak_gaussian((0.0, 0.0)) == pytest.approx(ZAK_PREFACTOR * series, rel=1e-14)


def test_zak_gaussian_matches_lattice_sum():
    for k, q in ((0.0, 0.0), (0.4, 1.1), (2.0, 0.3)):
        assert zak_gaussian((k, q)) == pytest.approx(zak_gaussian_lattice(k, q, ZAK_A), abs=1e-13)


def test_zak_zero_value():
    assert abs(zak_gaussian(P0)) < 1e-10


def test_locate_zak_zero():
    z = locate_zak_zero()
    assert (z.point.k, z.point.q) == pytest.approx(P0, abs=1e-6)
    assert abs(z.value) < 1e-8
    assert len(z.basins) == 1


def test_zak_zero_is_simple():
    ts = np.linspace(0, 2 * math.pi, 64, endpoint=False)
    circle = [abs(zak_gaussian((P0[0] + 0.05 * math.cos(t), P0[1] + 0.05 * math.sin(t)))) for t in ts]
    assert min(circle) > 1e-3


def test_zak_point_validation():
    with pytest.raises(ValueError):
        ZakPoint(3.0, 0.0, ZAK_A)


@pytest.mark.parametrize("case,verdict", [("box_a2", "divergent"), ("coherent_L1", "divergent"),
                                          ("box_a1.99", "summable_l1")])
def test_obstruction_probe(case, verdict):
    probe = l1_obstruction_probe(case)
    assert probe.verdict == verdict
    if verdict == "divergent":
        s1 = [row[2] for row in probe.rows]
        assert all(b > a for a, b in zip(s1, s1[1:]))


def test_extra2_candidates():
    assert extra2_residual(canonical_psi0) < 1e-12
    assert extra2_residual(lambda k, q: np.zeros_like(k)) == pytest.approx(0.5)
    cand = lambda k, q: 1 / (4 * np.conj(zak_gaussian_l2(k, q)))
    assert extra2_residual(cand) < 1e-6


def test_extra2_linearity():
    base = extra2_terms(canonical_psi0, 16)
    doubled = extra2_terms(lambda k, q: 2 * canonical_psi0(k, q), 16)
    assert np.max(np.abs(doubled - 2 * base)) < 1e-14
    assert np.max(np.abs(np.abs(doubled - 0.5) - np.abs(2 * base - 0.5))) < 1e-14


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_theta3_even(x, y):
    z = complex(x, y)
    assert theta3(-z) == pytest.approx(theta3(z), rel=1e-12, abs=1e-14)
