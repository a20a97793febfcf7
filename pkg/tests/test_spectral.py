import warnings
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings

import oracles
from conftest import EX2_MATRIX, square_matrices
from walkcount import checks
from walkcount.errors import InputError
from walkcount.regex import compile_regex
from walkcount.spectral import (
    decompose,
    dominant_term,
    eigenvector_factorization,
    jordan_chevalley_split,
    power_expansion,
    residue_polynomials,
    snap_rational,
    spectral_projector_poly,
    structure_closed_form,
)

E2 = [[1, 0, F(1, 8), F(-1, 16)], [0, 1, 0, 0], [0, 0, F(1, 2), F(1, 4)], [0, 0, 1, F(1, 2)]]
E_MINUS2 = [[0, 0, F(-1, 8), F(1, 16)], [0, 0, 0, 0], [0, 0, F(1, 2), F(-1, 4)], [0, 0, -1, F(1, 2)]]


@pytest.fixture
def dec2():
    return decompose(np.array(EX2_MATRIX))


def test_worked_projectors_exact(dec2):
    assert dec2.exact_projectors is not None
    assert dec2.exact_projectors[0] == E2
    assert dec2.exact_projectors[1] == E_MINUS2
    assert [(r.value, r.multiplicity, r.index) for r in dec2.spectrum] == [(2, 3, 2), (-2, 1, 1)]


def test_polynomial_route_agrees(dec2):
    poly = spectral_projector_poly(np.array(EX2_MATRIX), dec2.spectrum)
    for (_, E), P in zip(dec2, poly):
        assert np.allclose(E, P, atol=1e-12)


def test_snap_rational():
    assert snap_rational([[0.5, 1 / 3]]) == [[F(1, 2), F(1, 3)]]
    # no fraction with denominator <= 2^16 lies within 1e-9 of 1/131074
    assert snap_rational([[1 / 131074]]) is None
    assert snap_rational([[1j]]) is None


def test_jordan_chevalley(dec2):
    A_D, A_N = jordan_chevalley_split(EX2_MATRIX, dec2)
    assert np.allclose(A_D + A_N, EX2_MATRIX)
    assert np.allclose(np.linalg.matrix_power(A_N, 4), 0)
    assert np.allclose(A_D @ A_N, A_N @ A_D)


def test_non_integer_needs_spectrum():
    with pytest.raises(InputError):
        decompose(np.array([[0.5]]))


@settings(max_examples=40, deadline=None)
@given(square_matrices(max_n=5))
def test_projector_axioms_random(M):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results = checks.projector_checks(M, decompose(np.array(M)))
    failed = [c.line() for c in results if not c.passed]
    assert not failed


@settings(max_examples=40, deadline=None)
@given(square_matrices(max_n=5))
def test_power_expansion_matches_exact_powers(M):
    cf = power_expansion(M, decompose(np.array(M)))
    for n in range(10):
        exact = np.array(oracles.int_power(M, n), dtype=float)
        assert np.max(np.abs(cf.evaluate(n) - exact)) <= 1e-8 * max(1.0, np.max(np.abs(exact)))


def test_scalar_closed_form_worked_regex():
    sys = compile_regex("a*ba*b(a|b)*")
    scf = structure_closed_form(sys)
    assert np.allclose(scf.polynomial(2), [1], atol=1e-9)
    assert np.allclose(scf.polynomial(1), [-1, -1], atol=1e-9)
    assert all(scf.count(m) == 2**m - m - 1 for m in range(1, 31))


def test_finite_language_closed_form():
    sys = compile_regex("ab|ba|a")
    scf = structure_closed_form(sys)
    assert [scf.count(m) for m in range(5)] == [0, 1, 2, 0, 0]


def test_dominant_term_worked(dec2):
    dom = dominant_term(EX2_MATRIX, dec2)
    assert (dom.rho, dom.nu, dom.T) == (2.0, 2, (2,))
    expected = np.zeros((4, 4))
    expected[0] = [0, 1, 0.5, 0.25]
    assert np.allclose(dom.E_hat[0], expected, atol=1e-12)
    pairs = eigenvector_factorization(dom.E_hat[0], EX2_MATRIX, 2)
    assert len(pairs) == 1
    r, l = pairs[0]
    assert np.allclose(r, [1, 0, 0, 0]) and np.allclose(l, [0, 1, 0.5, 0.25])


def test_dominant_term_residual_decays(dec2):
    dom = dominant_term(EX2_MATRIX, dec2)
    res = [dom.residual(EX2_MATRIX, n) for n in (20, 40, 80, 160)]
    assert all(b < a for a, b in zip(res, res[1:]))
    # the correction is (I + ...)/n in the index-2 direction
    assert res[-1] < 0.02


def test_nilpotent_has_no_dominant_term():
    A = [[0, 1], [0, 0]]
    with pytest.raises(InputError):
        dominant_term(A, decompose(np.array(A)))


def test_residue_polynomials_worked(dec2):
    rp = residue_polynomials(EX2_MATRIX, dec2)
    assert rp.P == 2
    A = np.array(EX2_MATRIX, dtype=float)
    half_hat = 0.5 * (A - 2 * np.eye(4)) @ np.array(E2, dtype=float)
    S0 = lambda x: half_hat * x + np.array(E2, dtype=float) + np.array(E_MINUS2, dtype=float)
    S1 = lambda x: half_hat * x + np.array(E2, dtype=float) - np.array(E_MINUS2, dtype=float)
    for x in (0, 1, 5, 10):
        assert np.allclose(rp.evaluate(0, x), S0(x))
        assert np.allclose(rp.evaluate(1, x), S1(x))
    for n in range(12):
        exact = np.array(oracles.int_power(EX2_MATRIX, n), dtype=float) / 2**n
        assert np.allclose(rp.evaluate(n % 2, n), exact)


@settings(max_examples=30, deadline=None)
@given(square_matrices(max_n=4, high=2))
def test_residue_polynomials_reproduce_powers(M):
    dec = decompose(np.array(M))
    if all(r.value == 0 for r in dec.spectrum):
        return
    rp = residue_polynomials(M, dec)
    # with only dominant terms kept, the difference must shrink as n grows
    errs = []
    for n in (30, 60):
        exact = np.array(oracles.int_power(M, n), dtype=float) / rp.rho**n
        errs.append(np.max(np.abs(rp.evaluate(n % rp.P, n) - exact)))
    assert errs[1] <= max(errs[0], 1e-8)


def test_dominant_residual_is_exactly_two_over_n(dec2):
    # for even n, A^n / (n 2^(n-1)) - E_hat = (2/n)(E_2 + E_-2) = (2/n) I
    dom = dominant_term(EX2_MATRIX, dec2)
    for n in (10, 60, 200):
        assert dom.residual(EX2_MATRIX, n) == pytest.approx(2 / n, rel=1e-12)
