import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import opnorm, random_hermitian, random_matrix
from opderiv import torus
from opderiv.config import AnalysisConfig
from opderiv.derivatives import (Status, classify_growth, default_sweep, higher_derivative, n_norm,
                                 weak_derivative, wncg_norm)
from opderiv.errors import NotDifferentiableError, ValidationError
from opderiv.spectral import SelfAdjointModel, abs_operator


def _finite(seed, n=6, scale=2.0):
    rng = np.random.default_rng(seed)
    return SelfAdjointModel.hermitian(random_hermitian(rng, n, scale)), rng


# classify_growth ------------------------------------------------------------

def test_constant_curve_is_bounded():
    v = classify_growth([(5, 1.0), (10, 1.0), (20, 1.0), (40, 1.0)])
    assert v.status is Status.BOUNDED and v.norm_estimate == 1.0


def test_power_law_curve_is_unbounded():
    ns = [64, 128, 256, 512]
    v = classify_growth([(n, n ** 0.25) for n in ns])
    assert v.status is Status.UNBOUNDED
    assert v.growth_exponent == pytest.approx(0.25, abs=1e-12)


def test_saturating_curve_is_bounded():
    ns = [64, 128, 256, 512]
    assert classify_growth([(n, 1 - 1 / n) for n in ns]).status is Status.BOUNDED


def test_middle_band_is_inconclusive():
    ns = [64, 128, 256, 512]
    assert classify_growth([(n, n ** 0.05) for n in ns]).status is Status.INCONCLUSIVE


def test_too_few_points():
    with pytest.raises(ValidationError):
        classify_growth([(1, 1.0), (2, 1.0), (3, 1.0)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1e6), min_size=4, max_size=10))
def test_curve_is_made_monotone(values):
    v = classify_growth(list(zip(range(1, len(values) + 1), values)))
    ys = [y for _, y in v.curve]
    assert all(b >= a for a, b in zip(ys, ys[1:]))


# weak derivative ------------------------------------------------------------

def test_function_of_D_has_zero_derivative():
    D, _ = _finite(0)
    d = D.matrix()
    v, wd = weak_derivative(D, d @ d - 3 * d + np.eye(6))
    assert v.bounded
    assert opnorm(wd) <= 1e-10


def test_finite_derivative_is_commutator(rng):
    D, rng = _finite(1)
    a = random_matrix(rng, 6)
    v, wd = weak_derivative(D, a)
    d = D.matrix()
    np.testing.assert_allclose(wd, d @ a - a @ d, atol=1e-12)
    assert v.norm_estimate == pytest.approx(opnorm(d @ a - a @ d), rel=1e-12)


def test_circle_absx_is_bounded_with_sign_derivative():
    L = 128
    D = torus.torus_D(L)
    v, wd = weak_derivative(D, torus.toeplitz(torus.absx(), L))
    assert v.status is Status.BOUNDED
    # inside the largest window the derivative is (1/i) M_sign entrywise
    n = v.window
    idx = np.arange(1 - n, n + 1) + L
    expect = torus.toeplitz(torus.sign(), L) / 1j
    assert np.max(np.abs(wd[np.ix_(idx, idx)] - expect[np.ix_(idx, idx)])) <= 1e-15


def test_circle_powerlaw_is_unbounded_with_oracle_exponent():
    L = 512
    v, wd = weak_derivative(torus.torus_D(L), torus.toeplitz(torus.powerlaw_unbounded(), L))
    assert wd is None
    assert v.status is Status.UNBOUNDED
    # brute-force operator-norm slope is 0.7500 (see the decisions notes); the
    # column l2 mass alone would give 1/4
    assert v.growth_exponent == pytest.approx(0.75, abs=0.01)


def test_default_sweep():
    assert default_sweep(torus.torus_D(512)) == (64, 128, 256, 512)
    with pytest.raises(ValidationError):
        default_sweep(SelfAdjointModel.diagonal([1.0]))


def test_sweep_must_increase():
    with pytest.raises(ValidationError):
        weak_derivative(torus.torus_D(16), np.eye(33), sweep=[8, 4, 2, 1])


# chains and norms -----------------------------------------------------------

def test_finite_chain_matches_iterated_commutator():
    D, rng = _finite(2)
    a = random_matrix(rng, 6)
    chain = higher_derivative(D, a, 3)
    assert chain.complete
    d = D.matrix()
    term = a
    for j in range(1, 4):
        term = d @ term - term @ d
        np.testing.assert_allclose(chain.terms[j], term, atol=1e-9 * max(1, opnorm(term)))


def test_antiderivative_chain_is_bounded_twice():
    L = 256
    D = torus.torus_D(L)
    chain = higher_derivative(D, torus.toeplitz(torus.antiderivative_smooth(), L), 2)
    assert [v.status for v in chain.verdicts] == [Status.BOUNDED, Status.BOUNDED]
    # wD(M_g) = (1/i) M_{|x| - pi/2}, wD^2(M_g) = -M_sign, on the innermost window
    n = chain.verdicts[0].window
    m = chain.verdicts[1].window
    idx = np.arange(1 - min(n, m), min(n, m) + 1) + L
    ix = np.ix_(idx, idx)
    shifted = torus.toeplitz(torus.absx(), L) - np.pi / 2 * np.eye(2 * L + 1)
    np.testing.assert_allclose(chain.terms[1][ix], (shifted / 1j)[ix], atol=1e-15)
    np.testing.assert_allclose(chain.terms[2][ix], -torus.toeplitz(torus.sign(), L)[ix], atol=1e-15)


def test_absx_second_derivative_is_unbounded():
    L = 256
    chain = higher_derivative(torus.torus_D(L), torus.toeplitz(torus.absx(), L), 2)
    assert chain.verdicts[0].bounded
    assert chain.verdicts[1].status is Status.UNBOUNDED
    assert chain.bounded_through() == 1
    # brute-force: order-2 truncation norms grow linearly (20.37, 40.74, 81.49 at 32, 64, 128)
    assert chain.verdicts[1].growth_exponent == pytest.approx(1.0, abs=0.02)
    with pytest.raises(NotDifferentiableError):
        n_norm(chain, 2)


def test_n_norm_of_identity():
    D, _ = _finite(3)
    for n in (1, 2, 5):
        assert n_norm(higher_derivative(D, np.eye(6), n)) == pytest.approx(1.0, abs=1e-12)


def test_n_norm_of_commuting_operator():
    D, _ = _finite(4)
    a = D.matrix() @ D.matrix()
    assert n_norm(higher_derivative(D, a, 2)) == pytest.approx(opnorm(a), abs=1e-9)


def test_n_norm_order_cap():
    D, _ = _finite(5)
    with pytest.raises(ValidationError):
        n_norm(higher_derivative(D, np.eye(6), 21))


def test_wncg_norm_examples():
    D, rng = _finite(6)
    assert wncg_norm(D, np.eye(6), 1) == pytest.approx(1.0, abs=1e-12)
    a = random_matrix(rng, 6)
    d = D.matrix()
    ad = abs_operator(D).matrix()
    expect = opnorm(d @ a - a @ d) + opnorm(a) + opnorm(ad @ a - a @ ad)
    assert wncg_norm(D, a, 1) == pytest.approx(expect, rel=1e-9)


def test_circle_abs_commutator_of_absx_is_bounded():
    L = 512
    chain = higher_derivative(abs_operator(torus.torus_D(L)), torus.toeplitz(torus.absx(), L), 1)
    v = chain.verdicts[0]
    assert v.status is Status.BOUNDED
    # brute-force |D|-commutator norms: 1.2803, 1.2911, 1.2994, 1.3057 at windows 64..512
    assert v.norm_estimate == pytest.approx(1.3057, abs=5e-4)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), alpha=st.complex_numbers(max_magnitude=5, allow_nan=False))
def test_linearity(seed, alpha):
    D, rng = _finite(seed, 5)
    a, b = random_matrix(rng, 5), random_matrix(rng, 5)
    lhs = weak_derivative(D, alpha * a + b)[1]
    rhs = alpha * weak_derivative(D, a)[1] + weak_derivative(D, b)[1]
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs))) * 10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_n2_submultiplicative(seed):
    D, rng = _finite(seed, 5, 1.0)
    a, b = random_matrix(rng, 5), random_matrix(rng, 5)
    na = n_norm(higher_derivative(D, a, 2))
    nb = n_norm(higher_derivative(D, b, 2))
    assert n_norm(higher_derivative(D, a @ b, 2)) <= na * nb + 1e-10


def test_chain_json():
    D, rng = _finite(7)
    js = higher_derivative(D, random_matrix(rng, 6), 2).to_json()
    assert js["order"] == 2 and len(js["term_norms"]) == 3
    assert math.isfinite(js["term_norms"][2])
