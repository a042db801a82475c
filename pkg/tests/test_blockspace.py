import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hermitian, random_matrix
from opderiv import torus
from opderiv.blockspace import (adjoint, band_vector, commutator_with_D, embed_D, embed_operator,
                                form_eval, multiply, truncate)
from opderiv.errors import DecompositionMismatch, ValidationError
from opderiv.spectral import SelfAdjointModel, band_decompose


@pytest.fixture
def finite(rng):
    D = SelfAdjointModel.hermitian(random_hermitian(rng, 8, 3.0))
    return D, band_decompose(D)


def test_embed_identity_is_block_diagonal(finite):
    D, bd = finite
    y = embed_operator(np.eye(8), bd)
    for (r, c), blk in y.blocks(include_zero=True):
        expect = np.eye(bd.band_dim(r)) if r == c else np.zeros_like(blk)
        np.testing.assert_allclose(blk, expect, atol=1e-12)


def test_embed_reassemble_round_trip(finite, rng):
    _, bd = finite
    a = random_matrix(rng, 8)
    y = embed_operator(a, bd)
    np.testing.assert_allclose(y.reassemble(), a, atol=1e-10)
    for (r, c), blk in y.blocks():
        np.testing.assert_allclose(blk, bd.frame(r).conj().T @ a @ bd.frame(c), atol=1e-12)


def test_embed_D_blocks():
    bd = band_decompose(SelfAdjointModel.diagonal([0.5, 0.7, 1.2]))
    y = embed_D(bd)
    np.testing.assert_allclose(y[1, 1], np.diag([0.5, 0.7]))
    np.testing.assert_allclose(y[2, 2], [[1.2]])
    np.testing.assert_allclose(y.reassemble(), np.diag([0.5, 0.7, 1.2]))


def test_commutator_of_D_with_itself_vanishes(finite):
    _, bd = finite
    assert not np.any(commutator_with_D(embed_D(bd)).data)


def test_commutator_matches_dense(finite, rng):
    D, bd = finite
    a = random_matrix(rng, 8)
    y = commutator_with_D(embed_operator(a, bd))
    d = D.matrix()
    np.testing.assert_allclose(y.reassemble(), d @ a - a @ d, atol=1e-10)


def test_circle_commutator_entries():
    L = 6
    D = torus.torus_D(L)
    bd = band_decompose(D)
    f = torus.absx()
    y = commutator_with_D(embed_operator(torus.toeplitz(f, L), bd))
    for r in range(-L, L + 1):
        for c in range(-L, L + 1):
            assert y[r, c][0, 0] == (r - c) * f(r - c)


def test_commutator_rejects_other_decomposition(finite):
    _, bd = finite
    other = band_decompose(SelfAdjointModel.diagonal(np.arange(8.0)))
    with pytest.raises(DecompositionMismatch):
        commutator_with_D(embed_operator(np.eye(8), bd), other)


def test_adjoint_rules(finite, rng):
    D, bd = finite
    a = random_matrix(rng, 8)
    y = embed_operator(a, bd)
    assert np.array_equal(adjoint(adjoint(y)).data, y.data)
    np.testing.assert_allclose(adjoint(y).data, embed_operator(a.conj().T, bd).data, atol=1e-12)
    c = commutator_with_D(y)
    c_star = commutator_with_D(embed_operator(a.conj().T, bd))
    np.testing.assert_allclose(adjoint(c).data, -c_star.data, atol=1e-10)


def test_adjoint_circle_swaps_and_conjugates():
    bd = band_decompose(torus.torus_D(3))
    y = embed_operator(torus.toeplitz(torus.sign(), 3), bd)
    assert adjoint(y)[1, 0][0, 0] == np.conj(y[0, 1][0, 0])


def test_multiply(finite, rng):
    D, bd = finite
    a, b = random_matrix(rng, 8), random_matrix(rng, 8)
    ya, yb = embed_operator(a, bd), embed_operator(b, bd)
    np.testing.assert_allclose(multiply(ya, embed_operator(np.eye(8), bd)).data, ya.data, atol=1e-12)
    np.testing.assert_allclose(multiply(ya, yb).data, embed_operator(a @ b, bd).data, atol=1e-10)
    d = D.matrix()
    np.testing.assert_allclose(multiply(commutator_with_D(ya), yb).reassemble(),
                               (d @ a - a @ d) @ b, atol=1e-10)
    c = embed_operator(random_matrix(rng, 8), bd)
    np.testing.assert_allclose(multiply(multiply(ya, yb), c).data,
                               multiply(ya, multiply(yb, c)).data, atol=1e-10)


def test_truncate_identity_and_projection(finite, rng):
    D, bd = finite
    for n in (1, 2, 5):
        t = truncate(embed_operator(np.eye(8), bd), n)
        np.testing.assert_allclose(t.matrix, np.eye(t.projection.dim), atol=1e-12)
    a = random_matrix(rng, 8)
    for n in (1, 2, 3):
        p = bd.window(n).projector()
        np.testing.assert_allclose(truncate(embed_operator(a, bd), n).ambient(), p @ a @ p, atol=1e-12)


def test_truncate_circle_window_indices():
    L, n = 8, 3
    bd = band_decompose(torus.torus_D(L))
    f = torus.absx()
    t = truncate(commutator_with_D(embed_operator(torus.toeplitz(f, L), bd)), n)
    idx = np.arange(1 - n, n + 1)
    expect = (idx[:, None] - idx[None, :]) * f(idx[:, None] - idx[None, :])
    assert t.matrix.shape == (2 * n, 2 * n)
    np.testing.assert_array_equal(t.matrix, expect)


def test_window_monotonicity():
    L = 32
    bd = band_decompose(torus.torus_D(L))
    y = commutator_with_D(embed_operator(torus.toeplitz(torus.sign(), L), bd))
    norms = [np.linalg.norm(truncate(y, n).matrix, 2) for n in (2, 4, 8, 16, 32)]
    assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))


def test_form_eval(finite, rng):
    D, bd = finite
    xi_amb = bd.frame(bd.band_indices[0]) @ np.ones(bd.band_dim(bd.band_indices[0]))
    eta_amb = bd.frame(bd.band_indices[-1]) @ np.ones(bd.band_dim(bd.band_indices[-1]))
    xi, eta = band_vector(bd, xi_amb, 1e-12), band_vector(bd, eta_amb, 1e-12)
    v = form_eval(embed_operator(np.eye(8), bd), xi, xi)
    assert abs(v.value - np.vdot(xi_amb, xi_amb)) <= 1e-10
    a = random_matrix(rng, 8)
    d = D.matrix()
    y = commutator_with_D(embed_operator(a, bd))
    fv = form_eval(y, xi, eta)
    assert abs(fv.value - np.vdot(eta_amb, (d @ a - a @ d) @ xi_amb)) <= 1e-10
    # <a xi, D eta> - <a D xi, eta>
    direct = np.vdot(d @ eta_amb, a @ xi_amb) - np.vdot(eta_amb, a @ d @ xi_amb)
    assert abs(fv.value - direct) <= 1e-10
    later = form_eval(y, xi, eta, n=fv.stabilized_at + 3)
    assert abs(later.value - fv.value) <= 1e-14


def test_form_eval_rejects_small_window(finite):
    _, bd = finite
    top = bd.band_indices[-1]
    xi = {top: np.ones(bd.band_dim(top))}
    m = max(top, 1 - top)
    if m > 1:
        with pytest.raises(ValidationError):
            form_eval(embed_operator(np.eye(8), bd), xi, xi, n=m - 1)


def test_core_approximation_is_exact_once_window_covers_bands(finite, rng):
    D, bd = finite
    x = rng.standard_normal(8) + 0j
    n = max(max(bd.band_indices), 1 - min(bd.band_indices))
    p = bd.window(n).projector()
    d = D.matrix()
    assert np.linalg.norm(d @ x - d @ p @ x) + np.linalg.norm(x - p @ x) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), alpha=st.complex_numbers(max_magnitude=10, allow_nan=False))
def test_embed_is_star_linear(seed, alpha):
    rng = np.random.default_rng(seed)
    bd = band_decompose(SelfAdjointModel.hermitian(random_hermitian(rng, 5, 2.0)))
    a, b = random_matrix(rng, 5), random_matrix(rng, 5)
    lhs = embed_operator(alpha * a + b, bd).data
    rhs = embed_operator(a, bd).scale(alpha).data + embed_operator(b, bd).data
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * (1 + abs(alpha))


def test_block_json_dump():
    bd = band_decompose(SelfAdjointModel.diagonal([0.5, 1.5]))
    dump = embed_operator(np.array([[0, 1], [1, 0]]), bd).to_json()
    assert dump == {"1,2": [[[1.0, 0.0]]], "2,1": [[[1.0, 0.0]]]}
