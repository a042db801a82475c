import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hermitian
from opderiv.errors import ValidationError
from opderiv.spectral import (SelfAdjointModel, abs_operator, band_decompose, band_index,
                              unitary_group, window_projection)


def test_diagonal_bands_by_ceiling():
    bd = band_decompose(SelfAdjointModel.diagonal([0.5, 0.7, 1.2]))
    assert bd.band_indices == [1, 2]
    assert bd.band_dim(1) == 2 and bd.band_dim(2) == 1
    np.testing.assert_allclose(np.diag(bd.dblock(1)).real, [0.5, 0.7])
    np.testing.assert_allclose(np.diag(bd.dblock(2)).real, [1.2])


def test_zero_operator_is_one_band():
    bd = band_decompose(SelfAdjointModel.diagonal([0.0, 0.0, 0.0]))
    assert bd.band_indices == [0]
    assert bd.band_dim(0) == 3


def test_snapping_at_band_boundary():
    assert list(band_index([1 + 1e-15, 1 - 1e-15, 1 + 1e-9, -1e-13])) == [1, 1, 2, 0]


def test_circle_bands_are_singletons():
    L = 4
    bd = band_decompose(SelfAdjointModel.circle(L))
    assert bd.band_indices == list(range(-L, L + 1))
    for n in range(-L, L + 1):
        f = bd.frame(n)
        assert f.shape == (2 * L + 1, 1)
        assert f[n + L, 0] == 1.0


def test_circle_dimension_and_eigenvalues():
    D = SelfAdjointModel.circle(1)
    assert D.dim == 3
    assert list(D.eigenvalues) == [-1, 0, 1]


def test_rejects_non_hermitian():
    with pytest.raises(ValidationError):
        SelfAdjointModel.hermitian([[0, 1], [0, 0]])


@pytest.mark.parametrize("seed", range(5))
def test_random_hermitian_reconstruction(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, 8, scale=3.0)
    D = SelfAdjointModel.hermitian(a)
    bd = band_decompose(D)
    total = np.zeros((8, 8), dtype=complex)
    recon = np.zeros((8, 8), dtype=complex)
    for n, _ in bd.iter_bands():
        f = bd.frame(n)
        total += f @ f.conj().T
        recon += f @ bd.dblock(n) @ f.conj().T
        lam = np.diag(bd.dblock(n)).real
        assert np.all((lam > n - 1 - 1e-12) & (lam <= n + 1e-12))
    np.testing.assert_allclose(total, np.eye(8), atol=1e-10)
    assert np.max(np.abs(recon - a)) <= 1e-10 * np.linalg.norm(a, 2)


def test_unitary_group_examples():
    np.testing.assert_allclose(unitary_group(SelfAdjointModel.diagonal([0.0, np.pi]), 1.0),
                               np.diag([1, -1]), atol=1e-15)
    D = SelfAdjointModel.hermitian(random_hermitian(np.random.default_rng(1), 6))
    np.testing.assert_allclose(unitary_group(D, 0.0), np.eye(6), atol=1e-14)


def test_unitary_group_random(rng):
    a = random_hermitian(rng, 8)
    D = SelfAdjointModel.hermitian(a)
    u = unitary_group(D, 0.3)
    assert np.linalg.norm(u @ u.conj().T - np.eye(8), 2) <= 1e-10
    assert np.linalg.norm(u @ a - a @ u, 2) <= 1e-10


def test_unitary_group_circle_is_phase_diagonal():
    u = unitary_group(SelfAdjointModel.circle(3), 0.7)
    np.testing.assert_allclose(np.diag(u), np.exp(0.7j * np.arange(-3, 4)))


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), t=st.floats(-3, 3), s=st.floats(-3, 3))
def test_group_law(seed, t, s):
    D = SelfAdjointModel.hermitian(random_hermitian(np.random.default_rng(seed), 5, 2.0))
    lhs = unitary_group(D, t) @ unitary_group(D, s)
    assert np.max(np.abs(lhs - unitary_group(D, t + s))) <= 1e-9


def test_abs_operator_examples():
    assert list(abs_operator(SelfAdjointModel.diagonal([-2.0, 3.0])).eigenvalues) == [2.0, 3.0]
    c = abs_operator(SelfAdjointModel.circle(2))
    assert c.is_circle
    assert list(c.eigenvalues) == [2, 1, 0, 1, 2]


def test_abs_operator_squares_to_d_squared(rng):
    a = random_hermitian(rng, 8, 2.0)
    m = abs_operator(SelfAdjointModel.hermitian(a)).matrix()
    np.testing.assert_allclose(m @ m, a @ a, atol=1e-10)
    bd = band_decompose(abs_operator(SelfAdjointModel.hermitian(a)))
    assert min(bd.band_indices) >= 0


def test_windows_are_nested_projections():
    D = SelfAdjointModel.diagonal([-2.5, -1.0, 0.0, 0.3, 1.0, 2.2])
    bd = band_decompose(D)
    prev = None
    for n in range(1, 5):
        p = window_projection(bd, n).projector()
        np.testing.assert_allclose(p @ p, p, atol=1e-14)
        np.testing.assert_allclose(p, p.conj().T)
        if prev is not None:
            np.testing.assert_allclose(p @ prev, prev, atol=1e-14)
        prev = p
    assert window_projection(bd, 1).bands == [0, 1]


def test_window_clipping_flag_on_circle():
    bd = band_decompose(SelfAdjointModel.circle(4))
    assert not window_projection(bd, 4).clipped
    assert window_projection(bd, 6).clipped


def test_json_round_trip(rng):
    a = random_hermitian(rng, 3)
    for D in (SelfAdjointModel.hermitian(a), SelfAdjointModel.diagonal([1.0, -0.5]),
              SelfAdjointModel.circle(3), SelfAdjointModel.circle(3, absolute=True)):
        E = SelfAdjointModel.from_json(D.to_json())
        assert E.kind == D.kind
        np.testing.assert_array_equal(E.eigenvalues, D.eigenvalues)


def test_json_errors():
    with pytest.raises(ValidationError):
        SelfAdjointModel.from_json({"type": "hexagon"})
    with pytest.raises(ValidationError):
        SelfAdjointModel.from_json({"type": "diagonal"})
