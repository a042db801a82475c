"""Operator (largest singular value) norms for dense matrices.

Matrices up to :data:`DENSE_LIMIT` rows get an exact dense computation. Real
and purely imaginary Hermitian input is routed to the real symmetric solver.
Larger matrices go through ARPACK's Lanczos iteration, on the matrix itself
when it is Hermitian or skew-Hermitian and on ``A^H A`` otherwise. The start
vector is fixed and seeded, so sweeps are reproducible. It is deliberately
not all ones: real symmetric Toeplitz matrices commute with the index flip,
and a flip-even start never sees the odd eigenvectors. ``power_iteration``
is kept as an independent, slower route for cross-checks.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import eigvalsh, svdvals
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, LinearOperator, eigsh

from .errors import NumericalError

DENSE_LIMIT = 2048
NORM_RTOL = 1e-9
POWER_MAXITER = 10000


def _symmetry(a: np.ndarray) -> int:
    """+1 for Hermitian, -1 for skew-Hermitian, 0 otherwise (to rounding)."""
    scale = np.max(np.abs(a))
    if scale == 0:
        return 1
    ah = a.conj().T
    tol = 1e-13 * scale
    if np.max(np.abs(a - ah)) <= tol:
        return 1
    if np.max(np.abs(a + ah)) <= tol:
        return -1
    return 0


def spectral_norm(a, method: str = "auto", rtol: float = NORM_RTOL) -> float:
    """Largest singular value of ``a``.

    Parameters
    ----------
    a : array_like
        Dense 2-D matrix.
    method : {"auto", "dense", "lanczos", "power"}
        ``auto`` picks ``dense`` up to :data:`DENSE_LIMIT` rows and
        ``lanczos`` above.
    rtol : float
        Relative tolerance for the iterative methods.
    """
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if not np.all(np.isfinite(a)):
        raise NumericalError("matrix has non-finite entries")
    if method == "auto":
        method = "dense" if max(a.shape) <= DENSE_LIMIT else "lanczos"
    if method == "dense":
        return _dense_norm(a)
    if method == "power":
        value, converged = power_iteration(a, rtol=rtol)
        if not converged:
            return _dense_norm(a)
        return value
    if method == "lanczos":
        return _lanczos_norm(a, rtol)
    raise ValueError(f"unknown norm method {method!r}")


def _dense_norm(a: np.ndarray) -> float:
    try:
        if a.shape[0] == a.shape[1]:
            sym = _symmetry(a)
            if sym:
                return _hermitian_norm(a if sym == 1 else 1j * a)
        return float(svdvals(a)[0])
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"dense singular value computation failed: {exc}") from exc


def _hermitian_norm(h: np.ndarray) -> float:
    # Real and purely imaginary Hermitian matrices go to the real symmetric
    # solver, which is several times cheaper than the complex one.
    if not np.any(h.imag):
        return float(np.max(np.abs(eigvalsh(np.ascontiguousarray(h.real), check_finite=False))))
    if not np.any(h.real):
        k = np.ascontiguousarray(h.imag)  # real antisymmetric; ||k||^2 is the top eigenvalue of k^T k
        return float(np.sqrt(max(eigvalsh(k.T @ k, check_finite=False)[-1], 0.0)))
    return float(np.max(np.abs(eigvalsh(h, check_finite=False))))


def _lanczos_norm(a: np.ndarray, rtol: float) -> float:
    n = a.shape[1]
    v0 = _start_vector(n)
    sym = _symmetry(a) if a.shape[0] == a.shape[1] else 0
    try:
        if sym:
            h = np.asarray(a, dtype=np.complex128) if sym == 1 else 1j * a
            lam = eigsh(h, k=1, which="LM", tol=rtol, v0=v0, return_eigenvectors=False)
            return float(np.abs(lam[0]))
        ah = a.conj().T
        op = LinearOperator((n, n), matvec=lambda x: ah @ (a @ x), dtype=np.complex128)
        lam = eigsh(op, k=1, which="LA", tol=rtol, v0=v0, return_eigenvectors=False)
        return float(np.sqrt(max(lam[0].real, 0.0)))
    except (ArpackNoConvergence, ArpackError):
        return _dense_norm(a)


def _start_vector(n: int) -> np.ndarray:
    rng = np.random.default_rng(20240611)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def power_iteration(a, rtol: float = NORM_RTOL, maxiter: int = POWER_MAXITER):
    """Largest singular value by power iteration on ``a^H a``.

    Returns ``(sigma, converged)``. The start vector is the normalized
    all-ones vector; convergence is declared when the Rayleigh quotient
    changes by at most ``rtol`` relative between sweeps.
    """
    a = np.asarray(a)
    n = a.shape[1]
    x = np.ones(n, dtype=np.complex128) / np.sqrt(n)
    ah = a.conj().T
    lam = 0.0
    for _ in range(maxiter):
        y = ah @ (a @ x)
        new = float(np.vdot(x, y).real)
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0, True
        x = y / ny
        if abs(new - lam) <= rtol * new:
            return float(np.sqrt(new)), True
        lam = new
    return float(np.sqrt(lam)), False
