"""Block matrices indexed by spectral bands.

An element ``y`` of the block space assigns to every pair of bands ``(r, c)``
an operator ``y_rc`` from ``e_c H`` to ``e_r H``. All models here are
truncated, so a block matrix is stored as one dense array in frame
coordinates (columns sorted by band). Block ``(r, c)`` is then a view of
that array, and a circle model with 1x1 blocks is just a scalar-indexed
matrix with no per-block overhead.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple

import numpy as np

from .errors import DecompositionMismatch, ValidationError
from .spectral import BandDecomposition, WindowProjection, window_containing, window_projection


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """A band-indexed block matrix.

    ``support`` is the inclusive band range ``(lo, hi)``; blocks with either
    index outside it are zero.
    """

    data: np.ndarray
    decomposition: BandDecomposition
    support: Tuple[int, int]

    def __post_init__(self):
        n = self.decomposition.dim
        if self.data.shape != (n, n):
            raise ValidationError(f"block data shape {self.data.shape} does not match dimension {n}")
        self.data.flags.writeable = False

    def block(self, r: int, c: int) -> np.ndarray:
        bd = self.decomposition
        rs, cs = bd.slices.get(r), bd.slices.get(c)
        if rs is None or cs is None:
            return np.zeros((bd.band_dim(r), bd.band_dim(c)), dtype=np.complex128)
        return self.data[rs, cs]

    def __getitem__(self, rc: Tuple[int, int]) -> np.ndarray:
        return self.block(*rc)

    def blocks(self, include_zero: bool = False) -> Iterator[Tuple[Tuple[int, int], np.ndarray]]:
        lo, hi = self.support
        bands = [(b, s) for b, s in self.decomposition.iter_bands() if lo <= b <= hi]
        for r, rs in bands:
            for c, cs in bands:
                blk = self.data[rs, cs]
                if include_zero or np.any(blk):
                    yield (r, c), blk

    def reassemble(self) -> np.ndarray:
        """Dense ambient operator ``sum_rc frame_r y_rc frame_c^*``."""
        return self.decomposition.from_frame(self.data)

    def to_json(self) -> Dict[str, list]:
        """Debug dump ``{"r,c": [[[re, im], ...], ...]}`` of the nonzero blocks."""
        out = {}
        for (r, c), blk in self.blocks():
            out[f"{r},{c}"] = [[[float(z.real), float(z.imag)] for z in row] for row in blk]
        return out

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        _same(self, other)
        return BlockMatrix(self.data + other.data, self.decomposition, _hull(self.support, other.support))

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        _same(self, other)
        return BlockMatrix(self.data - other.data, self.decomposition, _hull(self.support, other.support))

    def scale(self, alpha: complex) -> "BlockMatrix":
        return BlockMatrix(alpha * self.data, self.decomposition, self.support)


@dataclass(frozen=True)
class FormValue:
    value: complex
    stabilized_at: int


@dataclass(frozen=True, eq=False)
class Truncation:
    """Compression ``E_n y E_n`` of a block matrix.

    ``matrix`` is the operator on ``E_n H`` in frame coordinates; use
    :meth:`ambient` for the full-size ambient matrix.
    """

    matrix: np.ndarray
    projection: WindowProjection

    @property
    def n(self) -> int:
        return self.projection.n

    @property
    def clipped(self) -> bool:
        return self.projection.clipped

    def ambient(self) -> np.ndarray:
        """``E_n y E_n`` as an ambient ``N x N`` matrix (zero outside the window)."""
        bd = self.projection.decomposition
        if bd.vectors is None:
            idx = bd.perm[self.projection.span]
            out = np.zeros((bd.dim, bd.dim), dtype=np.complex128)
            out[np.ix_(idx, idx)] = self.matrix
            return out
        f = self.projection.frame()
        return f @ self.matrix @ f.conj().T


def _full_support(bd: BandDecomposition) -> Tuple[int, int]:
    return bd.min_band, bd.max_band


def _hull(s, t):
    return min(s[0], t[0]), max(s[1], t[1])


def _same(y: BlockMatrix, z: BlockMatrix) -> None:
    if y.decomposition is not z.decomposition:
        raise DecompositionMismatch("block matrices use different band decompositions")


def embed_operator(a, bd: BandDecomposition) -> BlockMatrix:
    """``m(a)`` with blocks ``frame_r^* a frame_c``."""
    a = np.asarray(a)
    if a.shape != (bd.dim, bd.dim):
        raise ValidationError(f"operator shape {a.shape} does not match dimension {bd.dim}")
    return BlockMatrix(bd.to_frame(a), bd, _full_support(bd))


def embed_D(bd: BandDecomposition) -> BlockMatrix:
    """``m(D)``: block diagonal with ``d_n`` on the diagonal."""
    return BlockMatrix(np.diag(bd.values.astype(np.complex128)), bd, _full_support(bd))


def commutator_with_D(y: BlockMatrix, bd: Optional[BandDecomposition] = None) -> BlockMatrix:
    """``[m(D), y]_rc = d_r y_rc - y_rc d_c``.

    The frames diagonalize every ``d_n``, so the block formula reduces to
    ``(lambda_i - lambda_j) y_ij`` entrywise. The gap is formed before the
    product: for integer spectra it is exact, and no cancellation between two
    large terms ``lambda_i y_ij`` and ``y_ij lambda_j`` can occur.
    """
    if bd is not None and bd is not y.decomposition:
        raise DecompositionMismatch("y is not expressed in this band decomposition")
    lam = y.decomposition.values
    return BlockMatrix((lam[:, None] - lam[None, :]) * y.data, y.decomposition, y.support)


def adjoint(y: BlockMatrix) -> BlockMatrix:
    """``(y^*)_rc = (y_cr)^*``."""
    return BlockMatrix(y.data.conj().T.copy(), y.decomposition, y.support)


def multiply(y: BlockMatrix, z: BlockMatrix) -> BlockMatrix:
    """Block product ``sum_k y_rk z_kc`` (finite because supports are finite)."""
    _same(y, z)
    return BlockMatrix(y.data @ z.data, y.decomposition, _hull(y.support, z.support))


def truncate(y: BlockMatrix, n: int) -> Truncation:
    """``pi_n(y)``: compression to the window ``E_n``.

    Windows reaching past the model's modes are clipped; the truncation's
    ``clipped`` flag records it.
    """
    proj = window_projection(y.decomposition, n)
    s = proj.span
    return Truncation(np.array(y.data[s, s]), proj)


BandVector = Mapping[int, np.ndarray]


def band_vector(bd: BandDecomposition, x, tol: float = 0.0) -> Dict[int, np.ndarray]:
    """Split an ambient vector into per-band frame coefficients.

    Bands whose coefficients all have modulus ``<= tol`` are dropped, so the
    result has finite (minimal) band support.
    """
    c = bd.vec_to_frame(x)
    out = {}
    for b, s in bd.iter_bands():
        blk = c[s]
        if np.any(np.abs(blk) > tol):
            out[b] = blk.copy()
    return out


def ambient_vector(bd: BandDecomposition, v: BandVector) -> np.ndarray:
    c = np.zeros(bd.dim, dtype=np.complex128)
    for b, blk in v.items():
        s = bd.slices.get(b)
        if s is None:
            raise ValidationError(f"band {b} is not present in the decomposition")
        c[s] = blk
    return bd.vec_from_frame(c)


def form_eval(y: BlockMatrix, xi: BandVector, eta: BandVector, n: Optional[int] = None) -> FormValue:
    """Evaluate the form ``S(y)(xi, eta)`` on vectors with finite band support.

    The value is ``<pi_m(y) xi, eta>`` with ``m`` the smallest window holding
    both supports; any larger window gives the same number. Pass ``n`` to
    evaluate at a specific window ``n >= m``.
    """
    bd = y.decomposition
    for v in (xi, eta):
        for b, blk in v.items():
            if b not in bd.slices:
                raise ValidationError(f"vector has support on band {b}, outside the model")
            if np.shape(blk) != (bd.band_dim(b),):
                raise ValidationError(f"coefficient block for band {b} has wrong shape")
    m = window_containing(list(xi) + list(eta))
    if n is None:
        n = m
    elif n < m:
        raise ValidationError(f"window {n} does not contain the vector supports (need {m})")
    t = truncate(y, n)
    s = t.projection.span
    xv = np.zeros(bd.dim, dtype=np.complex128)
    yv = np.zeros(bd.dim, dtype=np.complex128)
    for b, blk in xi.items():
        xv[bd.slices[b]] = blk
    for b, blk in eta.items():
        yv[bd.slices[b]] = blk
    value = np.vdot(yv[s], t.matrix @ xv[s])
    return FormValue(complex(value), m)
