"""Integer band decomposition of a self-adjoint operator.

A self-adjoint ``D`` is split into the spectral projections ``e_n`` for the
half-open intervals ``(n-1, n]``. Each band carries an orthonormal frame and
the restriction ``d_n`` of ``D`` to its range. Three model kinds are
supported:

``dense-hermitian``
    an explicit ``N x N`` Hermitian matrix,
``diagonal``
    a list of real eigenvalues in the standard basis,
``circle``
    the derivative ``-i d/dtheta`` on the circle cut to the Fourier modes
    ``-L..L``; it stays symbolic (eigenvalue ``n`` on ``e^{in theta}``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from .errors import NumericalError, ValidationError

KINDS = ("dense-hermitian", "diagonal", "circle")

HERMITIAN_TOL = 1e-12
SNAP_TOL = 1e-12
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SelfAdjointModel:
    """A self-adjoint operator ``D`` in one of the supported representations.

    Use the constructors :meth:`hermitian`, :meth:`diagonal` and
    :meth:`circle` rather than building instances directly; they validate
    the data.
    """

    kind: str
    data: object
    absolute: bool = False
    _eig: Optional[Tuple[np.ndarray, np.ndarray]] = field(default=None, repr=False)

    @classmethod
    def hermitian(cls, matrix) -> "SelfAdjointModel":
        a = np.array(matrix, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValidationError(f"expected a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("matrix has non-finite entries")
        scale = np.max(np.abs(a)) if a.size else 0.0
        if np.max(np.abs(a - a.conj().T)) > HERMITIAN_TOL * max(scale, 1e-300):
            raise ValidationError("matrix is not Hermitian")
        # symmetrize away the admissible rounding asymmetry
        a = 0.5 * (a + a.conj().T)
        a.flags.writeable = False
        return cls("dense-hermitian", a)

    @classmethod
    def diagonal(cls, eigenvalues) -> "SelfAdjointModel":
        lam = np.array(eigenvalues, dtype=np.float64).ravel()
        if lam.size == 0:
            raise ValidationError("empty eigenvalue list")
        if not np.all(np.isfinite(lam)):
            raise ValidationError("eigenvalues must be finite")
        lam.flags.writeable = False
        return cls("diagonal", lam)

    @classmethod
    def circle(cls, bandlimit: int, absolute: bool = False) -> "SelfAdjointModel":
        """Circle model on modes ``-L..L``; ``absolute=True`` gives ``|D|`` (eigenvalue ``|n|``)."""
        if isinstance(bandlimit, bool) or int(bandlimit) != bandlimit or bandlimit < 1:
            raise ValidationError(f"bandlimit must be a positive integer, got {bandlimit!r}")
        return cls("circle", int(bandlimit), bool(absolute))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown model kind {self.kind!r}")

    @property
    def is_circle(self) -> bool:
        return self.kind == "circle"

    @property
    def bandlimit(self) -> Optional[int]:
        return self.data if self.is_circle else None

    @property
    def dim(self) -> int:
        if self.is_circle:
            return 2 * self.data + 1
        return len(self.data)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in the model's natural order (ascending for dense)."""
        if self.kind == "diagonal":
            return self.data
        if self.is_circle:
            n = np.arange(-self.data, self.data + 1, dtype=np.float64)
            return np.abs(n) if self.absolute else n
        return self.eigh()[0]

    def eigh(self) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Return ``(eigenvalues, eigenvectors)``.

        Eigenvectors are ``None`` for the diagonal and circle kinds, where the
        standard basis already diagonalizes ``D``.
        """
        if self.kind != "dense-hermitian":
            return self.eigenvalues, None
        if self._eig is None:
            object.__setattr__(self, "_eig", _checked_eigh(self.data))
        return self._eig

    def matrix(self) -> np.ndarray:
        """Dense ambient matrix of ``D``."""
        if self.kind == "dense-hermitian":
            return np.array(self.data)
        return np.diag(self.eigenvalues.astype(np.complex128))

    @cached_property
    def norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``D @ x`` without materializing ``D`` for diagonal kinds."""
        x = np.asarray(x)
        if self.kind == "dense-hermitian":
            return self.data @ x
        lam = self.eigenvalues
        return lam[:, None] * x if x.ndim == 2 else lam * x

    def commutator(self, a: np.ndarray) -> np.ndarray:
        """Dense ``D a - a D``."""
        a = np.asarray(a)
        if self.kind == "dense-hermitian":
            return self.data @ a - a @ self.data
        lam = self.eigenvalues
        return (lam[:, None] - lam[None, :]) * a

    def to_json(self) -> dict:
        if self.is_circle:
            out = {"type": "circle", "bandlimit": self.data}
            if self.absolute:
                out["absolute"] = True
            return out
        if self.kind == "diagonal":
            return {"type": "diagonal", "eigenvalues": [float(x) for x in self.data]}
        return {
            "type": "hermitian",
            "dim": self.dim,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.data],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SelfAdjointModel":
        if not isinstance(obj, dict) or "type" not in obj:
            raise ValidationError("model JSON must be an object with a 'type' field")
        kind = obj["type"]
        try:
            if kind == "circle":
                return cls.circle(obj["bandlimit"], bool(obj.get("absolute", False)))
            if kind == "diagonal":
                return cls.diagonal(obj["eigenvalues"])
            if kind == "hermitian":
                m = complex_matrix_from_json(obj["entries"])
                if "dim" in obj and m.shape != (obj["dim"], obj["dim"]):
                    raise ValidationError(f"declared dim {obj['dim']} does not match entries {m.shape}")
                return cls.hermitian(m)
        except KeyError as exc:
            raise ValidationError(f"model JSON missing field {exc}") from None
        raise ValidationError(f"unknown model type {kind!r}")


def complex_matrix_from_json(entries) -> np.ndarray:
    try:
        arr = np.array(entries, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed complex matrix: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError("complex matrix entries must be [[[re, im], ...], ...]")
    return arr[..., 0] + 1j * arr[..., 1]


def _checked_eigh(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    try:
        lam, vec = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    scale = max(np.max(np.abs(lam)), 1e-300)
    resid = np.linalg.norm(a @ vec - vec * lam[None, :], axis=0)
    if np.max(resid) > RESIDUAL_TOL * scale:
        raise NumericalError(f"eigenpair residual {np.max(resid):.3e} exceeds contract")
    lam.flags.writeable = False
    vec.flags.writeable = False
    return lam, vec


def band_index(lam, snap_tol: float = SNAP_TOL) -> np.ndarray:
    """Band of each eigenvalue: ``n`` with ``n - 1 < lam <= n``.

    Values within ``snap_tol`` of an integer are first snapped onto it, so
    ``1 + 1e-15`` lands in band 1 rather than band 2.
    """
    lam = np.asarray(lam, dtype=np.float64)
    nearest = np.round(lam)
    snapped = np.where(np.abs(lam - nearest) <= snap_tol, nearest, lam)
    return np.ceil(snapped).astype(np.int64)


@dataclass(frozen=True, eq=False)
class BandDecomposition:
    """The family ``{e_n}`` with frames and diagonal blocks ``d_n``.

    Frame columns are stored in *frame order*: sorted by band, so every band
    and every window ``E_n`` occupies a contiguous slice. ``vectors`` is the
    full ``N x N`` unitary whose columns are the frames (``None`` when the
    frames are standard basis vectors, picked out by ``perm``).
    """

    model: SelfAdjointModel
    values: np.ndarray
    band_of: np.ndarray
    perm: np.ndarray
    vectors: Optional[np.ndarray]
    slices: Dict[int, slice]

    @property
    def dim(self) -> int:
        return len(self.values)

    @property
    def band_indices(self) -> List[int]:
        return list(self.slices)

    @property
    def min_band(self) -> int:
        return int(self.band_of[0])

    @property
    def max_band(self) -> int:
        return int(self.band_of[-1])

    def band_dim(self, n: int) -> int:
        s = self.slices.get(n)
        return 0 if s is None else s.stop - s.start

    def frame(self, n: int) -> np.ndarray:
        """Orthonormal ``N x dim(e_n)`` frame spanning ``e_n H``."""
        s = self.slices.get(n)
        if s is None:
            return np.zeros((self.dim, 0), dtype=np.complex128)
        if self.vectors is not None:
            return self.vectors[:, s]
        f = np.zeros((self.dim, s.stop - s.start), dtype=np.complex128)
        f[self.perm[s], np.arange(s.stop - s.start)] = 1.0
        return f

    @property
    def bands(self) -> Dict[int, np.ndarray]:
        return {n: self.frame(n) for n in self.slices}

    def dblock(self, n: int) -> np.ndarray:
        """``d_n``, the restriction of ``D`` to ``e_n H`` in its frame."""
        s = self.slices.get(n, slice(0, 0))
        return np.diag(self.values[s].astype(np.complex128))

    @property
    def dblocks(self) -> Dict[int, np.ndarray]:
        return {n: self.dblock(n) for n in self.slices}

    def iter_bands(self) -> Iterator[Tuple[int, slice]]:
        return iter(self.slices.items())

    # basis changes between ambient coordinates and frame coordinates

    def to_frame(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a)
        if a.shape != (self.dim, self.dim):
            raise ValidationError(f"operator shape {a.shape} does not match dimension {self.dim}")
        if self.vectors is not None:
            return self.vectors.conj().T @ a @ self.vectors
        if self._identity_perm:
            return np.array(a, dtype=np.complex128)
        return np.asarray(a, dtype=np.complex128)[np.ix_(self.perm, self.perm)]

    def from_frame(self, y: np.ndarray) -> np.ndarray:
        if self.vectors is not None:
            return self.vectors @ y @ self.vectors.conj().T
        if self._identity_perm:
            return np.array(y, dtype=np.complex128)
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        out[np.ix_(self.perm, self.perm)] = y
        return out

    def vec_to_frame(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape[0] != self.dim:
            raise ValidationError(f"vector length {x.shape[0]} does not match dimension {self.dim}")
        if self.vectors is not None:
            return self.vectors.conj().T @ x
        return x[self.perm]

    def vec_from_frame(self, c: np.ndarray) -> np.ndarray:
        if self.vectors is not None:
            return self.vectors @ c
        out = np.zeros(self.dim, dtype=np.complex128)
        out[self.perm] = c
        return out

    @cached_property
    def _identity_perm(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(self.dim)))

    def window(self, n: int) -> "WindowProjection":
        return window_projection(self, n)


@dataclass(frozen=True, eq=False)
class WindowProjection:
    """Compression frame for ``E_n``, the sum of ``e_j`` over ``1-n <= j <= n``.

    ``clipped`` is set for circle models when the window reaches past the
    modes the model carries (the spectral leakage flag).
    """

    n: int
    decomposition: BandDecomposition
    span: slice
    clipped: bool

    @property
    def dim(self) -> int:
        return self.span.stop - self.span.start

    @property
    def bands(self) -> List[int]:
        return [b for b in self.decomposition.slices if 1 - self.n <= b <= self.n]

    def frame(self) -> np.ndarray:
        bd = self.decomposition
        if bd.vectors is not None:
            return bd.vectors[:, self.span]
        f = np.zeros((bd.dim, self.dim), dtype=np.complex128)
        f[bd.perm[self.span], np.arange(self.dim)] = 1.0
        return f

    def projector(self) -> np.ndarray:
        """Ambient matrix of ``E_n``."""
        f = self.frame()
        return f @ f.conj().T


def window_projection(bd: BandDecomposition, n: int) -> WindowProjection:
    if int(n) != n or n < 1:
        raise ValidationError(f"window index must be a positive integer, got {n!r}")
    n = int(n)
    lo = int(np.searchsorted(bd.band_of, 1 - n, side="left"))
    hi = int(np.searchsorted(bd.band_of, n, side="right"))
    clipped = False
    if bd.model.is_circle:
        L = bd.model.bandlimit
        clipped = n > L or 1 - n < -L
    return WindowProjection(n, bd, slice(lo, hi), clipped)


def window_containing(bands) -> int:
    """Smallest ``n`` with every band in ``bands`` inside ``1-n..n``."""
    m = 1
    for b in bands:
        m = max(m, int(b), 1 - int(b))
    return m


def band_decompose(D: SelfAdjointModel) -> BandDecomposition:
    """Split ``D`` into integer bands ``(n-1, n]``."""
    lam, vec = D.eigh()
    bands = band_index(lam)
    perm = np.argsort(bands, kind="stable")
    values = np.asarray(lam, dtype=np.float64)[perm]
    band_of = bands[perm]
    vectors = None if vec is None else vec[:, perm]
    slices: Dict[int, slice] = {}
    start = 0
    for i in range(1, len(band_of) + 1):
        if i == len(band_of) or band_of[i] != band_of[start]:
            slices[int(band_of[start])] = slice(start, i)
            start = i
    for arr in (values, band_of, perm):
        arr.flags.writeable = False
    return BandDecomposition(D, values, band_of, perm, vectors, slices)


def phases(D: SelfAdjointModel, t: float) -> np.ndarray:
    """``exp(i t lambda)`` for every eigenvalue in ``D``'s natural order."""
    return np.exp(1j * t * D.eigenvalues)


def unitary_group(D: SelfAdjointModel, t: float) -> np.ndarray:
    """Dense ``exp(itD)``, built from the eigendecomposition so it is unitary to rounding."""
    lam, vec = D.eigh()
    p = np.exp(1j * t * np.asarray(lam))
    if vec is None:
        return np.diag(p)
    return (vec * p[None, :]) @ vec.conj().T


def abs_operator(D: SelfAdjointModel) -> SelfAdjointModel:
    """``|D| = (D^2)^(1/2)``: same eigenvectors, eigenvalues ``|lambda|``."""
    if D.is_circle:
        return SelfAdjointModel.circle(D.bandlimit, absolute=True)
    if D.kind == "diagonal":
        return SelfAdjointModel.diagonal(np.abs(D.data))
    lam, vec = D.eigh()
    absl = np.abs(lam)
    m = (vec * absl[None, :]) @ vec.conj().T
    m = 0.5 * (m + m.conj().T)
    m.flags.writeable = False
    # eigenvalues are reordered ascending to keep the cached pair consistent with eigh
    order = np.argsort(absl, kind="stable")
    return SelfAdjointModel("dense-hermitian", m, _eig=(absl[order], vec[:, order]))

