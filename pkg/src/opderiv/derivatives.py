"""Weak derivatives, their boundedness, and the derivative-chain norms.

For a finite-dimensional ``D`` every operator is differentiable and the weak
derivative is the plain commutator ``Da - aD``. On the circle model the block
commutator ``[m(D), m(a)]`` is compressed to a sweep of windows ``E_n``. The
growth of the compressed norms, fitted as a power law in ``n``, decides
between Bounded, Unbounded and Inconclusive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._workers import parallel_map
from .blockspace import commutator_with_D, embed_operator, truncate
from .config import DEFAULT_CONFIG, AnalysisConfig
from .errors import NotDifferentiableError, ValidationError
from .norms import spectral_norm
from .spectral import SelfAdjointModel, abs_operator, band_decompose, window_containing

MAX_NORM_ORDER = 20


class Status(str, Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class BoundednessVerdict:
    status: Status
    norm_estimate: float
    growth_exponent: float
    curve: Tuple[Tuple[float, float], ...]
    clipped: bool = False

    @property
    def bounded(self) -> bool:
        return self.status is Status.BOUNDED

    @property
    def window(self) -> int:
        """Largest sweep window (where ``norm_estimate`` was read off)."""
        return int(self.curve[-1][0])

    def to_json(self) -> dict:
        return {
            "verdict": self.status.value,
            "norm_estimate": self.norm_estimate,
            "growth_exponent": self.growth_exponent,
            "curve": [[n, v] for n, v in self.curve],
        }


def classify_growth(curve, bounded: float = 0.02, unbounded: float = 0.10) -> BoundednessVerdict:
    """Classify a norm-vs-window curve by its fitted power-law exponent.

    The slope of ``log norm`` against ``log n`` is fitted by least squares
    over the top half of the points. Below ``bounded`` the curve counts as
    Bounded, above ``unbounded`` as Unbounded, otherwise Inconclusive.

    Compressions of a fixed operator have nondecreasing norms, so the curve
    is replaced by its running maximum first; this only removes rounding
    noise.
    """
    pts = sorted((float(n), float(v)) for n, v in curve)
    if len(pts) < 4:
        raise ValidationError(f"need at least 4 sweep points, got {len(pts)}")
    xs = np.array([p[0] for p in pts])
    if np.any(xs <= 0) or len(set(xs)) != len(xs):
        raise ValidationError("sweep abscissae must be positive and distinct")
    ys = np.maximum.accumulate(np.array([p[1] for p in pts]))
    mono = tuple((float(x), float(y)) for x, y in zip(xs, ys))
    last = float(ys[-1])
    if last <= 0.0:
        return BoundednessVerdict(Status.BOUNDED, 0.0, 0.0, mono)
    k = len(xs) - len(xs) // 2
    top_x, top_y = np.log(xs[-k:]), ys[-k:]
    slope = float(np.polyfit(top_x, np.log(np.maximum(top_y, np.finfo(float).tiny)), 1)[0])
    if slope < bounded:
        status = Status.BOUNDED
    elif slope > unbounded:
        status = Status.UNBOUNDED
    else:
        status = Status.INCONCLUSIVE
    return BoundednessVerdict(status, last, slope, mono)


def default_sweep(D: SelfAdjointModel) -> Tuple[int, ...]:
    """``L/8, L/4, L/2, L`` for a circle model (distinct, at least four)."""
    L = D.bandlimit
    if L is None:
        raise ValidationError("default sweeps are only defined for circle models")
    sweep = sorted({max(1, L // 8), max(1, L // 4), max(1, L // 2), L})
    if len(sweep) < 4:
        sweep = list(range(max(1, L - 3), L + 1))
    if len(sweep) < 4:
        raise ValidationError(f"bandlimit {L} is too small for a four-point sweep")
    return tuple(sweep)


def weak_derivative(D: SelfAdjointModel, a, sweep: Optional[Sequence[int]] = None,
                    config: AnalysisConfig = DEFAULT_CONFIG):
    """Weak derivative ``wD(a)`` and its boundedness verdict.

    Returns ``(verdict, operator)``. ``operator`` is ``None`` unless the
    verdict is Bounded. On the circle it is then the compression of the
    block commutator to the largest window (zero outside it), and
    ``verdict.window`` names that window. Finite models skip the sweep:
    ``wD(a) = Da - aD`` exactly.
    """
    a = np.asarray(a)
    if a.shape != (D.dim, D.dim):
        raise ValidationError(f"operator shape {a.shape} does not match dimension {D.dim}")
    if not D.is_circle:
        wd = D.commutator(a)
        bd = band_decompose(D)
        m = window_containing(bd.band_indices)
        nrm = spectral_norm(wd, rtol=config.norm_tol)
        return BoundednessVerdict(Status.BOUNDED, nrm, 0.0, ((float(m), nrm),)), wd

    if sweep is None:
        sweep = config.sweep or default_sweep(D)
    sweep = [int(n) for n in sweep]
    if not sweep:
        raise ValidationError("empty sweep")
    if any(b <= a_ for a_, b in zip(sweep, sweep[1:])):
        raise ValidationError("sweep must be strictly increasing")
    bd = band_decompose(D)
    y = commutator_with_D(embed_operator(a, bd))
    truncs = [truncate(y, n) for n in sweep]
    norms = parallel_map(lambda t: spectral_norm(t.matrix, rtol=config.norm_tol), truncs)
    verdict = classify_growth(list(zip(sweep, norms)), config.growth_bounded, config.growth_unbounded)
    clipped = any(t.clipped for t in truncs)
    verdict = BoundednessVerdict(verdict.status, verdict.norm_estimate, verdict.growth_exponent,
                                 verdict.curve, clipped)
    if not verdict.bounded:
        return verdict, None
    return verdict, truncs[-1].ambient()


@dataclass
class DerivativeChain:
    """``a, wD(a), ..., wD^k(a)`` with one verdict per derivative order.

    The chain stops at the first order that is not Bounded; ``terms`` then
    holds only the orders that exist.
    """

    order: int
    terms: List[np.ndarray]
    verdicts: List[BoundednessVerdict]
    _norms: dict = field(default_factory=dict, repr=False)

    @property
    def complete(self) -> bool:
        return len(self.verdicts) == self.order and all(v.bounded for v in self.verdicts)

    def bounded_through(self) -> int:
        """Highest order ``j`` with orders ``1..j`` all Bounded."""
        j = 0
        for v in self.verdicts:
            if not v.bounded:
                break
            j += 1
        return j

    def term_norm(self, k: int) -> float:
        if k not in self._norms:
            if k >= 1 and k <= len(self.verdicts) and self.verdicts[k - 1].bounded:
                self._norms[k] = self.verdicts[k - 1].norm_estimate
            else:
                self._norms[k] = spectral_norm(self.terms[k])
        return self._norms[k]

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "verdicts": [v.to_json() for v in self.verdicts],
            "term_norms": [self.term_norm(k) for k in range(len(self.terms))],
        }


def higher_derivative(D: SelfAdjointModel, a, k: int, sweep: Optional[Sequence[int]] = None,
                      config: AnalysisConfig = DEFAULT_CONFIG) -> DerivativeChain:
    """Iterate :func:`weak_derivative` ``k`` times, stopping at the first non-Bounded order."""
    if k < 1:
        raise ValidationError("derivative order must be >= 1")
    terms = [np.asarray(a)]
    verdicts = []
    for _ in range(k):
        verdict, wd = weak_derivative(D, terms[-1], sweep, config)
        verdicts.append(verdict)
        if wd is None:
            break
        terms.append(wd)
    return DerivativeChain(k, terms, verdicts)


def n_norm(chain: DerivativeChain, n: Optional[int] = None) -> float:
    """``sum_{k=0}^{n} ||wD^k(a)|| / k!`` (``n`` defaults to the chain order)."""
    n = chain.order if n is None else n
    if n > MAX_NORM_ORDER:
        raise ValidationError(f"n-norm order capped at {MAX_NORM_ORDER}")
    if n < 0 or n > chain.order:
        raise ValidationError(f"order {n} outside the chain (order {chain.order})")
    if chain.bounded_through() < n:
        raise NotDifferentiableError(f"operator is not {n}-times weakly differentiable")
    return sum(chain.term_norm(k) / math.factorial(k) for k in range(n + 1))


def wncg_norm(D: SelfAdjointModel, a, n: int, sweep: Optional[Sequence[int]] = None,
              config: AnalysisConfig = DEFAULT_CONFIG) -> float:
    """``||wD(a)|| + |||a|||_n`` with the chain taken along ``|D|``."""
    verdict, _ = weak_derivative(D, a, sweep, config)
    if not verdict.bounded:
        raise NotDifferentiableError("operator is not weakly D-differentiable")
    chain = higher_derivative(abs_operator(D), a, n, sweep, config)
    return verdict.norm_estimate + n_norm(chain, n)
