"""The conjugation group ``alpha_t(a) = e^{itD} a e^{-itD}`` and what it measures.

Norms of ``alpha_t(a) - a`` are unitarily invariant, so everything here works
in ``D``'s eigenbasis. There ``alpha_t`` is the entrywise multiplication by
``exp(it(lambda_i - lambda_j))`` and no matrix exponential is formed.

On the circle model, times below ``floor_coeff / L`` are never used. At those
scales the truncated model is effectively finite-dimensional, and every
operator would look differentiable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from ._workers import parallel_map
from .config import DEFAULT_CONFIG, AnalysisConfig
from .derivatives import (BoundednessVerdict, DerivativeChain, Status, classify_growth,
                          higher_derivative, weak_derivative)
from .errors import ValidationError
from .norms import spectral_norm
from .spectral import SelfAdjointModel


class Classification(str, Enum):
    STRONG = "Strong"
    WEAK_ONLY = "WeakOnly"
    NOT_WEAK = "NotWeak"
    INCONCLUSIVE = "Inconclusive"


class DomainVerdict(str, Enum):
    IN_DOMAIN = "InDomain"
    NOT_IN_DOMAIN = "NotInDomain"
    INCONCLUSIVE = "Inconclusive"


class _Orbit:
    """``alpha_t`` applied to one fixed operator, in ``D``'s eigenbasis."""

    def __init__(self, D: SelfAdjointModel, a):
        a = np.asarray(a, dtype=np.complex128)
        if a.shape != (D.dim, D.dim):
            raise ValidationError(f"operator shape {a.shape} does not match dimension {D.dim}")
        lam, vec = D.eigh()
        self.lam = np.asarray(lam)
        self.vec = vec
        self.a = a if vec is None else vec.conj().T @ a @ vec
        self.gap = self.lam[:, None] - self.lam[None, :]

    def at(self, t: float) -> np.ndarray:
        return np.exp(1j * t * self.gap) * self.a

    def increment(self, t: float) -> np.ndarray:
        """A unitary conjugate of ``alpha_t(a) - a`` (same norm, not the same matrix).

        Conjugating by ``e^{-itD/2}`` turns the entrywise factor
        ``e^{it g} - 1`` into ``2i sin(t g / 2)``. That is accurate at small
        ``t`` and keeps real (or purely imaginary) inputs real up to a
        factor ``i``, which lets the norm use a real eigensolver.
        """
        return (2j * np.sin(0.5 * t * self.gap)) * self.a

    def difference(self, t: float) -> np.ndarray:
        """``alpha_t(a) - a`` in the eigenbasis."""
        return np.expm1(1j * t * self.gap) * self.a

    def ambient(self, m: np.ndarray) -> np.ndarray:
        return m if self.vec is None else self.vec @ m @ self.vec.conj().T


def alpha(D: SelfAdjointModel, a, t: float) -> np.ndarray:
    """``e^{itD} a e^{-itD}`` as a dense ambient matrix."""
    orbit = _Orbit(D, a)
    return orbit.ambient(orbit.at(t))


def valid_floor(D: SelfAdjointModel, config: AnalysisConfig = DEFAULT_CONFIG) -> float:
    """Smallest trusted time: ``floor_coeff / L`` on the circle, 0 for finite models."""
    if D.is_circle:
        return config.floor_coeff / D.bandlimit
    return 0.0


def default_time_grid(D: SelfAdjointModel, config: AnalysisConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Log-spaced times from the floor up ``config.decades`` decades.

    On the circle the grid stops at pi: ``alpha_t`` is 2pi-periodic there and
    ``||alpha_{-t}(a) - a|| = ||alpha_t(a) - a||``.
    """
    start = valid_floor(D, config) if D.is_circle else config.finite_t_min
    count = int(round(config.points_per_decade * config.decades)) + 1
    grid = start * 10.0 ** (np.arange(count) / config.points_per_decade)
    if D.is_circle:
        grid = grid[grid <= np.pi * (1 + 1e-12)]
    return grid


def _admit(D, t_grid, config) -> np.ndarray:
    floor = valid_floor(D, config)
    if t_grid is None:
        t_grid = default_time_grid(D, config)
    t = np.sort(np.asarray(t_grid, dtype=np.float64))
    if np.any(t <= 0):
        raise ValidationError("time grid must be positive")
    # relative slack so a grid built exactly at the floor is not dropped by rounding
    t = t[t >= floor * (1 - 1e-12)]
    if t.size == 0:
        raise ValidationError(f"no grid points at or above the valid floor {floor:g}")
    return t


@dataclass
class LipschitzReport:
    t_grid: List[float]
    ratios: List[float]
    sup_ratio: float
    limit_estimate: float
    valid_floor: float

    def to_json(self) -> dict:
        return {
            "t": list(self.t_grid),
            "ratio": list(self.ratios),
            "sup_ratio": self.sup_ratio,
            "limit_estimate": self.limit_estimate,
            "valid_floor": self.valid_floor,
        }


def lipschitz_estimate(D: SelfAdjointModel, a, t_grid: Optional[Sequence[float]] = None,
                       config: AnalysisConfig = DEFAULT_CONFIG) -> LipschitzReport:
    """Ratios ``||alpha_t(a) - a|| / t`` over the admitted grid."""
    t = _admit(D, t_grid, config)
    orbit = _Orbit(D, a)
    norms = parallel_map(lambda s: spectral_norm(orbit.increment(s), rtol=config.norm_tol), t)
    ratios = [float(n / s) for n, s in zip(norms, t)]
    return LipschitzReport([float(s) for s in t], ratios, max(ratios), ratios[0],
                           valid_floor(D, config))


@dataclass
class ContinuityModulus:
    """``omega(delta) = sup_{t <= delta} ||alpha_t(b) - b||`` on a grid.

    ``delta_grid`` is decreasing, so ``omega`` is nonincreasing along it.
    """

    delta_grid: List[float]
    omega: List[float]
    b_norm: float

    @property
    def omega_min(self) -> float:
        return self.omega[-1]

    def at(self, delta: float) -> float:
        """``omega(delta)`` for any ``delta`` at or above the smallest grid point."""
        vals = [w for d, w in zip(self.delta_grid, self.omega) if d <= delta * (1 + 1e-12)]
        if not vals:
            raise ValidationError(f"delta {delta:g} is below the grid")
        return max(vals)

    def to_json(self) -> dict:
        return {"delta": list(self.delta_grid), "omega": list(self.omega), "b_norm": self.b_norm}


def continuity_modulus(D: SelfAdjointModel, b, delta_grid: Optional[Sequence[float]] = None,
                       config: AnalysisConfig = DEFAULT_CONFIG) -> ContinuityModulus:
    t = _admit(D, delta_grid, config)
    orbit = _Orbit(D, b)
    incs = parallel_map(lambda s: spectral_norm(orbit.increment(s), rtol=config.norm_tol), t)
    omega = np.maximum.accumulate(np.asarray(incs, dtype=np.float64))
    b_norm = spectral_norm(orbit.a, rtol=config.norm_tol)
    return ContinuityModulus([float(s) for s in t[::-1]], [float(w) for w in omega[::-1]], b_norm)


@dataclass
class DiffReport:
    classification: Classification
    weak_verdict: BoundednessVerdict
    lipschitz: LipschitzReport
    continuity: Optional[ContinuityModulus] = None
    chain: Optional[DerivativeChain] = None
    notes: List[str] = field(default_factory=list)

    @property
    def wd_norm(self) -> Optional[float]:
        return self.weak_verdict.norm_estimate if self.weak_verdict.bounded else None

    def to_json(self) -> dict:
        out = {
            "classification": self.classification.value,
            "weak": self.weak_verdict.to_json(),
            "lipschitz": self.lipschitz.to_json(),
            "continuity": None if self.continuity is None else self.continuity.to_json(),
            "notes": list(self.notes),
        }
        if self.chain is not None:
            out["chain"] = self.chain.to_json()
        return out


def classify(D: SelfAdjointModel, a, config: AnalysisConfig = DEFAULT_CONFIG,
             t_grid: Optional[Sequence[float]] = None) -> DiffReport:
    """Weak/strong differentiability of ``a`` with respect to ``D``.

    Bounded weak derivatives are split by the continuity modulus of
    ``t -> alpha_t(wD(a))`` at the smallest admitted time: at most
    ``config.continuity * ||wD(a)||`` means Strong, at least
    ``config.discontinuity * ||wD(a)||`` means WeakOnly. The Lipschitz
    supremum must match ``||wD(a)||`` within ``config.lip_tol`` (relative),
    otherwise the result is Inconclusive.
    """
    notes = []
    if config.order > 1:
        chain = higher_derivative(D, a, config.order, config=config)
        verdict = chain.verdicts[0]
        wd = chain.terms[1] if len(chain.terms) > 1 else None
    else:
        chain = None
        verdict, wd = weak_derivative(D, a, config=config)
    if verdict.clipped:
        notes.append("sweep window reaches past the model bandlimit (spectral leakage)")
    lip = lipschitz_estimate(D, a, t_grid, config)

    if verdict.status is Status.UNBOUNDED:
        return DiffReport(Classification.NOT_WEAK, verdict, lip, None, chain, notes)
    if verdict.status is Status.INCONCLUSIVE:
        notes.append(f"growth exponent {verdict.growth_exponent:.4g} between thresholds")
        return DiffReport(Classification.INCONCLUSIVE, verdict, lip, None, chain, notes)

    cont = continuity_modulus(D, wd, t_grid, config)
    nb = verdict.norm_estimate
    scale = max(nb, 1e-300)
    if nb <= 1e-14 * max(1.0, spectral_norm(a)):
        result = Classification.STRONG
    elif cont.omega_min <= config.continuity * scale:
        result = Classification.STRONG
    elif cont.omega_min >= config.discontinuity * scale:
        result = Classification.WEAK_ONLY
    else:
        notes.append(f"continuity modulus {cont.omega_min:.4g} between thresholds")
        result = Classification.INCONCLUSIVE
    if abs(lip.sup_ratio - nb) > config.lip_tol * nb + 1e-12:
        notes.append(f"Lipschitz supremum {lip.sup_ratio:.6g} disagrees with ||wD(a)|| = {nb:.6g}")
        result = Classification.INCONCLUSIVE
    return DiffReport(result, verdict, lip, cont, chain, notes)


def matrix_element_quotient(D: SelfAdjointModel, a, mu, nu, t_grid: Sequence[float]) -> List[complex]:
    """``<(alpha_t(a) - a) mu, nu> / (it)`` for each ``t``."""
    orbit = _Orbit(D, a)
    mu = np.asarray(mu, dtype=np.complex128)
    nu = np.asarray(nu, dtype=np.complex128)
    if orbit.vec is not None:
        mu = orbit.vec.conj().T @ mu
        nu = orbit.vec.conj().T @ nu
    out = []
    for t in t_grid:
        if t == 0:
            raise ValidationError("t = 0 has no difference quotient")
        out.append(complex(np.vdot(nu, orbit.difference(t) @ mu) / (1j * t)))
    return out


@dataclass
class DomainProbe:
    verdict: DomainVerdict
    sup_quotient: float
    norm_estimate: Optional[float]
    growth_exponent: float
    s_grid: List[float]
    quotients: List[float]

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "sup_quotient": self.sup_quotient,
            "norm_estimate": self.norm_estimate,
            "growth_exponent": self.growth_exponent,
            "s": list(self.s_grid),
            "quotient": list(self.quotients),
        }


def default_probe_grid(D: SelfAdjointModel, config: AnalysisConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Log-spaced ``s`` from the floor up a factor of 8.

    The time grid's three decades are too wide here. For an eigenvector
    ``u_n``, the quotient ``2|sin(sn/2)|/s`` only settles near ``|n|`` while
    ``s|n|`` is well below 1, so a fit over large ``s`` would read the
    oscillation as growth.
    """
    grid = default_time_grid(D, config)
    return grid[grid <= 8 * grid[0] * (1 + 1e-12)]


def vector_domain_probe(D: SelfAdjointModel, xi, s_grid: Optional[Sequence[float]] = None,
                        config: AnalysisConfig = DEFAULT_CONFIG) -> DomainProbe:
    """Test whether ``xi`` lies in ``dom(D)`` from ``||(e^{isD} xi - xi) / s||``.

    The quotients are fitted as a power law in ``1/s``, using the same
    thresholds as :func:`~opderiv.derivatives.classify_growth`. For vectors
    judged InDomain, ``||D xi||`` is estimated by Richardson extrapolation
    in ``s^2`` through the three smallest ``s``. That cancels the ``s^2``
    and ``s^4`` terms.

    The default ``s`` grid is :func:`default_probe_grid`: three octaves
    above the floor, mirroring the ``L/8 .. L`` window sweep.
    """
    s = _admit(D, default_probe_grid(D, config) if s_grid is None else s_grid, config)
    lam, vec = D.eigh()
    lam = np.asarray(lam)
    c = np.asarray(xi, dtype=np.complex128)
    if c.shape != (D.dim,):
        raise ValidationError(f"vector length {c.shape} does not match dimension {D.dim}")
    if vec is not None:
        c = vec.conj().T @ c
    q = np.array([np.linalg.norm(np.expm1(1j * si * lam) * c) / si for si in s])
    curve = list(zip(1.0 / s, q))
    v = classify_growth(curve, config.growth_bounded, config.growth_unbounded)
    verdict = {Status.BOUNDED: DomainVerdict.IN_DOMAIN,
               Status.UNBOUNDED: DomainVerdict.NOT_IN_DOMAIN,
               Status.INCONCLUSIVE: DomainVerdict.INCONCLUSIVE}[v.status]
    estimate = None
    if verdict is DomainVerdict.IN_DOMAIN:
        # q(s)^2 is even in s: interpolate in s^2 through the smallest points, read off s = 0
        k = min(3, len(s))
        coef = np.polyfit(s[:k] ** 2, q[:k] ** 2, k - 1)
        estimate = float(np.sqrt(max(coef[-1], 0.0)))
    return DomainProbe(verdict, float(q.max()), estimate, v.growth_exponent,
                       [float(x) for x in s], [float(x) for x in q])
