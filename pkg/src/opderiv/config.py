"""Tunable knobs for an analysis run."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Optional, Tuple

from .errors import ValidationError


@dataclass(frozen=True)
class AnalysisConfig:
    """Sweep windows, time grids and classification thresholds.

    ``sweep`` of ``None`` lets the circle model pick ``L/8, L/4, L/2, L``.
    Time grids start at the valid floor (``floor_coeff / L`` on the circle,
    ``finite_t_min`` for finite models) and run ``decades`` decades up with
    ``points_per_decade`` log-spaced points, capped at pi on the circle.
    """

    sweep: Optional[Tuple[int, ...]] = None
    floor_coeff: float = 10.0
    points_per_decade: int = 24
    decades: float = 3.0
    finite_t_min: float = 1e-4
    growth_bounded: float = 0.02
    growth_unbounded: float = 0.10
    continuity: float = 0.1
    discontinuity: float = 0.5
    norm_tol: float = 1e-9
    lip_tol: float = 0.05
    order: int = 1

    def __post_init__(self):
        for name in ("floor_coeff", "decades", "finite_t_min", "growth_bounded",
                     "growth_unbounded", "continuity", "discontinuity", "norm_tol", "lip_tol"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"config field {name} must be positive")
        if self.points_per_decade < 1:
            raise ValidationError("points_per_decade must be >= 1")
        if self.growth_bounded >= self.growth_unbounded:
            raise ValidationError("growth_bounded must be below growth_unbounded")
        if self.continuity >= self.discontinuity:
            raise ValidationError("continuity threshold must be below discontinuity threshold")
        if self.order < 1:
            raise ValidationError("order must be >= 1")
        if self.sweep is not None:
            sweep = tuple(int(n) for n in self.sweep)
            if not sweep or any(n < 1 for n in sweep):
                raise ValidationError("sweep windows must be positive integers")
            if any(b <= a for a, b in zip(sweep, sweep[1:])):
                raise ValidationError("sweep must be strictly increasing")
            object.__setattr__(self, "sweep", sweep)

    def to_json(self) -> dict:
        out = asdict(self)
        out["sweep"] = None if self.sweep is None else list(self.sweep)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "AnalysisConfig":
        if not isinstance(obj, dict):
            raise ValidationError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**obj)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise
            raise ValidationError(f"bad config: {exc}") from None

    def replace(self, **changes) -> "AnalysisConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(changes)
        return AnalysisConfig(**data)


DEFAULT_CONFIG = AnalysisConfig()
