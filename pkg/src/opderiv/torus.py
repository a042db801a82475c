"""Multiplication operators on the circle in the Fourier basis ``u_n = e^{in theta}``.

``M_f`` has matrix entries ``f^(r - c)``, and ``D = -i d/dtheta`` is diagonal
with eigenvalue ``n`` on ``u_n``. All coefficients come from closed forms, so
the series for ``|x|`` and ``sign(x)`` are represented exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
from scipy.special import zeta

from .config import DEFAULT_CONFIG, AnalysisConfig
from .dynamics import DomainProbe, DomainVerdict, vector_domain_probe
from .errors import ValidationError
from .spectral import SelfAdjointModel

POWERLAW_EXPONENT = 1.25


def _odd(n: np.ndarray) -> np.ndarray:
    return (n % 2) != 0


def coeffs_absx(n):
    """Fourier coefficient of ``|x|`` on ``[-pi, pi)``.

    ``pi/2`` at 0, ``-2/(pi n^2)`` at odd ``n``, zero at even ``n != 0``.
    Accepts an int or an integer array.
    """
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.complex128)
    out[n == 0] = np.pi / 2
    odd = _odd(n)
    nf = n[odd].astype(np.float64)
    out[odd] = -2.0 / (np.pi * nf * nf)
    return out[()] if out.ndim == 0 else out


def coeffs_sign(n):
    """Fourier coefficient of ``sign(x)``: ``-2i/(pi n)`` at odd ``n``, else 0."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.complex128)
    odd = _odd(n)
    out[odd] = -2j / (np.pi * n[odd].astype(np.float64))
    return out[()] if out.ndim == 0 else out


def coeffs_powerlaw(n, p: float = POWERLAW_EXPONENT):
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.complex128)
    nz = n != 0
    out[nz] = np.abs(n[nz]).astype(np.float64) ** (-p)
    return out[()] if out.ndim == 0 else out


def coeffs_antiderivative(n):
    """``-2/(i pi n^3)`` at odd ``n``: an antiderivative of ``|x| - pi/2``."""
    n = np.asarray(n, dtype=np.int64)
    out = np.zeros(n.shape, dtype=np.complex128)
    odd = _odd(n)
    nf = n[odd].astype(np.float64)
    out[odd] = -2.0 / (1j * np.pi * nf * nf * nf)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class FourierFunction:
    """A function on the circle given by its Fourier coefficients.

    ``coeff`` maps an integer array to complex coefficients. ``bandlimit``
    of ``None`` means the closed form is valid for every ``n``; a table
    function is zero beyond its bandlimit.
    """

    name: str
    coeff: Callable[[np.ndarray], np.ndarray]
    bandlimit: Optional[int] = None
    sup_norm_hint: Optional[float] = None
    real_valued: bool = True

    def __call__(self, n):
        n = np.asarray(n, dtype=np.int64)
        c = np.asarray(self.coeff(n), dtype=np.complex128)
        if self.bandlimit is not None:
            c = np.where(np.abs(n) <= self.bandlimit, c, 0)
        return c

    def shifted(self, t: float) -> "FourierFunction":
        """``f(theta + t)``: coefficients multiplied by ``e^{int}``."""
        base = self.coeff
        return FourierFunction(f"{self.name}_shift", lambda n: np.exp(1j * t * n) * base(n),
                               self.bandlimit, self.sup_norm_hint, self.real_valued)

    def table(self, L: int) -> Dict[int, complex]:
        n = np.arange(-L, L + 1)
        return {int(k): complex(c) for k, c in zip(n, self(n))}

    def to_json(self, L: Optional[int] = None) -> dict:
        if self.name in BUILTINS and L is None:
            return {"type": "builtin", "name": self.name}
        L = L if L is not None else self.bandlimit
        if L is None:
            raise ValidationError("a bandlimit is needed to tabulate a closed-form function")
        return {
            "type": "table",
            "bandlimit": int(L),
            "coeffs": {str(k): [c.real, c.imag] for k, c in self.table(L).items() if c != 0},
        }


def _table_function(bandlimit: int, coeffs: Dict[int, complex], name: str = "table") -> FourierFunction:
    keys = np.array(sorted(coeffs), dtype=np.int64)
    vals = np.array([coeffs[k] for k in keys], dtype=np.complex128)

    def coeff(n):
        n = np.asarray(n, dtype=np.int64)
        out = np.zeros(n.shape, dtype=np.complex128)
        if keys.size:
            pos = np.clip(np.searchsorted(keys, n), 0, keys.size - 1)
            hit = keys[pos] == n
            out[hit] = vals[pos[hit]]
        return out

    real = all(coeffs.get(-k, 0) == np.conj(c) for k, c in coeffs.items())
    return FourierFunction(name, coeff, int(bandlimit), None, real)


def absx() -> FourierFunction:
    return FourierFunction("absx", coeffs_absx, None, np.pi)


def sign() -> FourierFunction:
    return FourierFunction("sign", coeffs_sign, None, 1.0)


def constant(value: float = 1.0) -> FourierFunction:
    return FourierFunction("constant", lambda n: np.where(np.asarray(n) == 0, value, 0).astype(np.complex128),
                           None, abs(value), bool(np.isreal(value)))


def powerlaw_unbounded() -> FourierFunction:
    # sup |f| = f(0) = 2 zeta(5/4): every coefficient is positive
    return FourierFunction("powerlaw_unbounded", coeffs_powerlaw, None,
                           float(2 * zeta(POWERLAW_EXPONENT)))


def antiderivative_smooth() -> FourierFunction:
    # g(theta) = theta^2/2 - pi theta/2 on [0, pi], odd; extreme value pi^2/8 at pi/2
    return FourierFunction("antiderivative_smooth", coeffs_antiderivative, None, np.pi ** 2 / 8)


BUILTINS = {
    "absx": absx,
    "sign": sign,
    "powerlaw_unbounded": powerlaw_unbounded,
    "antiderivative_smooth": antiderivative_smooth,
    "constant": constant,
}


def fourier_function_from_json(obj: dict) -> FourierFunction:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("FourierFunction JSON must be an object with a 'type' field")
    if obj["type"] == "builtin":
        name = obj.get("name")
        if name not in BUILTINS:
            raise ValidationError(f"unknown builtin function {name!r}")
        return BUILTINS[name]()
    if obj["type"] == "table":
        try:
            L = obj["bandlimit"]
            raw = obj["coeffs"]
            coeffs = {int(k): complex(v[0], v[1]) for k, v in raw.items()}
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ValidationError(f"malformed coefficient table: {exc}") from None
        if isinstance(L, bool) or not isinstance(L, int) or L < 0:
            raise ValidationError("table bandlimit must be a non-negative integer")
        if any(abs(k) > L for k in coeffs):
            raise ValidationError("table has coefficients beyond its bandlimit")
        return _table_function(L, coeffs)
    raise ValidationError(f"unknown FourierFunction type {obj['type']!r}")


def toeplitz(f: FourierFunction, L: int) -> np.ndarray:
    """Matrix of ``M_f`` on ``span{u_-L, ..., u_L}``: entry ``(r, c)`` is ``f^(r - c)``."""
    if L < 0:
        raise ValidationError("bandlimit must be non-negative")
    lags = f(np.arange(-2 * L, 2 * L + 1))
    idx = np.arange(2 * L + 1)
    return lags[(idx[:, None] - idx[None, :]) + 2 * L]


def torus_D(L: int) -> SelfAdjointModel:
    """``-i d/dtheta`` cut to the modes ``-L..L``."""
    return SelfAdjointModel.circle(L)


def basis_vector(n: int, L: int) -> np.ndarray:
    """``u_n`` as a coordinate vector on ``-L..L``."""
    if abs(n) > L:
        raise ValidationError(f"mode {n} is outside -{L}..{L}")
    v = np.zeros(2 * L + 1, dtype=np.complex128)
    v[n + L] = 1.0
    return v


def inverse_linear_vector(L: int) -> np.ndarray:
    """Unit vector with coefficients proportional to ``1/|n|`` (``n != 0``); not in ``dom(D)``."""
    n = np.arange(-L, L + 1)
    v = np.zeros(2 * L + 1, dtype=np.complex128)
    nz = n != 0
    v[nz] = 1.0 / np.abs(n[nz])
    return v / np.linalg.norm(v)


COUNTEREXAMPLES = ("powerlaw_unbounded", "antiderivative_smooth", "inverse_linear_vector")


def make_counterexample(kind: str, bandlimit: Optional[int] = None):
    """Designed witnesses: a bounded ``f`` with unbounded commutator, a twice
    differentiable symbol, and a unit vector outside ``dom(D)``.

    ``inverse_linear_vector`` needs ``bandlimit``; the others return a
    :class:`FourierFunction`.
    """
    if kind == "powerlaw_unbounded":
        return powerlaw_unbounded()
    if kind == "antiderivative_smooth":
        return antiderivative_smooth()
    if kind == "inverse_linear_vector":
        if bandlimit is None:
            raise ValidationError("inverse_linear_vector needs a bandlimit")
        return inverse_linear_vector(bandlimit)
    raise ValidationError(f"unknown counterexample kind {kind!r}")


def domain_invariance_probe(f: FourierFunction, xi, L: int, s_grid=None,
                            config: AnalysisConfig = DEFAULT_CONFIG) -> DomainProbe:
    """Apply ``M_f`` to ``xi`` (which must probe InDomain) and probe the image."""
    D = torus_D(L)
    before = vector_domain_probe(D, xi, s_grid, config)
    if before.verdict is not DomainVerdict.IN_DOMAIN:
        raise ValidationError(f"input vector probes {before.verdict.value}, expected InDomain")
    return vector_domain_probe(D, toeplitz(f, L) @ np.asarray(xi), s_grid, config)
