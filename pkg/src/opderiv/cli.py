"""Command-line front end.

Commands
--------
analyze     classify an operator ``a`` against a self-adjoint ``D`` (both JSON files)
classify    ``analyze --summary-only``: print the summary line, write nothing
torus-demo  run a built-in circle example and write its report bundle
sweep       repeat ``torus-demo`` over several bandlimits plus ``summary.csv``

Exit codes: 0 success, 2 malformed input, 3 numerical failure, 4 Inconclusive
under ``--strict``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import SCHEMA
from . import report as rpt
from . import torus
from .blockspace import commutator_with_D, embed_operator
from .config import AnalysisConfig
from .dynamics import Classification, classify, continuity_modulus
from .errors import NotDifferentiableError, NumericalError, ValidationError
from .spectral import SelfAdjointModel, band_decompose, complex_matrix_from_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INCONCLUSIVE = 4

MODELS = {
    "absx": "absx",
    "sign": "sign",
    "antideriv": "antiderivative_smooth",
    "powerlaw": "powerlaw_unbounded",
    "identity": "constant",
}
DEMO_MODELS = ("absx", "sign", "antideriv", "powerlaw")


def _read_json(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None


def load_operator(obj: dict, D: SelfAdjointModel) -> np.ndarray:
    """Build the dense operator described by ``obj`` on ``D``'s space.

    Accepted forms::

        {"type": "matrix", "entries": [[[re, im], ...], ...]}
        {"type": "spectral_projection", "bands": [n, ...]}
        {"type": "multiplication", "function": <FourierFunction JSON>}   (circle D only)
    """
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValidationError("operator JSON must be an object with a 'type' field")
    kind = obj["type"]
    if kind == "matrix":
        if "entries" not in obj:
            raise ValidationError("matrix operator needs 'entries'")
        a = complex_matrix_from_json(obj["entries"])
    elif kind == "spectral_projection":
        bands = obj.get("bands")
        if not isinstance(bands, list) or not all(isinstance(b, int) and not isinstance(b, bool)
                                                  for b in bands):
            raise ValidationError("spectral_projection needs an integer list 'bands'")
        bd = band_decompose(D)
        sel = np.isin(bd.band_of, bands)
        c = np.zeros(D.dim, dtype=np.complex128)
        c[sel] = 1.0
        a = bd.from_frame(np.diag(c))
    elif kind == "multiplication":
        if not D.is_circle:
            raise ValidationError("multiplication operators need a circle model for D")
        f = torus.fourier_function_from_json(obj.get("function"))
        a = torus.toeplitz(f, D.bandlimit)
    else:
        raise ValidationError(f"unknown operator type {kind!r}")
    if a.shape != (D.dim, D.dim):
        raise ValidationError(f"operator shape {a.shape} does not match D's dimension {D.dim}")
    return a


def _load_config(path, order: Optional[int]) -> AnalysisConfig:
    cfg = AnalysisConfig() if path is None else AnalysisConfig.from_json(_read_json(path))
    if order is not None:
        cfg = cfg.replace(order=order)
    return cfg


def _document(command: str, report, cfg: AnalysisConfig, started: float, reproducible: bool,
              **extra) -> dict:
    doc = {"schema": SCHEMA, "command": command, "summary": rpt.summary(report),
           "report": report.to_json(), "config": cfg.to_json()}
    doc.update(extra)
    if not reproducible:
        doc["metadata"] = {"versions": rpt.versions(), "wall_time_s": time.perf_counter() - started}
    return doc


def _finish(report, strict: bool) -> int:
    print(rpt.summary_line(report))
    if strict and report.classification is Classification.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_analyze(args) -> int:
    started = time.perf_counter()
    D = SelfAdjointModel.from_json(_read_json(args.D))
    a = load_operator(_read_json(args.a), D)
    cfg = _load_config(args.config, args.order)
    if not args.summary_only and args.out is None:
        raise ValidationError("--out is required unless --summary-only is given")
    report = classify(D, a, cfg)
    if not args.summary_only:
        doc = _document("analyze", report, cfg, started, args.reproducible, model=D.to_json())
        rpt.write_bundle(Path(args.out), doc, report)
    return _finish(report, args.strict)


def identity_check(L: int) -> float:
    """Largest entry of ``[D, M_|x|] - (1/i) M_sign`` at bandlimit ``L``.

    The identity holds entrywise (both sides are ``-2/(pi (r-c))`` at odd
    ``r - c``), so the max-entry norm measures plain rounding. An operator
    norm would add up rounding noise from all ``2L`` diagonals.
    """
    D = torus.torus_D(L)
    y = commutator_with_D(embed_operator(torus.toeplitz(torus.absx(), L), band_decompose(D)))
    return float(np.max(np.abs(y.data - torus.toeplitz(torus.sign(), L) / 1j)))


def run_model(model: str, L: int, cfg: AnalysisConfig, started: float, reproducible: bool):
    """Analyze one built-in circle model; returns ``(report, doc, coefficients, own_modulus)``."""
    if model not in MODELS:
        raise ValidationError(f"unknown model {model!r}")
    if L < 1:
        raise ValidationError("bandlimit must be a positive integer")
    f = torus.BUILTINS[MODELS[model]]()
    D = torus.torus_D(L)
    a = torus.toeplitz(f, L)
    report = classify(D, a, cfg)
    own = continuity_modulus(D, a, config=cfg)
    coeffs = f.table(L)
    extra = {"model": D.to_json(), "function": f.to_json(L), "operator_continuity": own.to_json()}
    if model == "absx":
        extra["identity_check"] = identity_check(L)
    doc = _document("torus-demo", report, cfg, started, reproducible, **extra)
    return report, doc, coeffs, own


def _demo_config(args, model: str) -> AnalysisConfig:
    # the antiderivative is the order-2 example; the chain is what makes it interesting
    order = args.order if args.order is not None else (2 if model == "antideriv" else None)
    return _load_config(args.config, order)


def cmd_torus_demo(args) -> int:
    started = time.perf_counter()
    cfg = _demo_config(args, args.model)
    report, doc, coeffs, own = run_model(args.model, args.bandlimit, cfg, started, args.reproducible)
    rpt.write_bundle(Path(args.out), doc, report, coeffs, own)
    if "identity_check" in doc:
        print(f"identity check max|[D, M_|x|] - (1/i) M_sign| = {doc['identity_check']:.3g}")
    return _finish(report, args.strict)


def _parse_bandlimits(text: str):
    try:
        values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ValidationError(f"bad --bandlimits {text!r}: expected comma-separated integers") from None
    if not values or any(v < 1 for v in values):
        raise ValidationError("--bandlimits needs positive integers")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("--bandlimits must be strictly increasing")
    return values


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    bandlimits = _parse_bandlimits(args.bandlimits)
    cfg = _demo_config(args, args.model)
    out = Path(args.out)
    rows, runs, last = [], [], None
    for L in bandlimits:
        report, doc, coeffs, own = run_model(args.model, L, cfg, time.perf_counter(), args.reproducible)
        rpt.write_bundle(out / f"L{L}", doc, report, coeffs, own)
        # omega: sup over the whole admitted grid of ||alpha_t(a) - a||
        omega = own.omega[0]
        rows.append((L, report.weak_verdict.norm_estimate, report.lipschitz.sup_ratio, omega))
        runs.append({"bandlimit": L, "summary": rpt.summary(report),
                     "norm_estimate": report.weak_verdict.norm_estimate, "omega": omega})
        print(f"L={L}: {rpt.summary_line(report)}")
        last = report
    rpt.write_csv(out / "summary.csv", ["bandlimit", "norm_estimate", "lip", "omega"], rows)
    doc = {"schema": SCHEMA, "command": "sweep", "summary": rpt.summary(last),
           "config": cfg.to_json(), "bandlimits": bandlimits, "runs": runs}
    if not args.reproducible:
        doc["metadata"] = {"versions": rpt.versions(), "wall_time_s": time.perf_counter() - started}
    rpt.write_json(out / "summary.json", doc)
    if args.strict and any(r["summary"]["classification"] == "Inconclusive" for r in runs):
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--order", type=int, default=None, help="derivative order for the chain (default 1)")
    p.add_argument("--config", default=None, help="AnalysisConfig JSON file")
    p.add_argument("--strict", action="store_true", help="exit 4 on an Inconclusive classification")
    p.add_argument("--reproducible", action="store_true",
                   help="omit run metadata (versions, wall time) so output is byte-identical")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opderiv",
        description="Weak and strong differentiability of operators along a self-adjoint D.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, summary_only in (("analyze", False), ("classify", True)):
        p = sub.add_parser(name, help="classify a from JSON operator files"
                           + (" (summary line only)" if summary_only else ""))
        p.add_argument("--D", required=True, help="SelfAdjointModel JSON file")
        p.add_argument("--a", required=True, help="operator JSON file")
        p.add_argument("--out", default=None, help="output directory for the report bundle")
        p.add_argument("--summary-only", action="store_true", default=summary_only,
                       help="print the summary line and write no files")
        _common(p)
        p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("torus-demo", help="run a built-in circle example")
    p.add_argument("--model", required=True, choices=DEMO_MODELS)
    p.add_argument("--bandlimit", type=int, required=True)
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_torus_demo)

    p = sub.add_parser("sweep", help="repeat a circle example over several bandlimits")
    p.add_argument("--model", required=True, choices=tuple(MODELS))
    p.add_argument("--bandlimits", required=True, help="comma-separated, e.g. 64,128,256,512")
    p.add_argument("--out", required=True)
    _common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # argparse exits 2 on usage errors
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, NotDifferentiableError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except Exception as exc:  # keep the exit-code contract to {0, 2, 3, 4}
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
