"""Batch command-line front end with deterministic machine-readable reports.

Every invocation runs one construction, prints one report to stdout, and
exits with a status that classifies the outcome: 0 for success, 2 when a
verified invariant or conjecture fails (the failure is itself reported as
data), 3 for configuration and parse problems, 4 when the Weyl traversal
cap is exceeded, and 5 for constructions the library does not support.

Reports embed the input echo, the library version, and the residual table
of every invariant that was checked, and identical configurations produce
byte-identical output.  Single constructions emit JSON; sweeps emit CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass
from fractions import Fraction as Q
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .affine import (
    ModularData,
    load_modular_data,
    modular_data,
    save_modular_data,
    verify_modular_invariants,
)
from .blocks import fourier_eigendims, symmetry_trace
from .boundary import automorphism_type_decomposition, classifying_algebra
from .errors import (
    CartanDataError,
    ConjectureViolation,
    ExtensionRejected,
    IntegralityError,
    InternalConsistencyError,
    InvariantViolation,
    PreconditionError,
    UnderdeterminedCocycle,
    UnsupportedFolding,
    WeylCapExceeded,
)
from .fusion import SimpleCurrentGroup, simple_currents, verlinde_tensor
from .liealg import build_algebra, center_group
from .orbifold import assemble_orbifold, conjecture2_trace, inner_orbifold_input
from .simplecurrent import extend_by_group

__all__ = [
    "JobConfig",
    "run",
    "cache_roundtrip",
    "build_parser",
    "main",
    "EXIT_OK",
    "EXIT_INVARIANT",
    "EXIT_PARSE",
    "EXIT_CAP",
    "EXIT_UNSUPPORTED",
]

EXIT_OK = 0
EXIT_INVARIANT = 2
EXIT_PARSE = 3
EXIT_CAP = 4
EXIT_UNSUPPORTED = 5

CONSTRUCTIONS = (
    "modular-data",
    "fusion",
    "extend",
    "orbifold",
    "boundary",
    "trace",
    "check",
    "sweep",
)

CACHE_ENV = "WZWKIT_CACHE_DIR"

SWEEP_COLUMNS = (
    "algebra",
    "level",
    "status",
    "dim",
    "max_residual",
    "fusion_residual",
    "simple_current_order",
    "center_match",
)


@dataclass
class JobConfig:
    """One batch job: a construction plus everything it needs.

    Field defaults match the command-line defaults; ``validate`` enforces
    that the parameters are complete for the chosen construction.
    """

    construction: str
    algebra: str = ""
    level: int = 0
    group: str | None = None
    shift: tuple[Q, ...] | None = None
    insertions: tuple[int, ...] | None = None
    genus: int = 0
    current_tuple: tuple[int, ...] | None = None
    conjecture: int | None = None
    levels: tuple[int, int] | None = None
    tolerance: float = 1e-8
    weyl_cap: int = 200000
    cache_dir: str | None = None
    fmt: str = "json"

    def validate(self) -> None:
        if self.construction not in CONSTRUCTIONS:
            raise PreconditionError(
                f"unknown construction {self.construction!r}; "
                f"expected one of {', '.join(CONSTRUCTIONS)}"
            )
        if not self.algebra:
            raise PreconditionError("an algebra label is required")
        if self.tolerance <= 0:
            raise PreconditionError("tolerances must be positive")
        if self.weyl_cap < 1:
            raise PreconditionError("--weyl-cap must be a positive integer")
        if self.fmt not in ("json", "csv", "pretty"):
            raise PreconditionError(f"unknown output format {self.fmt!r}")
        if self.fmt == "csv" and self.construction != "sweep":
            raise PreconditionError("csv output is only defined for sweeps")
        if self.construction == "sweep":
            if self.levels is None:
                raise PreconditionError("sweep requires --levels, e.g. --levels 1-6")
            lo, hi = self.levels
            if lo < 1 or hi < lo:
                raise PreconditionError(f"bad level range {lo}-{hi}")
            return
        if self.level < 1:
            raise PreconditionError("--level must be a positive integer")
        if self.construction in ("extend", "boundary") and not self.group:
            raise PreconditionError(f"{self.construction} requires --group")
        if self.construction == "orbifold" and self.shift is None:
            raise PreconditionError("orbifold requires --shift")
        if self.construction == "trace":
            if self.conjecture not in (1, 2):
                raise PreconditionError("trace requires --conjecture 1 or 2")
            if self.insertions is None:
                raise PreconditionError("trace requires --insertions")
            if self.conjecture == 2:
                if self.shift is None:
                    raise PreconditionError("trace --conjecture 2 requires --shift")
                if len(self.insertions) != 3:
                    raise PreconditionError(
                        "trace --conjecture 2 takes exactly three insertions"
                    )

    def echo(self) -> dict:
        """Input echo for the report; omits unset optional fields."""
        out: dict = {
            "construction": self.construction,
            "algebra": self.algebra,
            "tolerance": self.tolerance,
            "weyl_cap": self.weyl_cap,
            "format": self.fmt,
        }
        if self.construction == "sweep":
            out["levels"] = list(self.levels) if self.levels else None
        else:
            out["level"] = self.level
        for name in ("group", "genus", "conjecture", "cache_dir"):
            value = getattr(self, name)
            if value not in (None, 0):
                out[name] = value
        if self.shift is not None:
            out["shift"] = [str(x) for x in self.shift]
        if self.insertions is not None:
            out["insertions"] = list(self.insertions)
        if self.current_tuple is not None:
            out["tuple"] = list(self.current_tuple)
        return out


# ---------------------------------------------------------------------------
# Serialization.
# ---------------------------------------------------------------------------


def _encode(value):
    """Make a value JSON-ready with a fixed, reproducible convention.

    Rationals become exact strings, complex numbers become [re, im]
    pairs, and arrays become nested lists.  Floats rely on shortest
    round-trip repr, which stays within 17 significant digits.
    """
    if value is None or isinstance(value, (bool, int, str, float)):
        return value
    if isinstance(value, Q):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.complexfloating):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.ndarray):
        return _encode(value.tolist())
    if isinstance(value, dict):
        return {str(key): _encode(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = sorted(value) if isinstance(value, (set, frozenset)) else value
        return [_encode(item) for item in items]
    raise PreconditionError(f"cannot serialize a {type(value).__name__} into a report")


def _render(document: dict, fmt: str) -> str:
    payload = _encode(document)
    if fmt == "pretty":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def _document(config: JobConfig, result: dict, residuals: dict) -> dict:
    return {
        "input": config.echo(),
        "version": __version__,
        "status": "ok",
        "result": result,
        "residuals": residuals,
    }


_ERROR_TABLE: tuple[tuple[type, str, int], ...] = (
    (WeylCapExceeded, "cap-exceeded", EXIT_CAP),
    (UnsupportedFolding, "unsupported", EXIT_UNSUPPORTED),
    (UnderdeterminedCocycle, "unsupported", EXIT_UNSUPPORTED),
    (ExtensionRejected, "extension-rejected", EXIT_INVARIANT),
    (ConjectureViolation, "conjecture-failure", EXIT_INVARIANT),
    (InvariantViolation, "invariant-failure", EXIT_INVARIANT),
    (IntegralityError, "invariant-failure", EXIT_INVARIANT),
    (InternalConsistencyError, "invariant-failure", EXIT_INVARIANT),
    (PreconditionError, "parse-error", EXIT_PARSE),
    (CartanDataError, "parse-error", EXIT_PARSE),
)


def _classify(exc: Exception) -> tuple[str, int] | None:
    for etype, code, status in _ERROR_TABLE:
        if isinstance(exc, etype):
            return code, status
    return None


def _error_detail(exc: Exception) -> dict:
    if isinstance(exc, InvariantViolation):
        return {
            "relation": exc.relation,
            "residual": exc.residual,
            "tolerance": exc.tol,
        }
    if isinstance(exc, IntegralityError):
        return {"quantity": exc.what, "residual": exc.residual}
    if isinstance(exc, WeylCapExceeded):
        return {"cap": exc.cap}
    if isinstance(exc, ConjectureViolation):
        return {"report": exc.report}
    return {}


def _error_document(config: JobConfig, exc: Exception, code: str) -> dict:
    return {
        "input": config.echo(),
        "version": __version__,
        "status": "error",
        "error": {
            "code": code,
            "type": type(exc).__name__,
            "message": str(exc),
            **_error_detail(exc),
        },
    }


# ---------------------------------------------------------------------------
# Construction handlers.  Each returns (result, residuals).
# ---------------------------------------------------------------------------


def _load(config: JobConfig) -> ModularData:
    return modular_data(
        config.algebra,
        config.level,
        cache_dir=config.cache_dir,
        weyl_cap=config.weyl_cap,
        tol=config.tolerance,
    )


def _group_from_spec(md: ModularData, spec: str) -> SimpleCurrentGroup:
    full = simple_currents(md)
    if spec == "center":
        return full
    if spec == "trivial":
        return full.subgroup(())
    try:
        generators = tuple(int(tok) for tok in spec.split(","))
    except ValueError:
        raise PreconditionError(
            f"--group must be 'center', 'trivial', or comma-separated "
            f"label indices, got {spec!r}"
        ) from None
    for g in generators:
        if g not in full.indices:
            raise PreconditionError(f"label index {g} is not a simple current")
    return full.subgroup(generators)


def _fusion_residual(md: ModularData) -> float:
    s = md.smatrix
    raw = np.einsum("ak,bk,ck->abc", s, s, s.conj() / s[0])
    return float(np.abs(raw - np.round(raw.real)).max())


def _run_modular_data(config: JobConfig):
    md = _load(config)
    residuals = verify_modular_invariants(md, config.tolerance)
    result = {
        "algebra": md.algebra,
        "level": md.level,
        "dim": md.dim,
        "labels": [list(lab) for lab in md.labels],
        "central_charge": md.central_charge,
        "delta": list(md.delta),
        "smatrix": md.smatrix,
    }
    return result, residuals


def _run_fusion(config: JobConfig):
    md = _load(config)
    residuals = verify_modular_invariants(md, config.tolerance)
    tensor = verlinde_tensor(md)
    residuals["fusion_integrality"] = _fusion_residual(md)
    group = simple_currents(md)
    nonzero = [
        [a, b, c, int(tensor[a, b, c])]
        for a, b, c in itertools.product(range(md.dim), repeat=3)
        if tensor[a, b, c]
    ]
    result = {
        "dim": md.dim,
        "labels": [list(lab) for lab in md.labels],
        "nonzero": nonzero,
        "simple_currents": [list(md.labels[j]) for j in group.indices],
    }
    return result, residuals


def _run_extend(config: JobConfig):
    md = _load(config)
    group = _group_from_spec(md, config.group)
    ext = extend_by_group(md, group, tol=config.tolerance)
    residuals = verify_modular_invariants(ext.md, config.tolerance)
    result = {
        "group_order": group.order,
        "classes": [
            {
                "rep": list(md.labels[cls.rep]),
                "char": {str(j): v for j, v in sorted(cls.char.items())},
            }
            for cls in ext.classes
        ],
        "dim": ext.md.dim,
        "delta": list(ext.md.delta),
        "smatrix": ext.md.smatrix,
        "zmatrix": np.round(ext.zmatrix.real).astype(int),
    }
    return result, residuals


def _run_orbifold(config: JobConfig):
    md = _load(config)
    oin = inner_orbifold_input(md, config.shift)
    orb = assemble_orbifold(oin, tol=config.tolerance)
    result = {
        "dim": orb.md.dim,
        "labels": [[list(lab), sign, twist] for lab, sign, twist in orb.labels],
        "delta": list(orb.md.delta),
        "smatrix": orb.md.smatrix,
        "pmatrix": orb.pmatrix,
    }
    return result, dict(orb.residuals)


def _run_boundary(config: JobConfig):
    md = _load(config)
    group = _group_from_spec(md, config.group)
    algebra = classifying_algebra(md, group, tol=config.tolerance)
    residuals = dict(algebra.residuals)
    nonzero = [
        [l, m, n, int(round(algebra.nhat[l, m, n].real))]
        for l, m, n in itertools.product(range(algebra.dim), repeat=3)
        if abs(algebra.nhat[l, m, n]) > 0.5
    ]
    result = {
        "dim": algebra.dim,
        "hat_labels": [
            {"sector": h.sector, "char": {str(j): v for j, v in h.char}}
            for h in algebra.hat_labels
        ],
        "boundary_labels": [
            {"rep": b.rep, "orbit": list(b.orbit), "char": {str(j): v for j, v in b.char}}
            for b in algebra.boundary_labels
        ],
        "smatrix": algebra.smatrix,
        "nhat_nonzero": nonzero,
        "reflection": algebra.reflection_coefficients(),
    }
    if group.order == 2:
        decomposition = automorphism_type_decomposition(algebra, tol=config.tolerance)
        residuals["automorphism_type_ideals"] = decomposition.residual
        result["automorphism_types"] = [
            {"type": name, "members": list(members)}
            for name, members in decomposition.parts
        ]
    return result, residuals


def _run_trace(config: JobConfig):
    md = _load(config)
    if config.conjecture == 1:
        group = simple_currents(md)
        spectrum = fourier_eigendims(
            md, group, config.insertions, genus=config.genus
        )
        result = {
            "rank": spectrum.rank,
            "admissible": [list(t) for t in spectrum.admissible],
            "untwisted": [list(t) for t in spectrum.untwisted],
            "traces": {str(t): spectrum.traces[t] for t in spectrum.untwisted},
            "dims": {
                ",".join(str(v) for v in key): dim
                for key, dim in sorted(spectrum.dims.items())
            },
        }
        if config.current_tuple is not None:
            if len(config.current_tuple) != len(config.insertions):
                raise PreconditionError(
                    "--tuple must assign one current per insertion"
                )
            result["tuple_trace"] = symmetry_trace(
                md, group, config.insertions, config.current_tuple, config.genus
            )
        return result, {}
    oin = inner_orbifold_input(md, config.shift)
    try:
        outcome = conjecture2_trace(oin, config.insertions, orientation=1)
    except ConjectureViolation:
        outcome = conjecture2_trace(oin, config.insertions, orientation=-1)
    result = {
        "trace": outcome.trace,
        "rank": outcome.rank,
        "dim_plus": outcome.dim_plus,
        "dim_minus": outcome.dim_minus,
        "orientation": outcome.orientation,
    }
    return result, {}


def _center_order_multiset(factors: Sequence[int]) -> list[int]:
    orders = []
    for element in itertools.product(*(range(d) for d in factors)):
        order = 1
        for a, d in zip(element, factors):
            order = order * (d // math.gcd(a, d)) // math.gcd(order, d // math.gcd(a, d))
        orders.append(order)
    return sorted(orders)


def _run_check(config: JobConfig):
    md = _load(config)
    residuals = verify_modular_invariants(md, config.tolerance)
    verlinde_tensor(md)
    residuals["fusion_integrality"] = _fusion_residual(md)
    group = simple_currents(md)
    detected = sorted(group.element_order(j) for j in group.indices)
    expected = _center_order_multiset(center_group(build_algebra(config.algebra)).factors)
    match = detected == expected
    residuals["simple_current_center"] = 0.0 if match else 1.0
    if not match:
        raise InvariantViolation(
            "simple_current_center",
            1.0,
            0.0,
            f"element orders {detected} vs center orders {expected}",
        )
    result = {
        "dim": md.dim,
        "simple_current_order": group.order,
        "center_invariant_factors": list(
            center_group(build_algebra(config.algebra)).factors
        ),
        "center_match": match,
    }
    return result, residuals


_HANDLERS = {
    "modular-data": _run_modular_data,
    "fusion": _run_fusion,
    "extend": _run_extend,
    "orbifold": _run_orbifold,
    "boundary": _run_boundary,
    "trace": _run_trace,
    "check": _run_check,
}


def _run_sweep(config: JobConfig) -> tuple[str, int]:
    """Run the check pipeline over a level range; failures become rows."""
    lo, hi = config.levels
    rows = []
    worst = EXIT_OK
    for level in range(lo, hi + 1):
        sub = JobConfig(
            construction="check",
            algebra=config.algebra,
            level=level,
            tolerance=config.tolerance,
            weyl_cap=config.weyl_cap,
            cache_dir=config.cache_dir,
        )
        row = {"algebra": config.algebra, "level": level}
        try:
            result, residuals = _run_check(sub)
        except Exception as exc:
            classified = _classify(exc)
            if classified is None:
                raise
            code, status = classified
            worst = max(worst, EXIT_INVARIANT if status != EXIT_OK else EXIT_OK)
            row.update(
                status=code,
                dim="",
                max_residual="",
                fusion_residual="",
                simple_current_order="",
                center_match="",
            )
        else:
            fusion_residual = residuals.pop("fusion_integrality")
            residuals.pop("simple_current_center", None)
            row.update(
                status="ok",
                dim=result["dim"],
                max_residual=max(residuals.values()),
                fusion_residual=fusion_residual,
                simple_current_order=result["simple_current_order"],
                center_match=result["center_match"],
            )
        rows.append(row)
    if config.fmt in ("json", "pretty"):
        document = {
            "input": config.echo(),
            "version": __version__,
            "status": "ok" if worst == EXIT_OK else "error",
            "rows": rows,
        }
        return _render(document, config.fmt), worst
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow([str(row[col]) for col in SWEEP_COLUMNS])
    return buffer.getvalue(), worst


def run(config: JobConfig) -> tuple[str, int]:
    """Execute one job and return (report text, exit status).

    Failures of checked invariants are reported as structured error
    documents with a stable code, never as tracebacks.
    """
    try:
        config.validate()
        if config.construction == "sweep":
            return _run_sweep(config)
        result, residuals = _HANDLERS[config.construction](config)
        return _render(_document(config, result, residuals), config.fmt), EXIT_OK
    except Exception as exc:
        classified = _classify(exc)
        if classified is None:
            raise
        code, status = classified
        fmt = "json" if config.fmt == "csv" else config.fmt
        return _render(_error_document(config, exc, code), fmt), status


def cache_roundtrip(md: ModularData, cache_dir: str | Path) -> ModularData:
    """Serialize modular data to disk and reload it, verifying equality.

    Every field must survive bit for bit: floats are written with
    shortest round-trip precision and rationals as exact strings.
    """
    save_modular_data(md, cache_dir)
    loaded = load_modular_data(md.algebra, md.level, cache_dir)
    if loaded is None:
        raise InternalConsistencyError("cache entry unreadable immediately after write")
    same = (
        loaded.algebra == md.algebra
        and loaded.level == md.level
        and loaded.labels == md.labels
        and loaded.delta == md.delta
        and loaded.central_charge == md.central_charge
        and np.array_equal(loaded.smatrix, md.smatrix)
    )
    if not same:
        raise InternalConsistencyError("cache round trip altered the modular data")
    return loaded


# ---------------------------------------------------------------------------
# Argument parsing.
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of calling sys.exit."""

    def error(self, message):
        raise PreconditionError(message)


def _parse_rationals(text: str) -> tuple[Q, ...]:
    try:
        return tuple(Q(tok) for tok in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"expected comma-separated rationals, got {text!r}") from None


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise PreconditionError(f"expected comma-separated integers, got {text!r}") from None


def _parse_levels(text: str) -> tuple[int, int]:
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return int(lo), int(hi)
        single = int(text)
        return single, single
    except ValueError:
        raise PreconditionError(f"expected a level range like 2-6, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="wzwkit",
        description="Modular data, fusion, extensions, orbifolds and boundaries "
        "for affine Lie algebra theories.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="construction")

    def common(sub, with_level: bool = True):
        sub.add_argument("algebra", help="algebra label such as A1, B3, or G2")
        if with_level:
            sub.add_argument("--level", type=int, default=0)
        sub.add_argument("--tolerance", type=float, default=1e-8)
        sub.add_argument("--weyl-cap", type=int, default=200000)
        sub.add_argument("--cache-dir", default=None)
        sub.add_argument(
            "--format",
            dest="fmt",
            choices=("json", "csv", "pretty"),
            default=None,
        )

    common(subparsers.add_parser("modular-data", help="S matrix and weights"))
    common(subparsers.add_parser("fusion", help="Verlinde coefficients"))

    extend = subparsers.add_parser("extend", help="simple-current extension")
    common(extend)
    extend.add_argument("--group", required=True, help="center, trivial, or indices")

    orbifold = subparsers.add_parser("orbifold", help="inner Z2 orbifold")
    common(orbifold)
    orbifold.add_argument("--shift", required=True, help="comma-separated rationals")

    boundary = subparsers.add_parser("boundary", help="classifying algebra")
    common(boundary)
    boundary.add_argument("--group", required=True, help="center, trivial, or indices")

    trace = subparsers.add_parser("trace", help="conjecture traces")
    common(trace)
    trace.add_argument("--conjecture", type=int, choices=(1, 2), required=True)
    trace.add_argument("--insertions", required=True, help="comma-separated label indices")
    trace.add_argument("--genus", type=int, default=0)
    trace.add_argument("--tuple", dest="current_tuple", default=None)
    trace.add_argument("--shift", default=None)

    common(subparsers.add_parser("check", help="full invariant suite"))

    sweep = subparsers.add_parser("sweep", help="check across a level range")
    common(sweep, with_level=False)
    sweep.add_argument("--levels", required=True, help="range like 1-6")

    return parser


def config_from_args(argv: Sequence[str] | None = None) -> JobConfig:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.construction is None:
        raise PreconditionError("a construction subcommand is required")
    fmt = args.fmt
    if fmt is None:
        fmt = "csv" if args.construction == "sweep" else "json"
    return JobConfig(
        construction=args.construction,
        algebra=args.algebra,
        level=getattr(args, "level", 0),
        group=getattr(args, "group", None),
        shift=_parse_rationals(args.shift) if getattr(args, "shift", None) else None,
        insertions=(
            _parse_ints(args.insertions) if getattr(args, "insertions", None) else None
        ),
        genus=getattr(args, "genus", 0),
        current_tuple=(
            _parse_ints(args.current_tuple)
            if getattr(args, "current_tuple", None)
            else None
        ),
        conjecture=getattr(args, "conjecture", None),
        levels=_parse_levels(args.levels) if getattr(args, "levels", None) else None,
        tolerance=args.tolerance,
        weyl_cap=args.weyl_cap,
        cache_dir=args.cache_dir or os.environ.get(CACHE_ENV),
        fmt=fmt,
    )


def main(argv: Sequence[str] | None = None) -> int:
    """Console entry point; prints one report and returns the exit status."""
    try:
        config = config_from_args(argv)
    except PreconditionError as exc:
        stub = JobConfig(construction="invalid", algebra="")
        sys.stdout.write(_render(_error_document(stub, exc, "parse-error"), "json"))
        return EXIT_PARSE
    text, status = run(config)
    sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
