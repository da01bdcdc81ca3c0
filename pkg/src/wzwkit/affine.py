"""Modular data of untwisted affine Lie algebras at non-negative integer level.

The S matrix is computed from the Weyl-group character sum over shifted
weights and normalized so the vacuum row is real and positive.  Conformal
weights and the central charge are kept as exact rationals; the S matrix
itself is a complex floating-point array whose defining invariants are
verified to tight tolerance at construction time.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction as Q
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InvariantViolation
from .exact import phase_to_complex
from .liealg import SimpleLieAlgebra, build_algebra, weyl_traverse

__all__ = [
    "ModularData",
    "integrable_weights",
    "conformal_weight",
    "central_charge",
    "kac_peterson_smatrix",
    "verify_modular_invariants",
    "modular_data",
    "cache_path",
    "save_modular_data",
    "load_modular_data",
]

SCHEMA_VERSION = 1

# Incremented every time a Weyl traversal actually runs; cache hits leave it
# untouched, which the cache tests rely on.
WEYL_TRAVERSALS = 0


def integrable_weights(alg: SimpleLieAlgebra, level: int) -> tuple[tuple[int, ...], ...]:
    """Dominant weights integrable at the given level, in lexicographic order.

    The vacuum (all labels zero) always comes first.
    """
    if level < 0:
        raise ValueError("level must be a non-negative integer")
    out = []
    bound = [level // c for c in alg.comarks]

    def rec(prefix: list[int], budget: int) -> None:
        i = len(prefix)
        if i == alg.rank:
            out.append(tuple(prefix))
            return
        for v in range(min(bound[i], budget // alg.comarks[i]) + 1):
            prefix.append(v)
            rec(prefix, budget - v * alg.comarks[i])
            prefix.pop()

    rec([], level)
    out.sort()
    return tuple(out)


def conformal_weight(alg: SimpleLieAlgebra, level: int, label: Sequence[int]) -> Q:
    """Exact conformal weight (lam, lam + 2 rho) / (2 (level + h_vee))."""
    lam = tuple(label)
    shifted = tuple(x + 2 for x in lam)
    return alg.pairing(lam, shifted) / (2 * (level + alg.dual_coxeter))


def central_charge(alg: SimpleLieAlgebra, level: int) -> Q:
    return Q(level * alg.dim, level + alg.dual_coxeter)


@dataclass(eq=False)
class ModularData:
    """Labels, S matrix and exact conformal data of one rational theory.

    ``labels[0]`` is always the vacuum.  ``smatrix`` is unitary and symmetric
    with a positive real vacuum row; ``delta`` and ``central_charge`` are
    exact.  ``sj_provider``, when set, maps a simple-current label to its
    fixed-point S matrix (used by the trace and extension machinery).
    """

    algebra: str
    level: int
    labels: tuple[tuple, ...]
    smatrix: np.ndarray
    delta: tuple[Q, ...]
    central_charge: Q
    sj_provider: Callable | None = None
    _index: dict = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def vacuum(self) -> int:
        return 0

    def index(self, label) -> int:
        if self._index is None:
            self._index = {lab: i for i, lab in enumerate(self.labels)}
        return self._index[label]

    @property
    def t_exponents(self) -> tuple[Q, ...]:
        shift = self.central_charge / 24
        return tuple(d - shift for d in self.delta)

    def t_diagonal(self) -> np.ndarray:
        return np.array([phase_to_complex(e) for e in self.t_exponents])

    def conjugation_permutation(self) -> tuple[int, ...]:
        """Permutation i -> conj(i) read off from S squared."""
        c = self.smatrix @ self.smatrix
        perm = []
        for row in np.abs(c):
            j = int(np.argmax(row))
            perm.append(j)
        return tuple(perm)


def kac_peterson_smatrix(
    alg: SimpleLieAlgebra,
    level: int,
    labels: Sequence[tuple[int, ...]] | None = None,
    weyl_cap: int = 200000,
) -> np.ndarray:
    """S matrix from the Weyl sum over shifted weights, vacuum row positive."""
    global WEYL_TRAVERSALS
    if labels is None:
        labels = integrable_weights(alg, level)
    n = len(labels)
    kappa = level + alg.dual_coxeter
    shifted = np.array([[x + 1 for x in lab] for lab in labels], dtype=np.int64)
    gram = np.array([[float(v) for v in row] for row in alg.metric])
    raw = np.zeros((n, n), dtype=complex)
    WEYL_TRAVERSALS += 1
    for el in weyl_traverse(alg, weyl_cap):
        w = np.array(el.matrix, dtype=np.int64)
        moved = shifted @ w.T
        pairing = moved @ gram @ shifted.T
        raw += el.sign * np.exp((-2j * np.pi / kappa) * pairing)
    scale = 1.0 / np.linalg.norm(raw[0])
    phase = np.conj(raw[0, 0]) / abs(raw[0, 0])
    return phase * scale * raw


def verify_modular_invariants(md: ModularData, tol: float = 1e-9) -> dict[str, float]:
    """Check the defining relations of the modular data; raise on violation.

    Returns the residual of each relation so callers can report them.
    """
    s = md.smatrix
    n = md.dim
    eye = np.eye(n)
    residuals: dict[str, float] = {}

    def check(name: str, residual: float, detail: str = "") -> None:
        residuals[name] = float(residual)
        if not residual <= tol:
            raise InvariantViolation(name, float(residual), tol, detail)

    check("unitarity", np.abs(s @ s.conj().T - eye).max())
    check("symmetry", np.abs(s - s.T).max())
    check("vacuum_row_imag", np.abs(s[0].imag).max())
    if n and s[0].real.min() <= 0:
        raise InvariantViolation(
            "vacuum_row_positive", float(-s[0].real.min()), 0.0, "vacuum row must be positive"
        )
    residuals["vacuum_row_positive"] = 0.0
    c = (s @ s).real
    perm = np.round(c)
    check("conjugation_permutation", np.abs(c - perm).max() + np.abs((s @ s).imag).max())
    if not np.array_equal(perm @ perm, eye):
        raise InvariantViolation("conjugation_involution", 1.0, tol, "S^2 is not an involution")
    residuals["conjugation_involution"] = 0.0
    t = md.t_diagonal()
    st = s * t[np.newaxis, :]
    check("st_cubed", np.abs(st @ st @ st - s @ s).max())
    return residuals


def modular_data(
    algebra: str,
    level: int,
    cache_dir: str | Path | None = None,
    weyl_cap: int = 200000,
    tol: float = 1e-9,
    attach_sj: bool = True,
) -> ModularData:
    """Compute (or load from cache) verified modular data for one affine theory."""
    alg = build_algebra(algebra)
    md = None
    if cache_dir is not None:
        md = load_modular_data(algebra, level, cache_dir)
    if md is None:
        labels = integrable_weights(alg, level)
        s = kac_peterson_smatrix(alg, level, labels, weyl_cap)
        md = ModularData(
            algebra=alg.name,
            level=level,
            labels=labels,
            smatrix=s,
            delta=tuple(conformal_weight(alg, level, lab) for lab in labels),
            central_charge=central_charge(alg, level),
        )
        verify_modular_invariants(md, tol)
        if cache_dir is not None:
            save_modular_data(md, cache_dir)
    else:
        verify_modular_invariants(md, tol)
    if attach_sj and md.sj_provider is None:

        def _provider(current, _md=md):
            from .simplecurrent import fixed_point_smatrix

            return fixed_point_smatrix(_md, current)

        md.sj_provider = _provider
    return md


def cache_path(algebra: str, level: int, cache_dir: str | Path) -> Path:
    return Path(cache_dir) / f"{algebra}_k{level}.json"


def save_modular_data(md: ModularData, cache_dir: str | Path) -> Path:
    """Write modular data as deterministic JSON; returns the file path."""
    path = cache_path(md.algebra, md.level, cache_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "schema": SCHEMA_VERSION,
        "algebra": md.algebra,
        "level": md.level,
        "labels": [list(lab) for lab in md.labels],
        "smatrix": [[[z.real, z.imag] for z in row] for row in md.smatrix.tolist()],
        "delta": [str(d) for d in md.delta],
        "central_charge": str(md.central_charge),
    }
    path.write_text(json.dumps(payload, sort_keys=True) + "\n")
    return path


def load_modular_data(algebra: str, level: int, cache_dir: str | Path) -> ModularData | None:
    """Read cached modular data; None if absent, stale-schema, or unreadable."""
    path = cache_path(algebra, level, cache_dir)
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text())
        if payload.get("schema") != SCHEMA_VERSION:
            return None
        if payload["algebra"] != algebra or payload["level"] != level:
            raise ValueError("cache file does not match requested theory")
        labels = tuple(tuple(lab) for lab in payload["labels"])
        s = np.array(
            [[complex(re, im) for re, im in row] for row in payload["smatrix"]], dtype=complex
        )
        return ModularData(
            algebra=algebra,
            level=level,
            labels=labels,
            smatrix=s,
            delta=tuple(Q(d) for d in payload["delta"]),
            central_charge=Q(payload["central_charge"]),
        )
    except (ValueError, KeyError, TypeError) as exc:
        warnings.warn(f"ignoring unreadable cache file {path}: {exc}", stacklevel=2)
        return None
