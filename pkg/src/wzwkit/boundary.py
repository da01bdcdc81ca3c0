"""Classifying algebras for boundary conditions preserving an orbifold subalgebra.

Given a theory together with a group of simple currents, boundary conditions
that preserve the orbifold subalgebra are governed by a commutative algebra
whose structure constants come from a Verlinde-like formula.  Bulk fields are
indexed by hat labels (a zero-charge sector with a character of its full
stabilizer); boundary conditions by group orbits of arbitrary sectors dressed
with a character of the central stabilizer.  The two label sets always have
the same size and the diagonalizing matrix connecting them is built from the
fixed-point S matrices of the theory.

The explicit table for Z2 orbifolds of WZW theories is also provided, so the
generic construction can be cross-checked entrywise.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Mapping

import numpy as np

from .affine import ModularData
from .errors import (
    InternalConsistencyError,
    InvariantViolation,
    PreconditionError,
)
from .fusion import SimpleCurrentGroup
from .orbifold import OrbifoldModularData
from .simplecurrent import (
    FixedPointData,
    SJCache,
    _untwisted_stabilizer,
    abelian_characters,
    character_value,
)

__all__ = [
    "HatLabel",
    "BoundaryLabel",
    "ClassifyingAlgebra",
    "TypeDecomposition",
    "classifying_labels",
    "hat_smatrix",
    "structure_constants",
    "reflection_coefficients",
    "classifying_algebra",
    "automorphism_type_decomposition",
    "z2_wzw_hat_table",
    "match_up_to_column_signs",
]


@dataclass(frozen=True)
class HatLabel:
    """A bulk field: zero-charge sector plus a character of its full stabilizer."""

    sector: int
    char: tuple[tuple[int, Q], ...]


@dataclass(frozen=True)
class BoundaryLabel:
    """A boundary condition: current orbit plus a central-stabilizer character.

    ``rep`` is the lexicographically minimal orbit member.
    """

    rep: int
    char: tuple[tuple[int, Q], ...]
    orbit: tuple[int, ...]


@dataclass(eq=False)
class ClassifyingAlgebra:
    """The boundary classifying algebra of one theory and current group.

    ``smatrix`` is indexed by (hat label, boundary label); ``nhat`` holds the
    raised structure constants.  The unit is always hat index 0, the vacuum
    with the trivial character.
    """

    md: ModularData
    group: SimpleCurrentGroup
    hat_labels: tuple[HatLabel, ...]
    boundary_labels: tuple[BoundaryLabel, ...]
    smatrix: np.ndarray
    nhat: np.ndarray
    residuals: dict[str, float]

    @property
    def dim(self) -> int:
        return len(self.hat_labels)

    @property
    def unit(self) -> int:
        return 0

    def reflection_coefficients(self) -> np.ndarray:
        return reflection_coefficients(self.smatrix)


def _label_data(md: ModularData, group: SimpleCurrentGroup, sj: SJCache, tol: float):
    stab: dict[int, tuple[int, ...]] = {}
    ustab: dict[int, tuple[int, ...]] = {}
    for i in range(md.dim):
        s = group.stabilizer(i)
        stab[i] = s
        ustab[i] = _untwisted_stabilizer(md, group, i, s, sj, tol)

    hats: list[HatLabel] = []
    for i in range(md.dim):
        if any(group.charge(j, i) != 0 for j in group.indices):
            continue
        for char in abelian_characters(stab[i], group.compose, md.vacuum):
            hats.append(HatLabel(i, tuple(sorted(char.items()))))

    boundaries: list[BoundaryLabel] = []
    seen: set[int] = set()
    for i in range(md.dim):
        if i in seen:
            continue
        orbit = group.orbit(i)
        seen.update(orbit)
        for char in abelian_characters(ustab[i], group.compose, md.vacuum):
            boundaries.append(BoundaryLabel(i, tuple(sorted(char.items())), orbit))

    if len(hats) != len(boundaries):
        raise InternalConsistencyError(
            f"{len(hats)} hat labels but {len(boundaries)} boundary labels; "
            "stabilizer data is inconsistent"
        )
    return tuple(hats), tuple(boundaries), stab, ustab


def classifying_labels(
    md: ModularData,
    group: SimpleCurrentGroup,
    sj_override: Mapping[int, FixedPointData] | None = None,
    tol: float = 1e-8,
) -> tuple[tuple[HatLabel, ...], tuple[BoundaryLabel, ...]]:
    """Hat labels and boundary labels of the classifying algebra.

    Hat labels exhaust the sectors of vanishing monodromy charge, one per
    character of the full stabilizer; boundary labels exhaust current orbits
    of all sectors (no spin restriction), one per character of the central
    stabilizer.  The counts always agree.
    """
    hats, boundaries, _, _ = _label_data(md, group, SJCache(md, sj_override), tol)
    return hats, boundaries


def hat_smatrix(
    md: ModularData,
    group: SimpleCurrentGroup,
    sj_override: Mapping[int, FixedPointData] | None = None,
    tol: float = 1e-8,
) -> np.ndarray:
    """The diagonalizing matrix of the classifying algebra.

    Entry (mu-hat, a) sums psi(J) S^J_{mu,rho} psi_a(J)* over the currents in
    the intersection of the hat label's stabilizer with the boundary label's
    central stabilizer, normalized by the usual square-root prefactor.
    """
    sj = SJCache(md, sj_override)
    hats, boundaries, stab, ustab = _label_data(md, group, sj, tol)
    n = len(hats)
    gsize = group.order
    out = np.zeros((n, n), dtype=complex)
    for r, h in enumerate(hats):
        hchar = dict(h.char)
        sh, uh = stab[h.sector], ustab[h.sector]
        for c, b in enumerate(boundaries):
            bchar = dict(b.char)
            sb, ub = stab[b.rep], ustab[b.rep]
            pref = gsize / np.sqrt(len(sh) * len(uh) * len(sb) * len(ub))
            acc = 0.0 + 0.0j
            for j in sh:
                if j not in ub:
                    continue
                data = sj[j]
                if h.sector not in data.fixed_set or b.rep not in data.fixed_set:
                    continue
                val = data.matrix[data.fixed.index(h.sector), data.fixed.index(b.rep)]
                acc += character_value(hchar, j) * val * np.conj(character_value(bchar, j))
            out[r, c] = pref * acc
    return out


def _check_square_invertible(shat: np.ndarray, tol: float) -> float:
    if shat.ndim != 2 or shat.shape[0] != shat.shape[1]:
        raise PreconditionError("the hat matrix must be square")
    svals = np.linalg.svd(shat, compute_uv=False)
    if svals[-1] <= tol * svals[0]:
        raise InvariantViolation(
            "hat_matrix_invertible", float(svals[-1]), tol, "singular hat matrix"
        )
    return float(svals[-1])


def reflection_coefficients(shat: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Columns of the hat matrix normalized by the vacuum row.

    Each column is a one-dimensional representation of the classifying
    algebra (an eigenvalue assignment for every hat generator).
    """
    _check_square_invertible(shat, tol)
    vac = shat[0]
    small = np.abs(vac).min()
    if small < tol:
        raise InvariantViolation(
            "vacuum_row_nonvanishing", float(small), tol, "degenerate boundary"
        )
    return shat / vac


def structure_constants(shat: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Raised structure constants of the classifying algebra.

    The all-lower tensor is the Verlinde-like sum over boundary labels; the
    last index is raised with the inverse of C = N_{..unit}, which equals
    S-hat times its transpose.  Commutativity is manifest; unit and
    associativity are verified before returning.
    """
    _check_square_invertible(shat, tol)
    vac = shat[0]
    if np.abs(vac).min() < tol:
        raise InvariantViolation(
            "vacuum_row_nonvanishing", float(np.abs(vac).min()), tol, ""
        )
    lower = np.einsum("la,ma,na->lmn", shat, shat, shat / vac)
    cmat = shat @ shat.T
    raised = np.einsum("lmr,rn->lmn", lower, np.linalg.inv(cmat))

    n = shat.shape[0]
    unit_res = float(np.abs(raised[0] - np.eye(n)).max())
    if unit_res > tol:
        raise InvariantViolation("classifying_unit", unit_res, tol, "")
    left = np.einsum("lmr,rkn->lmkn", raised, raised)
    right = np.einsum("mkr,lrn->lmkn", raised, raised)
    assoc_res = float(np.abs(left - right).max())
    if assoc_res > tol:
        raise InvariantViolation("classifying_associativity", assoc_res, tol, "")
    return raised


def classifying_algebra(
    md: ModularData,
    group: SimpleCurrentGroup,
    sj_override: Mapping[int, FixedPointData] | None = None,
    tol: float = 1e-8,
) -> ClassifyingAlgebra:
    """Build the classifying algebra and verify its defining properties.

    Checks performed: the hat matrix is invertible with nonvanishing vacuum
    row, the algebra is unital and associative, and every boundary column
    furnishes a one-dimensional representation.  Residuals are recorded.
    """
    sj = SJCache(md, sj_override)
    hats, boundaries, stab, ustab = _label_data(md, group, sj, tol)
    if hats[0].sector != md.vacuum or any(v != 0 for _, v in hats[0].char):
        raise InternalConsistencyError("hat unit is not the vacuum with trivial character")
    shat = hat_smatrix(md, group, sj_override, tol)
    nhat = structure_constants(shat, tol)

    refl = reflection_coefficients(shat, tol)
    rep_res = 0.0
    for a in range(shat.shape[0]):
        col = refl[:, a]
        res = np.abs(np.outer(col, col) - np.einsum("lmn,n->lm", nhat, col)).max()
        rep_res = max(rep_res, float(res))
    residuals = {
        "unit": float(np.abs(nhat[0] - np.eye(shat.shape[0])).max()),
        "representation_property": rep_res,
        "commutativity": float(np.abs(nhat - nhat.transpose(1, 0, 2)).max()),
    }
    if rep_res > tol:
        raise InvariantViolation("classifying_representation", rep_res, tol, "")
    return ClassifyingAlgebra(
        md=md,
        group=group,
        hat_labels=hats,
        boundary_labels=boundaries,
        smatrix=shat,
        nhat=nhat,
        residuals=residuals,
    )


@dataclass(frozen=True)
class TypeDecomposition:
    """Partition of the boundary labels into ideals, one per automorphism type."""

    parts: tuple[tuple[str, tuple[int, ...]], ...]
    residual: float


def automorphism_type_decomposition(
    ca: ClassifyingAlgebra, tol: float = 1e-8
) -> TypeDecomposition:
    """Split the boundary labels by automorphism type and verify ideal-ness.

    For a Z2 group, orbits of zero monodromy charge give the trivial type and
    the rest the nontrivial one; for larger groups the parts are keyed by the
    charge vector without a symmetry interpretation.  The partition must be a
    direct sum of ideals: sums of primitive idempotents from different parts
    multiply to zero.
    """
    group = ca.group
    nontrivial = [j for j in group.indices if j != ca.md.vacuum]
    buckets: dict[str, list[int]] = {}
    for a, b in enumerate(ca.boundary_labels):
        charges = tuple(group.charge(j, b.rep) for j in nontrivial)
        if not nontrivial:
            key = "1"
        elif len(nontrivial) == 1:
            key = "1" if charges[0] == 0 else "sigma"
        else:
            key = "q=(" + ",".join(str(q) for q in charges) + ")"
        buckets.setdefault(key, []).append(a)
    parts = tuple(sorted((k, tuple(v)) for k, v in buckets.items()))

    refl = ca.reflection_coefficients()
    idem = np.linalg.inv(refl.T)
    sums = {k: idem[:, list(v)].sum(axis=1) for k, v in parts}
    residual = 0.0
    keys = [k for k, _ in parts]
    for i, ki in enumerate(keys):
        for kj in keys[i:]:
            prod = np.einsum("l,m,lmn->n", sums[ki], sums[kj], ca.nhat)
            target = sums[ki] if ki == kj else 0.0
            residual = max(residual, float(np.abs(prod - target).max()))
    if residual > tol:
        raise InvariantViolation("automorphism_type_ideals", residual, tol, "")
    return TypeDecomposition(parts=parts, residual=residual)


def z2_wzw_hat_table(orb: OrbifoldModularData) -> np.ndarray:
    """Explicit hat matrix of an inner Z2 WZW orbifold, from parent data.

    Rows run over (parent label, sign) pairs in parent order; columns over
    untwisted orbits then twisted orbits.  Untwisted columns carry the parent
    S matrix; twisted columns carry the sign times eta inverse times the
    twisted-block matrix.
    """
    oin = orb.input
    if oin.pairs:
        raise PreconditionError("the explicit table covers inner orbifolds only")
    parent = oin.md
    n = parent.dim
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    for lam in range(n):
        for row, eps in ((2 * lam, 1), (2 * lam + 1, -1)):
            eta = oin.eta(lam)
            for mu in range(n):
                out[row, mu] = parent.smatrix[lam, mu]
                out[row, n + mu] = eps / eta * oin.s0[lam, mu]
    return out


def match_up_to_column_signs(
    computed: np.ndarray, reference: np.ndarray, tol: float = 1e-8
) -> tuple[int, ...]:
    """Column signs making two matrices agree entrywise, or a hard failure.

    The sign freedom reflects the conventional resolution labels of fixed
    points; a column that matches neither way raises InvariantViolation.
    """
    if computed.shape != reference.shape:
        raise PreconditionError("matrices to compare must have equal shapes")
    signs = []
    for c in range(computed.shape[1]):
        plus = np.abs(computed[:, c] - reference[:, c]).max()
        minus = np.abs(computed[:, c] + reference[:, c]).max()
        if plus <= tol:
            signs.append(1)
        elif minus <= tol:
            signs.append(-1)
        else:
            raise InvariantViolation(
                "hat_table_match", float(min(plus, minus)), tol, f"column {c}"
            )
    return tuple(signs)
