"""Fixed-point S matrices of simple currents, their cocycle, and extensions.

A simple current J acting on a theory comes with a unitary matrix S^J indexed
by the J-fixed primaries.  The currents supported here are those whose folded
theory has rank zero (the identity current, and the cyclic rotations of the
level-k su(2) and su(3) theories), for which S^J is at most one by one; its
single entry is a root-of-unity phase pinned either by requiring the
simple-current extension to be consistent modular data (integer-spin
currents) or by a positivity convention (fractional-spin currents, where the
phase never enters downstream results).

The relative phases F_mu(J, J') extracted from these matrices control which
characters of the stabilizer survive in extensions, boundary data, and trace
formulas.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction as Q
from math import lcm
from typing import Iterable, Mapping

import numpy as np

from .affine import ModularData, verify_modular_invariants
from .errors import (
    ExtensionRejected,
    IntegralityError,
    InternalConsistencyError,
    InvariantViolation,
    UnderdeterminedCocycle,
    UnsupportedFolding,
)
from .exact import phase_to_complex
from .fusion import SimpleCurrentGroup, simple_currents, verlinde_tensor
from .liealg import build_algebra

__all__ = [
    "FixedPointData",
    "fixed_point_smatrix",
    "tensor_fixed_point_data",
    "SJCache",
    "cocycle",
    "snap_phase",
    "abelian_characters",
    "OrbitRecord",
    "orbit_data",
    "ExtendedTheory",
    "extend_by_group",
]

_PHASE_CACHE: dict[tuple[str, int, tuple], complex] = {}


@dataclass(eq=False)
class FixedPointData:
    """The matrix S^J restricted to the J-fixed primaries of one theory."""

    current_index: int
    fixed: tuple[int, ...]
    matrix: np.ndarray
    dim: int

    @classmethod
    def identity_current(cls, md: ModularData) -> "FixedPointData":
        return cls(md.vacuum, tuple(range(md.dim)), md.smatrix, md.dim)

    @property
    def fixed_set(self) -> frozenset:
        return frozenset(self.fixed)

    def full(self) -> np.ndarray:
        """S^J zero-extended over the full primary index set."""
        cached = getattr(self, "_full", None)
        if cached is None:
            cached = np.zeros((self.dim, self.dim), dtype=complex)
            idx = np.array(self.fixed, dtype=np.intp)
            if len(idx):
                cached[np.ix_(idx, idx)] = self.matrix
            object.__setattr__(self, "_full", cached)
        return cached


def _cyclic_group_through(md: ModularData, j_index: int) -> SimpleCurrentGroup:
    return simple_currents(md).subgroup((j_index,))


def _pin_phase(md: ModularData, j_index: int, fixed_index: int) -> complex:
    """Choose the phase of a one-dimensional S^J.

    Integer-spin currents: first root of unity (denominator lcm(24, 4 kappa))
    for which the cyclic extension through J passes every modular-data check.
    Fractional-spin currents: the entry is set to 1; no consistency condition
    constrains it and nothing downstream depends on it.
    """
    key = (md.algebra, md.level, md.labels[j_index])
    if key in _PHASE_CACHE:
        return _PHASE_CACHE[key]
    if md.delta[j_index].denominator != 1:
        _PHASE_CACHE[key] = 1.0 + 0.0j
        return _PHASE_CACHE[key]
    alg = build_algebra(md.algebra)
    denom = lcm(24, 4 * (md.level + alg.dual_coxeter))
    group = _cyclic_group_through(md, j_index)
    for m in range(denom):
        xi = phase_to_complex(Q(m, denom))
        override = {
            j: FixedPointData(j, (fixed_index,), np.array([[xi]]), md.dim)
            for j in group.indices
            if j != md.vacuum
        }
        try:
            extend_by_group(md, group, sj_override=override)
        except (InvariantViolation, IntegralityError, InternalConsistencyError):
            continue
        _PHASE_CACHE[key] = xi
        return xi
    raise InternalConsistencyError(
        f"no root-of-unity phase makes the extension by {md.labels[j_index]} consistent"
    )


def fixed_point_smatrix(md: ModularData, current) -> FixedPointData:
    """S^J for one simple current of an affine theory.

    Supported beyond the identity current: the su(2) current (level even or
    odd) and the two su(3) rotation currents.  Their folded theories have
    rank zero, so the matrix is empty or a single pinned phase.
    """
    j_index = current if isinstance(current, int) else md.index(tuple(current))
    if j_index == md.vacuum:
        return FixedPointData.identity_current(md)
    label = md.labels[j_index]
    k = md.level
    if md.algebra == "A1" and label == (k,):
        if k % 2:
            return FixedPointData(j_index, (), np.zeros((0, 0), dtype=complex), md.dim)
        fixed_index = md.index((k // 2,))
    elif md.algebra == "A2" and label in {(k, 0), (0, k)}:
        if k % 3:
            return FixedPointData(j_index, (), np.zeros((0, 0), dtype=complex), md.dim)
        fixed_index = md.index((k // 3, k // 3))
    else:
        raise UnsupportedFolding(
            f"no fixed-point S matrix available for current {label} of {md.algebra} level {k}"
        )
    xi = _pin_phase(md, j_index, fixed_index)
    return FixedPointData(j_index, (fixed_index,), np.array([[xi]]), md.dim)


def tensor_fixed_point_data(
    md: ModularData, md1: ModularData, md2: ModularData, current
) -> FixedPointData:
    """S^J of a product theory from the factor data (Kronecker block)."""
    c1, c2 = current if not isinstance(current, int) else md.labels[current]
    d1 = md1.sj_provider(c1) if c1 != md1.labels[0] else FixedPointData.identity_current(md1)
    d2 = md2.sj_provider(c2) if c2 != md2.labels[0] else FixedPointData.identity_current(md2)
    fixed = tuple(i1 * md2.dim + i2 for i1 in d1.fixed for i2 in d2.fixed)
    return FixedPointData(
        md.index((c1, c2)), fixed, np.kron(d1.matrix, d2.matrix), md.dim
    )


class SJCache:
    """Memoized access to the S^J matrices of one theory, with overrides."""

    def __init__(self, md: ModularData, override: Mapping[int, FixedPointData] | None = None):
        self.md = md
        self.override = dict(override or {})
        self._cache: dict[int, FixedPointData] = {}

    def __getitem__(self, j_index: int) -> FixedPointData:
        if j_index in self.override:
            return self.override[j_index]
        if j_index not in self._cache:
            if j_index == self.md.vacuum:
                data = FixedPointData.identity_current(self.md)
            elif self.md.sj_provider is None:
                raise UnsupportedFolding(
                    f"theory {self.md.algebra} has no fixed-point S matrix provider"
                )
            else:
                data = self.md.sj_provider(self.md.labels[j_index])
            self._cache[j_index] = data
        return self._cache[j_index]


def cocycle(
    md: ModularData,
    group: SimpleCurrentGroup,
    j: int,
    jprime: int,
    mu: int,
    sj: SJCache,
    tol: float = 1e-8,
) -> complex:
    """The phase F_mu(J, J') relating the J'-shifted rows of S^J.

    Defined through S^J[J' lam, mu] = (T_mu / T_{J' mu}) F_mu(J, J') S^J[lam, mu],
    scanned over all rows with a non-vanishing denominator.
    """
    if jprime == md.vacuum:
        return 1.0 + 0.0j
    data = sj[j]
    if mu not in data.fixed_set:
        raise UnderdeterminedCocycle(
            f"label index {mu} is not fixed by current index {j}; F is undefined there"
        )
    pos = {lab: r for r, lab in enumerate(data.fixed)}
    col = pos[mu]
    tfac = phase_to_complex(md.delta[group.act(jprime, mu)] - md.delta[mu])
    ratios = []
    for lam in data.fixed:
        moved = group.act(jprime, lam)
        if moved not in pos:
            continue
        den = data.matrix[pos[lam], col]
        if abs(den) <= 1e-10:
            continue
        ratios.append(tfac * data.matrix[pos[moved], col] / den)
    if not ratios:
        raise UnderdeterminedCocycle(
            f"every row of S^J (J index {j}) vanishes in column {mu}; F is underdetermined"
        )
    first = ratios[0]
    for r in ratios[1:]:
        if abs(r - first) > tol:
            raise InternalConsistencyError(
                f"inconsistent cocycle ratios at column {mu}: {first} vs {r}"
            )
    return first


def snap_phase(z: complex, max_denominator: int = 10080, tol: float = 1e-6) -> Q:
    """Exact exponent a/b with z = exp(2 pi i a/b), or raise if z is not close
    to such a root of unity."""
    mag = abs(z)
    if abs(mag - 1.0) > tol:
        raise InternalConsistencyError(f"phase {z} is not on the unit circle")
    expo = Q(cmath.phase(z) / (2 * cmath.pi)).limit_denominator(max_denominator) % 1
    if abs(z - phase_to_complex(expo)) > tol:
        raise InternalConsistencyError(f"phase {z} is not a root of unity of bounded order")
    return expo


def abelian_characters(
    elements: Iterable[int], compose, identity: int
) -> list[dict[int, Q]]:
    """All characters of a finite abelian group, as exact phase exponents.

    Each character maps every element to the exponent a/b of its value
    exp(2 pi i a/b).  The list is sorted by the exponent tuple over the
    sorted elements, so the trivial character always comes first.
    """
    elems = sorted(set(elements))
    order = {}
    for e in elems:
        n, cur = 1, e
        while cur != identity:
            cur = compose(cur, e)
            n += 1
        order[e] = n

    gens: list[int] = []
    span = {identity}
    for e in sorted(elems, key=lambda x: (-order[x], x)):
        if e not in span:
            gens.append(e)
            powers = [identity]
            cur = e
            while cur != identity:
                powers.append(cur)
                cur = compose(cur, e)
            span = {compose(a, p) for a in span for p in powers}
    if len(span) != len(elems):
        raise InternalConsistencyError("generator search did not span the group")

    # words: element -> exponent vector over gens, found by BFS
    words = {identity: tuple(0 for _ in gens)}
    frontier = [identity]
    while frontier:
        nxt = []
        for e in frontier:
            for gi, g in enumerate(gens):
                e2 = compose(e, g)
                if e2 not in words:
                    w = list(words[e])
                    w[gi] += 1
                    words[e2] = tuple(w)
                    nxt.append(e2)
        frontier = nxt

    chars = []
    import itertools

    for assignment in itertools.product(*[range(order[g]) for g in gens]):
        char = {
            e: sum((Q(assignment[gi], order[gens[gi]]) * w for gi, w in enumerate(word)), Q(0)) % 1
            for e, word in words.items()
        }
        ok = all(
            (char[a] + char[b] - char[compose(a, b)]) % 1 == 0 for a in elems for b in elems
        )
        if ok:
            chars.append(char)
    if len(chars) != len(elems):
        raise InternalConsistencyError(
            f"found {len(chars)} characters for a group of order {len(elems)}"
        )
    chars.sort(key=lambda ch: tuple(ch[e] for e in elems))
    return chars


def character_value(char: Mapping[int, Q], element: int) -> complex:
    return phase_to_complex(char[element])


@dataclass(eq=False)
class OrbitRecord:
    """One orbit of the current group on primaries, with stabilizer data.

    ``untwisted_stabilizer`` and ``degeneracy`` are only filled in when every
    current in the group has integer spin; otherwise the relative phases
    F_mu(J, J') need not form a bihomomorphism and ``integer_spins`` is left
    False with no square-root constraint enforced.
    """

    representative: int
    orbit: tuple[int, ...]
    stabilizer: tuple[int, ...]
    integer_spins: bool
    cocycle_values: dict[tuple[int, int], Q]
    untwisted_stabilizer: tuple[int, ...] | None = None
    degeneracy: int | None = None


def _untwisted_stabilizer(
    md: ModularData,
    group: SimpleCurrentGroup,
    mu: int,
    stab: tuple[int, ...],
    sj: SJCache,
    tol: float = 1e-8,
) -> tuple[int, ...]:
    """Currents in the stabilizer whose cocycle against it is trivial both ways."""
    out = []
    for t in stab:
        good = True
        for tp in stab:
            f1 = cocycle(md, group, t, tp, mu, sj, tol)
            f2 = cocycle(md, group, tp, t, mu, sj, tol)
            if abs(f1 - 1) > tol or abs(f2 - 1) > tol:
                good = False
                break
        if good:
            out.append(t)
    return tuple(out)


def orbit_data(
    md: ModularData,
    group: SimpleCurrentGroup,
    sj_override: Mapping[int, FixedPointData] | None = None,
    tol: float = 1e-8,
) -> list[OrbitRecord]:
    """Orbits, stabilizers and cocycle phases of a current group on primaries."""
    sj = SJCache(md, sj_override)
    integer_spins = all(md.delta[j].denominator == 1 for j in group.indices)
    seen: set[int] = set()
    records: list[OrbitRecord] = []
    for i in range(md.dim):
        if i in seen:
            continue
        orbit = group.orbit(i)
        seen.update(orbit)
        rep = orbit[0]
        stab = group.stabilizer(rep)
        cvals: dict[tuple[int, int], Q] = {}
        for t in stab:
            for tp in stab:
                cvals[(t, tp)] = snap_phase(cocycle(md, group, t, tp, rep, sj, tol))
        rec = OrbitRecord(
            representative=rep,
            orbit=orbit,
            stabilizer=stab,
            integer_spins=integer_spins,
            cocycle_values=cvals,
        )
        if integer_spins:
            u = _untwisted_stabilizer(md, group, rep, stab, sj, tol)
            ratio = len(stab) // len(u)
            if len(stab) % len(u) or int(ratio**0.5 + 0.5) ** 2 != ratio:
                raise IntegralityError(
                    "fixed-point degeneracy squared",
                    ratio,
                    float(ratio),
                    md.labels[rep],
                )
            rec.untwisted_stabilizer = u
            rec.degeneracy = int(ratio**0.5 + 0.5)
        records.append(rec)
    return records


@dataclass(eq=False)
class ExtClass:
    """An extension primary: an orbit representative plus a stabilizer character."""

    rep: int
    char: dict[int, Q]

    def signature(self) -> tuple:
        return (self.rep, tuple(sorted(self.char.items())))


@dataclass(eq=False)
class ExtendedTheory:
    """Result of extending by an integer-spin simple-current group."""

    parent: ModularData
    group: SimpleCurrentGroup
    classes: tuple[ExtClass, ...]
    md: ModularData
    zmatrix: np.ndarray


def extend_by_group(
    md: ModularData,
    group: SimpleCurrentGroup,
    tol: float = 1e-8,
    fusion_tol: float = 1e-6,
    sj_override: Mapping[int, FixedPointData] | None = None,
) -> ExtendedTheory:
    """Extend a theory by a group of integer-spin simple currents.

    Surviving primaries are those with vanishing monodromy charge under the
    whole group (checked exactly); each contributes one extension primary per
    character of its untwisted stabilizer.  The extended S and T matrices are
    verified as modular data, the extended fusion rules must be non-negative
    integers, and the diagonal-invariant matrix Z must commute with S and T.
    """
    for j in group.indices:
        if md.delta[j].denominator != 1:
            raise ExtensionRejected(
                f"current {md.labels[j]} has non-integer conformal weight {md.delta[j]}; "
                "the extension only exists for integer-spin currents"
            )
    sj = SJCache(md, sj_override)

    surviving: list[int] = []
    for i in range(md.dim):
        if all(group.charge(j, i) == 0 for j in group.indices):
            surviving.append(i)

    seen: set[int] = set()
    orbit_reps: list[tuple[int, tuple[int, ...], tuple[int, ...], tuple[int, ...]]] = []
    for i in surviving:
        if i in seen:
            continue
        orbit = group.orbit(i)
        seen.update(orbit)
        rep = orbit[0]
        stab = group.stabilizer(rep)
        u = _untwisted_stabilizer(md, group, rep, stab, sj, tol)
        orbit_reps.append((rep, orbit, stab, u))

    # one class per character of U, pinned to the lex-minimal representative
    classes: list[ExtClass] = []
    u_of: dict[int, tuple[int, ...]] = {}
    stab_of: dict[int, tuple[int, ...]] = {}
    for rep, orbit, stab, u in orbit_reps:
        chars = abelian_characters(u, group.compose, md.vacuum)
        u_of[rep] = u
        stab_of[rep] = stab
        for char in chars:
            classes.append(ExtClass(rep, char))
    classes.sort(key=lambda c: c.signature())
    expected = sum(len(u) for _, _, _, u in orbit_reps)
    if len(classes) != expected:
        raise InternalConsistencyError(
            f"extension produced {len(classes)} classes, expected {expected}"
        )

    n = len(classes)
    gsize = group.order
    s_ext = np.zeros((n, n), dtype=complex)
    for a, ca in enumerate(classes):
        for b, cb in enumerate(classes):
            ua, ub = u_of[ca.rep], u_of[cb.rep]
            pref = gsize / np.sqrt(
                len(stab_of[ca.rep]) * len(ua) * len(stab_of[cb.rep]) * len(ub)
            )
            acc = 0.0 + 0.0j
            common = set(ua) & set(ub)
            for j in sorted(common):
                data = sj[j]
                if ca.rep in data.fixed_set and cb.rep in data.fixed_set:
                    pa = data.fixed.index(ca.rep)
                    pb = data.fixed.index(cb.rep)
                    val = data.matrix[pa, pb]
                else:
                    val = 0.0
                acc += (
                    character_value(ca.char, j)
                    * val
                    * np.conj(character_value(cb.char, j))
                )
            s_ext[a, b] = pref * acc

    ext_md = ModularData(
        algebra=f"{md.algebra}/ext",
        level=md.level,
        labels=tuple(c.signature() for c in classes),
        smatrix=s_ext,
        delta=tuple(md.delta[c.rep] for c in classes),
        central_charge=md.central_charge,
    )
    if classes[0].rep != md.vacuum or any(v != 0 for v in classes[0].char.values()):
        raise InternalConsistencyError("extension vacuum class is not first")
    verify_modular_invariants(ext_md, tol)
    verlinde_tensor(ext_md, fusion_tol)

    z = np.zeros((md.dim, md.dim), dtype=np.int64)
    for rep, orbit, stab, _u in orbit_reps:
        v = np.zeros(md.dim, dtype=np.int64)
        v[list(orbit)] = 1
        z += len(stab) * np.outer(v, v)
    if z[md.vacuum, md.vacuum] != 1:
        raise InternalConsistencyError("vacuum entry of the invariant matrix is not 1")
    t_diag = md.t_diagonal()
    comm_s = np.abs(z @ md.smatrix - md.smatrix @ z).max()
    comm_t = np.abs(z * t_diag[np.newaxis, :] - t_diag[:, np.newaxis] * z).max()
    if comm_s > 1e-9:
        raise InvariantViolation("invariant_commutes_with_s", float(comm_s), 1e-9)
    if comm_t > 1e-9:
        raise InvariantViolation("invariant_commutes_with_t", float(comm_t), 1e-9)

    return ExtendedTheory(parent=md, group=group, classes=tuple(classes), md=ext_md, zmatrix=z)
