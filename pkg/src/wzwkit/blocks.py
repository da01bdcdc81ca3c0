"""Chiral block counts, current-symmetry traces on block spaces, and checks.

The rank of a block space is the Verlinde-type sum over primaries; a tuple of
simple currents multiplying to the identity acts on the space, and its trace
replaces each S factor by the fixed-point matrix of the corresponding
current.  Fourier transforming the traces over the subgroup with trivial
relative cocycle yields candidate eigenspace dimensions, which must be
non-negative integers.

The module also carries an exact validator for the multi-shift automorphism
of the affine sl(2) loop algebra, built on truncated Laurent series over the
rationals with explicit validity windows.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction as Q
from typing import Iterable, Mapping, Sequence

import numpy as np

from .affine import ModularData
from .errors import (
    ConjectureViolation,
    IntegralityError,
    PreconditionError,
    UnsupportedFolding,
)
from .exact import phase_to_complex
from .fusion import SimpleCurrentGroup
from .simplecurrent import SJCache, abelian_characters, cocycle

__all__ = [
    "block_rank",
    "gamma_out",
    "admissible_tuples",
    "tuple_cocycle",
    "untwisted_tuples",
    "symmetry_trace",
    "TraceSpectrum",
    "fourier_eigendims",
    "fix_compatible",
    "rank_factorization_check",
    "trace_factorization_check",
    "TruncatedLaurent",
    "LoopElement",
    "multishift_validate",
]


def block_rank(
    md: ModularData, genus: int, insertions: Sequence[int], tol: float = 1e-6
) -> int:
    """Dimension of the space of chiral blocks at the given genus."""
    s = md.smatrix
    m = len(insertions)
    weight = np.abs(s[0]) ** (2 - 2 * genus) * s[0] ** (-m)
    prod = np.ones(md.dim, dtype=complex)
    for mu in insertions:
        prod = prod * s[mu]
    value = (weight * prod).sum()
    rank = round(value.real)
    residual = abs(value - rank)
    if residual > tol or rank < 0:
        raise IntegralityError(
            "block rank", complex(value), float(residual), tuple(md.labels[i] for i in insertions)
        )
    return rank


def gamma_out(group: SimpleCurrentGroup, m: int) -> list[tuple[int, ...]]:
    """Current tuples of length m multiplying to the identity."""
    out = []
    for combo in itertools.product(group.indices, repeat=m - 1):
        acc = group.md.vacuum
        for j in combo:
            acc = group.compose(acc, j)
        out.append(combo + (group.inverse(acc),))
    assert len(out) == group.order ** (m - 1)
    return out


def admissible_tuples(
    md: ModularData, group: SimpleCurrentGroup, insertions: Sequence[int]
) -> list[tuple[int, ...]]:
    """Identity-product tuples whose slots each stabilize their insertion."""
    stabs = [set(group.stabilizer(mu)) for mu in insertions]
    return [
        t
        for t in gamma_out(group, len(insertions))
        if all(ts in st for ts, st in zip(t, stabs))
    ]


def tuple_cocycle(
    md: ModularData,
    group: SimpleCurrentGroup,
    t: Sequence[int],
    tprime: Sequence[int],
    insertions: Sequence[int],
    sj: SJCache,
    tol: float = 1e-8,
) -> complex:
    """Slotwise product of the relative phases F_mu(t_s, t'_s)."""
    out = 1.0 + 0.0j
    for ts, tps, mu in zip(t, tprime, insertions):
        out *= cocycle(md, group, ts, tps, mu, sj, tol)
    return out


def untwisted_tuples(
    md: ModularData,
    group: SimpleCurrentGroup,
    insertions: Sequence[int],
    sj: SJCache | None = None,
    tol: float = 1e-8,
) -> list[tuple[int, ...]]:
    """Admissible tuples with trivial cocycle against every admissible tuple."""
    sj = sj or SJCache(md)
    adm = admissible_tuples(md, group, insertions)
    out = []
    for t in adm:
        ok = True
        for tp in adm:
            if (
                abs(tuple_cocycle(md, group, t, tp, insertions, sj, tol) - 1) > tol
                or abs(tuple_cocycle(md, group, tp, t, insertions, sj, tol) - 1) > tol
            ):
                ok = False
                break
        if ok:
            out.append(t)
    return out


def symmetry_trace(
    md: ModularData,
    group: SimpleCurrentGroup,
    insertions: Sequence[int],
    t: Sequence[int],
    genus: int = 0,
    sj: SJCache | None = None,
) -> complex:
    """Trace of one current tuple on the block space.

    Each slot contributes the zero-extended fixed-point S matrix of its
    current; the all-identity tuple reproduces the rank sum.
    """
    sj = sj or SJCache(md)
    s = md.smatrix
    m = len(insertions)
    weight = np.abs(s[0]) ** (2 - 2 * genus) * s[0] ** (-m)
    prod = np.ones(md.dim, dtype=complex)
    for mu, ts in zip(insertions, t):
        prod = prod * sj[ts].full()[mu]
    return complex((weight * prod).sum())


@dataclass(eq=False)
class TraceSpectrum:
    """Traces of the untwisted tuples and their Fourier transform."""

    insertions: tuple[int, ...]
    genus: int
    rank: int
    admissible: tuple[tuple[int, ...], ...]
    untwisted: tuple[tuple[int, ...], ...]
    traces: dict[tuple[int, ...], complex]
    dims: dict[tuple, int]

    @property
    def dim_values(self) -> tuple[int, ...]:
        return tuple(self.dims[k] for k in sorted(self.dims))


def fourier_eigendims(
    md: ModularData,
    group: SimpleCurrentGroup,
    insertions: Sequence[int],
    genus: int = 0,
    tol: float = 1e-6,
    sj: SJCache | None = None,
) -> TraceSpectrum:
    """Eigenspace dimensions of the untwisted tuple action on a block space.

    Characters of the untwisted tuple group pair with the traces; every
    resulting dimension must round to a non-negative integer, otherwise a
    ConjectureViolation carrying the full report is raised.
    """
    sj = sj or SJCache(md)
    insertions = tuple(insertions)
    rank = block_rank(md, genus, insertions)
    adm = admissible_tuples(md, group, insertions)
    unt = untwisted_tuples(md, group, insertions, sj)

    def compose_tuples(a, b):
        return tuple(group.compose(x, y) for x, y in zip(a, b))

    ident = (md.vacuum,) * len(insertions)
    traces = {t: symmetry_trace(md, group, insertions, t, genus, sj) for t in unt}
    chars = abelian_characters(unt, compose_tuples, ident)
    dims: dict[tuple, int] = {}
    for char in chars:
        val = sum(
            np.conj(phase_to_complex(char[t])) * traces[t] for t in unt
        ) / len(unt)
        key = tuple(char[t] for t in sorted(unt))
        rounded = round(val.real)
        if abs(val - rounded) > tol or rounded < 0:
            raise ConjectureViolation(
                "eigenspace dimension is not a non-negative integer",
                report={
                    "insertions": tuple(md.labels[i] for i in insertions),
                    "genus": genus,
                    "rank": rank,
                    "traces": {str(t): traces[t] for t in unt},
                    "character": {str(k): str(v) for k, v in char.items()},
                    "value": complex(val),
                },
            )
        dims[key] = rounded
    spectrum = TraceSpectrum(
        insertions=insertions,
        genus=genus,
        rank=rank,
        admissible=tuple(adm),
        untwisted=tuple(unt),
        traces=traces,
        dims=dims,
    )
    if sum(dims.values()) != round(traces[ident].real):
        raise ConjectureViolation(
            "eigenspace dimensions do not sum to the identity trace",
            report={"dims": dims, "identity_trace": traces[ident]},
        )
    return spectrum


def fix_compatible(
    md: ModularData,
    group: SimpleCurrentGroup,
    t: Sequence[int],
    glue: int,
    sj: SJCache | None = None,
) -> bool:
    """Whether the common fixed set of the tuple lies in the glue current's."""
    sj = sj or SJCache(md)
    common = set(range(md.dim))
    for ts in t:
        common &= sj[ts].fixed_set
    return common <= sj[glue].fixed_set


def rank_factorization_check(
    md: ModularData, insertions: Sequence[int], split: int, genus: int = 0
) -> tuple[int, int]:
    """Left and right side of the gluing identity for block ranks.

    The m-point rank equals the sum over the glued channel of the two
    factor ranks, with the channel conjugated on one side.
    """
    conj = md.conjugation_permutation()
    lhs = block_rank(md, genus, insertions)
    rhs = 0
    for nu in range(md.dim):
        left = block_rank(md, genus, tuple(insertions[:split]) + (nu,))
        right = block_rank(md, 0, (conj[nu],) + tuple(insertions[split:]))
        rhs += left * right
    return lhs, rhs


def trace_factorization_check(
    md: ModularData,
    group: SimpleCurrentGroup,
    insertions: Sequence[int],
    split: int,
    t: Sequence[int],
    glue: int,
    sj: SJCache | None = None,
) -> tuple[complex, complex]:
    """Both sides of the trace gluing identity with a current pair inserted.

    The glued channel carries the current on the left factor and its inverse
    on the right, with the right factor's channel slot using the adjoint
    (conjugated) fixed-point matrix.  Only meaningful when every label fixed
    by the whole tuple is also fixed by the glue current; otherwise a
    PreconditionError is raised.
    """
    sj = sj or SJCache(md)
    if not fix_compatible(md, group, t, glue, sj):
        raise PreconditionError(
            "glue current does not fix the common fixed set of the tuple"
        )
    lhs = symmetry_trace(md, group, insertions, t, 0, sj)
    s = md.smatrix
    m = len(insertions)
    mleft, mright = split + 1, m - split + 1
    glue_full = sj[glue].full()

    rhs = 0.0 + 0.0j
    for nu in range(md.dim):
        wl = s[0] ** (2 - mleft)
        pl = np.ones(md.dim, dtype=complex)
        for mu, ts in zip(insertions[:split], t[:split]):
            pl = pl * sj[ts].full()[mu]
        pl = pl * glue_full[nu]
        left = (wl * pl).sum()

        wr = s[0] ** (2 - mright)
        pr = np.conj(glue_full[nu]).copy()
        for mu, ts in zip(insertions[split:], t[split:]):
            pr = pr * sj[ts].full()[mu]
        right = (wr * pr).sum()
        rhs += left * right
    return complex(lhs), complex(rhs)


@dataclass(frozen=True)
class TruncatedLaurent:
    """Laurent series in one variable over Q, exact up to a cutoff exponent.

    ``hi`` is the largest exponent whose coefficient is guaranteed correct;
    None means the series is an exact finite Laurent polynomial.  Stored
    coefficients above ``hi`` are dropped, and absent exponents at or below
    ``hi`` are exactly zero.
    """

    coeffs: tuple[tuple[int, Q], ...]
    hi: int | None = None

    @classmethod
    def make(cls, mapping: Mapping[int, Q], hi: int | None = None) -> "TruncatedLaurent":
        items = {e: Q(c) for e, c in mapping.items() if c != 0}
        if hi is not None:
            items = {e: c for e, c in items.items() if e <= hi}
        return cls(tuple(sorted(items.items())), hi)

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "TruncatedLaurent":
        return cls.make({exponent: Q(coeff)})

    @classmethod
    def zero(cls) -> "TruncatedLaurent":
        return cls.make({})

    @classmethod
    def shifted_inverse(cls, c, hi: int) -> "TruncatedLaurent":
        """The series of 1/(t + c); a monomial when c = 0."""
        c = Q(c)
        if c == 0:
            return cls.monomial(-1)
        coeffs = {}
        for i in range(hi + 1):
            coeffs[i] = Q((-1) ** i, 1) / c ** (i + 1)
        return cls.make(coeffs, hi)

    def as_dict(self) -> dict[int, Q]:
        return dict(self.coeffs)

    @property
    def low(self) -> int | None:
        return self.coeffs[0][0] if self.coeffs else None

    def __add__(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        out = self.as_dict()
        for e, c in other.coeffs:
            out[e] = out.get(e, Q(0)) + c
        return TruncatedLaurent.make(out, _min_hi(self.hi, other.hi))

    def __sub__(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        return self + other.scale(-1)

    def scale(self, factor) -> "TruncatedLaurent":
        return TruncatedLaurent.make({e: c * Q(factor) for e, c in self.coeffs}, self.hi)

    def __mul__(self, other: "TruncatedLaurent") -> "TruncatedLaurent":
        if not self.coeffs or not other.coeffs:
            return TruncatedLaurent.zero()
        cutoffs = []
        if self.hi is not None:
            cutoffs.append(self.hi + other.low)
        if other.hi is not None:
            cutoffs.append(other.hi + self.low)
        hi = min(cutoffs) if cutoffs else None
        out: dict[int, Q] = {}
        for e1, c1 in self.coeffs:
            for e2, c2 in other.coeffs:
                e = e1 + e2
                if hi is None or e <= hi:
                    out[e] = out.get(e, Q(0)) + c1 * c2
        return TruncatedLaurent.make(out, hi)

    def power(self, n: int) -> "TruncatedLaurent":
        if n < 0:
            raise ValueError("negative powers are not defined for truncated series")
        out = TruncatedLaurent.monomial(0)
        for _ in range(n):
            out = out * self
        return out

    def derivative(self) -> "TruncatedLaurent":
        hi = None if self.hi is None else self.hi - 1
        return TruncatedLaurent.make({e - 1: c * e for e, c in self.coeffs}, hi)

    def residue(self) -> Q:
        if self.hi is not None and self.hi < -1:
            raise ValueError("residue lies outside the validity window")
        return self.as_dict().get(-1, Q(0))

    def coefficient(self, exponent: int) -> Q:
        if self.hi is not None and exponent > self.hi:
            raise ValueError(f"coefficient t^{exponent} outside validity window")
        return self.as_dict().get(exponent, Q(0))


def _min_hi(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


_SL2_BRACKET = {
    ("E", "F"): (("H", Q(1)),),
    ("F", "E"): (("H", Q(-1)),),
    ("H", "E"): (("E", Q(2)),),
    ("E", "H"): (("E", Q(-2)),),
    ("H", "F"): (("F", Q(-2)),),
    ("F", "H"): (("F", Q(2)),),
}

_SL2_FORM = {("E", "F"): Q(1), ("F", "E"): Q(1), ("H", "H"): Q(2)}

_SL2_ROOT = {"E": 1, "F": -1, "H": 0}


@dataclass(frozen=True)
class LoopElement:
    """Element of the affine sl(2) loop algebra: series-valued coordinates
    in the E, F, H directions plus a central coefficient."""

    parts: tuple[tuple[str, TruncatedLaurent], ...]
    central: Q = Q(0)

    @classmethod
    def make(cls, parts: Mapping[str, TruncatedLaurent], central=Q(0)) -> "LoopElement":
        kept = {g: f for g, f in parts.items() if f.coeffs or f.hi is not None}
        return cls(tuple(sorted(kept.items())), Q(central))

    @classmethod
    def generator(cls, gen: str, exponent: int) -> "LoopElement":
        return cls.make({gen: TruncatedLaurent.monomial(exponent)})

    def part(self, gen: str) -> TruncatedLaurent:
        for g, f in self.parts:
            if g == gen:
                return f
        return TruncatedLaurent.zero()


def loop_bracket(x: LoopElement, y: LoopElement) -> LoopElement:
    """[a tensor f, b tensor g] = [a,b] tensor fg + K (a|b) Res(f' g)."""
    parts: dict[str, TruncatedLaurent] = {}
    central = Q(0)
    for gx, fx in x.parts:
        for gy, fy in y.parts:
            for gz, coeff in _SL2_BRACKET.get((gx, gy), ()):
                term = (fx * fy).scale(coeff)
                parts[gz] = parts.get(gz, TruncatedLaurent.zero()) + term
            form = _SL2_FORM.get((gx, gy), Q(0))
            if form:
                central += form * (fx.derivative() * fy).residue()
    return LoopElement.make(parts, central)


@dataclass(frozen=True)
class MultiShift:
    """The multi-point shift automorphism of the affine sl(2) algebra.

    Determined by coweight multiples (the integers ``weights``, summing to
    zero) attached to marked points; the first point sits at the origin.
    """

    weights: tuple[int, ...]
    shifts: tuple[TruncatedLaurent, ...]

    @classmethod
    def build(cls, weights: Sequence[int], points: Sequence[Q], hi: int) -> "MultiShift":
        if sum(weights) != 0:
            raise PreconditionError("shift weights must sum to zero")
        if len(set(points)) != len(points):
            raise PreconditionError("marked points must be distinct")
        shifts = tuple(
            TruncatedLaurent.shifted_inverse(points[0] - z, hi) for z in points
        )
        return cls(tuple(weights), shifts)

    def apply(self, x: LoopElement) -> LoopElement:
        parts: dict[str, TruncatedLaurent] = {}
        central = x.central
        for gen, f in x.parts:
            root = _SL2_ROOT[gen]
            if root:
                out = f
                for w, phi in zip(self.weights, self.shifts):
                    e = -w * root
                    if e >= 0:
                        out = out * phi.power(e)
                    else:
                        out = out * _invert_shift(phi).power(-e)
                parts[gen] = parts.get(gen, TruncatedLaurent.zero()) + out
            else:
                parts[gen] = parts.get(gen, TruncatedLaurent.zero()) + f
                for w, phi in zip(self.weights, self.shifts):
                    central += Q(w) * (phi * f).residue()
        return LoopElement.make(parts, central)


def _invert_shift(phi: TruncatedLaurent) -> TruncatedLaurent:
    """Exact inverse of a shifted-inverse series: back to the linear polynomial."""
    d = phi.as_dict()
    if d.get(-1) == 1 and all(e == -1 for e in d):
        return TruncatedLaurent.monomial(1)
    c = 1 / d[0]
    return TruncatedLaurent.make({1: Q(1), 0: c})


def multishift_validate(
    m: int,
    grade: int = 4,
    points: Sequence | None = None,
) -> dict:
    """Check exactly that the m-point shift is a loop-algebra automorphism.

    Supported: the two- and three-point shifts of affine sl(2).  Every
    bracket of spanning elements with loop exponents up to ``grade`` is
    compared coefficient-by-coefficient inside the validity window; the
    residual is required to vanish identically.
    """
    weight_table = {2: (1, -1), 3: (1, 1, -2)}
    if m not in weight_table:
        raise UnsupportedFolding(f"multi-shift weights are only defined for m in (2, 3), not {m}")
    weights = weight_table[m]
    if points is None:
        points = tuple(Q(i) for i in range(m))
    hi = 3 * grade + 6
    sigma = MultiShift.build(weights, tuple(Q(p) for p in points), hi)

    span = [
        LoopElement.generator(g, a)
        for g in ("E", "F", "H")
        for a in range(-grade, grade + 1)
    ]
    span.append(LoopElement.make({}, Q(1)))

    images = [(x, sigma.apply(x)) for x in span]
    checked = 0
    min_window = None
    for x, sx in images:
        for y, sy in images:
            lhs = sigma.apply(loop_bracket(x, y))
            rhs = loop_bracket(sx, sy)
            if lhs.central != rhs.central:
                raise ConjectureViolation(
                    "multi-shift fails on the central term",
                    report={"central_lhs": str(lhs.central), "central_rhs": str(rhs.central)},
                )
            for gen in ("E", "F", "H"):
                fl, fr = lhs.part(gen), rhs.part(gen)
                window = _min_hi(fl.hi, fr.hi)
                if window is not None:
                    if window < grade:
                        raise PreconditionError(
                            f"validity window {window} too small for grade {grade}"
                        )
                    min_window = window if min_window is None else min(min_window, window)
                exps = {e for e, _ in fl.coeffs} | {e for e, _ in fr.coeffs}
                for e in exps:
                    if window is not None and e > window:
                        continue
                    if fl.coefficient(e) != fr.coefficient(e):
                        raise ConjectureViolation(
                            "multi-shift fails to preserve a bracket",
                            report={
                                "generator": gen,
                                "exponent": e,
                                "lhs": str(fl.coefficient(e)),
                                "rhs": str(fr.coefficient(e)),
                            },
                        )
            checked += 1
    return {
        "pairs_checked": checked,
        "max_residual": Q(0),
        "min_window": min_window,
        "weights": weights,
    }
