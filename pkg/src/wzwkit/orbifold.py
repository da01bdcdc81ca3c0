"""Z2 orbifold modular data: sector bookkeeping, S and T assembly, traces.

An order-2 symmetry of the base theory is described by a label involution
together with phases on its fixed points and the twisted-sector transformation
data (the matrix connecting untwisted twining characters to twisted ones, and
the twisted T eigenvalues).  From these the orbifold label set splits into
paired untwisted sectors, resolved fixed points carrying a sign, and twisted
sectors carrying a sign; the orbifold S matrix is assembled blockwise and must
pass the same invariant suite as any modular datum.

For inner symmetries generated by a rational shift vector all the data derive
exactly from the base theory.  Outer (diagram) symmetries get their label side
computed here, but the twisted matrices belong to a genuinely twisted algebra
and must be supplied explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q
from typing import Sequence

import numpy as np

from .affine import ModularData, verify_modular_invariants
from .blocks import block_rank
from .errors import (
    ConjectureViolation,
    InvariantViolation,
    PreconditionError,
    UnsupportedFolding,
)
from .exact import phase_to_complex
from .fusion import verlinde_tensor
from .liealg import build_algebra

__all__ = [
    "OrbifoldInput",
    "OrbifoldModularData",
    "inner_orbifold_input",
    "outer_orbifold_input",
    "assemble_orbifold",
    "conjecture2_trace",
    "Conjecture2Result",
    "dual_current_label",
]


@dataclass(eq=False)
class OrbifoldInput:
    """Everything needed to assemble the orbifold of a base theory by Z2.

    ``sigma_star`` is the induced label involution; ``eta_exponents`` give the
    fixed-point phases as exact rationals q with eta = exp(2 pi i q); ``s0``
    connects twining characters to twisted ones over the fixed-point set;
    ``t1_exponents`` are the exact exponents (mod 2) whose half is the twisted
    T eigenvalue, and ``t0_exponents`` the exact T exponents (mod 1) of the
    twining-character system, which enter the twisted-twisted block.
    """

    md: ModularData
    sigma_star: tuple[int, ...]
    eta_exponents: dict[int, Q]
    fixed: tuple[int, ...]
    pairs: tuple[tuple[int, int], ...]
    s0: np.ndarray
    t1_exponents: tuple[Q, ...]
    t0_exponents: tuple[Q, ...]
    exceptional_a2n: bool = False
    shift: tuple[Q, ...] | None = None

    def __post_init__(self) -> None:
        perm = self.sigma_star
        if sorted(perm) != list(range(self.md.dim)):
            raise PreconditionError("sigma* is not a permutation of the labels")
        if any(perm[perm[i]] != i for i in range(self.md.dim)):
            raise PreconditionError("sigma* is not an involution")
        if perm[self.md.vacuum] != self.md.vacuum:
            raise PreconditionError("sigma* must fix the vacuum")
        nf = len(self.fixed)
        if self.s0.shape != (nf, nf):
            raise PreconditionError("S^(0) must be square over the fixed-point set")
        if np.abs(self.s0 @ self.s0.conj().T - np.eye(nf)).max() > 1e-8:
            raise PreconditionError("S^(0) is not unitary")
        if len(self.t1_exponents) != nf or len(self.t0_exponents) != nf:
            raise PreconditionError("T exponent lists must match the fixed-point count")

    def eta(self, i: int) -> complex:
        return phase_to_complex(self.eta_exponents[i])


@dataclass(eq=False)
class OrbifoldModularData:
    """Assembled orbifold theory plus the twisted-block matrix and residuals.

    ``md`` is a full ModularData over the orbifold labels (parent label,
    sign, twist) and can be fed back into the fusion and extension machinery.
    """

    input: OrbifoldInput
    md: ModularData
    pmatrix: np.ndarray
    residuals: dict[str, float]

    @property
    def labels(self) -> tuple:
        return self.md.labels

    @property
    def smatrix(self) -> np.ndarray:
        return self.md.smatrix


def inner_orbifold_input(md: ModularData, shift: Sequence) -> OrbifoldInput:
    """Orbifold input for the inner Z2 generated by a rational shift vector.

    The shift s is given in fundamental-weight coordinates.  It must satisfy
    2(s, omega_i) integral for every fundamental weight, so that
    exp(2 pi i (s, mu)) is a sign on the whole weight lattice, and some value
    must be odd so the symmetry has order exactly two on the labels.  The
    label involution is trivial and every label is a fixed point.
    """
    alg = build_algebra(md.algebra)
    s = tuple(Q(x) for x in shift)
    if len(s) != alg.rank:
        raise PreconditionError(
            f"shift has {len(s)} coordinates, algebra rank is {alg.rank}"
        )

    unit = [tuple(1 if j == i else 0 for j in range(alg.rank)) for i in range(alg.rank)]
    doubled = [2 * alg.pairing(s, u) for u in unit]
    if any(d.denominator != 1 for d in doubled):
        raise PreconditionError(
            "shift does not act by signs on the weight lattice: "
            f"2(s, omega) = {tuple(str(d) for d in doubled)}"
        )
    if all(d.numerator % 2 == 0 for d in doubled):
        raise PreconditionError(
            "shift acts trivially on the weight lattice; the symmetry has order 1"
        )

    dim = md.dim
    eta_exponents = {i: alg.pairing(s, md.labels[i]) % 1 for i in range(dim)}
    kss = md.level * alg.pairing(s, s)
    t = md.t_exponents
    t1 = tuple(
        (2 * t[i] + 2 * alg.pairing(s, md.labels[i]) + kss) % 2 for i in range(dim)
    )
    t0 = tuple((t[i] / 2) % 1 for i in range(dim))
    return OrbifoldInput(
        md=md,
        sigma_star=tuple(range(dim)),
        eta_exponents=eta_exponents,
        fixed=tuple(range(dim)),
        pairs=(),
        s0=md.smatrix.copy(),
        t1_exponents=t1,
        t0_exponents=t0,
        shift=s,
    )


def outer_orbifold_input(
    md: ModularData,
    sigma_star: Sequence[int],
    shift: Sequence | None = None,
    s0: np.ndarray | None = None,
    t1_exponents: Sequence[Q] | None = None,
    t0_exponents: Sequence[Q] | None = None,
) -> OrbifoldInput:
    """Orbifold input for an outer symmetry given by a label involution.

    The label side (orbit pairing, fixed points, the exceptional A_2n flag)
    is computed here.  The twisted-sector matrices belong to the orbit
    algebra, which for outer symmetries is genuinely twisted and outside the
    folding catalog, so ``s0`` and the twisted T exponents must be supplied;
    without them the construction raises UnsupportedFolding.  The involution
    must preserve the base S matrix and conformal weights.
    """
    perm = tuple(int(p) for p in sigma_star)
    dim = md.dim
    if sorted(perm) != list(range(dim)):
        raise PreconditionError("sigma* is not a permutation of the labels")
    if any(perm[perm[i]] != i for i in range(dim)):
        raise PreconditionError("sigma* is not an involution")
    if all(perm[i] == i for i in range(dim)):
        raise PreconditionError("sigma* is trivial; use the inner construction")
    s = md.smatrix
    if np.abs(s[np.ix_(perm, perm)] - s).max() > 1e-8:
        raise PreconditionError("sigma* does not preserve the S matrix")
    if any(md.delta[perm[i]] != md.delta[i] for i in range(dim)):
        raise PreconditionError("sigma* does not preserve conformal weights")

    fixed = tuple(i for i in range(dim) if perm[i] == i)
    pairs = tuple(
        (i, perm[i]) for i in range(dim) if perm[i] > i
    )
    alg = build_algebra(md.algebra)
    exceptional = alg.series == "A" and alg.rank % 2 == 0

    if s0 is None or t1_exponents is None or t0_exponents is None:
        raise UnsupportedFolding(
            "outer orbit algebras are twisted; supply s0, t1_exponents and "
            "t0_exponents explicitly"
        )
    sv = tuple(Q(x) for x in shift) if shift is not None else None
    eta_exponents = {
        i: (alg.pairing(sv, md.labels[i]) % 1 if sv is not None else Q(0))
        for i in fixed
    }
    return OrbifoldInput(
        md=md,
        sigma_star=perm,
        eta_exponents=eta_exponents,
        fixed=fixed,
        pairs=pairs,
        s0=np.asarray(s0, dtype=complex),
        t1_exponents=tuple(Q(x) % 2 for x in t1_exponents),
        t0_exponents=tuple(Q(x) % 1 for x in t0_exponents),
        exceptional_a2n=exceptional,
        shift=tuple(Q(x) for x in shift) if shift is not None else None,
    )


def _pmatrix(oin: OrbifoldInput) -> np.ndarray:
    """Twisted-twisted block before the sign dressing.

    The middle factor is the square of eta^{-1} times the T matrix of the
    twining-character system; the outer factors are the twisted T square
    roots taken on the exact exponents.
    """
    half = np.array([phase_to_complex(x / 2) for x in oin.t1_exponents])
    mid_exp = [
        (2 * (oin.t0_exponents[pos] - oin.eta_exponents[lab])) % 1
        for pos, lab in enumerate(oin.fixed)
    ]
    mid = np.array([phase_to_complex(x) for x in mid_exp])
    return (half[:, None] * half[None, :]) * (
        oin.s0.T @ (mid[:, None] * oin.s0)
    )


def dual_current_label(md: ModularData) -> tuple:
    """The orbifold's distinguished simple current (vacuum, -1, untwisted)."""
    return (md.labels[md.vacuum], -1, 0)


def assemble_orbifold(oin: OrbifoldInput, tol: float = 1e-8) -> OrbifoldModularData:
    """Build the orbifold modular data and run every consistency check.

    Label kinds: (mu, +-1, 0) for each fixed point, (mu, 0, 0) for each
    length-2 orbit (carrying the smaller label), and (mu, +-1, 1) for each
    twisted sector.  The vacuum of the orbifold is (vacuum, +1, 0).  Raises
    InvariantViolation if any modular or structural identity fails, and
    IntegralityError if the orbifold fusion ring is not integral.
    """
    md = oin.md
    base = md.smatrix
    t = md.t_exponents
    fixed_pos = {lab: pos for pos, lab in enumerate(oin.fixed)}
    p = _pmatrix(oin)

    labels: list[tuple] = []
    for i in oin.fixed:
        labels.append((md.labels[i], 1, 0))
        labels.append((md.labels[i], -1, 0))
    for a, _ in oin.pairs:
        labels.append((md.labels[a], 0, 0))
    for i in oin.fixed:
        labels.append((md.labels[i], 1, 1))
        labels.append((md.labels[i], -1, 1))

    index_of = {lab: n for n, lab in enumerate(labels)}
    parent = {lab: md.index(lab[0]) for lab in labels}
    n = len(labels)
    so = np.zeros((n, n), dtype=complex)
    for a, la in enumerate(labels):
        ia = parent[la]
        for b, lb in enumerate(labels):
            ib = parent[lb]
            ka, kb = la[2], lb[2]
            if ka == 0 and kb == 0:
                if la[1] == 0 and lb[1] == 0:
                    so[a, b] = base[ia, ib] + base[ia, oin.sigma_star[ib]]
                elif la[1] == 0 or lb[1] == 0:
                    so[a, b] = base[ia, ib]
                else:
                    so[a, b] = 0.5 * base[ia, ib]
            elif ka == 0 and kb == 1:
                if la[1] == 0:
                    so[a, b] = 0.0
                else:
                    so[a, b] = (
                        0.5 * la[1] / oin.eta(ia) * oin.s0[fixed_pos[ia], fixed_pos[ib]]
                    )
            elif ka == 1 and kb == 0:
                if lb[1] == 0:
                    so[a, b] = 0.0
                else:
                    so[a, b] = (
                        0.5 * lb[1] / oin.eta(ib) * oin.s0[fixed_pos[ib], fixed_pos[ia]]
                    )
            else:
                so[a, b] = 0.5 * la[1] * lb[1] * p[fixed_pos[ia], fixed_pos[ib]]

    c24 = md.central_charge / 24
    delta: list[Q] = []
    for lab in labels:
        if lab[2] == 0:
            delta.append(md.delta[parent[lab]])
        else:
            tau = oin.t1_exponents[fixed_pos[parent[lab]]]
            extra = Q(1, 2) if lab[1] < 0 else Q(0)
            delta.append((c24 + tau / 2 + extra) % 1)

    omd = ModularData(
        algebra=f"{md.algebra}/orb",
        level=md.level,
        labels=tuple(labels),
        smatrix=so,
        delta=tuple(delta),
        central_charge=md.central_charge,
    )
    if index_of[(md.labels[md.vacuum], 1, 0)] != 0:
        raise InvariantViolation("orbifold_vacuum_position", 1.0, 0.0, "")
    residuals = dict(verify_modular_invariants(omd, tol))

    tensor = verlinde_tensor(omd, tol=max(tol, 1e-6))
    if tensor.min() < 0:
        raise InvariantViolation("orbifold_fusion_nonnegative", float(-tensor.min()), 0.0, "")

    s0sq = oin.s0 @ oin.s0
    perm_res = np.abs(np.abs(s0sq) - np.round(np.abs(s0sq))).max()
    residuals["twining_square_permutation"] = float(perm_res)
    if perm_res > tol:
        raise InvariantViolation("twining_square_permutation", float(perm_res), tol, "")
    psq = p @ p
    match_res = np.abs(np.abs(psq) - np.abs(s0sq)).max()
    residuals["pmatrix_square_match"] = float(match_res)
    if match_res > tol:
        raise InvariantViolation("pmatrix_square_match", float(match_res), tol, "")
    return OrbifoldModularData(input=oin, md=omd, pmatrix=p, residuals=residuals)


@dataclass(frozen=True)
class Conjecture2Result:
    trace: complex
    rank: int
    dim_plus: int
    dim_minus: int
    orientation: int


def conjecture2_trace(
    oin: OrbifoldInput,
    insertions: Sequence[int],
    orientation: int = 1,
    tol: float = 1e-6,
) -> Conjecture2Result:
    """Trace of the order-2 symmetry on a genus-zero block space.

    The sum runs over twisted labels with the twining matrix in place of S;
    the two eigenspace dimensions (rank +- trace)/2 must be non-negative
    integers, otherwise a ConjectureViolation is raised.  ``orientation``
    selects which index of the twining matrix is summed, the two choices
    being transposes of each other.
    """
    md = oin.md
    fixed_pos = {lab: pos for pos, lab in enumerate(oin.fixed)}
    for mu in insertions:
        if oin.sigma_star[mu] != mu:
            raise PreconditionError(
                f"insertion {md.labels[mu]} is not fixed by the symmetry"
            )
    if md.vacuum not in fixed_pos:
        raise PreconditionError("vacuum is not a fixed point")
    s0 = oin.s0 if orientation >= 0 else oin.s0.T
    vac_col = s0[:, fixed_pos[md.vacuum]]
    value = 0.0 + 0.0j
    for kdot in range(len(oin.fixed)):
        if abs(vac_col[kdot]) < 1e-14:
            continue
        term = abs(vac_col[kdot]) ** 2
        for mu in insertions:
            term = term * s0[kdot, fixed_pos[mu]] / vac_col[kdot]
        value += term
    rank = block_rank(md, 0, insertions)
    dplus = (rank + value) / 2
    dminus = (rank - value) / 2
    out = []
    for name, d in (("+", dplus), ("-", dminus)):
        r = round(d.real)
        if abs(d - r) > tol or r < 0:
            raise ConjectureViolation(
                "orbifold eigenspace dimension is not a non-negative integer",
                report={
                    "insertions": tuple(md.labels[i] for i in insertions),
                    "trace": complex(value),
                    "rank": rank,
                    "eigenvalue": name,
                    "dimension": complex(d),
                    "orientation": orientation,
                },
            )
        out.append(r)
    return Conjecture2Result(
        trace=complex(value),
        rank=rank,
        dim_plus=out[0],
        dim_minus=out[1],
        orientation=orientation,
    )
