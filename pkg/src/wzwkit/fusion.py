"""Fusion coefficients, simple currents, and products of modular data.

Fusion multiplicities come from the Verlinde sum over the unitary S matrix
and must round to non-negative integers within tolerance; anything else is
reported as a hard error rather than silently rounded.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction as Q

import numpy as np

from .affine import ModularData
from .errors import IntegralityError, InternalConsistencyError

__all__ = [
    "verlinde_tensor",
    "fusion_matrices",
    "SimpleCurrentGroup",
    "simple_currents",
    "tensor_product",
]


def verlinde_tensor(md: ModularData, tol: float = 1e-6) -> np.ndarray:
    """All fusion multiplicities N[a, b, c] = N_{ab}^c as an integer array."""
    s = md.smatrix
    raw = np.einsum("ak,bk,ck->abc", s, s, s.conj() / s[0])
    rounded = np.round(raw.real)
    residual = np.abs(raw - rounded)
    worst = np.unravel_index(int(np.argmax(residual)), residual.shape)
    if residual[worst] > tol:
        raise IntegralityError(
            "fusion coefficient",
            complex(raw[worst]),
            float(residual[worst]),
            tuple(md.labels[i] for i in worst),
        )
    if rounded.min() < 0:
        neg = np.unravel_index(int(np.argmin(rounded)), rounded.shape)
        raise IntegralityError(
            "fusion coefficient (negative)",
            float(rounded[neg]),
            float(-rounded[neg]),
            tuple(md.labels[i] for i in neg),
        )
    return rounded.astype(np.int64)


def fusion_matrices(md: ModularData, tol: float = 1e-6) -> list[np.ndarray]:
    """The matrices (N_a)_{bc}, one per primary."""
    n = verlinde_tensor(md, tol)
    return [n[a] for a in range(md.dim)]


@dataclass(eq=False)
class SimpleCurrentGroup:
    """The group of simple currents of one theory, acting on primary labels.

    ``indices`` lists the currents as label indices (vacuum first); ``perms``
    holds the fusion permutation of each current.  Monodromy charges are
    exact rationals mod 1.
    """

    md: ModularData
    indices: tuple[int, ...]
    perms: dict[int, tuple[int, ...]]

    @property
    def order(self) -> int:
        return len(self.indices)

    @property
    def labels(self) -> tuple:
        return tuple(self.md.labels[j] for j in self.indices)

    def act(self, j: int, i: int) -> int:
        return self.perms[j][i]

    def compose(self, j1: int, j2: int) -> int:
        return self.perms[j1][j2]

    def inverse(self, j: int) -> int:
        for j2 in self.indices:
            if self.compose(j, j2) == self.md.vacuum:
                return j2
        raise InternalConsistencyError("simple current has no inverse in the group")

    def element_order(self, j: int) -> int:
        k, cur = 1, j
        while cur != self.md.vacuum:
            cur = self.compose(j, cur)
            k += 1
        return k

    def charge(self, j: int, i: int) -> Q:
        """Monodromy charge Q_J(i) = Delta_J + Delta_i - Delta_{Ji} mod 1."""
        d = self.md.delta
        return (d[j] + d[i] - d[self.act(j, i)]) % 1

    def orbit(self, i: int) -> tuple[int, ...]:
        return tuple(sorted({self.act(j, i) for j in self.indices}))

    def stabilizer(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in self.indices if self.act(j, i) == i)

    def subgroup(self, generators: tuple[int, ...]) -> "SimpleCurrentGroup":
        """Closure of the given current indices under composition."""
        elems = {self.md.vacuum}
        frontier = list(generators)
        while frontier:
            j = frontier.pop()
            if j not in elems:
                if j not in self.perms:
                    raise InternalConsistencyError(f"index {j} is not a simple current")
                elems.add(j)
                frontier.extend(self.compose(j, e) for e in list(elems))
        idx = tuple(sorted(elems))
        return SimpleCurrentGroup(self.md, idx, {j: self.perms[j] for j in idx})


def simple_currents(
    md: ModularData, tol: float = 1e-9, fusion_tol: float = 1e-6
) -> SimpleCurrentGroup:
    """Detect the full simple-current group, cross-checking two criteria.

    A current is a primary whose vacuum S entry equals that of the vacuum
    itself; independently it must fuse with every primary into exactly one
    channel.  Disagreement between the two tests is an internal error.
    """
    s0 = md.smatrix[0]
    by_smatrix = {j for j in range(md.dim) if abs(s0[j] - s0[0]) <= tol}
    n = verlinde_tensor(md, fusion_tol)
    by_fusion = {j for j in range(md.dim) if (n[j].sum(axis=1) == 1).all()}
    if by_smatrix != by_fusion:
        raise InternalConsistencyError(
            "simple-current criteria disagree: "
            f"S-matrix test gives {sorted(by_smatrix)}, fusion test gives {sorted(by_fusion)}"
        )
    perms = {}
    for j in sorted(by_fusion):
        perm = tuple(int(np.argmax(n[j, b])) for b in range(md.dim))
        if sorted(perm) != list(range(md.dim)):
            raise InternalConsistencyError("simple-current fusion is not a permutation")
        perms[j] = perm
    group = SimpleCurrentGroup(md, tuple(sorted(by_fusion)), perms)
    for j1 in group.indices:
        for j2 in group.indices:
            if group.compose(j1, j2) not in perms:
                raise InternalConsistencyError("simple currents are not closed under fusion")
    return group


def tensor_product(md1: ModularData, md2: ModularData, tol: float = 1e-9) -> ModularData:
    """Product theory: Kronecker S matrix, additive exact conformal data.

    Labels are pairs (label1, label2); nest calls for longer products.
    """
    labels = tuple((l1, l2) for l1 in md1.labels for l2 in md2.labels)
    delta = tuple(d1 + d2 for d1 in md1.delta for d2 in md2.delta)
    md = ModularData(
        algebra=f"{md1.algebra}*{md2.algebra}",
        level=-1,
        labels=labels,
        smatrix=np.kron(md1.smatrix, md2.smatrix),
        delta=delta,
        central_charge=md1.central_charge + md2.central_charge,
    )
    if md1.sj_provider is not None and md2.sj_provider is not None:

        def _provider(current, _md=md):
            from .simplecurrent import tensor_fixed_point_data

            return tensor_fixed_point_data(_md, md1, md2, current)

        md.sj_provider = _provider
    return md
