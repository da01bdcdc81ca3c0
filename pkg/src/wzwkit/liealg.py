"""Finite simple Lie algebra data: Cartan matrices, roots, Weyl groups, centers.

Conventions used throughout the package:

* Cartan matrices follow Bourbaki node numbering, with the pairing convention
  ``A[i][j] = 2 (alpha_i, alpha_j) / (alpha_j, alpha_j)``.  Row ``i`` of the
  Cartan matrix is therefore the simple root ``alpha_i`` written in the basis
  of fundamental weights.
* Weights are coordinate tuples in the fundamental-weight basis (Dynkin
  labels).  The invariant bilinear form is normalized so long roots have
  squared length 2, and is represented exactly over the rationals.
* The Weyl group acts on Dynkin-label column vectors through integer
  matrices; the simple reflection ``r_i`` has matrix ``I - E(i)`` where
  column ``i`` of ``E(i)`` holds row ``i`` of the Cartan matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction as Q
from functools import lru_cache
from math import gcd, lcm
from typing import Iterator, Sequence

from .errors import CartanDataError, InternalConsistencyError, WeylCapExceeded
from .exact import invert_rational, mat_vec, smith_normal_form

__all__ = [
    "SimpleLieAlgebra",
    "WeylElement",
    "CenterGroup",
    "NodePermutation",
    "parse_algebra_label",
    "cartan_matrix",
    "build_algebra",
    "affine_cartan_matrix",
    "weyl_traverse",
    "weyl_order",
    "center_group",
    "diagram_automorphisms",
]

_RANK_BOUNDS = {
    "A": (1, None),
    "B": (2, None),
    "C": (2, None),
    "D": (3, None),
    "E": (6, 8),
    "F": (4, 4),
    "G": (2, 2),
}

_DIMENSIONS = {
    "A": lambda n: n * (n + 2),
    "B": lambda n: n * (2 * n + 1),
    "C": lambda n: n * (2 * n + 1),
    "D": lambda n: n * (2 * n - 1),
    "E": lambda n: {6: 78, 7: 133, 8: 248}[n],
    "F": lambda n: 52,
    "G": lambda n: 14,
}


def parse_algebra_label(label: str) -> tuple[str, int]:
    """Split a label like ``"A2"`` or ``"E8"`` into (series, rank)."""
    label = label.strip()
    if len(label) < 2 or label[0].upper() not in _RANK_BOUNDS or not label[1:].isdigit():
        raise CartanDataError(f"cannot parse algebra label {label!r}; expected e.g. 'A2', 'G2'")
    series = label[0].upper()
    rank = int(label[1:])
    lo, hi = _RANK_BOUNDS[series]
    if rank < lo or (hi is not None and rank > hi):
        raise CartanDataError(f"series {series} does not admit rank {rank}")
    return series, rank


def cartan_matrix(series: str, rank: int) -> tuple[tuple[int, ...], ...]:
    """Bourbaki Cartan matrix for the given series and rank."""
    lo, hi = _RANK_BOUNDS.get(series, (None, None))
    if lo is None or rank < lo or (hi is not None and rank > hi):
        raise CartanDataError(f"invalid series/rank pair ({series}, {rank})")
    n = rank
    a = [[2 * int(i == j) for j in range(n)] for i in range(n)]

    def link(i: int, j: int, aij: int = -1, aji: int = -1) -> None:
        a[i][j] = aij
        a[j][i] = aji

    if series == "A":
        for i in range(n - 1):
            link(i, i + 1)
    elif series == "B":
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 2, n - 1, -2, -1)
    elif series == "C":
        for i in range(n - 2):
            link(i, i + 1)
        link(n - 2, n - 1, -1, -2)
    elif series == "D":
        for i in range(n - 3):
            link(i, i + 1)
        link(n - 3, n - 2)
        link(n - 3, n - 1)
    elif series == "E":
        chain = [0, 2, 3, 4, 5, 6, 7][: n - 1]
        for x, y in zip(chain, chain[1:]):
            link(x, y)
        link(1, 3)
    elif series == "F":
        link(0, 1)
        link(1, 2, -2, -1)
        link(2, 3)
    elif series == "G":
        link(0, 1, -1, -3)
    return tuple(tuple(row) for row in a)


@dataclass(frozen=True)
class SimpleLieAlgebra:
    """Immutable bundle of root data for one finite simple Lie algebra.

    All root coordinates come in two flavors: ``*_alpha`` tuples are in the
    simple-root basis, ``*_omega`` tuples in the fundamental-weight basis.
    """

    series: str
    rank: int
    cartan: tuple[tuple[int, ...], ...]
    symmetrizer: tuple[int, ...]
    root_lengths: tuple[Q, ...]
    metric: tuple[tuple[Q, ...], ...]
    positive_roots_alpha: tuple[tuple[int, ...], ...]
    positive_roots_omega: tuple[tuple[int, ...], ...]
    highest_root_alpha: tuple[int, ...]
    highest_root_omega: tuple[int, ...]
    marks: tuple[int, ...]
    comarks: tuple[int, ...]
    dual_coxeter: int
    dim: int

    @property
    def name(self) -> str:
        return f"{self.series}{self.rank}"

    @property
    def weyl_vector(self) -> tuple[int, ...]:
        return (1,) * self.rank

    @property
    def num_positive_roots(self) -> int:
        return len(self.positive_roots_alpha)

    def pairing(self, x: Sequence, y: Sequence) -> Q:
        """Invariant bilinear form of two weights given by Dynkin labels."""
        g = self.metric
        return sum(
            (Q(x[i]) * g[i][j] * Q(y[j]) for i in range(self.rank) for j in range(self.rank)),
            Q(0),
        )

    def coroot_pairing(self, x: Sequence, i: int) -> Q:
        """Pairing (x, alpha_i^vee); just the i-th Dynkin label."""
        return Q(x[i])

    def level_of(self, x: Sequence) -> Q:
        """Pairing (x, theta^vee) = sum of Dynkin labels weighted by comarks."""
        return sum((Q(x[i]) * self.comarks[i] for i in range(self.rank)), Q(0))

    def simple_root_omega(self, i: int) -> tuple[int, ...]:
        return self.cartan[i]

    def reflection_matrix(self, i: int) -> tuple[tuple[int, ...], ...]:
        """Matrix of the simple reflection r_i on Dynkin-label columns."""
        n = self.rank
        return tuple(
            tuple(int(k == j) - (self.cartan[i][k] if j == i else 0) for j in range(n))
            for k in range(n)
        )

    def reflect(self, i: int, x: Sequence[int]) -> tuple[int, ...]:
        xi = x[i]
        return tuple(x[k] - xi * self.cartan[i][k] for k in range(self.rank))


def _symmetrizer(cartan: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Positive integers d with d_i A_ij = d_j A_ji, minimal and connected."""
    n = len(cartan)
    d: list[Q | None] = [None] * n
    d[0] = Q(1)
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in range(n):
            if i != j and cartan[i][j] != 0 and d[j] is None:
                d[j] = d[i] * Q(cartan[i][j], cartan[j][i])
                queue.append(j)
    if any(x is None for x in d):
        raise CartanDataError("Cartan matrix is not connected")
    denom = lcm(*[x.denominator for x in d])
    ints = [int(x * denom) for x in d]
    g = 0
    for v in ints:
        g = gcd(g, v)
    ints = [v // g for v in ints]
    if any(v <= 0 for v in ints):
        raise InternalConsistencyError("symmetrizer came out non-positive")
    for i in range(n):
        for j in range(n):
            if ints[i] * cartan[i][j] != ints[j] * cartan[j][i]:
                raise InternalConsistencyError("symmetrizer failed to symmetrize the Cartan matrix")
    return tuple(ints)


def _root_closure(alg_cartan: Sequence[Sequence[int]]) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All roots as (alpha-coords, omega-coords) pairs via reflection closure."""
    n = len(alg_cartan)
    simples = []
    for i in range(n):
        alpha = tuple(int(k == i) for k in range(n))
        omega = tuple(alg_cartan[i])
        simples.append((alpha, omega))
    seen = dict(simples)
    frontier = list(simples)
    while frontier:
        new = []
        for alpha, omega in frontier:
            for i in range(n):
                xi = omega[i]
                if xi == 0:
                    continue
                alpha2 = tuple(a - xi * int(k == i) for k, a in enumerate(alpha))
                if alpha2 in seen:
                    continue
                omega2 = tuple(omega[k] - xi * alg_cartan[i][k] for k in range(n))
                seen[alpha2] = omega2
                new.append((alpha2, omega2))
        frontier = new
    return sorted(seen.items())


@lru_cache(maxsize=None)
def build_algebra(label: str) -> SimpleLieAlgebra:
    """Construct the full root-data bundle for an algebra label like ``"B3"``.

    Everything downstream (metric pairings, Weyl traversal, affine data) is
    derived from the Cartan matrix built here; a handful of internal
    consistency checks run once at construction time.
    """
    series, rank = parse_algebra_label(label)
    cart = cartan_matrix(series, rank)
    sym = _symmetrizer(cart)
    dmin = min(sym)
    lengths = tuple(Q(dmin, d) for d in sym)

    ainv = invert_rational(cart)
    # metric G with G[i][j] = (omega_i, omega_j): G = diag(lengths) @ inverse(A^T)
    metric = tuple(
        tuple(lengths[i] * ainv[j][i] for j in range(rank)) for i in range(rank)
    )
    for i in range(rank):
        for j in range(rank):
            if metric[i][j] != metric[j][i]:
                raise InternalConsistencyError("weight-space metric is not symmetric")

    roots = _root_closure(cart)
    positive = [(a, w) for a, w in roots if any(x > 0 for x in a)]
    dim = _DIMENSIONS[series](rank)
    if 2 * len(positive) + rank != dim:
        raise InternalConsistencyError(
            f"root count {len(positive)} inconsistent with dim {dim} for {label}"
        )
    positive.sort(key=lambda rw: rw[0])
    heights = [sum(a) for a, _ in positive]
    top = max(range(len(positive)), key=lambda idx: heights[idx])
    theta_alpha, theta_omega = positive[top]
    if heights.count(heights[top]) != 1:
        raise InternalConsistencyError("highest root is not unique")

    marks = theta_alpha
    comarks_q = [Q(marks[i]) * lengths[i] for i in range(rank)]
    if any(c.denominator != 1 for c in comarks_q):
        raise InternalConsistencyError("comarks are not integral")
    comarks = tuple(int(c) for c in comarks_q)
    hvee = 1 + sum(comarks)

    alg = SimpleLieAlgebra(
        series=series,
        rank=rank,
        cartan=cart,
        symmetrizer=sym,
        root_lengths=lengths,
        metric=metric,
        positive_roots_alpha=tuple(a for a, _ in positive),
        positive_roots_omega=tuple(w for _, w in positive),
        highest_root_alpha=theta_alpha,
        highest_root_omega=theta_omega,
        marks=marks,
        comarks=comarks,
        dual_coxeter=hvee,
        dim=dim,
    )
    if alg.pairing(theta_omega, theta_omega) != 2:
        raise InternalConsistencyError("highest root squared length is not 2")
    for i in range(rank):
        if alg.coroot_pairing(alg.weyl_vector, i) != 1:
            raise InternalConsistencyError("Weyl vector pairing check failed")
    return alg


@dataclass(frozen=True)
class WeylElement:
    matrix: tuple[tuple[int, ...], ...]
    sign: int
    word: tuple[int, ...]


def weyl_traverse(alg: SimpleLieAlgebra, cap: int = 200000) -> Iterator[WeylElement]:
    """Breadth-first enumeration of the Weyl group, each element exactly once.

    Elements appear in order of increasing reduced-word length with a
    deterministic tie-break (generator index).  Raises WeylCapExceeded,
    carrying the partial count, as soon as more than ``cap`` elements have
    been produced.
    """
    n = alg.rank
    ident = tuple(tuple(int(i == j) for j in range(n)) for i in range(n))
    gens = [alg.reflection_matrix(i) for i in range(n)]

    def apply(g, m):
        # matrix product g @ m over the integers
        return tuple(
            tuple(sum(g[r][k] * m[k][c] for k in range(n)) for c in range(n)) for r in range(n)
        )

    seen = {ident}
    queue = deque([WeylElement(ident, 1, ())])
    count = 0
    while queue:
        el = queue.popleft()
        count += 1
        if count > cap:
            raise WeylCapExceeded(cap, len(seen))
        yield el
        for i in range(n):
            m2 = apply(gens[i], el.matrix)
            if m2 not in seen:
                seen.add(m2)
                queue.append(WeylElement(m2, -el.sign, el.word + (i,)))


def weyl_order(alg: SimpleLieAlgebra, cap: int = 200000) -> int:
    return sum(1 for _ in weyl_traverse(alg, cap))


@dataclass(frozen=True)
class CenterGroup:
    """The center of the simply connected group, as an abelian group.

    ``factors`` are the nontrivial invariant factors (each divides the next);
    ``generators`` are coset representatives in coweight coordinates, one per
    factor, so that generator k has order factors[k] in the quotient.
    """

    factors: tuple[int, ...]
    generators: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        out = 1
        for f in self.factors:
            out *= f
        return out

    def describe(self) -> str:
        if not self.factors:
            return "trivial"
        return " x ".join(f"Z{f}" for f in self.factors)


def center_group(alg: SimpleLieAlgebra) -> CenterGroup:
    """Coweight lattice modulo coroot lattice via Smith normal form.

    In coweight coordinates the coroot lattice is spanned by the columns of
    the Cartan matrix, so the quotient is Z^n / A Z^n.
    """
    n = alg.rank
    left, diag, _right = smith_normal_form(alg.cartan)
    linv = invert_rational(left)
    factors = []
    gens = []
    for i in range(n):
        d = diag[i][i]
        if d > 1:
            factors.append(d)
            col = [linv[r][i] for r in range(n)]
            if any(c.denominator != 1 for c in col):
                raise InternalConsistencyError("unimodular inverse not integral")
            gens.append(tuple(int(c) for c in col))
    return CenterGroup(tuple(factors), tuple(gens))


def affine_cartan_matrix(alg: SimpleLieAlgebra) -> tuple[tuple[int, ...], ...]:
    """Untwisted affine Cartan matrix; node 0 is the affine node."""
    n = alg.rank
    theta_w = alg.highest_root_omega
    row0 = [2] + [-theta_w[j] for j in range(n)]
    rows = [tuple(row0)]
    for i in range(n):
        pair = alg.pairing(alg.simple_root_omega(i), theta_w)
        if pair.denominator != 1:
            raise InternalConsistencyError("affine column pairing not integral")
        rows.append(tuple([-int(pair)] + list(alg.cartan[i])))
    return tuple(rows)


@dataclass(frozen=True)
class NodePermutation:
    """A symmetry of a (possibly affine) Dynkin diagram as a node permutation."""

    perm: tuple[int, ...]
    affine: bool

    @property
    def order(self) -> int:
        k = 1
        p = self.perm
        cur = p
        idn = tuple(range(len(p)))
        while cur != idn:
            cur = tuple(p[i] for i in cur)
            k += 1
        return k

    def apply(self, node: int) -> int:
        return self.perm[node]


def _matrix_automorphisms(mat: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """All node permutations p with mat[p(i)][p(j)] = mat[i][j], by backtracking."""
    n = len(mat)
    # node signature: multiset of row and column entries, to prune candidates
    sig = [
        (mat[i][i], tuple(sorted(mat[i])), tuple(sorted(row[i] for row in mat)))
        for i in range(n)
    ]
    candidates = [[j for j in range(n) if sig[j] == sig[i]] for i in range(n)]
    out: list[tuple[int, ...]] = []
    perm = [-1] * n
    used = [False] * n

    def place(i: int) -> None:
        if i == n:
            out.append(tuple(perm))
            return
        for j in candidates[i]:
            if used[j]:
                continue
            ok = True
            for k in range(i):
                if mat[j][perm[k]] != mat[i][k] or mat[perm[k]][j] != mat[k][i]:
                    ok = False
                    break
            if ok:
                perm[i] = j
                used[j] = True
                place(i + 1)
                used[j] = False
                perm[i] = -1

    place(0)
    out.sort()
    return out


def diagram_automorphisms(alg: SimpleLieAlgebra, affine: bool = False) -> tuple[NodePermutation, ...]:
    """Symmetries of the finite or untwisted affine Dynkin diagram.

    The affine list always contains the rotations induced by the center of
    the simply connected group (for the A series these are the cyclic
    rotations of the extended diagram).
    """
    mat = affine_cartan_matrix(alg) if affine else alg.cartan
    perms = _matrix_automorphisms(mat)
    return tuple(NodePermutation(p, affine) for p in perms)
