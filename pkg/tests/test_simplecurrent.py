from __future__ import annotations

import math
from fractions import Fraction as Q

import numpy as np
import pytest

from wzwkit.affine import modular_data
from wzwkit.errors import ExtensionRejected, UnderdeterminedCocycle, UnsupportedFolding
from wzwkit.fusion import simple_currents, tensor_product, verlinde_tensor
from wzwkit.simplecurrent import (
    SJCache,
    abelian_characters,
    cocycle,
    extend_by_group,
    fixed_point_smatrix,
    orbit_data,
    snap_phase,
)


def md_su2(k):
    return modular_data("A1", k)


def su2_cube(k=2):
    one = modular_data("A1", k)
    return tensor_product(tensor_product(one, one), one)


def match_up_to_bijection(s, target, tol=1e-8):
    """Try all relabelings fixing the vacuum; True if some one matches."""
    import itertools

    n = len(target)
    for perm in itertools.permutations(range(1, n)):
        p = (0,) + perm
        moved = s[np.ix_(p, p)]
        if np.abs(moved - target).max() < tol:
            return True
    return False


class TestFixedPointMatrices:
    def test_su2_odd_level_has_no_fixed_points(self):
        data = fixed_point_smatrix(md_su2(3), (3,))
        assert data.fixed == ()
        assert data.matrix.shape == (0, 0)

    def test_su2_level2_phase_defaults_to_one(self):
        data = fixed_point_smatrix(md_su2(2), (2,))
        assert data.fixed == (1,)
        assert abs(data.matrix[0, 0] - 1.0) < 1e-12

    def test_su2_level6_phase_defaults_to_one(self):
        data = fixed_point_smatrix(md_su2(6), (6,))
        assert data.fixed == (3,)
        assert abs(data.matrix[0, 0] - 1.0) < 1e-12

    def test_su2_level4_phase_is_imaginary_unit(self):
        data = fixed_point_smatrix(md_su2(4), (4,))
        assert data.fixed == (2,)
        xi = data.matrix[0, 0]
        assert abs(xi.real) < 1e-9
        assert abs(abs(xi.imag) - 1.0) < 1e-9

    def test_su2_level8_phase_squares_to_one(self):
        data = fixed_point_smatrix(md_su2(8), (8,))
        assert data.fixed == (4,)
        xi = data.matrix[0, 0]
        assert abs(xi.imag) < 1e-9
        assert abs(abs(xi.real) - 1.0) < 1e-9

    def test_su3_level3_phase(self):
        md = modular_data("A2", 3)
        data = fixed_point_smatrix(md, (3, 0))
        assert data.fixed == (md.index((1, 1)),)
        assert abs(data.matrix[0, 0] - 1.0) < 1e-9

    def test_unsupported_current_raises(self):
        md = modular_data("B2", 2)
        g = simple_currents(md)
        j = [i for i in g.indices if i != 0][0]
        with pytest.raises(UnsupportedFolding):
            fixed_point_smatrix(md, j)

    def test_provider_is_attached(self):
        md = md_su2(4)
        assert md.sj_provider is not None
        data = md.sj_provider((4,))
        assert data.fixed == (2,)

    def test_tensor_provider_multiplies_phases(self):
        md = su2_cube(2)
        vac = ((0,), (0,))
        jj = ((((2,), (2,))), (2,))
        data = md.sj_provider(jj)
        assert len(data.fixed) == 1
        assert abs(data.matrix[0, 0] - 1.0) < 1e-9

    def test_full_zero_extension(self):
        md = md_su2(4)
        data = fixed_point_smatrix(md, (4,))
        full = data.full()
        assert full.shape == (5, 5)
        assert full[2, 2] == data.matrix[0, 0]
        assert np.abs(np.delete(np.delete(full, 2, 0), 2, 1)).max() == 0


class TestCocycle:
    def test_identity_slot_gives_current_spin_phase(self):
        md = md_su2(2)
        g = simple_currents(md)
        sj = SJCache(md)
        f = cocycle(md, g, md.vacuum, md.index((2,)), 1, sj)
        assert abs(f - (-1.0)) < 1e-9

    def test_current_slot_on_own_fixed_point_is_trivial(self):
        md = md_su2(2)
        g = simple_currents(md)
        sj = SJCache(md)
        j = md.index((2,))
        assert abs(cocycle(md, g, j, j, 1, sj) - 1.0) < 1e-9

    def test_off_fixed_point_column_is_undefined(self):
        md = md_su2(2)
        g = simple_currents(md)
        sj = SJCache(md)
        with pytest.raises(UnderdeterminedCocycle):
            cocycle(md, g, md.index((2,)), md.index((2,)), 0, sj)

    def test_snap_phase(self):
        assert snap_phase(1j) == Q(1, 4)
        assert snap_phase(-1.0 + 0j) == Q(1, 2)
        assert snap_phase(complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))) == Q(1, 3)

    def test_triple_product_cocycle_sign(self):
        md = su2_cube(2)
        g = simple_currents(md)
        j022 = md.index((((0,), (2,)), (2,)))
        j202 = md.index((((2,), (0,)), (2,)))
        f = md.index((((1,), (1,)), (1,)))
        sub = g.subgroup((j022, j202))
        sj = SJCache(md)
        val = cocycle(md, sub, j022, j202, f, sj)
        assert abs(val - (-1.0)) < 1e-9


class TestCharacters:
    def test_z2_characters(self):
        md = md_su2(2)
        g = simple_currents(md)
        chars = abelian_characters(g.indices, g.compose, 0)
        assert len(chars) == 2
        assert all(v == 0 for v in chars[0].values())
        j = md.index((2,))
        assert chars[1][j] == Q(1, 2)

    def test_z3_characters(self):
        md = modular_data("A2", 1, attach_sj=False)
        g = simple_currents(md)
        chars = abelian_characters(g.indices, g.compose, 0)
        assert len(chars) == 3
        exponents = sorted(ch[g.indices[1]] for ch in chars)
        assert exponents == [Q(0), Q(1, 3), Q(2, 3)]

    def test_klein_four_characters(self):
        md = su2_cube(2)
        g = simple_currents(md)
        j022 = md.index((((0,), (2,)), (2,)))
        j202 = md.index((((2,), (0,)), (2,)))
        sub = g.subgroup((j022, j202))
        assert sub.order == 4
        chars = abelian_characters(sub.indices, sub.compose, 0)
        assert len(chars) == 4
        for ch in chars:
            assert all(v in (Q(0), Q(1, 2)) for v in ch.values())


class TestOrbitData:
    def test_su2_level2_flags_fractional_spin(self):
        md = md_su2(2)
        g = simple_currents(md)
        recs = orbit_data(md, g)
        assert all(not r.integer_spins for r in recs)
        fixed = [r for r in recs if r.orbit == (1,)][0]
        assert fixed.stabilizer == (0, 2)
        assert fixed.untwisted_stabilizer is None
        assert fixed.cocycle_values[(0, 2)] == Q(1, 2)

    def test_su2_level4_untwisted_stabilizer_is_full(self):
        md = md_su2(4)
        g = simple_currents(md)
        recs = orbit_data(md, g)
        fixed = [r for r in recs if r.orbit == (2,)][0]
        assert fixed.integer_spins
        assert fixed.untwisted_stabilizer == (0, 4)
        assert fixed.degeneracy == 1

    def test_triple_product_fixed_point_degeneracy(self):
        md = su2_cube(2)
        g = simple_currents(md)
        j022 = md.index((((0,), (2,)), (2,)))
        j202 = md.index((((2,), (0,)), (2,)))
        sub = g.subgroup((j022, j202))
        recs = orbit_data(md, sub)
        f = md.index((((1,), (1,)), (1,)))
        rec = [r for r in recs if r.representative == f][0]
        assert rec.orbit == (f,)
        assert len(rec.stabilizer) == 4
        assert rec.untwisted_stabilizer == (0,)
        assert rec.degeneracy == 2


class TestExtensions:
    def test_half_integer_current_rejected(self):
        md = md_su2(2)
        g = simple_currents(md)
        with pytest.raises(ExtensionRejected):
            extend_by_group(md, g)

    def test_su2_level4_extension_matches_su3_level1(self):
        md = md_su2(4)
        ext = extend_by_group(md, simple_currents(md))
        assert len(ext.classes) == 3
        s = ext.md.smatrix
        r3 = 1 / math.sqrt(3)
        assert abs(s[0, 0] - r3) < 1e-9
        assert abs(s[0, 1] - r3) < 1e-9 and abs(s[0, 2] - r3) < 1e-9
        w = complex(-0.5, math.sqrt(3) / 2)
        target = np.array([[r3, r3, r3], [r3, r3 * w, r3 * w.conjugate()], [r3, r3 * w.conjugate(), r3 * w]])
        assert match_up_to_bijection(s, target)
        su3 = modular_data("A2", 1, attach_sj=False)
        assert match_up_to_bijection(s, su3.smatrix)

    def test_su2_level4_extension_ring_is_z3(self):
        md = md_su2(4)
        ext = extend_by_group(md, simple_currents(md))
        n = verlinde_tensor(ext.md)
        for a in range(3):
            assert n[a].sum() == 3  # each row of each matrix has a single 1
        assert n[1, 1, 2] == 1 or n[1, 1, 0] == 1

    def test_su2_level4_invariant_matrix(self):
        md = md_su2(4)
        ext = extend_by_group(md, simple_currents(md))
        z = ext.zmatrix
        assert z[0, 0] == z[0, 4] == z[4, 0] == z[4, 4] == 1
        assert z[2, 2] == 2
        assert z[1, 1] == 0 and z[1, 3] == 0
        assert np.trace(z) == 4

    def test_su2_level8_extension_has_four_primaries(self):
        md = md_su2(8)
        ext = extend_by_group(md, simple_currents(md))
        assert len(ext.classes) == 4
        reps = sorted({c.rep for c in ext.classes})
        assert reps == [0, 2, 4]

    def test_su3_level3_extension_matches_so8_level1(self):
        md = modular_data("A2", 3)
        ext = extend_by_group(md, simple_currents(md))
        assert len(ext.classes) == 4
        target = 0.5 * np.array(
            [[1, 1, 1, 1], [1, 1, -1, -1], [1, -1, 1, -1], [1, -1, -1, 1]], dtype=complex
        )
        assert match_up_to_bijection(ext.md.smatrix, target)

    def test_su3_level3_parent_fixed_block_entry(self):
        md = modular_data("A2", 3)
        i = md.index((1, 1))
        assert abs(md.smatrix[i, i] - (-0.5)) < 1e-9

    def test_triple_product_extension_matches_so9_level1(self):
        md = su2_cube(2)
        g = simple_currents(md)
        j022 = md.index((((0,), (2,)), (2,)))
        j202 = md.index((((2,), (0,)), (2,)))
        sub = g.subgroup((j022, j202))
        ext = extend_by_group(md, sub)
        assert len(ext.classes) == 3
        r2 = 1 / math.sqrt(2)
        target = np.array(
            [[0.5, 0.5, r2], [0.5, 0.5, -r2], [r2, -r2, 0.0]], dtype=complex
        )
        assert match_up_to_bijection(ext.md.smatrix, target)
        deltas = sorted(ext.md.delta)
        assert deltas == [Q(0), Q(1, 2), Q(9, 16)]
        assert ext.md.central_charge == Q(9, 2)
        assert np.trace(ext.zmatrix) == 12

    def test_extension_preserves_central_charge(self):
        md = md_su2(4)
        ext = extend_by_group(md, simple_currents(md))
        assert ext.md.central_charge == md.central_charge == Q(2)
