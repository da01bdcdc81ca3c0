"""Z2 orbifold assembly, structural checks, and the trace conjecture."""

from __future__ import annotations

from fractions import Fraction as Q

import numpy as np
import pytest

from wzwkit.affine import modular_data
from wzwkit.errors import (
    ConjectureViolation,
    InvariantViolation,
    PreconditionError,
    UnsupportedFolding,
)
from wzwkit.fusion import simple_currents
from wzwkit.orbifold import (
    OrbifoldInput,
    assemble_orbifold,
    conjecture2_trace,
    dual_current_label,
    inner_orbifold_input,
    outer_orbifold_input,
)
from wzwkit.simplecurrent import extend_by_group


@pytest.fixture(scope="module")
def su2_level2():
    return modular_data("A1", 2)


@pytest.fixture(scope="module")
def su2_level4():
    return modular_data("A1", 4)


@pytest.fixture(scope="module")
def orb_level2(su2_level2):
    return assemble_orbifold(inner_orbifold_input(su2_level2, (1,)))


@pytest.fixture(scope="module")
def orb_level4(su2_level4):
    return assemble_orbifold(inner_orbifold_input(su2_level4, (1,)))


class TestInnerInput:
    def test_eta_is_parity_of_the_label(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        assert [oin.eta_exponents[i] for i in range(3)] == [0, Q(1, 2), 0]
        assert [oin.eta(i) for i in range(3)] == pytest.approx([1, -1, 1])

    def test_eta_at_level_four(self, su2_level4):
        oin = inner_orbifold_input(su2_level4, (1,))
        assert [oin.eta(i).real for i in range(5)] == pytest.approx([1, -1, 1, -1, 1])

    def test_all_labels_fixed_and_twining_matrix_is_s(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        assert oin.fixed == (0, 1, 2)
        assert oin.pairs == ()
        assert oin.sigma_star == (0, 1, 2)
        assert np.array_equal(oin.s0, su2_level2.smatrix)

    def test_twisted_t_exponents_level_two(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        assert oin.t1_exponents == (Q(7, 8), Q(1, 4), Q(15, 8))
        assert oin.t0_exponents == (Q(31, 32), Q(1, 16), Q(7, 32))

    def test_zero_shift_rejected(self, su2_level2):
        with pytest.raises(PreconditionError):
            inner_orbifold_input(su2_level2, (0,))

    def test_even_shift_acts_trivially(self, su2_level2):
        with pytest.raises(PreconditionError):
            inner_orbifold_input(su2_level2, (2,))

    def test_shift_must_act_by_signs(self, su2_level2):
        with pytest.raises(PreconditionError):
            inner_orbifold_input(su2_level2, (Q(1, 3),))

    def test_shift_length_checked(self, su2_level2):
        with pytest.raises(PreconditionError):
            inner_orbifold_input(su2_level2, (1, 1))

    def test_su3_has_no_inner_sign_symmetry(self):
        md = modular_data("A2", 1)
        with pytest.raises(PreconditionError):
            inner_orbifold_input(md, (1, 1))


class TestAssembleLevelTwo:
    def test_label_set(self, orb_level2):
        assert orb_level2.md.dim == 12
        assert orb_level2.md.labels[0] == ((0,), 1, 0)
        assert orb_level2.md.labels[1] == ((0,), -1, 0)
        untwisted = [lab for lab in orb_level2.md.labels if lab[2] == 0]
        twisted = [lab for lab in orb_level2.md.labels if lab[2] == 1]
        assert len(untwisted) == len(twisted) == 6

    def test_residuals_within_tolerance(self, orb_level2):
        assert orb_level2.residuals
        assert max(orb_level2.residuals.values()) < 1e-8
        assert "twining_square_permutation" in orb_level2.residuals
        assert "pmatrix_square_match" in orb_level2.residuals

    def test_vacuum_row_entries(self, orb_level2, su2_level2):
        s = su2_level2.smatrix
        assert orb_level2.smatrix[0, 0] == pytest.approx(s[0, 0] / 2)
        # both twisted signs couple to the vacuum with the same strength
        assert orb_level2.smatrix[0, 6] == pytest.approx(s[0, 0] / 2)
        assert orb_level2.smatrix[0, 7] == pytest.approx(s[0, 0] / 2)

    def test_fixed_twisted_entry_carries_eta(self, orb_level2, su2_level2):
        # row ((1,), +1, 0), column ((0,), +1, 1): eta_1 = -1 flips the sign
        s = su2_level2.smatrix
        assert orb_level2.smatrix[2, 6] == pytest.approx(-s[1, 0] / 2)
        assert orb_level2.smatrix[3, 6] == pytest.approx(s[1, 0] / 2)

    def test_twisted_conformal_weights(self, orb_level2):
        t = [e % 1 for e in orb_level2.md.t_exponents]
        assert t[6] == Q(7, 16)
        assert t[7] == Q(15, 16)
        assert t[8] == Q(1, 8)
        assert t[9] == Q(5, 8)
        assert t[10] == Q(15, 16)
        assert t[11] == Q(7, 16)

    def test_dual_current_present(self, orb_level2, su2_level2):
        label = dual_current_label(su2_level2)
        assert label == ((0,), -1, 0)
        idx = orb_level2.md.index(label)
        group = simple_currents(orb_level2.md)
        assert idx in group.indices
        assert group.element_order(idx) == 2

    def test_extension_by_dual_current_recovers_parent(self, orb_level2, su2_level2):
        idx = orb_level2.md.index(dual_current_label(su2_level2))
        z2 = simple_currents(orb_level2.md).subgroup((idx,))
        assert z2.order == 2
        ext = extend_by_group(orb_level2.md, z2)
        assert len(ext.classes) == 3
        reps = [orb_level2.md.labels[c.rep] for c in ext.classes]
        assert [r[0] for r in reps] == list(su2_level2.labels)
        assert all(r[2] == 0 for r in reps)
        assert np.abs(ext.md.smatrix - su2_level2.smatrix).max() < 1e-10
        assert ext.md.delta == su2_level2.delta


class TestAssembleLevelFour:
    def test_dimensions(self, orb_level4):
        assert orb_level4.md.dim == 20
        assert orb_level4.pmatrix.shape == (5, 5)

    def test_residuals_within_tolerance(self, orb_level4):
        assert max(orb_level4.residuals.values()) < 1e-8

    def test_pmatrix_square_is_signed_permutation(self, orb_level4):
        psq = orb_level4.pmatrix @ orb_level4.pmatrix
        mags = np.abs(psq)
        assert np.abs(mags - np.round(mags)).max() < 1e-8
        assert (np.round(mags).sum(axis=0) == 1).all()
        nonzero = np.abs(psq[mags > 0.5])
        assert np.abs(nonzero - 1).max() < 1e-8

    def test_extension_by_dual_current_recovers_parent(self, orb_level4, su2_level4):
        idx = orb_level4.md.index(dual_current_label(su2_level4))
        z2 = simple_currents(orb_level4.md).subgroup((idx,))
        ext = extend_by_group(orb_level4.md, z2)
        assert len(ext.classes) == 5
        assert np.abs(ext.md.smatrix - su2_level4.smatrix).max() < 1e-10
        assert ext.md.delta == su2_level4.delta


class TestInputValidation:
    def test_tampered_twisted_t_fails_invariants(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        bad = OrbifoldInput(
            md=oin.md,
            sigma_star=oin.sigma_star,
            eta_exponents=oin.eta_exponents,
            fixed=oin.fixed,
            pairs=oin.pairs,
            s0=oin.s0,
            t1_exponents=(oin.t1_exponents[0] + Q(1, 8),) + oin.t1_exponents[1:],
            t0_exponents=oin.t0_exponents,
        )
        with pytest.raises(InvariantViolation):
            assemble_orbifold(bad)

    def test_nonunitary_twining_matrix_rejected(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        with pytest.raises(PreconditionError):
            OrbifoldInput(
                md=oin.md,
                sigma_star=oin.sigma_star,
                eta_exponents=oin.eta_exponents,
                fixed=oin.fixed,
                pairs=oin.pairs,
                s0=2 * oin.s0,
                t1_exponents=oin.t1_exponents,
                t0_exponents=oin.t0_exponents,
            )


class TestOuterInput:
    def test_a3_flip_label_side(self):
        md = modular_data("A3", 1)
        oin = outer_orbifold_input(
            md,
            (0, 3, 2, 1),
            s0=np.eye(2),
            t1_exponents=(Q(0), Q(0)),
            t0_exponents=(Q(0), Q(0)),
        )
        assert oin.fixed == (0, 2)
        assert oin.pairs == ((1, 3),)
        assert not oin.exceptional_a2n

    def test_twisted_data_required(self):
        md = modular_data("A3", 1)
        with pytest.raises(UnsupportedFolding):
            outer_orbifold_input(md, (0, 3, 2, 1))

    def test_charge_conjugation_of_a2_is_flagged(self):
        md = modular_data("A2", 1)
        oin = outer_orbifold_input(
            md,
            (0, 2, 1),
            s0=np.eye(1),
            t1_exponents=(Q(0),),
            t0_exponents=(Q(0),),
        )
        assert oin.exceptional_a2n
        assert oin.fixed == (0,)
        assert oin.pairs == ((1, 2),)

    def test_non_involution_rejected(self):
        md = modular_data("A3", 1)
        with pytest.raises(PreconditionError):
            outer_orbifold_input(md, (0, 2, 3, 1))

    def test_trivial_permutation_rejected(self):
        md = modular_data("A3", 1)
        with pytest.raises(PreconditionError):
            outer_orbifold_input(md, (0, 1, 2, 3))

    def test_s_breaking_involution_rejected(self):
        md = modular_data("A3", 1)
        with pytest.raises(PreconditionError):
            outer_orbifold_input(md, (0, 2, 1, 3))


class TestConjectureTwo:
    def test_inner_trace_equals_rank(self, su2_level4):
        oin = inner_orbifold_input(su2_level4, (1,))
        for a in range(5):
            for b in range(a, 5):
                for c in range(b, 5):
                    res = conjecture2_trace(oin, (a, b, c))
                    assert res.trace.real == pytest.approx(res.rank, abs=1e-9)
                    assert abs(res.trace.imag) < 1e-9
                    assert res.dim_plus == res.rank
                    assert res.dim_minus == 0

    def test_vacuum_triple(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        res = conjecture2_trace(oin, (0, 0, 0))
        assert res.rank == 1
        assert res.trace.real == pytest.approx(1.0)

    def test_orientations_agree_for_symmetric_twining(self, su2_level2):
        oin = inner_orbifold_input(su2_level2, (1,))
        plus = conjecture2_trace(oin, (1, 1, 2), orientation=1)
        minus = conjecture2_trace(oin, (1, 1, 2), orientation=-1)
        assert plus.trace == pytest.approx(minus.trace)
        assert plus.orientation == 1
        assert minus.orientation == -1

    def test_insertions_must_be_fixed(self):
        md = modular_data("A3", 1)
        oin = outer_orbifold_input(
            md,
            (0, 3, 2, 1),
            s0=np.eye(2),
            t1_exponents=(Q(0), Q(0)),
            t0_exponents=(Q(0), Q(0)),
        )
        with pytest.raises(PreconditionError):
            conjecture2_trace(oin, (1, 1, 0))

    def test_dishonest_twining_data_raises(self):
        md = modular_data("A3", 1)
        rot = np.array([[0.6, 0.8], [-0.8, 0.6]])
        oin = outer_orbifold_input(
            md,
            (0, 3, 2, 1),
            s0=rot,
            t1_exponents=(Q(0), Q(0)),
            t0_exponents=(Q(0), Q(0)),
        )
        with pytest.raises(ConjectureViolation):
            conjecture2_trace(oin, (2, 2, 2))
