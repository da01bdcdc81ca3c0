from __future__ import annotations

import math
from fractions import Fraction as Q

import numpy as np
import pytest

import wzwkit.affine as affine
from wzwkit.affine import (
    cache_path,
    central_charge,
    conformal_weight,
    integrable_weights,
    kac_peterson_smatrix,
    load_modular_data,
    modular_data,
    save_modular_data,
    verify_modular_invariants,
)
from wzwkit.errors import InvariantViolation
from wzwkit.liealg import build_algebra


def su2_smatrix(k: int) -> np.ndarray:
    """Closed-form S matrix of the level-k su(2) theory."""
    n = k + 2
    return np.array(
        [
            [math.sqrt(2.0 / n) * math.sin(math.pi * (a + 1) * (b + 1) / n) for b in range(k + 1)]
            for a in range(k + 1)
        ]
    )


class TestIntegrableWeights:
    def test_a2_level_1(self):
        alg = build_algebra("A2")
        assert integrable_weights(alg, 1) == ((0, 0), (0, 1), (1, 0))

    def test_a1_counts(self):
        alg = build_algebra("A1")
        for k in range(7):
            assert integrable_weights(alg, k) == tuple((j,) for j in range(k + 1))

    def test_vacuum_first_and_sorted(self):
        for label, k in [("B3", 4), ("G2", 3), ("C3", 2)]:
            weights = integrable_weights(build_algebra(label), k)
            assert weights[0] == (0,) * build_algebra(label).rank
            assert list(weights) == sorted(weights)

    def test_matches_filter_enumeration(self):
        import itertools

        for label, k in [("B3", 6), ("G2", 4), ("A3", 3)]:
            alg = build_algebra(label)
            brute = sorted(
                lam
                for lam in itertools.product(range(k + 1), repeat=alg.rank)
                if sum(l * c for l, c in zip(lam, alg.comarks)) <= k
            )
            assert list(integrable_weights(alg, k)) == brute

    def test_level_zero_is_vacuum_only(self):
        assert integrable_weights(build_algebra("D4"), 0) == ((0, 0, 0, 0),)


class TestConformalData:
    @pytest.mark.parametrize(
        "k,lam,expect",
        [
            (1, 1, Q(1, 4)),
            (2, 1, Q(3, 16)),
            (2, 2, Q(1, 2)),
            (4, 2, Q(1, 3)),
            (4, 4, Q(1)),
            (6, 3, Q(15, 32)),
            (8, 2, Q(1, 5)),
            (8, 4, Q(3, 5)),
        ],
    )
    def test_su2_conformal_weights(self, k, lam, expect):
        assert conformal_weight(build_algebra("A1"), k, (lam,)) == expect

    def test_su2_current_weight_is_k_over_4(self):
        alg = build_algebra("A1")
        for k in range(1, 9):
            assert conformal_weight(alg, k, (k,)) == Q(k, 4)

    def test_su3_current_weight_is_k_over_3(self):
        alg = build_algebra("A2")
        for k in range(1, 5):
            assert conformal_weight(alg, k, (k, 0)) == Q(k, 3)
            assert conformal_weight(alg, k, (0, k)) == Q(k, 3)

    @pytest.mark.parametrize(
        "label,k,expect",
        [
            ("A1", 1, Q(1)),
            ("A1", 2, Q(3, 2)),
            ("A1", 4, Q(2)),
            ("A2", 3, Q(4)),
            ("G2", 1, Q(14, 5)),
        ],
    )
    def test_central_charges(self, label, k, expect):
        assert central_charge(build_algebra(label), k) == expect

    def test_t_exponents_exact(self):
        md = modular_data("A1", 1, attach_sj=False)
        assert md.t_exponents == (Q(-1, 24), Q(5, 24))


class TestSmatrix:
    @pytest.mark.parametrize("k", range(1, 9))
    def test_su2_closed_form(self, k):
        alg = build_algebra("A1")
        s = kac_peterson_smatrix(alg, k)
        assert np.abs(s - su2_smatrix(k)).max() < 1e-12

    def test_su2_level2_frozen(self):
        s = kac_peterson_smatrix(build_algebra("A1"), 2)
        r = 1 / math.sqrt(2)
        expect = np.array([[0.5, r, 0.5], [r, 0.0, -r], [0.5, -r, 0.5]])
        assert np.abs(s - expect).max() < 1e-12

    def test_level_zero_trivial(self):
        for label in ["A1", "A2", "B2"]:
            s = kac_peterson_smatrix(build_algebra(label), 0)
            assert s.shape == (1, 1)
            assert abs(s[0, 0] - 1.0) < 1e-12

    @pytest.mark.parametrize("label,k", [("A2", 2), ("B2", 3), ("G2", 2), ("A3", 1), ("C3", 1)])
    def test_invariants_pass(self, label, k):
        md = modular_data(label, k, attach_sj=False)
        residuals = verify_modular_invariants(md, tol=1e-9)
        assert set(residuals) >= {"unitarity", "symmetry", "st_cubed"}
        assert max(residuals.values()) <= 1e-9

    def test_invariant_violation_raised_on_tampered_matrix(self):
        md = modular_data("A1", 2, attach_sj=False)
        md.smatrix = md.smatrix.copy()
        md.smatrix[1, 2] += 1e-3
        with pytest.raises(InvariantViolation) as exc:
            verify_modular_invariants(md)
        assert exc.value.residual > exc.value.tol

    def test_a2_conjugation_transposes_labels(self):
        md = modular_data("A2", 3, attach_sj=False)
        perm = md.conjugation_permutation()
        for i, lab in enumerate(md.labels):
            assert md.labels[perm[i]] == (lab[1], lab[0])

    def test_su2_self_conjugate(self):
        md = modular_data("A1", 5, attach_sj=False)
        assert md.conjugation_permutation() == tuple(range(6))

    def test_quantum_dimensions_at_least_one(self):
        md = modular_data("B2", 4, attach_sj=False)
        qdims = md.smatrix[0].real / md.smatrix[0, 0].real
        assert qdims.min() > 1 - 1e-9


class TestCache:
    def test_roundtrip_byte_identical(self, tmp_path):
        md = modular_data("A2", 2, attach_sj=False)
        p1 = save_modular_data(md, tmp_path / "one")
        loaded = load_modular_data("A2", 2, tmp_path / "one")
        assert loaded is not None
        assert loaded.labels == md.labels
        assert loaded.delta == md.delta
        assert loaded.central_charge == md.central_charge
        assert np.array_equal(loaded.smatrix, md.smatrix)
        p2 = save_modular_data(loaded, tmp_path / "two")
        assert p1.read_bytes() == p2.read_bytes()

    def test_cache_hit_skips_weyl_traversal(self, tmp_path):
        modular_data("B2", 2, cache_dir=tmp_path, attach_sj=False)
        before = affine.WEYL_TRAVERSALS
        md = modular_data("B2", 2, cache_dir=tmp_path, attach_sj=False)
        assert affine.WEYL_TRAVERSALS == before
        assert md.dim == len(integrable_weights(build_algebra("B2"), 2))

    def test_corrupt_cache_recomputes_with_warning(self, tmp_path):
        modular_data("A1", 3, cache_dir=tmp_path, attach_sj=False)
        cache_path("A1", 3, tmp_path).write_text("{not json")
        with pytest.warns(UserWarning, match="unreadable cache"):
            md = modular_data("A1", 3, cache_dir=tmp_path, attach_sj=False)
        assert md.dim == 4

    def test_schema_mismatch_invalidates(self, tmp_path):
        import json

        modular_data("A1", 1, cache_dir=tmp_path, attach_sj=False)
        p = cache_path("A1", 1, tmp_path)
        payload = json.loads(p.read_text())
        payload["schema"] = 0
        p.write_text(json.dumps(payload))
        assert load_modular_data("A1", 1, tmp_path) is None
        md = modular_data("A1", 1, cache_dir=tmp_path, attach_sj=False)
        assert md.dim == 2

    def test_missing_cache_dir_returns_none(self, tmp_path):
        assert load_modular_data("A1", 1, tmp_path / "absent") is None
