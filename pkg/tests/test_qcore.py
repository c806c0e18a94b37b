"""Tests for the value types and linear-algebra primitives."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qslsim import (
    DensityMatrix,
    EnergyStats,
    Hamiltonian,
    InvariantViolation,
    PureState,
    SchemaError,
    SeparableEnsemble,
    SubsystemLayout,
    dump_system,
    embed_local,
    energy_stats,
    ground_shift,
    load_system,
    make_mixture_demo,
    noninteracting_hamiltonian,
    spectral_decompose,
    state_overlap,
    system_from_json,
    system_to_json,
    tensor_product,
)
from conftest import random_density, random_hermitian, random_pure

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def qubit_diag_hamiltonian() -> Hamiltonian:
    return Hamiltonian(SubsystemLayout((2,)), np.diag([0.0, 1.0]).astype(complex))


def plus_state() -> PureState:
    return PureState(SubsystemLayout((2,)), np.array([INV_SQRT2, INV_SQRT2]))


# ---------------------------------------------------------------------------
# layouts and type invariants
# ---------------------------------------------------------------------------


class TestLayout:
    def test_basic(self):
        lay = SubsystemLayout((2, 3, 2))
        assert lay.total_dim == 12
        assert lay.num_subsystems == 3

    def test_cap_enforced(self):
        with pytest.raises(InvariantViolation, match="cap"):
            SubsystemLayout((2,) * 13)  # 8192 > 4096

    def test_cap_configurable(self):
        lay = SubsystemLayout((2,) * 13, cap=10000)
        assert lay.total_dim == 8192

    def test_rejects_empty_and_nonpositive(self):
        with pytest.raises(InvariantViolation):
            SubsystemLayout(())
        with pytest.raises(InvariantViolation):
            SubsystemLayout((2, 0))

    def test_dim_one_accepted(self):
        assert SubsystemLayout((1, 2)).total_dim == 2


class TestTypeInvariants:
    def test_pure_state_norm_checked(self):
        lay = SubsystemLayout((2,))
        with pytest.raises(InvariantViolation, match="norm"):
            PureState(lay, np.array([1.0, 1.0]))

    def test_pure_state_immutable(self):
        state = plus_state()
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0

    def test_density_matrix_hermitian_checked(self):
        lay = SubsystemLayout((2,))
        with pytest.raises(InvariantViolation, match="Hermitian"):
            DensityMatrix(lay, np.array([[0.5, 0.5], [0.0, 0.5]]))

    def test_density_matrix_trace_checked(self):
        lay = SubsystemLayout((2,))
        with pytest.raises(InvariantViolation, match="trace"):
            DensityMatrix(lay, np.diag([0.6, 0.6]).astype(complex))

    def test_density_matrix_psd_checked(self):
        lay = SubsystemLayout((2,))
        with pytest.raises(InvariantViolation, match="eigenvalue"):
            DensityMatrix(lay, np.diag([1.5, -0.5]).astype(complex))

    def test_hamiltonian_hermitian_checked(self):
        lay = SubsystemLayout((2,))
        with pytest.raises(InvariantViolation, match="Hermitian"):
            Hamiltonian(lay, np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_hamiltonian_ground_energy_cached(self):
        h = Hamiltonian(SubsystemLayout((2,)), np.diag([-1.0, 1.0]).astype(complex))
        assert h.ground_energy == pytest.approx(-1.0)
        assert not h.is_ground_shifted

    def test_energy_stats_nonnegative(self):
        with pytest.raises(InvariantViolation):
            EnergyStats(-0.1, 0.5)
        with pytest.raises(InvariantViolation):
            EnergyStats(0.1, -0.5)

    def test_ensemble_weights_checked(self):
        _, _ = make_mixture_demo(1.0)  # valid construction exercises the type
        lay = SubsystemLayout((2,))
        rho = DensityMatrix(lay, np.diag([1.0, 0.0]).astype(complex))
        with pytest.raises(InvariantViolation, match="sum"):
            SeparableEnsemble((0.5, 0.4), ((rho,), (rho,)))
        with pytest.raises(InvariantViolation, match="positive"):
            SeparableEnsemble((1.5, -0.5), ((rho,), (rho,)))

    def test_ensemble_factor_dims_checked(self):
        lay2 = SubsystemLayout((2,))
        lay3 = SubsystemLayout((3,))
        rho2 = DensityMatrix(lay2, np.diag([1.0, 0.0]).astype(complex))
        rho3 = DensityMatrix(lay3, np.diag([1.0, 0.0, 0.0]).astype(complex))
        with pytest.raises(InvariantViolation, match="dims"):
            SeparableEnsemble((0.5, 0.5), ((rho2, rho2), (rho2, rho3)))

    def test_ensemble_assemble_matches_manual(self, rng):
        ens, _ = make_mixture_demo(1.0)
        manual = np.zeros((9, 9), dtype=complex)
        for p, (a, b) in zip(ens.weights, ens.terms):
            manual += p * np.kron(a.matrix, b.matrix)
        assert_allclose(ens.assemble().matrix, manual, atol=1e-14)


# ---------------------------------------------------------------------------
# tensor_product
# ---------------------------------------------------------------------------


class TestTensorProduct:
    def test_basis_states(self):
        state = tensor_product([(1, 0), (1, 0)])
        assert_allclose(state.amplitudes, [1, 0, 0, 0], atol=1e-15)

    def test_linearity_in_one_factor(self):
        state = tensor_product([(INV_SQRT2, INV_SQRT2), (1, 0)])
        assert_allclose(state.amplitudes, [INV_SQRT2, 0, INV_SQRT2, 0], atol=1e-15)

    def test_three_qubit_uniform(self):
        # oracle: expand the triple Kronecker product by explicit loops
        factor = np.array([INV_SQRT2, INV_SQRT2])
        expected = np.empty(8, dtype=complex)
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    expected[4 * i + 2 * j + k] = factor[i] * factor[j] * factor[k]
        state = tensor_product([factor] * 3)
        assert_allclose(state.amplitudes, expected, atol=1e-15)
        assert_allclose(np.abs(state.amplitudes), 1 / (2 * math.sqrt(2)), atol=1e-15)

    def test_empty_rejected(self):
        with pytest.raises(InvariantViolation):
            tensor_product([])

    def test_unnormalized_factor_rejected(self):
        with pytest.raises(InvariantViolation, match="factor 1"):
            tensor_product([(1, 0), (1, 1)])

    def test_layout_mismatch_rejected(self):
        with pytest.raises(InvariantViolation, match="layout"):
            tensor_product([(1, 0)], layout=SubsystemLayout((3,)))

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dims=st.lists(st.integers(2, 4), min_size=1, max_size=4))
    def test_norm_preserved(self, seed, dims):
        gen = np.random.default_rng(seed)
        factors = []
        for d in dims:
            vec = gen.standard_normal(d) + 1j * gen.standard_normal(d)
            factors.append(vec / np.linalg.norm(vec))
        state = tensor_product(factors)
        assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# embed_local
# ---------------------------------------------------------------------------


class TestEmbedLocal:
    def test_identity_embeds_to_identity(self):
        lay = SubsystemLayout((2, 3))
        out = embed_local(np.eye(3), 1, lay)
        assert_allclose(out, np.eye(6), atol=1e-15)

    def test_sigma_x_on_first_qubit(self):
        lay = SubsystemLayout((2, 2))
        sx = np.array([[0, 1], [1, 0]], dtype=complex)
        out = embed_local(sx, 0, lay)
        expected = np.zeros((4, 4))
        for j in range(2):  # exchanges |0 j> and |1 j>
            expected[j, 2 + j] = expected[2 + j, j] = 1.0
        assert_allclose(out, expected, atol=1e-15)

    def test_number_operator_sum(self):
        lay = SubsystemLayout((2, 2))
        n_op = np.diag([0.0, 1.0])
        total = embed_local(n_op, 0, lay) + embed_local(n_op, 1, lay)
        assert_allclose(total, np.diag([0.0, 1.0, 1.0, 2.0]), atol=1e-15)

    def test_site_out_of_range(self):
        with pytest.raises(InvariantViolation, match="site"):
            embed_local(np.eye(2), 2, SubsystemLayout((2, 2)))

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvariantViolation, match="Hermitian"):
            embed_local(np.array([[0, 1], [0, 0]]), 0, SubsystemLayout((2, 2)))

    def test_different_sites_commute(self, rng):
        lay = SubsystemLayout((2, 3, 2))
        for _ in range(10):
            a = embed_local(random_hermitian(rng, 2), 0, lay)
            b = embed_local(random_hermitian(rng, 3), 1, lay)
            comm = a @ b - b @ a
            assert np.abs(comm).max() < 1e-10

    def test_linear_in_operator(self, rng):
        lay = SubsystemLayout((2, 2))
        a = random_hermitian(rng, 2)
        b = random_hermitian(rng, 2)
        lhs = embed_local(a + 2.0 * b, 1, lay)
        rhs = embed_local(a, 1, lay) + 2.0 * embed_local(b, 1, lay)
        assert_allclose(lhs, rhs, atol=1e-12)


# ---------------------------------------------------------------------------
# ground_shift and energy_stats
# ---------------------------------------------------------------------------


class TestGroundShift:
    def test_already_shifted_unchanged(self):
        h = qubit_diag_hamiltonian()
        shifted = ground_shift(h)
        assert_allclose(shifted.matrix, h.matrix, atol=1e-15)
        assert shifted.is_ground_shifted

    def test_subtracts_minimum(self):
        h = Hamiltonian(SubsystemLayout((2,)), np.diag([-1.0, 1.0]).astype(complex))
        shifted = ground_shift(h)
        assert_allclose(shifted.matrix, np.diag([0.0, 2.0]), atol=1e-12)
        assert shifted.ground_energy == pytest.approx(0.0, abs=1e-12)

    def test_random_hermitian_shifts_to_zero(self, rng):
        for dim in (2, 5, 9):
            h = Hamiltonian(SubsystemLayout((dim,)), random_hermitian(rng, dim))
            shifted = ground_shift(h)
            evals = np.linalg.eigvalsh(shifted.matrix)
            assert abs(evals[0]) < 1e-10


class TestEnergyStats:
    def test_eigenstate_has_zero_spread(self):
        h = qubit_diag_hamiltonian()
        excited = PureState(SubsystemLayout((2,)), np.array([0.0, 1.0], dtype=complex))
        stats = energy_stats(excited, h)
        assert stats.energy == pytest.approx(1.0, abs=1e-12)
        assert stats.spread == pytest.approx(0.0, abs=1e-12)

    def test_plus_state_by_hand(self):
        # <H> = 1/2, <H^2> = 1/2, spread = sqrt(1/2 - 1/4) = 1/2
        stats = energy_stats(plus_state(), qubit_diag_hamiltonian())
        assert stats.energy == pytest.approx(0.5, abs=1e-12)
        assert stats.spread == pytest.approx(0.5, abs=1e-12)

    def test_two_level_chain_matches_ladder_formulas(self):
        # single subsystem, two levels: mean w0(N-1)/2 and spread
        # w0*sqrt(N^2-1)/(2*sqrt(3)) both evaluate to 1/2
        stats = energy_stats(plus_state(), qubit_diag_hamiltonian())
        n = 2
        assert stats.energy == pytest.approx((n - 1) / 2, abs=1e-12)
        assert stats.spread == pytest.approx(math.sqrt(n * n - 1) / (2 * math.sqrt(3)), abs=1e-12)

    def test_unshifted_hamiltonian_rejected(self):
        h = Hamiltonian(SubsystemLayout((2,)), np.diag([0.5, 1.0]).astype(complex))
        with pytest.raises(InvariantViolation, match="ground"):
            energy_stats(plus_state(), h)

    def test_layout_mismatch_rejected(self):
        h = Hamiltonian(SubsystemLayout((3,)), np.diag([0.0, 1.0, 2.0]).astype(complex))
        with pytest.raises(InvariantViolation, match="mismatch"):
            energy_stats(plus_state(), h)

    def test_mixed_state_stats_match_eigen_average(self, rng):
        for _ in range(5):
            rho = random_density(rng, 4)
            h = Hamiltonian(SubsystemLayout((4,)), random_hermitian(rng, 4))
            h = ground_shift(h)
            stats = energy_stats(rho, h)
            mean = np.trace(rho.matrix @ h.matrix).real
            second = np.trace(rho.matrix @ h.matrix @ h.matrix).real
            assert stats.energy == pytest.approx(mean, abs=1e-10)
            assert stats.spread == pytest.approx(math.sqrt(second - mean**2), abs=1e-10)
            assert stats.energy >= 0.0 and stats.spread >= 0.0


# ---------------------------------------------------------------------------
# state_overlap
# ---------------------------------------------------------------------------


class TestStateOverlap:
    def test_identical_pure(self):
        assert state_overlap(plus_state(), plus_state()) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_basis_states(self):
        lay = SubsystemLayout((2,))
        a = PureState(lay, np.array([1.0, 0.0], dtype=complex))
        b = PureState(lay, np.array([0.0, 1.0], dtype=complex))
        assert state_overlap(a, b) == pytest.approx(0.0, abs=1e-15)

    def test_maximally_mixed_vs_pure(self, rng):
        lay = SubsystemLayout((2,))
        mixed = DensityMatrix(lay, 0.5 * np.eye(2, dtype=complex))
        for _ in range(5):
            assert state_overlap(mixed, random_pure(rng, 2)) == pytest.approx(0.5, abs=1e-12)

    def test_symmetric_and_in_unit_interval(self, rng):
        for _ in range(10):
            a = random_density(rng, 3)
            b = random_density(rng, 3)
            v1 = state_overlap(a, b)
            v2 = state_overlap(b, a)
            assert v1 == pytest.approx(v2, abs=1e-12)
            assert 0.0 <= v1 <= 1.0

    def test_pure_mixed_agrees_with_projector(self, rng):
        for _ in range(5):
            psi = random_pure(rng, 3)
            rho = random_density(rng, 3)
            proj = DensityMatrix(psi.layout, np.outer(psi.amplitudes, psi.amplitudes.conj()))
            assert state_overlap(psi, rho) == pytest.approx(state_overlap(proj, rho), abs=1e-12)

    def test_unity_iff_same_pure_state(self, rng):
        for _ in range(10):
            a = random_pure(rng, 4)
            b = random_pure(rng, 4)
            assert state_overlap(a, a) == pytest.approx(1.0, abs=1e-10)
            assert state_overlap(a, b) < 1.0 - 1e-10  # random pairs never coincide

    def test_layout_mismatch(self, rng):
        with pytest.raises(InvariantViolation, match="mismatch"):
            state_overlap(random_pure(rng, 2), random_pure(rng, 3))


# ---------------------------------------------------------------------------
# spectral_decompose
# ---------------------------------------------------------------------------


class TestSpectralDecompose:
    def test_pure_projector(self, rng):
        psi = random_pure(rng, 3)
        rho = DensityMatrix(psi.layout, np.outer(psi.amplitudes, psi.amplitudes.conj()))
        pairs = spectral_decompose(rho)
        assert len(pairs) == 1
        lam, vec = pairs[0]
        assert lam == pytest.approx(1.0, abs=1e-10)
        assert abs(np.vdot(vec, psi.amplitudes)) == pytest.approx(1.0, abs=1e-10)

    def test_diagonal(self):
        rho = DensityMatrix(SubsystemLayout((2,)), np.diag([0.75, 0.25]).astype(complex))
        pairs = spectral_decompose(rho)
        assert [lam for lam, _ in pairs] == pytest.approx([0.75, 0.25])
        assert abs(pairs[0][1][0]) == pytest.approx(1.0)
        assert abs(pairs[1][1][1]) == pytest.approx(1.0)

    def test_mixture_demo_eigenvalues(self):
        # oracle: diagonalize the explicit 9x9 matrix built by hand
        ens, _ = make_mixture_demo(1.0)
        a = np.zeros(3, dtype=complex)
        a[1] = a[2] = INV_SQRT2
        g = np.zeros(3, dtype=complex)
        g[0] = 1.0
        manual = 0.5 * np.kron(np.outer(a, a.conj()), np.outer(g, g.conj()))
        manual += 0.5 * np.kron(np.outer(g, g.conj()), np.outer(a, a.conj()))
        assert_allclose(np.sort(np.linalg.eigvalsh(manual))[-2:], [0.5, 0.5], atol=1e-12)

        pairs = spectral_decompose(ens.assemble())
        assert len(pairs) == 2
        assert [lam for lam, _ in pairs] == pytest.approx([0.5, 0.5], abs=1e-10)

    def test_reconstruction_and_orthonormality(self, rng):
        for _ in range(5):
            rho = random_density(rng, 5)
            pairs = spectral_decompose(rho)
            assert sum(lam for lam, _ in pairs) == pytest.approx(1.0, abs=1e-10)
            rebuilt = sum(lam * np.outer(v, v.conj()) for lam, v in pairs)
            assert np.abs(rebuilt - rho.matrix).max() < 1e-9
            for i, (_, vi) in enumerate(pairs):
                for j, (_, vj) in enumerate(pairs):
                    expected = 1.0 if i == j else 0.0
                    assert abs(np.vdot(vi, vj)) == pytest.approx(expected, abs=1e-10)

    def test_rank_deficient_drops_null_space(self, rng):
        rho = random_density(rng, 6, rank=2)
        pairs = spectral_decompose(rho)
        assert len(pairs) == 2


# ---------------------------------------------------------------------------
# noninteracting_hamiltonian
# ---------------------------------------------------------------------------


class TestNoninteracting:
    def test_matches_manual_embedding(self):
        h2 = qubit_diag_hamiltonian()
        h3 = Hamiltonian(SubsystemLayout((3,)), np.diag([0.0, 1.0, 2.0]).astype(complex))
        total = noninteracting_hamiltonian([h2, h3])
        lay = SubsystemLayout((2, 3))
        manual = embed_local(h2.matrix, 0, lay) + embed_local(h3.matrix, 1, lay)
        assert_allclose(total.matrix, manual, atol=1e-15)
        assert total.is_ground_shifted


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


class TestJson:
    def test_pure_round_trip(self, rng, tmp_path):
        state = random_pure(rng, 3)
        h = Hamiltonian(state.layout, random_hermitian(rng, 3))
        path = tmp_path / "system.json"
        dump_system(state, h, path)
        loaded_state, loaded_h = load_system(path)
        assert isinstance(loaded_state, PureState)
        assert_allclose(loaded_state.amplitudes, state.amplitudes, atol=1e-15)
        assert_allclose(loaded_h.matrix, h.matrix, atol=1e-15)

    def test_mixed_round_trip(self, rng):
        rho = random_density(rng, 2)
        h = Hamiltonian(rho.layout, random_hermitian(rng, 2))
        state, loaded_h = system_from_json(system_to_json(rho, h))
        assert isinstance(state, DensityMatrix)
        assert_allclose(state.matrix, rho.matrix, atol=1e-15)
        assert_allclose(loaded_h.matrix, h.matrix, atol=1e-15)

    def test_schema_errors_name_the_field(self):
        with pytest.raises(SchemaError, match="dims"):
            system_from_json({"amplitudes": [], "hamiltonian": []})
        with pytest.raises(SchemaError, match="dims"):
            system_from_json({"dims": [2, -1], "amplitudes": [], "hamiltonian": []})
        with pytest.raises(SchemaError, match="amplitudes/matrix"):
            system_from_json({"dims": [2], "hamiltonian": []})
        with pytest.raises(SchemaError, match="amplitudes/matrix"):
            system_from_json({
                "dims": [2], "amplitudes": [[1, 0], [0, 0]],
                "matrix": [[1, 0]] * 4, "hamiltonian": [[0, 0]] * 4,
            })
        with pytest.raises(SchemaError, match="hamiltonian"):
            system_from_json({"dims": [2], "amplitudes": [[1, 0], [0, 0]]})
        with pytest.raises(SchemaError, match=r"amplitudes\[1\]"):
            system_from_json({
                "dims": [2], "amplitudes": [[1, 0], ["x", 0]],
                "hamiltonian": [[0, 0]] * 4,
            })
        with pytest.raises(SchemaError, match="expected 4 pairs"):
            system_from_json({
                "dims": [2], "amplitudes": [[1, 0], [0, 0]],
                "hamiltonian": [[0, 0]] * 3,
            })

    def test_invariant_violation_is_not_schema_error(self):
        obj = {
            "dims": [2],
            "amplitudes": [[1.0, 0.0], [1.0, 0.0]],  # norm sqrt(2)
            "hamiltonian": [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]],
        }
        with pytest.raises(InvariantViolation, match="norm"):
            system_from_json(obj)

    def test_not_json_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError, match="not valid JSON"):
            load_system(path)
