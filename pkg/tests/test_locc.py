"""LOCC protocol tree: execution, channel, synthesis, and verification."""

import numpy as np
import pytest

from helpers import brute_partial_trace
from relocc.controlled import controlled_random, detect_controlled
from relocc.gates import (
    HADAMARD,
    PAULI_Z,
    BipartiteUnitary,
    cnot,
    heisenberg,
    identity_gate,
    swap_phase,
)
from relocc.linalg import dag, kron, max_abs, random_state, random_unitary
from relocc.locc import (
    MAX_PROTOCOL_DEPTH,
    Branch,
    LoccProtocol,
    Measurement,
    ProtocolNode,
    accumulated_recursion_residual,
    apply_channel,
    branch_operators,
    check_bob_accumulated_unitary,
    execute_protocol,
    fixed_input_relocalization_demo,
    leaf,
    random_measurement,
    random_protocol,
    synthesize_relocalization_protocol,
    validate_measurement,
    verify_one_piece_relocalization,
)

KET_PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
P0 = np.diag([1.0, 0.0]).astype(complex)
P1 = np.diag([0.0, 1.0]).astype(complex)


def projective_a_protocol() -> LoccProtocol:
    root = ProtocolNode(Measurement("A", [P0, P1]), {0: leaf(), 1: leaf()})
    return LoccProtocol(2, 2, root)


class TestValidateMeasurement:
    def test_projective_complete(self):
        ok, deviation = validate_measurement(Measurement("A", [P0, P1]))
        assert ok and deviation <= 1e-12

    def test_non_projective_complete(self):
        half = np.eye(2, dtype=complex) / np.sqrt(2)
        ok, deviation = validate_measurement(Measurement("B", [half, half]))
        assert ok and deviation <= 1e-12

    def test_incomplete(self):
        ok, deviation = validate_measurement(Measurement("A", [P0]))
        assert not ok
        assert abs(deviation - 1.0) < 1e-12


class TestProtocolValidation:
    def test_depth_cap(self):
        node = leaf()
        for _ in range(MAX_PROTOCOL_DEPTH + 1):
            node = ProtocolNode(Measurement("A", [P0, P1]), {0: node, 1: leaf()})
        with pytest.raises(ValueError):
            LoccProtocol(2, 2, node).validate()

    def test_missing_child(self):
        root = ProtocolNode(Measurement("A", [P0, P1]), {0: leaf()})
        with pytest.raises(ValueError):
            LoccProtocol(2, 2, root).validate()

    def test_dimension_mismatch(self):
        root = ProtocolNode(Measurement("B", [P0, P1]), {0: leaf(), 1: leaf()})
        with pytest.raises(ValueError):
            LoccProtocol(2, 3, root).validate()

    def test_non_unitary_correction(self):
        root = ProtocolNode(
            Measurement("A", [P0, P1]),
            {0: leaf(b_correction=0.5 * np.eye(2, dtype=complex)), 1: leaf()},
        )
        with pytest.raises(ValueError):
            LoccProtocol(2, 2, root).validate()

    def test_leaf_with_children(self):
        bad = ProtocolNode(None, {0: leaf()})
        with pytest.raises(ValueError):
            LoccProtocol(2, 2, bad).validate()

    def test_unknown_party(self):
        root = ProtocolNode(Measurement("C", [P0, P1]), {0: leaf(), 1: leaf()})
        with pytest.raises(ValueError):
            LoccProtocol(2, 2, root).validate()


class TestExecuteProtocol:
    def test_empty_protocol_single_branch(self):
        protocol = LoccProtocol(2, 2, leaf())
        psi = kron(KET_PLUS, KET_PLUS)
        branches = execute_protocol(protocol, psi)
        assert len(branches) == 1
        br = branches[0]
        assert br.outcomes == ()
        assert abs(br.probability - 1.0) < 1e-12
        assert max_abs(br.post_state - psi) < 1e-12
        assert max_abs(br.accumulated_a - np.eye(2)) < 1e-12
        assert max_abs(br.accumulated_b - np.eye(2)) < 1e-12

    def test_projective_split(self):
        psi = kron(KET_PLUS, np.array([1.0, 0.0], dtype=complex))
        branches = execute_protocol(projective_a_protocol(), psi)
        assert [br.outcomes for br in branches] == [(0,), (1,)]
        for br in branches:
            assert abs(br.probability - 0.5) < 1e-12
            assert abs(np.linalg.norm(br.post_state) - 1.0) < 1e-12

    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            execute_protocol(projective_a_protocol(), np.ones(4, dtype=complex))

    def test_probability_matches_accumulated_operators(self):
        protocol = random_protocol(2, 3, depth=3, n_outcomes=2, seed=8)
        rng = np.random.default_rng(9)
        psi = kron(random_state(2, rng), random_state(3, rng))
        for br in execute_protocol(protocol, psi):
            full = kron(br.accumulated_a, br.accumulated_b) @ psi
            assert abs(br.probability - np.vdot(full, full).real) <= 1e-12

    def test_post_state_matches_accumulated_operators(self):
        protocol = random_protocol(2, 2, depth=2, n_outcomes=2, seed=10)
        rng = np.random.default_rng(11)
        psi = kron(random_state(2, rng), random_state(2, rng))
        for br in execute_protocol(protocol, psi):
            full = kron(br.accumulated_a, br.accumulated_b) @ psi
            # Post-states are renormalized; unnormalized branch vector agrees
            # up to that scale.
            assert max_abs(full / np.sqrt(br.probability) - br.post_state) <= 1e-9

    def test_turn_order_in_accumulated_product(self):
        # A measures twice: the second operator multiplies on the left.
        m0 = random_measurement(2, 2, np.random.default_rng(12))
        m1 = random_measurement(2, 2, np.random.default_rng(13))
        inner = ProtocolNode(Measurement("A", m1), {0: leaf(), 1: leaf()})
        root = ProtocolNode(
            Measurement("A", m0),
            {0: inner, 1: leaf()},
        )
        protocol = LoccProtocol(2, 2, root)
        for outcomes, acc_a, _ in branch_operators(protocol):
            if len(outcomes) == 2:
                expected = m1[outcomes[1]] @ m0[outcomes[0]]
                assert max_abs(acc_a - expected) <= 1e-12

    def test_pruned_branch_dropped(self):
        eps = 1e-7  # branch probability eps^2 = 1e-14 < cutoff
        ops = [eps * np.eye(2, dtype=complex), np.sqrt(1 - eps**2) * np.eye(2, dtype=complex)]
        root = ProtocolNode(Measurement("A", ops), {0: leaf(), 1: leaf()})
        protocol = LoccProtocol(2, 2, root)
        branches = execute_protocol(protocol, kron(KET_PLUS, KET_PLUS))
        assert [br.outcomes for br in branches] == [(1,)]

    def test_pruned_mass_bound_enforced(self):
        n_tiny = 121
        tiny = 9e-13  # per-branch probability, below the pruning cutoff
        ops = [np.sqrt(tiny) * np.eye(2, dtype=complex) for _ in range(n_tiny)]
        ops.append(np.sqrt(1.0 - n_tiny * tiny) * np.eye(2, dtype=complex))
        children = {k: leaf() for k in range(n_tiny + 1)}
        protocol = LoccProtocol(2, 2, ProtocolNode(Measurement("A", ops), children))
        with pytest.raises(RuntimeError):
            execute_protocol(protocol, kron(KET_PLUS, KET_PLUS))


class TestApplyChannel:
    def test_empty_protocol_identity_channel(self):
        protocol = LoccProtocol(2, 2, leaf())
        rho = np.outer(kron(KET_PLUS, KET_PLUS), kron(KET_PLUS, KET_PLUS).conj())
        assert max_abs(apply_channel(protocol, rho) - rho) <= 1e-12

    def test_pinching_channel(self):
        rho_b = np.array([[0.7, 0.2j], [-0.2j, 0.3]], dtype=complex)
        rho = kron(np.outer(KET_PLUS, KET_PLUS.conj()), rho_b)
        out = apply_channel(projective_a_protocol(), rho)
        expected = kron(0.5 * np.eye(2), rho_b)
        assert max_abs(out - expected) <= 1e-12

    def test_trace_preserving_and_psd(self):
        protocol = random_protocol(2, 2, depth=2, n_outcomes=2, seed=21)
        rng = np.random.default_rng(22)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ dag(g)
        rho /= np.trace(rho).real
        out = apply_channel(protocol, rho)
        assert abs(np.trace(out).real - 1.0) <= 1e-10
        assert max_abs(out - dag(out)) <= 1e-12
        assert np.linalg.eigvalsh(out).min() >= -1e-10

    def test_consistent_with_branch_mixture(self):
        protocol = random_protocol(2, 2, depth=2, n_outcomes=2, seed=23)
        rng = np.random.default_rng(24)
        psi = kron(random_state(2, rng), random_state(2, rng))
        rho_out = apply_channel(protocol, np.outer(psi, psi.conj()))
        mixture = np.zeros_like(rho_out)
        for br in execute_protocol(protocol, psi):
            mixture += br.probability * np.outer(br.post_state, br.post_state.conj())
        assert max_abs(rho_out - mixture) <= 1e-10


class TestAccumulatedRecursion:
    def test_small_residual_on_valid_protocols(self):
        for seed in range(5):
            protocol = random_protocol(2, 2, depth=3, n_outcomes=2, seed=seed)
            assert accumulated_recursion_residual(protocol) <= 1e-10

    def test_small_residual_on_synthesized(self):
        form = detect_controlled(cnot(), side="A")
        protocol = synthesize_relocalization_protocol(form)
        assert accumulated_recursion_residual(protocol) <= 1e-12


class TestSynthesize:
    def test_cnot_shape(self):
        form = detect_controlled(cnot(), side="A")
        protocol = synthesize_relocalization_protocol(form)
        assert (protocol.d_a, protocol.d_b) == (2, 2)
        root = protocol.root
        assert root.measurement.party == "A"
        assert root.measurement.n_outcomes == 2
        for child in root.children.values():
            assert child.is_leaf
            assert child.b_correction is not None
            assert child.a_correction is None

    def test_control_from_b_swaps_roles(self):
        form = detect_controlled(cnot(), side="B")
        protocol = synthesize_relocalization_protocol(form)
        assert protocol.root.measurement.party == "B"
        for child in protocol.root.children.values():
            assert child.a_correction is not None
            assert child.b_correction is None

    def test_trivial_single_block(self):
        rng = np.random.default_rng(31)
        gate = BipartiteUnitary(2, 2, kron(random_unitary(2, rng), random_unitary(2, rng)))
        form = detect_controlled(gate, side="A")
        protocol = synthesize_relocalization_protocol(form)
        assert protocol.root.measurement.n_outcomes == 1
        protocol.validate()


class TestVerify:
    def test_cnot_relocalizes_b(self):
        form = detect_controlled(cnot(), side="A")
        protocol = synthesize_relocalization_protocol(form)
        report = verify_one_piece_relocalization(cnot(), protocol, side="B", n_samples=50)
        assert report.verdict
        assert report.min_fidelity >= 1.0 - 1e-10
        assert report.channel_residual <= 1e-8

    def test_heisenberg_empty_protocol_fails(self):
        protocol = LoccProtocol(2, 2, leaf())
        report = verify_one_piece_relocalization(
            heisenberg(0.3), protocol, side="B", n_samples=20
        )
        assert not report.verdict
        assert report.min_fidelity < 0.999

    def test_product_gate_inverse_correction(self):
        rng = np.random.default_rng(33)
        u_a = random_unitary(2, rng)
        u_b = random_unitary(3, rng)
        gate = BipartiteUnitary(2, 3, kron(u_a, u_b))
        protocol = LoccProtocol(2, 3, leaf(b_correction=dag(u_b)))
        report = verify_one_piece_relocalization(gate, protocol, side="B", n_samples=20)
        assert report.verdict

    def test_invalid_side(self):
        with pytest.raises(ValueError):
            verify_one_piece_relocalization(cnot(), LoccProtocol(2, 2, leaf()), side="X")

    def test_report_bookkeeping(self):
        form = detect_controlled(cnot(), side="A")
        protocol = synthesize_relocalization_protocol(form)
        report = verify_one_piece_relocalization(
            cnot(), protocol, side="B", n_samples=7, seed=3, tol=1e-9
        )
        assert report.side == "B"
        assert report.n_samples == 7
        assert report.seed == 3
        assert report.tol == 1e-9
        assert set(report.branch_fidelities) == {(0,), (1,)}


class TestCheckBobAccumulated:
    def test_synthesized_protocol_passes(self):
        form = detect_controlled(cnot(), side="A")
        protocol = synthesize_relocalization_protocol(form)
        checks = check_bob_accumulated_unitary(protocol)
        assert all(c.passed for c in checks)

    def test_b_projective_measurement_fails(self):
        root = ProtocolNode(Measurement("B", [P0, P1]), {0: leaf(), 1: leaf()})
        checks = check_bob_accumulated_unitary(LoccProtocol(2, 2, root))
        assert not any(c.passed for c in checks)
        for c in checks:
            assert abs(c.deviation - 0.5) < 1e-12

    def test_necessary_condition_on_relocalizing_protocols(self):
        # Every protocol that verifiably restores B's piece must pass the
        # input-independent branch-unitarity check.
        gates = [cnot()]
        for seed in range(3):
            gate, _ = controlled_random(2, 3, 2, seed=seed)
            gates.append(gate)
        for gate in gates:
            form = detect_controlled(gate, side="A")
            protocol = synthesize_relocalization_protocol(form)
            report = verify_one_piece_relocalization(gate, protocol, side="B", n_samples=10)
            assert report.verdict
            checks = check_bob_accumulated_unitary(protocol)
            assert all(c.passed for c in checks if c.k_norm > 1e-9)


class TestFixedInputDemo:
    def test_verdict_and_branches(self):
        report = fixed_input_relocalization_demo(n_samples=50, seed=0)
        assert report.verdict
        assert report.min_fidelity >= 1.0 - 1e-10
        assert set(report.branch_fidelities) == {(0,), (1,)}

    def test_hand_computed_branch(self):
        # U (|+> (x) psi_B) = beta0 |0>|+> + beta1 |1>|->; applying H (or
        # sigma_z H) to B restores psi_B exactly in each branch.
        psi_b = np.array([0.6, 0.8j], dtype=complex)
        u = swap_phase()
        out = u.matrix @ kron(KET_PLUS, psi_b)
        minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
        expected = psi_b[0] * kron(np.array([1.0, 0.0]), KET_PLUS) + psi_b[1] * kron(
            np.array([0.0, 1.0]), minus
        )
        assert max_abs(out - expected) < 1e-12
        corr = HADAMARD
        branch0 = kron(np.outer(KET_PLUS, KET_PLUS.conj()), np.eye(2)) @ out
        branch0 = kron(np.eye(2), corr) @ branch0
        reduced = brute_partial_trace(np.outer(branch0, branch0.conj()), 2, 2, "A")
        reduced /= np.trace(reduced).real
        fid = np.real(np.vdot(psi_b, reduced @ psi_b))
        assert abs(fid - 1.0) < 1e-12


class TestRandomHelpers:
    @pytest.mark.parametrize("d,n_outcomes", [(2, 2), (2, 3), (3, 2), (3, 4)])
    def test_random_measurement_complete(self, d, n_outcomes):
        ops = random_measurement(d, n_outcomes, np.random.default_rng(41))
        total = sum(dag(op) @ op for op in ops)
        assert max_abs(total - np.eye(d)) <= 1e-12

    def test_random_protocol_valid_and_deterministic(self):
        p1 = random_protocol(2, 3, depth=2, n_outcomes=2, seed=17)
        p2 = random_protocol(2, 3, depth=2, n_outcomes=2, seed=17)
        p1.validate()
        ops1 = branch_operators(p1)
        ops2 = branch_operators(p2)
        for (o1, a1, b1), (o2, a2, b2) in zip(ops1, ops2):
            assert o1 == o2
            assert np.array_equal(a1, a2)
            assert np.array_equal(b1, b2)

    def test_random_protocol_depth_bounds(self):
        with pytest.raises(ValueError):
            random_protocol(2, 2, depth=MAX_PROTOCOL_DEPTH + 1)

    def test_probabilities_sum_to_one(self):
        protocol = random_protocol(3, 2, depth=2, n_outcomes=3, seed=19)
        rng = np.random.default_rng(20)
        psi = kron(random_state(3, rng), random_state(2, rng))
        total = sum(br.probability for br in execute_protocol(protocol, psi))
        assert abs(total - 1.0) <= 1e-9
