"""Operator Schmidt decomposition: coefficients, orthonormality, rank."""

import numpy as np
import pytest

from relocc.gates import cnot, heisenberg, identity_gate, swap_phase
from relocc.linalg import dag, kron, max_abs, random_unitary
from relocc.schmidt import operator_schmidt_decomposition, operator_schmidt_rank


class TestProductGates:
    def test_single_term(self):
        dec = operator_schmidt_decomposition(identity_gate(2, 3))
        assert dec.rank() == 1
        assert abs(dec.lambdas[0] - np.sqrt(6)) < 1e-10

    def test_product_of_haar_factors(self):
        rng = np.random.default_rng(3)
        a = random_unitary(2, rng)
        b = random_unitary(3, rng)
        from relocc.gates import BipartiteUnitary

        dec = operator_schmidt_decomposition(BipartiteUnitary(2, 3, kron(a, b)))
        assert dec.rank() == 1
        # Normalized Schmidt operators reproduce the factors up to a phase.
        term = dec.lambdas[0] * kron(dec.a_ops[0], dec.b_ops[0])
        assert max_abs(term - kron(a, b)) < 1e-9


class TestCnot:
    def test_two_equal_coefficients(self):
        dec = operator_schmidt_decomposition(cnot())
        assert dec.rank() == 2
        assert np.allclose(dec.lambdas[:2], [np.sqrt(2), np.sqrt(2)], atol=1e-10)

    def test_a_ops_span_projectors(self):
        # The two A-side Schmidt operators span the same space as the
        # control projectors diag(1,0) and diag(0,1).
        dec = operator_schmidt_decomposition(cnot())
        basis = np.stack([op.reshape(-1) for op in dec.a_ops[:2]])
        p0 = np.diag([1.0, 0.0]).astype(complex).reshape(-1)
        p1 = np.diag([0.0, 1.0]).astype(complex).reshape(-1)
        gram = basis @ basis.conj().T
        assert max_abs(gram - np.eye(2)) < 1e-9
        for target in (p0, p1):
            coeffs = basis.conj() @ target
            residual = target - basis.T @ coeffs
            assert np.linalg.norm(residual) < 1e-9


class TestOrthonormalityAndWeight:
    @pytest.mark.parametrize(
        "gate",
        [cnot(), swap_phase(), heisenberg(0.3), identity_gate(3, 2)],
        ids=["cnot", "swap_phase", "heisenberg", "identity_3x2"],
    )
    def test_hilbert_schmidt_orthonormal(self, gate):
        dec = operator_schmidt_decomposition(gate)
        for ops, d in ((dec.a_ops, gate.d_a), (dec.b_ops, gate.d_b)):
            n = len(ops)
            gram = np.empty((n, n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    gram[i, j] = np.trace(dag(ops[i]) @ ops[j])
            assert max_abs(gram - np.eye(n)) <= 1e-9

    @pytest.mark.parametrize(
        "gate",
        [cnot(), swap_phase(), heisenberg(0.1), identity_gate(2, 4)],
        ids=["cnot", "swap_phase", "heisenberg", "identity_2x4"],
    )
    def test_total_weight(self, gate):
        dec = operator_schmidt_decomposition(gate)
        assert abs(np.sum(dec.lambdas**2) - gate.d_a * gate.d_b) <= 1e-8

    def test_reconstruction(self):
        for seed in range(5):
            from relocc.gates import random_bipartite_unitary

            gate = random_bipartite_unitary(2, 3, seed=seed)
            dec = operator_schmidt_decomposition(gate)
            assert max_abs(dec.reconstruct() - gate.matrix) < 1e-9

    def test_descending_coefficients(self):
        dec = operator_schmidt_decomposition(heisenberg(0.7))
        assert np.all(np.diff(dec.lambdas) <= 1e-12)


class TestRank:
    def test_swap_phase_full_rank(self):
        assert operator_schmidt_rank(swap_phase()) == 4

    def test_heisenberg_full_rank(self):
        assert operator_schmidt_rank(heisenberg(0.3)) == 4

    def test_cnot_rank_two(self):
        assert operator_schmidt_rank(cnot()) == 2

    def test_identity_rank_one(self):
        assert operator_schmidt_rank(identity_gate(2, 2)) == 1

    def test_rank_tolerance(self):
        # A loose relative cutoff merges the small coefficients away.
        gate = heisenberg(0.01)
        assert operator_schmidt_rank(gate) == 4
        assert operator_schmidt_rank(gate, tol_rank=0.5) < 4
