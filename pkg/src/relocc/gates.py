"""Bipartite unitaries and the built-in gate gallery.

Gallery gates are generated from their defining formulas on every call,
never stored, so runs are reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import UNITARY_ATOL, dag, expi_hermitian, kron, max_abs, random_unitary

__all__ = [
    "BipartiteUnitary",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "HADAMARD",
    "cnot",
    "swap",
    "swap_phase",
    "heisenberg",
    "identity_gate",
    "build_gate",
    "GALLERY_NAMES",
]

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class BipartiteUnitary:
    """A unitary on the joint space of a d_a-dim and a d_b-dim qudit.

    The composite basis index is ``(a, b) -> a * d_b + b``.  Construction
    checks unitarity to max-abs tolerance 1e-10.
    """

    d_a: int
    d_b: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", mat)
        d = self.d_a * self.d_b
        if self.d_a < 1 or self.d_b < 1:
            raise ValueError("local dimensions must be positive")
        if mat.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix, got {mat.shape}")
        if not np.all(np.isfinite(mat.view(float))):
            raise ValueError("matrix entries must be finite")
        deviation = max_abs(dag(mat) @ mat - np.eye(d))
        if deviation > UNITARY_ATOL:
            raise ValueError(
                f"matrix is not unitary (max-abs deviation {deviation:.3e})"
            )

    @property
    def dim(self) -> int:
        return self.d_a * self.d_b

    def apply(self, state: np.ndarray) -> np.ndarray:
        return self.matrix @ state

    def swapped(self) -> "BipartiteUnitary":
        """The same operation viewed with the two qudits exchanged."""
        perm = swap_permutation(self.d_a, self.d_b)
        return BipartiteUnitary(self.d_b, self.d_a, perm @ self.matrix @ perm.T)


def swap_permutation(d_a: int, d_b: int) -> np.ndarray:
    """Permutation matrix taking index a*d_b + b to b*d_a + a."""
    d = d_a * d_b
    perm = np.zeros((d, d))
    for a in range(d_a):
        for b in range(d_b):
            perm[b * d_a + a, a * d_b + b] = 1.0
    return perm


def cnot() -> BipartiteUnitary:
    """Controlled-NOT: identity on the target when the control is 0, X when it is 1."""
    proj0 = np.diag([1.0, 0.0]).astype(complex)
    proj1 = np.diag([0.0, 1.0]).astype(complex)
    return BipartiteUnitary(2, 2, kron(proj0, np.eye(2)) + kron(proj1, PAULI_X))


def swap(d: int = 2) -> BipartiteUnitary:
    """Exchange of two d-dimensional qudits."""
    mat = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            mat[i * d + j, j * d + i] = 1.0
    return BipartiteUnitary(d, d, mat)


def swap_phase() -> BipartiteUnitary:
    """Two-qubit swap with a sign flip on the |11> component."""
    mat = swap(2).matrix.copy()
    mat[3, 3] = -1.0
    return BipartiteUnitary(2, 2, mat)


def heisenberg(alpha: float) -> BipartiteUnitary:
    """exp(i * alpha * (XX + YY + ZZ)) on two qubits.

    The exponential is evaluated through the eigendecomposition of the
    Hermitian generator; alpha = 0 gives the identity.
    """
    generator = sum(kron(p, p) for p in (PAULI_X, PAULI_Y, PAULI_Z))
    return BipartiteUnitary(2, 2, expi_hermitian(generator, alpha))


def identity_gate(d_a: int = 2, d_b: int = 2) -> BipartiteUnitary:
    return BipartiteUnitary(d_a, d_b, np.eye(d_a * d_b, dtype=complex))


GALLERY_NAMES = (
    "cnot",
    "swap",
    "swap_phase",
    "heisenberg",
    "identity",
    "controlled_random",
)


def build_gate(name: str, **params) -> BipartiteUnitary:
    """Build a gallery gate by name.

    Parameters depend on the gate: ``heisenberg`` takes ``alpha``; ``swap``
    takes ``d``; ``identity`` takes ``d_a``/``d_b``; ``controlled_random``
    takes ``d_a``, ``d_b``, ``n_blocks``, ``seed`` (use
    :func:`relocc.controlled.controlled_random` directly when the
    generating controlled form is needed as well).
    """
    if name == "cnot":
        return cnot()
    if name == "swap":
        return swap(int(params.get("d", 2)))
    if name == "swap_phase":
        return swap_phase()
    if name == "heisenberg":
        if "alpha" not in params:
            raise ValueError("heisenberg requires an 'alpha' parameter")
        return heisenberg(float(params["alpha"]))
    if name == "identity":
        return identity_gate(int(params.get("d_a", 2)), int(params.get("d_b", 2)))
    if name == "controlled_random":
        from .controlled import controlled_random

        gate, _ = controlled_random(
            int(params["d_a"]),
            int(params["d_b"]),
            int(params["n_blocks"]),
            int(params.get("seed", 0)),
        )
        return gate
    raise ValueError(f"unknown gate name {name!r}; choose from {GALLERY_NAMES}")


def random_bipartite_unitary(d_a: int, d_b: int, seed=None) -> BipartiteUnitary:
    """Haar-random global unitary on the joint space."""
    return BipartiteUnitary(d_a, d_b, random_unitary(d_a * d_b, seed))


def local_sandwich(
    u: BipartiteUnitary,
    a_left: np.ndarray,
    b_left: np.ndarray,
    a_right: np.ndarray,
    b_right: np.ndarray,
) -> BipartiteUnitary:
    """(a_left x b_left) U (a_right x b_right) with the same local dimensions."""
    mat = kron(a_left, b_left) @ u.matrix @ kron(a_right, b_right)
    return BipartiteUnitary(u.d_a, u.d_b, mat)
