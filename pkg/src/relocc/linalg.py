"""Dense complex linear algebra primitives for two-qudit operators.

Everything here works on plain ``numpy`` arrays of ``complex128``.  The
composite index convention is fixed once and used everywhere: the joint
basis state (a, b) maps to the flat index ``a * d_b + b`` (A-major,
row-major), which makes ``np.kron`` and :func:`reshuffle` mutually
consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ToleranceConfig",
    "JointDiagonalizationError",
    "dag",
    "kron",
    "partial_trace",
    "reshuffle",
    "unreshuffle",
    "hermitian_eig",
    "svd",
    "joint_diagonalize",
    "expi_hermitian",
    "polar_unitary",
    "random_unitary",
    "random_state",
    "max_abs",
]

# Max-abs deviation from U^dag U = I accepted when declaring a matrix unitary.
UNITARY_ATOL = 1e-10

# Relative gap below which eigenvalues are clustered as degenerate.
DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerance ladder used by the analysis pipeline.

    The defaults keep roughly two orders of magnitude of headroom between
    successive stages so that noise from an earlier stage cannot flip a
    later verdict.
    """

    tol_unitary: float = 1e-10
    tol_commute: float = 1e-8
    tol_rank: float = 1e-7
    tol_reconstruct: float = 1e-8

    def __post_init__(self):
        for name in ("tol_unitary", "tol_commute", "tol_rank", "tol_reconstruct"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")


class JointDiagonalizationError(RuntimeError):
    """Raised when a family cannot be jointly diagonalized to tolerance."""


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


def max_abs(m: np.ndarray) -> float:
    """Entrywise max-abs norm; 0 for empty input."""
    return float(np.max(np.abs(m))) if m.size else 0.0


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product under the A-major index convention.

    ``kron(a, b)[(i, k), (j, l)] = a[i, j] * b[k, l]`` with the composite
    row index ``i * rows(b) + k``.  This is exactly ``np.kron``.
    """
    return np.kron(a, b)


def partial_trace(rho: np.ndarray, d_a: int, d_b: int, side: str) -> np.ndarray:
    """Trace out one subsystem of an operator on the (d_a * d_b) space.

    ``side`` names the subsystem that is *traced out*: ``"B"`` returns the
    reduced operator on A and vice versa.
    """
    rho = np.asarray(rho, dtype=complex)
    d = d_a * d_b
    if rho.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got {rho.shape}")
    four = rho.reshape(d_a, d_b, d_a, d_b)
    if side == "B":
        return np.einsum("abcb->ac", four)
    if side == "A":
        return np.einsum("abad->bd", four)
    raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def reshuffle(u: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Realign a bipartite operator so product terms become rank-1.

    Returns the d_a^2 x d_b^2 matrix R with
    ``R[a * d_a + a', b * d_b + b'] = U[(a, b), (a', b')]``.
    The SVD of R yields the operator Schmidt decomposition of U.
    """
    u = np.asarray(u, dtype=complex)
    d = d_a * d_b
    if u.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got {u.shape}")
    return (
        u.reshape(d_a, d_b, d_a, d_b)
        .transpose(0, 2, 1, 3)
        .reshape(d_a * d_a, d_b * d_b)
    )


def unreshuffle(r: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Inverse of :func:`reshuffle` (an exact index permutation)."""
    r = np.asarray(r, dtype=complex)
    if r.shape != (d_a * d_a, d_b * d_b):
        raise ValueError(f"expected a {d_a * d_a}x{d_b * d_b} matrix, got {r.shape}")
    return (
        r.reshape(d_a, d_a, d_b, d_b)
        .transpose(0, 2, 1, 3)
        .reshape(d_a * d_b, d_a * d_b)
    )


def hermitian_eig(h: np.ndarray, tol_unitary: float = UNITARY_ATOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.

    Raises ``ValueError`` if ``h`` deviates from Hermiticity by more than
    ``tol_unitary`` relative to its scale.
    """
    h = np.asarray(h, dtype=complex)
    scale = max(1.0, max_abs(h))
    if max_abs(h - dag(h)) > tol_unitary * scale:
        raise ValueError("matrix is not Hermitian to tolerance")
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def svd(m: np.ndarray):
    """Full SVD: left vectors, singular values (descending), right vectors.

    Returns ``(u, s, vh)`` with ``m = u @ diag(s) @ vh`` (economy size).
    """
    return np.linalg.svd(np.asarray(m, dtype=complex), full_matrices=False)


def polar_unitary(m: np.ndarray) -> np.ndarray:
    """Closest unitary to ``m`` (the unitary factor of the polar decomposition)."""
    u, _, vh = np.linalg.svd(np.asarray(m, dtype=complex))
    return u @ vh


def expi_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(i * t * h) for Hermitian h, via eigendecomposition."""
    vals, vecs = hermitian_eig(h)
    return (vecs * np.exp(1j * t * vals)) @ dag(vecs)


def _cluster_by_gaps(vals: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split sorted eigenvalues into clusters separated by gaps above tol."""
    breaks = np.nonzero(np.diff(vals) > tol)[0]
    return np.split(np.arange(vals.size), breaks + 1)


def _split_subspace(cols: np.ndarray, family: list[np.ndarray], rng) -> list[np.ndarray]:
    """Recursively refine the orthonormal columns ``cols`` until the whole
    family is diagonal on every returned one-dimensional or jointly-scalar
    piece."""
    m = cols.shape[1]
    if m == 1:
        return [cols]
    restricted = [dag(cols) @ h @ cols for h in family]
    # Random real combination separates distinct joint eigenspaces almost surely.
    weights = rng.standard_normal(len(restricted))
    candidates = [sum(w * h for w, h in zip(weights, restricted))] + restricted
    for combo in candidates:
        vals, vecs = np.linalg.eigh((combo + dag(combo)) / 2)
        tol = DEGENERACY_RTOL * max(1.0, float(np.max(np.abs(vals))))
        clusters = _cluster_by_gaps(vals, tol)
        if len(clusters) > 1:
            out: list[np.ndarray] = []
            for idx in clusters:
                out.extend(_split_subspace(cols @ vecs[:, idx], family, rng))
            return out
    # Every member is scalar on this subspace; any orthonormal basis works.
    return [cols]


def joint_diagonalize(
    family: list[np.ndarray],
    tol_commute: float = 1e-8,
    rng: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Common orthonormal eigenbasis of a family of commuting Hermitian matrices.

    Strategy: diagonalize a random real-weighted combination, split by
    eigenvalue gaps, and recurse inside degenerate blocks; a verification
    sweep checks ``max offdiag(B^dag H B) <= 10 * tol_commute`` for every
    member and raises :class:`JointDiagonalizationError` otherwise.  Raises
    ``ValueError`` when the family does not commute to ``tol_commute``.
    """
    if not family:
        raise ValueError("family must contain at least one matrix")
    mats = [np.asarray(h, dtype=complex) for h in family]
    d = mats[0].shape[0]
    for h in mats:
        if h.shape != (d, d):
            raise ValueError("family members must share a square shape")
        if max_abs(h - dag(h)) > 1e-8 * max(1.0, max_abs(h)):
            raise ValueError("family members must be Hermitian")
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            if max_abs(comm) > tol_commute:
                raise ValueError(
                    f"family members {i} and {j} do not commute "
                    f"(max-abs commutator {max_abs(comm):.3e} > {tol_commute:.3e})"
                )
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    pieces = _split_subspace(np.eye(d, dtype=complex), mats, rng)
    basis = np.hstack(pieces)
    off_mask = ~np.eye(d, dtype=bool)
    for h in mats:
        rotated = dag(basis) @ h @ basis
        worst = max_abs(rotated[off_mask])
        if worst > 10.0 * tol_commute:
            raise JointDiagonalizationError(
                f"off-diagonal residue {worst:.3e} exceeds {10 * tol_commute:.3e}"
            )
    return basis


def random_unitary(d: int, seed: int | np.random.Generator | None = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    Deterministic for a given integer seed.  The standard phase fix (divide
    the diagonal of R by its modulus) removes the QR gauge freedom so the
    distribution is exactly Haar.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_state(d: int, rng: np.random.Generator | int | None = None) -> np.ndarray:
    """Haar-random pure state: normalized complex Gaussian vector."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)
