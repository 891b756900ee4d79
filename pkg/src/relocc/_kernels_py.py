"""Pure-numpy batch kernel for product-input output entropies.

Mirrors the compiled extension's interface; selected by ``_backend`` when
the extension is unavailable or disabled.
"""

from __future__ import annotations

import numpy as np

__all__ = ["product_output_entropies"]

ENTROPY_EIGENVALUE_FLOOR = 1e-15


def _entropies_from_eigenvalues(lam: np.ndarray) -> np.ndarray:
    lam = np.clip(lam.real, 0.0, None)
    lam = lam / np.sum(lam, axis=1, keepdims=True)
    terms = np.where(
        lam > ENTROPY_EIGENVALUE_FLOOR, -lam * np.log2(np.maximum(lam, 1e-300)), 0.0
    )
    return np.sum(terms, axis=1)


def product_output_entropies(
    u: np.ndarray, d_a: int, d_b: int, a_states: np.ndarray, b_states: np.ndarray
) -> np.ndarray:
    """Base-2 entanglement entropy of U(a_r (x) b_r) for each input row r.

    ``a_states`` is (n, d_a), ``b_states`` is (n, d_b), rows normalized; the
    result has shape (n,).
    """
    u = np.asarray(u, dtype=complex)
    a_states = np.asarray(a_states, dtype=complex)
    b_states = np.asarray(b_states, dtype=complex)
    psi = np.einsum("ra,rb->rab", a_states, b_states).reshape(a_states.shape[0], -1)
    phi = psi @ u.T
    x = phi.reshape(-1, d_a, d_b)
    g = x @ x.conj().transpose(0, 2, 1)
    if d_a == 2:
        # Closed-form 2x2 Hermitian eigenvalues avoid the eigvalsh dispatch cost.
        tr = (g[:, 0, 0] + g[:, 1, 1]).real
        det = (g[:, 0, 0] * g[:, 1, 1]).real - np.abs(g[:, 0, 1]) ** 2
        disc = np.sqrt(np.maximum(tr * tr - 4.0 * det, 0.0))
        lam = np.stack([(tr - disc) / 2.0, (tr + disc) / 2.0], axis=1)
    else:
        lam = np.linalg.eigvalsh(g)
    return _entropies_from_eigenvalues(lam)
