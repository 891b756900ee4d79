"""Shared test oracles, kept deliberately independent of the library code:
index arithmetic is spelled out with explicit loops so the fast vectorized
implementations are checked against a second route."""

from __future__ import annotations

import numpy as np


def brute_realign(u: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    """Realignment by explicit index bookkeeping:
    R[a*d_a + a', b*d_b + b'] = U[(a, b), (a', b')] with (a, b) -> a*d_b + b."""
    r = np.zeros((d_a * d_a, d_b * d_b), dtype=complex)
    for a in range(d_a):
        for ap in range(d_a):
            for b in range(d_b):
                for bp in range(d_b):
                    r[a * d_a + ap, b * d_b + bp] = u[a * d_b + b, ap * d_b + bp]
    return r


def brute_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product by explicit loops under the A-major convention."""
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i in range(ra):
        for j in range(ca):
            for k in range(rb):
                for l in range(cb):
                    out[i * rb + k, j * cb + l] = a[i, j] * b[k, l]
    return out


def brute_partial_trace(rho: np.ndarray, d_a: int, d_b: int, side: str) -> np.ndarray:
    """Partial trace by explicit loops; ``side`` is the traced-out subsystem."""
    if side == "B":
        out = np.zeros((d_a, d_a), dtype=complex)
        for a in range(d_a):
            for ap in range(d_a):
                for b in range(d_b):
                    out[a, ap] += rho[a * d_b + b, ap * d_b + b]
        return out
    out = np.zeros((d_b, d_b), dtype=complex)
    for b in range(d_b):
        for bp in range(d_b):
            for a in range(d_a):
                out[b, bp] += rho[a * d_b + b, a * d_b + bp]
    return out


def binary_entropy(p: float) -> float:
    """Base-2 entropy of (p, 1 - p)."""
    total = 0.0
    for q in (p, 1.0 - p):
        if q > 1e-15:
            total -= q * np.log2(q)
    return float(total)


def mixed_state_entropy(rho: np.ndarray) -> float:
    """Base-2 von Neumann entropy straight from the eigenvalues."""
    vals = np.linalg.eigvalsh(rho)
    vals = vals[vals > 1e-15]
    return float(-np.sum(vals * np.log2(vals)))


def match_up_to_order(
    found: list[np.ndarray], expected: list[np.ndarray], atol: float = 1e-8
) -> bool:
    """Greedy set matching of matrices regardless of ordering."""
    remaining = list(expected)
    for f in found:
        for i, e in enumerate(remaining):
            if np.max(np.abs(f - e)) <= atol:
                del remaining[i]
                break
        else:
            return False
    return not remaining


def proportional_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-8) -> bool:
    """Whether two same-shape unitaries agree up to one global phase."""
    d = a.shape[0]
    overlap = np.trace(a.conj().T @ b)
    return abs(abs(overlap) - d) <= atol * d
