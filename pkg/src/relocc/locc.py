"""LOCC protocol trees, branch simulation, and the relocalization verifier.

A protocol is a finite tree: each internal node holds a generalized
measurement by one party and one child per outcome; leaves optionally carry
final local unitary corrections.  Executing a protocol on a pure two-qudit
state enumerates outcome branches with Born-rule probabilities and the
accumulated per-party operator products along each branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import BipartiteUnitary, HADAMARD, PAULI_Z, swap_phase
from .linalg import dag, kron, max_abs, partial_trace, random_state, random_unitary

__all__ = [
    "MAX_PROTOCOL_DEPTH",
    "PRUNE_PROBABILITY",
    "Measurement",
    "validate_measurement",
    "ProtocolNode",
    "LoccProtocol",
    "Branch",
    "RelocalizationReport",
    "execute_protocol",
    "branch_operators",
    "apply_channel",
    "accumulated_recursion_residual",
    "synthesize_relocalization_protocol",
    "verify_one_piece_relocalization",
    "check_bob_accumulated_unitary",
    "fixed_input_relocalization_demo",
    "random_measurement",
    "random_protocol",
]

MAX_PROTOCOL_DEPTH = 16
# Branches below this probability are dropped; the total dropped mass is
# bounded so normalization checks stay meaningful.
PRUNE_PROBABILITY = 1e-12
PRUNED_MASS_BOUND = 1e-10


@dataclass(frozen=True)
class Measurement:
    """One party's generalized measurement, outcomes labeled 0..n-1."""

    party: str
    operators: list[np.ndarray] = field(repr=False)

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


def validate_measurement(m: Measurement, tol: float = 1e-9) -> tuple[bool, float]:
    """Check the completeness relation sum_r M_r^dag M_r = I.

    Returns (ok, deviation) where deviation is the max-abs distance from the
    identity; a verdict, never an exception.
    """
    if m.party not in ("A", "B") or not m.operators:
        return False, float("inf")
    d = m.dim
    total = np.zeros((d, d), dtype=complex)
    for op in m.operators:
        if op.shape != (d, d):
            return False, float("inf")
        total += dag(op) @ op
    deviation = max_abs(total - np.eye(d))
    return deviation <= tol, float(deviation)


@dataclass
class ProtocolNode:
    """Tree node: a measurement with per-outcome children, or a leaf.

    Leaves have ``measurement is None`` and may carry final unitary
    corrections for either party.
    """

    measurement: Measurement | None = None
    children: dict[int, "ProtocolNode"] = field(default_factory=dict)
    a_correction: np.ndarray | None = None
    b_correction: np.ndarray | None = None

    @property
    def is_leaf(self) -> bool:
        return self.measurement is None


def leaf(a_correction: np.ndarray | None = None, b_correction: np.ndarray | None = None) -> ProtocolNode:
    return ProtocolNode(None, {}, a_correction, b_correction)


@dataclass
class LoccProtocol:
    """A finite LOCC protocol on d_a x d_b with a fixed measurement tree."""

    d_a: int
    d_b: int
    root: ProtocolNode

    def validate(self, tol: float = 1e-9) -> None:
        """Check tree shape, completeness relations, dimensions, and unitary
        corrections; raises ``ValueError`` on the first violation."""
        self._validate_node(self.root, 0, tol)

    def _validate_node(self, node: ProtocolNode, depth: int, tol: float) -> None:
        if depth > MAX_PROTOCOL_DEPTH:
            raise ValueError(f"protocol depth exceeds {MAX_PROTOCOL_DEPTH}")
        if node.is_leaf:
            if node.children:
                raise ValueError("leaf node must not have children")
            for corr, d in ((node.a_correction, self.d_a), (node.b_correction, self.d_b)):
                if corr is None:
                    continue
                if corr.shape != (d, d):
                    raise ValueError("correction dimension mismatch")
                if max_abs(dag(corr) @ corr - np.eye(d)) > tol:
                    raise ValueError("leaf correction is not unitary to tolerance")
            return
        m = node.measurement
        expected = self.d_a if m.party == "A" else self.d_b
        if m.party not in ("A", "B"):
            raise ValueError(f"unknown party {m.party!r}")
        if m.dim != expected:
            raise ValueError(
                f"measurement on party {m.party} has dimension {m.dim}, expected {expected}"
            )
        ok, deviation = validate_measurement(m, tol)
        if not ok:
            raise ValueError(
                f"measurement completeness violated (deviation {deviation:.3e})"
            )
        if sorted(node.children) != list(range(m.n_outcomes)):
            raise ValueError("children must cover outcomes 0..n-1 exactly")
        for child in node.children.values():
            self._validate_node(child, depth + 1, tol)


@dataclass(frozen=True)
class Branch:
    """One outcome path: probability, normalized post-state, and the ordered
    per-party operator products (leaf corrections included)."""

    outcomes: tuple[int, ...]
    probability: float
    post_state: np.ndarray = field(repr=False)
    accumulated_a: np.ndarray = field(repr=False)
    accumulated_b: np.ndarray = field(repr=False)


def _full_operator(op: np.ndarray, party: str, d_a: int, d_b: int) -> np.ndarray:
    if party == "A":
        return kron(op, np.eye(d_b))
    return kron(np.eye(d_a), op)


def execute_protocol(protocol: LoccProtocol, state: np.ndarray) -> list[Branch]:
    """Enumerate all outcome branches of a protocol on a pure input state.

    Branch order is depth-first by outcome label.  Branches with cumulative
    probability below PRUNE_PROBABILITY are dropped; the dropped mass must
    stay below 1e-10 or a ``RuntimeError`` is raised.
    """
    protocol.validate()
    state = np.asarray(state, dtype=complex).reshape(-1)
    if state.shape[0] != protocol.d_a * protocol.d_b:
        raise ValueError("state dimension does not match the protocol")
    norm = np.linalg.norm(state)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError(f"input state is not normalized (norm {norm:.3e})")
    d_a, d_b = protocol.d_a, protocol.d_b
    branches: list[Branch] = []
    pruned_mass = 0.0

    def walk(node: ProtocolNode, psi, prob, acc_a, acc_b, outcomes):
        nonlocal pruned_mass
        if node.is_leaf:
            if node.a_correction is not None:
                psi = _full_operator(node.a_correction, "A", d_a, d_b) @ psi
                acc_a = node.a_correction @ acc_a
            if node.b_correction is not None:
                psi = _full_operator(node.b_correction, "B", d_a, d_b) @ psi
                acc_b = node.b_correction @ acc_b
            branches.append(Branch(outcomes, prob, psi, acc_a, acc_b))
            return
        m = node.measurement
        for outcome, op in enumerate(m.operators):
            new_psi = _full_operator(op, m.party, d_a, d_b) @ psi
            weight = float(np.real(np.vdot(new_psi, new_psi)))
            new_prob = prob * weight
            if new_prob < PRUNE_PROBABILITY:
                pruned_mass += new_prob
                continue
            new_acc_a = op @ acc_a if m.party == "A" else acc_a
            new_acc_b = op @ acc_b if m.party == "B" else acc_b
            walk(
                node.children[outcome],
                new_psi / np.sqrt(weight),
                new_prob,
                new_acc_a,
                new_acc_b,
                outcomes + (outcome,),
            )

    walk(
        protocol.root,
        state,
        1.0,
        np.eye(d_a, dtype=complex),
        np.eye(d_b, dtype=complex),
        (),
    )
    if pruned_mass > PRUNED_MASS_BOUND:
        raise RuntimeError(
            f"pruned probability mass {pruned_mass:.3e} exceeds {PRUNED_MASS_BOUND:.1e}"
        )
    return branches


def branch_operators(
    protocol: LoccProtocol,
) -> list[tuple[tuple[int, ...], np.ndarray, np.ndarray]]:
    """Input-independent walk: (outcome path, accumulated A op, accumulated B op)
    for every leaf, corrections included, in depth-first outcome order."""
    protocol.validate()
    result: list[tuple[tuple[int, ...], np.ndarray, np.ndarray]] = []

    def walk(node, acc_a, acc_b, outcomes):
        if node.is_leaf:
            if node.a_correction is not None:
                acc_a = node.a_correction @ acc_a
            if node.b_correction is not None:
                acc_b = node.b_correction @ acc_b
            result.append((outcomes, acc_a, acc_b))
            return
        m = node.measurement
        for outcome, op in enumerate(m.operators):
            walk(
                node.children[outcome],
                op @ acc_a if m.party == "A" else acc_a,
                op @ acc_b if m.party == "B" else acc_b,
                outcomes + (outcome,),
            )

    walk(protocol.root, np.eye(protocol.d_a, dtype=complex), np.eye(protocol.d_b, dtype=complex), ())
    return result


def apply_channel(protocol: LoccProtocol, rho: np.ndarray) -> np.ndarray:
    """The CPTP map of the protocol: sum over branches of
    (M (x) K) rho (M (x) K)^dag with the accumulated branch operators."""
    rho = np.asarray(rho, dtype=complex)
    d = protocol.d_a * protocol.d_b
    if rho.shape != (d, d):
        raise ValueError("density matrix dimension does not match the protocol")
    out = np.zeros_like(rho)
    for _, acc_a, acc_b in branch_operators(protocol):
        op = kron(acc_a, acc_b)
        out += op @ rho @ dag(op)
    return out


def accumulated_recursion_residual(protocol: LoccProtocol) -> float:
    """Largest violation of the accumulated-operator completeness recursion.

    At every internal node, summing acc^dag acc over the acting party's
    outcomes must reproduce the parent's acc^dag acc (the other party's
    accumulated operator is unchanged).  Returns the max-abs residual over
    all nodes; leaf corrections are unitary and do not enter.
    """
    protocol.validate()
    worst = 0.0

    def walk(node, acc_a, acc_b):
        nonlocal worst
        if node.is_leaf:
            return
        m = node.measurement
        parent_acc = acc_a if m.party == "A" else acc_b
        total = np.zeros_like(parent_acc)
        for outcome, op in enumerate(m.operators):
            child_acc = op @ parent_acc
            total += dag(child_acc) @ child_acc
            if m.party == "A":
                walk(node.children[outcome], child_acc, acc_b)
            else:
                walk(node.children[outcome], acc_a, child_acc)
        worst = max(worst, max_abs(total - dag(parent_acc) @ parent_acc))

    walk(protocol.root, np.eye(protocol.d_a, dtype=complex), np.eye(protocol.d_b, dtype=complex))
    return worst


def synthesize_relocalization_protocol(form) -> LoccProtocol:
    """One-turn, one-way protocol restoring the target party's piece.

    The control party measures the form's projectors and sends the outcome;
    the target party applies the matching block unitary inverse.  For a gate
    controlled from A this relocalizes B's piece, and vice versa.
    """
    form.validate()
    projectors = [p.copy() for p in form.projectors]
    if form.control_side == "A":
        children = {
            i: leaf(b_correction=dag(v)) for i, v in enumerate(form.target_unitaries)
        }
        root = ProtocolNode(Measurement("A", projectors), children)
        return LoccProtocol(form.d_control, form.d_target, root)
    children = {
        i: leaf(a_correction=dag(v)) for i, v in enumerate(form.target_unitaries)
    }
    root = ProtocolNode(Measurement("B", projectors), children)
    return LoccProtocol(form.d_target, form.d_control, root)


@dataclass(frozen=True)
class RelocalizationReport:
    """Verification outcome for one-piece relocalization of one side's piece.

    ``branch_fidelities`` maps each outcome path to its worst protected-side
    fidelity across all sampled inputs; ``channel_residual`` is the largest
    Frobenius distance of the channel output from the required
    restored-piece (x) free-state product form.
    """

    side: str
    branch_fidelities: dict[tuple[int, ...], float]
    min_fidelity: float
    channel_residual: float
    verdict: bool
    n_samples: int
    seed: int
    tol: float


def _spanning_states(d: int) -> list[np.ndarray]:
    """Computational-basis states plus the real and imaginary two-level
    superpositions; their projectors span the full operator space, so channel
    equality on products of these inputs extends to all product inputs."""
    eye = np.eye(d, dtype=complex)
    states = [eye[:, i] for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            states.append((eye[:, i] + eye[:, j]) / np.sqrt(2))
            states.append((eye[:, i] + 1j * eye[:, j]) / np.sqrt(2))
    return states


def _verify_over_inputs(
    u: BipartiteUnitary,
    protocol: LoccProtocol,
    side: str,
    pairs: list[tuple[np.ndarray, np.ndarray]],
    tol: float,
    n_samples: int,
    seed: int,
) -> RelocalizationReport:
    d_a, d_b = u.d_a, u.d_b
    traced = "B" if side == "A" else "A"
    branch_fidelities: dict[tuple[int, ...], float] = {}
    min_fidelity = 1.0
    channel_residual = 0.0
    for psi_a, psi_b in pairs:
        protected = psi_a if side == "A" else psi_b
        out = u.matrix @ kron(psi_a, psi_b)
        branches = execute_protocol(protocol, out)
        rho_out = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        for br in branches:
            rho_out += br.probability * np.outer(br.post_state, br.post_state.conj())
            reduced = partial_trace(
                np.outer(br.post_state, br.post_state.conj()), d_a, d_b, traced
            )
            fid = float(np.real(np.vdot(protected, reduced @ protected)))
            prev = branch_fidelities.get(br.outcomes, 1.0)
            branch_fidelities[br.outcomes] = min(prev, fid)
            min_fidelity = min(min_fidelity, fid)
        # Channel-level product form: restored piece on the protected side,
        # arbitrary (input-dependent) state on the other.
        proj = np.outer(protected, protected.conj())
        other = partial_trace(rho_out, d_a, d_b, side)
        model = kron(proj, other) if side == "A" else kron(other, proj)
        channel_residual = max(
            channel_residual, float(np.linalg.norm(rho_out - model))
        )
    return RelocalizationReport(
        side=side,
        branch_fidelities=branch_fidelities,
        min_fidelity=min_fidelity,
        channel_residual=channel_residual,
        verdict=min_fidelity >= 1.0 - tol,
        n_samples=n_samples,
        seed=seed,
        tol=tol,
    )


def verify_one_piece_relocalization(
    u: BipartiteUnitary,
    protocol: LoccProtocol,
    side: str = "B",
    n_samples: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
) -> RelocalizationReport:
    """Does the protocol restore ``side``'s input piece after U delocalized it?

    Runs U then the protocol on seeded Haar product inputs plus a spanning
    set of basis and two-level-superposition products; by linearity of the
    channel, branch fidelity 1 on the spanning set extends to all product
    inputs.  The verdict is min branch fidelity >= 1 - tol over all inputs
    and all surviving branches.
    """
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    rng = np.random.default_rng(seed)
    pairs = [
        (random_state(u.d_a, rng), random_state(u.d_b, rng)) for _ in range(n_samples)
    ]
    pairs += [(a, b) for a in _spanning_states(u.d_a) for b in _spanning_states(u.d_b)]
    return _verify_over_inputs(u, protocol, side, pairs, tol, n_samples, seed)


@dataclass(frozen=True)
class BranchUnitarityCheck:
    """Per-branch test of K K^dag proportional to the identity."""

    outcomes: tuple[int, ...]
    deviation: float
    passed: bool
    m_norm: float
    k_norm: float


def check_bob_accumulated_unitary(
    protocol: LoccProtocol, tol: float = 1e-9
) -> list[BranchUnitarityCheck]:
    """Necessary condition for relocalizing B's piece: every branch's
    accumulated B operator K must satisfy K K^dag = (Tr K K^dag / d) I.

    Input-independent; branches that can never fire have vanishing operator
    norms (reported, so callers can filter on m_norm and k_norm).
    """
    checks = []
    d_b = protocol.d_b
    for outcomes, acc_a, acc_b in branch_operators(protocol):
        kk = acc_b @ dag(acc_b)
        deviation = float(max_abs(kk - (np.trace(kk).real / d_b) * np.eye(d_b)))
        checks.append(
            BranchUnitarityCheck(
                outcomes=outcomes,
                deviation=deviation,
                passed=deviation <= tol,
                m_norm=float(np.linalg.norm(acc_a)),
                k_norm=float(np.linalg.norm(acc_b)),
            )
        )
    return checks


def fixed_input_relocalization_demo(
    n_samples: int = 100, seed: int = 0
) -> RelocalizationReport:
    """Relocalize B's piece through the phase-flipped swap gate when A's
    input is fixed to |+>.

    The gate itself is not relocalizable for arbitrary two-piece inputs, but
    with A's piece fixed a one-turn protocol works: A measures in the |+->
    basis; B applies H = |0><+| + |1><-| on outcome +, and sigma_z H on
    outcome -.  Reports B-side fidelity over seeded random and basis inputs.
    """
    u = swap_phase()
    plus = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2)
    minus = np.array([1.0, -1.0], dtype=complex) / np.sqrt(2)
    measurement = Measurement("A", [np.outer(plus, plus.conj()), np.outer(minus, minus.conj())])
    root = ProtocolNode(
        measurement,
        {0: leaf(b_correction=HADAMARD), 1: leaf(b_correction=PAULI_Z @ HADAMARD)},
    )
    protocol = LoccProtocol(2, 2, root)
    rng = np.random.default_rng(seed)
    b_inputs = [random_state(2, rng) for _ in range(n_samples)] + _spanning_states(2)
    pairs = [(plus, psi_b) for psi_b in b_inputs]
    return _verify_over_inputs(u, protocol, "B", pairs, 1e-10, n_samples, seed)


def random_measurement(
    d: int, n_outcomes: int, rng: np.random.Generator | int | None = None
) -> list[np.ndarray]:
    """Haar-random generalized measurement: slice an isometry into blocks.

    The first d columns of a Haar unitary of size n_outcomes*d form an
    isometry V with V^dag V = I, so its d-row blocks satisfy the
    completeness relation exactly.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    iso = random_unitary(n_outcomes * d, rng)[:, :d]
    return [iso[k * d : (k + 1) * d, :].copy() for k in range(n_outcomes)]


def random_protocol(
    d_a: int,
    d_b: int,
    depth: int = 2,
    n_outcomes: int = 2,
    seed: int = 0,
) -> LoccProtocol:
    """Seeded random protocol: parties alternate starting with A, every node
    carries a Haar-random measurement, and leaves apply Haar-random unitary
    corrections on both sides."""
    if not 0 <= depth <= MAX_PROTOCOL_DEPTH:
        raise ValueError(f"depth must lie in 0..{MAX_PROTOCOL_DEPTH}")
    rng = np.random.default_rng(seed)

    def build(level: int) -> ProtocolNode:
        if level == depth:
            return leaf(
                a_correction=random_unitary(d_a, rng),
                b_correction=random_unitary(d_b, rng),
            )
        party = "A" if level % 2 == 0 else "B"
        d = d_a if party == "A" else d_b
        ops = random_measurement(d, n_outcomes, rng)
        children = {k: build(level + 1) for k in range(n_outcomes)}
        return ProtocolNode(Measurement(party, ops), children)

    return LoccProtocol(d_a, d_b, build(0))
