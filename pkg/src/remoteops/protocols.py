"""Executable LOCC protocol engines.

Each protocol enumerates every measurement branch, records local operations,
measurement outcomes and classical messages in a transcript, and accounts for
the entanglement and classical communication it consumes.  Deterministic
protocols reach the target state in every branch up to a global phase; the
verification helpers check exactly that.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from . import gates
from .qcore import (
    ATOL_DERIVED,
    Owner,
    PureState,
    SubsystemLabel,
    apply_unitary,
    computational_basis,
    entanglement_entropy,
    measure_and_remove,
    overlap,
    qubit,
    tensor,
)
from .resources import ResourceLedger


class Direction(Enum):
    ALICE_TO_BOB = "Alice->Bob"
    BOB_TO_ALICE = "Bob->Alice"


def _direction(sender: Owner) -> Direction:
    if sender is Owner.ALICE:
        return Direction.ALICE_TO_BOB
    if sender is Owner.BOB:
        return Direction.BOB_TO_ALICE
    raise ValueError(f"sender must be a party, got {sender!r}")


@dataclass(frozen=True)
class ClassicalMessage:
    """One classical message; its cost is log2(alphabet_size) bits."""

    direction: Direction
    alphabet_size: int
    value: int

    def __post_init__(self) -> None:
        if self.alphabet_size < 2:
            raise ValueError("alphabet size must be at least 2")
        if not 0 <= self.value < self.alphabet_size:
            raise ValueError(
                f"message value {self.value} outside alphabet of size {self.alphabet_size}"
            )

    @property
    def bits(self) -> float:
        return math.log2(self.alphabet_size)


@dataclass(frozen=True)
class LocalOperation:
    party: Owner
    description: str
    targets: tuple[str, ...]


@dataclass(frozen=True)
class MeasurementRecord:
    party: Owner
    basis: str
    targets: tuple[str, ...]
    outcome: int
    probability: float


@dataclass(frozen=True)
class ResourceDeclaration:
    """Entangled resource consumed by the protocol, with its computed ebits."""

    description: str
    ebits: float


Step = ClassicalMessage | LocalOperation | MeasurementRecord | ResourceDeclaration


@dataclass(frozen=True)
class ProtocolTranscript:
    """Ordered record of one measurement branch of a protocol run."""

    steps: tuple[Step, ...]
    branch_probability: float
    final_state: PureState
    ledger: ResourceLedger

    def __post_init__(self) -> None:
        if not 0.0 < self.branch_probability <= 1.0 + 1e-12:
            raise ValueError(
                f"branch probability must lie in (0, 1], got {self.branch_probability!r}"
            )


@dataclass(frozen=True)
class ProtocolResult:
    """All branches of one protocol run plus the ideal target state."""

    branches: tuple[ProtocolTranscript, ...]
    target_state: PureState
    protocol: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        total = sum(b.branch_probability for b in self.branches)
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"branch probabilities must sum to 1, got {total!r}")


class DeterminismCheck(NamedTuple):
    ok: bool
    max_infidelity: float


def verify_branch_determinism(
    result: ProtocolResult, atol: float = ATOL_DERIVED
) -> DeterminismCheck:
    """True iff every branch reaches the target up to a global phase."""
    worst = 0.0
    for branch in result.branches:
        worst = max(worst, 1.0 - overlap(branch.final_state, result.target_state))
    return DeterminismCheck(worst < atol, worst)


def select_branch(result: ProtocolResult, seed: int) -> ProtocolTranscript:
    """Draw one branch according to the branch probabilities, reproducibly."""
    rng = np.random.default_rng(seed)
    probs = np.array([b.branch_probability for b in result.branches])
    k = rng.choice(len(result.branches), p=probs / probs.sum())
    return result.branches[int(k)]


# ---------------------------------------------------------------------------
# shared resources


def bell_pair(d: int = 2, name_a: str = "A", name_b: str = "B") -> PureState:
    """Maximally entangled pair sum_k |kk>/sqrt(d) between Alice and Bob."""
    reg = (
        SubsystemLabel(name_a, d, Owner.ALICE),
        SubsystemLabel(name_b, d, Owner.BOB),
    )
    amps = np.zeros(d * d, dtype=complex)
    for k in range(d):
        amps[k * d + k] = 1.0 / math.sqrt(d)
    return PureState(reg, amps)


def telecloning_state() -> PureState:
    """Two-pair entangled resource correlating the triplet subspaces of A and B."""
    reg = (
        qubit("A1", Owner.ALICE),
        qubit("A2", Owner.ALICE),
        qubit("B1", Owner.BOB),
        qubit("B2", Owner.BOB),
    )
    amps = np.zeros(16, dtype=complex)
    for m in range(3):
        amps += np.kron(gates.TRIPLET_KETS[m], gates.TRIPLET_KETS[m])
    return PureState(reg, amps / math.sqrt(3))


def _alice_names(state: PureState) -> list[str]:
    return [lab.name for lab in state.register if lab.owner is Owner.ALICE]


def _declare_resource(resource: PureState, description: str) -> ResourceDeclaration:
    ebits = entanglement_entropy(resource, _alice_names(resource))
    return ResourceDeclaration(description, ebits)


# ---------------------------------------------------------------------------
# qudit shift/clock operators and the generalized Bell basis (internal)


@functools.cache
def _shift(d: int) -> np.ndarray:
    m = np.zeros((d, d), dtype=complex)
    for k in range(d):
        m[(k + 1) % d, k] = 1.0
    m.setflags(write=False)
    return m


@functools.cache
def _clock(d: int) -> np.ndarray:
    w = np.exp(2j * np.pi / d)
    m = np.diag(w ** np.arange(d))
    m.setflags(write=False)
    return m


@functools.cache
def _bell_basis(d: int) -> np.ndarray:
    """Rows are (Z^a X^b (x) I)|Phi+>, indexed by a*d+b."""
    phi = np.zeros(d * d, dtype=complex)
    for k in range(d):
        phi[k * d + k] = 1.0 / math.sqrt(d)
    rows = []
    for a in range(d):
        za = np.linalg.matrix_power(_clock(d), a)
        for b in range(d):
            op = za @ np.linalg.matrix_power(_shift(d), b)
            rows.append(np.kron(op, np.eye(d)) @ phi)
    basis = np.asarray(rows)
    basis.setflags(write=False)
    return basis


def _pauli_correction(d: int, outcome: int) -> np.ndarray:
    a, b = divmod(outcome, d)
    return np.linalg.matrix_power(_clock(d), a) @ np.linalg.matrix_power(_shift(d), b)


# ---------------------------------------------------------------------------
# plain state teleportation


def _validate_maximally_entangled_pair(
    resource: PureState, sender: Owner, receiver: Owner, d: int
) -> tuple[SubsystemLabel, SubsystemLabel]:
    if len(resource.register) != 2:
        raise ValueError("resource must consist of exactly two subsystems")
    halves = {lab.owner: lab for lab in resource.register}
    if set(halves) != {sender, receiver}:
        raise ValueError("resource must have one half per party")
    if any(lab.dimension != d for lab in resource.register):
        raise ValueError(f"resource halves must match the input dimension {d}")
    entropy = entanglement_entropy(resource, [halves[sender].name])
    if entropy < math.log2(d) - 1e-9:
        raise ValueError(
            f"resource is not maximally entangled: entropy {entropy:.9f} ebits"
        )
    reference = np.zeros(d * d, dtype=complex)
    for k in range(d):
        reference[k * d + k] = 1.0 / math.sqrt(d)
    if abs(np.vdot(reference, resource.amplitudes)) ** 2 < 1.0 - ATOL_DERIVED:
        raise ValueError("resource must be the canonical maximally entangled pair")
    return halves[sender], halves[receiver]


def teleport(
    psi: PureState,
    resource: PureState | None = None,
    sender: Owner = Owner.ALICE,
    receiver: Owner = Owner.BOB,
) -> ProtocolResult:
    """Teleport a single-subsystem state from sender to receiver.

    Enumerates all d^2 generalized Bell outcomes; the receiver applies the
    matching clock/shift correction, so every branch carries the input exactly.
    """
    if sender is receiver or Owner.SHARED in (sender, receiver):
        raise ValueError("sender and receiver must be the two distinct parties")
    if len(psi.register) != 1:
        raise ValueError("teleport expects a single-subsystem input state")
    d = psi.register[0].dimension
    if resource is None:
        resource = bell_pair(d)
    send_half, recv_half = _validate_maximally_entangled_pair(resource, sender, receiver, d)

    input_label = SubsystemLabel("psi", d, sender)
    if input_label.name in {lab.name for lab in resource.register}:
        raise ValueError("resource subsystem names collide with the input label")
    psi_in = PureState((input_label,), psi.amplitudes)
    joint = tensor(psi_in, resource)

    declaration = _declare_resource(resource, f"maximally entangled pair (d={d})")
    ledger = ResourceLedger(
        declaration.ebits,
        2 * math.log2(d) if sender is Owner.ALICE else 0.0,
        2 * math.log2(d) if sender is Owner.BOB else 0.0,
    )
    target = PureState((recv_half,), psi.amplitudes)

    branches = []
    for outcome, prob, rest in measure_and_remove(
        joint, _bell_basis(d), [input_label.name, send_half.name]
    ):
        correction = _pauli_correction(d, outcome)
        fixed = apply_unitary(rest, correction, [recv_half.name])
        steps = (
            declaration,
            MeasurementRecord(
                sender,
                "generalized Bell",
                (input_label.name, send_half.name),
                outcome,
                prob,
            ),
            ClassicalMessage(_direction(sender), d * d, outcome),
            LocalOperation(receiver, f"clock/shift correction #{outcome}", (recv_half.name,)),
        )
        branches.append(ProtocolTranscript(steps, prob, fixed, ledger))
    return ProtocolResult(tuple(branches), target, "teleport")


# ---------------------------------------------------------------------------
# arbitrary unitary via bidirectional teleportation


def bidirectional_u_teleport(u: np.ndarray, psi: PureState) -> ProtocolResult:
    """Remote arbitrary unitary: teleport to Alice, apply, teleport back.

    Works for qudit inputs of dimension 2 to 4 via generalized teleportation.
    """
    if len(psi.register) != 1:
        raise ValueError("expected a single-subsystem input state")
    d = psi.register[0].dimension
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"unitary must be {d}x{d} to match the input")
    if np.abs(u.conj().T @ u - np.eye(d)).max() > 1e-10:
        raise ValueError("operator must be unitary within 1e-10")

    pair_in = bell_pair(d, "A1", "B1")
    pair_out = bell_pair(d, "A2", "B2")
    first = teleport(psi, pair_in, sender=Owner.BOB, receiver=Owner.ALICE)

    branches = []
    for b1 in first.branches:
        rotated = apply_unitary(b1.final_state, u, ["A1"])
        second = teleport(rotated, pair_out, sender=Owner.ALICE, receiver=Owner.BOB)
        for b2 in second.branches:
            steps = (
                b1.steps
                + (LocalOperation(Owner.ALICE, "apply requested unitary", ("A1",)),)
                + b2.steps
            )
            branches.append(
                ProtocolTranscript(
                    steps,
                    b1.branch_probability * b2.branch_probability,
                    b2.final_state,
                    b1.ledger + b2.ledger,
                )
            )
    target = PureState((pair_out.register[1],), u @ psi.amplitudes)
    return ProtocolResult(tuple(branches), target, "bidirectional-unitary", {"dimension": d})


# ---------------------------------------------------------------------------
# remote rotation about the z axis


_DC_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def remote_rotation_circuit(
    u_mid: np.ndarray,
    psi: PureState,
    resource: PureState | None = None,
    g2_correction: bool = True,
) -> ProtocolResult:
    """Run the raw two-round rotation circuit with an arbitrary middle unitary.

    Encoding round: Bob entangles the input with his shared half, measures it
    and sends the outcome to Alice, who applies the conditional flip on her
    qubit.  Alice then applies ``u_mid`` and decodes with a diagonal-basis
    measurement whose outcome tells Bob whether to apply sigma_z.  The circuit
    is only deterministic when ``u_mid`` commutes with sigma_z; running it
    with anything else exposes the class restriction.  The ``g2_correction``
    switch exists for fault-injection tests.
    """
    if len(psi.register) != 1 or psi.register[0].dimension != 2:
        raise ValueError("expected a single-qubit input state")
    if resource is None:
        resource = bell_pair(2)
    send_half, recv_half = _validate_maximally_entangled_pair(
        resource, Owner.BOB, Owner.ALICE, 2
    )
    alice_name, bob_name = recv_half.name, send_half.name

    beta = qubit("beta", Owner.BOB)
    joint = tensor(resource, PureState((beta,), psi.amplitudes))
    declaration = _declare_resource(resource, "Bell pair")
    ledger = ResourceLedger(declaration.ebits, 1.0, 1.0)
    target = PureState((beta,), np.asarray(u_mid, dtype=complex) @ psi.amplitudes)

    entangler = LocalOperation(Owner.BOB, "CNOT input onto shared half", ("beta", bob_name))
    entangled = apply_unitary(joint, gates.pbs_cnot(), ["beta", bob_name])

    branches = []
    for m1, p1, state1 in measure_and_remove(entangled, computational_basis(2), [bob_name]):
        steps1: list = [declaration, entangler]
        steps1.append(
            MeasurementRecord(Owner.BOB, "computational", (bob_name,), m1, p1)
        )
        steps1.append(ClassicalMessage(Direction.BOB_TO_ALICE, 2, m1))
        if m1 == 1:
            state1 = apply_unitary(state1, gates.PAULI_X, [alice_name])
            steps1.append(LocalOperation(Owner.ALICE, "sigma_x correction", (alice_name,)))
        state1 = apply_unitary(state1, u_mid, [alice_name])
        steps1.append(LocalOperation(Owner.ALICE, "apply rotation", (alice_name,)))
        for m2, p2, state2 in measure_and_remove(state1, _DC_BASIS, [alice_name]):
            steps2 = list(steps1)
            steps2.append(
                MeasurementRecord(Owner.ALICE, "diagonal (D/C)", (alice_name,), m2, p2)
            )
            steps2.append(ClassicalMessage(Direction.ALICE_TO_BOB, 2, m2))
            if m2 == 1 and g2_correction:
                state2 = apply_unitary(state2, gates.PAULI_Z, ["beta"])
                steps2.append(LocalOperation(Owner.BOB, "sigma_z correction", ("beta",)))
            branches.append(ProtocolTranscript(tuple(steps2), p1 * p2, state2, ledger))
    return ProtocolResult(tuple(branches), target, "remote-rotation-circuit")


def remote_rotation(
    rc: gates.RotationClass,
    psi: PureState,
    resource: PureState | None = None,
) -> ProtocolResult:
    """Deterministic remote rotation for either sigma_z commutation class.

    The anticommuting class runs the commuting circuit at angle phi+pi and
    finishes with a sigma_x on the output, using the factorization of the
    anticommuting rotation.
    """
    if rc.kind is gates.RotationKind.COMMUTING:
        result = remote_rotation_circuit(gates.commuting_rotation(rc.angle), psi, resource)
        return ProtocolResult(
            result.branches,
            result.target_state,
            "remote-rotation",
            {"kind": rc.kind.value, "angle": rc.angle},
        )

    inner = remote_rotation_circuit(
        gates.commuting_rotation(rc.angle + np.pi), psi, resource
    )
    branches = []
    for b in inner.branches:
        final = apply_unitary(b.final_state, gates.PAULI_X, ["beta"])
        steps = b.steps + (
            LocalOperation(Owner.BOB, "sigma_x output flip", ("beta",)),
        )
        branches.append(ProtocolTranscript(steps, b.branch_probability, final, b.ledger))
    target = PureState(
        inner.target_state.register,
        gates.anticommuting_rotation(rc.angle) @ psi.amplitudes,
    )
    return ProtocolResult(
        tuple(branches),
        target,
        "remote-rotation",
        {"kind": rc.kind.value, "angle": rc.angle},
    )


# ---------------------------------------------------------------------------
# remote rotation of two identical copies via the telecloning resource

MULTICOPY_CORRECTIONS = ("triplet_phase", "fourier_power")


@functools.cache
def _controlled_cycle_on_pairs() -> np.ndarray:
    m = gates.embed_triplet_pair(gates.controlled_cycle())
    m.setflags(write=False)
    return m


def _triplet_coordinates(pair: PureState) -> np.ndarray:
    return gates.TRIPLET_KETS.conj() @ pair.amplitudes


def _validate_copy_pair(pair: PureState) -> None:
    singlet_weight = abs(np.vdot(gates.SINGLET_KET, pair.amplitudes)) ** 2
    if singlet_weight > ATOL_DERIVED:
        raise ValueError(
            "input pair has support outside the symmetric subspace "
            f"(singlet weight {singlet_weight:.3e})"
        )
    a = _triplet_coordinates(pair)
    defect = abs(a[1] ** 2 - 2.0 * a[0] * a[2])
    if defect > ATOL_DERIVED:
        raise ValueError(
            f"input pair is not of two-identical-copies product form (defect {defect:.3e})"
        )


def multicopy_remote_rotation(
    theta: float,
    psi: PureState | None = None,
    input_pair: PureState | None = None,
    resource: PureState | None = None,
    correction: str = "triplet_phase",
) -> ProtocolResult:
    """Apply exp(i theta sigma_z) remotely to two identical copies at once.

    Bob holds both copies; the telecloning resource carries log2(3) ebits.
    Both rounds of classical communication use a three-letter alphabet.  The
    ``correction`` argument selects the final local fix-up; only the diagonal
    ``triplet_phase`` variant is deterministic (see the verification suite).
    """
    if correction not in MULTICOPY_CORRECTIONS:
        raise ValueError(f"correction must be one of {MULTICOPY_CORRECTIONS}")
    if (psi is None) == (input_pair is None):
        raise ValueError("provide exactly one of psi or input_pair")

    p_labels = (qubit("P1", Owner.BOB), qubit("P2", Owner.BOB))
    if psi is not None:
        if len(psi.register) != 1 or psi.register[0].dimension != 2:
            raise ValueError("expected a single-qubit input state")
        pair = PureState(p_labels, np.kron(psi.amplitudes, psi.amplitudes))
    else:
        if len(input_pair.register) != 2 or input_pair.dims != (2, 2):
            raise ValueError("input pair must consist of two qubits")
        pair = PureState(p_labels, input_pair.amplitudes)
        _validate_copy_pair(pair)

    if resource is None:
        resource = telecloning_state()
    reference = telecloning_state()
    if resource.register != reference.register:
        raise ValueError("resource register must be the two labeled qubit pairs")
    if abs(np.vdot(reference.amplitudes, resource.amplitudes)) ** 2 < 1.0 - ATOL_DERIVED:
        raise ValueError("resource must be the telecloning state")

    rotation = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
    target_amps = np.kron(np.eye(2), rotation) @ (np.kron(rotation, np.eye(2)) @ pair.amplitudes)
    target = PureState(p_labels, target_amps)

    joint = tensor(resource, pair)
    declaration = _declare_resource(resource, "telecloning state")
    ledger = ResourceLedger(declaration.ebits, math.log2(3), math.log2(3))
    triplet_meas = gates.TRIPLET_BASIS.measurement_vectors()

    joint = apply_unitary(joint, _controlled_cycle_on_pairs(), ["P1", "P2", "B1", "B2"])
    prologue: tuple = (
        declaration,
        LocalOperation(Owner.BOB, "controlled cycle, copies onto shared half",
                       ("P1", "P2", "B1", "B2")),
    )

    branches = []
    for k1, p1, state1 in measure_and_remove(joint, triplet_meas, ["B1", "B2"]):
        if k1 > 2:
            raise AssertionError("singlet outcome must carry zero probability")
        steps1 = list(prologue)
        steps1.append(MeasurementRecord(Owner.BOB, "triplet", ("B1", "B2"), k1, p1))
        steps1.append(ClassicalMessage(Direction.BOB_TO_ALICE, 3, k1))
        state1 = apply_unitary(
            state1, gates.embed_triplet(gates.qutrit_cycle(k1)), ["A1", "A2"]
        )
        steps1.append(LocalOperation(Owner.ALICE, f"cycle correction T^{k1}", ("A1", "A2")))
        state1 = apply_unitary(state1, np.kron(rotation, rotation), ["A1", "A2"])
        steps1.append(LocalOperation(Owner.ALICE, "apply rotation to both qubits", ("A1", "A2")))
        state1 = apply_unitary(
            state1, gates.embed_triplet(gates.qutrit_fourier()), ["A1", "A2"]
        )
        steps1.append(LocalOperation(Owner.ALICE, "qutrit Fourier transform", ("A1", "A2")))
        for k2, p2, state2 in measure_and_remove(state1, triplet_meas, ["A1", "A2"]):
            if k2 > 2:
                raise AssertionError("singlet outcome must carry zero probability")
            steps2 = list(steps1)
            steps2.append(MeasurementRecord(Owner.ALICE, "triplet", ("A1", "A2"), k2, p2))
            steps2.append(ClassicalMessage(Direction.ALICE_TO_BOB, 3, k2))
            if correction == "triplet_phase":
                fixup = gates.triplet_phase(k2)
                note = f"diagonal phase correction k={k2}"
            else:
                fixup = np.linalg.matrix_power(gates.qutrit_fourier(), k2)
                note = f"Fourier-power correction k={k2}"
            state2 = apply_unitary(state2, gates.embed_triplet(fixup), ["P1", "P2"])
            steps2.append(LocalOperation(Owner.BOB, note, ("P1", "P2")))
            branches.append(
                ProtocolTranscript(tuple(steps2), p1 * p2, state2, ledger)
            )
    return ProtocolResult(
        tuple(branches),
        target,
        "multicopy-remote-rotation",
        {"correction": correction, "theta": theta},
    )


# ---------------------------------------------------------------------------
# non-local CNOT signaling check


@dataclass(frozen=True)
class SignalingCase:
    bob_state: str
    alice_plus_probability: float
    alice_minus_probability: float


@dataclass(frozen=True)
class SignalingReport:
    """Outcome statistics of Alice's |+>/|-> measurement after a shared CNOT."""

    cases: tuple[SignalingCase, ...]
    distinguishes_plus_minus: bool
    max_deviation: float


_PM_BASIS = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def nonlocal_cnot_signaling_check() -> SignalingReport:
    """Show a shared CNOT lets Bob's |+>/|-> choice set Alice's outcome.

    Alice prepares |+> as control; Bob's target is |+>, |-> or |0>.  For the
    eigenstate inputs Alice's diagonal measurement reveals Bob's bit with
    probability one; for |0> her outcomes are an even split.
    """
    control = qubit("c", Owner.ALICE)
    target = qubit("t", Owner.BOB)
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    zero = np.array([1, 0], dtype=complex)

    cases = []
    for name, vec in (("plus", plus), ("minus", minus), ("zero", zero)):
        joint = tensor(
            PureState((control,), plus), PureState((target,), vec)
        )
        joint = apply_unitary(joint, gates.pbs_cnot(), ["c", "t"])
        probs = {k: p for k, p, _ in measure_and_remove(joint, _PM_BASIS, ["c"])}
        cases.append(
            SignalingCase(name, probs.get(0, 0.0), probs.get(1, 0.0))
        )
    dev = max(
        abs(cases[0].alice_plus_probability - 1.0),
        abs(cases[1].alice_minus_probability - 1.0),
    )
    return SignalingReport(tuple(cases), dev < 1e-12, dev)
