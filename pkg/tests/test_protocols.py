import math

import numpy as np
import pytest
from conftest import pure, random_qubit

from remoteops.gates import (
    HADAMARD,
    PAULI_X,
    RotationClass,
    RotationKind,
    anticommuting_rotation,
    commuting_rotation,
    pbs_cnot,
)
from remoteops.protocols import (
    ClassicalMessage,
    Direction,
    MeasurementRecord,
    ProtocolResult,
    ProtocolTranscript,
    ResourceDeclaration,
    bell_pair,
    bidirectional_u_teleport,
    multicopy_remote_rotation,
    nonlocal_cnot_signaling_check,
    remote_rotation,
    remote_rotation_circuit,
    select_branch,
    telecloning_state,
    teleport,
    verify_branch_determinism,
)
from remoteops.qcore import (
    Owner,
    PureState,
    SubsystemLabel,
    apply_unitary,
    computational_basis,
    haar_state,
    haar_unitary,
    measure_and_remove,
    overlap,
    qubit,
    tensor,
)
from remoteops.resources import ResourceLedger


def bob_qubit(amps):
    return pure("in", amps, Owner.BOB)


class TestTeleport:
    def test_zero_arrives_in_all_branches(self):
        result = teleport(pure("in", [1, 0], Owner.ALICE))
        assert len(result.branches) == 4
        for b in result.branches:
            assert overlap(b.final_state, result.target_state) == pytest.approx(1.0, abs=1e-12)

    def test_random_states_all_branches(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            psi = pure("in", random_qubit(rng), Owner.ALICE)
            result = teleport(psi)
            check = verify_branch_determinism(result)
            assert check.ok, check
            for b in result.branches:
                assert b.branch_probability == pytest.approx(0.25, abs=1e-10)

    def test_ledger_alice_to_bob(self):
        result = teleport(pure("in", [0.6, 0.8], Owner.ALICE))
        ledger = result.branches[0].ledger
        assert ledger.ebits_consumed == pytest.approx(1.0, abs=1e-10)
        assert ledger.cbits_a_to_b == pytest.approx(2.0, abs=1e-12)
        assert ledger.cbits_b_to_a == 0.0

    def test_ledger_bob_to_alice(self):
        result = teleport(
            pure("in", [0.6, 0.8], Owner.BOB), sender=Owner.BOB, receiver=Owner.ALICE
        )
        ledger = result.branches[0].ledger
        assert ledger.cbits_a_to_b == 0.0
        assert ledger.cbits_b_to_a == pytest.approx(2.0, abs=1e-12)
        assert verify_branch_determinism(result).ok

    def test_partially_entangled_resource_rejected(self):
        reg = (qubit("A", Owner.ALICE), qubit("B", Owner.BOB))
        weak = PureState(reg, np.array([0.9, 0, 0, np.sqrt(1 - 0.81)], dtype=complex))
        with pytest.raises(ValueError, match="maximally entangled"):
            teleport(pure("in", [1, 0], Owner.ALICE), weak)

    def test_wrong_bell_state_rejected(self):
        reg = (qubit("A", Owner.ALICE), qubit("B", Owner.BOB))
        phi_minus = PureState(reg, np.array([1, 0, 0, -1], dtype=complex) / np.sqrt(2))
        with pytest.raises(ValueError, match="canonical"):
            teleport(pure("in", [1, 0], Owner.ALICE), phi_minus)

    def test_qutrit_teleport(self):
        rng = np.random.default_rng(11)
        psi = PureState((SubsystemLabel("in", 3, Owner.ALICE),), haar_state(3, rng))
        result = teleport(psi, bell_pair(3))
        assert len(result.branches) == 9
        assert verify_branch_determinism(result).ok
        assert result.branches[0].ledger.cbits_a_to_b == pytest.approx(math.log2(9))


class TestBidirectional:
    def test_identity_returns_input(self):
        psi = bob_qubit([0.6, 0.8])
        result = bidirectional_u_teleport(np.eye(2), psi)
        assert len(result.branches) == 16
        assert verify_branch_determinism(result).ok
        ledger = result.branches[0].ledger
        assert ledger.ebits_consumed == pytest.approx(2.0, abs=1e-10)
        assert ledger.cbits_a_to_b == pytest.approx(2.0, abs=1e-12)
        assert ledger.cbits_b_to_a == pytest.approx(2.0, abs=1e-12)

    def test_sigma_x_on_zero(self):
        result = bidirectional_u_teleport(PAULI_X, bob_qubit([1, 0]))
        one = np.array([0, 1], dtype=complex)
        for b in result.branches:
            assert abs(abs(np.vdot(one, b.final_state.amplitudes)) - 1) < 1e-12
            assert b.branch_probability == pytest.approx(1 / 16, abs=1e-12)

    def test_random_su2(self):
        rng = np.random.default_rng(12)
        for _ in range(25):
            u = haar_unitary(2, rng)
            result = bidirectional_u_teleport(u, bob_qubit(random_qubit(rng)))
            assert verify_branch_determinism(result).ok

    def test_qutrit_and_ququart_inputs(self):
        rng = np.random.default_rng(13)
        for d in (3, 4):
            u = haar_unitary(d, rng)
            psi = PureState((SubsystemLabel("in", d, Owner.BOB),), haar_state(d, rng))
            result = bidirectional_u_teleport(u, psi)
            assert len(result.branches) == d**4
            assert verify_branch_determinism(result).ok
            assert result.branches[0].ledger.ebits_consumed == pytest.approx(
                2 * math.log2(d), abs=1e-10
            )

    def test_non_unitary_rejected(self):
        with pytest.raises(ValueError, match="unitary"):
            bidirectional_u_teleport(np.array([[1, 1], [0, 1]]), bob_qubit([1, 0]))

    def test_ledger_additivity_over_legs(self):
        result = bidirectional_u_teleport(PAULI_X, bob_qubit([1, 0]))
        for branch in result.branches:
            rebuilt = ResourceLedger(0.0, 0.0, 0.0)
            for step in branch.steps:
                if isinstance(step, ResourceDeclaration):
                    rebuilt = rebuilt + ResourceLedger(step.ebits, 0.0, 0.0)
                elif isinstance(step, ClassicalMessage):
                    if step.direction is Direction.ALICE_TO_BOB:
                        rebuilt = rebuilt + ResourceLedger(0.0, step.bits, 0.0)
                    else:
                        rebuilt = rebuilt + ResourceLedger(0.0, 0.0, step.bits)
            assert rebuilt.as_tuple() == pytest.approx(branch.ledger.as_tuple(), abs=1e-10)


class TestRemoteRotation:
    def test_intermediate_state_after_encoding(self):
        # after Bob's CNOT and a path-0 outcome the parties share a|00>+b|11>
        a, b = 0.6, 0.8j
        joint = tensor(bell_pair(), pure("beta", [a, b], Owner.BOB))
        joint = apply_unitary(joint, pbs_cnot(), ["beta", "B"])
        outcome, prob, rest = measure_and_remove(joint, computational_basis(2), ["B"])[0]
        assert outcome == 0 and prob == pytest.approx(0.5, abs=1e-12)
        expected = np.zeros(4, dtype=complex)
        expected[0], expected[3] = a, b
        assert abs(abs(np.vdot(expected, rest.amplitudes)) - 1) < 1e-12

    def test_eigenstate_fixed_point(self):
        for phi in (0.0, 0.7, np.pi, 5.0):
            result = remote_rotation(
                RotationClass(RotationKind.COMMUTING, phi), bob_qubit([1, 0])
            )
            for b in result.branches:
                assert abs(abs(b.final_state.amplitudes[0]) - 1) < 1e-12

    @pytest.mark.parametrize("kind", [RotationKind.COMMUTING, RotationKind.ANTICOMMUTING])
    def test_random_inputs_deterministic(self, kind):
        rng = np.random.default_rng(14)
        for _ in range(100):
            phi = rng.uniform(0, 2 * np.pi)
            result = remote_rotation(RotationClass(kind, phi), bob_qubit(random_qubit(rng)))
            check = verify_branch_determinism(result)
            assert check.ok, (kind, phi, check)
            assert len(result.branches) == 4
            for b in result.branches:
                assert b.branch_probability == pytest.approx(0.25, abs=1e-10)
                assert b.ledger.as_tuple() == pytest.approx((1.0, 1.0, 1.0), abs=1e-10)

    def test_anticommuting_matches_its_matrix(self):
        rng = np.random.default_rng(15)
        phi = 1.234
        psi = random_qubit(rng)
        result = remote_rotation(RotationClass(RotationKind.ANTICOMMUTING, phi), bob_qubit(psi))
        expected = anticommuting_rotation(phi) @ psi
        assert abs(abs(np.vdot(expected, result.target_state.amplitudes)) - 1) < 1e-12

    def test_hadamard_is_not_implementable(self):
        rng = np.random.default_rng(16)
        worst_ok = 0.0
        for _ in range(20):
            psi = bob_qubit(random_qubit(rng))
            result = remote_rotation_circuit(HADAMARD, psi)
            check = verify_branch_determinism(result)
            assert not check.ok
            assert check.max_infidelity > 0.01
            worst_ok = max(worst_ok, check.max_infidelity)
        assert worst_ok > 0.01

    def test_fault_injection_breaks_two_branches(self):
        psi = bob_qubit([0.6, 0.8])
        result = remote_rotation_circuit(
            commuting_rotation(1.23), psi, g2_correction=False
        )
        check = verify_branch_determinism(result)
        assert not check.ok
        bad = [
            b
            for b in result.branches
            if 1 - overlap(b.final_state, result.target_state) > 1e-6
        ]
        assert len(bad) == 2

    def test_trivial_single_branch_protocol(self):
        psi = bob_qubit([1, 0])
        transcript = ProtocolTranscript((), 1.0, psi, ResourceLedger(0, 0, 0))
        result = ProtocolResult((transcript,), psi, "trivial")
        assert verify_branch_determinism(result) == (True, 0.0)


class TestMulticopy:
    def test_eigenstate(self):
        for theta in (0.0, 0.4, 2.0):
            result = multicopy_remote_rotation(theta, bob_qubit([1, 0]))
            for b in result.branches:
                assert abs(abs(b.final_state.amplitudes[0]) - 1) < 1e-12

    def test_plus_state_example(self):
        # oracle: direct 2x2 evolution, (U|+>)x2 with U = diag(e^{i pi/4}, e^{-i pi/4})
        theta = np.pi / 4
        plus = np.ones(2) / np.sqrt(2)
        u = np.diag([np.exp(1j * theta), np.exp(-1j * theta)])
        expected = np.kron(u @ plus, u @ plus)
        result = multicopy_remote_rotation(theta, bob_qubit(plus))
        assert abs(abs(np.vdot(expected, result.target_state.amplitudes)) - 1) < 1e-12
        for b in result.branches:
            assert abs(abs(np.vdot(expected, b.final_state.amplitudes)) - 1) < 1e-10

    def test_branch_structure(self):
        result = multicopy_remote_rotation(0.9, bob_qubit([0.6, 0.8]))
        assert len(result.branches) == 9
        for b in result.branches:
            assert b.branch_probability == pytest.approx(1 / 9, abs=1e-10)
            # each of the two triplet measurements is an even three-way split
            stage_probs = [
                s.probability for s in b.steps if isinstance(s, MeasurementRecord)
            ]
            assert stage_probs == pytest.approx([1 / 3, 1 / 3], abs=1e-10)
        ledger = result.branches[0].ledger
        assert ledger.as_tuple() == pytest.approx(
            (math.log2(3),) * 3, abs=1e-10
        )

    def test_random_inputs_deterministic(self):
        rng = np.random.default_rng(17)
        for _ in range(60):
            theta = rng.uniform(0, 2 * np.pi)
            result = multicopy_remote_rotation(theta, bob_qubit(random_qubit(rng)))
            check = verify_branch_determinism(result)
            assert check.ok, check

    def test_fourier_power_correction_fails(self):
        rng = np.random.default_rng(18)
        failures = 0
        for _ in range(10):
            theta = rng.uniform(0.2, 2 * np.pi)
            result = multicopy_remote_rotation(
                theta, bob_qubit(random_qubit(rng)), correction="fourier_power"
            )
            if not verify_branch_determinism(result).ok:
                failures += 1
        assert failures == 10

    def test_explicit_pair_input(self):
        rng = np.random.default_rng(19)
        psi = random_qubit(rng)
        pair = PureState(
            (qubit("x", Owner.BOB), qubit("y", Owner.BOB)), np.kron(psi, psi)
        )
        result = multicopy_remote_rotation(0.8, input_pair=pair)
        assert verify_branch_determinism(result).ok

    def test_singlet_component_rejected(self):
        singlet = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
        pair = PureState((qubit("x", Owner.BOB), qubit("y", Owner.BOB)), singlet)
        with pytest.raises(ValueError, match="symmetric"):
            multicopy_remote_rotation(0.8, input_pair=pair)

    def test_non_product_symmetric_pair_rejected(self):
        cat = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)  # |00>+|11>
        pair = PureState((qubit("x", Owner.BOB), qubit("y", Owner.BOB)), cat)
        with pytest.raises(ValueError, match="product"):
            multicopy_remote_rotation(0.8, input_pair=pair)

    def test_wrong_resource_rejected(self):
        reg = telecloning_state().register
        wrong = PureState(reg, np.eye(16, dtype=complex)[0])
        with pytest.raises(ValueError, match="telecloning"):
            multicopy_remote_rotation(0.8, bob_qubit([1, 0]), resource=wrong)

    def test_both_or_neither_input_rejected(self):
        with pytest.raises(ValueError, match="exactly one"):
            multicopy_remote_rotation(0.8)


class TestSignaling:
    def test_report(self):
        report = nonlocal_cnot_signaling_check()
        assert report.distinguishes_plus_minus
        cases = {c.bob_state: c for c in report.cases}
        assert cases["plus"].alice_plus_probability == pytest.approx(1.0, abs=1e-12)
        assert cases["minus"].alice_minus_probability == pytest.approx(1.0, abs=1e-12)
        assert cases["zero"].alice_plus_probability == pytest.approx(0.5, abs=1e-12)
        assert cases["zero"].alice_minus_probability == pytest.approx(0.5, abs=1e-12)


class TestResultPlumbing:
    def test_probabilities_must_sum_to_one(self):
        psi = bob_qubit([1, 0])
        t = ProtocolTranscript((), 0.5, psi, ResourceLedger(0, 0, 0))
        with pytest.raises(ValueError, match="sum"):
            ProtocolResult((t,), psi, "broken")

    def test_branch_probability_range(self):
        psi = bob_qubit([1, 0])
        with pytest.raises(ValueError, match="probability"):
            ProtocolTranscript((), 0.0, psi, ResourceLedger(0, 0, 0))

    def test_select_branch_deterministic(self):
        result = teleport(pure("in", [0.6, 0.8], Owner.ALICE))
        assert select_branch(result, 21) is select_branch(result, 21)

    def test_message_validation(self):
        with pytest.raises(ValueError, match="alphabet"):
            ClassicalMessage(Direction.ALICE_TO_BOB, 1, 0)
        with pytest.raises(ValueError, match="value"):
            ClassicalMessage(Direction.ALICE_TO_BOB, 2, 5)
        assert ClassicalMessage(Direction.ALICE_TO_BOB, 3, 2).bits == pytest.approx(
            math.log2(3)
        )
