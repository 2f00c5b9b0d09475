import math

import numpy as np
import pytest
from conftest import pure

from remoteops.gates import RotationClass, RotationKind
from remoteops.protocols import (
    bidirectional_u_teleport,
    multicopy_remote_rotation,
    remote_rotation,
    telecloning_state,
    teleport,
)
from remoteops.qcore import Owner, entanglement_entropy
from remoteops.resources import (
    STATED_BOUNDS,
    BoundVerdict,
    ProtocolKind,
    ResourceLedger,
    check_bounds,
    ledger_from_transcript,
)


class TestLedger:
    def test_validation(self):
        with pytest.raises(ValueError, match="nonnegative"):
            ResourceLedger(-1.0, 0.0, 0.0)
        with pytest.raises(ValueError, match="finite"):
            ResourceLedger(math.inf, 0.0, 0.0)

    def test_additivity(self):
        total = ResourceLedger(1.0, 2.0, 0.0) + ResourceLedger(0.5, 0.0, 1.5)
        assert total.as_tuple() == (1.5, 2.0, 1.5)

    def test_from_teleport_transcript(self):
        result = teleport(pure("in", [0.6, 0.8], Owner.ALICE))
        ledger = ledger_from_transcript(result.branches[0])
        assert ledger.as_tuple() == pytest.approx((1.0, 2.0, 0.0), abs=1e-10)

    def test_from_remote_rotation_transcript(self):
        result = remote_rotation(
            RotationClass(RotationKind.COMMUTING, 0.9), pure("in", [0.6, 0.8], Owner.BOB)
        )
        ledger = ledger_from_transcript(result.branches[0])
        assert ledger.as_tuple() == pytest.approx((1.0, 1.0, 1.0), abs=1e-10)

    def test_from_multicopy_transcript(self):
        result = multicopy_remote_rotation(0.4, pure("in", [0.6, 0.8], Owner.BOB))
        ledger = ledger_from_transcript(result.branches[0])
        assert ledger.as_tuple() == pytest.approx((math.log2(3),) * 3, abs=1e-9)

    def test_ledger_matches_recorded_one(self):
        result = remote_rotation(
            RotationClass(RotationKind.COMMUTING, 0.9), pure("in", [0.6, 0.8], Owner.BOB)
        )
        for branch in result.branches:
            rebuilt = ledger_from_transcript(branch)
            assert rebuilt.as_tuple() == pytest.approx(branch.ledger.as_tuple(), abs=1e-10)

    def test_ebits_equal_resource_entropy(self):
        resource = telecloning_state()
        expected = entanglement_entropy(resource, ["A1", "A2"])
        result = multicopy_remote_rotation(1.1, pure("in", [1, 0], Owner.BOB))
        assert result.branches[0].ledger.ebits_consumed == pytest.approx(
            expected, abs=1e-10
        )


class TestBounds:
    def test_arbitrary_u_verdict(self):
        verdict = check_bounds(ResourceLedger(2.0, 2.0, 2.0), ProtocolKind.ARBITRARY_U)
        assert verdict.meets_lower and verdict.within_achieved and verdict.ok
        bounds = STATED_BOUNDS[ProtocolKind.ARBITRARY_U]
        assert bounds.mins() == (2.0, 2.0, 1.0)
        assert bounds.achieved() == (2.0, 2.0, 2.0)

    def test_restricted_rotation_verdict(self):
        verdict = check_bounds(
            ResourceLedger(1.0, 1.0, 1.0), ProtocolKind.RESTRICTED_ROTATION
        )
        assert verdict.ok

    def test_multicopy_below_trivial_cost(self):
        ledger = ResourceLedger(math.log2(3), math.log2(3), math.log2(3))
        verdict = check_bounds(ledger, ProtocolKind.MULTI_COPY)
        assert verdict.ok
        assert ledger.ebits_consumed < 2.0

    def test_under_resourced_ledger_fails_lower(self):
        verdict = check_bounds(ResourceLedger(1.0, 2.0, 2.0), ProtocolKind.ARBITRARY_U)
        assert not verdict.meets_lower and not verdict.ok

    def test_over_resourced_ledger_fails_achieved(self):
        verdict = check_bounds(ResourceLedger(3.0, 2.0, 2.0), ProtocolKind.ARBITRARY_U)
        assert verdict.meets_lower and not verdict.within_achieved

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            check_bounds(ResourceLedger(1, 1, 1), "nonsense")

    @pytest.mark.parametrize(
        "kind",
        [
            ProtocolKind.TELEPORT,
            ProtocolKind.ARBITRARY_U,
            ProtocolKind.RESTRICTED_ROTATION,
            ProtocolKind.MULTI_COPY,
        ],
    )
    def test_every_shipped_protocol_passes_its_bounds(self, kind):
        if kind is ProtocolKind.TELEPORT:
            result = teleport(pure("in", [0.6, 0.8], Owner.ALICE))
        elif kind is ProtocolKind.ARBITRARY_U:
            result = bidirectional_u_teleport(
                np.eye(2), pure("in", [0.6, 0.8], Owner.BOB)
            )
        elif kind is ProtocolKind.RESTRICTED_ROTATION:
            result = remote_rotation(
                RotationClass(RotationKind.COMMUTING, 1.0),
                pure("in", [0.6, 0.8], Owner.BOB),
            )
        else:
            result = multicopy_remote_rotation(0.7, pure("in", [0.6, 0.8], Owner.BOB))
        verdict = check_bounds(ledger_from_transcript(result.branches[0]), kind)
        assert verdict.ok, verdict.component_notes
