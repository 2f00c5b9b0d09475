"""Shared helpers for the test suite."""

import numpy as np

from remoteops.qcore import (
    KrausChannel,
    Owner,
    PureState,
    SubsystemLabel,
    haar_state,
    haar_unitary,
)


def pure(name: str, amps, owner: Owner = Owner.SHARED, dim: int = 2) -> PureState:
    return PureState((SubsystemLabel(name, dim, owner),), np.asarray(amps, dtype=complex))


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    return haar_state(2, rng)


def random_channel(rng: np.random.Generator, dim: int = 2, n_kraus: int = 3) -> KrausChannel:
    """Random CPTP map from Stinespring slices of a Haar unitary."""
    big = haar_unitary(dim * n_kraus, rng)
    ops = tuple(big[k * dim : (k + 1) * dim, :dim] for k in range(n_kraus))
    return KrausChannel(ops)
