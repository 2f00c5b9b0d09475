"""Concrete operator constructors.

Covers the two single-qubit rotation classes singled out by their commutation
behaviour with sigma_z, the qutrit operators acting on the symmetric (triplet)
subspace of two qubits, and the linear-optics gate set (polarizing beam
splitter CNOT, wave plates).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

for _m in (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z, HADAMARD):
    _m.setflags(write=False)


# ---------------------------------------------------------------------------
# rotation classes


def commuting_rotation(phi: float) -> np.ndarray:
    """diag(e^{i phi/2}, e^{-i phi/2}) = exp(i phi/2 sigma_z); commutes with sigma_z."""
    return np.diag([np.exp(1j * phi / 2), np.exp(-1j * phi / 2)])


def anticommuting_rotation(phi: float) -> np.ndarray:
    """sigma_x composed with a z-rotation at phi+pi; anticommutes with sigma_z.

    The matrix has zero diagonal, so U sigma_z + sigma_z U = 0 exactly.
    """
    return PAULI_X @ commuting_rotation(phi + np.pi)


class RotationKind(Enum):
    COMMUTING = "commuting"
    ANTICOMMUTING = "anticommuting"


@dataclass(frozen=True)
class RotationClass:
    """A single-qubit rotation identified by its sigma_z commutation class."""

    kind: RotationKind
    angle: float

    def matrix(self) -> np.ndarray:
        if self.kind is RotationKind.COMMUTING:
            return commuting_rotation(self.angle)
        return anticommuting_rotation(self.angle)


# ---------------------------------------------------------------------------
# triplet-subspace (embedded qutrit) operators
#
# The two-qubit symmetric subspace is spanned by |00>, (|01>+|10>)/sqrt2 and
# |11>; the antisymmetric singlet (|01>-|10>)/sqrt2 completes the space.

TRIPLET_KETS = np.array(
    [
        [1, 0, 0, 0],
        [0, 1 / np.sqrt(2), 1 / np.sqrt(2), 0],
        [0, 0, 0, 1],
    ],
    dtype=complex,
)
SINGLET_KET = np.array([0, 1 / np.sqrt(2), -1 / np.sqrt(2), 0], dtype=complex)
TRIPLET_KETS.setflags(write=False)
SINGLET_KET.setflags(write=False)


@dataclass(frozen=True)
class TripletBasis:
    """The three symmetric-subspace vectors embedding a qutrit in two qubits."""

    embedding: np.ndarray = TRIPLET_KETS

    def __post_init__(self) -> None:
        emb = np.asarray(self.embedding, dtype=complex)
        if emb.shape != (3, 4):
            raise ValueError("embedding must be three two-qubit vectors")
        if np.abs(emb @ emb.conj().T - np.eye(3)).max() > 1e-12:
            raise ValueError("triplet vectors must be orthonormal")
        swap = np.zeros((4, 4))
        swap[0, 0] = swap[3, 3] = swap[1, 2] = swap[2, 1] = 1
        if np.abs(swap @ emb.T - emb.T).max() > 1e-12:
            raise ValueError("triplet vectors must span the symmetric subspace")
        emb.setflags(write=False)
        object.__setattr__(self, "embedding", emb)

    def measurement_vectors(self) -> np.ndarray:
        """Complete orthonormal basis: the three triplet vectors plus the singlet."""
        return np.vstack([self.embedding, SINGLET_KET])


TRIPLET_BASIS = TripletBasis()


def qutrit_cycle(power: int) -> np.ndarray:
    """Power of the cyclic shift T mapping |m> to |m-1 mod 3> on the qutrit."""
    t = np.zeros((3, 3), dtype=complex)
    t[0, 1] = t[1, 2] = t[2, 0] = 1
    return np.linalg.matrix_power(t, power % 3)


def controlled_cycle() -> np.ndarray:
    """9x9 block-diagonal sum_k |k><k| (x) T^k; control is the first factor."""
    out = np.zeros((9, 9), dtype=complex)
    for k in range(3):
        out[3 * k : 3 * k + 3, 3 * k : 3 * k + 3] = qutrit_cycle(k)
    return out


def qutrit_fourier() -> np.ndarray:
    """Discrete Fourier transform on the qutrit: F[j,k] = e^{2 pi i jk/3}/sqrt3."""
    j, k = np.meshgrid(np.arange(3), np.arange(3), indexing="ij")
    return np.exp(2j * np.pi * j * k / 3) / np.sqrt(3)


def triplet_phase(k: int) -> np.ndarray:
    """Diagonal correction cancelling the phase e^{2 pi i k m/3} on |m>."""
    m = np.arange(3)
    return np.diag(np.exp(-2j * np.pi * (k % 3) * m / 3))


def embed_triplet(op3: np.ndarray) -> np.ndarray:
    """Extend a qutrit operator to two qubits, acting as identity on the singlet."""
    op3 = np.asarray(op3, dtype=complex)
    if op3.shape != (3, 3):
        raise ValueError(f"expected a 3x3 operator, got {op3.shape}")
    v = TRIPLET_KETS.T  # 4x3 isometry
    return v @ op3 @ v.conj().T + np.outer(SINGLET_KET, SINGLET_KET.conj())


def embed_triplet_pair(op9: np.ndarray) -> np.ndarray:
    """Extend an operator on two qutrits to two qubit pairs.

    Acts as ``op9`` on the symmetric (x) symmetric subspace and as identity on
    the orthogonal complement.
    """
    op9 = np.asarray(op9, dtype=complex)
    if op9.shape != (9, 9):
        raise ValueError(f"expected a 9x9 operator, got {op9.shape}")
    v2 = np.kron(TRIPLET_KETS.T, TRIPLET_KETS.T)  # 16x9 isometry
    return v2 @ op9 @ v2.conj().T + (np.eye(16) - v2 @ v2.conj().T)


# ---------------------------------------------------------------------------
# linear optics


def pbs_cnot() -> np.ndarray:
    """CNOT between polarization (control, H=no flip) and path (target)."""
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = out[1, 1] = 1  # |H>|u> -> |H>|u'>, |H>|d> -> |H>|d'>
    out[3, 2] = out[2, 3] = 1  # |V>|u> -> |V>|d'>, |V>|d> -> |V>|u'>
    return out


class WaveplateKind(Enum):
    HWP = "half-wave"
    QWP = "quarter-wave"


@dataclass(frozen=True)
class WaveplateSpec:
    """A wave plate with its optical axis at the given angle in degrees."""

    kind: WaveplateKind
    axis_angle_deg: float


def _axis_rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


def waveplate(spec: WaveplateSpec) -> np.ndarray:
    """Jones matrix of a wave plate.

    HWP(theta) has eigenvalues {1, -1} along axes at theta, so HWP(45deg) is
    sigma_x and HWP(0deg) is sigma_z.  QWP(theta) has eigenvalues {1, i} up to
    a global phase.
    """
    theta = np.deg2rad(spec.axis_angle_deg)
    r = _axis_rotation(theta)
    if spec.kind is WaveplateKind.HWP:
        core = np.diag([1.0 + 0j, -1.0 + 0j])
    else:
        core = np.diag([1.0 + 0j, -1j])
    jones = r @ core @ r.conj().T
    if np.abs(jones.conj().T @ jones - np.eye(2)).max() > 1e-12:
        raise ValueError("wave plate Jones matrix failed the unitarity check")
    return jones


def commuting_rotation_waveplates(phi: float) -> tuple[WaveplateSpec, ...]:
    """QWP-HWP-QWP triple realizing the commuting rotation at angle phi.

    Both quarter-wave plates sit at 45deg; the half-wave plate sits at
    phi/4 - 45deg, which makes the sandwich equal commuting_rotation(phi) up
    to a global phase for every phi.
    """
    hwp_deg = np.rad2deg(phi) / 4 - 45.0
    return (
        WaveplateSpec(WaveplateKind.QWP, 45.0),
        WaveplateSpec(WaveplateKind.HWP, hwp_deg),
        WaveplateSpec(WaveplateKind.QWP, 45.0),
    )
