"""Dephasing noise model and single-qubit quantum process tomography.

The noise model mixes the intended z-rotation with its sigma_z-flipped twin,
weighted by the product of two independently measured visibilities.  Process
matrices live in the {I, sigma_x, sigma_y, sigma_z} operator basis and are
reconstructed from the four probe states H, V, D, R by exact linear inversion.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import gates
from .protocols import (
    ClassicalMessage,
    Direction,
    LocalOperation,
    MeasurementRecord,
    ResourceDeclaration,
)
from .qcore import (
    DensityMatrix,
    KrausChannel,
    Owner,
    PureState,
    apply_channel,
    apply_unitary,
    computational_basis,
    entanglement_entropy,
    measure_and_remove,
    qubit,
    tensor,
)
from .resources import ResourceLedger

PAULI_BASIS = (gates.PAULI_I, gates.PAULI_X, gates.PAULI_Y, gates.PAULI_Z)

PROBE_VECTORS = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "C": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "R": np.array([1, -1j], dtype=complex) / np.sqrt(2),
}
PROBE_ORDER = ("H", "V", "D", "R")


def probe_state(name: str) -> np.ndarray:
    try:
        return PROBE_VECTORS[name].copy()
    except KeyError:
        raise ValueError(f"unknown probe state {name!r}; use one of {sorted(PROBE_VECTORS)}")


@dataclass(frozen=True)
class DephasingParams:
    """Visibility product and rotation angle of the dephased rotation."""

    p: float
    eta: float
    phi: float

    def __post_init__(self) -> None:
        for name in ("p", "eta"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    @property
    def visibility(self) -> float:
        return self.p * self.eta


def dephasing_channel(params: DephasingParams) -> KrausChannel:
    """Two-operator channel mixing the rotation with its sigma_z twin."""
    pe = params.visibility
    u = gates.commuting_rotation(params.phi)
    k_keep = math.sqrt((1.0 + pe) / 2.0) * u
    k_flip = math.sqrt((1.0 - pe) / 2.0) * u @ gates.PAULI_Z
    return KrausChannel((k_keep, k_flip))


def visibility_dephasing(visibility: float) -> KrausChannel:
    """The pure dephasing factor {I, sigma_z} at the given visibility."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    k0 = math.sqrt((1.0 + visibility) / 2.0) * gates.PAULI_I
    k1 = math.sqrt((1.0 - visibility) / 2.0) * gates.PAULI_Z
    return KrausChannel((k0, k1))


def dephased_output_closed_form(params: DephasingParams, amplitudes) -> np.ndarray:
    """Explicit 2x2 output matrix of the dephased rotation on a pure input.

    Populations are untouched; the coherences shrink by the visibility product
    and pick up the rotation phase.
    """
    a, b = np.asarray(amplitudes, dtype=complex)
    pe = params.visibility
    phase = np.exp(1j * params.phi)
    return np.array(
        [
            [a * a.conjugate(), pe * a * b.conjugate() * phase],
            [pe * a.conjugate() * b / phase, b * b.conjugate()],
        ]
    )


# ---------------------------------------------------------------------------
# process matrices


@dataclass(frozen=True)
class ChiMatrix:
    """4x4 Hermitian process matrix in the {I, X, Y, Z} operator basis."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise ValueError(f"process matrix must be 4x4, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-10:
            raise ValueError("process matrix must be Hermitian within 1e-10")
        if np.linalg.eigvalsh(m).min() < -1e-10:
            raise ValueError("process matrix must be positive semidefinite within 1e-10")
        tp = sum(
            m[i, j] * PAULI_BASIS[j].conj().T @ PAULI_BASIS[i]
            for i in range(4)
            for j in range(4)
        )
        if np.abs(tp - np.eye(2)).max() > 1e-10:
            raise ValueError("process matrix must satisfy trace preservation within 1e-10")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        out = np.zeros((2, 2), dtype=complex)
        for i in range(4):
            for j in range(4):
                out += self.matrix[i, j] * PAULI_BASIS[i] @ rho @ PAULI_BASIS[j].conj().T
        return out


def chi_from_channel(channel: KrausChannel) -> ChiMatrix:
    """Exact process matrix by expanding each Kraus operator in the Pauli basis."""
    if channel.dim != 2:
        raise ValueError("process matrices are defined for single-qubit channels")
    chi = np.zeros((4, 4), dtype=complex)
    for op in channel.operators:
        coeffs = np.array([np.trace(p.conj().T @ op) / 2.0 for p in PAULI_BASIS])
        chi += np.outer(coeffs, coeffs.conj())
    return ChiMatrix(chi)


def channel_from_chi(chi: ChiMatrix) -> KrausChannel:
    """Kraus form of a process matrix via its eigendecomposition."""
    w, v = np.linalg.eigh(chi.matrix)
    ops = []
    for j in range(4):
        if w[j] <= 1e-12:
            continue
        op = sum(v[m, j] * PAULI_BASIS[m] for m in range(4))
        ops.append(math.sqrt(w[j]) * op)
    return KrausChannel(tuple(ops))


@functools.cache
def _pauli_transfer_matrix() -> np.ndarray:
    """Columns are the row-flattened E_m (x) conj(E_n), indexed by 4m+n."""
    cols = [
        np.kron(PAULI_BASIS[m], PAULI_BASIS[n].conj()).reshape(-1)
        for m in range(4)
        for n in range(4)
    ]
    m = np.array(cols).T
    m.setflags(write=False)
    return m


def _canonical_probe_matrices() -> list[np.ndarray]:
    return [np.outer(PROBE_VECTORS[k], PROBE_VECTORS[k].conj()) for k in PROBE_ORDER]


def qpt_reconstruct(pairs) -> ChiMatrix:
    """Process matrix from the action on the four probe states H, V, D, R.

    The probes are informationally complete, so plain linear inversion
    reproduces the process exactly when the outputs are exact; Hermiticity is
    enforced by symmetrization afterwards.
    """
    pairs = list(pairs)
    if len(pairs) != 4:
        raise ValueError("expected exactly four (input, output) pairs")
    canon = _canonical_probe_matrices()
    in_cols, out_cols = [], []
    for k, (rho_in, rho_out) in enumerate(pairs):
        m_in = rho_in.matrix if isinstance(rho_in, DensityMatrix) else np.asarray(rho_in)
        m_out = rho_out.matrix if isinstance(rho_out, DensityMatrix) else np.asarray(rho_out)
        if m_in.shape != (2, 2) or m_out.shape != (2, 2):
            raise ValueError("probe pairs must be single-qubit density matrices")
        if np.abs(m_in - canon[k]).max() > 1e-10:
            raise ValueError(
                f"probe #{k} must be the canonical {PROBE_ORDER[k]} state"
            )
        in_cols.append(m_in.reshape(-1))
        out_cols.append(m_out.reshape(-1))
    in_mat = np.array(in_cols).T
    out_mat = np.array(out_cols).T
    superop = out_mat @ np.linalg.inv(in_mat)
    chi_vec = np.linalg.solve(_pauli_transfer_matrix(), superop.reshape(-1))
    chi = chi_vec.reshape(4, 4)
    chi = (chi + chi.conj().T) / 2.0
    return ChiMatrix(chi)


def chi_csv(chi: ChiMatrix) -> str:
    """CSV export: 4x4 real block, 4x4 imaginary block, then long format."""
    lines = ["# chi real part"]
    for row in chi.matrix.real:
        lines.append(",".join(repr(float(x)) for x in row))
    lines.append("# chi imaginary part")
    for row in chi.matrix.imag:
        lines.append(",".join(repr(float(x)) for x in row))
    lines.append("# long format")
    lines.append("row,col,re,im")
    for r, c, re, im in chi_long_rows(chi):
        lines.append(f"{r},{c},{re!r},{im!r}")
    return "\n".join(lines) + "\n"


def chi_long_rows(chi: ChiMatrix) -> list[tuple[int, int, float, float]]:
    """Chart-ready (row, col, re, im) tuples in row-major order."""
    return [
        (r, c, float(chi.matrix[r, c].real), float(chi.matrix[r, c].imag))
        for r in range(4)
        for c in range(4)
    ]


# ---------------------------------------------------------------------------
# average fidelity


def dephasing_average_fidelity(visibility: float) -> float:
    """Bloch-sphere average fidelity of the dephased rotation: (2 + pe)/3."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {visibility!r}")
    return (2.0 + visibility) / 3.0


def _dephasing_structure(channel: KrausChannel, u: np.ndarray) -> float:
    """Return the visibility if the channel is a dephasing-type twin of u."""
    ops = [op for op in channel.operators if np.linalg.norm(op) > 1e-12]
    if not 1 <= len(ops) <= 2:
        raise ValueError("closed form requires a dephasing-type channel")
    weights = [np.linalg.norm(op) / math.sqrt(2.0) for op in ops]
    unitary_part = None
    flip_part = None
    for op, c in zip(ops, weights):
        w = op / c
        if np.abs(w.conj().T @ w - np.eye(2)).max() > 1e-9:
            raise ValueError("closed form requires unitary Kraus directions")
        if abs(abs(np.trace(w.conj().T @ u)) / 2.0 - 1.0) < 1e-9:
            unitary_part = (w, c)
        else:
            flip_part = (w, c)
    if unitary_part is None:
        raise ValueError("closed form requires one Kraus operator along the target unitary")
    if flip_part is None:
        return 1.0
    w, c1 = unitary_part
    g = w.conj().T @ flip_part[0]
    g2 = g @ g
    scale = np.trace(g2) / 2.0
    if (
        abs(abs(scale) - 1.0) > 1e-9
        or np.abs(g2 - scale * np.eye(2)).max() > 1e-9
        or abs(np.trace(g)) > 1e-9
    ):
        raise ValueError("closed form requires a traceless involutive dephasing axis")
    return float(c1**2 - flip_part[1] ** 2)


def average_fidelity(
    channel: KrausChannel,
    u: np.ndarray,
    method: str = "closed_form",
    n_samples: int = 100_000,
    seed: int | None = None,
) -> float:
    """Average output fidelity against U over Bloch-sphere-uniform pure inputs.

    ``closed_form`` applies to dephasing-type channels and evaluates
    (2 + visibility)/3; ``sampled`` Monte-Carlo averages the exact per-state
    fidelity with a seeded generator.
    """
    u = np.asarray(u, dtype=complex)
    if channel.dim != 2 or u.shape != (2, 2):
        raise ValueError("average fidelity is defined for single-qubit channels")
    if method == "closed_form":
        return dephasing_average_fidelity(_dephasing_structure(channel, u))
    if method != "sampled":
        raise ValueError(f"method must be 'closed_form' or 'sampled', got {method!r}")
    if n_samples < 1000:
        raise ValueError("sampled mode needs at least 1000 samples")
    if seed is None:
        raise ValueError("sampled mode requires an explicit seed")
    rng = np.random.default_rng(seed)
    cos_theta = rng.uniform(-1.0, 1.0, n_samples)
    azimuth = rng.uniform(0.0, 2.0 * np.pi, n_samples)
    half = np.arccos(cos_theta) / 2.0
    states = np.stack([np.cos(half), np.exp(1j * azimuth) * np.sin(half)], axis=1)
    targets = states @ u.T
    total = np.zeros(n_samples)
    for op in channel.operators:
        amp = np.einsum("ni,ij,nj->n", targets.conj(), op, states)
        total += np.abs(amp) ** 2
    return float(total.mean())


# ---------------------------------------------------------------------------
# full optical pipeline


@dataclass(frozen=True)
class OpticalExperimentReport:
    """Outputs of the photonic remote-rotation pipeline with dephasing."""

    params: DephasingParams
    input_amplitudes: np.ndarray
    branch_outputs: tuple[DensityMatrix, ...]
    output: DensityMatrix
    closed_form: np.ndarray
    max_closed_form_deviation: float
    chi: ChiMatrix
    ledger: ResourceLedger
    steps: tuple


def _controlled_flip_in_up_path() -> np.ndarray:
    """sigma_x on polarization only in the up path: acts on (path, polarization)."""
    out = np.zeros((4, 4), dtype=complex)
    out[0, 1] = out[1, 0] = 1.0  # path u: flip polarization
    out[2, 2] = out[3, 3] = 1.0  # path d: leave it
    return out


def _preparation_unitary(amplitudes: np.ndarray) -> np.ndarray:
    a, b = amplitudes
    return np.array([[a, -b.conjugate()], [b, a.conjugate()]])


def polarization_path_entangled_state() -> PureState:
    """The shared polarization-path resource prepared from the photon pair.

    Splitting photon B at the first beam splitter and flipping the up-path
    polarization turns the polarization-entangled pair into a Bell state
    between Alice's polarization and Bob's path, with Bob's polarization
    reset to H.
    """
    pol_a, path_b, pol_b = qubit("1", Owner.ALICE), qubit("2", Owner.BOB), qubit("3", Owner.BOB)
    pair = PureState(
        (pol_a, pol_b), np.array([0, 1, 1, 0], dtype=complex) / np.sqrt(2)
    )
    state = tensor(pair, PureState((path_b,), np.array([0, 1], dtype=complex)))
    state = apply_unitary(state, gates.pbs_cnot(), ["3", "2"])
    return apply_unitary(state, _controlled_flip_in_up_path(), ["2", "3"])


def optical_experiment_sim(
    params: DephasingParams, psi: PureState
) -> OpticalExperimentReport:
    """Simulate the photonic pipeline of the remote rotation, with dephasing.

    Encodes Bob's polarization qubit onto the shared half via the second beam
    splitter, performs the rotation on Alice's photon with the wave-plate
    sandwich, decodes with her diagonal measurement, and finally applies the
    visibility dephasing.  Every branch must reproduce the closed-form output.
    """
    if len(psi.register) != 1 or psi.register[0].dimension != 2:
        raise ValueError("expected a single-qubit polarization state")
    base = polarization_path_entangled_state()
    prep = _preparation_unitary(psi.amplitudes)
    state = apply_unitary(base, prep, ["3"])

    ebits = entanglement_entropy(state, ["1"])
    ledger = ResourceLedger(ebits, 1.0, 1.0)
    declaration = ResourceDeclaration("polarization-path entangled pair", ebits)
    steps: list = [
        declaration,
        LocalOperation(Owner.BOB, "prepare polarization input in both paths", ("3",)),
        LocalOperation(Owner.BOB, "beam-splitter CNOT (encoding)", ("3", "2")),
    ]

    state = apply_unitary(state, gates.pbs_cnot(), ["3", "2"])
    plates = gates.commuting_rotation_waveplates(params.phi)
    dephaser = visibility_dephasing(params.visibility)
    dc_basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

    branch_outputs = []
    branch_steps = []
    for m1, p1, s1 in measure_and_remove(state, computational_basis(2), ["2"]):
        steps1 = list(steps)
        steps1.append(MeasurementRecord(Owner.BOB, "path readout", ("2",), m1, p1))
        steps1.append(ClassicalMessage(Direction.BOB_TO_ALICE, 2, m1))
        if m1 == 1:
            s1 = apply_unitary(s1, gates.waveplate(
                gates.WaveplateSpec(gates.WaveplateKind.HWP, 45.0)), ["1"])
            steps1.append(LocalOperation(Owner.ALICE, "half-wave plate at 45deg", ("1",)))
        for spec in plates:
            s1 = apply_unitary(s1, gates.waveplate(spec), ["1"])
            steps1.append(
                LocalOperation(
                    Owner.ALICE,
                    f"{spec.kind.value} plate at {spec.axis_angle_deg:g}deg",
                    ("1",),
                )
            )
        for m2, p2, s2 in measure_and_remove(s1, dc_basis, ["1"]):
            steps2 = list(steps1)
            steps2.append(MeasurementRecord(Owner.ALICE, "diagonal (D/C)", ("1",), m2, p2))
            steps2.append(ClassicalMessage(Direction.ALICE_TO_BOB, 2, m2))
            if m2 == 1:
                s2 = apply_unitary(s2, gates.waveplate(
                    gates.WaveplateSpec(gates.WaveplateKind.HWP, 0.0)), ["3"])
                steps2.append(LocalOperation(Owner.BOB, "half-wave plate at 0deg", ("3",)))
            rho = apply_channel(s2.to_density(), dephaser, ["3"])
            branch_outputs.append(rho)
            branch_steps.append(tuple(steps2))

    closed = dephased_output_closed_form(params, psi.amplitudes)
    deviation = max(
        float(np.abs(rho.matrix - closed).max()) for rho in branch_outputs
    )

    chi = qpt_reconstruct(_probe_pairs(params))
    return OpticalExperimentReport(
        params=params,
        input_amplitudes=psi.amplitudes,
        branch_outputs=tuple(branch_outputs),
        output=branch_outputs[0],
        closed_form=closed,
        max_closed_form_deviation=deviation,
        chi=chi,
        ledger=ledger,
        steps=tuple(branch_steps),
    )


def _probe_pairs(params: DephasingParams):
    """Run the pipeline on the four probes and pair inputs with outputs."""
    pairs = []
    label = (qubit("3", Owner.BOB),)
    for name in PROBE_ORDER:
        vec = PROBE_VECTORS[name]
        report_input = PureState(label, vec)
        rho_in = report_input.to_density()
        rho_out = _pipeline_output(params, report_input)
        pairs.append((rho_in, rho_out))
    return pairs


def _pipeline_output(params: DephasingParams, psi: PureState) -> DensityMatrix:
    """First-branch dephased output of the optical pipeline for one input."""
    base = polarization_path_entangled_state()
    state = apply_unitary(base, _preparation_unitary(psi.amplitudes), ["3"])
    state = apply_unitary(state, gates.pbs_cnot(), ["3", "2"])
    m1, p1, s1 = measure_and_remove(state, computational_basis(2), ["2"])[0]
    for spec in gates.commuting_rotation_waveplates(params.phi):
        s1 = apply_unitary(s1, gates.waveplate(spec), ["1"])
    dc_basis = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    m2, p2, s2 = measure_and_remove(s1, dc_basis, ["1"])[0]
    return apply_channel(s2.to_density(), visibility_dephasing(params.visibility), ["3"])
