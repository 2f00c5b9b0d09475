"""Value-semantic linear algebra over small labeled quantum registers.

States, density matrices and channels are immutable after construction and
carry an explicit ordered register of named subsystems.  The leftmost label is
the most significant tensor factor, matching numpy's Kronecker-product order.
All derived quantities (probabilities, entropies, fidelities) are computed to
double precision; construction invariants are checked at 1e-12 and derived
equalities at 1e-10.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

ATOL_CONSTRUCT = 1e-12
ATOL_DERIVED = 1e-10
PRUNE_PROB = 1e-14


class Owner(Enum):
    """Which remote party holds a subsystem."""

    ALICE = "Alice"
    BOB = "Bob"
    SHARED = "Shared"


@dataclass(frozen=True)
class SubsystemLabel:
    """A named tensor factor of a register."""

    name: str
    dimension: int = 2
    owner: Owner = Owner.SHARED

    def __post_init__(self) -> None:
        if self.dimension not in (2, 3, 4):
            raise ValueError(
                f"subsystem dimension must be 2, 3 or 4, got {self.dimension}"
            )


def qubit(name: str, owner: Owner = Owner.SHARED) -> SubsystemLabel:
    return SubsystemLabel(name, 2, owner)


def _frozen_array(values, shape_hint: str) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.ndim == 0:
        raise ValueError(f"{shape_hint} must not be scalar")
    arr.setflags(write=False)
    return arr


def _check_register(register: Sequence[SubsystemLabel]) -> tuple[SubsystemLabel, ...]:
    reg = tuple(register)
    if not reg:
        raise ValueError("register must contain at least one subsystem")
    names = [label.name for label in reg]
    if len(set(names)) != len(names):
        raise ValueError(f"subsystem names must be unique within a register: {names}")
    return reg


def _resolve_positions(
    register: Sequence[SubsystemLabel], targets: Iterable[SubsystemLabel | str]
) -> list[int]:
    """Indices of the given subsystems, in the order the caller listed them."""
    out = []
    for t in targets:
        name = t if isinstance(t, str) else t.name
        matches = [i for i, lab in enumerate(register) if lab.name == name]
        if not matches:
            raise KeyError(f"no subsystem named {name!r} in register")
        out.append(matches[0])
    if len(set(out)) != len(out):
        raise ValueError("target subsystems must be distinct")
    return out


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over an ordered register of subsystems."""

    register: tuple[SubsystemLabel, ...]
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        reg = _check_register(self.register)
        object.__setattr__(self, "register", reg)
        amps = _frozen_array(self.amplitudes, "amplitudes")
        if amps.ndim != 1 or amps.size != self.dim:
            raise ValueError(
                f"amplitude vector must have length {self.dim}, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"state norm must be 1 within {ATOL_CONSTRUCT}, got {norm!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(label.dimension for label in self.register)

    @property
    def dim(self) -> int:
        return math.prod(label.dimension for label in self.register)

    def label(self, name: str) -> SubsystemLabel:
        for lab in self.register:
            if lab.name == name:
                return lab
        raise KeyError(f"no subsystem named {name!r} in register")

    def positions(self, targets: Iterable[SubsystemLabel | str]) -> list[int]:
        """Indices of the given subsystems, in the order the caller listed them."""
        return _resolve_positions(self.register, targets)

    def to_density(self) -> DensityMatrix:
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(self.register, rho)


@dataclass(frozen=True)
class DensityMatrix:
    """Positive unit-trace matrix over an ordered register of subsystems."""

    register: tuple[SubsystemLabel, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        reg = _check_register(self.register)
        object.__setattr__(self, "register", reg)
        mat = _frozen_array(self.matrix, "matrix")
        d = self.dim
        if mat.shape != (d, d):
            raise ValueError(f"density matrix must be {d}x{d}, got {mat.shape}")
        if np.abs(mat - mat.conj().T).max() > ATOL_CONSTRUCT:
            raise ValueError("density matrix must be Hermitian within 1e-12")
        tr = np.trace(mat).real
        if abs(tr - 1.0) > ATOL_CONSTRUCT:
            raise ValueError(f"density matrix trace must be 1 within 1e-12, got {tr!r}")
        if np.linalg.eigvalsh(mat).min() < -1e-10:
            raise ValueError("density matrix must be positive semidefinite within 1e-10")
        object.__setattr__(self, "matrix", mat)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(label.dimension for label in self.register)

    @property
    def dim(self) -> int:
        return math.prod(label.dimension for label in self.register)


@dataclass(frozen=True)
class KrausChannel:
    """Completely positive trace-preserving map given by Kraus operators."""

    operators: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(_frozen_array(op, "Kraus operator") for op in self.operators)
        if not ops:
            raise ValueError("channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ValueError("Kraus operators must be square matrices")
        if any(op.shape != shape for op in ops):
            raise ValueError("all Kraus operators must have equal shape")
        total = sum(op.conj().T @ op for op in ops)
        if np.abs(total - np.eye(shape[0])).max() > 1e-10:
            raise ValueError("Kraus operators must satisfy sum K†K = I within 1e-10")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]


@dataclass(frozen=True)
class MeasurementBranch:
    """One projective-measurement outcome with its Born probability."""

    outcome: int
    probability: float
    post_state: PureState


class BranchList(list):
    """List of measurement branches; ``pruned`` records outcomes dropped as noise."""

    def __init__(self, branches, pruned: tuple[int, ...] = ()):
        super().__init__(branches)
        self.pruned = pruned


# ---------------------------------------------------------------------------
# register-level operations


def tensor(a: PureState, b: PureState) -> PureState:
    """Kronecker product of two states on disjoint registers."""
    overlap_names = {l.name for l in a.register} & {l.name for l in b.register}
    if overlap_names:
        raise ValueError(f"registers overlap on subsystem names {sorted(overlap_names)}")
    return PureState(a.register + b.register, np.kron(a.amplitudes, b.amplitudes))


def _require_unitary(u: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"operator must be square, got shape {u.shape}")
    if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > atol:
        raise ValueError("operator must be unitary within 1e-10")
    return u


def embed_operator(
    op: np.ndarray,
    targets: Sequence[SubsystemLabel | str],
    register: Sequence[SubsystemLabel],
) -> np.ndarray:
    """Extend an operator on a subsystem subset to the full register.

    ``op`` acts on the targets in the order given; identity elsewhere.
    """
    reg = tuple(register)
    dims = [lab.dimension for lab in reg]
    n = len(reg)
    t_pos = _resolve_positions(reg, targets)
    d_t = math.prod(dims[i] for i in t_pos)
    op = np.asarray(op, dtype=complex)
    if op.shape != (d_t, d_t):
        raise ValueError(
            f"operator dimension {op.shape} does not match target dimension {d_t}"
        )
    rest = [i for i in range(n) if i not in t_pos]
    d_r = math.prod([dims[i] for i in rest]) if rest else 1
    perm = t_pos + rest
    full = np.kron(op, np.eye(d_r, dtype=complex))
    dims_perm = [dims[p] for p in perm]
    tens = full.reshape(dims_perm + dims_perm)
    pos_of = [perm.index(s) for s in range(n)]
    tens = tens.transpose(pos_of + [n + p for p in pos_of])
    d = math.prod(dims)
    return tens.reshape(d, d)


def apply_unitary(
    state: PureState,
    u: np.ndarray,
    targets: Sequence[SubsystemLabel | str] | None = None,
) -> PureState:
    """Apply a unitary to the given subsystems, identity elsewhere."""
    u = _require_unitary(u)
    if targets is None:
        targets = list(state.register)
    full = embed_operator(u, targets, state.register)
    return PureState(state.register, full @ state.amplitudes)


def _basis_matrix(basis, d_target: int) -> np.ndarray:
    vecs = np.asarray(basis, dtype=complex)
    if vecs.ndim != 2 or vecs.shape[1] != d_target or not 1 <= vecs.shape[0] <= d_target:
        raise ValueError(
            f"basis must be up to {d_target} vectors of dimension {d_target}, "
            f"got shape {vecs.shape}"
        )
    gram = vecs @ vecs.conj().T
    if np.abs(gram - np.eye(vecs.shape[0])).max() > 1e-10:
        raise ValueError("measurement basis must be orthonormal within 1e-10")
    return vecs


def _branch_contractions(state: PureState, basis, targets):
    """Yield (outcome, probability, rest_vector, d_rest, helpers) per outcome."""
    t_pos = state.positions(targets)
    dims = state.dims
    n = len(dims)
    d_t = math.prod(dims[i] for i in t_pos)
    vecs = _basis_matrix(basis, d_t)
    rest = [i for i in range(n) if i not in t_pos]
    d_r = math.prod([dims[i] for i in rest]) if rest else 1
    perm = t_pos + rest
    psi = state.amplitudes.reshape(dims).transpose(perm).reshape(d_t, d_r)
    amps = vecs.conj() @ psi  # row k = <b_k| psi, a vector on the rest
    probs = np.einsum("kr,kr->k", amps, amps.conj()).real
    if abs(probs.sum() - 1.0) > ATOL_DERIVED:
        # an orthonormal set smaller than the target space is fine only when
        # it covers the state's support
        raise ValueError(
            f"measurement basis covers probability {probs.sum():.12f}, not 1"
        )
    return t_pos, rest, perm, vecs, amps, probs


def measure_projective(
    state: PureState,
    basis,
    targets: Sequence[SubsystemLabel | str],
    mode: str = "enumerate",
    seed: int | None = None,
) -> BranchList:
    """Projective measurement of the targets in the given orthonormal basis.

    ``enumerate`` returns every branch with its Born probability and the
    renormalized post-measurement state on the full register; branches below
    1e-14 probability are dropped and recorded in ``BranchList.pruned``.
    ``sample`` returns a single branch drawn with a seeded generator.
    """
    if mode not in ("enumerate", "sample"):
        raise ValueError(f"mode must be 'enumerate' or 'sample', got {mode!r}")
    t_pos, rest, perm, vecs, amps, probs = _branch_contractions(state, basis, targets)
    dims = state.dims
    n = len(dims)
    dims_perm = [dims[p] for p in perm]
    inv = [perm.index(s) for s in range(n)]

    def post_state(k: int) -> PureState:
        rest_vec = amps[k] / np.sqrt(probs[k])
        full = np.kron(vecs[k], rest_vec).reshape(dims_perm).transpose(inv).reshape(-1)
        return PureState(state.register, full)

    kept = [k for k in range(len(probs)) if probs[k] >= PRUNE_PROB]
    pruned = tuple(k for k in range(len(probs)) if probs[k] < PRUNE_PROB)
    if mode == "sample":
        if seed is None:
            raise ValueError("sample mode requires an explicit seed")
        rng = np.random.default_rng(seed)
        weights = probs[kept] / probs[kept].sum()
        k = kept[rng.choice(len(kept), p=weights)]
        return BranchList([MeasurementBranch(k, float(probs[k]), post_state(k))], pruned)
    return BranchList(
        [MeasurementBranch(k, float(probs[k]), post_state(k)) for k in kept], pruned
    )


def measure_and_remove(
    state: PureState,
    basis,
    targets: Sequence[SubsystemLabel | str],
) -> list[tuple[int, float, PureState]]:
    """Enumerate measurement branches, dropping the measured subsystems.

    Returns (outcome, probability, state-on-remaining-register) triples; the
    measured subsystems are removed since they collapse onto a known basis
    vector.  Branches below 1e-14 probability are dropped.
    """
    t_pos, rest, perm, vecs, amps, probs = _branch_contractions(state, basis, targets)
    if not rest:
        raise ValueError("cannot remove every subsystem; measure at least one less")
    rest_register = tuple(state.register[i] for i in rest)
    out = []
    for k in range(len(probs)):
        if probs[k] < PRUNE_PROB:
            continue
        rest_vec = amps[k] / np.sqrt(probs[k])
        out.append((k, float(probs[k]), PureState(rest_register, rest_vec)))
    return out


def partial_trace(
    rho: DensityMatrix, keep: Sequence[SubsystemLabel | str]
) -> DensityMatrix:
    """Reduced density matrix on the kept subsystems (in register order)."""
    if not list(keep):
        raise ValueError("keep set must not be empty")
    keep_names = {t if isinstance(t, str) else t.name for t in keep}
    keep_pos = [i for i, lab in enumerate(rho.register) if lab.name in keep_names]
    if len(keep_pos) != len(keep_names):
        missing = keep_names - {lab.name for lab in rho.register}
        raise KeyError(f"unknown subsystems in keep set: {sorted(missing)}")
    dims = rho.dims
    n = len(dims)
    tens = rho.matrix.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep_pos]
    for count, i in enumerate(sorted(traced, reverse=True)):
        n_live = n - count
        tens = np.trace(tens, axis1=i, axis2=i + n_live)
    d_keep = math.prod(dims[i] for i in keep_pos)
    out_register = tuple(rho.register[i] for i in keep_pos)
    return DensityMatrix(out_register, tens.reshape(d_keep, d_keep))


def apply_channel(
    rho: DensityMatrix,
    channel: KrausChannel,
    targets: Sequence[SubsystemLabel | str] | None = None,
) -> DensityMatrix:
    """Apply a Kraus channel to the given subsystems of a density matrix."""
    if targets is None:
        targets = list(rho.register)
    out = np.zeros_like(rho.matrix)
    for op in channel.operators:
        full = embed_operator(op, targets, rho.register)
        out = out + full @ rho.matrix @ full.conj().T
    return DensityMatrix(rho.register, out)


def _psd_sqrt(mat: np.ndarray) -> np.ndarray:
    # eigenvalue clamping at 0 guards against tiny negative arithmetic noise
    w, v = np.linalg.eigh(mat)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: DensityMatrix, rho_prime: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(b) a sqrt(b)))^2 between two states."""
    if rho.register != rho_prime.register:
        raise ValueError("fidelity requires matching registers")
    s = _psd_sqrt(rho_prime.matrix)
    inner = _psd_sqrt(s @ rho.matrix @ s)
    val = float(np.trace(inner).real ** 2)
    return min(max(val, 0.0), 1.0)


def overlap(a: PureState, b: PureState) -> float:
    """Global-phase-invariant squared overlap |<a|b>|^2."""
    if a.register != b.register:
        raise ValueError("overlap requires matching registers")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def states_equal_up_to_phase(a: PureState, b: PureState, atol: float = ATOL_DERIVED) -> bool:
    return overlap(a, b) >= 1.0 - atol


def entanglement_entropy(
    state: PureState, cut: Sequence[SubsystemLabel | str]
) -> float:
    """Base-2 von Neumann entropy of the reduced state on one side of a cut.

    ``cut`` names one side of a bipartition of the register; the value is the
    entanglement in ebits across that cut.
    """
    cut_names = {t if isinstance(t, str) else t.name for t in cut}
    reg_names = {lab.name for lab in state.register}
    if not cut_names or not cut_names < reg_names:
        raise ValueError("cut must be a proper nonempty subset of the register")
    reduced = partial_trace(state.to_density(), sorted(cut_names))
    eigs = np.linalg.eigvalsh(reduced.matrix)
    eigs = eigs[eigs > 1e-14]
    return float(-(eigs * np.log2(eigs)).sum())


# ---------------------------------------------------------------------------
# constructors and sampling helpers


def basis_state(register: Sequence[SubsystemLabel], index: int) -> PureState:
    reg = tuple(register)
    d = math.prod(lab.dimension for lab in reg)
    if not 0 <= index < d:
        raise ValueError(f"basis index {index} out of range for dimension {d}")
    amps = np.zeros(d, dtype=complex)
    amps[index] = 1.0
    return PureState(reg, amps)


def normalized_state(register: Sequence[SubsystemLabel], amplitudes) -> PureState:
    amps = np.asarray(amplitudes, dtype=complex)
    norm = np.linalg.norm(amps)
    if norm < 1e-12:
        raise ValueError("cannot normalize a zero vector")
    return PureState(tuple(register), amps / norm)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    phases = np.diag(r).copy()
    phases /= np.abs(phases)
    return q * phases


def haar_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector of the given dimension."""
    z = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return z / np.linalg.norm(z)


def computational_basis(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)
