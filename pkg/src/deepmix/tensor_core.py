"""Dense complex linear algebra on qubit registers.

States, operators, gates, partial traces, eigenvalue utilities and random
sampling primitives. Conventions used throughout the package:

* Qubit index 0 is the most significant bit of the basis index, so for a
  register of n qubits the computational basis state |b_0 b_1 ... b_{n-1}>
  sits at index sum_j b_j * 2**(n-1-j).
* Bit value 0 corresponds to Pauli-Z eigenvalue +1 (spin s_j = 1 - 2 b_j).
* Global phases are never compared; state comparisons go through density
  matrices or fidelities.

All functions are pure: they take explicit inputs (plus an explicit
numpy Generator where randomness is involved) and return new values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from . import config
from .errors import BudgetError

# Atol for "is a quantum state / density matrix" checks.
STATE_ATOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class QubitRegister:
    """A labeled register of qubits; site 0 is the leftmost chain site."""

    n_qubits: int

    def __post_init__(self) -> None:
        if self.n_qubits < 0:
            raise ValueError(f"n_qubits must be non-negative, got {self.n_qubits}")
        if self.n_qubits > config.MAX_STATE_QUBITS:
            raise BudgetError(
                f"{self.n_qubits} qubits exceeds the statevector cap of "
                f"{config.MAX_STATE_QUBITS}"
            )

    @property
    def dimension(self) -> int:
        return 1 << self.n_qubits

    @property
    def sites(self) -> range:
        return range(self.n_qubits)


@dataclass
class StateVector:
    """A normalized pure state on a qubit register."""

    register: QubitRegister
    amps: np.ndarray

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.shape != (self.register.dimension,):
            raise ValueError(
                f"expected {self.register.dimension} amplitudes, "
                f"got shape {self.amps.shape}"
            )

    @property
    def n_qubits(self) -> int:
        return self.register.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def check_normalized(self, atol: float = STATE_ATOL) -> None:
        n = self.norm()
        if abs(n - 1.0) > atol:
            raise ValueError(f"state norm {n} deviates from 1 beyond {atol}")

    def density(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())


@dataclass
class UnnormalizedStateVector:
    """A projected state component together with its squared norm.

    Carrying the squared norm explicitly lets callers detect
    zero-probability measurement outcomes without dividing by ~0.
    """

    register: QubitRegister
    amps: np.ndarray
    norm_sq: float

    @property
    def n_qubits(self) -> int:
        return self.register.n_qubits

    def normalized(self) -> StateVector:
        if self.norm_sq <= 0.0:
            raise ValueError("cannot normalize a zero-probability component")
        return StateVector(self.register, self.amps / np.sqrt(self.norm_sq))


def state_from_amplitudes(amps: np.ndarray) -> StateVector:
    """Wrap a flat amplitude array (length 2**n) as a StateVector."""
    amps = np.asarray(amps, dtype=complex)
    n = _qubit_count(amps.shape[0])
    return StateVector(QubitRegister(n), amps)


def basis_state(n_qubits: int, bits: Sequence[int] | str) -> StateVector:
    bits = [int(b) for b in bits]
    if len(bits) != n_qubits:
        raise ValueError("bit count does not match register size")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[basis_index(bits)] = 1.0
    return StateVector(QubitRegister(n_qubits), amps)


def product_state(single_qubit_states: Sequence[np.ndarray]) -> StateVector:
    """Tensor product of per-site qubit states, site 0 leftmost."""
    amps = np.array([1.0], dtype=complex)
    for v in single_qubit_states:
        v = np.asarray(v, dtype=complex)
        if v.shape != (2,):
            raise ValueError("each site state must be a 2-vector")
        amps = np.kron(amps, v)
    return StateVector(QubitRegister(len(single_qubit_states)), amps)


def basis_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (b & 1)
    return idx


def bits_of(index: int, n_qubits: int) -> tuple[int, ...]:
    return tuple((index >> (n_qubits - 1 - j)) & 1 for j in range(n_qubits))


def _qubit_count(dimension: int) -> int:
    n = int(dimension).bit_length() - 1
    if dimension <= 0 or (1 << n) != dimension:
        raise ValueError(f"dimension {dimension} is not a power of two")
    return n


# ---------------------------------------------------------------------------
# Operator utilities
# ---------------------------------------------------------------------------


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the left factor on the slow (leading) index."""
    a = np.asarray(a)
    b = np.asarray(b)
    out_dim = a.shape[0] * b.shape[0]
    if out_dim > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"kron output dimension {out_dim} exceeds the operator cap "
            f"{config.MAX_OPERATOR_DIM}"
        )
    return np.kron(a, b)


def apply_gate(state: StateVector, gate: np.ndarray, targets: Sequence[int]) -> StateVector:
    """Apply a 2**m x 2**m gate to m target qubits.

    targets[0] addresses the most significant bit of the gate's own index.
    """
    targets = list(targets)
    n = state.n_qubits
    m = len(targets)
    gate = np.asarray(gate, dtype=complex)
    if gate.shape != (1 << m, 1 << m):
        raise ValueError(
            f"gate shape {gate.shape} does not match {m} target qubits"
        )
    if len(set(targets)) != m:
        raise ValueError(f"repeated target in {targets}")
    for t in targets:
        if not 0 <= t < n:
            raise ValueError(f"target {t} outside register of {n} qubits")

    tensor = state.amps.reshape((2,) * n)
    tensor = np.moveaxis(tensor, targets, range(m))
    mat = tensor.reshape(1 << m, -1)
    mat = gate @ mat
    tensor = mat.reshape((2,) * n)
    tensor = np.moveaxis(tensor, range(m), targets)
    return StateVector(state.register, np.ascontiguousarray(tensor).reshape(-1))


def apply_diagonal_phases(
    state: StateVector,
    phase_per_basis: Callable[[np.ndarray], np.ndarray] | np.ndarray,
) -> StateVector:
    """Multiply amplitude[b] by exp(-i * phase(b)).

    phase_per_basis is either a precomputed real array over all basis
    indices or a vectorized callable mapping an index array to phases.
    """
    dim = state.register.dimension
    if callable(phase_per_basis):
        phases = np.asarray(phase_per_basis(np.arange(dim)), dtype=float)
    else:
        phases = np.asarray(phase_per_basis, dtype=float)
    if phases.shape != (dim,):
        raise ValueError(f"expected {dim} phases, got shape {phases.shape}")
    return StateVector(state.register, state.amps * np.exp(-1j * phases))


def conditional_component(
    state: StateVector, measured: Sequence[int], outcome: Sequence[int] | str
) -> UnnormalizedStateVector:
    """Project measured qubits onto a bitstring outcome.

    Returns (I_rest (x) <z|) |psi> on the remaining qubits; the squared
    norm equals the outcome probability. Remaining qubits keep their
    original relative order.
    """
    measured = list(measured)
    bits = [int(b) for b in outcome]
    if len(bits) != len(measured):
        raise ValueError(
            f"outcome length {len(bits)} does not match {len(measured)} measured qubits"
        )
    n = state.n_qubits
    for q in measured:
        if not 0 <= q < n:
            raise ValueError(f"measured qubit {q} outside register")
    if len(set(measured)) != len(measured):
        raise ValueError(f"repeated measured qubit in {measured}")

    tensor = state.amps.reshape((2,) * n)
    indexer: list = [slice(None)] * n
    for q, b in zip(measured, bits):
        indexer[q] = b
    sub = np.ascontiguousarray(tensor[tuple(indexer)]).reshape(-1)
    reg = QubitRegister(n - len(measured))
    return UnnormalizedStateVector(reg, sub, float(np.vdot(sub, sub).real))


def partial_trace(obj: StateVector | np.ndarray, keep: Iterable[int]) -> np.ndarray:
    """Reduced density matrix over the kept qubits (ascending site order).

    Accepts a StateVector or a dense density matrix whose dimension is a
    power of two. An empty keep set yields the 1x1 matrix [[trace]].
    """
    keep = sorted(set(keep))
    if isinstance(obj, StateVector):
        n = obj.n_qubits
        _check_sites(keep, n)
        rest = [q for q in range(n) if q not in keep]
        tensor = obj.amps.reshape((2,) * n)
        tensor = np.transpose(tensor, keep + rest)
        mat = tensor.reshape(1 << len(keep), 1 << len(rest))
        return mat @ mat.conj().T

    rho = np.asarray(obj, dtype=complex)
    n = _qubit_count(rho.shape[0])
    _check_sites(keep, n)
    rest = [q for q in range(n) if q not in keep]
    tensor = rho.reshape((2,) * (2 * n))
    order = keep + rest + [n + q for q in keep] + [n + q for q in rest]
    tensor = np.transpose(tensor, order)
    d_keep = 1 << len(keep)
    d_rest = 1 << len(rest)
    tensor = tensor.reshape(d_keep, d_rest, d_keep, d_rest)
    return np.einsum("arbr->ab", tensor)


def _check_sites(sites: Sequence[int], n: int) -> None:
    for q in sites:
        if not 0 <= q < n:
            raise ValueError(f"site {q} outside register of {n} qubits")


# ---------------------------------------------------------------------------
# Hermitian eigenvalue utilities
# ---------------------------------------------------------------------------


def hermitian_eigenvalues(h: np.ndarray, herm_atol: float = 1e-8) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix, descending.

    The input is symmetrized as (H + H^dag)/2 before solving; inputs that
    deviate from Hermiticity by more than herm_atol are rejected.
    """
    h = np.asarray(h, dtype=complex)
    dev = np.max(np.abs(h - h.conj().T)) if h.size else 0.0
    if dev > herm_atol:
        raise ValueError(f"matrix deviates from Hermitian by {dev} > {herm_atol}")
    sym = (h + h.conj().T) / 2.0
    vals = np.linalg.eigvalsh(sym)
    return vals[::-1]


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix (no 1/2 factor)."""
    return float(np.sum(np.abs(hermitian_eigenvalues(a))))


def check_density_matrix(rho: np.ndarray, atol: float = STATE_ATOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > atol:
        raise ValueError(f"density matrix trace {tr} deviates from 1")
    if np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)) < -atol:
        raise ValueError("density matrix has negative eigenvalues beyond tolerance")


def spectrum_of(rho: np.ndarray) -> np.ndarray:
    """Eigenvalues of a density matrix, descending."""
    return hermitian_eigenvalues(np.asarray(rho, dtype=complex), herm_atol=1e-8)


def check_spectrum(spectrum: np.ndarray, atol: float = STATE_ATOL) -> np.ndarray:
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.ndim != 1 or spectrum.size == 0:
        raise ValueError("spectrum must be a non-empty 1-D array")
    if np.any(np.diff(spectrum) > 1e-12):
        raise ValueError("spectrum must be sorted descending")
    if np.min(spectrum) < -1e-12 or np.max(spectrum) > 1.0 + 1e-12:
        raise ValueError("spectrum entries must lie in [0, 1]")
    if abs(np.sum(spectrum) - 1.0) > atol:
        raise ValueError(f"spectrum sums to {np.sum(spectrum)}, expected 1")
    return spectrum


def density_sqrt(rho: np.ndarray, neg_tol: float = 1e-8) -> np.ndarray:
    """Hermitian square root with tiny negative eigenvalues clipped at 0."""
    rho = np.asarray(rho, dtype=complex)
    sym = (rho + rho.conj().T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    if vals.min() < -neg_tol:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {vals.min()}")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


# ---------------------------------------------------------------------------
# Random sampling primitives
# ---------------------------------------------------------------------------


def haar_state(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-random unit vector (complex Gaussian, normalized)."""
    return haar_state_batch(dimension, 1, rng)[0]


def haar_state_batch(dimension: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """n Haar-random unit vectors as rows of an (n, dimension) array."""
    if dimension < 1:
        raise ValueError("dimension must be positive")
    z = rng.standard_normal((n, dimension)) + 1j * rng.standard_normal((n, dimension))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary(dimension: int, rng: np.random.Generator) -> np.ndarray:
    """A Haar-distributed unitary via Ginibre + QR.

    The QR phases are fixed using the diagonal of the triangular factor,
    which makes the distribution exactly Haar rather than merely unitary.
    """
    if dimension < 1:
        raise ValueError("dimension must be positive")
    if dimension > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"unitary dimension {dimension} exceeds the operator cap "
            f"{config.MAX_OPERATOR_DIM}"
        )
    z = rng.standard_normal((dimension, dimension)) + 1j * rng.standard_normal(
        (dimension, dimension)
    )
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def ginibre_density(dimension: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """A random density matrix rho = G G^dag / Tr(G G^dag), G complex Gaussian.

    G has shape (dimension, rank), so rho has the requested rank almost
    surely; rank = dimension gives the Hilbert-Schmidt measure.
    """
    if rank < 1:
        raise ValueError("rank must be positive")
    if rank > dimension:
        raise ValueError(f"rank {rank} exceeds dimension {dimension}")
    g = rng.standard_normal((dimension, rank)) + 1j * rng.standard_normal(
        (dimension, rank)
    )
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def purify(rho: np.ndarray) -> StateVector:
    """Canonical purification of a qubit-register density matrix.

    Builds (I_X (x) sqrt(rho)) |Omega> with |Omega> = sum_i |i>_X |i>; the
    auxiliary register X is the leading (leftmost) tensor factor and has
    the same size as the system, so partial_trace over X returns rho.
    """
    rho = np.asarray(rho, dtype=complex)
    n = _qubit_count(rho.shape[0])
    root = density_sqrt(rho)
    # amplitude on |i>_X |j> is sqrt(rho)[j, i]
    amps = root.T.reshape(-1)
    return StateVector(QubitRegister(2 * n), amps)


# ---------------------------------------------------------------------------
# Weighted tensor powers (shared by moment accumulation and MC estimators)
# ---------------------------------------------------------------------------


def weighted_tensor_power_sum(
    mats: np.ndarray, weights: np.ndarray, k: int, chunk: int | None = None
) -> np.ndarray:
    """sum_i weights[i] * mats[i]^{(x) k} for a stack of square matrices.

    mats has shape (n, D, D); the result has shape (D**k, D**k). Work is
    chunked so the intermediate (chunk, D**k, D**k) block stays small.
    """
    mats = np.asarray(mats)
    weights = np.asarray(weights)
    n, d, _ = mats.shape
    out_dim = d**k
    if out_dim > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"tensor power dimension {out_dim} exceeds the operator cap "
            f"{config.MAX_OPERATOR_DIM}"
        )
    if chunk is None:
        chunk = max(1, (1 << 22) // (out_dim * out_dim))
    acc = np.zeros((out_dim, out_dim), dtype=complex)
    for start in range(0, n, chunk):
        block = mats[start : start + chunk]
        w = weights[start : start + chunk]
        t = block
        for _ in range(k - 1):
            m, p, q = t.shape
            t = np.einsum("nab,ncd->nacbd", t, block).reshape(m, p * d, q * d)
        acc += np.tensordot(w, t, axes=(0, 0))
    return acc
