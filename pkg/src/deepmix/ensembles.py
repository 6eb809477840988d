"""Reference-ensemble moment operators, analytic and Monte Carlo.

The limiting projected ensemble of a globally scrambled mixed state has
k-th moment

    [ sum_sigma h_sigma P(sigma) ] / [ sum_sigma h_sigma D_A**|sigma| ]

where the sum runs over the symmetric group S_k, P(sigma) permutes the k
copies of the local D_A-dimensional space, |sigma| counts cycles, and
h_sigma is the product of spectral power traces of the initial state over
the cycle lengths. Pure initial states give h_sigma = 1 and the moment
reduces to the Haar (symmetric-subspace) moment; flat rank-r spectra give
h_sigma = r**(|sigma|-k) and the moment coincides with that of the
ensemble obtained by tracing an r-dimensional factor out of Haar states
(the generalized Hilbert-Schmidt ensemble).

Monte Carlo counterparts estimate the same operators by direct sampling
and report elementwise standard errors; acceptance checks use 3-sigma
bands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import config, symm
from .errors import BudgetError
from .tensor_core import (
    check_spectrum,
    density_sqrt,
    haar_state_batch,
    hermitian_eigenvalues,
    trace_norm,
    weighted_tensor_power_sum,
)


@dataclass
class MomentOperator:
    """k-th moment of an ensemble of states on a D_A-dimensional space."""

    k: int
    local_dim: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=complex)
        dim = self.local_dim**self.k
        if self.matrix.shape != (dim, dim):
            raise ValueError(
                f"moment matrix shape {self.matrix.shape} does not match "
                f"local_dim**k = {dim}"
            )

    def validate(
        self,
        herm_atol: float = 1e-10,
        psd_atol: float = 1e-10,
        trace_atol: float = 1e-10,
    ) -> "MomentOperator":
        m = self.matrix
        herm_dev = float(np.max(np.abs(m - m.conj().T)))
        if herm_dev > herm_atol:
            raise ValueError(f"moment deviates from Hermitian by {herm_dev}")
        tr = float(np.trace(m).real)
        if abs(tr - 1.0) > trace_atol:
            raise ValueError(f"moment trace {tr} deviates from 1 beyond {trace_atol}")
        min_eig = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2.0)))
        if min_eig < -psd_atol:
            raise ValueError(f"moment has negative eigenvalue {min_eig}")
        return self


@dataclass
class MonteCarloMoment:
    """A sampled moment estimate with per-entry standard errors."""

    moment: MomentOperator
    stderr: np.ndarray
    n_samples: int


def _check_caps(local_dim: int, k: int) -> None:
    if k < 1:
        raise ValueError("k must be positive")
    if k > config.MAX_PERM_K:
        raise BudgetError(f"k = {k} exceeds the permutation cap {config.MAX_PERM_K}")
    if local_dim**k > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"moment dimension {local_dim**k} exceeds the operator cap "
            f"{config.MAX_OPERATOR_DIM}"
        )


def _perm_sum(k: int, local_dim: int, coeff_of_cycle_type) -> tuple[np.ndarray, float]:
    """Accumulate sum_sigma c(sigma) P(sigma) and sum_sigma c(sigma) D**|sigma|.

    Each permutation operator has exactly one nonzero per column, so the
    sum is accumulated via index maps without materializing dense terms.
    """
    dim = local_dim**k
    acc = np.zeros((dim, dim), dtype=complex)
    norm = 0.0
    cols = np.arange(dim)
    for sigma in symm.enumerate_sk(k):
        ct = symm.cycle_type(sigma)
        c = coeff_of_cycle_type(ct)
        acc[symm.perm_index_map(sigma, local_dim), cols] += c
        norm += c * local_dim ** len(ct)
    return acc, norm


def eref_moment(spectrum: np.ndarray, local_dim: int, k: int) -> MomentOperator:
    """Analytic k-th moment of the scrambled-reference ensemble."""
    _check_caps(local_dim, k)
    spectrum = check_spectrum(spectrum)
    traces = symm.power_traces(spectrum, k)
    acc, norm = _perm_sum(k, local_dim, lambda ct: symm.h_sigma(traces, ct))
    return MomentOperator(k, local_dim, acc / norm).validate()


def eref_second_moment(purity: float, local_dim: int) -> MomentOperator:
    """Closed form of the k = 2 reference moment: (I + p S) / (D**2 + p D)."""
    if not 0.0 < purity <= 1.0 + 1e-12:
        raise ValueError(f"purity {purity} outside (0, 1]")
    dim = local_dim**2
    _check_caps(local_dim, 2)
    swap = symm.perm_operator((1, 0), local_dim)
    mat = (np.eye(dim) + purity * swap) / (dim + purity * local_dim)
    return MomentOperator(2, local_dim, mat).validate()


def avg_purity(purity: float, local_dim: int) -> float:
    """Ensemble-averaged purity (1 + D p) / (D + p); equals 1 iff p = 1."""
    if not 0.0 < purity <= 1.0 + 1e-12:
        raise ValueError(f"purity {purity} outside (0, 1]")
    return (1.0 + local_dim * purity) / (local_dim + purity)


def haar_moment(local_dim: int, k: int) -> MomentOperator:
    """k-th Haar moment: normalized projector onto the symmetric subspace."""
    _check_caps(local_dim, k)
    acc, _ = _perm_sum(k, local_dim, lambda ct: 1.0)
    return MomentOperator(
        k, local_dim, acc / symm.rising_factorial(local_dim, k)
    ).validate()


def ghse_moment(rank_dim: int, local_dim: int, k: int) -> MomentOperator:
    """k-th moment after tracing a rank_dim factor out of Haar states."""
    if rank_dim < 1:
        raise ValueError("rank_dim must be positive")
    _check_caps(local_dim, k)
    acc, _ = _perm_sum(k, local_dim, lambda ct: float(rank_dim) ** len(ct))
    norm = sum(
        float(rank_dim * local_dim) ** len(symm.cycle_type(s))
        for s in symm.enumerate_sk(k)
    )
    return MomentOperator(k, local_dim, acc / norm).validate()


def renyi2(spectrum: np.ndarray) -> float:
    """Second Renyi entropy -ln sum lambda**2; zero iff pure."""
    spectrum = check_spectrum(spectrum)
    return float(-np.log(np.sum(spectrum**2)) + 0.0)


def delta_haar(spectrum: np.ndarray, local_dim: int, k: int) -> float:
    """Trace distance between the reference moment and the Haar moment."""
    ref = eref_moment(spectrum, local_dim, k)
    haar = haar_moment(local_dim, k)
    return trace_norm(ref.matrix - haar.matrix)


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------

_MC_CHUNK = 4096


def _mc_accumulate(
    states: np.ndarray, weights: np.ndarray, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Running sums for the weighted tensor-power mean and its variance.

    Returns (sum_i w_i s_i^{(x)k}, sum_i w_i**2 |s_i|^{(x)k elementwise}**2).
    The squared-modulus sum factorizes because each term is an elementwise
    product across the k tensor factors.
    """
    s1 = weighted_tensor_power_sum(states, weights, k, chunk=_MC_CHUNK)
    s2 = weighted_tensor_power_sum(
        np.abs(states) ** 2, weights.astype(float) ** 2, k, chunk=_MC_CHUNK
    ).real
    return s1, s2


def _mc_moment_from_sums(
    s1: np.ndarray,
    s2: np.ndarray,
    trace_sum: float,
    trace_sq_sum: float,
    n: int,
    k: int,
    local_dim: int,
) -> MonteCarloMoment:
    mean = s1 / n
    var = np.maximum(s2 / n - np.abs(mean) ** 2, 0.0)
    stderr = np.sqrt(var / n)
    moment = MomentOperator(k, local_dim, mean)
    trace_var = max(trace_sq_sum / n - (trace_sum / n) ** 2, 0.0)
    tr_stderr = float(np.sqrt(trace_var / n))
    moment.validate(
        herm_atol=1e-9,
        psd_atol=1e-9,
        trace_atol=max(1e-10, 10.0 * tr_stderr),
    )
    return MonteCarloMoment(moment, stderr, n)


def ghse_moment_mc(
    rank_dim: int,
    local_dim: int,
    k: int,
    n_samples: int,
    rng: np.random.Generator,
) -> MonteCarloMoment:
    """Sample Haar states on rank_dim * local_dim and trace out the first factor.

    Each sample contributes a trace-1 term, so this is an unbiased
    estimator of ghse_moment with unit trace per sample.
    """
    _check_caps(local_dim, k)
    dim = rank_dim * local_dim
    s1 = np.zeros((local_dim**k,) * 2, dtype=complex)
    s2 = np.zeros_like(s1, dtype=float)
    done = 0
    while done < n_samples:
        nb = min(_MC_CHUNK, n_samples - done)
        psi = haar_state_batch(dim, nb, rng).reshape(nb, rank_dim, local_dim)
        states = np.einsum("nra,nrb->nab", psi, psi.conj())
        b1, b2 = _mc_accumulate(states, np.ones(nb), k)
        s1 += b1
        s2 += b2
        done += nb
    # every sample term has unit trace by construction
    return _mc_moment_from_sums(
        s1, s2, float(n_samples), float(n_samples), n_samples, k, local_dim
    )


def scrooge_moment_mc(
    rho_xa: np.ndarray,
    trace_out: Iterable[int],
    k: int,
    n_samples: int,
    rng: np.random.Generator,
) -> MonteCarloMoment:
    """Reweighted-Haar estimator of the maximum-entropy-ensemble moment.

    Samples psi Haar on the full X u A space and averages

        D_XA * (Tr_X[sqrt(rho) |psi><psi| sqrt(rho)])^{(x)k} / q**(k-1)

    with q = <psi|rho|psi>. Each sample term has trace D_XA * q, so the
    sample-mean trace converges to 1 but fluctuates at the Monte Carlo
    scale; the returned moment is validated against a stochastic trace
    band instead of the analytic 1e-10 one.
    """
    rho_xa = np.asarray(rho_xa, dtype=complex)
    dim = rho_xa.shape[0]
    n_qubits = int(dim).bit_length() - 1
    if (1 << n_qubits) != dim:
        raise ValueError("rho_xa dimension must be a power of two")
    x_sites = sorted(set(trace_out))
    a_sites = [q for q in range(n_qubits) if q not in x_sites]
    for q in x_sites:
        if not 0 <= q < n_qubits:
            raise ValueError(f"trace_out site {q} outside register")
    d_x = 1 << len(x_sites)
    d_a = 1 << len(a_sites)
    _check_caps(d_a, k)

    root = density_sqrt(rho_xa, neg_tol=1e-8)
    # reorder so the traced factor is the leading index of each sample
    order = _basis_reorder(n_qubits, x_sites + a_sites)
    root = root[np.ix_(order, order)]

    s1 = np.zeros((d_a**k,) * 2, dtype=complex)
    s2 = np.zeros_like(s1, dtype=float)
    trace_sum = 0.0
    trace_sq_sum = 0.0
    done = 0
    while done < n_samples:
        nb = min(_MC_CHUNK, n_samples - done)
        psi = haar_state_batch(dim, nb, rng)
        v = (psi @ root.T).reshape(nb, d_x, d_a)
        states = np.einsum("nxa,nxb->nab", v, v.conj())
        q = np.einsum("naa->n", states).real
        weights = dim / q ** (k - 1)
        term_traces = dim * q
        trace_sum += float(np.sum(term_traces))
        trace_sq_sum += float(np.sum(term_traces**2))
        b1, b2 = _mc_accumulate(states, weights, k)
        s1 += b1
        s2 += b2
        done += nb
    return _mc_moment_from_sums(
        s1, s2, trace_sum, trace_sq_sum, n_samples, k, d_a
    )


def _basis_reorder(n_qubits: int, new_site_order: list[int]) -> np.ndarray:
    """Basis index map realizing a qubit reordering.

    Entry p of the result is the old basis index of the state that the
    reordered register labels p, i.e. new_amps = old_amps[map].
    """
    dim = 1 << n_qubits
    idx = np.arange(dim)
    out = np.zeros(dim, dtype=np.int64)
    for pos, site in enumerate(new_site_order):
        bit = (idx >> (len(new_site_order) - 1 - pos)) & 1
        out |= bit << (n_qubits - 1 - site)
    return out
