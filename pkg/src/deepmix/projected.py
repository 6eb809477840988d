"""Projected ensembles: conditional states, moments and moment distances.

A projected ensemble is the weighted family of conditional states on
subsystem A induced by computational-basis measurements on a disjoint
subsystem B. Two construction routes are provided and must agree: directly
from a density matrix, and from a purification whose auxiliary register is
traced out per outcome. Outcomes are enumerated densely over all 2**|B|
bitstrings; outcomes below a probability floor are pruned (a
zero-probability conditional state is a 0/0) and the remaining weights are
renormalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import config
from .ensembles import MomentOperator
from .errors import BudgetError
from .tensor_core import (
    StateVector,
    haar_unitary,
    trace_norm,
    weighted_tensor_power_sum,
)

PRUNE_THRESHOLD = 1e-14


@dataclass
class ProjectedEnsemble:
    """Weighted conditional states {p(z), rho_A(z)} over measurement outcomes.

    outcomes[i] is the basis index of the i-th retained bitstring over the
    measured sites in ascending site order (first measured site = most
    significant bit), which is what makes the two construction routes
    comparable entry by entry.
    """

    local_dim: int
    weights: np.ndarray
    states: np.ndarray
    outcomes: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float)
        self.states = np.asarray(self.states, dtype=complex)
        self.outcomes = np.asarray(self.outcomes, dtype=np.int64)
        if self.states.shape != (
            self.weights.shape[0],
            self.local_dim,
            self.local_dim,
        ):
            raise ValueError("states shape does not match weights and local_dim")
        if np.any(self.weights < 0.0):
            raise ValueError("negative ensemble weight")
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"ensemble weights sum to {total}, expected 1")

    def entries(self) -> Iterator[tuple[float, np.ndarray]]:
        for w, rho in zip(self.weights, self.states):
            yield float(w), rho

    def __len__(self) -> int:
        return self.weights.shape[0]


def _split_sites(groups: Sequence[Sequence[int]], n_qubits: int) -> list[list[int]]:
    """Validate that the site groups are disjoint and cover the register."""
    out = [sorted(int(q) for q in g) for g in groups]
    flat = [q for g in out for q in g]
    if sorted(flat) != list(range(n_qubits)):
        raise ValueError(
            f"site groups {out} must disjointly cover all {n_qubits} qubits"
        )
    return out


def _finalize(
    local_dim: int, raw_states: np.ndarray, probs: np.ndarray
) -> ProjectedEnsemble:
    keep = probs > PRUNE_THRESHOLD
    probs = probs[keep]
    states = raw_states[keep] / probs[:, None, None]
    weights = probs / np.sum(probs)
    outcomes = np.flatnonzero(keep)
    return ProjectedEnsemble(local_dim, weights, states, outcomes)


def pe_from_density(
    rho: np.ndarray, a_sites: Sequence[int], b_sites: Sequence[int]
) -> ProjectedEnsemble:
    """Projected ensemble of a density matrix: rho_A(z) = Tr_B[Pi_z rho]/p(z)."""
    rho = np.asarray(rho, dtype=complex)
    n = int(rho.shape[0]).bit_length() - 1
    if (1 << n) != rho.shape[0]:
        raise ValueError("density matrix dimension must be a power of two")
    a_sites, b_sites = _split_sites([a_sites, b_sites], n)
    _check_outcome_budget(len(b_sites))
    d_a = 1 << len(a_sites)
    d_b = 1 << len(b_sites)
    tensor = rho.reshape((2,) * (2 * n))
    order = a_sites + b_sites + [n + q for q in a_sites] + [n + q for q in b_sites]
    tensor = np.transpose(tensor, order).reshape(d_a, d_b, d_a, d_b)
    raw = np.einsum("azbz->zab", tensor)
    probs = np.einsum("zaa->z", raw).real
    if abs(np.sum(probs) - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {np.sum(probs)}")
    return _finalize(d_a, raw, probs)


def pe_from_purification(
    psi: StateVector,
    x_sites: Sequence[int],
    a_sites: Sequence[int],
    b_sites: Sequence[int],
) -> ProjectedEnsemble:
    """Projected ensemble of a purified state.

    For each outcome z on B, the weight is the squared norm of the
    conditional component and the state is the partial trace over the
    auxiliary register X of the normalized conditional state. Agrees with
    pe_from_density applied to the reduced density matrix on A u B.
    """
    n = psi.n_qubits
    x_sites, a_sites, b_sites = _split_sites([x_sites, a_sites, b_sites], n)
    _check_outcome_budget(len(b_sites))
    d_x = 1 << len(x_sites)
    d_a = 1 << len(a_sites)
    d_b = 1 << len(b_sites)
    tensor = psi.amps.reshape((2,) * n)
    tensor = np.transpose(tensor, x_sites + a_sites + b_sites)
    tensor = tensor.reshape(d_x, d_a, d_b)
    raw = np.einsum("xaz,xbz->zab", tensor, tensor.conj())
    probs = np.einsum("zaa->z", raw).real
    if abs(np.sum(probs) - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {np.sum(probs)}")
    return _finalize(d_a, raw, probs)


def _check_outcome_budget(n_b: int) -> None:
    if n_b > config.MAX_DENSE_OUTCOME_QUBITS:
        raise BudgetError(
            f"|B| = {n_b} exceeds the dense outcome-enumeration cap "
            f"{config.MAX_DENSE_OUTCOME_QUBITS}"
        )


def pe_moment(ens: ProjectedEnsemble, k: int) -> MomentOperator:
    """k-th ensemble moment sum_z p(z) rho_A(z)^{(x)k}."""
    if k < 1:
        raise ValueError("k must be positive")
    mat = weighted_tensor_power_sum(ens.states, ens.weights, k)
    return MomentOperator(k, ens.local_dim, mat).validate(
        herm_atol=1e-9, psd_atol=1e-9, trace_atol=1e-9
    )


def pe_delta(m1: MomentOperator, m2: MomentOperator) -> float:
    """Trace distance between two moment operators of matching shape."""
    if (m1.k, m1.local_dim) != (m2.k, m2.local_dim):
        raise ValueError(
            f"moment shapes differ: k={m1.k},D={m1.local_dim} vs "
            f"k={m2.k},D={m2.local_dim}"
        )
    return trace_norm(m1.matrix - m2.matrix)


@dataclass
class ReferenceSamplingResult:
    """Across-unitary statistics of sampled reference-ensemble moments."""

    k: int
    mean: MomentOperator
    entry_std: np.ndarray
    n_unitaries: int

    @property
    def entry_stderr(self) -> np.ndarray:
        return self.entry_std / np.sqrt(self.n_unitaries)


def mc_reference_pe(
    spectrum: np.ndarray,
    a_sites: Sequence[int],
    b_sites: Sequence[int],
    n_unitaries: int,
    rng: np.random.Generator,
    k_list: Sequence[int] = (2,),
) -> dict[int, ReferenceSamplingResult]:
    """Empirical reference ensemble from sampled global unitaries.

    Draws Haar unitaries on the full A u B space, scrambles a state with
    the given eigenvalue spectrum, and computes the projected-ensemble
    moments per unitary. Returns, for each requested k, the across-unitary
    mean moment and the across-unitary standard deviation of every entry
    (the concentration diagnostic: the spread shrinks as the total
    dimension grows).
    """
    n = len(a_sites) + len(b_sites)
    a_sites, b_sites = _split_sites([a_sites, b_sites], n)
    dim = 1 << n
    if dim > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"total dimension {dim} exceeds the operator cap "
            f"{config.MAX_OPERATOR_DIM}"
        )
    _check_outcome_budget(len(b_sites))
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape[0] > dim:
        raise ValueError("spectrum has more levels than the total dimension")
    lam = spectrum[spectrum > PRUNE_THRESHOLD]
    d_a = 1 << len(a_sites)
    d_b = 1 << len(b_sites)

    sums = {k: np.zeros((d_a**k,) * 2, dtype=complex) for k in k_list}
    sq_sums = {k: np.zeros((d_a**k,) * 2, dtype=float) for k in k_list}
    for _ in range(n_unitaries):
        u = haar_unitary(dim, rng)
        cols = u[:, : lam.shape[0]]
        cols = cols.reshape([2] * n + [lam.shape[0]])
        cols = np.transpose(cols, a_sites + b_sites + [n]).reshape(
            d_a, d_b, lam.shape[0]
        )
        raw = np.einsum("azl,l,bzl->zab", cols, lam, cols.conj())
        probs = np.einsum("zaa->z", raw).real
        keep = probs > PRUNE_THRESHOLD
        states = raw[keep] / probs[keep][:, None, None]
        weights = probs[keep] / np.sum(probs[keep])
        for k in k_list:
            m = weighted_tensor_power_sum(states, weights, k)
            sums[k] += m
            sq_sums[k] += np.abs(m) ** 2
    out = {}
    for k in k_list:
        mean = sums[k] / n_unitaries
        var = np.maximum(sq_sums[k] / n_unitaries - np.abs(mean) ** 2, 0.0)
        moment = MomentOperator(k, d_a, mean).validate(
            herm_atol=1e-9, psd_atol=1e-9, trace_atol=1e-9
        )
        out[k] = ReferenceSamplingResult(k, moment, np.sqrt(var), n_unitaries)
    return out
