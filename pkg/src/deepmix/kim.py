"""Kicked Ising chain dynamics and moment-distance time series.

One Floquet period applies a layer diagonal in the computational basis
(nearest-neighbour Ising coupling J and longitudinal field g, open
boundary) followed by a transverse kick exp(-i h Y) on every chain site.
The diagonal layer acts first on kets.

Mixed initial states live on the leftmost |S| chain sites and are
represented by purification: an auxiliary register X of |S| qubits is
prepended to the chain, entangled with S, and never evolved or measured.
The remaining chain sites E carry pure product states. The projected
ensemble is read off the leftmost |A| chain sites after measuring the
rest of the chain.

At J = h = pi/4 the circuit is unitary in both space and time directions;
with X-polarized product states on E (and g not a multiple of pi/8) the
moment-distance series develops a plateau from t = |A| + |S| onward, the
finite-size remnant of an exact finite-time result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import config
from .ensembles import MomentOperator, eref_moment
from .errors import BudgetError, SolvabilityError
from .projected import pe_delta, pe_from_purification, pe_moment
from .tensor_core import (
    PLUS,
    QubitRegister,
    StateVector,
    apply_diagonal_phases,
    apply_gate,
    check_density_matrix,
    ginibre_density,
    haar_state,
    haar_unitary,
    purify,
    spectrum_of,
)

SELF_DUAL_ANGLE = math.pi / 4.0


@dataclass(frozen=True)
class KimParams:
    """Couplings of the kicked chain; angles in radians, open boundary."""

    j: float
    g: float
    h: float
    n_sites: int

    def __post_init__(self) -> None:
        if self.n_sites < 2:
            raise ValueError("n_sites must be at least 2")

    @property
    def self_dual(self) -> bool:
        return (
            abs(self.j - SELF_DUAL_ANGLE) < 1e-12
            and abs(self.h - SELF_DUAL_ANGLE) < 1e-12
        )


@dataclass
class InitialStateSpec:
    """Mixed state on the leftmost s_sites qubits, pure product elsewhere.

    rho_s is an explicit density matrix or one of the generator tags
    "ginibre:<rank>", "flat:<rank>", "pure". e_states is an explicit list
    of per-site kets for the remaining sites or one of the tags
    "plus_state", "random". Tags draw from the rng passed to
    build_initial, rho_s first, then sites in ascending order. "flat" uses
    a uniform spectrum on a random subspace and "pure" a random ket.
    """

    s_sites: int
    rho_s: np.ndarray | str
    e_states: list[np.ndarray] | str


def materialize_spec(
    spec: InitialStateSpec, n_sites: int, rng: np.random.Generator
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Resolve generator tags into a concrete rho_S and per-site kets."""
    if spec.s_sites < 0 or spec.s_sites > n_sites:
        raise ValueError(f"s_sites = {spec.s_sites} outside chain of {n_sites}")
    d_s = 1 << spec.s_sites

    if isinstance(spec.rho_s, str):
        tag, _, arg = spec.rho_s.partition(":")
        if tag == "ginibre":
            rank = int(arg) if arg else d_s
            rho_s = ginibre_density(d_s, rank, rng)
        elif tag == "flat":
            rank = int(arg) if arg else d_s
            if rank > d_s:
                raise ValueError(f"flat rank {rank} exceeds dimension {d_s}")
            frame = haar_unitary(d_s, rng)[:, :rank]
            rho_s = (frame @ frame.conj().T) / rank
        elif tag == "pure":
            v = haar_state(d_s, rng)
            rho_s = np.outer(v, v.conj())
        else:
            raise ValueError(f"unknown rho_s tag {spec.rho_s!r}")
    else:
        rho_s = np.asarray(spec.rho_s, dtype=complex)
        if rho_s.shape != (d_s, d_s):
            raise ValueError(
                f"rho_s shape {rho_s.shape} does not match {spec.s_sites} sites"
            )
        check_density_matrix(rho_s)

    n_e = n_sites - spec.s_sites
    if isinstance(spec.e_states, str):
        if spec.e_states == "plus_state":
            e_states = [PLUS.copy() for _ in range(n_e)]
        elif spec.e_states == "random":
            e_states = [haar_state(2, rng) for _ in range(n_e)]
        else:
            raise ValueError(f"unknown e_states tag {spec.e_states!r}")
    else:
        e_states = [np.asarray(v, dtype=complex) for v in spec.e_states]
        if len(e_states) != n_e:
            raise ValueError(f"expected {n_e} site states, got {len(e_states)}")
        for v in e_states:
            if v.shape != (2,) or abs(np.linalg.norm(v) - 1.0) > 1e-10:
                raise ValueError("each site state must be a normalized 2-vector")
    return rho_s, e_states


def build_initial(
    spec: InitialStateSpec, n_sites: int, rng: np.random.Generator
) -> StateVector:
    """Purified initial state on X u S u E, auxiliary register leading."""
    rho_s, e_states = materialize_spec(spec, n_sites, rng)
    return assemble_initial(rho_s, e_states, spec.s_sites, n_sites)


def assemble_initial(
    rho_s: np.ndarray, e_states: Sequence[np.ndarray], s_sites: int, n_sites: int
) -> StateVector:
    total = s_sites + n_sites
    if total > config.MAX_STATE_QUBITS:
        raise BudgetError(
            f"{total} total qubits (auxiliary + chain) exceeds the cap "
            f"{config.MAX_STATE_QUBITS}"
        )
    amps = purify(rho_s).amps if s_sites > 0 else np.array([1.0], dtype=complex)
    for v in e_states:
        amps = np.kron(amps, v)
    return StateVector(QubitRegister(total), amps)


def _kick_matrix(h: float) -> np.ndarray:
    # exp(-i h Y) is a real rotation
    c, s = math.cos(h), math.sin(h)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _ising_phases(
    params: KimParams, n_qubits: int, acting_sites: Sequence[int]
) -> np.ndarray:
    """Diagonal-layer phases sum_j J s_j s_{j+1} + g s_j over acting sites."""
    idx = np.arange(1 << n_qubits)
    spins = {}
    for q in acting_sites:
        spins[q] = 1.0 - 2.0 * ((idx >> (n_qubits - 1 - q)) & 1)
    phases = np.zeros(idx.shape[0])
    acting = list(acting_sites)
    for q in acting:
        phases += params.g * spins[q]
        if q + 1 in spins:
            phases += params.j * spins[q] * spins[q + 1]
    return phases


def floquet_step(
    state: StateVector, params: KimParams, acting_sites: Sequence[int]
) -> StateVector:
    """One Floquet period on a contiguous block of chain sites.

    The auxiliary register (any site outside acting_sites) is untouched;
    coupling terms exist only between neighbouring sites inside the block.
    """
    acting = sorted(int(q) for q in acting_sites)
    n = state.n_qubits
    for q in acting:
        if not 0 <= q < n:
            raise ValueError(f"acting site {q} outside register")
    if acting and acting != list(range(acting[0], acting[0] + len(acting))):
        raise ValueError(f"acting sites {acting} are not contiguous")

    out = apply_diagonal_phases(state, _ising_phases(params, n, acting))
    kick = _kick_matrix(params.h)
    for q in acting:
        out = apply_gate(out, kick, [q])
    return out


@dataclass
class SeriesPoint:
    t: int
    k: int
    delta: float


@dataclass
class DynamicsResult:
    """Moment-distance time series against the analytic reference moments.

    diagnostics holds one record per time step: the retained outcome count
    and, when k = 2 was requested, the ensemble-average purity read off
    the second moment.
    """

    points: list[SeriesPoint]
    references: dict[int, MomentOperator]
    diagnostics: list[dict]
    plateau_onset: int | None = None

    def delta(self, t: int, k: int) -> float:
        for p in self.points:
            if p.t == t and p.k == k:
                return p.delta
        raise KeyError((t, k))


def _run_series(
    params: KimParams,
    rho_s: np.ndarray,
    e_states: Sequence[np.ndarray],
    s_sites: int,
    a_size: int,
    t_max: int,
    k_list: Sequence[int],
) -> tuple[list[SeriesPoint], dict[int, MomentOperator], list[dict]]:
    n_sites = params.n_sites
    if not 1 <= a_size <= n_sites - 1:
        raise ValueError(f"a_size = {a_size} leaves no measured sites")
    psi = assemble_initial(rho_s, e_states, s_sites, n_sites)
    x_sites = list(range(s_sites))
    chain = [s_sites + j for j in range(n_sites)]
    a_sites = chain[:a_size]
    b_sites = chain[a_size:]

    # the pure product factor on E leaves the power traces of rho_S intact,
    # so the reference moments need only the spectrum of rho_S
    spectrum = np.clip(spectrum_of(rho_s), 0.0, None)
    spectrum = spectrum / np.sum(spectrum)
    refs = {k: eref_moment(spectrum, 1 << a_size, k) for k in k_list}

    points: list[SeriesPoint] = []
    diagnostics: list[dict] = []
    swap = None
    if 2 in k_list:
        d_a = 1 << a_size
        swap = np.eye(d_a * d_a)[
            np.arange(d_a * d_a).reshape(d_a, d_a).T.reshape(-1)
        ]
    for t in range(t_max + 1):
        if t > 0:
            psi = floquet_step(psi, params, chain)
        ens = pe_from_purification(psi, x_sites, a_sites, b_sites)
        diag = {"t": t, "n_outcomes": len(ens)}
        for k in k_list:
            moment = pe_moment(ens, k)
            points.append(SeriesPoint(t, k, pe_delta(moment, refs[k])))
            if k == 2 and swap is not None:
                diag["avg_purity"] = float(np.trace(moment.matrix @ swap).real)
        diagnostics.append(diag)
    return points, refs, diagnostics


def dynamics_run(
    params: KimParams,
    spec: InitialStateSpec,
    a_size: int,
    t_max: int,
    k_list: Sequence[int],
    rng: np.random.Generator,
) -> DynamicsResult:
    """Evolve a purified initial state and track moment distances.

    The leftmost a_size chain sites host the projected ensemble; the rest
    of the chain is measured. The reference moments use the eigenvalues of
    rho_S.
    """
    rho_s, e_states = materialize_spec(spec, params.n_sites, rng)
    points, refs, diagnostics = _run_series(
        params, rho_s, e_states, spec.s_sites, a_size, t_max, k_list
    )
    return DynamicsResult(points, refs, diagnostics)


def selfdual_run(
    g: float,
    s_size: int,
    a_size: int,
    b_size: int,
    t_max: int,
    k_list: Sequence[int],
    rho_s: np.ndarray | str,
    rng: np.random.Generator,
    e_states: list[np.ndarray] | str = "plus_state",
) -> DynamicsResult:
    """Time series at the self-dual point for the solvable state class.

    Requires X-polarized product states outside S and g away from integer
    multiples of pi/8; rejects anything else since the finite-time plateau
    statement only covers that class. The plateau begins at
    t = a_size + s_size.
    """
    if _is_multiple_of_pi_over_8(g):
        raise SolvabilityError(
            f"g = {g} is an integer multiple of pi/8; the solvable-point "
            "analysis requires g away from these values"
        )
    params = KimParams(SELF_DUAL_ANGLE, g, SELF_DUAL_ANGLE, a_size + b_size)
    spec = InitialStateSpec(s_size, rho_s, e_states)
    rho_mat, kets = materialize_spec(spec, params.n_sites, rng)
    for v in kets:
        if abs(abs(np.vdot(PLUS, v)) - 1.0) > 1e-10:
            raise SolvabilityError(
                "all sites outside S must carry X-polarized states for the "
                "solvable class; got a different site state"
            )
    points, refs, diagnostics = _run_series(
        params, rho_mat, kets, s_size, a_size, t_max, k_list
    )
    return DynamicsResult(
        points, refs, diagnostics, plateau_onset=a_size + s_size
    )


def _is_multiple_of_pi_over_8(g: float, tol: float = 1e-9) -> bool:
    ratio = g / (math.pi / 8.0)
    return abs(ratio - round(ratio)) < tol
