"""Unit tests for analytic and Monte Carlo reference-ensemble moments."""

import numpy as np
import pytest

from deepmix import ensembles as ens
from deepmix import symm
from deepmix.errors import BudgetError
from deepmix.tensor_core import (
    density_sqrt,
    ginibre_density,
    haar_state,
    haar_unitary,
    kron,
    trace_norm,
)


def two_level_spectrum(purity: float) -> np.ndarray:
    """Rank-2 spectrum [a, 1-a] with a**2 + (1-a)**2 = purity (purity >= 1/2)."""
    a = (1.0 + np.sqrt(2.0 * purity - 1.0)) / 2.0
    return np.array([a, 1.0 - a])


def flat_spectrum(rank: int) -> np.ndarray:
    return np.full(rank, 1.0 / rank)


def test_eref_moment_k1_is_maximally_mixed():
    for spec in (np.array([1.0]), flat_spectrum(4), two_level_spectrum(0.7)):
        m = ens.eref_moment(spec, 4, 1)
        np.testing.assert_allclose(m.matrix, np.eye(4) / 4, atol=1e-14)


def test_eref_moment_pure_k2():
    m = ens.eref_moment(np.array([1.0]), 2, 2)
    swap = symm.perm_operator((1, 0), 2)
    np.testing.assert_allclose(m.matrix, (np.eye(4) + swap) / 6, atol=1e-14)


def test_eref_moment_flat_quarter_purity():
    m = ens.eref_moment(flat_spectrum(4), 2, 2)
    swap = symm.perm_operator((1, 0), 2)
    np.testing.assert_allclose(m.matrix, (np.eye(4) + 0.25 * swap) / 4.5, atol=1e-14)


@pytest.mark.parametrize("purity", [0.25, 0.5, 0.9])
def test_eref_second_moment_matches_group_sum(purity):
    spec = flat_spectrum(4) if purity == 0.25 else two_level_spectrum(purity)
    assert np.sum(spec**2) == pytest.approx(purity)
    closed = ens.eref_second_moment(purity, 2)
    summed = ens.eref_moment(spec, 2, 2)
    assert np.max(np.abs(closed.matrix - summed.matrix)) < 1e-14


def test_eref_second_moment_trace_and_range():
    m = ens.eref_second_moment(0.25, 2)
    assert abs(np.trace(m.matrix).real - 1.0) < 1e-14
    with pytest.raises(ValueError):
        ens.eref_second_moment(0.0, 2)


def test_avg_purity_values():
    assert ens.avg_purity(1.0, 2) == pytest.approx(1.0)
    assert ens.avg_purity(1.0, 8) == pytest.approx(1.0)
    assert ens.avg_purity(0.25, 2) == pytest.approx(2.0 / 3.0)
    assert ens.avg_purity(0.5, 2) == pytest.approx(0.8)


def test_avg_purity_monotone_below_one():
    grid = np.linspace(0.1, 1.0, 30)
    vals = [ens.avg_purity(p, 4) for p in grid]
    assert np.all(np.diff(vals) > 0)
    assert all(v <= 1.0 for v in vals)
    assert all(v < 1.0 for v in vals[:-1])


def test_avg_purity_consistent_with_second_moment():
    swap = symm.perm_operator((1, 0), 2)
    for p in (0.25, 0.5, 0.75, 1.0):
        m = ens.eref_second_moment(p, 2)
        assert np.trace(m.matrix @ swap).real == pytest.approx(
            ens.avg_purity(p, 2), abs=1e-12
        )


def test_haar_moment_examples():
    np.testing.assert_allclose(ens.haar_moment(2, 1).matrix, np.eye(2) / 2)
    swap = symm.perm_operator((1, 0), 2)
    np.testing.assert_allclose(ens.haar_moment(2, 2).matrix, (np.eye(4) + swap) / 6)


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_haar_moment_equals_pure_eref(k):
    haar = ens.haar_moment(2, k)
    ref = ens.eref_moment(np.array([1.0]), 2, k)
    assert np.max(np.abs(haar.matrix - ref.matrix)) < 1e-14


def test_ghse_moment_rank_one_is_haar():
    for k in (1, 2, 3):
        assert np.max(np.abs(ens.ghse_moment(1, 2, k).matrix - ens.haar_moment(2, k).matrix)) < 1e-14


def test_ghse_moment_closed_form():
    swap = symm.perm_operator((1, 0), 2)
    got = ens.ghse_moment(2, 2, 2).matrix
    np.testing.assert_allclose(got, (2 * np.eye(4) + swap) / 10, atol=1e-14)


@pytest.mark.parametrize("rank", [1, 2, 4])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_ghse_equals_flat_eref(rank, k):
    ghse = ens.ghse_moment(rank, 2, k)
    ref = ens.eref_moment(flat_spectrum(rank), 2, k)
    assert np.max(np.abs(ghse.matrix - ref.matrix)) < 1e-14


def test_ghse_moment_large_rank_approaches_identity():
    deltas = [
        trace_norm(ens.ghse_moment(r, 2, 2).matrix - np.eye(4) / 4)
        for r in (2, 4, 16)
    ]
    assert deltas[0] > deltas[1] > deltas[2]


def test_moment_caps():
    with pytest.raises(BudgetError):
        ens.haar_moment(2, 8)
    with pytest.raises(BudgetError):
        ens.haar_moment(64, 3)


def test_renyi2_examples():
    assert ens.renyi2(np.array([1.0, 0.0])) == pytest.approx(0.0)
    assert ens.renyi2(flat_spectrum(8)) == pytest.approx(np.log(8))
    assert ens.renyi2(np.array([0.5, 0.5])) == pytest.approx(np.log(2))


def test_delta_haar_pure_zero():
    for k in (1, 2, 3):
        assert ens.delta_haar(np.array([1.0]), 2, k) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("purity", [0.25, 0.5, 0.75, 1.0])
def test_delta_haar_closed_form(purity):
    # eigenvalue oracle for a(I) + b(S) operators: symmetric subspace
    # multiplicity D(D+1)/2 at eigenvalue a+b, antisymmetric D(D-1)/2 at
    # a-b; for D=2 the distance reduces to (1-p)/(2+p)
    spec = (
        np.array([1.0])
        if purity == 1.0
        else flat_spectrum({0.25: 4, 0.5: 2}.get(purity, 0))
        if purity in (0.25, 0.5)
        else two_level_spectrum(purity)
    )
    got = ens.delta_haar(spec, 2, 2)
    assert got == pytest.approx((1 - purity) / (2 + purity), abs=1e-12)


def test_delta_haar_k1_zero():
    assert ens.delta_haar(flat_spectrum(4), 2, 1) == pytest.approx(0.0, abs=1e-14)


def test_unitary_covariance():
    rng = np.random.default_rng(20)
    m = ens.eref_moment(two_level_spectrum(0.8), 2, 3).matrix
    for _ in range(10):
        v = haar_unitary(2, rng)
        vk = np.kron(np.kron(v, v), v)
        comm = m @ vk - vk @ m
        assert np.max(np.abs(comm)) < 1e-10


def test_moment_validation_everywhere():
    rng = np.random.default_rng(21)
    spec = np.sort(rng.random(4))[::-1]
    spec /= spec.sum()
    for builder in (
        lambda: ens.eref_moment(spec, 2, 3),
        lambda: ens.haar_moment(4, 2),
        lambda: ens.ghse_moment(3, 2, 3),
        lambda: ens.eref_second_moment(0.6, 4),
    ):
        m = builder()
        m.validate()  # Hermitian, PSD, trace 1 at analytic tolerances


# ---------------------------------------------------------------------------
# Monte Carlo estimators
# ---------------------------------------------------------------------------


def max_z(mc, target):
    dev = np.abs(mc.moment.matrix - target)
    return np.max(dev / (mc.stderr + 1e-12))


def test_ghse_mc_rank_one_matches_haar():
    mc = ens.ghse_moment_mc(1, 2, 2, 20_000, np.random.default_rng(22))
    assert max_z(mc, ens.haar_moment(2, 2).matrix) < 5.0


def test_ghse_mc_closed_form():
    mc = ens.ghse_moment_mc(2, 2, 2, 50_000, np.random.default_rng(23))
    swap = symm.perm_operator((1, 0), 2)
    assert max_z(mc, (2 * np.eye(4) + swap) / 10) < 4.0


def test_ghse_mc_trace_one():
    mc = ens.ghse_moment_mc(2, 2, 3, 5_000, np.random.default_rng(24))
    assert abs(np.trace(mc.moment.matrix).real - 1.0) < 1e-12


def test_scrooge_mc_maximally_mixed_first_moment():
    rho_xa = np.eye(8, dtype=complex) / 8
    mc = ens.scrooge_moment_mc(rho_xa, [0], 1, 20_000, np.random.default_rng(25))
    assert max_z(mc, np.eye(4) / 4) < 5.0


def test_scrooge_mc_pure_input_matches_haar():
    # rank-1 rho0 on one qubit: the ensemble reduces to Haar states on A
    v = haar_state(2, np.random.default_rng(26))
    rho0 = np.outer(v, v.conj())
    rho_xa = kron(rho0.T, np.eye(2, dtype=complex)) / 2
    mc = ens.scrooge_moment_mc(rho_xa, [0], 2, 50_000, np.random.default_rng(27))
    assert max_z(mc, ens.haar_moment(2, 2).matrix) < 4.5


def test_scrooge_mc_flat_input_matches_eref():
    # flat spectra are the regime where the permutation-sum moments are
    # exact at finite size, so the estimator must agree with them
    rho0 = np.diag([0.5, 0.5]).astype(complex)
    rho_xa = kron(rho0.T, np.eye(2, dtype=complex)) / 2
    mc = ens.scrooge_moment_mc(rho_xa, [0], 2, 50_000, np.random.default_rng(28))
    assert max_z(mc, ens.eref_moment(np.array([0.5, 0.5]), 2, 2).matrix) < 4.0


def test_scrooge_mc_matches_direct_loop_oracle():
    # independent slow-path evaluation of the same reweighted-Haar integral
    rho0 = np.diag([0.75, 0.25]).astype(complex)
    rho_xa = kron(rho0.T, np.eye(2, dtype=complex)) / 2
    root = density_sqrt(rho_xa)
    rng = np.random.default_rng(29)
    n = 30_000
    acc = np.zeros((4, 4), dtype=complex)
    for _ in range(n):
        z = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi = z / np.linalg.norm(z)
        v = (root @ psi).reshape(2, 2)
        r = np.einsum("xa,xb->ab", v, v.conj())
        acc += 4.0 * np.kron(r, r) / np.trace(r).real
    oracle = acc / n
    mc = ens.scrooge_moment_mc(rho_xa, [0], 2, 200_000, np.random.default_rng(30))
    dev = np.abs(mc.moment.matrix - oracle)
    assert np.max(dev) < 4.0 * (np.max(mc.stderr) + np.max(np.abs(oracle)) / np.sqrt(n))


def test_scrooge_mc_sample_mean_trace_near_one():
    rho0 = ginibre_density(2, 2, np.random.default_rng(31))
    rho_xa = kron(rho0.T, np.eye(2, dtype=complex)) / 2
    mc = ens.scrooge_moment_mc(rho_xa, [0], 2, 50_000, np.random.default_rng(32))
    assert abs(np.trace(mc.moment.matrix).real - 1.0) < 0.02


def test_scrooge_mc_rejects_non_psd():
    bad = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        ens.scrooge_moment_mc(bad, [0], 2, 100, np.random.default_rng(33))


def test_mc_first_moment_is_maximally_mixed():
    rng = np.random.default_rng(34)
    mc = ens.ghse_moment_mc(3, 4, 1, 20_000, rng)
    assert max_z(mc, np.eye(4) / 4) < 5.0
