"""Symmetric-group machinery for moment formulas.

Permutations are tuples `image` of length k with image[x] = sigma(x).
Permutation operators on k-fold tensor spaces use the pull-back
convention: the operator for sigma sends |i_1 .. i_k> to the basis vector
whose m-th slot is i_{sigma^{-1}(m)}. With this convention
P(sigma) P(tau) = P(sigma o tau) holds without an order flip.

All initial-state dependence of the reference-ensemble moments enters
through spectral power traces t_n = sum_l lambda_l**n, combined per
permutation into a product over its cycle lengths. Working with power
traces (never with dense matrix powers) means reference moments need only
the eigenvalue spectrum.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from . import config
from .errors import BudgetError

Permutation = tuple[int, ...]
CycleType = tuple[int, ...]


def identity_perm(k: int) -> Permutation:
    return tuple(range(k))


def compose(sigma: Permutation, tau: Permutation) -> Permutation:
    """(sigma o tau)(x) = sigma(tau(x))."""
    return tuple(sigma[tau[x]] for x in range(len(tau)))


def invert(sigma: Permutation) -> Permutation:
    inv = [0] * len(sigma)
    for x, y in enumerate(sigma):
        inv[y] = x
    return tuple(inv)


def check_permutation(sigma: Sequence[int]) -> Permutation:
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(len(sigma))):
        raise ValueError(f"{sigma} is not a permutation of 0..{len(sigma) - 1}")
    return sigma


def enumerate_sk(k: int) -> list[Permutation]:
    """All k! permutations in lexicographic order."""
    if k < 1:
        raise ValueError("k must be positive")
    if k > config.MAX_PERM_K:
        raise BudgetError(f"k = {k} exceeds the permutation cap {config.MAX_PERM_K}")
    return list(itertools.permutations(range(k)))


def cycle_type(sigma: Permutation) -> CycleType:
    """Cycle lengths of sigma, sorted descending."""
    sigma = check_permutation(sigma)
    seen = [False] * len(sigma)
    parts = []
    for start in range(len(sigma)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = sigma[x]
            length += 1
        parts.append(length)
    return tuple(sorted(parts, reverse=True))


def num_cycles(sigma: Permutation) -> int:
    return len(cycle_type(sigma))


def perm_index_map(sigma: Permutation, local_dim: int) -> np.ndarray:
    """Column-to-row index map of the permutation operator.

    Entry j is the basis index that column j maps to, i.e. the operator is
    P[out[j], j] = 1. Used to accumulate permutation sums without
    materializing each dense operator.
    """
    sigma = check_permutation(sigma)
    k = len(sigma)
    dim = local_dim**k
    if dim > config.MAX_OPERATOR_DIM:
        raise BudgetError(
            f"permutation operator dimension {dim} exceeds the cap "
            f"{config.MAX_OPERATOR_DIM}"
        )
    idx = np.arange(dim)
    digits = np.empty((k, dim), dtype=np.int64)
    rem = idx
    for pos in range(k - 1, -1, -1):
        digits[pos] = rem % local_dim
        rem = rem // local_dim
    inv = invert(sigma)
    out = np.zeros(dim, dtype=np.int64)
    for m in range(k):
        out = out * local_dim + digits[inv[m]]
    return out


def perm_operator(sigma: Permutation, local_dim: int) -> np.ndarray:
    """Dense operator permuting k copies of a local_dim-dimensional space."""
    out = perm_index_map(sigma, local_dim)
    dim = out.shape[0]
    op = np.zeros((dim, dim), dtype=complex)
    op[out, np.arange(dim)] = 1.0
    return op


def power_traces(spectrum: np.ndarray, k: int) -> np.ndarray:
    """[t_1 .. t_k] with t_n = sum_l lambda_l**n."""
    spectrum = np.asarray(spectrum, dtype=float)
    return np.array([np.sum(spectrum**n) for n in range(1, k + 1)])


def h_sigma(traces: np.ndarray, ct: CycleType) -> float:
    """Product of power traces over the cycle lengths of a permutation."""
    traces = np.asarray(traces, dtype=float)
    out = 1.0
    for n in ct:
        if n > traces.shape[0]:
            raise ValueError(
                f"cycle length {n} exceeds the {traces.shape[0]} available traces"
            )
        out *= traces[n - 1]
    return float(out)


def rising_factorial(d: int, k: int) -> float:
    """d (d+1) ... (d+k-1)."""
    out = 1.0
    for i in range(k):
        out *= d + i
    return out
