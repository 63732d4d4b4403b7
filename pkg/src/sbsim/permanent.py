"""Exact permanents of complex square matrices.

Three independent routes are provided: a permutation-sum reference
(`permanent_naive`), Ryser's inclusion-exclusion formula with Gray-code
column updates (`permanent_ryser`) and Glynn's +/-1 polarization formula
(`permanent_glynn`).  The last two cost O(n * 2^n) and are JIT-compiled
with numba.
"""

import itertools
from functools import lru_cache

import numpy as np
from numba import njit

NAIVE_MAX_N = 10
SUBSET_MAX_N = 30

# Relative / absolute tolerances used when comparing two permanent values.
REL_TOL = 1e-9
ABS_TOL = 1e-12

_PERM_CHUNK = 100_000  # bounds memory of the vectorized permutation sum


class PermanentSizeError(ValueError):
    """Matrix dimension exceeds the cost guard of the chosen algorithm."""


def _as_square(M) -> tuple[np.ndarray, int]:
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n < 1:
        raise ValueError("matrix dimension must be >= 1")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise ValueError("matrix entries must be finite")
    return M, n


@lru_cache(maxsize=8)
def _all_permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.intp)


def permanent_naive(M) -> complex:
    """Permutation-sum permanent: sum over sigma of prod_i M[i, sigma(i)].

    Factorial cost; guarded at n <= 10.  Serves as the reference oracle
    for the fast algorithms.
    """
    M, n = _as_square(M)
    if n > NAIVE_MAX_N:
        raise PermanentSizeError(
            f"permanent_naive supports n <= {NAIVE_MAX_N}, got n = {n}"
        )
    rows = np.arange(n)
    if n <= 8:
        perms = _all_permutations(n)
        return complex(M[rows, perms].prod(axis=1).sum())
    # n = 9, 10: stream permutations in fixed-size chunks
    total = 0j
    chunk: list[tuple[int, ...]] = []
    for sigma in itertools.permutations(range(n)):
        chunk.append(sigma)
        if len(chunk) == _PERM_CHUNK:
            total += M[rows, np.array(chunk, dtype=np.intp)].prod(axis=1).sum()
            chunk.clear()
    if chunk:
        total += M[rows, np.array(chunk, dtype=np.intp)].prod(axis=1).sum()
    return complex(total)


@njit(cache=True)
def _ryser_gray(M):  # pragma: no cover - exercised through permanent_ryser
    n = M.shape[0]
    w = np.zeros(n, dtype=np.complex128)  # row sums over the current subset
    total = 0j
    parity = 1  # (-1)^|S|, toggles once per Gray-code step
    g_prev = 0
    for k in range(1, 1 << n):
        g = k ^ (k >> 1)
        diff = g ^ g_prev
        j = 0
        d = diff
        while d > 1:
            d >>= 1
            j += 1
        if g & diff:
            for i in range(n):
                w[i] += M[i, j]
        else:
            for i in range(n):
                w[i] -= M[i, j]
        parity = -parity
        prod = 1.0 + 0j
        for i in range(n):
            prod *= w[i]
        total += parity * prod
        g_prev = g
    if n & 1:
        return -total
    return total


def permanent_ryser(M) -> complex:
    """Ryser inclusion-exclusion permanent, O(n * 2^n) via Gray code."""
    M, n = _as_square(M)
    if n > SUBSET_MAX_N:
        raise PermanentSizeError(
            f"permanent_ryser supports n <= {SUBSET_MAX_N}, got n = {n}"
        )
    return complex(_ryser_gray(M))


@njit(cache=True)
def _glynn_gray(M):  # pragma: no cover - exercised through permanent_glynn
    n = M.shape[0]
    col = np.zeros(n, dtype=np.complex128)  # sum_i delta_i * M[i, :]
    for c in range(n):
        for i in range(n):
            col[c] += M[i, c]
    prod = 1.0 + 0j
    for c in range(n):
        prod *= col[c]
    total = prod
    sign = 1
    g_prev = 0
    for k in range(1, 1 << (n - 1)):
        g = k ^ (k >> 1)
        diff = g ^ g_prev
        j = 0
        d = diff
        while d > 1:
            d >>= 1
            j += 1
        row = j + 1  # delta_0 is pinned to +1
        if g & diff:
            for c in range(n):
                col[c] -= 2.0 * M[row, c]
        else:
            for c in range(n):
                col[c] += 2.0 * M[row, c]
        sign = -sign
        prod = 1.0 + 0j
        for c in range(n):
            prod *= col[c]
        total += sign * prod
        g_prev = g
    return total / (1 << (n - 1))


def permanent_glynn(M) -> complex:
    """Glynn polarization-identity permanent, O(n * 2^n) via Gray code."""
    M, n = _as_square(M)
    if n > SUBSET_MAX_N:
        raise PermanentSizeError(
            f"permanent_glynn supports n <= {SUBSET_MAX_N}, got n = {n}"
        )
    return complex(_glynn_gray(M))


def permanents_close(a: complex, b: complex,
                     rel: float = REL_TOL, abs_: float = ABS_TOL) -> bool:
    """Compare permanents with a relative tolerance and an absolute floor.

    The absolute floor handles exact cancellation zeros (e.g. the
    Hong-Ou-Mandel coincidence amplitude) where a relative criterion is
    meaningless.
    """
    diff = abs(a - b)
    scale = max(abs(a), abs(b))
    return diff <= max(rel * scale, abs_)


def warm_up() -> None:
    """Trigger JIT compilation of the fast kernels on a tiny input."""
    m = np.eye(2, dtype=np.complex128)
    _ryser_gray(m)
    _glynn_gray(m)
