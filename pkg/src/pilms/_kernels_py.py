"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

The algorithms differ on purpose: ``esym_rows`` here tabulates e_k by the
number of -1 entries instead of running the per-row recurrence, so the two
backends check each other.
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _esym_by_weight(n):
    # table[w, k] = e_k of a sign vector with w entries equal to -1
    table = np.zeros((n + 1, n + 1))
    for w in range(n + 1):
        poly = np.polynomial.polynomial.polypow([1.0, -1.0], w)
        poly = np.polynomial.polynomial.polymul(
            poly, np.polynomial.polynomial.polypow([1.0, 1.0], n - w)
        )
        table[w, : len(poly)] = poly
    return table


def esym_rows(signs):
    signs = np.asarray(signs)
    n = signs.shape[1]
    weights = np.count_nonzero(signs < 0, axis=1)
    return _esym_by_weight(n)[weights].copy()


@lru_cache(maxsize=16)
def _type_counts(n):
    idx = np.arange(4**n, dtype=np.int64)
    digits = np.empty((n, idx.size), dtype=np.int8)
    for q in range(n):
        digits[q] = (idx >> (2 * q)) & 3
    return (
        np.count_nonzero(digits == 0, axis=0),
        np.count_nonzero(digits == 1, axis=0),
        np.count_nonzero(digits == 2, axis=0),
    )


def bin_pauli_types(coef, n, pos):
    ci, cj, ck = _type_counts(n)
    bins = pos[ci, cj, ck]
    return np.bincount(bins, weights=np.asarray(coef), minlength=int(pos.max()) + 1)


def spread_pauli_types(values, n, pos):
    ci, cj, ck = _type_counts(n)
    return np.asarray(values, dtype=np.float64)[pos[ci, cj, ck]]
