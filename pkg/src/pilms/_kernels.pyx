# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. ``_kernels_py`` mirrors this module in numpy."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _esym_table(Py_ssize_t n, double[:, ::1] table) noexcept nogil:
    # table[w, k] = e_k of (-1)^w (+1)^(n-w), by the recurrence e_k += s e_{k-1}
    cdef Py_ssize_t w, q, k
    cdef double s
    for w in range(n + 1):
        table[w, 0] = 1.0
        for k in range(1, n + 1):
            table[w, k] = 0.0
        for q in range(n):
            s = -1.0 if q < w else 1.0
            for k in range(q + 1, 0, -1):
                table[w, k] += s * table[w, k - 1]


def esym_rows(const signed char[:, ::1] signs):
    """Elementary symmetric polynomials e_0..e_n of each row of +-1 signs.

    e_k depends only on how many entries are -1, so each row costs one
    count plus a copy from an (n+1) x (n+1) table built by the recurrence.
    """
    cdef Py_ssize_t rows = signs.shape[0]
    cdef Py_ssize_t n = signs.shape[1]
    table_arr = np.empty((n + 1, n + 1), dtype=np.float64)
    cdef double[:, ::1] table = table_arr
    out = np.empty((rows, n + 1), dtype=np.float64)
    cdef double[:, ::1] e = out
    cdef Py_ssize_t r, q, k, w
    with nogil:
        _esym_table(n, table)
        for r in range(rows):
            w = 0
            for q in range(n):
                w += signs[r, q] < 0
            for k in range(n + 1):
                e[r, k] = table[w, k]
    return out


cdef void _walk(int level, Py_ssize_t offset, int ci, int cj, int ck,
                const double[::1] src, double[::1] dst,
                const cnp.int64_t[:, :, ::1] pos, bint binning) noexcept nogil:
    # depth-first over base-4 digits, carrying the I/X/Y counts
    cdef Py_ssize_t base
    if level == 0:
        if binning:
            dst[pos[ci, cj, ck]] += src[offset]
        else:
            dst[offset] = src[pos[ci, cj, ck]]
        return
    base = offset * 4
    _walk(level - 1, base, ci + 1, cj, ck, src, dst, pos, binning)
    _walk(level - 1, base + 1, ci, cj + 1, ck, src, dst, pos, binning)
    _walk(level - 1, base + 2, ci, cj, ck + 1, src, dst, pos, binning)
    _walk(level - 1, base + 3, ci, cj, ck, src, dst, pos, binning)


def _nbins(const cnp.int64_t[:, :, ::1] pos):
    cdef Py_ssize_t a, b, c
    cdef cnp.int64_t top = -1
    for a in range(pos.shape[0]):
        for b in range(pos.shape[1]):
            for c in range(pos.shape[2]):
                if pos[a, b, c] > top:
                    top = pos[a, b, c]
    return top + 1


def bin_pauli_types(const double[::1] coef, int n, const cnp.int64_t[:, :, ::1] pos):
    """Sum Pauli-string coefficients into symmetric-type bins.

    ``coef`` is indexed by base-4 strings (digits I=0, X=1, Y=2, Z=3);
    ``pos[i, j, k]`` is the bin of the type with i identities, j X and k Y
    factors.
    """
    if coef.shape[0] != (<Py_ssize_t>1 << (2 * n)):
        raise ValueError(f"expected 4^{n} coefficients, got {coef.shape[0]}")
    out = np.zeros(_nbins(pos), dtype=np.float64)
    cdef double[::1] acc = out
    with nogil:
        _walk(n, 0, 0, 0, 0, coef, acc, pos, True)
    return out


def spread_pauli_types(const double[::1] values, int n, const cnp.int64_t[:, :, ::1] pos):
    """Inverse of :func:`bin_pauli_types`: one coefficient per Pauli string."""
    out = np.empty(<Py_ssize_t>1 << (2 * n), dtype=np.float64)
    cdef double[::1] res = out
    with nogil:
        _walk(n, 0, 0, 0, 0, values, res, pos, False)
    return out
