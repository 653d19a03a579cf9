"""Dense test states: GHZ, W and Dicke kets, random density matrices."""

from itertools import combinations
from math import comb

import numpy as np

from .symcore import DENSE_MAX_QUBITS, twirl

__all__ = [
    "ghz_ket",
    "dicke_ket",
    "w_ket",
    "projector",
    "product_ket",
    "random_density",
    "random_pi_density",
    "check_density",
]


def _check(n):
    if n < 1 or n > DENSE_MAX_QUBITS:
        raise ValueError(f"dense states need 1 <= n <= {DENSE_MAX_QUBITS}, got {n}")


def ghz_ket(n):
    _check(n)
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1 / np.sqrt(2)
    return psi


def dicke_ket(n, m):
    """Equal superposition of all ``n``-bit strings with ``m`` ones."""
    _check(n)
    if not 0 <= m <= n:
        raise ValueError(f"excitation number must satisfy 0 <= m <= n, got m={m}")
    psi = np.zeros(2**n, dtype=complex)
    for ones in combinations(range(n), m):
        psi[sum(1 << (n - 1 - q) for q in ones)] = 1.0
    return psi / np.sqrt(comb(n, m))


def w_ket(n):
    return dicke_ket(n, 1)


def product_ket(bits):
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int("".join(str(b) for b in bits), 2)] = 1.0
    return psi


def projector(psi):
    psi = np.asarray(psi)
    return np.outer(psi, psi.conj())


def random_density(n, rng, rank=None):
    """Ginibre-distributed density matrix of the given rank (full by default)."""
    _check(n)
    dim = 2**n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pi_density(n, rng, rank=None):
    """Permutation-averaged random density matrix."""
    rho = twirl(random_density(n, rng, rank))
    return (rho + rho.conj().T) / 2


def check_density(rho, *, herm_tol=1e-12, trace_tol=1e-12, eig_tol=-1e-10):
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > trace_tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real:.12g} != 1")
    if np.linalg.eigvalsh(rho).min() < eig_tol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho
