"""Independent dense oracles shared by the test modules.

These build operators by brute force (explicit Kronecker products and
permutation sums) so they share no code with the library's fast paths.
"""

from functools import reduce
from itertools import permutations

import numpy as np
import pytest

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
LOCAL = {"I": I2, "X": X, "Y": Y, "Z": Z}

ACCEPTANCE_RESULTS = {}


def kron_all(mats):
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


def dense_m(i, j, k, n):
    """Sum of kron products over distinct placements of I^i X^j Y^k Z^l."""
    word = "I" * i + "X" * j + "Y" * k + "Z" * (n - i - j - k)
    return sum(kron_all([LOCAL[ch] for ch in w]) for w in set(permutations(word)))


def permute_qubits(op, perm):
    n = len(perm)
    t = np.asarray(op).reshape((2,) * (2 * n))
    return t.transpose(list(perm) + [n + p for p in perm]).reshape(2**n, 2**n)


def dense_twirl(op):
    n = int(round(np.log2(op.shape[0])))
    perms = list(permutations(range(n)))
    return sum(permute_qubits(op, p) for p in perms) / len(perms)


def dense_product_op(a, b, c, d, n):
    return kron_all([a * I2 + b * X + c * Y + d * Z] * n)


def dense_projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def ket_ghz(n):
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = psi[-1] = 1.0
    return psi / np.sqrt(2)


def ket_dicke(n, m):
    psi = np.array([bin(x).count("1") == m for x in range(2**n)], dtype=complex)
    return psi / np.linalg.norm(psi)


def random_pi_rho(n, rng):
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    rho = dense_twirl(g @ g.conj().T)
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[key])
