from itertools import permutations
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import (
    X, Y, Z, I2, dense_m, dense_product_op, dense_projector, dense_twirl,
    kron_all, ket_dicke, ket_ghz, permute_qubits,
)
from pilms.errors import InvalidObservableError
from pilms.symcore import (
    SymCoords,
    coords_to_dense,
    enumerate_indices,
    index_position,
    m_basis_dense,
    norm_const,
    norm_consts,
    product_op_coords,
    project_to_sym,
    twirl,
)


@pytest.mark.parametrize("n, count", [(1, 4), (2, 10), (3, 20), (4, 35), (7, 120)])
def test_index_count(n, count):
    idx = enumerate_indices(n)
    assert len(idx) == count == comb(n + 3, 3)
    assert len(set(idx)) == count
    assert idx == sorted(idx)


def test_indices_n1():
    assert set(enumerate_indices(1)) == {(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 0, 0)}


@pytest.mark.parametrize("n", [0, -1, 2.5])
def test_indices_reject_bad_n(n):
    with pytest.raises(ValueError):
        enumerate_indices(n)


def test_index_position_roundtrip():
    for n in range(1, 6):
        for p, idx in enumerate(enumerate_indices(n)):
            assert index_position(n, idx) == p
    with pytest.raises(ValueError):
        index_position(2, (2, 1, 0))


def test_m_basis_examples():
    np.testing.assert_allclose(m_basis_dense((0, 1, 0), 2), np.kron(X, Z) + np.kron(Z, X), atol=1e-14)
    np.testing.assert_allclose(m_basis_dense((0, 2, 0), 2), np.kron(X, X), atol=1e-14)
    m = m_basis_dense((1, 1, 1), 3)
    assert np.trace(m @ m).real == pytest.approx(48.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_m_basis_matches_permutation_sum(n):
    for idx in enumerate_indices(n):
        np.testing.assert_allclose(m_basis_dense(idx, n), dense_m(*idx, n), atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_orthonormality(n):
    idx = enumerate_indices(n)
    flat = np.array([dense_m(*b, n).reshape(-1) for b in idx])
    gram = (flat.conj() @ flat.T).real
    scaled = gram * np.array([norm_const(n, b) for b in idx])[:, None]
    assert np.max(np.abs(scaled - np.eye(len(idx)))) < 1e-10


def test_norm_const_example():
    assert norm_const(2, (0, 1, 0)) == pytest.approx(1 / 8)
    assert norm_consts(2)[index_position(2, (0, 1, 0))] == pytest.approx(1 / 8)


def test_project_identity():
    coords = project_to_sym(np.eye(4))
    assert coords.nonzero() == pytest.approx({(2, 0, 0): 1.0})


def test_project_ghz2():
    coords = project_to_sym(dense_projector(ket_ghz(2)))
    expected = {(2, 0, 0): 0.25, (0, 2, 0): 0.25, (0, 0, 2): -0.25, (0, 0, 0): 0.25}
    assert coords.nonzero().keys() == expected.keys()
    for k, v in expected.items():
        assert coords[k] == pytest.approx(v, abs=1e-14)


def test_project_m010():
    coords = project_to_sym(np.kron(X, Z) + np.kron(Z, X))
    assert coords.nonzero() == pytest.approx({(0, 1, 0): 1.0})


def test_project_rejects_non_hermitian():
    op = np.zeros((4, 4), dtype=complex)
    op[0, 1] = 1.0
    with pytest.raises(InvalidObservableError):
        project_to_sym(op)
    with pytest.raises(ValueError):
        project_to_sym(np.eye(3))


@pytest.mark.parametrize(
    "abcd, n, expected",
    [
        ((1, 0, 0, 0), 3, {(3, 0, 0): 1.0}),
        ((0, 0, 0, 1), 2, {(0, 0, 0): 1.0}),
    ],
)
def test_product_op_coords_examples(abcd, n, expected):
    assert product_op_coords(*abcd, n).nonzero() == pytest.approx(expected)


def test_product_op_coords_k_zero():
    coords = product_op_coords(1, 1, 0, 1, 2)
    for (i, j, k), v in coords.items():
        assert v == (1.0 if k == 0 else 0.0)


def test_product_op_coords_against_dense(rng):
    for _ in range(100):
        n = int(rng.integers(1, 7))
        a, b, c, d = rng.normal(size=4)
        coords = product_op_coords(a, b, c, d, n)
        dense = dense_product_op(a, b, c, d, n)
        np.testing.assert_allclose(coords_to_dense(coords), dense, atol=1e-10 * max(1, np.abs(dense).max()))


def test_twirl_examples():
    dicke = dense_projector(ket_dicke(4, 2))
    assert np.max(np.abs(twirl(dicke) - dicke)) < 1e-12
    e01 = np.diag([0, 1, 0, 0]).astype(complex)
    e10 = np.diag([0, 0, 1, 0]).astype(complex)
    np.testing.assert_allclose(twirl(e01), (e01 + e10) / 2, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_twirl_matches_enumeration(n, rng):
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    op = g + g.conj().T
    np.testing.assert_allclose(twirl(op), dense_twirl(op), atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_twirl_idempotent_and_commutes_with_swaps(n, rng):
    g = rng.normal(size=(2**n, 2**n)) + 1j * rng.normal(size=(2**n, 2**n))
    op = g + g.conj().T
    t = twirl(op)
    assert np.max(np.abs(twirl(t) - t)) < 1e-12
    for a in range(n):
        for b in range(a + 1, n):
            perm = list(range(n))
            perm[a], perm[b] = b, a
            assert np.max(np.abs(twirl(permute_qubits(op, perm)) - t)) < 1e-12
            assert np.max(np.abs(permute_qubits(t, perm) - t)) < 1e-12


def test_symcoords_roundtrip_and_arithmetic():
    c = product_op_coords(0.5, -1.0, 2.0, 1.0, 3)
    assert SymCoords.from_dict(c.to_dict()).max_abs_diff(c) == 0.0
    assert (c + c - 2 * c).max_abs_diff(SymCoords.zeros(3)) == 0.0
    with pytest.raises(ValueError):
        c + SymCoords.zeros(2)
    with pytest.raises(ValueError):
        SymCoords(2, np.zeros(5))
    with pytest.raises(ValueError):
        SymCoords.from_dict({"n": 2})


@settings(max_examples=40, deadline=None)
@given(
    st.integers(1, 5),
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4),
    st.floats(-3, 3, allow_nan=False),
)
def test_product_op_coords_homogeneous(n, abcd, t):
    scaled = product_op_coords(*(t * x for x in abcd), n).values
    base = product_op_coords(*abcd, n).values
    np.testing.assert_allclose(scaled, t**n * base, rtol=1e-9, atol=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_projection_roundtrip_property(n, seed):
    r = np.random.default_rng(seed)
    values = r.normal(size=comb(n + 3, 3))
    coords = SymCoords(n, values)
    back = project_to_sym(coords_to_dense(coords))
    assert back.max_abs_diff(coords) < 1e-10


def test_pauli_kron_helpers_consistent():
    # sanity of the shared oracle itself
    assert np.allclose(kron_all([X, Y]), np.kron(X, Y))
    assert np.allclose(dense_m(1, 0, 0, 2), np.kron(I2, Z) + np.kron(Z, I2))
    assert len(set(permutations("XXY"))) == 3
