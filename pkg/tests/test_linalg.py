import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bilinscat.ensembles import random_matrix
from bilinscat.errors import DimensionMismatch, SingularMatrix
from bilinscat.linalg import Block2Matrix, block_mul, channel_matrix, invert, max_norm
from bilinscat.potential import DeltaSpike, PhysicalParams
from bilinscat.transfer import delta_transfer


def test_invert_identity():
    assert np.array_equal(invert(np.eye(2)), np.eye(2))


def test_invert_scalar_reciprocal():
    assert np.allclose(invert([[1 - 1j]]), [[(1 + 1j) / 2]], rtol=0, atol=1e-15)


def test_invert_unipotent():
    a = np.array([[1, 1j], [0, 1]])
    b = invert(a)
    assert np.allclose(b, [[1, -1j], [0, 1]], atol=1e-15)
    assert max_norm(a @ b - np.eye(2)) == 0.0


def test_invert_returns_read_only_copy():
    a = np.array([[2.0, 0], [0, 4.0]], dtype=complex)
    b = invert(a)
    assert not b.flags.writeable
    assert a[0, 0] == 2.0


@pytest.mark.parametrize("a", [np.zeros((2, 2)), [[1, 2], [2, 4]], [[1e-20]]])
def test_invert_singular(a):
    with pytest.raises(SingularMatrix):
        invert(a)


def test_invert_residual_bound(rng):
    for n in range(1, 6):
        a = random_matrix(rng, n)
        b = invert(a)
        assert max_norm(a @ b - np.eye(n)) <= 1e-12 * max_norm(a) * max_norm(b) * n


def test_invert_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        invert(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_double_inverse(n, seed):
    rng = np.random.default_rng(seed)
    a = random_matrix(rng, n, max_cond=1e6)
    assert max_norm(invert(invert(a)) - a) <= 1e-10 * max_norm(a)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_block_mul_associative_and_transpose(n, seed):
    rng = np.random.default_rng(seed)
    x, y, z = (Block2Matrix(random_matrix(rng, 2 * n)) for _ in range(3))
    left, right = block_mul(block_mul(x, y), z), block_mul(x, block_mul(y, z))
    assert max_norm(left.data - right.data) <= 1e-12 * max_norm(left.data)
    assert max_norm(block_mul(x, y).T.data - block_mul(y.T, x.T).data) <= 1e-14


def test_block_identity_products(params):
    ident = Block2Matrix.identity(1)
    t = delta_transfer(DeltaSpike(0.0, 0.3 + 1j), params)
    assert block_mul(ident, ident).allclose(ident, 0.0)
    assert block_mul(t, ident).allclose(t, 0.0)


def test_coincident_deltas_add(params):
    g1, g2 = 0.4 - 1j, 2.5 + 0.25j
    t1 = delta_transfer(DeltaSpike(0.0, g1), params)
    t2 = delta_transfer(DeltaSpike(0.0, g2), params)
    # [[1,0],[a,1]] [[1,0],[b,1]] = [[1,0],[a+b,1]]
    expected = np.array([[1, 0], [params.kinetic * (g1 + g2), 1]])
    assert max_norm(block_mul(t2, t1).data - expected) <= 1e-15


def test_block_mul_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        block_mul(Block2Matrix.identity(1), Block2Matrix.identity(2))


def test_block_views():
    m = Block2Matrix(np.arange(16).reshape(4, 4))
    assert m.n == 2
    assert np.array_equal(m.b12, [[2, 3], [6, 7]])
    assert np.array_equal(m.b21, [[8, 9], [12, 13]])
    assert np.array_equal(m.block(2, 2), m.b22)
    with pytest.raises(ValueError):
        m.data[0, 0] = 1


def test_channel_matrix_promotes_scalars():
    assert np.array_equal(channel_matrix(2.0, 3), 2 * np.eye(3))
    with pytest.raises(DimensionMismatch):
        channel_matrix([[1, 2]])
