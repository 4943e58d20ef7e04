import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pqcnn import gf2matrix as gf2
from pqcnn.gf2matrix import BitMatrix, SingularMatrixError
from pqcnn.hamming import standard_7_4
from pqcnn.mceliece import EXAMPLE_P, EXAMPLE_S


def naive_mul(a, b):
    rows, inner, cols = len(a), len(b), len(b[0])
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        for j in range(cols):
            acc = 0
            for k in range(inner):
                acc ^= a[i][k] & b[k][j]
            out[i][j] = acc
    return out


def bit_matrices(max_dim=8, rows=None, cols=None):
    r = st.integers(1, max_dim) if rows is None else st.just(rows)
    c = st.integers(1, max_dim) if cols is None else st.just(cols)
    return st.tuples(r, c).flatmap(
        lambda rc: st.lists(
            st.lists(st.integers(0, 1), min_size=rc[1], max_size=rc[1]),
            min_size=rc[0],
            max_size=rc[0],
        ).map(BitMatrix)
    )


def test_construction_rejects_non_bits():
    with pytest.raises(ValueError):
        BitMatrix([[0, 2]])
    m = BitMatrix.from_rows(["101", "010"])
    assert m.shape == (2, 3)
    assert m.bits == (1, 0, 1, 0, 1, 0)
    assert len(m.bits) == m.rows * m.cols


def test_immutable():
    m = BitMatrix([[1, 0]])
    with pytest.raises(ValueError):
        m.array[0, 0] = 0


def test_public_key_product_matches_worked_example():
    g_prime = gf2.mul(gf2.mul(EXAMPLE_S, standard_7_4().G), EXAMPLE_P)
    assert g_prime == BitMatrix.from_rows(["0110101", "1000101", "1010110", "1011001"])
    assert g_prime.row(0) == [0, 1, 1, 0, 1, 0, 1]


def test_mul_identity():
    a = BitMatrix.from_rows(["1101", "0110"])
    assert gf2.mul(a, gf2.identity(4)) == a
    assert gf2.mul(gf2.identity(2), a) == a


def test_mul_dimension_mismatch():
    with pytest.raises(ValueError):
        gf2.mul(gf2.identity(3), gf2.identity(4))


def test_mul_against_naive_oracle():
    rng = np.random.default_rng(1234)
    for _ in range(50):
        r, s, t = rng.integers(1, 9, size=3)
        a = rng.integers(0, 2, size=(r, s)).tolist()
        b = rng.integers(0, 2, size=(s, t)).tolist()
        assert gf2.mul(BitMatrix(a), BitMatrix(b)).tolist() == naive_mul(a, b)


def test_add_worked_example():
    y = gf2.vector([1, 1, 1, 0, 0, 0, 0])
    r = gf2.vector([0, 0, 0, 0, 0, 0, 1])
    assert gf2.add(y, r).to_vector() == [1, 1, 1, 0, 0, 0, 1]


def test_add_self_is_zero_and_mismatch():
    a = BitMatrix.from_rows(["1011", "0110"])
    assert gf2.add(a, a).is_zero()
    with pytest.raises(ValueError):
        gf2.add(a, gf2.identity(2))


def test_add_against_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        a = rng.integers(0, 2, size=(5, 6))
        b = rng.integers(0, 2, size=(5, 6))
        assert gf2.add(BitMatrix(a), BitMatrix(b)).tolist() == ((a + b) % 2).tolist()


def test_invert_scrambler_of_worked_example():
    s_inv = gf2.invert(EXAMPLE_S)
    assert s_inv == BitMatrix.from_rows(["1101", "1100", "0111", "1001"])
    assert s_inv.row(0) == [1, 1, 0, 1]


def test_invert_identity_and_singular():
    assert gf2.invert(gf2.identity(5)) == gf2.identity(5)
    with pytest.raises(SingularMatrixError):
        gf2.invert(gf2.zeros(3, 3))
    with pytest.raises(SingularMatrixError):
        gf2.invert(BitMatrix.from_rows(["11", "11"]))
    with pytest.raises(ValueError):
        gf2.invert(BitMatrix.from_rows(["110"]))


def test_invert_roundtrip_random():
    rng = np.random.default_rng(99)
    eye = gf2.identity(8)
    for _ in range(100):
        a = gf2.random_invertible(8, rng)
        inv = gf2.invert(a)
        assert gf2.mul(a, inv) == eye
        assert gf2.mul(inv, a) == eye


def test_random_invertible():
    assert gf2.random_invertible(1, np.random.default_rng(0)) == BitMatrix([[1]])
    for seed in range(20):
        gf2.invert(gf2.random_invertible(4, np.random.default_rng(seed)))
    a = gf2.random_invertible(6, np.random.default_rng(5))
    b = gf2.random_invertible(6, np.random.default_rng(5))
    assert a == b
    with pytest.raises(ValueError):
        gf2.random_invertible(0, np.random.default_rng(0))


def test_random_permutation():
    assert gf2.random_permutation(1, np.random.default_rng(0)) == BitMatrix([[1]])
    for seed in range(20):
        p = gf2.random_permutation(7, np.random.default_rng(seed))
        assert (p.array.sum(axis=0) == 1).all()
        assert (p.array.sum(axis=1) == 1).all()
        assert gf2.transpose(p) == gf2.invert(p)
        assert gf2.mul(p, gf2.transpose(p)) == gf2.identity(7)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.integers(1, 6), st.data())
def test_mul_associative(r, s, t, u, data):
    a = data.draw(bit_matrices(rows=r, cols=s))
    b = data.draw(bit_matrices(rows=s, cols=t))
    c = data.draw(bit_matrices(rows=t, cols=u))
    assert gf2.mul(gf2.mul(a, b), c) == gf2.mul(a, gf2.mul(b, c))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_double_inverse(dim, seed):
    a = gf2.random_invertible(dim, np.random.default_rng(seed))
    assert gf2.invert(gf2.invert(a)) == a


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.data())
def test_add_commutative_self_inverse(r, c, data):
    a = data.draw(bit_matrices(rows=r, cols=c))
    b = data.draw(bit_matrices(rows=r, cols=c))
    assert gf2.add(a, b) == gf2.add(b, a)
    assert gf2.add(gf2.add(a, b), b) == a
