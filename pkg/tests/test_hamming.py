import itertools

import pytest

from pqcnn import gf2matrix as gf2
from pqcnn.hamming import construct, correct, decode, encode, standard_7_4, syndrome


@pytest.fixture(scope="module")
def code():
    return standard_7_4()


def all_messages(k):
    return [list(bits) for bits in itertools.product([0, 1], repeat=k)]


def check_invariants(code):
    assert gf2.mul(code.G, code.H).is_zero()
    for i in range(code.n):
        assert sum(b << j for j, b in enumerate(code.H.row(i))) == i + 1
    for x in all_messages(code.k):
        assert decode(code, encode(code, x)) == x


def test_standard_matrices(code):
    assert code.G.row(0) == [1, 1, 1, 0, 0, 0, 0]
    assert code.H.row(6) == [1, 1, 1]
    assert code.R.row(2) == [1, 0, 0, 0]
    assert (code.k, code.n) == (4, 7)
    check_invariants(code)


def test_construct_r3_satisfies_invariants_and_matches_example(code):
    built = construct(3)
    check_invariants(built)
    # ascending H rows plus power-of-two parity positions give the same layout
    assert built == code


def test_construct_r4_exhaustive_single_error():
    code = construct(4)
    assert (code.n, code.k) == (15, 11)
    check_invariants(code)
    for x in all_messages(code.k):
        y = encode(code, x)
        for i in range(code.n):
            noisy = list(y)
            noisy[i] ^= 1
            fixed, pos = correct(code, noisy)
            assert (fixed, pos) == (y, i + 1)


def test_construct_rejects_small():
    with pytest.raises(ValueError):
        construct(2)


def test_encode(code):
    assert encode(code, [1, 0, 0, 0]) == [1, 1, 1, 0, 0, 0, 0]
    assert encode(code, [0, 0, 0, 0]) == [0] * 7
    for x in all_messages(4):
        assert syndrome(code, encode(code, x)) == [0, 0, 0]
    with pytest.raises(ValueError):
        encode(code, [1, 0, 0])


def test_decode(code):
    assert decode(code, [1, 1, 1, 0, 0, 0, 0]) == [1, 0, 0, 0]
    assert decode(code, [0] * 7) == [0] * 4
    for x in all_messages(4):
        assert decode(code, encode(code, x)) == x
    with pytest.raises(ValueError):
        decode(code, [1] * 8)


def test_syndrome(code):
    assert syndrome(code, [1, 1, 1, 0, 0, 0, 1]) == [1, 1, 1]
    for x in all_messages(4):
        y = encode(code, x)
        for i in range(7):
            noisy = list(y)
            noisy[i] ^= 1
            assert syndrome(code, noisy) == code.H.row(i)
    with pytest.raises(ValueError):
        syndrome(code, [0] * 6)


def test_correct(code):
    assert correct(code, [1, 1, 1, 0, 0, 0, 1]) == ([1, 1, 1, 0, 0, 0, 0], 7)
    clean = encode(code, [0, 1, 1, 0])
    assert correct(code, clean) == (clean, None)
    for x in all_messages(4):
        y = encode(code, x)
        for i in range(7):
            noisy = list(y)
            noisy[i] ^= 1
            fixed, pos = correct(code, noisy)
            assert fixed == y and pos == i + 1
            assert syndrome(code, fixed) == [0, 0, 0]


def test_double_error_is_miscorrected(code):
    y = encode(code, [1, 0, 1, 1])
    noisy = list(y)
    noisy[0] ^= 1
    noisy[1] ^= 1
    fixed, pos = correct(code, noisy)
    # positions 1 and 2 xor to 3, so bit 3 is flipped instead
    assert pos == 3
    assert fixed != y
