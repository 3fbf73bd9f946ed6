import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from connor.crypto import CryptoError, keygen_prf, ore_encrypt
from connor.tree import (MAX_DEPTH, CostTree, Verdict, boundaries, build_tree, compare_sum, level_order,
                         path_code, plain_path_code, verdict_from_codes)

KEY = keygen_prf()


def test_boundaries_and_level_order():
    assert boundaries(100, 2) == [25, 50, 75]
    assert boundaries(7, 2) == [1, 3, 5]
    assert level_order(1) == [1]
    assert level_order(3) == [4, 2, 6, 1, 3, 5, 7]
    for d in range(1, MAX_DEPTH + 1):
        assert sorted(level_order(d)) == list(range(1, 1 << d))


def test_tree_shape_and_bytes():
    t = build_tree(KEY, 1000, 4)
    assert len(t.nodes) == 15
    data = t.to_bytes()
    assert len(data) == 1 + 15 * 16 and data[0] == 4
    assert CostTree.from_bytes(data) == t
    assert t.nodes[0] == ore_encrypt(KEY, 500)


@pytest.mark.parametrize("bad", [b"", b"\x02" + bytes(47), b"\x09" + bytes(16 * 511), b"\x00"])
def test_tree_decode_errors(bad):
    with pytest.raises(ValueError):
        CostTree.from_bytes(bad)


def test_build_tree_checks():
    with pytest.raises(ValueError):
        build_tree(KEY, 10, 0)
    with pytest.raises(ValueError):
        build_tree(KEY, 10, MAX_DEPTH + 1)
    with pytest.raises(CryptoError):
        build_tree(KEY, 2**64, 3)


@settings(max_examples=300)
@given(st.integers(0, 2**40), st.integers(1, 6), st.integers(0, 2**41))
def test_encrypted_code_matches_plain_code(theta, depth, x):
    tree = build_tree(KEY, theta, depth)
    assert path_code(tree, ore_encrypt(KEY, x)) == plain_path_code(theta, depth, x)


def test_codes_on_boundaries():
    # x equal to a boundary is "not greater" and goes left
    tree = build_tree(KEY, 100, 2)
    codes = [path_code(tree, ore_encrypt(KEY, x)) for x in (0, 25, 26, 50, 51, 75, 76, 10**6)]
    assert codes == [0, 0, 1, 1, 2, 2, 3, 3]


def test_verdict_thresholds():
    assert verdict_from_codes(3, 4, 3) is Verdict.UNCERTAIN
    assert verdict_from_codes(4, 4, 3) is Verdict.GREATER
    assert verdict_from_codes(3, 3, 3) is Verdict.LESS_EQ
    assert verdict_from_codes(0, 1, 1) is Verdict.UNCERTAIN


@settings(max_examples=1000)
@given(st.integers(0, 5000), st.integers(1, 8), st.integers(0, 10000), st.integers(0, 10000))
def test_certain_verdicts_are_sound(theta, depth, x, y):
    v = verdict_from_codes(plain_path_code(theta, depth, x), plain_path_code(theta, depth, y), depth)
    if v is Verdict.GREATER:
        assert x + y > theta
    elif v is Verdict.LESS_EQ:
        assert x + y <= theta


@settings(max_examples=200)
@given(st.integers(1, 2**30), st.integers(1, 5), st.integers(0, 2**31), st.integers(0, 2**31))
def test_deeper_trees_refine(theta, depth, x, y):
    """An Uncertain verdict at depth d+1 was already Uncertain at depth d."""
    coarse = verdict_from_codes(plain_path_code(theta, depth, x), plain_path_code(theta, depth, y), depth)
    fine = verdict_from_codes(plain_path_code(theta, depth + 1, x), plain_path_code(theta, depth + 1, y), depth + 1)
    if coarse is not Verdict.UNCERTAIN:
        assert fine is coarse
    if fine is Verdict.UNCERTAIN:
        assert coarse is Verdict.UNCERTAIN


def test_compare_sum_end_to_end():
    tree = build_tree(KEY, 64 * 100, 6)
    e = lambda c: ore_encrypt(KEY, 64 * c)
    assert compare_sum(tree, e(30), e(40)) is Verdict.LESS_EQ
    assert compare_sum(tree, e(60), e(60)) is Verdict.GREATER
    # a zero cost sits in code 0, so any partner lands at most on the uncertain line
    assert compare_sum(tree, e(0), e(500)) is Verdict.UNCERTAIN
