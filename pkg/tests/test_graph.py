"""Tests for the brute-force oracle."""

import random

import pytest

from cycletree.arith import IntPoly
from cycletree.errors import BudgetExceededError
from cycletree.graph import build_tree_bruteforce, enumerate_level, tail_analysis


def brute_decompose(f, p, n):
    """Independent reference sweep: dict successor walk, no numpy."""
    m = p**n
    succ = {x: f.eval_mod(x, m) for x in range(m)}
    state = {}
    cycles = []
    for s in range(m):
        if s in state:
            continue
        path, x = [], s
        while x not in state and x not in set(path):
            path.append(x)
            x = succ[x]
        if x in path:
            i = path.index(x)
            cycles.append(sorted(path[i:]))
            for y in path[i:]:
                state[y] = "c"
            for y in path[:i]:
                state[y] = "t"
        else:
            # path feeds an already-settled point: everything on it is a tail
            for y in path:
                state[y] = "t"
    tails = sum(1 for v in state.values() if v != "c")
    return sorted(cycles), tails


def test_enumerate_square_mod_3():
    dec = enumerate_level(IntPoly([0, 0, 1]), 3, 1)
    assert [(c.length, c.rep) for c in dec.cycles] == [(1, 0), (1, 1)]
    assert dec.tail_point_count == 1


def test_enumerate_translation():
    dec = enumerate_level(IntPoly([1, 1]), 3, 2)
    assert len(dec.cycles) == 1
    assert dec.cycles[0].length == 9
    assert dec.tail_point_count == 0


def test_enumerate_quintic_level_4():
    dec = enumerate_level(IntPoly([2, 1, 3, 1, 3, 2]), 3, 4)
    with_zero = [c for c in dec.cycles if 0 in c.members]
    assert len(with_zero) == 1
    assert with_zero[0].length == 9
    assert with_zero[0].members == (0, 2, 14, 22, 33, 35, 39, 55, 61)


def test_level_zero():
    dec = enumerate_level(IntPoly([5, 3]), 7, 0)
    assert len(dec.cycles) == 1
    assert dec.cycles[0].length == 1 and dec.cycles[0].rep == 0
    assert dec.tail_point_count == 0


@pytest.mark.parametrize("seed", range(6))
def test_sweep_matches_reference(seed):
    rng = random.Random(seed)
    p = rng.choice([3, 5, 7])
    n = rng.randint(1, 4)
    f = IntPoly(rng.randrange(p * p) for _ in range(rng.randint(1, 6)))
    dec = enumerate_level(f, p, n)
    got = sorted(list(c.members) for c in dec.cycles)
    want, tails = brute_decompose(f, p, n)
    assert got == want
    assert dec.tail_point_count == tails


def test_numpy_and_python_paths_agree():
    # 3^8 = 6561 crosses the vectorization threshold; reference stays naive
    f = IntPoly([2, 1, 3, 1, 3, 2])
    dec = enumerate_level(f, 3, 8)
    want, tails = brute_decompose(f, 3, 8)
    got = sorted(list(c.members) for c in dec.cycles)
    assert got == want and dec.tail_point_count == tails


def test_partition_invariant():
    rng = random.Random(99)
    for _ in range(10):
        p = rng.choice([3, 5, 7])
        n = rng.randint(1, 4)
        f = IntPoly(rng.randrange(p * p) for _ in range(6))
        dec = enumerate_level(f, p, n)
        assert sum(c.length for c in dec.cycles) + dec.tail_point_count == p**n


def test_budget_error_carries_requirement():
    with pytest.raises(BudgetExceededError) as err:
        enumerate_level(IntPoly([0, 1]), 5, 9, budget=10**4)
    assert err.value.required == 5**9


def test_tree_identity_map():
    tree = build_tree_bruteforce(IntPoly([0, 1]), 3, 2)
    assert tree.lengths[0] == [1]
    assert tree.lengths[1] == [1, 1, 1]
    assert tree.lengths[2] == [1] * 9
    assert tree.children[0][0] == [0, 1, 2]
    for idx in range(3):
        assert len(tree.children[1][idx]) == 3


def test_tree_translation_path():
    tree = build_tree_bruteforce(IntPoly([1, 1]), 3, 3)
    assert [tree.lengths[n] for n in range(4)] == [[1], [3], [9], [27]]
    assert all(t == 0 for t in tree.tail_points)


def test_tree_pathological_chain():
    # x + 3x^2: the chain through 0 is a fixed point at every level
    tree = build_tree_bruteforce(IntPoly([0, 1, 3]), 3, 4)
    level, idx = 1, tree.cycle_index(1, 0)
    for n in range(1, 4):
        assert tree.lengths[level][idx] == 1
        kids = tree.children[level][idx]
        same = [c for c in kids if tree.reps[level + 1][c] == 0]
        assert len(same) == 1
        level, idx = level + 1, same[0]


def test_tree_parent_projection():
    rng = random.Random(3)
    for _ in range(5):
        p = rng.choice([3, 5])
        f = IntPoly(rng.randrange(p * p) for _ in range(5))
        tree = build_tree_bruteforce(f, p, 3)
        for level in range(1, 4):
            for idx, rep in enumerate(tree.reps[level]):
                parent = tree.parents[level][idx]
                members = set()
                x = rep
                for _ in range(tree.lengths[level][idx]):
                    members.add(x % p ** (level - 1))
                    x = f.eval_mod(x, p**level)
                want = set()
                y = tree.reps[level - 1][parent]
                for _ in range(tree.lengths[level - 1][parent]):
                    want.add(y)
                    y = f.eval_mod(y, p ** (level - 1))
                assert members <= want or level == 1


def test_no_tails_over_noncritical_cycles():
    # if f' has no root on any mod-p cycle member, everything above lies on cycles
    rng = random.Random(11)
    found = 0
    while found < 5:
        p = rng.choice([3, 5])
        f = IntPoly(rng.randrange(p * p) for _ in range(5))
        dec1 = enumerate_level(f, p, 1)
        members = [m for c in dec1.cycles for m in c.members]
        deriv = f.derivative()
        if any(deriv.eval_mod(m, p) == 0 for m in members):
            continue
        found += 1
        for n in (2, 3):
            dec = enumerate_level(f, p, n)
            cyclic = sum(c.length for c in dec.cycles)
            expected = len(members) * p ** (n - 1)
            assert cyclic == expected


def test_tail_histogram_square_p5():
    stats = tail_analysis(IntPoly([0, 0, 1]), 5, 4, 0)
    assert stats.preimage_histogram == {10: 10, 25: 1}
    assert stats.expected_histogram == {10: 10, 25: 1}
    assert stats.shape_matches is True
    assert stats.max_tail_length <= 5 + (4 - 2) * 1


def test_tail_histogram_small_level():
    stats = tail_analysis(IntPoly([0, 0, 1]), 5, 2, 0)
    assert stats.preimage_histogram == {5: 1}
    assert stats.shape_matches is True


def test_tail_histogram_degenerate_second_derivative():
    stats = tail_analysis(IntPoly([0, 0, 0, 1]), 3, 3, 0)
    assert stats.second_deriv_unit is False
    assert stats.expected_histogram is None
    assert stats.shape_matches is None
    assert sum(s * c for s, c in stats.preimage_histogram.items()) == 3**2


def test_tail_analysis_preconditions():
    with pytest.raises(ValueError):
        tail_analysis(IntPoly([1, 1]), 5, 3, 0)  # f' = 1, no critical point
    with pytest.raises(ValueError):
        tail_analysis(IntPoly([0, 0, 1]), 5, 3, 2)  # 2 is not on a mod-5 cycle


def test_tail_bound_over_corpus_sample():
    rng = random.Random(17)
    for _ in range(8):
        p = rng.choice([3, 5])
        f = IntPoly(rng.randrange(p * p) for _ in range(6))
        dec1 = enumerate_level(f, p, 1)
        deriv = f.derivative()
        for c in dec1.cycles:
            critical = [m for m in c.members if deriv.eval_mod(m, p) == 0]
            if not critical:
                continue
            for n in (2, 3, 4):
                stats = tail_analysis(f, p, n, critical[0])
                assert stats.max_tail_length <= p + (n - 2) * c.length
