import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixedratios import partitions as P

from conftest import partitions


def boxes(lam):
    return {(row, col) for row, p in enumerate(lam, 1) for col in range(1, p + 1)}


def brute_ribbon_height(outer, inner):
    """Skew shape test written straight from the box picture (row, col)."""
    if len(inner) > len(outer) or any(a < b for a, b in zip(outer, inner)):
        return None
    skew = boxes(outer) - boxes(inner)
    if not skew:
        return None
    if any({(r + 1, c), (r, c + 1), (r + 1, c + 1)} <= skew for r, c in skew):
        return None
    comp = {min(skew)}
    frontier = list(comp)
    while frontier:
        r, c = frontier.pop()
        for nb in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
            if nb in skew and nb not in comp:
                comp.add(nb)
                frontier.append(nb)
    if comp != skew:
        return None
    return len({r for r, _ in skew}) - 1


def brute_all_partitions(n):
    if n == 0:
        return [()]
    out = set()
    for lam in brute_all_partitions(n - 1):
        for i in range(len(lam) + 1):
            new = list(lam) + [0]
            new[i] += 1
            new = tuple(sorted((p for p in new if p), reverse=True))
            out.add(new)
    return sorted(out, reverse=True)


def scan_index(lam, m, n):
    """Largest k <= min(m, n) with (m+1-k, n+1-k) outside the diagram; point (i, j) is in lam iff i <= lam_j."""
    def inside(i, j):
        return 1 <= j <= len(lam) and 1 <= i <= lam[j - 1]

    for k in range(min(m, n), -100, -1):
        if not inside(m + 1 - k, n + 1 - k):
            return k


# ------------------------------------------------------------ examples


@pytest.mark.parametrize("lam, expected", [((3, 1), (2, 1, 1)), ((), ()), ((2, 2), (2, 2))])
def test_conjugate_examples(lam, expected):
    assert P.conjugate(lam) == expected


@pytest.mark.parametrize("lam, m, n, expected", [((), 2, 2, (2, 2)), ((2, 1), 2, 2, (1,)), ((1,), 1, 3, (1, 1))])
def test_mn_complement_examples(lam, m, n, expected):
    assert P.mn_complement(lam, m, n) == expected


def test_mn_complement_rejects_oversized():
    with pytest.raises(ValueError):
        P.mn_complement((3,), 2, 2)


@pytest.mark.parametrize("lam, m, n, expected", [((), 2, 3, 2), ((1,), 1, 1, 0), ((3, 3, 3), 2, 2, -1)])
def test_index_examples(lam, m, n, expected):
    # (3,3,3) at (2,2): the first point outside the diagram is (4,4), reached at k = -1
    assert P.index(lam, m, n) == expected == scan_index(lam, m, n)


@pytest.mark.parametrize("lam, expected", [((), 1), ((2, 1), 2), ((2, 2, 1), 8)])
def test_z_stat_examples(lam, expected):
    assert P.z_stat(lam) == expected


def _adds(mu, k, max_length=None):
    return {(s.end, s.height) for s in P.add_ribbons(mu, k, max_length)}


def test_add_ribbons_examples():
    assert _adds((), 2) == {((2,), 0), ((1, 1), 1)}
    assert _adds((1,), 1) == {((2,), 0), ((1, 1), 0)}
    assert _adds((1,), 1, 1) == {((2,), 0)}


def test_remove_ribbons_examples():
    assert {(s.start, s.height) for s in P.remove_ribbons((2,), 2)} == {((), 0)}
    assert {(s.start, s.height) for s in P.remove_ribbons((2, 1), 3)} == {((), 1)}
    assert {(s.start, s.height) for s in P.remove_ribbons((2, 2), 3)} == {((1,), 1)}


@pytest.mark.parametrize("outer, inner, expected", [((2, 2), (1,), 1), ((2, 2), (), None), ((3, 1), (1,), None)])
def test_is_ribbon_examples(outer, inner, expected):
    assert P.is_ribbon(outer, inner) == expected == brute_ribbon_height(outer, inner)


def test_enumerate_partitions_examples():
    assert list(P.enumerate_partitions(0)) == [()]
    assert set(P.enumerate_partitions(2)) == {(), (1,), (2,), (1, 1)}
    assert set(P.enumerate_partitions(3, max_length=1)) == {(), (1,), (2,), (3,)}


def test_normalize_rejects_bad_input():
    with pytest.raises(ValueError):
        P.normalize((1, 2))
    with pytest.raises(ValueError):
        P.normalize((2, -1))
    assert P.normalize((3, 1, 0, 0)) == (3, 1)


def test_enumeration_matches_brute_force():
    for n in range(0, 9):
        assert sorted(P.partitions_of(n)) == sorted(brute_all_partitions(n))
    graded = list(P.enumerate_partitions(6))
    assert [sum(l) for l in graded] == sorted(sum(l) for l in graded)
    assert len(graded) == len(set(graded)) == sum(len(brute_all_partitions(n)) for n in range(7))


def test_partitions_with_length():
    got = set(P.partitions_with_length(5, 2))
    assert got == {lam for n in range(6) for lam in brute_all_partitions(n) if len(lam) == 2}


def test_keys_roundtrip():
    assert P.to_key((3, 1)) == "3,1"
    assert P.from_key("3,1") == (3, 1)
    assert P.from_key(P.to_key(())) == ()


def test_multiset_helpers():
    assert P.union((2, 1), (3, 1)) == (3, 2, 1, 1)
    assert P.difference((3, 2, 1, 1), (1, 2)) == (3, 1)
    assert P.difference((2,), (1,)) is None
    assert P.add_parts((2, 1), (1, 1, 1)) == (3, 2, 1)
    assert P.subtract_rectangle((3, 3, 2), 2, 3) == (1, 1)
    assert P.subtract_rectangle((3, 1), 2, 2) is None


# --------------------------------------------- ribbons vs brute force


def test_ribbon_relation_exhaustive_against_boxes():
    for n in range(0, 8):
        for mu in brute_all_partitions(n):
            for k in range(1, 5):
                expected = {(lam, h) for lam in brute_all_partitions(n + k)
                            if (h := brute_ribbon_height(lam, mu)) is not None}
                assert _adds(mu, k) == expected
                for lam, h in expected:
                    assert (mu, h) in {(s.start, s.height) for s in P.remove_ribbons(lam, k)}


def test_ribbon_conjugation_rule_exhaustive():
    for n in range(0, 9):
        for lam in brute_all_partitions(n):
            for k in range(1, n + 1):
                for step in P.remove_ribbons(lam, k):
                    conj = {(s.start, s.height) for s in P.remove_ribbons(P.conjugate(lam), k)}
                    assert (P.conjugate(step.start), k - 1 - step.height) in conj


# ------------------------------------------------------------ properties


@given(partitions())
def test_conjugation_is_involution(lam):
    assert P.conjugate(P.conjugate(lam)) == lam
    assert P.size(P.conjugate(lam)) == P.size(lam)


@given(partitions(), st.integers(0, 6), st.integers(0, 6))
def test_complement_is_involution(lam, m, n):
    if P.length(lam) > n or (lam and lam[0] > m):
        return
    comp = P.mn_complement(lam, m, n)
    assert P.mn_complement(comp, m, n) == lam
    assert P.size(comp) == m * n - P.size(lam)


@given(partitions(), partitions())
def test_union_conjugates_to_sum(mu, nu):
    assert P.conjugate(P.union(mu, nu)) == P.add_parts(P.conjugate(mu), P.conjugate(nu))


@given(partitions(), st.integers(0, 5), st.integers(0, 5))
def test_index_conjugation_invariance(lam, m, n):
    assert P.index(lam, m, n) == P.index(P.conjugate(lam), n, m)
    assert P.index(lam, m, n) == scan_index(lam, m, n)


@given(partitions(max_size=10), st.integers(1, 5))
def test_add_then_remove_is_inverse(mu, k):
    for step in P.add_ribbons(mu, k):
        back = {(s.start, s.height) for s in P.remove_ribbons(step.end, k)}
        assert (mu, step.height) in back
        assert P.is_ribbon(step.end, mu) == step.height


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_removal_count_bounded_by_rectangle(m, n, data):
    lam = data.draw(partitions(max_size=m * n, max_length=n))
    if lam and lam[0] > m:
        return
    for k in range(1, m * n + 1):
        assert len(P.remove_ribbons(lam, k)) <= min(m, n)


@given(partitions(max_size=10), st.integers(1, 4), st.integers(1, 5))
def test_length_cap(mu, k, cap):
    capped = _adds(mu, k, cap)
    assert capped == {(lam, h) for lam, h in _adds(mu, k) if len(lam) <= cap}


def test_cells_and_containment():
    assert P.cells((2, 1)) == {(1, 1), (2, 1), (1, 2)}
    assert P.contains((3, 2), (2, 2)) and not P.contains((2, 2), (3,))
    for a, b in itertools.product(P.enumerate_partitions(4), repeat=2):
        assert P.contains(a, b) == (P.cells(b) <= P.cells(a))
