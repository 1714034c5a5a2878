"""Integer partitions, Ferrers diagrams and ribbons.

Partitions are plain tuples of positive integers in weakly decreasing order;
trailing zeros are stripped by :func:`normalize`, so ``(3, 1, 0) == (3, 1)``
after normalization.  The empty partition is ``()``.

Diagram membership follows a (column, row) convention: the point ``(i, j)``
lies in the diagram of ``lam`` iff ``1 <= j <= len(lam)`` and
``1 <= i <= lam[j - 1]``.

A *k-ribbon* is an edgewise-connected skew diagram of ``k`` boxes without a
2x2 block; its height is the number of rows it occupies minus one.  We write
``mu ->k lam`` when ``lam / mu`` is a k-ribbon.  Ribbon enumeration works on
beta-sets (the row-end positions ``lam_j + L - j``): adding a k-ribbon moves
one bead ``k`` places to the right, and the height equals the number of beads
jumped over.  That costs O(rows) per call.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

Partition = tuple[int, ...]

# Upper cap on the size of partitions accepted by the enumerators.
MAX_SIZE = 64


@dataclass(frozen=True)
class RibbonStep:
    """One edge ``start ->k end`` of the ribbon relation."""

    start: Partition
    end: Partition
    size: int
    height: int


def normalize(parts: Iterable[int]) -> Partition:
    """Return ``parts`` as a canonical partition tuple.

    Raises ``ValueError`` for negative or increasing entries.
    """
    seq = [int(p) for p in parts]
    while seq and seq[-1] == 0:
        seq.pop()
    for a, b in zip(seq, seq[1:]):
        if b > a:
            raise ValueError(f"parts must be weakly decreasing: {seq}")
    if seq and seq[-1] < 0:
        raise ValueError(f"parts must be nonnegative: {seq}")
    return tuple(seq)


def size(lam: Sequence[int]) -> int:
    return sum(lam)


def length(lam: Sequence[int]) -> int:
    return sum(1 for p in lam if p > 0)


def part(lam: Sequence[int], j: int) -> int:
    """``lam_j`` with 1-based ``j``; zero past the end."""
    return lam[j - 1] if 1 <= j <= len(lam) else 0


def conjugate(lam: Sequence[int]) -> Partition:
    """Transpose of the Ferrers diagram."""
    lam = normalize(lam)
    if not lam:
        return ()
    return tuple(sum(1 for p in lam if p > i) for i in range(lam[0]))


def contains_point(lam: Sequence[int], i: int, j: int) -> bool:
    """Whether the (column, row) point ``(i, j)`` lies in the diagram."""
    return j >= 1 and i >= 1 and i <= part(lam, j)


def contains(outer: Sequence[int], inner: Sequence[int]) -> bool:
    """Diagram containment ``inner ⊆ outer``."""
    if len(normalize(inner)) > len(normalize(outer)):
        return False
    return all(part(outer, j) >= p for j, p in enumerate(inner, start=1))


def mn_complement(lam: Sequence[int], m: int, n: int) -> Partition:
    """Reflected complement ``(m - lam_n, ..., m - lam_1)`` inside the ``m^n`` box."""
    lam = normalize(lam)
    if length(lam) > n or (lam and lam[0] > m):
        raise ValueError(f"{lam} does not fit in the ({m},{n}) rectangle")
    return normalize(m - part(lam, j) for j in range(n, 0, -1))


def index(lam: Sequence[int], m: int, n: int) -> int:
    """The (m, n)-index of ``lam``.

    The largest ``k <= min(m, n)`` such that the point
    ``(m + 1 - k, n + 1 - k)`` lies outside the diagram.
    """
    if m < 0 or n < 0:
        raise ValueError("m and n must be nonnegative")
    lam = normalize(lam)
    k = min(m, n)
    while contains_point(lam, m + 1 - k, n + 1 - k):
        k -= 1
    return k


def multiplicities(lam: Sequence[int]) -> Counter:
    """Counter ``i -> m_i(lam)`` over the positive parts."""
    return Counter(p for p in lam if p > 0)


def z_stat(lam: Sequence[int]) -> int:
    """``z_lam = prod_i i^{m_i} m_i!``."""
    out = 1
    for i, mult in multiplicities(lam).items():
        out *= i**mult * math.factorial(mult)
    return out


def union(mu: Sequence[int], nu: Sequence[int]) -> Partition:
    """Multiset union of parts, sorted into a partition."""
    return tuple(sorted([p for p in mu if p > 0] + [p for p in nu if p > 0], reverse=True))


def difference(nu: Sequence[int], mu: Sequence[int]) -> Optional[Partition]:
    """Multiset difference ``nu \\ mu``, or ``None`` when ``mu`` is not a sub-multiset."""
    cnt = multiplicities(nu)
    cnt.subtract(multiplicities(mu))
    if any(v < 0 for v in cnt.values()):
        return None
    return tuple(sorted(cnt.elements(), reverse=True))


def add_parts(lam: Sequence[int], mu: Sequence[int]) -> Partition:
    """Componentwise sum ``lam + mu`` (shorter sequence padded with zeros)."""
    width = max(len(lam), len(mu))
    return normalize(part(lam, j) + part(mu, j) for j in range(1, width + 1))


def subtract_rectangle(lam: Sequence[int], m: int, n: int) -> Optional[Partition]:
    """``lam - <m^n>`` when ``l(lam) <= n`` and ``lam_n >= m``, else ``None``."""
    lam = normalize(lam)
    if length(lam) > n:
        return None
    if n > 0 and part(lam, n) < m:
        return None
    return normalize(part(lam, j) - m for j in range(1, n + 1))


def cells(lam: Sequence[int]) -> set[tuple[int, int]]:
    """All (column, row) points of the diagram."""
    return {(i, j) for j, p in enumerate(lam, start=1) for i in range(1, p + 1)}


def is_ribbon(outer: Sequence[int], inner: Sequence[int]) -> Optional[int]:
    """Height of ``outer / inner`` if it is a (nonempty) ribbon, else ``None``.

    Checked directly on the box set: containment, no 2x2 block and edgewise
    connectivity.
    """
    outer, inner = normalize(outer), normalize(inner)
    if not contains(outer, inner):
        return None
    boxes = cells(outer) - cells(inner)
    if not boxes:
        return None
    for i, j in boxes:
        if {(i + 1, j), (i, j + 1), (i + 1, j + 1)} <= boxes:
            return None
    start = next(iter(boxes))
    seen = {start}
    stack = [start]
    while stack:
        i, j = stack.pop()
        for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
            if nb in boxes and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    if seen != boxes:
        return None
    return len({j for _, j in boxes}) - 1


def _beta_set(lam: Partition, rows: int) -> list[int]:
    return [part(lam, j) + rows - j for j in range(1, rows + 1)]


def _from_beta(beta: Iterable[int]) -> Partition:
    ordered = sorted(beta, reverse=True)
    rows = len(ordered)
    return normalize(b - (rows - j) for j, b in enumerate(ordered, start=1))


def add_ribbons(mu: Sequence[int], k: int, max_length: Optional[int] = None) -> list[RibbonStep]:
    """All ``lam`` with ``mu ->k lam`` and ``l(lam) <= max_length``."""
    if k < 1:
        raise ValueError("ribbon size must be positive")
    mu = normalize(mu)
    rows = len(mu) + k
    beta = _beta_set(mu, rows)
    occupied = set(beta)
    steps = []
    for b in beta:
        if b + k in occupied:
            continue
        height = sum(1 for c in beta if b < c < b + k)
        lam = _from_beta([c for c in beta if c != b] + [b + k])
        if max_length is not None and len(lam) > max_length:
            continue
        steps.append(RibbonStep(mu, lam, k, height))
    steps.sort(key=lambda s: s.end, reverse=True)
    return steps


def remove_ribbons(lam: Sequence[int], k: int) -> list[RibbonStep]:
    """All ``mu`` with ``mu ->k lam``."""
    if k < 1:
        raise ValueError("ribbon size must be positive")
    lam = normalize(lam)
    rows = len(lam)
    beta = _beta_set(lam, rows)
    occupied = set(beta)
    steps = []
    for b in beta:
        if b - k < 0 or b - k in occupied:
            continue
        height = sum(1 for c in beta if b - k < c < b)
        mu = _from_beta([c for c in beta if c != b] + [b - k])
        steps.append(RibbonStep(mu, lam, k, height))
    steps.sort(key=lambda s: s.start, reverse=True)
    return steps


def _bounded(total: int, max_length: int, max_part: int) -> Iterator[Partition]:
    """Partitions of exactly ``total`` in reverse lexicographic order."""
    if total == 0:
        yield ()
        return
    if max_length <= 0:
        return
    for first in range(min(total, max_part), 0, -1):
        for rest in _bounded(total - first, max_length - 1, first):
            yield (first,) + rest


def partitions_of(total: int, max_length: Optional[int] = None, max_part: Optional[int] = None) -> Iterator[Partition]:
    """Partitions of ``total`` (reverse lexicographic), optionally capped."""
    if total < 0:
        return iter(())
    ml = total if max_length is None else max_length
    mp = total if max_part is None else max_part
    return _bounded(total, ml, mp)


def enumerate_partitions(max_size: int, max_length: Optional[int] = None, max_part: Optional[int] = None) -> Iterator[Partition]:
    """All partitions with ``|lam| <= max_size`` in graded lexicographic order.

    Grades are visited by increasing size; inside a grade the order is reverse
    lexicographic, e.g. ``(3), (2, 1), (1, 1, 1)``.
    """
    if max_size > MAX_SIZE:
        raise ValueError(f"partition size cap is {MAX_SIZE}")
    for total in range(max_size + 1):
        yield from partitions_of(total, max_length, max_part)


def partitions_with_length(total_max: int, exact_length: int, min_part: int = 1) -> Iterator[Partition]:
    """Partitions of length exactly ``exact_length``, parts ``>= min_part``, size ``<= total_max``."""
    for lam in enumerate_partitions(total_max, exact_length):
        if len(lam) == exact_length and (not lam or lam[-1] >= min_part):
            yield lam


def to_key(lam: Sequence[int]) -> str:
    """Serialization key ``"3,1"`` (empty string for the empty partition)."""
    return ",".join(str(p) for p in normalize(lam))


def from_key(key: str) -> Partition:
    key = key.strip()
    if not key:
        return ()
    return normalize(int(p) for p in key.split(","))
