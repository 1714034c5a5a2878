"""Numeric evaluation of symmetric polynomials and Littlewood-Schur functions.

Variable sets are ordered tuples of complex numbers.  The order matters for
the signed products ``vandermonde`` (``prod_{i<j} (x_i - x_j)``) and
``cross_vandermonde`` (``prod_{x in X, y in Y} (x - y)``).  Every other
evaluator here is symmetric in the variables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Optional, Sequence

import numpy as np

from . import partitions as P
from .errors import NumericalGuardError, ValidationError

VariableSet = tuple[complex, ...]

# Minimum pairwise distance, relative to the largest modulus, required before
# dividing by a Vandermonde product.
SEPARATION_THRESHOLD = 1e-8


def as_vars(values: Iterable) -> VariableSet:
    """Coerce numbers, or ``[re, im]`` pairs, to a tuple of complex numbers."""
    out = []
    for v in values:
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValidationError(f"expected [re, im] pair, got {v!r}")
            out.append(complex(float(v[0]), float(v[1])))
        else:
            out.append(complex(v))
    return tuple(out)


def negate(X: Sequence[complex]) -> VariableSet:
    return tuple(-x for x in X)


def invert(X: Sequence[complex]) -> VariableSet:
    if any(x == 0 for x in X):
        raise ValidationError("cannot invert a zero variable")
    return tuple(1 / x for x in X)


def product_all(X: Sequence[complex]) -> complex:
    """``e(X) = prod_x x``; equal to 1 on the empty set."""
    out = 1 + 0j
    for x in X:
        out *= x
    return out


def vandermonde(X: Sequence[complex]) -> complex:
    out = 1 + 0j
    for i in range(len(X)):
        for j in range(i + 1, len(X)):
            out *= X[i] - X[j]
    return out


def cross_vandermonde(X: Sequence[complex], Y: Sequence[complex]) -> complex:
    out = 1 + 0j
    for x in X:
        for y in Y:
            out *= x - y
    return out


def separation(X: Sequence[complex]) -> float:
    """Minimum pairwise distance divided by the largest modulus (``inf`` if < 2 points)."""
    if len(X) < 2:
        return math.inf
    scale = max(abs(x) for x in X) or 1.0
    gap = min(abs(a - b) for a, b in itertools.combinations(X, 2))
    return gap / scale


def is_separated(X: Sequence[complex], threshold: float = SEPARATION_THRESHOLD) -> bool:
    return separation(X) > threshold


def _distinct_permutations(seq: Sequence[int]) -> Iterable[tuple[int, ...]]:
    counts: dict[int, int] = {}
    for s in seq:
        counts[s] = counts.get(s, 0) + 1
    values = sorted(counts)
    n = len(seq)

    def rec(prefix: list[int]):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in values:
            if counts[v]:
                counts[v] -= 1
                prefix.append(v)
                yield from rec(prefix)
                prefix.pop()
                counts[v] += 1

    return rec([])


def monomial_eval(lam: Sequence[int], X: Sequence[complex]) -> complex:
    """``m_lam(X)``: sum over distinct rearrangements of the exponent vector."""
    lam = P.normalize(lam)
    n = len(X)
    if len(lam) > n:
        return 0j
    exps = list(lam) + [0] * (n - len(lam))
    total = 0j
    for perm in _distinct_permutations(exps):
        term = 1 + 0j
        for x, a in zip(X, perm):
            if a:
                term *= x**a
        total += term
    return total


def elementary_eval(k: int, X: Sequence[complex]) -> complex:
    if k < 0 or k > len(X):
        return 0j
    coeffs = [1 + 0j] + [0j] * len(X)
    for x in X:
        for j in range(len(X), 0, -1):
            coeffs[j] += x * coeffs[j - 1]
    return coeffs[k]


def complete_eval(k: int, X: Sequence[complex]) -> complex:
    if k < 0:
        return 0j
    h = [1 + 0j] + [0j] * k
    for x in X:
        for j in range(1, k + 1):
            h[j] += x * h[j - 1]
    return h[k]


def powersum_eval(lam: Sequence[int], X: Sequence[complex]) -> complex:
    """``p_lam(X)`` for a signed partition; negative parts use ``X^{-1}``."""
    out = 1 + 0j
    for k in lam:
        if k == 0:
            continue
        if k < 0 and any(x == 0 for x in X):
            raise ValidationError("negative power sum of a zero variable")
        out *= sum((x**k for x in X), 0j)
    return out


def schur_bialternant(lam: Sequence[int], X: Sequence[complex]) -> complex:
    """``det(x_i^{lam_j + n - j}) / Delta(X)``; requires separated variables."""
    lam = P.normalize(lam)
    n = len(X)
    if len(lam) > n:
        return 0j
    if n == 0:
        return 1 + 0j
    xs = np.asarray(X, dtype=complex)
    exps = np.array([P.part(lam, j) + n - j for j in range(1, n + 1)])
    num = np.linalg.det(xs[:, None] ** exps[None, :])
    return complex(num / vandermonde(X))


def schur_tableaux(lam: Sequence[int], X: Sequence[complex]) -> complex:
    """Tableau sum, organised by the horizontal-strip branching rule.

    ``s_lam(x_1..x_n) = sum_{mu} s_mu(x_1..x_{n-1}) x_n^{|lam|-|mu|}`` over
    ``mu`` interlacing ``lam``.  No division, so valid for coincident points.
    """
    lam = P.normalize(lam)
    X = tuple(X)
    if len(lam) > len(X):
        return 0j

    @lru_cache(maxsize=None)
    def rec(shape: P.Partition, n: int) -> complex:
        if not shape:
            return 1 + 0j
        if len(shape) > n:
            return 0j
        x = X[n - 1]
        total = 0j
        bounds = [range(P.part(shape, j + 2), shape[j] + 1) for j in range(len(shape))]
        for mu in itertools.product(*bounds):
            mu_n = P.normalize(mu)
            if len(mu_n) > n - 1:
                continue
            total += rec(mu_n, n - 1) * x ** (sum(shape) - sum(mu_n))
        return total

    return rec(lam, len(X))


def schur_eval(lam: Sequence[int], X: Sequence[complex]) -> complex:
    """``s_lam(X)``: bialternant when the points are well separated, tableaux otherwise."""
    if is_separated(X):
        return schur_bialternant(lam, X)
    return schur_tableaux(lam, X)


@lru_cache(maxsize=100_000)
def _lr_cached(lam: P.Partition, mu: P.Partition, nu: P.Partition) -> int:
    rows = len(lam)
    filling: dict[tuple[int, int], int] = {}
    cells = [(j, c) for j in range(1, rows + 1) for c in range(P.part(lam, j), P.part(mu, j), -1)]
    counts = [0] * (len(nu) + 2)

    def rec(pos: int) -> int:
        if pos == len(cells):
            return 1
        j, c = cells[pos]
        hi = filling.get((j, c + 1), len(nu))
        lo = filling.get((j - 1, c), 0) + 1
        total = 0
        for v in range(lo, hi + 1):
            if counts[v] + 1 > nu[v - 1]:
                continue
            if v > 1 and counts[v] + 1 > counts[v - 1]:
                continue
            counts[v] += 1
            filling[(j, c)] = v
            total += rec(pos + 1)
            del filling[(j, c)]
            counts[v] -= 1
        return total

    return rec(0)


def lr_coefficient(lam: Sequence[int], mu: Sequence[int], nu: Sequence[int]) -> int:
    """Littlewood-Richardson coefficient ``c^lam_{mu nu}``.

    Counts semistandard fillings of ``lam / mu`` with content ``nu`` whose
    reverse reading word (rows top to bottom, each right to left) is a
    lattice word.
    """
    lam, mu, nu = P.normalize(lam), P.normalize(mu), P.normalize(nu)
    if sum(lam) != sum(mu) + sum(nu) or not P.contains(lam, mu) or not P.contains(lam, nu):
        return 0
    return _lr_cached(lam, mu, nu)


def ls_eval_combinatorial(lam: Sequence[int], X: Sequence[complex], Y: Sequence[complex]) -> complex:
    """``LS_lam(X; Y) = sum c^lam_{mu nu} s_mu(X) s_{nu'}(Y)``."""
    lam = P.normalize(lam)
    total = 0j
    for mu in P.enumerate_partitions(sum(lam), max_length=len(X)):
        if not P.contains(lam, mu):
            continue
        s_mu = None
        for nu in P.partitions_of(sum(lam) - sum(mu), max_part=len(Y)):
            c = lr_coefficient(lam, mu, nu)
            if c == 0:
                continue
            if s_mu is None:
                s_mu = schur_eval(mu, X)
            total += c * s_mu * schur_eval(P.conjugate(nu), Y)
    return total


def _ls_sign(lam: P.Partition, m: int, n: int, k: int) -> int:
    top = sum(P.part(lam, j) for j in range(1, n - k + 1))
    return (-1) ** (top + m * k + k * (k - 1) // 2)


def ls_eval_determinantal(lam: Sequence[int], X: Sequence[complex], Y: Sequence[complex]) -> complex:
    """``LS_lam(-X; Y)`` through the block determinant in the (|Y|, |X|)-index.

    Returns 0 when the index is negative.  Raises
    :class:`NumericalGuardError` when ``X ∪ Y`` is not separated.
    """
    lam = P.normalize(lam)
    X, Y = tuple(X), tuple(Y)
    n, m = len(X), len(Y)
    k = P.index(lam, m, n)
    if k < 0:
        return 0j
    if not is_separated(X + Y):
        raise NumericalGuardError("variables of X ∪ Y are not separated")
    lamc = P.conjugate(lam)
    size = n + m - k
    mat = np.zeros((size, size), dtype=complex)
    for a, x in enumerate(X):
        for b, y in enumerate(Y):
            mat[a, b] = 1 / (x - y)
        for j in range(1, n - k + 1):
            mat[a, m + j - 1] = x ** (P.part(lam, j) + n - m - j)
    for i in range(1, m - k + 1):
        for b, y in enumerate(Y):
            mat[n + i - 1, b] = y ** (P.part(lamc, i) + m - n - i)
    pref = cross_vandermonde(Y, X) / (vandermonde(X) * vandermonde(Y))
    return _ls_sign(lam, m, n, k) * pref * complex(np.linalg.det(mat)) if size else _ls_sign(lam, m, n, k) * pref


def overlap_expand(lam: Sequence[int], X: Sequence[complex], Y: Sequence[complex], l: int) -> complex:
    """Split ``LS_lam(-X; Y)`` over ordered subsets ``S`` of size ``l`` of ``X``.

    Each term is ``LS_{lam_[l] + (n-l)^l}(-S; Y) LS_{(lam_{l+1}, ...)}(-T; Y) / Delta(T; S)``
    with ``T`` the complementary subsequence.  The pieces are evaluated
    combinatorially.
    """
    lam = P.normalize(lam)
    X, Y = tuple(X), tuple(Y)
    n, m = len(X), len(Y)
    if not is_separated(X):
        raise ValidationError("X must have pairwise distinct entries")
    k = P.index(lam, m, n)
    if not 0 <= l <= min(n - k, n):
        raise ValidationError(f"l={l} outside the admissible range for index {k}")
    head = P.normalize(P.part(lam, j) + n - l for j in range(1, l + 1))
    tail = lam[l:]
    total = 0j
    for idx in itertools.combinations(range(n), l):
        S = tuple(X[i] for i in idx)
        T = tuple(X[i] for i in range(n) if i not in idx)
        total += (
            ls_eval_combinatorial(head, negate(S), Y)
            * ls_eval_combinatorial(tail, negate(T), Y)
            / cross_vandermonde(T, S)
        )
    return total


def cauchy_product(X: Sequence[complex], Y: Sequence[complex]) -> complex:
    """``prod_{x, y} (1 - x y)^{-1}``."""
    out = 1 + 0j
    for x in X:
        for y in Y:
            if abs(x * y) >= 1:
                raise ValidationError("Cauchy product needs |xy| < 1")
            out /= 1 - x * y
    return out


def gen_cauchy_product(S: Sequence[complex], T: Sequence[complex], U: Sequence[complex], V: Sequence[complex]) -> complex:
    """``prod (1+sv) prod (1-st)^{-1} prod (1-uv)^{-1} prod (1+ut)``."""
    out = cauchy_product(S, T) * cauchy_product(U, V)
    for s in S:
        for v in V:
            out *= 1 + s * v
    for u in U:
        for t in T:
            out *= 1 + u * t
    return out


def binomial_geometric_tail(order: int, ratio: float, cutoff: int) -> float:
    """``sum_{k > cutoff} C(k + order - 1, order - 1) ratio^k``.

    Bounds the weight-``k`` shells of a product of ``order`` factors of the
    form ``(1 - a)^{-1}`` or ``(1 + a)`` with ``|a| <= ratio``.
    """
    if order == 0 or ratio == 0:
        return 0.0
    if ratio >= 1:
        return math.inf
    total = 0.0
    k = cutoff + 1
    while True:
        term = math.comb(k + order - 1, order - 1) * ratio**k
        total += term
        if k > cutoff + order and term < 1e-18 * max(total, 1e-300):
            break
        k += 1
    return total


# Floating-point allowance added to truncation bounds, relative to sum |terms|.
ROUNDOFF_RELATIVE = 1e-13


@dataclass(frozen=True)
class TruncatedSum:
    value: complex
    tail_bound: float
    cutoff: int


def cauchy_schur_sum(X: Sequence[complex], Y: Sequence[complex], cutoff: int) -> TruncatedSum:
    """``sum_{|lam| <= cutoff} s_lam(X) s_lam(Y)`` with a rigorous tail bound."""
    terms = [
        schur_eval(lam, X) * schur_eval(lam, Y)
        for lam in P.enumerate_partitions(cutoff, max_length=min(len(X), len(Y)))
    ]
    ratio = max((abs(x) * abs(y) for x in X for y in Y), default=0.0)
    tail = binomial_geometric_tail(len(X) * len(Y), ratio, cutoff)
    return TruncatedSum(sum(terms, 0j), tail + ROUNDOFF_RELATIVE * sum(map(abs, terms)), cutoff)


def cauchy_powersum_sum(X: Sequence[complex], Y: Sequence[complex], cutoff: int) -> TruncatedSum:
    """``sum_{|mu| <= cutoff} p_mu(X) p_mu(Y) / z_mu``, same tail bound as the Schur side."""
    terms = [
        powersum_eval(mu, X) * powersum_eval(mu, Y) / P.z_stat(mu)
        for mu in P.enumerate_partitions(cutoff)
    ]
    ratio = max((abs(x) * abs(y) for x in X for y in Y), default=0.0)
    tail = binomial_geometric_tail(len(X) * len(Y), ratio, cutoff)
    return TruncatedSum(sum(terms, 0j), tail + ROUNDOFF_RELATIVE * sum(map(abs, terms)), cutoff)


def gen_cauchy_ls_sum(S, T, U, V, cutoff: int) -> TruncatedSum:
    """``sum_{|lam| <= cutoff} LS_lam(S; U) LS_lam(T; V)`` with a rigorous tail bound."""
    terms = []
    for lam in P.enumerate_partitions(cutoff):
        # LS_lam(S; U) vanishes unless lam fits in the (|S|, |U|) hook.
        if P.part(lam, len(S) + 1) > len(U) or P.part(lam, len(T) + 1) > len(V):
            continue
        terms.append(ls_eval_combinatorial(lam, S, U) * ls_eval_combinatorial(lam, T, V))
    pairs = [(S, T), (U, V), (S, V), (U, T)]
    order = sum(len(a) * len(b) for a, b in pairs)
    ratio = max((abs(a) * abs(b) for A, B in pairs for a in A for b in B), default=0.0)
    tail = binomial_geometric_tail(order, ratio, cutoff)
    return TruncatedSum(sum(terms, 0j), tail + ROUNDOFF_RELATIVE * sum(map(abs, terms)), cutoff)


AtomKind = Literal["alpha", "beta"]


@dataclass(frozen=True)
class Specialization:
    """Union of alpha/beta atoms; only the power sums are needed."""

    atoms: tuple[tuple[AtomKind, VariableSet], ...] = ()

    @staticmethod
    def alpha(X: Iterable) -> "Specialization":
        return Specialization((("alpha", as_vars(X)),))

    @staticmethod
    def beta(X: Iterable) -> "Specialization":
        return Specialization((("beta", as_vars(X)),))

    def __or__(self, other: "Specialization") -> "Specialization":
        return Specialization(self.atoms + other.atoms)

    def powersum(self, k: int) -> complex:
        if k < 1:
            raise ValidationError("specialised power sums need k >= 1")
        total = 0j
        for kind, xs in self.atoms:
            pk = sum((x**k for x in xs), 0j)
            total += pk if kind == "alpha" else (-1) ** (k - 1) * pk
        return total


def specialization_powersum(lam: Sequence[int], rho: Specialization) -> complex:
    """``p_lam(rho)`` by atom additivity of each ``p_k``."""
    out = 1 + 0j
    for k in P.normalize(lam):
        out *= rho.powersum(k)
    return out
