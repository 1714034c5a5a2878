"""Main terms for averages of mixed ratios over the unitary group U(N).

A :class:`MomentQuery` holds six variable sets.  The quantity of interest is
the Haar average of

    prod_A chi_g(a) prod_B chi_{g^-1}(b) / (prod_D chi_g(d) prod_C chi_{g^-1}(c))
        * prod_E chi_g'/chi_g(e) * prod_F chi_{g^-1}'/chi_{g^-1}(f)

with ``chi_g(z) = det(I - z g^-1)``.

Conventions used throughout:

* Empty products are 1 and empty sums are 0.  The split sum over subsets of
  the empty sequence has exactly one (empty) term.
* Splits ``S, T`` of a sequence are subsequences that keep the parent order.
  They are enumerated in lexicographic order of the index set chosen for
  ``S``, so every reduction has a fixed order.
* Infinite partition sums are cut at total weight ``max_weight``.  A tail
  estimate is reported with the value (see :func:`shell_tail`).  It
  extrapolates the shells ``|shell_w| / r^w`` polynomially, where ``r`` is
  the largest relevant product of variable moduli.

The functions that carry a truncation return :class:`MainTerm`.  The exact
ratio average returns a plain complex number.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import partitions as P
from . import symfunc as SF
from .errors import NumericalGuardError, ValidationError

DEFAULT_MAX_WEIGHT = 24
DEFAULT_QUAD_POINTS = 64


@dataclass(frozen=True)
class TruncationPolicy:
    """Cut-off for infinite partition sums.

    ``tail_ratio=None`` means "use the largest relevant product of variable
    moduli", computed per operation.
    """

    max_weight: int = DEFAULT_MAX_WEIGHT
    tail_ratio: Optional[float] = None

    def __post_init__(self):
        if self.max_weight < 0:
            raise ValidationError("max_weight must be nonnegative")
        if self.tail_ratio is not None and not 0 < self.tail_ratio < 1:
            raise ValidationError("tail_ratio must lie in (0, 1)")

    def to_json(self) -> dict:
        return {"maxWeight": self.max_weight, "tailRatio": self.tail_ratio}


@dataclass(frozen=True)
class MomentQuery:
    A: SF.VariableSet = ()
    B: SF.VariableSet = ()
    C: SF.VariableSet = ()
    D: SF.VariableSet = ()
    E: SF.VariableSet = ()
    F: SF.VariableSet = ()
    N: int = 1
    cutoff: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        for name in "ABCDEF":
            vals = SF.as_vars(getattr(self, name))
            if any(v == 0 for v in vals):
                raise ValidationError(f"variables of {name} must be nonzero")
            object.__setattr__(self, name, vals)
        if int(self.N) < 1:
            raise ValidationError("N must be a positive integer")
        object.__setattr__(self, "N", int(self.N))

    def with_N(self, N: int) -> "MomentQuery":
        return replace(self, N=N)

    def to_json(self) -> dict:
        out = {name: [[v.real, v.imag] for v in getattr(self, name)] for name in "ABCDEF"}
        out["N"] = self.N
        out["cutoff"] = self.cutoff.to_json()
        return out

    @staticmethod
    def from_json(data: dict) -> "MomentQuery":
        unknown = set(data) - set("ABCDEF") - {"N", "cutoff"}
        if unknown:
            raise ValidationError(f"unknown query fields: {sorted(unknown)}")
        cut = data.get("cutoff") or {}
        policy = TruncationPolicy(int(cut.get("maxWeight", DEFAULT_MAX_WEIGHT)), cut.get("tailRatio"))
        sets = {name: SF.as_vars(data.get(name, [])) for name in "ABCDEF"}
        return MomentQuery(**sets, N=int(data.get("N", 1)), cutoff=policy)


@dataclass(frozen=True)
class MainTerm:
    value: complex
    tail_bound: float
    truncation: dict

    def __complex__(self) -> complex:
        return complex(self.value)

    def to_json(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "tail_bound": self.tail_bound,
            "truncation": self.truncation,
        }


# ---------------------------------------------------------------- helpers


def splits(seq: Sequence[complex], k: int) -> Iterator[tuple[SF.VariableSet, SF.VariableSet]]:
    """Ordered splits ``(S, T)`` with ``|S| = k``; empty when ``k > len(seq)``."""
    seq = tuple(seq)
    for idx in itertools.combinations(range(len(seq)), k):
        chosen = set(idx)
        yield tuple(seq[i] for i in idx), tuple(seq[i] for i in range(len(seq)) if i not in chosen)


def all_splits(seq: Sequence[complex]) -> Iterator[tuple[SF.VariableSet, SF.VariableSet]]:
    for k in range(len(seq) + 1):
        yield from splits(seq, k)


def _shift_down(lam: P.Partition) -> P.Partition:
    """``lam - <1^l(lam)>``."""
    return P.normalize(p - 1 for p in lam)


def _check_radius(name: str, values: Sequence[complex], bound: float = 1.0, strict: bool = True) -> None:
    for v in values:
        if (abs(v) >= bound) if strict else (abs(v) > bound):
            rel = "<" if strict else "<="
            raise ValidationError(f"variables of {name} must satisfy |{name.lower()}| {rel} {bound}")


def _check_distinct(values: Sequence[complex], what: str) -> None:
    if not SF.is_separated(values):
        raise NumericalGuardError(f"{what} must have pairwise distinct entries")


def _max_product(*groups: Sequence[complex]) -> float:
    """Largest ``|x| |y|`` over pairs from the first group and any later group."""
    first, rest = groups[0], groups[1:]
    best = 0.0
    for x in first:
        for g in rest:
            for y in g:
                best = max(best, abs(x) * abs(y))
    return best


def _ratio(policy: TruncationPolicy, natural: float) -> float:
    if policy.tail_ratio is None:
        return natural
    if policy.tail_ratio < natural:
        raise ValidationError(f"tail_ratio {policy.tail_ratio} below the variable bound {natural:.3g}")
    return policy.tail_ratio


def shell_tail(shells: Sequence[float], ratio: float, cutoff: int) -> float:
    """Estimate of the omitted shells ``w > cutoff`` for shells of size ``poly(w) ratio^w``.

    The normalised shells ``|s_w| / ratio^w`` are replaced by their running
    maximum.  The polynomial degree is read off the growth of that envelope
    between the first and the last nonzero shell, plus three for safety
    (complex phases make the shells oscillate around the envelope).  The
    fitted envelope is then summed from ``cutoff + 1`` onward, and a
    floating-point allowance proportional to ``sum |s_w|`` is added.  This is
    an estimate, not a proof.
    """
    if ratio <= 0 or not any(shells):
        return 0.0
    if ratio >= 1:
        return math.inf
    env, best = [], 0.0
    for w, s in enumerate(shells):
        best = max(best, abs(s) / ratio**w)
        env.append(best)
    nonzero = [w for w, s in enumerate(shells) if s]
    first, top = max(nonzero[0], 1), nonzero[-1]
    degree = 0.0
    if top > first:
        degree = math.log(env[top] / env[first]) / math.log(top / first)
    degree += 3.0
    base = max(top, 1)
    total, j = 0.0, cutoff + 1
    while j < cutoff + 100_000:
        term = (j / base) ** degree * ratio**j
        total += term
        if j > cutoff + 2 * degree and term < 1e-17 * total:
            break
        j += 1
    return env[top] * total + SF.ROUNDOFF_RELATIVE * sum(abs(s) for s in shells)


def _truncation(policy: TruncationPolicy, ratio: float, **extra) -> dict:
    out = {"maxWeight": policy.max_weight, "tailRatio": ratio}
    out.update(extra)
    return out


def _negpower(chi: P.Partition, S: Sequence[complex]) -> complex:
    """``p_{-chi}(-S)``."""
    return SF.powersum_eval(tuple(-k for k in chi), SF.negate(S))


# ------------------------------------------------------------ ratio theorem


def _ratio_weight(S, T, C, D, N: int, la: int) -> complex:
    """``e(-S)^(N + l(A) - l(D)) Delta(D;S) / Delta(T;S) prod_{t, c} (1 - t c)``."""
    w = SF.product_all(SF.negate(S)) ** (N + la - len(D))
    w *= SF.cross_vandermonde(D, S) / SF.cross_vandermonde(T, S)
    for t in T:
        for c in C:
            w *= 1 - t * c
    return w


def _ratio_checks(A, B, C, D, N: int) -> tuple:
    _check_radius("C", C)
    _check_radius("D", D)
    if len(C) > N:
        raise ValidationError("need l(C) <= N")
    pool = tuple(A) + SF.invert(B)
    _check_distinct(pool, "A ∪ B^-1")
    return pool


def ratio_average(A, B, C, D, N: int) -> complex:
    """Exact Haar average of ``prod chi_g(a) prod chi_{g^-1}(b) / (prod chi_g(d) prod chi_{g^-1}(c))``.

    Valid for ``l(D) <= N + l(A)`` and ``l(C) <= N``.
    """
    A, B, C, D = (SF.as_vars(v) for v in (A, B, C, D))
    pool = _ratio_checks(A, B, C, D, N)
    if len(D) > N + len(A):
        raise ValidationError("need l(D) <= N + l(A)")
    total = 0j
    for S, T in splits(pool, len(B)):
        total += _ratio_weight(S, T, C, D, N, len(A))
    return SF.product_all(SF.negate(B)) ** N * SF.cauchy_product(C, D) * total


# ------------------------------------------------- ratios with E (F empty)


def _chi_sum_negative(E2: Sequence[complex], S: Sequence[complex], max_size: int) -> complex:
    """``sum_{l(chi)=l(E2), |chi| <= max_size} m_{chi-1}(-E2) p_{-chi}(-S)``."""
    h = len(E2)
    if h == 0:
        return 1 + 0j if max_size >= 0 else 0j
    negE = SF.negate(E2)
    total = 0j
    for chi in P.partitions_with_length(max_size, h):
        total += SF.monomial_eval(_shift_down(chi), negE) * _negpower(chi, S)
    return total


def _psi_shells(E1: Sequence[complex], C: Sequence[complex], K: int) -> list[complex]:
    """Shells ``w -> sum_{l(psi)=l(E1), |psi|=w} m_{psi-1}(E1) p_psi(C)``."""
    g = len(E1)
    shells = [0j] * (K + 1)
    if g == 0:
        shells[0] = 1 + 0j
        return shells
    if not C:
        return shells
    for psi in P.partitions_with_length(K, g):
        shells[sum(psi)] += SF.monomial_eval(_shift_down(psi), E1) * SF.powersum_eval(psi, C)
    return shells


def mixed_ratio_E_main(A, B, C, D, E, N: int, cutoff: TruncationPolicy = TruncationPolicy()) -> MainTerm:
    """Main term with logarithmic derivatives ``E`` on the ``g`` side (``F`` empty)."""
    A, B, C, D, E = (SF.as_vars(v) for v in (A, B, C, D, E))
    pool = _ratio_checks(A, B, C, D, N)
    _check_radius("E", E)
    if len(D) > len(A):
        raise ValidationError("need l(D) <= l(A)")
    K = cutoff.max_weight
    ratio = _ratio(cutoff, _max_product(E, C))
    q_max = N - len(C)
    psi_cache: dict[tuple, tuple[complex, float]] = {}

    def psi_sum(E1):
        if E1 not in psi_cache:
            shells = _psi_shells(E1, C, K)
            psi_cache[E1] = (sum(shells, 0j), shell_tail([abs(s) for s in shells], ratio, K))
        return psi_cache[E1]

    sign = (-1) ** len(E)
    pre = SF.product_all(SF.negate(B)) ** N * SF.cauchy_product(C, D)
    total, tail = 0j, 0.0
    for S, T in splits(pool, len(B)):
        w = _ratio_weight(S, T, C, D, N, len(A))
        inner, inner_tail = 0j, 0.0
        for E1, E2 in all_splits(E):
            chi = _chi_sum_negative(E2, S, q_max)
            psi, psi_tail = psi_sum(E1)
            inner += chi * psi
            inner_tail += abs(chi) * psi_tail
        total += w * inner
        tail += abs(w) * inner_tail
    return MainTerm(sign * pre * total, abs(pre) * tail, _truncation(cutoff, ratio, chiMaxSize=q_max))


# -------------------------------------------- ratios with E and F (A = D = ∅)


def _submultisets(parts: P.Partition, size: int, max_sum: Optional[int] = None) -> list[P.Partition]:
    """Distinct sub-multisets of ``parts`` with exactly ``size`` elements (and sum <= ``max_sum``)."""
    mult = sorted(P.multiplicities(parts).items(), reverse=True)
    budget = math.inf if max_sum is None else max_sum
    out: list[P.Partition] = []

    def rec(i: int, left: int, room: float, acc: list[int]) -> None:
        if left == 0:
            out.append(tuple(acc))
            return
        if i == len(mult):
            return
        value, have = mult[i]
        for take in range(min(have, left), -1, -1):
            if take * value > room:
                continue
            rec(i + 1, left - take, room - take * value, acc + [value] * take)

    rec(0, size, budget, [])
    return out


def _omega_weight(union_mult, omega: P.Partition) -> int:
    """``prod_i i^{m_i(omega)} m_i(u)! / m_i(u \\ omega)!``."""
    w = 1
    for i, k in P.multiplicities(omega).items():
        have = union_mult.get(i, 0)
        if have < k:
            return 0
        w *= i**k * math.factorial(have) // math.factorial(have - k)
    return w


def mixed_ratio_EF_main(B, C, E, F, N: int, cutoff: TruncationPolicy = TruncationPolicy()) -> MainTerm:
    """Main term with logarithmic derivatives on both sides and ``A = D = ∅``.

    Vanishes unless ``l(F) <= l(E)``.
    """
    B, C, E, F = (SF.as_vars(v) for v in (B, C, E, F))
    _check_radius("B", B, strict=False)
    _check_radius("C", C)
    _check_radius("E", E)
    _check_radius("F", F)
    K = cutoff.max_weight
    natural = max(_max_product(E, C, F), _max_product(E, B))
    ratio = _ratio(cutoff, natural)
    trunc = _truncation(cutoff, ratio)
    if len(F) > len(E):
        return MainTerm(0j, 0.0, trunc)
    f = len(F)
    pC = [SF.powersum_eval((k,), C) for k in range(K + 1)]
    total, tail = 0j, 0.0
    for E1, E2 in all_splits(E):
        # chi-sum with p_chi(-B): no N-dependent cap.
        chi_shells = [0j] * (K + 1)
        if not E2:
            chi_shells[0] = 1 + 0j
        elif B:
            negE2, negB = SF.negate(E2), SF.negate(B)
            for chi in P.partitions_with_length(K, len(E2)):
                chi_shells[sum(chi)] += SF.monomial_eval(_shift_down(chi), negE2) * SF.powersum_eval(chi, negB)
        chi_val = sum(chi_shells, 0j)
        chi_tail = shell_tail([abs(s) for s in chi_shells], ratio, K)
        if chi_val == 0 and chi_tail == 0:
            continue
        psi_shells = [0j] * (K + 1)
        if len(E1) >= f:
            psis = [()] if not E1 else P.partitions_with_length(K, len(E1))
            for psi in psis:
                m_e = SF.monomial_eval(_shift_down(psi), E1) if E1 else 1
                mult = P.multiplicities(psi)
                acc = 0j
                for omega in _submultisets(psi, f):
                    rest = P.difference(psi, omega)
                    p_rest = 1 + 0j
                    for k in rest:
                        p_rest *= pC[k]
                    m_f = SF.monomial_eval(_shift_down(omega), F) if F else 1
                    acc += m_f * _omega_weight(mult, omega) * p_rest
                psi_shells[sum(psi)] += m_e * acc
        psi_val = sum(psi_shells, 0j)
        psi_tail = shell_tail([abs(s) for s in psi_shells], ratio, K)
        total += chi_val * psi_val
        tail += abs(chi_val) * psi_tail + chi_tail * (abs(psi_val) + psi_tail)
    return MainTerm((-1) ** (len(E) + f) * total, tail, trunc)


# ---------------------------------------------------- logarithmic derivatives


def log_der_main(E, F, N: int, cutoff: TruncationPolicy = TruncationPolicy()) -> MainTerm:
    """``sum_{l(lam)=l(E)} z_lam m_{lam-1}(E) m_{lam-1}(F)`` if ``l(E) = l(F)``, else 0."""
    E, F = SF.as_vars(E), SF.as_vars(F)
    _check_radius("E", E)
    _check_radius("F", F)
    K = cutoff.max_weight
    ratio = _ratio(cutoff, _max_product(E, F))
    trunc = _truncation(cutoff, ratio)
    if len(E) != len(F):
        return MainTerm(0j, 0.0, trunc)
    shells = [0j] * (K + 1)
    lams = [()] if not E else P.partitions_with_length(K, len(E))
    for lam in lams:
        shells[sum(lam)] += P.z_stat(lam) * SF.monomial_eval(_shift_down(lam), E) * SF.monomial_eval(_shift_down(lam), F)
    return MainTerm(sum(shells, 0j), shell_tail([abs(s) for s in shells], ratio, K), trunc)


def completed_log_der_main(E, F, N: int, cutoff: TruncationPolicy = TruncationPolicy()) -> MainTerm:
    """``sum_lam (-N/2)^(l(E)+l(F)-2l(lam)) z_lam m_lam(E) m_lam(F)``."""
    E, F = SF.as_vars(E), SF.as_vars(F)
    _check_radius("E", E)
    _check_radius("F", F)
    K = cutoff.max_weight
    ratio = _ratio(cutoff, _max_product(E, F))
    shells = [0j] * (K + 1)
    top = len(E) + len(F)
    for lam in P.enumerate_partitions(K, max_length=min(len(E), len(F))):
        coeff = (-N / 2) ** (top - 2 * len(lam)) * P.z_stat(lam)
        shells[sum(lam)] += coeff * SF.monomial_eval(lam, E) * SF.monomial_eval(lam, F)
    return MainTerm(sum(shells, 0j), shell_tail([abs(s) for s in shells], ratio, K), _truncation(cutoff, ratio))


# ----------------------------------------------------------------- recipe


@dataclass
class _LamEntry:
    lam: P.Partition
    weight: int
    mult: dict
    coeff: complex  # p_lam(rho) / z_lam


def recipe_main(query: MomentQuery) -> MainTerm:
    """Full main term produced by the recipe for mixed ratios.

    Double loop over ``psi`` and ``lam`` with ``|psi| + |lam| <= max_weight``.
    For each pair, ``xi = (psi ∪ lam) \\ omega`` is solved as a multiset for
    every admissible ``omega``.  The weights come from the power-sum
    derivation rule, and ``p_lam`` is evaluated on the specialisation
    ``beta(-T) ∪ alpha(D)``.
    """
    q = query
    A, B, C, D, E, F, N = q.A, q.B, q.C, q.D, q.E, q.F, q.N
    pool = _ratio_checks(A, B, C, D, N)
    if len(D) > len(A):
        raise ValidationError("need l(D) <= l(A)")
    _check_radius("E", E)
    _check_radius("F", F)
    K = q.cutoff.max_weight
    pool_max = max((abs(t) for t in pool), default=0.0)
    natural = max(_max_product(E, C, F), _max_product(C, D), max((abs(c) for c in C), default=0.0) * pool_max)
    ratio = _ratio(q.cutoff, natural) if natural < 1 else natural
    q_max = N - len(C)
    f = len(F)
    pC = [SF.powersum_eval((k,), C) for k in range(K + 1)]
    pre = (-1) ** (len(E) + f) * SF.product_all(SF.negate(B)) ** N
    m_f_cache: dict[P.Partition, complex] = {}

    def m_f(omega):
        if omega not in m_f_cache:
            m_f_cache[omega] = SF.monomial_eval(_shift_down(omega), F) if F else 1
        return m_f_cache[omega]

    total, tail = 0j, 0.0
    for S, T in splits(pool, len(B)):
        w = SF.product_all(SF.negate(S)) ** (N + len(A) - len(D))
        w *= SF.cross_vandermonde(D, S) / SF.cross_vandermonde(T, S)
        rho = SF.Specialization.beta(SF.negate(T)) | SF.Specialization.alpha(D)
        lam_table = [
            _LamEntry(lam, sum(lam), P.multiplicities(lam), SF.specialization_powersum(lam, rho) / P.z_stat(lam))
            for lam in P.enumerate_partitions(K)
        ]
        lam_table = [e for e in lam_table if e.coeff != 0]
        lam_shells = [0j] * (K + 1)
        for e in lam_table:
            p_lam = e.coeff
            for k in e.lam:
                p_lam *= pC[k]
            lam_shells[e.weight] += p_lam
        for E1, E2 in all_splits(E):
            chi_by_size = [0j] * (q_max + 1)
            negE2 = SF.negate(E2)
            for chi in ([()] if not E2 else P.partitions_with_length(q_max, len(E2))):
                chi_by_size[sum(chi)] += SF.monomial_eval(_shift_down(chi), negE2) * _negpower(chi, S)
            # an omega of size n leaves room for chi sizes q <= q_max - n
            chi_cum = list(itertools.accumulate(chi_by_size))
            shells = [0j] * (K + 1)
            psis = [()] if not E1 else list(P.partitions_with_length(K, len(E1)))
            for psi in psis:
                m_e = SF.monomial_eval(_shift_down(psi), E1) if E1 else 1
                p_psi = 1 + 0j
                for k in psi:
                    p_psi *= pC[k]
                size_psi = sum(psi)
                if f == 0:
                    # omega is empty: xi = psi ∪ lam and the weight is 1
                    for wl in range(K - size_psi + 1):
                        shells[size_psi + wl] += m_e * p_psi * lam_shells[wl] * chi_cum[q_max]
                    continue
                psi_mult = P.multiplicities(psi)
                for entry in lam_table:
                    if entry.weight > K - size_psi:
                        continue
                    u_mult = psi_mult + entry.mult
                    u_parts = tuple(sorted(u_mult.elements(), reverse=True))
                    acc = 0j
                    for omega in _submultisets(u_parts, f, q_max):
                        rest = P.difference(u_parts, omega)
                        p_xi = 1 + 0j
                        for k in rest:
                            p_xi *= pC[k]
                        acc += m_f(omega) * _omega_weight(u_mult, omega) * p_xi * chi_cum[q_max - sum(omega)]
                    shells[size_psi + entry.weight] += m_e * entry.coeff * acc
            total += w * sum(shells, 0j)
            tail += abs(w) * shell_tail([abs(s) for s in shells], ratio, K)
    return MainTerm(pre * total, abs(pre) * tail, _truncation(q.cutoff, ratio, chiMaxSize=q_max))


# --------------------------------------------------------- explicit formula


@dataclass(frozen=True)
class ExplicitFormulaQuery:
    """Eigenvalue sum ``sum_{j_1..j_n} prod h(rho_j) f(rho_j1, ..., rho_jn)``.

    ``h`` and ``f`` are called with numpy arrays; scalar-only callables are
    wrapped with :func:`numpy.vectorize` automatically.
    """

    h: Callable
    f: Callable
    n: int
    r: float
    N: int
    quad_points: int = DEFAULT_QUAD_POINTS
    lambda_cutoff: int = DEFAULT_MAX_WEIGHT

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise ValidationError("explicit formula supports 1 <= n <= 3")
        if not 0 < self.r < 1:
            raise ValidationError("r must lie in (0, 1)")
        if self.N < 1:
            raise ValidationError("N must be positive")
        if self.quad_points < 2 or self.quad_points % 2:
            raise ValidationError("quad_points must be an even integer >= 2")


def call_vectorized(func: Callable, *args: np.ndarray) -> np.ndarray:
    """Evaluate ``func`` elementwise over broadcast arrays."""
    shape = np.broadcast_shapes(*(np.shape(a) for a in args))
    try:
        out = np.asarray(func(*args), dtype=complex)
        if out.shape != shape:
            out = np.broadcast_to(out, shape)
    except (TypeError, ValueError):
        out = np.asarray(np.vectorize(func, otypes=[complex])(*args), dtype=complex)
    return out


def _monomial_grid(lam: P.Partition, xs: Sequence[np.ndarray]) -> np.ndarray | complex:
    if len(lam) > len(xs):
        return 0.0
    if not xs:
        return 1.0
    exps = list(lam) + [0] * (len(xs) - len(lam))
    total = 0
    for perm in SF._distinct_permutations(exps):
        term = 1
        for x, a in zip(xs, perm):
            if a:
                term = term * x**a
        total = total + term
    return total


def _explicit_rhs_grid(q: ExplicitFormulaQuery, M: int) -> tuple[complex, list[float]]:
    n, r = q.n, q.r
    t = 2 * np.pi * np.arange(M) / M
    inner = r * np.exp(-1j * t)
    outer = np.exp(1j * t) / r
    shells = [0.0] * (q.lambda_cutoff + 1)
    total = 0j

    def axis(v: np.ndarray, j: int) -> np.ndarray:
        shape = [1] * n
        shape[j] = M
        return v.reshape(shape)

    for k in range(n + 1):
        zs = [axis(inner if j < k else outer, j) for j in range(n)]
        ws = [axis(inner, j) for j in range(n)]  # 1/z on the outer circle is r e^{-it}
        H = 1
        for z in zs:
            hv = call_vectorized(q.h, z)
            H = H * hv
        base = H * call_vectorized(q.f, *zs)
        if not np.all(np.isfinite(base)):
            raise NumericalGuardError("h or f produced non-finite values on the quadrature grid")
        for lam in P.enumerate_partitions(q.lambda_cutoff, max_length=min(k, n - k)):
            weight = (q.N / 2) ** (n - 2 * len(lam)) * P.z_stat(lam) * math.comb(n, k)
            integrand = base * _monomial_grid(lam, ws[:k]) * _monomial_grid(lam, ws[k:])
            val = weight * complex(np.mean(np.broadcast_to(integrand, (M,) * n)))
            total += val
            shells[sum(lam)] += abs(val)
    return total, shells


def explicit_formula_rhs(q: ExplicitFormulaQuery) -> MainTerm:
    """Annulus-contour side of the explicit formula by the periodic trapezoidal rule.

    ``tail_bound`` adds two pieces: the quadrature error estimate
    ``|I_M - I_{M/2}|`` and the geometric tail of the lambda-sum with ratio
    ``r^2``.
    """
    value, shells = _explicit_rhs_grid(q, q.quad_points)
    coarse, _ = _explicit_rhs_grid(q, q.quad_points // 2)
    quad_err = abs(value - coarse)
    lam_tail = shell_tail(shells, q.r**2, q.lambda_cutoff)
    trunc = {"quadPoints": q.quad_points, "lambdaCutoff": q.lambda_cutoff, "r": q.r, "quadError": quad_err, "lambdaTail": lam_tail}
    return MainTerm(value, quad_err + lam_tail, trunc)
