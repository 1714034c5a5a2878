"""Murnaghan-Nakayama expansions and the power-sum operator algebra."""

from __future__ import annotations

import math
from typing import Mapping, Optional, Sequence

from . import partitions as P
from . import symfunc as SF
from .errors import ValidationError

# Coefficients below this modulus are dropped after floating accumulation.
PRUNE_TOL = 1e-14


class _PartitionMap:
    """Immutable map from normalized partitions to coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Sequence[int], complex]] = None):
        acc: dict[P.Partition, complex] = {}
        for lam, c in (terms or {}).items():
            key = P.normalize(lam)
            acc[key] = acc.get(key, 0) + c
        self._terms = {k: v for k, v in acc.items() if not _negligible(v)}

    @property
    def terms(self) -> dict[P.Partition, complex]:
        return dict(self._terms)

    def __getitem__(self, lam: Sequence[int]) -> complex:
        return self._terms.get(P.normalize(lam), 0)

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(sorted(self._terms, key=lambda lam: (sum(lam), [-p for p in lam])))

    def items(self):
        return [(lam, self._terms[lam]) for lam in self]

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self._terms == other._terms

    def __add__(self, other):
        merged = dict(self._terms)
        for lam, c in other._terms.items():
            merged[lam] = merged.get(lam, 0) + c
        return type(self)(merged)

    def scale(self, c: complex):
        return type(self)({lam: c * v for lam, v in self._terms.items()})

    def to_json(self) -> dict:
        out = {}
        for lam, c in self.items():
            if isinstance(c, int):
                out[P.to_key(lam)] = c
            else:
                c = complex(c)
                out[P.to_key(lam)] = [c.real, c.imag]
        return out

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_json()})"


def _negligible(c) -> bool:
    if isinstance(c, int):
        return c == 0
    return abs(c) < PRUNE_TOL


class SignedPartitionSum(_PartitionMap):
    """``sum_lam c_lam s_lam`` in the Schur basis."""

    def evaluate(self, X: Sequence[complex]) -> complex:
        return sum((c * SF.schur_eval(lam, X) for lam, c in self.items()), 0j)

    def evaluate_ls(self, X: Sequence[complex], Y: Sequence[complex]) -> complex:
        return sum((c * SF.ls_eval_combinatorial(lam, X, Y) for lam, c in self.items()), 0j)


class PowerSumPoly(_PartitionMap):
    """``sum_lam c_lam p_lam`` in the power-sum basis."""

    def evaluate(self, X: Sequence[complex]) -> complex:
        return sum((c * SF.powersum_eval(lam, X) for lam, c in self.items()), 0j)


def mn_product_expand(k: int, mu: Sequence[int], max_length: Optional[int] = None) -> SignedPartitionSum:
    """``p_k s_mu = sum_{mu ->k lam} (-1)^ht s_lam``, keeping ``l(lam) <= max_length``."""
    return SignedPartitionSum({s.end: (-1) ** s.height for s in P.add_ribbons(mu, k, max_length)})


def mn_dual_expand(k: int, lam: Sequence[int]) -> SignedPartitionSum:
    """``k d/dp_k s_lam = sum_{mu ->k lam} (-1)^ht s_mu``."""
    return SignedPartitionSum({s.start: (-1) ** s.height for s in P.remove_ribbons(lam, k)})


def apply_dual(k: int, f: SignedPartitionSum) -> SignedPartitionSum:
    """Apply ``k d/dp_k`` to every Schur term of ``f``."""
    out = SignedPartitionSum()
    for lam, c in f.items():
        out = out + mn_dual_expand(k, lam).scale(c)
    return out


def schur_times_negative_powersum(mu: Sequence[int], k: int, X: Sequence[complex]) -> complex:
    """``s_mu(X) p_{-k}(X)`` via ribbon removal, for ``l(mu) = |X|`` and ``1 <= k <= mu_n``."""
    mu = P.normalize(mu)
    n = len(X)
    if len(mu) != n:
        raise ValidationError("need l(mu) equal to the number of variables")
    if not 1 <= k <= P.part(mu, n):
        raise ValidationError(f"k={k} must lie in [1, mu_n]")
    return mn_dual_expand(k, mu).evaluate(X)


def iterated_dual_apply(lam: Sequence[int], mu: Sequence[int], X: Sequence[complex]) -> complex:
    """``[prod_i i^{m_i(lam)} d/dp_lam s_mu](X)`` through a chain of ribbon removals.

    For ``l(mu) = |X|`` and ``|lam| <= mu_n`` this equals ``s_mu(X) p_{-lam}(X)``.
    """
    lam, mu = P.normalize(lam), P.normalize(mu)
    if len(mu) != len(X):
        raise ValidationError("need l(mu) equal to the number of variables")
    if sum(lam) > P.part(mu, len(X)):
        raise ValidationError("need |lam| <= mu_n")
    f = SignedPartitionSum({mu: 1})
    for k in lam:
        f = apply_dual(k, f)
    return f.evaluate(X)


def derivation_coefficient(mu: Sequence[int], nu: Sequence[int]) -> tuple[int, Optional[P.Partition]]:
    """``d/dp_mu p_nu = c p_{nu \\ mu}``; returns ``(c, nu \\ mu)`` or ``(0, None)``."""
    rest = P.difference(nu, mu)
    if rest is None:
        return 0, None
    m_nu, m_rest = P.multiplicities(nu), P.multiplicities(rest)
    c = 1
    for i, mult in m_nu.items():
        c *= math.factorial(mult) // math.factorial(m_rest.get(i, 0))
    return c, rest


def powerpoly_multiply(psi: Sequence[int], f: PowerSumPoly) -> PowerSumPoly:
    return PowerSumPoly({P.union(lam, psi): c for lam, c in f.items()})


def powerpoly_derive(omega: Sequence[int], f: PowerSumPoly) -> PowerSumPoly:
    acc: dict[P.Partition, complex] = {}
    for lam, c in f.items():
        coeff, rest = derivation_coefficient(omega, lam)
        if coeff:
            acc[rest] = acc.get(rest, 0) + coeff * c
    return PowerSumPoly(acc)
