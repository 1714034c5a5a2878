"""Identity suites behind ``mixedratios verify``.

Each suite returns :class:`Check` rows; a suite passes when every row does.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import mn
from . import partitions as P
from . import symfunc as SF


@dataclass(frozen=True)
class Check:
    name: str
    instances: int
    max_rel_err: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_rel_err < self.tol

    def to_json(self) -> dict:
        return {"name": self.name, "instances": self.instances, "maxRelErr": self.max_rel_err,
                "tol": self.tol, "ok": self.ok}


def _points(rng: np.random.Generator, n: int, lo: float = 0.3, hi: float = 0.9) -> SF.VariableSet:
    """``n`` random complex points on an annulus, spread out in angle."""
    radii = rng.uniform(lo, hi, n)
    angles = rng.uniform(0, 2 * np.pi, n)
    return tuple(complex(cmath.rect(r, t)) for r, t in zip(radii, angles))


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(1.0, abs(b))


def mn_suite(max_size: int = 6, max_k: int = 4, seed: int = 0) -> list[Check]:
    """Murnaghan-Nakayama product, dual, LS, negative-power and iterated rules."""
    rng = np.random.default_rng(seed)
    rows: dict[str, list[float]] = {k: [] for k in ("product", "dual-adjoint", "ls", "negative-power", "iterated-negative")}
    for mu in P.enumerate_partitions(max_size):
        for k in range(1, max_k + 1):
            X = _points(rng, 3)
            lhs = SF.powersum_eval((k,), X) * SF.schur_eval(mu, X)
            rows["product"].append(_rel(mn.mn_product_expand(k, mu, 3).evaluate(X), lhs))
            up = mn.mn_product_expand(k, mu)
            for lam, c in up.items():
                rows["dual-adjoint"].append(float(abs(mn.mn_dual_expand(k, lam)[mu] - c)))
            Xs, Ys = _points(rng, 2), _points(rng, 1)
            weight = SF.powersum_eval((k,), Xs) + (-1) ** (k - 1) * SF.powersum_eval((k,), Ys)
            rows["ls"].append(_rel(up.evaluate_ls(Xs, Ys), SF.ls_eval_combinatorial(mu, Xs, Ys) * weight))
        if mu:
            X = _points(rng, len(mu))
            for k in range(1, min(max_k, mu[-1]) + 1):
                direct = SF.schur_eval(mu, X) * SF.powersum_eval((-k,), X)
                rows["negative-power"].append(_rel(mn.schur_times_negative_powersum(mu, k, X), direct))
            for lam in P.enumerate_partitions(mu[-1]):
                direct = SF.schur_eval(mu, X) * SF.powersum_eval(tuple(-p for p in lam), X)
                rows["iterated-negative"].append(_rel(mn.iterated_dual_apply(lam, mu, X), direct))
    return [Check(name, len(v), max(v, default=0.0), 1e-10) for name, v in rows.items()]


def ls_suite(max_size: int = 6, seed: int = 0) -> list[Check]:
    """Determinantal vs combinatorial LS, transposition, Berele-Regev and overlap identities."""
    rng = np.random.default_rng(seed)
    det_rows, trans_rows, br_rows, ov_rows = [], [], [], []
    for lam in P.enumerate_partitions(max_size):
        for n in range(0, 4):
            for m in range(0, 4):
                X, Y = _points(rng, n), _points(rng, m)
                comb = SF.ls_eval_combinatorial(lam, SF.negate(X), Y)
                det_rows.append(_rel(SF.ls_eval_determinantal(lam, X, Y), comb))
                trans_rows.append(_rel(SF.ls_eval_combinatorial(P.conjugate(lam), Y, SF.negate(X)), comb))
                k = P.index(lam, m, n)
                if k == 0 and len(lam) <= n:
                    reduced = P.subtract_rectangle(lam, m, n)
                    br = SF.cross_vandermonde(Y, X) * SF.schur_eval(reduced, SF.negate(X))
                    br_rows.append(_rel(br, comb))
                if n >= 1 and k >= 0:
                    for l in range(0, min(n - k, n) + 1):
                        ov_rows.append(_rel(SF.overlap_expand(lam, X, Y, l), comb))
    return [
        Check("determinantal-vs-combinatorial", len(det_rows), max(det_rows), 1e-10),
        Check("transposition", len(trans_rows), max(trans_rows), 1e-10),
        Check("berele-regev", len(br_rows), max(br_rows), 1e-9),
        Check("first-overlap", len(ov_rows), max(ov_rows), 1e-9),
    ]


def cauchy_suite(cutoff: int = 20, seed: int = 0) -> list[Check]:
    """Truncated Cauchy sums against closed products, reported as error / tail bound."""
    rng = np.random.default_rng(seed)
    schur, power, gen = [], [], []
    for n in range(1, 4):
        for m in range(1, 4):
            X, Y = _points(rng, n, 0.05, 0.4), _points(rng, m, 0.05, 0.4)
            exact = SF.cauchy_product(X, Y)
            s = SF.cauchy_schur_sum(X, Y, cutoff)
            p = SF.cauchy_powersum_sum(X, Y, cutoff)
            schur.append(abs(s.value - exact) / s.tail_bound)
            power.append(abs(p.value - exact) / p.tail_bound)
    for sizes in [(1, 1, 1, 1), (2, 1, 1, 2), (2, 2, 2, 2), (1, 2, 2, 1), (2, 2, 0, 1)]:
        S, T, U, V = (_points(rng, k, 0.05, 0.4) for k in sizes)
        t = SF.gen_cauchy_ls_sum(S, T, U, V, cutoff)
        gen.append(abs(t.value - SF.gen_cauchy_product(S, T, U, V)) / t.tail_bound)
    # a ratio below 1 means the truncation error sits inside the reported bound
    return [Check("cauchy-schur", len(schur), max(schur), 1.0), Check("cauchy-powersum", len(power), max(power), 1.0),
            Check("generalized-cauchy", len(gen), max(gen), 1.0)]


SUITES: dict[str, Callable[..., list[Check]]] = {"mn": mn_suite, "ls": ls_suite, "cauchy": cauchy_suite}
