"""Monte-Carlo oracle over Haar-random unitary matrices.

Eigenvalue samples come from the QR recipe: a matrix of i.i.d. standard
complex Gaussians is orthonormalised, and each column is multiplied by the
phase of the matching diagonal entry of the triangular factor.  That makes
the law exactly Haar.  Only the eigenvalues are kept.

Random streams are ``Philox`` generators keyed by ``(seed, worker)``.  Within
a worker, samples are drawn in fixed-size chunks (``DEFAULT_CHUNK`` unless
overridden).  An estimate is therefore reproducible bit-for-bit from
``(seed, workers, chunk)``.  Per-chunk
statistics are combined by pairwise (tree) merging.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from . import partitions as P
from .errors import NumericalGuardError, ValidationError
from .moments import ExplicitFormulaQuery, MomentQuery, call_vectorized

POLE_GUARD = 1e-10
MAX_REJECT_FRACTION = 1e-3
DEFAULT_CHUNK = 20_000

Statistic = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


# ------------------------------------------------------------------ sampling


def make_stream(seed: int, worker: int = 0) -> np.random.Generator:
    """Independent substream for ``(seed, worker)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(worker),))))


def sample_haar_batch(N: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """Eigenvalues of ``count`` independent Haar unitaries, shape ``(count, N)``."""
    if N < 1:
        raise ValidationError("N must be positive")
    z = (rng.standard_normal((count, N, N)) + 1j * rng.standard_normal((count, N, N))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    degenerate = np.abs(diag).min(axis=1) == 0
    while degenerate.any():  # probability zero; redraw the affected matrices
        k = int(degenerate.sum())
        z2 = (rng.standard_normal((k, N, N)) + 1j * rng.standard_normal((k, N, N))) / math.sqrt(2)
        q[degenerate], r2 = np.linalg.qr(z2)
        diag[degenerate] = np.diagonal(r2, axis1=1, axis2=2)
        degenerate = np.abs(diag).min(axis=1) == 0
    u = q * (diag / np.abs(diag))[:, None, :]
    return np.linalg.eigvals(u)


def sample_haar(N: int, rng: np.random.Generator) -> np.ndarray:
    """Eigenvalues of one Haar-random element of U(N)."""
    return sample_haar_batch(N, 1, rng)[0]


# ------------------------------------------------------ per-sample integrands


def char_poly(eigs: np.ndarray, z: complex) -> np.ndarray:
    """``chi_g(z) = prod_rho (1 - z conj(rho))`` along the last axis."""
    return np.prod(1 - z * np.conj(eigs), axis=-1)


def log_der(eigs: np.ndarray, z: complex) -> np.ndarray:
    """``chi_g'/chi_g(z) = sum_rho -conj(rho) / (1 - z conj(rho))``."""
    rc = np.conj(np.asarray(eigs))
    den = 1 - z * rc
    if np.any(np.abs(den) < POLE_GUARD):
        raise NumericalGuardError("evaluation point too close to a pole")
    return np.sum(-rc / den, axis=-1)


def completed_log_der(eigs: np.ndarray, z: complex) -> np.ndarray:
    """``z Lambda_g'/Lambda_g(z) = -N/2 + z chi_g'/chi_g(z)``."""
    N = np.shape(eigs)[-1]
    return -N / 2 + z * log_der(eigs, z)


def schur_batch(lam: Sequence[int], eigs: np.ndarray) -> np.ndarray:
    """``s_lam`` at each row of ``eigs`` via Jacobi-Trudi in complete symmetric functions.

    ``h_k`` comes from the power sums by Newton's identity
    ``k h_k = sum_i p_i h_{k-i}``.
    """
    lam = P.normalize(lam)
    eigs = np.atleast_2d(eigs)
    if len(lam) > eigs.shape[1]:
        return np.zeros(eigs.shape[0], dtype=complex)
    if not lam:
        return np.ones(eigs.shape[0], dtype=complex)
    top = lam[0] + len(lam)
    p = [None] + [np.sum(eigs**k, axis=1) for k in range(1, top + 1)]
    h = [np.ones(eigs.shape[0], dtype=complex)]
    for k in range(1, top + 1):
        h.append(sum(p[i] * h[k - i] for i in range(1, k + 1)) / k)
    l = len(lam)
    mat = np.zeros((eigs.shape[0], l, l), dtype=complex)
    for i in range(l):
        for j in range(l):
            idx = lam[i] - i + j
            if idx >= 0:
                mat[:, i, j] = h[idx]
    return np.linalg.det(mat)


def eigen_sum_lhs(q: ExplicitFormulaQuery, eigs: np.ndarray) -> np.ndarray | complex:
    """``sum over n-tuples (j_1..j_n) of prod h(rho_ji) f(rho_j1, ..., rho_jn)``."""
    ev = np.asarray(eigs, dtype=complex)
    single = ev.ndim == 1
    ev = np.atleast_2d(ev)
    S, N = ev.shape
    n = q.n
    hv = call_vectorized(q.h, ev)
    grids, hs = [], []
    for j in range(n):
        shape = [S] + [N if a == j else 1 for a in range(n)]
        grids.append(ev.reshape(shape))
        hs.append(hv.reshape(shape))
    prod = np.prod(np.broadcast_arrays(*hs), axis=0) if n > 1 else hs[0]
    vals = prod * call_vectorized(q.f, *grids)
    if not np.all(np.isfinite(vals)):
        raise NumericalGuardError("h or f produced non-finite values at an eigenvalue")
    out = vals.reshape(S, -1).sum(axis=1)
    return complex(out[0]) if single else out


class QueryIntegrand:
    """Mixed-ratio integrand of a :class:`MomentQuery`, evaluated by the kernel backend."""

    def __init__(self, query: MomentQuery, completed: bool = False):
        self.query = query
        self.completed = completed
        self._sets = [np.ascontiguousarray(getattr(query, name), dtype=np.complex128) for name in "ABCDEF"]

    def __call__(self, eigs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return kernels.mixed_ratio_batch(np.ascontiguousarray(eigs), *self._sets, self.completed, POLE_GUARD)


class SchurCorrelation:
    """``s_mu(R) conj(s_nu(R))``."""

    def __init__(self, mu: Sequence[int], nu: Sequence[int]):
        self.mu, self.nu = P.normalize(mu), P.normalize(nu)

    def __call__(self, eigs: np.ndarray):
        vals = schur_batch(self.mu, eigs) * np.conj(schur_batch(self.nu, eigs))
        return vals, np.zeros(len(vals), dtype=np.uint8)


class EigenSum:
    """Left-hand side of the explicit formula as a statistic."""

    def __init__(self, query: ExplicitFormulaQuery):
        self.query = query

    def __call__(self, eigs: np.ndarray):
        vals = eigen_sum_lhs(self.query, eigs)
        return vals, np.zeros(len(vals), dtype=np.uint8)


# ------------------------------------------------------------- estimation


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: complex
    stderr: float
    stderr_re: float
    stderr_im: float
    samples: int
    seed: int
    rejected: int = 0
    workers: int = 1

    def within(self, value: complex, n_sigma: float = 4.0, slack: float = 0.0) -> bool:
        """Componentwise ``|mean - value| <= n_sigma * stderr + slack``."""
        diff = self.mean - value
        return abs(diff.real) <= n_sigma * self.stderr + slack and abs(diff.imag) <= n_sigma * self.stderr + slack

    def to_json(self) -> dict:
        se = None if math.isnan(self.stderr) else self.stderr
        return {"mean": [self.mean.real, self.mean.imag], "stderr": se, "samples": self.samples,
                "seed": self.seed, "rejected": self.rejected}


@dataclass(frozen=True)
class _Moments:
    count: int
    mean: complex
    m2_re: float
    m2_im: float

    @staticmethod
    def of(values: np.ndarray) -> "_Moments":
        n = len(values)
        if n == 0:
            return _Moments(0, 0j, 0.0, 0.0)
        mean = complex(np.sum(values) / n)
        dev = values - mean
        return _Moments(n, mean, float(np.sum(dev.real**2)), float(np.sum(dev.imag**2)))

    def merge(self, other: "_Moments") -> "_Moments":
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        f = self.count * other.count / n
        return _Moments(n, mean, self.m2_re + other.m2_re + delta.real**2 * f,
                        self.m2_im + other.m2_im + delta.imag**2 * f)


def _tree_merge(parts: list[_Moments]) -> _Moments:
    if not parts:
        return _Moments(0, 0j, 0.0, 0.0)
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _run_worker(stats: Sequence[Statistic], N: int, target: int, seed: int, worker: int,
                chunk: int, max_rejected: int) -> tuple[list[_Moments], list[int]]:
    rng = make_stream(seed, worker)
    parts: list[list[_Moments]] = [[] for _ in stats]
    accepted = [0] * len(stats)
    rejected = [0] * len(stats)
    while min(accepted, default=target) < target:
        size_ = min(chunk, target - min(accepted))
        eigs = sample_haar_batch(N, size_, rng)
        for i, stat in enumerate(stats):
            need = target - accepted[i]
            if need <= 0:
                continue
            vals, rej = stat(eigs)
            good = np.flatnonzero(rej == 0)[:need]
            scanned = good[-1] + 1 if len(good) == need else len(vals)
            rejected[i] += int(np.count_nonzero(rej[:scanned]))
            if rejected[i] > max_rejected:
                raise NumericalGuardError(f"pole-proximity rejections exceed {MAX_REJECT_FRACTION:.1%} of samples")
            parts[i].append(_Moments.of(np.asarray(vals)[good]))
            accepted[i] += len(good)
    return [_tree_merge(p) for p in parts], rejected


def _estimate(m: _Moments, seed: int, rejected: int, workers: int) -> MonteCarloEstimate:
    n = m.count
    if n > 1:
        se_re = math.sqrt(m.m2_re / (n - 1) / n)
        se_im = math.sqrt(m.m2_im / (n - 1) / n)
    else:
        se_re = se_im = math.nan
    return MonteCarloEstimate(m.mean, max(se_re, se_im) if n > 1 else math.nan, se_re, se_im, n, seed, rejected, workers)


def monte_carlo(stats: Sequence[Statistic], N: int, samples: int, seed: int = 0, workers: int = 1,
                chunk: int = DEFAULT_CHUNK) -> list[MonteCarloEstimate]:
    """Estimate the Haar mean of each statistic from one shared eigenvalue stream.

    Every statistic sees the same eigenvalue samples, and each result equals
    what a run with that statistic alone would return.  With ``workers > 1``
    the statistics must be picklable.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    if workers < 1:
        raise ValidationError("workers must be >= 1")
    max_rej = int(MAX_REJECT_FRACTION * samples)
    shares = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
    if workers == 1:
        results = [_run_worker(stats, N, samples, seed, 0, chunk, max_rej)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_worker, list(stats), N, shares[w], seed, w, chunk, max_rej)
                       for w in range(workers) if shares[w] > 0]
            results = [f.result() for f in futures]
    out = []
    for i in range(len(stats)):
        merged = _tree_merge([r[0][i] for r in results])
        rej = sum(r[1][i] for r in results)
        if rej > max_rej:
            raise NumericalGuardError(f"pole-proximity rejections exceed {MAX_REJECT_FRACTION:.1%} of samples")
        out.append(_estimate(merged, seed, rej, workers))
    return out


def mc_average(query: MomentQuery, samples: int, seed: int = 0, workers: int = 1,
               completed: bool = False) -> MonteCarloEstimate:
    """Monte-Carlo average of the mixed-ratio integrand of ``query``."""
    return monte_carlo([QueryIntegrand(query, completed)], query.N, samples, seed, workers)[0]


def mc_average_many(queries: Sequence[MomentQuery], samples: int, seed: int = 0, workers: int = 1,
                    completed: bool = False) -> list[MonteCarloEstimate]:
    """Several queries with a common ``N`` on one shared sample stream."""
    Ns = {q.N for q in queries}
    if len(Ns) > 1:
        raise ValidationError("queries must share N")
    if not queries:
        return []
    return monte_carlo([QueryIntegrand(q, completed) for q in queries], Ns.pop(), samples, seed, workers)


def mc_eigen_sum(query: ExplicitFormulaQuery, samples: int, seed: int = 0,
                 workers: int = 1) -> MonteCarloEstimate:
    """Monte-Carlo average of the explicit-formula eigenvalue sum."""
    return monte_carlo([EigenSum(query)], query.N, samples, seed, workers)[0]
