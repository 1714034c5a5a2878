import cmath
import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mixedratios import haar
from mixedratios import moments as M
from mixedratios import symfunc as SF
from mixedratios.errors import NumericalGuardError, ValidationError
from mixedratios.moments import ExplicitFormulaQuery, MomentQuery, TruncationPolicy

from conftest import disk_points


def annulus(rng, k, lo, hi):
    return tuple(cmath.rect(rng.uniform(lo, hi), rng.uniform(0, 2 * math.pi)) for _ in range(k))


def shuffled(rng, seq):
    seq = list(seq)
    rng.shuffle(seq)
    return tuple(seq)


# ------------------------------------------------------------ ratios


@pytest.mark.parametrize("N", [1, 2, 4, 7])
def test_ratio_examples(N):
    alpha, gamma = 0.9, 0.5 - 0.2j
    assert M.ratio_average((alpha,), (), (), (), N) == pytest.approx(1)
    assert M.ratio_average((), (), (), (), N) == 1
    assert M.ratio_average((alpha,), (), (gamma,), (), N) == pytest.approx(1 - alpha * gamma)


def test_ratio_single_factor_against_monte_carlo():
    q = MomentQuery(A=(0.9,), C=(0.5,), N=4)
    est = haar.mc_average(q, 200_000, seed=1)
    assert est.within(M.ratio_average(q.A, q.B, q.C, q.D, q.N))


def test_ratio_rejects_bad_radius():
    with pytest.raises(ValidationError):
        M.ratio_average((0.3,), (), (1.2,), (), 3)


def test_ratio_rejects_coincident_poles():
    with pytest.raises(NumericalGuardError):
        M.ratio_average((0.5,), (2.0,), (0.3,), (), 3)


# ------------------------------------------------------ log-derivatives


def test_mixed_e_examples():
    A, C = (0.8,), (0.2 + 0.1j,)
    e = M.mixed_ratio_E_main(A, (), C, (), (), 5)
    assert e.value == pytest.approx(M.ratio_average(A, (), C, (), 5))
    assert M.mixed_ratio_E_main((), (), (), (), (0.3,), 5).value == 0


@pytest.mark.parametrize("N", [1, 3, 6])
def test_mixed_e_closed_form(N):
    # E[chi(alpha) chi'/chi(eps) / chi_{g^-1}(gamma)] = -gamma (1 - alpha gamma) / (1 - eps gamma)
    alpha, gamma, eps = 0.7 + 0.2j, 0.3 - 0.1j, 0.25j
    got = M.mixed_ratio_E_main((alpha,), (), (gamma,), (), (eps,), N).value
    assert got == pytest.approx(-gamma * (1 - alpha * gamma) / (1 - eps * gamma), rel=1e-12)


def test_mixed_e_closed_form_against_monte_carlo():
    alpha, gamma, eps = 0.7 + 0.2j, 0.3 - 0.1j, 0.25j
    est = haar.mc_average(MomentQuery(A=(alpha,), C=(gamma,), E=(eps,), N=3), 200_000, seed=4)
    assert est.within(-gamma * (1 - alpha * gamma) / (1 - eps * gamma))


def test_mixed_ef_examples():
    assert M.mixed_ratio_EF_main((), (), (0.2,), (0.3, 0.1), 5).value == 0
    eps, phi = 0.4, 0.35j
    got = M.mixed_ratio_EF_main((), (), (eps,), (phi,), 10)
    assert abs(got.value - (1 - eps * phi) ** -2) <= got.tail_bound + 1e-14
    B, C = (0.9 - 0.1j,), (0.2j,)
    assert M.mixed_ratio_EF_main(B, C, (), (), 6).value == pytest.approx(M.ratio_average((), B, C, (), 6))


def test_log_der_examples():
    assert M.log_der_main((0.3,), (), 6).value == 0
    assert M.log_der_main((), (), 6).value == 1
    eps, phi = 0.4, 0.4
    got = M.log_der_main((eps,), (phi,), 8)
    assert abs(got.value - (1 - eps * phi) ** -2) <= got.tail_bound + 1e-14


def exact_log_der_pair(x: float, N: int, terms: int = 400) -> float:
    """Finite-N average for one E and one F variable, from E[conj(p_k) p_j] = delta_kj min(k, N)."""
    return sum(min(k, N) * x ** (k - 1) for k in range(1, terms))


@pytest.mark.parametrize("N", [1, 2])
def test_log_der_exact_finite_n_against_monte_carlo(N):
    # at small N the gap between the finite-N average and the main term is resolvable
    est = haar.mc_average(MomentQuery(E=(0.4,), F=(0.4,), N=N), 200_000, seed=17)
    assert est.within(exact_log_der_pair(0.16, N))
    assert not est.within(M.log_der_main((0.4,), (0.4,), N).value)


def test_log_der_main_term_error_decay():
    # the true error of the main term is sum_{k>N} (k-N) x^(k-1); it shrinks by about x^2 per N -> N+2
    r, x = 0.4, 0.16
    errs = {N: abs(M.log_der_main((r,), (r,), N).value - exact_log_der_pair(x, N)) for N in (4, 6, 8, 10)}
    for N in (4, 6, 8):
        assert errs[N + 2] / errs[N] <= 10 * r**4
        assert errs[N] <= 10 * r ** (2 * N) * N**5
    assert errs[4] == pytest.approx(x**4 / (1 - x) ** 2, rel=1e-9)


@pytest.mark.parametrize("N", [2, 5, 8])
def test_completed_examples(N):
    assert M.completed_log_der_main((0.3 + 0.1j,), (), N).value == pytest.approx(-N / 2)
    assert M.completed_log_der_main((), (), N).value == 1


def test_completed_against_monte_carlo():
    eps, phi = 0.3, 0.3
    main = M.completed_log_der_main((eps,), (phi,), 8).value
    est = haar.mc_average(MomentQuery(E=(eps,), F=(phi,), N=8), 200_000, seed=5, completed=True)
    assert est.within(main)


def test_truncation_policy_validation():
    with pytest.raises(ValidationError):
        TruncationPolicy(max_weight=-1)
    with pytest.raises(ValidationError):
        TruncationPolicy(tail_ratio=1.5)


def test_shell_tail_estimate():
    # pure geometric shells: the estimate must cover sum_{w > K} r^w
    r, K = 0.3, 10
    est = M.shell_tail([r**w for w in range(K + 1)], r, K)
    assert est >= r ** (K + 1) / (1 - r)
    assert M.shell_tail([0.0] * 5, r, 4) == 0
    assert M.shell_tail([1.0, 0.5], 1.0, 1) == math.inf


def test_tail_bound_shrinks_with_cutoff():
    E, F = (0.5, 0.3j), (0.45, -0.2)
    loose = M.log_der_main(E, F, 8, TruncationPolicy(16))
    tight = M.log_der_main(E, F, 8, TruncationPolicy(32))
    assert tight.tail_bound < loose.tail_bound
    assert abs(loose.value - tight.value) <= loose.tail_bound + tight.tail_bound


# --------------------------------------------------------- properties


@given(st.integers(0, 10**6), st.integers(2, 6))
def test_main_terms_permutation_invariant(seed, N):
    rng = random.Random(seed)
    A, B = annulus(rng, 2, 0.3, 0.9), annulus(rng, 2, 0.3, 0.9)
    C, D = annulus(rng, 2, 0.1, 0.4), annulus(rng, 1, 0.1, 0.4)
    E, F = annulus(rng, 2, 0.1, 0.4), annulus(rng, 2, 0.1, 0.4)
    pairs = [
        (lambda *s: M.ratio_average(*s, N), (A, B, C, D)),
        (lambda *s: M.mixed_ratio_E_main(*s, N).value, (A, B, C, D, E[:1])),
        (lambda *s: M.mixed_ratio_EF_main(*s, N).value, (B, C, E, F)),
        (lambda *s: M.log_der_main(*s, N).value, (E, F)),
        (lambda *s: M.completed_log_der_main(*s, N).value, (E, F)),
    ]
    for fn, sets in pairs:
        base = fn(*sets)
        again = fn(*(shuffled(rng, s) for s in sets))
        assert again == pytest.approx(base, rel=1e-12, abs=1e-14)


@given(st.integers(0, 10**6), st.integers(0, 3), st.integers(1, 10))
def test_log_der_symmetric_in_e_and_f(seed, k, N):
    rng = random.Random(seed)
    E, F = annulus(rng, k, 0.05, 0.5), annulus(rng, k, 0.05, 0.5)
    assert M.log_der_main(E, F, N).value == pytest.approx(M.log_der_main(F, E, N).value, rel=1e-13, abs=1e-15)


@given(st.integers(0, 10**6), st.integers(0, 2), st.integers(0, 2), st.integers(1, 9))
def test_completed_binomial_expansion(seed, le, lf, N):
    rng = random.Random(seed)
    E, F = annulus(rng, le, 0.05, 0.45), annulus(rng, lf, 0.05, 0.45)
    expected = 0j
    for ke in range(le + 1):
        for Es in itertools.combinations(E, ke):
            for kf in range(lf + 1):
                for Fs in itertools.combinations(F, kf):
                    scale = (-N / 2) ** (le - ke + lf - kf) * SF.product_all(Es) * SF.product_all(Fs)
                    expected += scale * M.log_der_main(Es, Fs, N).value
    assert M.completed_log_der_main(E, F, N).value == pytest.approx(expected, rel=1e-10, abs=1e-12)


# ------------------------------------------------ recipe consistency


def _consistency_sets(rng):
    A, B = annulus(rng, rng.randint(0, 2), 0.8, 0.95), annulus(rng, rng.randint(0, 2), 0.8, 0.95)
    C, D = annulus(rng, rng.randint(0, 1), 0.1, 0.3), annulus(rng, rng.randint(0, min(1, len(A))), 0.1, 0.3)
    E = annulus(rng, rng.randint(1, 2), 0.1, 0.3)
    F = annulus(rng, rng.randint(0, len(E)), 0.1, 0.3)
    return A, B, C, D, E, F


@pytest.mark.parametrize("seed", range(4))
def test_recipe_degenerations(seed):
    A, B, C, D, E, F = _consistency_sets(random.Random(seed))
    N = 30
    r = M.recipe_main(MomentQuery(A, B, C, D, (), (), N)).value
    assert r == pytest.approx(M.ratio_average(A, B, C, D, N), rel=1e-9)
    r = M.recipe_main(MomentQuery(A, B, C, D, E, (), N)).value
    assert r == pytest.approx(M.mixed_ratio_E_main(A, B, C, D, E, N).value, rel=1e-9)
    r = M.recipe_main(MomentQuery((), B, C, (), E, F, N)).value
    assert r == pytest.approx(M.mixed_ratio_EF_main(B, C, E, F, N).value, rel=1e-9)


def test_query_json_roundtrip():
    q = MomentQuery(A=(0.3 + 0.2j,), E=(0.1,), N=5, cutoff=TruncationPolicy(12, 0.5))
    assert MomentQuery.from_json(q.to_json()) == q
    with pytest.raises(ValidationError):
        MomentQuery.from_json({"G": []})
    with pytest.raises(ValidationError):
        MomentQuery(A=(0,), N=3)
    with pytest.raises(ValidationError):
        MomentQuery(N=0)


# --------------------------------------------------- explicit formula


def one(*zs):
    return np.ones(np.broadcast_shapes(*(np.shape(z) for z in zs)), dtype=complex)


@pytest.mark.parametrize("N", [1, 4, 6])
def test_explicit_formula_constant(N):
    q = ExplicitFormulaQuery(one, one, 1, 0.5, N)
    assert M.explicit_formula_rhs(q).value == pytest.approx(N, abs=1e-12)


@pytest.mark.parametrize("N", [3, 6])
def test_explicit_formula_haar_moments(N):
    # holomorphic moments of Haar eigenvalues vanish, so E[(sum h)^2] = (0.3 N)^2 with h = z + 0.3
    shift = lambda z: z + 0.3
    assert M.explicit_formula_rhs(ExplicitFormulaQuery(shift, one, 2, 0.5, N)).value == pytest.approx(0.09 * N**2, abs=1e-10)
    assert M.explicit_formula_rhs(ExplicitFormulaQuery(shift, lambda a, b: a * b, 2, 0.5, N)).value == pytest.approx(0, abs=1e-10)
    assert M.explicit_formula_rhs(ExplicitFormulaQuery(lambda z: z, one, 1, 0.5, N)).value == pytest.approx(0, abs=1e-12)


def test_explicit_formula_scalar_callables():
    q = ExplicitFormulaQuery(lambda z: 1.0, lambda z: 1.0, 1, 0.4, 5)
    assert M.explicit_formula_rhs(q).value == pytest.approx(5)


def test_explicit_formula_reports_bounds():
    q = ExplicitFormulaQuery(lambda z: np.exp(z), one, 2, 0.5, 4, quad_points=16, lambda_cutoff=6)
    out = M.explicit_formula_rhs(q)
    fine = M.explicit_formula_rhs(ExplicitFormulaQuery(lambda z: np.exp(z), one, 2, 0.5, 4))
    assert out.truncation["quadPoints"] == 16
    assert abs(out.value - fine.value) <= out.tail_bound + fine.tail_bound + 1e-12


def test_explicit_formula_validation():
    with pytest.raises(ValidationError):
        ExplicitFormulaQuery(one, one, 4, 0.5, 3)
    with pytest.raises(ValidationError):
        ExplicitFormulaQuery(one, one, 1, 1.5, 3)
    with pytest.raises(ValidationError):
        ExplicitFormulaQuery(one, one, 1, 0.5, 3, quad_points=7)
    with pytest.raises(NumericalGuardError):
        M.explicit_formula_rhs(ExplicitFormulaQuery(lambda z: z * np.nan, one, 1, 0.5, 3))
