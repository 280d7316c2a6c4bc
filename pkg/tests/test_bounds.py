import math

import numpy as np
import pytest
import scipy.stats as ss
from hypothesis import given
from hypothesis import strategies as st

from quadchaos import DomainError, SpectralSummary, hw_constants, spectral_summary, symmetrize
from quadchaos import bounds as B
from quadchaos.bounds import BoundName
from quadchaos.montecarlo import Ensemble, EnsembleSpec, generate_ensemble

C = hw_constants()


def summary(eigs):
    return SpectralSummary.from_eigenvalues(eigs)


psd_spectra = st.lists(st.floats(0.0, 50.0), min_size=1, max_size=8).filter(lambda v: max(v) > 1e-3)
sym_spectra = st.lists(st.floats(-50.0, 50.0), min_size=1, max_size=8).filter(lambda v: max(map(abs, v)) > 1e-3)


# -- Hanson-Wright -----------------------------------------------------------

def test_hw_identity_by_hand():
    v = B.hw_bound(summary([1, 1, 1, 1]), 2.0, kappa=0.145)
    assert math.isclose(v.probability, math.exp(-0.145), rel_tol=1e-15)


def test_hw_small_t_tends_to_one(indefinite):
    assert B.hw_bound(indefinite, 1e-12).probability == pytest.approx(1.0, abs=1e-12)
    assert B.hw_bound(indefinite, 0.0).probability == 1.0


def test_hw_indefinite_recomputed(indefinite):
    from quadchaos.reference import INDEFINITE_EXAMPLE

    lam = np.linalg.eigvalsh(np.array(INDEFINITE_EXAMPLE))
    alpha, beta = np.abs(lam).max(), np.sum(lam**2)
    expect = -C.kappa * min(25 / beta, 5 / alpha)
    assert math.isclose(B.hw_bound(indefinite, 5.0).log_value, expect, rel_tol=1e-12)


def test_hw_kappa_choice(psd, indefinite):
    assert B.hw_bound(psd, 3.0).params["kappa"] == C.kappa_psd
    assert B.hw_bound(indefinite, 3.0).params["kappa"] == C.kappa
    with pytest.raises(DomainError):
        B.hw_bound(psd, 1.0, kappa=-1.0)


@pytest.mark.parametrize("name", list(BoundName))
def test_zero_matrix_is_degenerate(name):
    s = summary([0.0, 0.0, 0.0])
    v = B.evaluate(s, 1.0, name, m=2)
    assert v.probability == 0.0 and v.degenerate


@pytest.mark.parametrize("t", [-1.0, math.nan, math.inf])
def test_bad_t(psd, t):
    with pytest.raises(DomainError):
        B.hw_bound(psd, t)


# -- Laurent-Massart family --------------------------------------------------

def test_lm_a1_is_classic(psd):
    for t in (0.1, 1.0, 10.0, 100.0):
        v = B.lm_lambda(psd, t, 1.0)
        assert math.isclose(v.log_value, B.lm_classic_closed_form(psd.alpha, psd.beta, t), rel_tol=1e-12)
        assert v.name is BoundName.LM_CLASSIC


@given(psd_spectra, st.floats(1e-6, 1e4), st.floats(0.6667, 1.0))
def test_lm_negative(eigs, t, a):
    s = summary(eigs)
    assert B.lm_lambda(s, t, a).log_value < 0


def test_lm_branch_continuity(psd):
    a = 0.9
    _, c = B.lm_parameters(a)
    t = c * psd.beta / psd.alpha
    inner, outer = B.lm_exponent_branches(psd.alpha, psd.beta, t, a)
    assert abs(inner - outer) < 1e-9


@given(st.floats(0.67, 0.999), st.floats(0.1, 100.0), st.floats(0.1, 100.0))
def test_lm_branch_continuity_property(a, alpha, beta):
    _, c = B.lm_parameters(a)
    inner, outer = B.lm_exponent_branches(alpha, beta, c * beta / alpha, a)
    assert abs(inner - outer) <= 1e-9 * max(1.0, abs(inner))


def test_lm_domain(psd, indefinite):
    with pytest.raises(DomainError, match="positive-semidefinite"):
        B.lm_lambda(indefinite, 1.0, 1.0)
    for a in (2 / 3, 0.5, 1.01):
        with pytest.raises(DomainError):
            B.lm_lambda(psd, 1.0, a)


def test_a_hat_opt_values():
    assert math.isclose(B.a_hat_opt(1.0), (7 - math.sqrt(17)) / 4, rel_tol=1e-15)
    assert abs(B.a_hat_opt(1e-8) - 2 / 3) < 1e-7
    assert abs(B.a_hat_opt(1e8) - 1) < 1e-3
    rho = 3.7
    assert math.isclose(B.a_hat_opt(rho), (4 * rho + 3 - math.sqrt(8 * rho + 9)) / (4 * rho), rel_tol=1e-14)
    with pytest.raises(DomainError):
        B.a_hat_opt(0.0)


def test_quintic_root_residual():
    a = B.a_opt_quintic(1.0)
    naive = 12 * a**5 + (36 - 40) * a**4 + (48 - 99) * a**3 + (104 - 24) * a**2 + (4 - 48) * a + 8
    assert abs(naive) < 1e-9
    assert abs(B.lm_quintic(1.0, a)) < 1e-9


@given(st.floats(1e-9, 500.0))
def test_quintic_gap(rho):
    gap = B.a_hat_opt(rho) - B.a_opt_quintic(rho)
    assert 0.0 <= gap < 0.035


@given(st.floats(1e-3, 1e3))
def test_quintic_root_minimizes_lm(rho):
    a = B.a_opt_quintic(rho)
    f = lambda x: B.lm_exponent(1.0, 1.0, rho, x)  # noqa: E731
    grid = np.linspace(2 / 3 + 1e-6, 1.0, 2001)
    assert f(a) <= min(f(x) for x in grid) + 1e-12


def test_lm_ordering_and_gap(psd):
    for t in np.linspace(0.5, 50, 100):
        o = B.lm_optimal(psd, t).log_value
        g = B.lm_augmented(psd, t).log_value
        c = B.lm_classic(psd, t).log_value
        assert o <= g + 1e-15 <= c + 2e-15
    for t in (10.0, 30.0, 50.0):
        d = B.lm_augmented(psd, t).probability - B.lm_optimal(psd, t).probability
        assert 0 <= d < 5e-3


def test_lm_optimal_at_zero(psd):
    assert B.lm_optimal(psd, 0.0).probability == 1.0
    assert B.lm_augmented(psd, 1e-12).probability == pytest.approx(1.0, abs=1e-9)


def test_lm_ratio_minima():
    rho = np.geomspace(1e-3, 1e3, 2001)
    r0 = [B.lm_hw_ratio(x, C.a0) for x in rho]
    r1 = [B.lm_hw_ratio(x, 1.0) for x in rho]
    assert abs(min(r0) - C.kappa_psd) < 1e-9
    assert abs(min(r1) - C.kappa_lm) < 1e-9
    assert rho[int(np.argmin(r0))] == pytest.approx(1.0)
    assert rho[int(np.argmin(r1))] == pytest.approx(1.0)


# -- Schatten-norm family ----------------------------------------------------

def test_lambda_1_is_hw_shape(indefinite):
    for b in (0.1, 0.5, 0.9):
        t = 3.0
        expect = -B.kappa_m(b, 1) * min(t * t / indefinite.beta, t / indefinite.alpha)
        assert math.isclose(B.lambda_m(indefinite, t, 1, b), expect, rel_tol=1e-14)


def test_lambda_m_vanishes_at_small_b(indefinite):
    for m in (1, 3, 20):
        assert abs(B.lambda_m(indefinite, 5.0, m, 1e-12)) < 1e-10


def test_kappa_m_shape():
    for m in (1, 2, 5, 20):
        assert B.kappa_m(1e-9, m) < 1e-8
        # decays like (-ln(1 - b))^(-1/m) as b -> 1
        tail = [B.kappa_m(1 - 10.0**-k, m) for k in (3, 6, 9, 12, 15)]
        assert all(x > y for x, y in zip(tail, tail[1:]))
        b = np.linspace(0.01, 0.99, 99)
        k = [B.kappa_m(x, m) for x in b]
        assert 0 < int(np.argmax(k)) < len(b) - 1


def test_lambda_m_domain(indefinite):
    for m in (0, 201, 1.5):
        with pytest.raises(DomainError):
            B.lambda_m(indefinite, 1.0, m, 0.5)
    for b in (0.0, 1.0):
        with pytest.raises(DomainError):
            B.lambda_m(indefinite, 1.0, 2, b)


def test_lambda_m_bound_m1_recovers_hw(indefinite, psd):
    for s in (indefinite, psd):
        for t in np.linspace(0.1, 30, 40):
            lm1 = B.lambda_m_bound(s, t, 1).probability
            hw = math.exp(-0.1457 * min(t * t / s.beta, t / s.alpha))
            assert lm1 <= hw + 1e-6


def test_lambda_m_bound_small_t_best_at_m1(indefinite):
    vals = [B.lambda_m_bound(indefinite, 5.0, m).log_value for m in range(1, 6)]
    assert int(np.argmin(vals)) == 0


def test_lambda_m_bound_decreasing_in_m_at_t10(indefinite):
    vals = [B.lambda_m_bound(indefinite, 10.0, m).log_value for m in (1, 5, 9, 13, 17)]
    assert all(x > y for x, y in zip(vals, vals[1:]))


def test_lambda_m_bound_nonpositive(indefinite):
    for m in (1, 4, 50):
        v = B.lambda_m_bound(indefinite, 0.01, m)
        assert v.log_value <= 0
        assert 0 <= v.params["b"] < 1


def test_loose_bound_dominates_inf(indefinite):
    for t in (1.0, 5.0, 20.0):
        for m in (2, 5, 20):
            assert B.lambda_m_loose(indefinite, t, m, 1.0).log_value >= B.lambda_m_bound(indefinite, t, m).log_value


def test_loose_bound_futile_at_small_t(indefinite):
    v = B.lambda_m_loose(indefinite, 1e-9, 20, 1.0)
    assert math.isclose(v.log_value, math.log(2.0), rel_tol=1e-6)
    assert v.probability == 1.0


def test_loose_kappa_grows_with_eps(indefinite):
    k = [B.lambda_m_loose(indefinite, 5.0, 20, e).params["kappa"] for e in (0.5, 1.0, 2.0)]
    assert k[0] < k[1] < k[2]


def test_loose_no_solution():
    s = summary([1.0, 0.5])
    # sup (n/2)(1/2) = 0.5 < ln 2
    with pytest.raises(DomainError, match="no b~"):
        B.lambda_m_loose(s, 1.0, 2, 1.0)
    with pytest.raises(DomainError):
        B.lambda_m_loose(s, 1.0, 1, 1.0)


def test_m_inf_values():
    assert B.m_inf_bound(3, 1.0, 0.0).probability == 1.0
    assert math.isclose(B.m_inf_bound(2, 1.0, 2.0).probability, 2 / math.e, rel_tol=1e-15)
    with pytest.raises(DomainError):
        B.m_inf_bound(2, -1.0, 1.0)


@given(st.integers(1, 200), st.floats(1e-3, 1e3), st.floats(1e-6, 1e6))
def test_m_inf_nontrivial(n, alpha, t):
    assert B.m_inf_bound(n, alpha, t).log_value < 0


def test_lambda_m_large_m_approaches_m_inf():
    for seed in range(3):
        s = spectral_summary(generate_ensemble(EnsembleSpec(Ensemble.GOE_LIKE, 5, seed)))
        t = 10 * s.alpha
        a = B.lambda_m_bound(s, t, 150).log_value
        b = B.m_inf_bound(s.n, s.alpha, t).log_value
        assert abs(a - b) <= 0.02 * abs(b)


def test_t_hat_c(indefinite):
    t = B.t_hat_c(indefinite.n, indefinite.alpha, C.kappa)
    assert abs(t - 6.191) < 1e-2
    u = t / indefinite.alpha
    assert abs(1.5 * math.log1p(u / 3) - (0.5 - C.kappa) * u) < 1e-9
    assert math.isclose(B.t_hat_c(3, 2 * indefinite.alpha, C.kappa), 2 * t, rel_tol=1e-9)
    for k in (0.5, 0.7, 0.0):
        with pytest.raises(DomainError):
            B.t_hat_c(3, 1.0, k)


# -- twin --------------------------------------------------------------------

def test_twin_asymptotes(indefinite):
    s = indefinite
    t = 1e-6 * s.beta / s.alpha
    e = B.twin_components(s, t)
    assert 0.99 <= min(e.eta1, e.eta2) * s.beta / t**2 <= 1.01
    t = 1e8 * s.alpha
    e = B.twin_components(s, t)
    assert 0.99 <= min(e.eta1, e.eta2) * s.alpha / t <= 1.01


def test_twin_matches_unsimplified_form(indefinite):
    s = indefinite
    for t in (0.3, 2.0, 17.0):
        root = math.sqrt(s.beta**2 + 4 * s.gamma * t)
        eta1 = (root - s.beta) * (s.beta**2 + 8 * s.gamma * t - s.beta * root) / (12 * s.gamma**2)
        eta2 = t / s.alpha - 3 * s.beta / (4 * s.alpha) * min(1 / s.alpha, (root - s.beta) / (2 * s.gamma))
        e = B.twin_components(s, t)
        assert math.isclose(e.eta1, eta1, rel_tol=1e-9)
        assert math.isclose(e.eta2, eta2, rel_tol=1e-9)


def test_twin_beats_hw_at_both_ends(indefinite):
    for t in (0.5, 1.0, 12.0, 14.0):
        assert B.twin_bound(indefinite, t).probability < B.hw_bound(indefinite, t).probability


@given(sym_spectra, st.floats(0.0, 1e5))
def test_twin_components_nonnegative(eigs, t):
    e = B.twin_components(summary(eigs), t)
    assert e.eta1 >= 0
    assert min(e.eta1, e.eta2) >= -1e-12 * max(1.0, t)


# -- chi-square ----------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 5, 8])
def test_chi2_identity_is_exact(n):
    s = summary([1.0] * n)
    for t in (0.5, 3.0, 20.0):
        assert math.isclose(B.chi2_bound(s, t).probability, ss.chi2.sf(n + t, n), rel_tol=1e-10)


def test_chi2_psd_looser(psd):
    for t in np.linspace(0.1, 60, 50):
        assert B.chi2_psd_bound(psd, t).log_value >= B.chi2_bound(psd, t).log_value


def test_chi2_negative_definite():
    s = summary([-1.0, -2.0])
    # trace + t > 0 with lambda_max < 0: the CDF argument is negative
    assert B.chi2_bound(s, 10.0).probability == 0.0
    assert B.chi2_bound(s, 3.0).probability == 0.0
    # trace + t < 0: F((trace + t) / lambda_max)
    t = 0.5
    x = (s.trace + t) / s.lambda_max
    assert math.isclose(B.chi2_bound(s, t).probability, ss.chi2.cdf(x, 2), rel_tol=1e-12)


def test_chi2_zero_lambda_max():
    with pytest.raises(DomainError):
        B.chi2_bound(summary([0.0, -1.0]), 1.0)
    assert not B.is_applicable(summary([0.0, -1.0]), BoundName.CHI2)


# -- n-and-alpha-only bounds -------------------------------------------------

@given(st.integers(1, 50), st.floats(1e-4, 100.0))
def test_m_inf_dominates_relaxed(n, r):
    m = B.m_inf_bound(n, 1.0, r).log_value
    assert m <= B.hw_relaxed(n, 1.0, r).log_value
    assert m <= B.lm_relaxed(n, 1.0, r).log_value


@given(st.integers(2, 50), st.floats(0.0, 200.0))
def test_large_deviation_weaker(n, extra):
    r = n - 1 + extra
    assert B.large_deviation_bound(n, 1.0, r).log_value >= B.m_inf_bound(n, 1.0, r).log_value


def test_relaxed_at_zero_and_domain():
    assert B.hw_relaxed(7, 2.0, 0.0).probability == 1.0
    assert B.lm_relaxed(7, 2.0, 0.0).probability == 1.0
    with pytest.raises(DomainError, match="1 \\+ t/alpha >= n"):
        B.large_deviation_bound(5, 1.0, 3.0)


def test_relaxed_lm_formula():
    n, a, t = 6, 1.5, 4.0
    expect = -(n / 4) * (math.sqrt(1 + 2 * t / (n * a)) - 1) ** 2
    assert math.isclose(B.lm_relaxed(n, a, t).log_value, expect, rel_tol=1e-14)


@given(st.integers(1, 50), st.floats(1e-3, 100.0))
def test_relaxed_optimal_lm_variants(n, r):
    o = B.lm_optimal_relaxed(n, 1.0, r).log_value
    g = B.lm_augmented_relaxed(n, 1.0, r).log_value
    c = B.lm_relaxed(n, 1.0, r).log_value
    assert o <= g + 1e-12 and g <= c + 1e-12


def test_relaxed_variants_opt_in():
    assert BoundName.LM_OPTIMAL_RELAXED not in B.DEFAULT_BOUNDS
    assert BoundName.LM_AUGMENTED_RELAXED not in B.DEFAULT_BOUNDS


# -- reparameterization ------------------------------------------------------

def test_reparameterize_values():
    assert B.lm_reparameterize(1.0, 1.0, 1.0) == 4.0
    assert B.lm_reparameterize_inverse(1.0, 1.0, 4.0) == pytest.approx(1.0, rel=1e-15)
    assert B.lm_reparameterize(2.0, 3.0, 0.0) == 0.0


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1e-6, 1e6))
def test_reparameterize_round_trip(beta, alpha, t):
    back = B.lm_reparameterize_inverse(beta, alpha, B.lm_reparameterize(beta, alpha, t))
    assert math.isclose(back, t, rel_tol=1e-10)


def test_reparameterize_links_lm(psd):
    # LM at deviation t' equals e^-t
    for t in (0.3, 1.0, 7.0):
        tp = B.lm_reparameterize(psd.beta, psd.alpha, t)
        assert math.isclose(B.lm_classic(psd, tp).log_value, -t, rel_tol=1e-10)


# -- cross-cutting -------------------------------------------------------------

GRID = np.linspace(0.0, 40.0, 81)


@pytest.mark.parametrize("name", [b for b in BoundName])
def test_monotone_and_probability(name, psd, indefinite):
    for s in (psd, indefinite):
        if not B.is_applicable(s, name):
            continue
        vals = []
        for t in GRID:
            if not B.is_applicable(s, name, t):
                continue
            v = B.evaluate(s, t, name, m=3, eps=1.0)
            assert 0.0 <= v.probability <= 1.0
            assert v.probability == min(1.0, math.exp(v.log_value))
            vals.append(v.log_value)
        assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:])), name


@pytest.mark.parametrize("name", sorted(B.PSD_ONLY, key=str))
def test_psd_only_rejected(name, indefinite):
    with pytest.raises(DomainError, match="requires positive-semidefinite input"):
        B.evaluate(indefinite, 1.0, name)


def test_params_recorded(psd):
    assert "a" in B.lm_optimal(psd, 5.0).params
    assert "b" in B.lambda_m_bound(psd, 5.0, 3).params
    assert "rho" in B.lm_augmented(psd, 5.0).params
    assert "r" in B.m_inf_bound(3, 1.0, 2.0).params


def test_bound_name_parse():
    assert BoundName.parse(" lm_optimal ") is BoundName.LM_OPTIMAL
    with pytest.raises(DomainError):
        BoundName.parse("nope")


def test_negated_matrix_same_hw():
    m = symmetrize([[1.0, 2.0], [2.0, -3.0]])
    a, b = spectral_summary(m), spectral_summary(-m)
    assert B.hw_bound(a, 2.0).log_value == B.hw_bound(b, 2.0).log_value
