"""Tail bounds on ``Pr(Delta > t)`` for ``Delta = x^T A x - Tr(A)``.

Every bound is computed as a log-domain exponent; :attr:`BoundValue.probability`
clamps to ``[0, 1]`` only on demand. A zero matrix makes ``Delta`` identically
zero, and every bound then returns the degenerate value ``Pr = 0``.

Notation: ``alpha = ||A||`` (operator norm), ``beta = ||A||_2^2``,
``gamma = ||A||_3^3``, ``rho = alpha t / beta`` and ``r = t / alpha``.
"""

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType

from .errors import DomainError, NumericalError
from .scalar import (
    Bracket,
    chi2_cdf,
    chi2_sf,
    expand_bracket,
    hw_constants,
    minimize_1d,
    solve_root,
    theta_m,
)

M_MAX = 200
B_SEARCH = (1e-9, 1.0 - 1e-9)


class BoundName(str, enum.Enum):
    HW = "HW"
    LM_CLASSIC = "LM_CLASSIC"
    LM_AUGMENTED = "LM_AUGMENTED"
    LM_OPTIMAL = "LM_OPTIMAL"
    LAMBDA_M = "LAMBDA_M"
    LAMBDA_M_LOOSE = "LAMBDA_M_LOOSE"
    M_INF = "M_INF"
    TWIN = "TWIN"
    CHI2 = "CHI2"
    CHI2_PSD = "CHI2_PSD"
    HW_RELAXED = "HW_RELAXED"
    LM_RELAXED = "LM_RELAXED"
    LARGE_DEVIATION = "LARGE_DEVIATION"
    # Relaxed augmented/optimal LM (rho -> t/(n alpha)); opt-in only.
    LM_AUGMENTED_RELAXED = "LM_AUGMENTED_RELAXED"
    LM_OPTIMAL_RELAXED = "LM_OPTIMAL_RELAXED"

    @classmethod
    def parse(cls, text):
        try:
            return cls(text.strip().upper())
        except ValueError:
            names = ", ".join(m.value for m in cls)
            raise DomainError(f"unknown bound {text!r}; choose from {names}") from None

    def __str__(self):
        return self.value


PSD_ONLY = frozenset(
    {
        BoundName.LM_CLASSIC,
        BoundName.LM_AUGMENTED,
        BoundName.LM_OPTIMAL,
        BoundName.CHI2_PSD,
        BoundName.HW_RELAXED,
        BoundName.LM_RELAXED,
        BoundName.LARGE_DEVIATION,
        BoundName.LM_AUGMENTED_RELAXED,
        BoundName.LM_OPTIMAL_RELAXED,
    }
)
OPT_IN = frozenset({BoundName.LM_AUGMENTED_RELAXED, BoundName.LM_OPTIMAL_RELAXED})
DEFAULT_BOUNDS = tuple(b for b in BoundName if b not in OPT_IN)


@dataclass(frozen=True)
class BoundValue:
    name: BoundName
    log_value: float
    params: MappingProxyType = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def probability(self):
        if self.log_value >= 0.0:
            return 1.0
        return math.exp(self.log_value)

    @property
    def degenerate(self):
        return bool(self.params.get("degenerate", False))


@dataclass(frozen=True)
class TwinComponents:
    eta1: float
    eta2: float


def _degenerate(name):
    return BoundValue(name, -math.inf, {"degenerate": True})


def _check_t(t):
    if not t >= 0 or math.isinf(t):
        raise DomainError(f"tail parameter must be finite and >= 0, got {t!r}")


def _require_psd(s, name):
    if not s.is_psd:
        raise DomainError(f"{name} requires positive-semidefinite input")


def _sqrt1p_minus_1(x):
    return x / (math.sqrt(1.0 + x) + 1.0)


# -- Hanson-Wright -----------------------------------------------------------


def hw_exponent_min(s, t):
    """``min(t^2 / beta, t / alpha)``."""
    return min(t * t / s.beta, t / s.alpha)


def hw_bound(s, t, kappa=None):
    """``exp(-kappa min(t^2/beta, t/alpha))``.

    Without an explicit ``kappa`` the general symmetric constant is used, or
    the larger positive-semidefinite one when ``s.is_psd``.
    """
    _check_t(t)
    if s.is_zero:
        return _degenerate(BoundName.HW)
    if kappa is None:
        c = hw_constants()
        kappa = c.kappa_psd if s.is_psd else c.kappa
    if kappa <= 0:
        raise DomainError(f"kappa must be positive, got {kappa}")
    return BoundValue(BoundName.HW, -kappa * hw_exponent_min(s, t), {"kappa": kappa})


# -- Laurent-Massart family --------------------------------------------------


def lm_parameters(a):
    """``(b, c)`` for the improved LM bound; ``c = inf`` at ``a = 1``."""
    if not (2.0 / 3.0 < a <= 1.0):
        raise DomainError(f"LM parameter a must lie in (2/3, 1], got {a!r}")
    b = (3.0 * a - 2.0) / (a * (2.0 * a - 1.0))
    c = math.inf if a == 1.0 else (3.0 * a - 2.0) / (2.0 * (1.0 - a) ** 2)
    return b, c


def lm_exponent_branches(alpha, beta, t, a):
    """Both branch formulas of ``Lambda(t, a)``: (rho <= c branch, rho > c branch).

    The second one is ``nan`` at ``a = 1`` where it does not exist.
    """
    b, _ = lm_parameters(a)
    x = 2.0 * a * alpha * t / beta
    inner = -t / (2.0 * a * alpha) + beta / (2.0 * a * a * alpha * alpha) * _sqrt1p_minus_1(x)
    if a == 1.0:
        return inner, math.nan
    outer = -b * t / (2.0 * alpha) + b * b * beta / (4.0 * (1.0 - a * b) * alpha * alpha)
    return inner, outer


def lm_exponent(alpha, beta, t, a):
    """``Lambda(t, a)`` with the branch chosen by ``rho = alpha t / beta``."""
    _, c = lm_parameters(a)
    inner, outer = lm_exponent_branches(alpha, beta, t, a)
    return inner if alpha * t / beta <= c else outer


def lm_lambda(s, t, a):
    """Improved Laurent-Massart bound ``exp(Lambda(t, a))`` for PSD ``A``.

    ``a = 1`` is the classic LM bound.
    """
    _check_t(t)
    _require_psd(s, "LM bound")
    lm_parameters(a)
    name = BoundName.LM_CLASSIC if a == 1.0 else BoundName.LM_OPTIMAL
    if s.is_zero:
        return _degenerate(name)
    rho = s.alpha * t / s.beta
    return BoundValue(name, lm_exponent(s.alpha, s.beta, t, a), {"a": a, "rho": rho})


def lm_classic_closed_form(alpha, beta, t):
    """``-((sqrt(beta + 2 alpha t) - sqrt(beta)) / (2 alpha))^2``."""
    return -(((math.sqrt(beta + 2.0 * alpha * t) - math.sqrt(beta)) / (2.0 * alpha)) ** 2)


def a_hat_opt(rho):
    """Closed-form near-optimal LM parameter, in ``(2/3, 1)``."""
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    # (4 rho + 3 - sqrt(8 rho + 9)) / (4 rho), rearranged to avoid cancellation
    return 1.0 - 2.0 / (3.0 + math.sqrt(8.0 * rho + 9.0))


def lm_quintic(rho, a):
    """``12 rho a^5 + (36 - 40 rho) a^4 + (48 rho - 99) a^3 + (104 - 24 rho) a^2
    + (4 rho - 48) a + 8``."""
    return _quintic_shifted(rho, a - 2.0 / 3.0)


def _quintic_shifted(rho, u):
    # The quintic expanded around a = 2/3 (exact rational coefficients). Its
    # rho-free part vanishes there, so this form stays accurate for tiny rho.
    free = u * (4.0 / 3.0 + u * (2.0 + u * (-3.0 + 36.0 * u)))
    linear = -8.0 / 81.0 + u * (4.0 / 9.0 + u * (8.0 / 9.0 + u * (-16.0 / 3.0 + 12.0 * u * u)))
    return free + rho * linear


def a_opt_quintic(rho, tol=1e-12):
    """Exact minimizer of ``a -> Lambda(t, a)``: the quintic root in
    ``(2/3, a_hat_opt(rho)]``."""
    a_hat = a_hat_opt(rho)
    # a_hat_opt(rho) - 2/3 without cancellation
    hi = 8.0 * rho / (3.0 * (3.0 + math.sqrt(8.0 * rho + 9.0)) ** 2)
    f_lo, f_hi = _quintic_shifted(rho, 0.0), _quintic_shifted(rho, hi)
    # For small rho the root agrees with a_hat_opt to second order; an endpoint
    # value at rounding level is a root.
    noise = 64.0 * 2.2e-16 * (4.0 / 3.0 * hi + 8.0 / 81.0 * rho)
    if abs(f_hi) <= noise:
        return a_hat
    if f_lo * f_hi > 0:
        raise NumericalError(
            f"quintic has no sign change on (2/3, {hi + 2.0 / 3.0:.12g}] for rho={rho}: "
            f"values {f_lo:.6g}, {f_hi:.6g}"
        )
    u = solve_root(lambda x: _quintic_shifted(rho, x), Bracket(0.0, hi, f_lo, f_hi), tol)
    # the root lies in (2/3, a_hat]; keep rounding in the sum from crossing a_hat
    return min(2.0 / 3.0 + u, a_hat)


def _lm_at(s, t, name, choose_a):
    _check_t(t)
    _require_psd(s, name.value)
    if s.is_zero:
        return _degenerate(name)
    if t == 0.0:
        return BoundValue(name, 0.0, {"a": math.nan, "rho": 0.0})
    rho = s.alpha * t / s.beta
    a = choose_a(rho)
    return BoundValue(name, lm_exponent(s.alpha, s.beta, t, a), {"a": a, "rho": rho})


def lm_classic(s, t):
    v = lm_lambda(s, t, 1.0)
    return BoundValue(BoundName.LM_CLASSIC, v.log_value, v.params)


def lm_augmented(s, t):
    return _lm_at(s, t, BoundName.LM_AUGMENTED, a_hat_opt)


def lm_optimal(s, t):
    return _lm_at(s, t, BoundName.LM_OPTIMAL, a_opt_quintic)


def lm_hw_ratio(rho, a=1.0):
    """``-Lambda(t, a) / min(t^2/beta, t/alpha)`` as a function of rho alone.

    The infimum over rho is the Hanson-Wright constant implied by the LM-type
    bound with parameter ``a``.
    """
    # alpha = beta = 1 loses no generality: the ratio depends on rho only.
    return -lm_exponent(1.0, 1.0, rho, a) / min(rho * rho, rho)


def lm_reparameterize(beta, alpha, t):
    """``t -> 2 sqrt(beta t) + 2 alpha t`` (deviation at which LM gives e^-t)."""
    return 2.0 * math.sqrt(beta * t) + 2.0 * alpha * t


def lm_reparameterize_inverse(beta, alpha, t_dev):
    """Inverse of :func:`lm_reparameterize`."""
    root = 2.0 * alpha * t_dev / (math.sqrt(beta + 2.0 * alpha * t_dev) + math.sqrt(beta))
    return (root / (2.0 * alpha)) ** 2


# -- Schatten-norm family ----------------------------------------------------


def _check_m(m):
    if not isinstance(m, int) or not (1 <= m <= M_MAX):
        raise DomainError(f"m must be an integer in [1, {M_MAX}], got {m!r}")


def kappa_m(b, m):
    """``m/(2(m+1)) * min(((m+1) theta_m(b))^(-1/m), b)``."""
    _check_m(m)
    if not (0.0 < b < 1.0):
        raise DomainError(f"b must lie in (0, 1), got {b!r}")
    first = math.exp(-math.log((m + 1) * theta_m(b, m)) / m)
    return m / (2.0 * (m + 1)) * min(first, b)


def _power_sum(b, m):
    # sum_{k=2}^m b^k / k
    return math.fsum(b**k / k for k in range(2, m + 1))


def lambda_m_shape(s, t, m):
    """``min(t^(1+1/m) / ||A||_{m+1}^(1+1/m), t / alpha)``."""
    if t == 0.0:
        return 0.0
    e = 1.0 + 1.0 / m
    first = math.exp(e * (math.log(t) - s.log_schatten(m + 1)))
    return min(first, t / s.alpha)


def lambda_m(s, t, m, b):
    """Exponent ``Lambda_m(t, b)`` of the Schatten-norm bound of index m."""
    _check_t(t)
    _check_m(m)
    if not (0.0 < b < 1.0):
        raise DomainError(f"b must lie in (0, 1), got {b!r}")
    return 0.5 * s.n * _power_sum(b, m) - kappa_m(b, m) * lambda_m_shape(s, t, m)


def lambda_m_bound(s, t, m):
    """``inf_{0<b<1} exp(Lambda_m(t, b))``."""
    _check_t(t)
    _check_m(m)
    if s.is_zero:
        return _degenerate(BoundName.LAMBDA_M)
    shape = lambda_m_shape(s, t, m)
    half_n = 0.5 * s.n

    def objective(b):
        return half_n * _power_sum(b, m) - kappa_m(b, m) * shape

    b, value = minimize_1d(objective, *B_SEARCH)
    if value > 0.0:
        # b -> 0+ drives the exponent to 0
        b, value = 0.0, 0.0
    return BoundValue(BoundName.LAMBDA_M, value, {"m": m, "b": b})


def lambda_m_loose(s, t, m, eps):
    """Fixed-b relaxation ``(1+eps) exp(-kappa~_m min(...))`` with ``b~`` solving
    ``(n/2) sum_{k=2}^m b^k / k = ln(1 + eps)``."""
    _check_t(t)
    if not isinstance(m, int) or m < 2 or m > M_MAX:
        raise DomainError(f"loose bound needs an integer m in [2, {M_MAX}], got {m!r}")
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps!r}")
    if s.is_zero:
        return _degenerate(BoundName.LAMBDA_M_LOOSE)
    target = math.log1p(eps)
    half_n = 0.5 * s.n
    sup = half_n * math.fsum(1.0 / k for k in range(2, m + 1))
    if target >= sup:
        raise DomainError(
            f"ln(1+eps) = {target:.6g} is not below sup_b (n/2) sum b^k/k = {sup:.6g}; no b~ exists"
        )

    def g(b):
        return half_n * _power_sum(b, m) - target

    b_tilde = solve_root(g, Bracket(0.0, 1.0, -target, sup - target))
    b_tilde = min(max(b_tilde, 1e-300), 1.0 - 1e-16)
    k_tilde = kappa_m(b_tilde, m)
    value = target - k_tilde * lambda_m_shape(s, t, m)
    return BoundValue(
        BoundName.LAMBDA_M_LOOSE, value, {"m": m, "eps": eps, "b": b_tilde, "kappa": k_tilde}
    )


def _check_n_alpha(n, alpha):
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n!r}")
    if alpha < 0 or math.isnan(alpha):
        raise DomainError(f"operator norm must be >= 0, got {alpha!r}")


def m_inf_exponent(n, r):
    """``(n/2) ln(1 + r/n) - r/2`` in terms of ``r = t / alpha``."""
    return 0.5 * n * math.log1p(r / n) - 0.5 * r


def m_inf_bound(n, alpha, t):
    """``(1 + t/(n alpha))^(n/2) exp(-t/(2 alpha))``, the m -> infinity limit."""
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(BoundName.M_INF)
    r = t / alpha
    return BoundValue(BoundName.M_INF, m_inf_exponent(n, r), {"r": r, "b": t / (n * alpha + t)})


def t_hat_c(n, alpha, kappa, tol=1e-9):
    """Positive root of ``(1 + t/(n alpha))^(n/2) exp(-(1/2 - kappa) t/alpha) = 1``.

    Crossover estimate beyond which the m -> infinity bound beats Hanson-Wright
    with constant ``kappa``.
    """
    _check_n_alpha(n, alpha)
    if alpha == 0.0:
        raise DomainError("operator norm must be positive")
    if not (0.0 < kappa < 0.5):
        raise DomainError(f"kappa must lie in (0, 1/2), got {kappa!r}")

    def g(u):
        return 0.5 * n * math.log1p(u / n) - (0.5 - kappa) * u

    # g(u) ~ kappa u - u^2/(4n) near 0, so g > 0 just right of the origin.
    lo = min(1e-6, 2.0 * n * kappa)
    bracket = expand_bracket(g, lo, max(1.0, 4.0 * n * kappa))
    return alpha * solve_root(g, bracket, tol)


# -- twin bound --------------------------------------------------------------


def twin_components(s, t):
    """``eta_1(t)`` and ``eta_2(t)`` in cancellation-free form."""
    _check_t(t)
    alpha, beta, gamma = s.alpha, s.beta, s.gamma
    root = math.sqrt(beta * beta + 4.0 * gamma * t)
    # eta_1 = (1/(12 gamma^2)) (root - beta)(beta^2 + 8 gamma t - beta root)
    eta1 = 4.0 * t * t * (2.0 * root + beta) / (3.0 * (root + beta) ** 2)
    # (root - beta) / (2 gamma) = 2t / (root + beta)
    eta2 = t / alpha - 0.75 * beta / alpha * min(1.0 / alpha, 2.0 * t / (root + beta))
    return TwinComponents(eta1, eta2)


def twin_bound(s, t):
    """``exp(-kappa' min(eta_1(t), eta_2(t)))``."""
    _check_t(t)
    if s.is_zero:
        return _degenerate(BoundName.TWIN)
    kp = hw_constants().kappa_prime
    eta = twin_components(s, t)
    return BoundValue(
        BoundName.TWIN, -kp * min(eta.eta1, eta.eta2), {"kappa": kp, "eta1": eta.eta1, "eta2": eta.eta2}
    )


# -- chi-square family -------------------------------------------------------


def _log(p):
    return math.log(p) if p > 0.0 else -math.inf


def chi2_bound(s, t):
    """Bound from ``x^T A x <= lambda_max x^T x`` and the chi-square law of
    ``x^T x``."""
    _check_t(t)
    if s.is_zero:
        return _degenerate(BoundName.CHI2)
    lmax = s.lambda_max
    if abs(lmax) <= s.psd_tol:
        raise DomainError("chi-square bound requires a nonzero largest eigenvalue")
    x = (s.trace + t) / lmax
    if lmax > 0:
        p = 1.0 if x <= 0 else chi2_sf(s.n, x)
    else:
        p = 0.0 if x <= 0 else chi2_cdf(s.n, x)
    return BoundValue(BoundName.CHI2, _log(p), {"x": x})


def chi2_relaxed(n, alpha, t):
    """``1 - F_{chi2_n}(1 + t/alpha)``: the chi-square bound for PSD ``A``
    known only through ``n`` and ``alpha``."""
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(BoundName.CHI2_PSD)
    x = 1.0 + t / alpha
    return BoundValue(BoundName.CHI2_PSD, _log(chi2_sf(n, x)), {"x": x, "r": t / alpha})


def chi2_psd_bound(s, t):
    _require_psd(s, "CHI2_PSD")
    return chi2_relaxed(s.n, s.alpha, t)


# -- bounds depending on n and alpha only -----------------------------------


def hw_relaxed(n, alpha, t):
    """Hanson-Wright with ``beta`` replaced by its upper bound ``n alpha^2``."""
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(BoundName.HW_RELAXED)
    kappa = hw_constants().kappa_psd
    r = t / alpha
    return BoundValue(BoundName.HW_RELAXED, -kappa * min(r * r / n, r), {"kappa": kappa, "r": r})


def lm_relaxed(n, alpha, t):
    """``exp(-(n/4)(sqrt(1 + 2t/(n alpha)) - 1)^2)``."""
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(BoundName.LM_RELAXED)
    r = t / alpha
    d = _sqrt1p_minus_1(2.0 * r / n)
    return BoundValue(BoundName.LM_RELAXED, -0.25 * n * d * d, {"r": r})


def large_deviation_bound(n, alpha, t):
    """``e^(-1/2) (e (1+r)/n)^(n/2) e^(-r/2)``, valid only for ``1 + r >= n``."""
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(BoundName.LARGE_DEVIATION)
    r = t / alpha
    if 1.0 + r < n:
        raise DomainError(f"large-deviation bound needs 1 + t/alpha >= n (got {1.0 + r:.6g} < {n})")
    value = -0.5 + 0.5 * n * (1.0 + math.log1p(r) - math.log(n)) - 0.5 * r
    return BoundValue(BoundName.LARGE_DEVIATION, value, {"r": r})


def _lm_relaxed_opt(n, alpha, t, name, choose_a):
    _check_n_alpha(n, alpha)
    _check_t(t)
    if alpha == 0.0:
        return _degenerate(name)
    beta = n * alpha * alpha
    if t == 0.0:
        return BoundValue(name, 0.0, {"a": math.nan, "rho": 0.0})
    rho = t / (n * alpha)
    a = choose_a(rho)
    return BoundValue(name, lm_exponent(alpha, beta, t, a), {"a": a, "rho": rho})


def lm_augmented_relaxed(n, alpha, t):
    return _lm_relaxed_opt(n, alpha, t, BoundName.LM_AUGMENTED_RELAXED, a_hat_opt)


def lm_optimal_relaxed(n, alpha, t):
    return _lm_relaxed_opt(n, alpha, t, BoundName.LM_OPTIMAL_RELAXED, a_opt_quintic)


# -- dispatch ----------------------------------------------------------------

DIMENSION_ONLY = {
    BoundName.M_INF: m_inf_bound,
    BoundName.HW_RELAXED: hw_relaxed,
    BoundName.LM_RELAXED: lm_relaxed,
    BoundName.LARGE_DEVIATION: large_deviation_bound,
    BoundName.CHI2_PSD: chi2_relaxed,
    BoundName.LM_AUGMENTED_RELAXED: lm_augmented_relaxed,
    BoundName.LM_OPTIMAL_RELAXED: lm_optimal_relaxed,
}


def is_applicable(s, name, t=None):
    """Whether ``name`` can be evaluated for this spectrum (and tail ``t``)."""
    name = BoundName(name)
    if name in PSD_ONLY and not s.is_psd:
        return False
    if name is BoundName.CHI2 and not s.is_zero and abs(s.lambda_max) <= s.psd_tol:
        return False
    if name is BoundName.LARGE_DEVIATION and t is not None and s.alpha > 0 and 1.0 + t / s.alpha < s.n:
        return False
    return True


def evaluate(s, t, name, m=1, eps=1.0, kappa=None):
    """Evaluate the bound ``name`` for spectrum ``s`` at tail parameter ``t``."""
    name = BoundName(name)
    if name is BoundName.HW:
        return hw_bound(s, t, kappa)
    if name is BoundName.LM_CLASSIC:
        return lm_classic(s, t)
    if name is BoundName.LM_AUGMENTED:
        return lm_augmented(s, t)
    if name is BoundName.LM_OPTIMAL:
        return lm_optimal(s, t)
    if name is BoundName.LAMBDA_M:
        return lambda_m_bound(s, t, m)
    if name is BoundName.LAMBDA_M_LOOSE:
        return lambda_m_loose(s, t, max(m, 2), eps)
    if name is BoundName.TWIN:
        return twin_bound(s, t)
    if name is BoundName.CHI2:
        return chi2_bound(s, t)
    if name in PSD_ONLY:
        _require_psd(s, name.value)
    return DIMENSION_ONLY[name](s.n, s.alpha, t)
