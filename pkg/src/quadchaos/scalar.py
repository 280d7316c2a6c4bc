"""Scalar special functions, constants and one-dimensional solvers."""

import math
from dataclasses import dataclass
from functools import lru_cache

from .config import tolerances
from .errors import ConvergenceError, DomainError, NumericalError

# theta_m: the closed form loses about eps * |ln(1-b)| / b^(m+1) to
# cancellation, so it is only used while b^(m+1) stays above this floor.
THETA_CLOSED_FORM_FLOOR = 1e-4
THETA_MAX_TERMS = 200_000

GAMMA_MAX_ITER = 500
PRESCAN_POINTS = 64
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _theta_series(b, m, rel_tol):
    total = 0.0
    power = 1.0
    for i in range(THETA_MAX_TERMS):
        term = power / (i + m + 1)
        total += term
        if term <= rel_tol * total:
            return total
        power *= b
    raise ConvergenceError(f"theta_m series did not converge for b={b}, m={m}")


def _theta_closed_form(b, m):
    head = math.fsum(b**k / k for k in range(1, m + 1))
    return (-math.log1p(-b) - head) / b ** (m + 1)


def theta_m(b, m):
    """``sum_{i>=0} b^i / (i + m + 1)`` for ``0 <= b < 1``.

    This is the smallest coefficient ``a`` for which
    ``-ln(1-x) <= x + x^2/2 + ... + x^m/m + a|x|^(m+1)`` holds on ``|x| <= b``.
    """
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    if not (0.0 <= b < 1.0):
        raise DomainError(f"theta_m requires 0 <= b < 1, got b={b!r}")
    if b == 0.0:
        return 1.0 / (m + 1)
    return _theta_cached(float(b), m, tolerances().series)


@lru_cache(maxsize=1 << 16)
def _theta_cached(b, m, rel_tol):
    if b ** (m + 1) >= THETA_CLOSED_FORM_FLOOR:
        return _theta_closed_form(b, m)
    return _theta_series(b, m, rel_tol)


@dataclass(frozen=True)
class Bracket:
    """An interval ``[lo, hi]`` on which ``f`` changes sign."""

    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise DomainError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if math.isnan(self.f_lo) or math.isnan(self.f_hi) or self.f_lo * self.f_hi > 0:
            raise DomainError(
                f"no sign change on [{self.lo}, {self.hi}]: f={self.f_lo:.6g}, {self.f_hi:.6g}"
            )

    @classmethod
    def of(cls, f, lo, hi):
        return cls(lo, hi, f(lo), f(hi))


def solve_root(f, bracket, tol=None):
    """Bisection on a validated bracket; the returned point is within ``tol``
    of a root of the continuous function ``f``."""
    if tol is None:
        tol = tolerances().root
    lo, hi, f_lo, f_hi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    while True:
        mid = 0.5 * (lo + hi)
        if hi - lo <= 2.0 * tol or mid == lo or mid == hi:
            return mid
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid


def minimize_1d(f, lo, hi, tol=None, prescan=PRESCAN_POINTS):
    """Minimize ``f`` on ``[lo, hi]``: coarse grid scan, then golden-section
    search in the cell pair around the best grid point.

    Returns ``(argmin, min)``; the best grid value wins if golden section does
    not improve on it.
    """
    if tol is None:
        tol = tolerances().minimize
    if not lo < hi:
        raise DomainError(f"minimize_1d needs lo < hi, got [{lo}, {hi}]")
    step = (hi - lo) / (prescan - 1)
    grid = [lo + i * step for i in range(prescan)]
    grid[-1] = hi
    values = [f(x) for x in grid]
    k = min(range(prescan), key=values.__getitem__)
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, prescan - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    if values[k] < fx:
        return grid[k], values[k]
    return x, fx


def _gamma_series(a, x, rel_tol):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum x^k / ((a+1)...(a+k))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * rel_tol:
            break
    else:
        raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * total


def _gamma_continued_fraction(a, x, rel_tol):
    # Q(a, x) by modified Lentz on the Legendre continued fraction.
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, GAMMA_MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rel_tol:
            break
    else:
        raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def regularized_gamma(a, x):
    """Return ``(P(a, x), Q(a, x))``, the regularized incomplete gamma pair.

    Whichever of the two is computed directly keeps full relative accuracy;
    the other is its complement.
    """
    if a <= 0:
        raise DomainError(f"shape parameter must be positive, got {a}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"incomplete gamma needs x >= 0, got {x}")
    if x == 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    rel_tol = tolerances().series
    if x < a + 1.0:
        p = _gamma_series(a, x, rel_tol)
        return p, 1.0 - p
    q = _gamma_continued_fraction(a, x, rel_tol)
    return 1.0 - q, q


def _check_chi2_args(n, x):
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"degrees of freedom must be a positive integer, got {n!r}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"chi-square argument must be >= 0, got {x}")


def chi2_cdf(n, x):
    """CDF of the chi-square distribution with ``n`` degrees of freedom."""
    _check_chi2_args(n, x)
    return regularized_gamma(0.5 * n, 0.5 * x)[0]


def chi2_sf(n, x):
    """Survival function ``1 - chi2_cdf(n, x)`` without cancellation."""
    _check_chi2_args(n, x)
    return regularized_gamma(0.5 * n, 0.5 * x)[1]


def chi2_log_sf_even(n, x):
    """``log(1 - F(x))`` for even ``n`` from the finite Poisson-type sum."""
    if not isinstance(n, int) or n < 2 or n % 2:
        raise DomainError(f"closed form needs a positive even n, got {n!r}")
    _check_chi2_args(n, x)
    if x == 0.0:
        return 0.0
    half = 0.5 * x
    log_half = math.log(half)
    logs = [i * log_half - half - math.lgamma(i + 1) for i in range(n // 2)]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(v - top) for v in logs))


def chi2_cdf_even(n, x):
    """Closed-form chi-square CDF for even ``n``:
    ``1 - sum_{i < n/2} (x/2)^i e^(-x/2) / i!``."""
    return -math.expm1(chi2_log_sf_even(n, x))


@dataclass(frozen=True)
class HwConstants:
    """Absolute constants of the refined Hanson-Wright family.

    ``kappa`` applies to any symmetric matrix, ``kappa_psd`` to
    positive-semidefinite ones and ``kappa_prime`` to the twin bound.
    ``kappa_lm`` is the best constant the classic Laurent-Massart bound
    implies.
    """

    b_star: float
    kappa: float
    b_star_twin: float
    kappa_prime: float
    kappa_psd: float
    a0: float
    kappa_lm: float


B_STAR_BRACKET = (1e-6, 1.0 - 1e-9)


def hw_kappa_equation(b):
    """Root at the b balancing 1/(8 theta_1(b)) against b/4."""
    return 2.0 * b * theta_m(b, 1) - 1.0


def twin_kappa_equation(b):
    return 4.0 / math.sqrt(3.0) * b * math.sqrt(theta_m(b, 2)) - 1.0


@lru_cache(maxsize=None)
def _hw_constants(root_tol):
    lo, hi = B_STAR_BRACKET
    b_star = solve_root(hw_kappa_equation, Bracket.of(hw_kappa_equation, lo, hi), root_tol)
    b_twin = solve_root(twin_kappa_equation, Bracket.of(twin_kappa_equation, lo, hi), root_tol)
    sqrt17 = math.sqrt(17.0)
    return HwConstants(
        b_star=b_star,
        kappa=b_star / 4.0,
        b_star_twin=b_twin,
        kappa_prime=b_twin / 3.0,
        kappa_psd=(9.0 - sqrt17) / 32.0,
        a0=(7.0 - sqrt17) / 4.0,
        kappa_lm=1.0 - math.sqrt(3.0) / 2.0,
    )


def hw_constants():
    return _hw_constants(tolerances().root)


def expand_bracket(f, lo, hi, factor=2.0, max_steps=200):
    """Grow ``hi`` geometrically until ``f`` changes sign on ``[lo, hi]``."""
    f_lo = f(lo)
    f_hi = f(hi)
    for _ in range(max_steps):
        if f_lo * f_hi <= 0:
            return Bracket(lo, hi, f_lo, f_hi)
        hi *= factor
        f_hi = f(hi)
    raise NumericalError(f"no sign change found on [{lo}, {hi}] after expansion")
