"""Where the m-infinity bound beats the chi-square bound for PSD matrices.

With ``r = t / ||A||`` both bounds share the factor ``exp(-r/2)``:

    m-infinity:  P1(r) e^(-r/2),  P1(r) = (1 + r/n)^(n/2)
    chi-square:  P2(r) e^(-r/2),  P2(r) = e^(-1/2) sum_{i<n/2} (1+r)^i / (2^i i!)

so for even ``n`` the comparison reduces to the sign of the polynomial
``D = P1 - P2``.
"""

import enum
import math
from dataclasses import dataclass

from .bounds import chi2_relaxed, m_inf_bound
from .errors import DomainError, NumericalError

N_MAX = 200
ROOT_REL_TOL = 1e-13
LN2 = math.log(2.0)


@dataclass(frozen=True)
class Poly:
    """Real polynomial; ``coeffs[j]`` multiplies ``x^j``.

    Trailing exact zeros are trimmed. Coefficients of the crossover polynomials
    span hundreds of orders of magnitude, so nothing else is dropped.
    """

    coeffs: tuple

    def __post_init__(self):
        c = [float(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        if not c:
            raise DomainError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def scaled(self, x):
        """``p(x) / max(1, x)^degree``: same sign as ``p(x)`` for ``x > 0``,
        without overflow at large ``x``."""
        if x <= 1.0:
            return self(x)
        y = 1.0 / x
        acc = 0.0
        for c in self.coeffs:
            acc = acc * y + c
        return acc

    def abs_scaled(self, x):
        """Scaled ``sum |c_j| x^j``, the rounding scale of :meth:`scaled`."""
        return Poly(tuple(abs(c) for c in self.coeffs)).scaled(abs(x))

    def __sub__(self, other):
        k = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0.0,) * (k - len(self.coeffs))
        b = other.coeffs + (0.0,) * (k - len(other.coeffs))
        return Poly(tuple(x - y for x, y in zip(a, b)))


class Dominance(str, enum.Enum):
    CHI2_ALWAYS = "CHI2_ALWAYS"
    M_INF_INSIDE_INTERVAL = "M_INF_INSIDE_INTERVAL"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class CrossoverReport:
    n: int
    sign_changes: int
    r_n: float | None
    r_n_prime: float | None
    dominance: Dominance


@dataclass(frozen=True)
class DominanceRow:
    r: float
    log_m_inf: float
    log_chi2: float
    direct: str
    predicted: str

    @property
    def agrees(self):
        return self.direct == self.predicted


def _check_n(n):
    if not isinstance(n, int) or n < 2 or n % 2 or n > N_MAX:
        raise DomainError(f"n must be an even integer in [2, {N_MAX}], got {n!r}")


def _log_unit(j):
    # log(1 / (2^j j!)) -- the leading scale shared by both coefficient families
    return -j * LN2 - math.lgamma(j + 1)


def poly1(n):
    """Coefficients ``C(n/2, j) / n^j`` of ``(1 + r/n)^(n/2)``."""
    _check_n(n)
    h = n // 2
    log_n = math.log(n)
    return Poly(
        tuple(
            math.exp(math.lgamma(h + 1) - math.lgamma(j + 1) - math.lgamma(h - j + 1) - j * log_n)
            for j in range(h + 1)
        )
    )


def poly2(n):
    """Coefficients ``e^(-1/2) sum_{i=j}^{n/2-1} C(i, j) / (2^i i!)``."""
    _check_n(n)
    h = n // 2
    out = []
    for j in range(h):
        logs = [-(math.lgamma(j + 1) + math.lgamma(i - j + 1) + i * LN2) for i in range(j, h)]
        top = max(logs)
        out.append(math.exp(top - 0.5) * math.fsum(math.exp(v - top) for v in logs))
    return Poly(tuple(out))


def _poisson_half_head(k):
    # Pr(Poisson(1/2) < k)
    return math.exp(-0.5) * math.fsum(math.exp(-i * LN2 - math.lgamma(i + 1)) for i in range(k))


def _poisson_half_tail(k):
    # Pr(Poisson(1/2) >= k), summed upward so small tails keep full precision
    terms = []
    i = k
    while True:
        v = math.exp(-0.5 - i * LN2 - math.lgamma(i + 1))
        terms.append(v)
        if v <= 1e-18 * terms[0]:
            return math.fsum(terms)
        i += 1


def diff_poly(n):
    """``P1 - P2`` with every coefficient free of cancellation.

    Writing ``u_j = 1 / (2^j j!)``, the coefficients are
    ``u_j prod_{i<j} (1 - 2i/n)`` and ``u_j Pr(Poisson(1/2) < n/2 - j)``. When
    both are close to ``u_j`` the difference is formed as
    ``u_j ((prod - 1) + Pr(Poisson(1/2) >= n/2 - j))`` instead.
    """
    _check_n(n)
    h = n // 2
    out = []
    log_prod = 0.0
    for j in range(h + 1):
        if j > 0:
            log_prod += math.log1p(-2.0 * (j - 1) / n)
        unit = math.exp(_log_unit(j))
        prod = math.exp(log_prod)
        if j == h:
            out.append(unit * prod)
        elif prod > 0.5:
            out.append(unit * (math.expm1(log_prod) + _poisson_half_tail(h - j)))
        else:
            out.append(unit * (prod - _poisson_half_head(h - j)))
    return Poly(tuple(out))


def sign_changes(p, zero_tol=0.0):
    """Number of sign flips in the coefficient sequence (Descartes' rule).

    Coefficients with ``|c| <= zero_tol`` are skipped.
    """
    nz = [c for c in p.coeffs if abs(c) > zero_tol]
    if not nz:
        raise DomainError("all-zero polynomial has no sign pattern")
    return sum(1 for a, b in zip(nz, nz[1:]) if (a < 0) != (b < 0))


def poly_shift(p, s):
    """Coefficients of ``x -> p(x + s)`` by repeated synthetic division."""
    c = list(p.coeffs)
    k = len(c)
    for i in range(k - 1):
        for j in range(k - 2, i - 1, -1):
            c[j] += s * c[j + 1]
    return Poly(tuple(c))


def _bisect_log(f, lo, hi, rel_tol=ROOT_REL_TOL):
    # bisection in log r: the larger root spans dozens of decades
    f_lo = f(lo)
    if f_lo * f(hi) > 0:
        raise NumericalError(f"no sign change on [{lo:.6g}, {hi:.6g}]")
    a, b = math.log(lo), math.log(hi)
    while b - a > rel_tol:
        mid = 0.5 * (a + b)
        fm = f(math.exp(mid))
        if fm == 0.0:
            return math.exp(mid)
        if (fm < 0) == (f_lo < 0):
            a = mid
        else:
            b = mid
    return math.exp(0.5 * (a + b))


def find_crossings(n, d=None):
    """``(r_n, r'_n)``: the roots of ``D`` in ``(0, 1)`` and ``(1, inf)``."""
    _check_n(n)
    if n < 8:
        raise DomainError(f"two crossings exist only for even n >= 8, got {n}")
    if d is None:
        d = diff_poly(n)
    if not (d(0.0) > 0 and d(1.0) < 0):
        raise NumericalError(f"D(0) = {d(0.0):.6g}, D(1) = {d(1.0):.6g}: expected + and -")
    lo = 0.5
    while d(lo) <= 0:
        lo *= 0.1
        if lo < 1e-300:
            raise NumericalError("could not bracket the smaller crossing")
    r_n = _bisect_log(d.scaled, lo, 1.0)
    hi = 2.0
    while d.scaled(hi) <= 0:
        hi *= 2.0
        if math.isinf(hi):
            raise NumericalError("could not bracket the larger crossing")
    r_np = _bisect_log(d.scaled, 1.0, hi)
    return r_n, r_np


def root_residual(d, r):
    """``|D(r)|`` relative to its rounding scale ``sum |d_j| r^j``."""
    return abs(d.scaled(r)) / d.abs_scaled(r)


def crossover_report(n):
    """Sign pattern, roots and dominance verdict for even ``n``."""
    d = diff_poly(n)
    changes = sign_changes(d)
    if changes == 0:
        return CrossoverReport(n, 0, None, None, Dominance.CHI2_ALWAYS)
    r_n, r_np = find_crossings(n, d)
    return CrossoverReport(n, changes, r_n, r_np, Dominance.M_INF_INSIDE_INTERVAL)


def predicted_sharper(report, r):
    if report.dominance is Dominance.M_INF_INSIDE_INTERVAL and report.r_n < r < report.r_n_prime:
        return "M_INF"
    return "CHI2"


def direct_sharper(n, r):
    """Compare the two bounds by direct evaluation at ``t / ||A|| = r``."""
    lm = m_inf_bound(n, 1.0, r).log_value
    lc = chi2_relaxed(n, 1.0, r).log_value
    return lm, lc, ("M_INF" if lm < lc else "CHI2")


def dominance_report(n, r_grid):
    """:class:`CrossoverReport` plus the per-r cross-check of the polynomial
    verdict against direct bound evaluation.

    Odd ``n`` is compared directly only; the report then carries no roots.
    """
    if isinstance(n, int) and n >= 1 and n % 2 == 1:
        rows = []
        for r in r_grid:
            lm, lc, direct = direct_sharper(n, r)
            rows.append(DominanceRow(r, lm, lc, direct, direct))
        return None, rows
    report = crossover_report(n)
    rows = []
    for r in r_grid:
        lm, lc, direct = direct_sharper(n, r)
        rows.append(DominanceRow(r, lm, lc, direct, predicted_sharper(report, r)))
    return report, rows
