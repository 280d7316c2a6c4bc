"""Seeded Monte-Carlo estimates of ``Pr(Delta > t)`` and bound validation.

Normals come from Box-Muller on the Philox counter-based generator. Sample
index ``i`` always draws from sub-stream ``i // CHUNK``, so a fixed seed gives
the same draws however many worker threads are used.
"""

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .bounds import DEFAULT_BOUNDS, BoundName, evaluate, is_applicable
from .errors import DomainError, QuadChaosError
from .spectral import SymmetricMatrix, spectral_summary, symmetrize

CHUNK = 1 << 16
MIN_SAMPLES = 10_000
DEFAULT_CONF = 0.999
SEED_LIMIT = 1 << 64
_U53 = 2.0**-53


def _check_seed(seed):
    if not isinstance(seed, (int, np.integer)) or not (0 <= int(seed) < SEED_LIMIT):
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


class NormalStream:
    """Standard normals from sub-stream ``index`` of the generator keyed by ``seed``."""

    def __init__(self, seed, index=0):
        self.seed = _check_seed(seed)
        self.index = index
        self._bits = np.random.Philox(key=self.seed).jumped(index)

    def uniforms(self, count):
        """Uniforms on ``(0, 1]`` with 53 random bits each."""
        raw = self._bits.random_raw(count)
        return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * _U53

    def normals(self, count):
        half = (count + 1) // 2
        u1 = self.uniforms(half)
        u2 = self.uniforms(half)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * np.pi) * u2
        out = np.empty(2 * half)
        out[0::2] = radius * np.cos(angle)
        out[1::2] = radius * np.sin(angle)
        return out[:count]


def normals(seed, count):
    """``count`` standard normals, chunked over sub-streams like the sampler."""
    blocks = []
    for c in range(-(-count // CHUNK)):
        size = min(CHUNK, count - c * CHUNK)
        blocks.append(NormalStream(seed, c).normals(size))
    return np.concatenate(blocks) if blocks else np.empty(0)


def _delta_chunk(lam, seed, chunk, size):
    xi = NormalStream(seed, chunk).normals(size * lam.size).reshape(size, lam.size)
    return (xi * xi - 1.0) @ lam


def sample_deltas(eigenvalues, n_samples, seed, workers=1):
    """``n_samples`` draws of ``sum_i lambda_i (xi_i^2 - 1)``.

    Each chunk of ``CHUNK`` consecutive samples uses its own sub-stream; the
    result does not depend on ``workers``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    seed = _check_seed(seed)
    if n_samples < 1:
        raise DomainError(f"need at least one sample, got {n_samples}")
    chunks = [(c, min(CHUNK, n_samples - c * CHUNK)) for c in range(-(-n_samples // CHUNK))]
    if workers <= 1:
        parts = [_delta_chunk(lam, seed, c, size) for c, size in chunks]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda cs: _delta_chunk(lam, seed, *cs), chunks))
    return np.concatenate(parts)


def sample_delta(eigenvalues, stream):
    """One draw of ``Delta`` using the next ``n`` normals of ``stream``."""
    lam = np.asarray(eigenvalues, dtype=float)
    xi = stream.normals(lam.size)
    return float((xi * xi - 1.0) @ lam)


def hoeffding_radius(n_samples, conf=DEFAULT_CONF):
    """One-sided Hoeffding deviation ``sqrt(ln(1/(1-conf)) / (2N))``."""
    if not (0.0 < conf < 1.0):
        raise DomainError(f"confidence must lie in (0, 1), got {conf}")
    return math.sqrt(-math.log1p(-conf) / (2.0 * n_samples))


@dataclass(frozen=True)
class TailEstimate:
    t: float
    n_samples: int
    n_exceed: int
    p_hat: float
    p_upper: float
    conf: float
    seed: int

    @property
    def radius(self):
        return hoeffding_radius(self.n_samples, self.conf)

    @property
    def p_lower(self):
        return max(0.0, self.p_hat - self.radius)


def _tail(t, n_exceed, n_samples, conf, seed):
    p_hat = n_exceed / n_samples
    p_upper = min(1.0, p_hat + hoeffding_radius(n_samples, conf))
    return TailEstimate(float(t), n_samples, int(n_exceed), p_hat, p_upper, conf, seed)


def tail_counts(deltas, t_grid):
    """Number of samples strictly above each ``t``."""
    ordered = np.sort(deltas)
    return len(ordered) - np.searchsorted(ordered, np.asarray(t_grid, dtype=float), side="right")


def _check_samples(n_samples):
    if not isinstance(n_samples, (int, np.integer)) or n_samples < MIN_SAMPLES:
        raise DomainError(f"need at least {MIN_SAMPLES} samples, got {n_samples!r}")


def empirical_tail(eigenvalues, t, n_samples, seed, conf=DEFAULT_CONF, workers=1):
    """Seeded estimate of ``Pr(Delta > t)`` with a one-sided upper bound."""
    _check_samples(n_samples)
    deltas = sample_deltas(eigenvalues, n_samples, seed, workers)
    return _tail(t, int(np.count_nonzero(deltas > t)), n_samples, conf, seed)


def empirical_tails(eigenvalues, t_grid, n_samples, seed, conf=DEFAULT_CONF, workers=1):
    """:func:`empirical_tail` for every point of ``t_grid`` from one sample set."""
    _check_samples(n_samples)
    deltas = sample_deltas(eigenvalues, n_samples, seed, workers)
    counts = tail_counts(deltas, t_grid)
    return [_tail(t, c, n_samples, conf, seed) for t, c in zip(t_grid, counts)]


class Verdict(str, enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    SKIP = "SKIP"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ValidationRow:
    bound_name: BoundName
    t: float
    bound_value: float
    p_hat: float
    p_upper: float
    margin: float
    verdict: Verdict
    note: str = ""

    COLUMNS = ("bound_name", "t", "bound_value", "p_hat", "p_upper", "margin", "verdict")

    def as_tuple(self):
        return (self.bound_name.value, self.t, self.bound_value, self.p_hat, self.p_upper, self.margin,
                self.verdict.value)


def validate_bounds(matrix, t_grid, bound_names=DEFAULT_BOUNDS, n_samples=1_000_000, seed=0,
                    conf=DEFAULT_CONF, m=1, eps=1.0, workers=1):
    """Check every bound against the empirical lower confidence limit.

    A bound passes when ``bound >= p_hat - radius``. Bounds that do not apply
    to the matrix (or to a given ``t``) yield SKIP rows; nothing here raises on
    a failing bound.
    """
    s = matrix if hasattr(matrix, "alpha") else spectral_summary(matrix)
    tails = empirical_tails(s.eigenvalues, list(t_grid), n_samples, seed, conf, workers)
    rows = []
    for name in bound_names:
        name = BoundName(name)
        for est in tails:
            t = est.t
            if not is_applicable(s, name, t):
                rows.append(_skip(name, est, "not applicable"))
                continue
            try:
                value = evaluate(s, t, name, m=m, eps=eps).probability
            except QuadChaosError as exc:
                rows.append(_skip(name, est, str(exc)))
                continue
            margin = value - est.p_lower
            verdict = Verdict.PASS if margin >= 0.0 else Verdict.FAIL
            note = "0 observed; bound unfalsifiable at this N" if est.n_exceed == 0 else ""
            rows.append(ValidationRow(name, t, value, est.p_hat, est.p_upper, margin, verdict, note))
    return rows


def _skip(name, est, note):
    nan = math.nan
    return ValidationRow(name, est.t, nan, est.p_hat, est.p_upper, nan, Verdict.SKIP, note)


class Ensemble(str, enum.Enum):
    GOE_LIKE = "GOE_LIKE"
    WISHART_PSD = "WISHART_PSD"
    DIAGONAL = "DIAGONAL"
    FIXED = "FIXED"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class EnsembleSpec:
    """Random-matrix recipe. ``values`` holds the eigenvalues for DIAGONAL and
    the matrix entries for FIXED."""

    kind: Ensemble
    n: int
    seed: int = 0
    values: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Ensemble(self.kind))
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise DomainError(f"ensemble dimension must be a positive integer, got {self.n!r}")
        _check_seed(self.seed)


def generate_ensemble(spec):
    """Draw the matrix described by ``spec`` (deterministic in ``spec.seed``)."""
    n = spec.n
    if spec.kind is Ensemble.DIAGONAL:
        if len(spec.values) != n:
            raise DomainError(f"DIAGONAL needs {n} eigenvalues, got {len(spec.values)}")
        return SymmetricMatrix(np.diag(np.asarray(spec.values, dtype=float)))
    if spec.kind is Ensemble.FIXED:
        m = symmetrize(np.asarray(spec.values, dtype=float))
        if m.n != n:
            raise DomainError(f"FIXED matrix has dimension {m.n}, expected {n}")
        return m
    g = normals(spec.seed, n * n).reshape(n, n)
    if spec.kind is Ensemble.GOE_LIKE:
        return symmetrize(g)
    return symmetrize(g.T @ g / n)
