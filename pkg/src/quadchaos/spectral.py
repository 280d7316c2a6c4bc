"""Symmetric matrices, Jacobi eigendecomposition and spectral norms.

The eigensolver is a plain cyclic Jacobi iteration. It is O(n^3) per sweep
and intended for the small and medium dense matrices (n up to a few hundred)
that the bounds in this package are evaluated on.
"""

import csv
import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConvergenceError, DimensionError, DomainError, InvalidValueError

JACOBI_REL_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
RESIDUAL_REL_TOL = 1e-9
PSD_REL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SymmetricMatrix:
    """An exactly symmetric real ``n x n`` matrix.

    Build instances with :func:`symmetrize`; the constructor only checks.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidValueError("matrix has NaN or infinite entries")
        if not np.array_equal(a, a.T):
            raise DomainError("matrix is not symmetric; use symmetrize()")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def n(self):
        return self.entries.shape[0]

    def __neg__(self):
        return SymmetricMatrix(-self.entries)

    def __eq__(self, other):
        if not isinstance(other, SymmetricMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None


def symmetrize(raw):
    """Return the symmetric part ``(raw + raw^T) / 2`` of a square matrix.

    The quadratic form of a matrix only depends on its symmetric part, so no
    information relevant to the tail of ``x^T A x`` is lost.
    """
    a = np.array(raw, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidValueError("matrix has NaN or infinite entries")
    sym = 0.5 * (a + a.T)
    # (x + y)/2 and (y + x)/2 agree bitwise, but make the contract explicit.
    sym = np.triu(sym) + np.triu(sym, 1).T
    return SymmetricMatrix(sym)


def _jacobi(a, rel_tol=JACOBI_REL_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi rotations. Returns (eigenvalues, eigenvectors) unsorted."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.diag(a).copy(), v
    threshold = rel_tol * scale

    upper = np.triu_indices(n, 1)

    def off_norm(m):
        return math.sqrt(2.0) * float(np.linalg.norm(m[upper]))

    off = off_norm(a)
    for _ in range(max_sweeps):
        if off <= threshold:
            return np.diag(a).copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app, aqq = a[p, p], a[q, q]
                # Rutishauser's formulation: t = tan of the rotation angle.
                diff = aqq - app
                if abs(apq) < 1e-150 * abs(diff):
                    # rotation angle below double resolution
                    t = apq / diff
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
        off = off_norm(a)
    if off <= threshold:
        return np.diag(a).copy(), v
    raise ConvergenceError(
        f"Jacobi iteration did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {off:.3e}, target {threshold:.3e})",
        residual=off,
    )


def eigendecompose(m):
    """Eigenvalues of ``m`` in non-increasing order.

    Each eigenpair is checked against ``||A v - lambda v|| <= 1e-9 ||A||``
    before the eigenvectors are discarded.
    """
    a = m.entries
    w, v = _jacobi(a)
    op_norm = float(np.max(np.abs(w))) if w.size else 0.0
    if op_norm > 0.0:
        resid = np.linalg.norm(a @ v - v * w, axis=0)
        worst = float(np.max(resid))
        if worst > RESIDUAL_REL_TOL * op_norm:
            raise ConvergenceError(
                f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_REL_TOL:g} * ||A||",
                residual=worst,
            )
    return [float(x) for x in np.sort(w)[::-1]]


@dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalues of a symmetric matrix and every norm the bounds consume.

    ``alpha`` is the operator norm, ``beta`` the squared Hilbert-Schmidt norm
    and ``gamma`` the cubed Schatten 3-norm.
    """

    n: int
    eigenvalues: tuple
    alpha: float
    beta: float
    gamma: float
    trace: float
    lambda_max: float
    is_psd: bool

    @classmethod
    def from_eigenvalues(cls, eigenvalues):
        lam = np.sort(np.asarray(eigenvalues, dtype=float))[::-1]
        if lam.size < 1:
            raise DimensionError("need at least one eigenvalue")
        if not np.all(np.isfinite(lam)):
            raise InvalidValueError("eigenvalues must be finite")
        absl = np.abs(lam)
        alpha = float(absl.max())
        return cls(
            n=int(lam.size),
            eigenvalues=tuple(float(x) for x in lam),
            alpha=alpha,
            beta=math.fsum(float(x) ** 2 for x in lam),
            gamma=math.fsum(float(x) ** 3 for x in absl),
            trace=math.fsum(float(x) for x in lam),
            lambda_max=float(lam[0]),
            is_psd=bool(lam[-1] >= -PSD_REL_TOL * alpha),
        )

    @property
    def psd_tol(self):
        return PSD_REL_TOL * self.alpha

    @property
    def is_zero(self):
        return self.alpha == 0.0

    @cached_property
    def _abs_eigs(self):
        return np.abs(np.asarray(self.eigenvalues))

    def log_schatten(self, p):
        """Natural log of the Schatten p-norm, computed without overflow."""
        if p < 1:
            raise DomainError(f"Schatten order must be >= 1, got {p}")
        if self.is_zero:
            return -math.inf
        ratios = self._abs_eigs / self.alpha
        nz = ratios[ratios > 0]
        # sum(r^p) with r <= 1 stays in [1, n]; exp/log keeps tiny ratios accurate.
        s = math.fsum(np.exp(p * np.log(nz)))
        return math.log(self.alpha) + math.log(s) / p

    def schatten(self, p):
        """Schatten p-norm ``(sum |lambda_i|^p)^(1/p)``."""
        return math.exp(self.log_schatten(p))

    @property
    def hilbert_schmidt(self):
        return math.sqrt(self.beta)


def spectral_summary(m):
    return SpectralSummary.from_eigenvalues(eigendecompose(m))


def load_matrix_csv(path):
    """Read a square matrix from a headerless CSV file.

    Asymmetric input is replaced by its symmetric part, with a warning.
    """
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            cells = [c.strip() for c in row]
            if not any(cells) or cells[0].startswith("#"):
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise InvalidValueError(f"{path}: non-numeric entry ({exc})") from None
    if not rows or any(len(r) != len(rows) for r in rows):
        raise DimensionError(f"{path}: expected n rows of n comma-separated values")
    raw = np.array(rows)
    if not np.all(np.isfinite(raw)):
        raise InvalidValueError(f"{path}: matrix has NaN or infinite entries")
    if not np.array_equal(raw, raw.T):
        warnings.warn(f"{path}: matrix is not symmetric; using (A + A^T)/2", stacklevel=2)
    return symmetrize(raw)
