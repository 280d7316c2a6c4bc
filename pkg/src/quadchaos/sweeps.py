"""Grids of bound values and their CSV form."""

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import DIMENSION_ONLY, BoundName, evaluate, is_applicable, lambda_m_bound
from .errors import DomainError


def parse_grid(text):
    """``MIN:MAX:STEPS`` -> ``STEPS`` evenly spaced points including both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must look like MIN:MAX:STEPS, got {text!r}")
    try:
        lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise DomainError(f"grid must look like MIN:MAX:STEPS, got {text!r}") from None
    if steps < 1 or hi < lo or (steps == 1 and hi != lo):
        raise DomainError(f"bad grid {text!r}: need MIN <= MAX and STEPS >= 1 (STEPS = 1 only if MIN = MAX)")
    if steps == 1:
        return [lo]
    k = steps - 1
    # weighted form hits round values exactly (5:10:26 contains 7.0)
    return [(lo * (k - i) + hi * i) / k for i in range(steps)]


def fmt(x):
    """Shortest round-tripping representation; empty for undefined cells."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


@dataclass
class SweepTable:
    """Bound probabilities over a grid of ``t`` (or ``r = t / ||A||``)."""

    axis_name: str
    axis: list
    columns: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for name, col in self.columns.items():
            if len(col) != len(self.axis):
                raise DomainError(f"column {name} has {len(col)} values for {len(self.axis)} grid points")

    def add(self, name, values):
        values = list(values)
        if len(values) != len(self.axis):
            raise DomainError(f"column {name} has {len(values)} values for {len(self.axis)} grid points")
        self.columns[str(name)] = values

    def rows(self):
        names = list(self.columns)
        for i, x in enumerate(self.axis):
            yield [x] + [self.columns[k][i] for k in names]

    def to_csv(self, header=None):
        buf = io.StringIO()
        if header:
            buf.write(header.rstrip("\n") + "\n")
        for key, value in self.metadata.items():
            buf.write(f"# {key}={value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.axis_name] + list(self.columns))
        for row in self.rows():
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()


def bound_sweep(s, grid, names, m=1, eps=1.0):
    """Probability of each bound at each ``t``; undefined cells are ``None``."""
    table = SweepTable("t", list(grid), metadata=_spectral_metadata(s))
    for name in names:
        name = BoundName(name)
        col = []
        for t in grid:
            if not is_applicable(s, name, t):
                col.append(None)
                continue
            col.append(evaluate(s, t, name, m=m, eps=eps).probability)
        table.add(name.value, col)
    return table


def relaxed_sweep(n, r_grid, names):
    """Bounds depending on ``n`` and ``r = t / ||A||`` only (``||A|| = 1``)."""
    table = SweepTable("r", list(r_grid), metadata={"n": n})
    for name in names:
        name = BoundName(name)
        if name not in DIMENSION_ONLY:
            dim_only = ", ".join(sorted(b.value for b in DIMENSION_ONLY))
            raise DomainError(f"{name} needs a matrix; without one choose from {dim_only}")
        col = []
        for r in r_grid:
            if name is BoundName.LARGE_DEVIATION and 1.0 + r < n:
                col.append(None)
                continue
            col.append(DIMENSION_ONLY[name](n, 1.0, r).probability)
        table.add(name.value, col)
    return table


@dataclass(frozen=True)
class MSweepRow:
    t: float
    exponents: tuple
    m_opt: int


def m_sweep(s, grid, m_max):
    """``inf_b Lambda_m(t, b)`` for ``m = 1..m_max`` at every ``t``, and the
    minimizing ``m``."""
    if not isinstance(m_max, int) or not (1 <= m_max <= 200):
        raise DomainError(f"m_max must be an integer in [1, 200], got {m_max!r}")
    rows = []
    for t in grid:
        values = tuple(lambda_m_bound(s, t, m).log_value for m in range(1, m_max + 1))
        rows.append(MSweepRow(t, values, 1 + int(np.argmin(values))))
    return rows


def m_transition(rows):
    """Last ``t`` whose optimum is ``m = 1`` and the first after it that is not."""
    last_one = None
    for prev, row in zip(rows, rows[1:]):
        if prev.m_opt == 1 and row.m_opt != 1:
            last_one = (prev.t, row.t)
    return last_one


def _spectral_metadata(s):
    return {"n": s.n, "alpha": fmt(s.alpha), "beta": fmt(s.beta), "gamma": fmt(s.gamma)}
