"""Default numerical tolerances, overridable per context."""

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    root: float = 1e-12
    minimize: float = 1e-10
    series: float = 1e-15


DEFAULT_TOLERANCES = Tolerances()

_current = ContextVar("quadchaos_tolerances", default=DEFAULT_TOLERANCES)


def tolerances():
    """Return the tolerances active in the current context."""
    return _current.get()


@contextmanager
def use_tolerances(**overrides):
    """Temporarily override tolerances, e.g. ``use_tolerances(root=1e-10)``."""
    token = _current.set(replace(_current.get(), **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)
