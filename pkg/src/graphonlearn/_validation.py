"""Input validation helpers used by the estimators and the functional API."""

import numpy as np

from .errors import DomainError


def as_float_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def check_unit_interval(x, name="x"):
    """Return ``x`` as a float array after verifying all values lie in [0, 1]."""
    arr = as_float_array(x, name=name)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        bad = arr[(arr < 0.0) | (arr > 1.0)]
        raise DomainError(
            f"{name} must lie in [0, 1]; found values such as {bad.flat[0]!r}"
        )
    return arr


def check_trajectory(x, name="trajectory"):
    """Validate a 1-D state sequence in [0, 1] with at least two entries."""
    arr = check_unit_interval(x, name=name)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < 2:
        raise DomainError(f"{name} needs at least two states, got {arr.size}")
    return arr


def midpoints(n):
    """Midpoints of the uniform partition of [0, 1] into ``n`` cells."""
    return (np.arange(n) + 0.5) / n
