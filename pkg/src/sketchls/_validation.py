import numpy as np

from .exceptions import InvalidInputError


def as_matrix(M, name="M"):
    """Return a finite float64 2-d array, promoting 1-d input to a column."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return A


def as_vector(v, name="v"):
    a = np.asarray(v, dtype=np.float64)
    if a.ndim == 2 and 1 in a.shape:
        a = a.ravel()
    if a.ndim != 1:
        raise InvalidInputError(f"{name} must be 1-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def check_count(value, name, minimum=1):
    if isinstance(value, (bool, np.bool_)) or int(value) != value:
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise InvalidInputError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_probability_vector(q, name="probs", atol=1e-10):
    q = as_vector(q, name)
    if np.any(q < 0):
        raise InvalidInputError(f"{name} has negative entries")
    total = q.sum()
    if abs(total - 1.0) > atol:
        raise InvalidInputError(f"{name} must sum to 1 (got {total!r})")
    return q
