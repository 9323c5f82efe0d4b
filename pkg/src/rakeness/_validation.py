"""Array validation helpers used at public entry points."""
import numpy as np

from ._config import TOL
from .exceptions import InvalidInputError


def as_finite_array(x, name="array", ndim=None, dtype=float):
    """Convert ``x`` to a float ndarray and reject NaN/inf entries."""
    arr = np.asarray(x, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def check_symmetric(m, name="matrix", tol=None):
    """Return ``m`` as a square float matrix, raising if it is not symmetric.

    Symmetry is tested relative to the largest entry; tiny asymmetries from
    round-off are removed by averaging with the transpose.
    """
    a = as_finite_array(m, name=name, ndim=2)
    if a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidInputError(f"{name} must be square and non-empty, got shape {a.shape}")
    tol = TOL.symmetry if tol is None else tol
    scale = max(float(np.abs(a).max()), 1.0)
    if np.abs(a - a.T).max() > tol * scale:
        raise InvalidInputError(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def check_vector(v, name="vector", min_len=1):
    arr = as_finite_array(v, name=name, ndim=1)
    if arr.size < min_len:
        raise InvalidInputError(f"{name} needs at least {min_len} entries")
    return arr


def check_descending(v, name="vector", tol=1e-12):
    arr = check_vector(v, name=name)
    if np.any(np.diff(arr) > tol * max(1.0, float(np.abs(arr).max()))):
        raise InvalidInputError(f"{name} must be sorted in non-increasing order")
    return arr
