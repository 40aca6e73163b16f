"""Input validation helpers shared by the library and the CLI."""

import numbers

import numpy as np

UNITARY_ATOL = 1e-8


class NotUnitaryError(ValueError):
    """Raised when a matrix fails the unitarity check."""

    def __init__(self, deviation, atol=UNITARY_ATOL):
        self.deviation = float(deviation)
        self.atol = atol
        super().__init__(
            f"matrix is not unitary: max |U^dag U - I| = {self.deviation:.3e} "
            f"(tolerance {atol:.0e})"
        )


def unitarity_deviation(u):
    """Max-norm distance between ``u^dag u`` and the identity."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))


def check_matrix(a, name="matrix"):
    """Return ``a`` as a finite 2-D complex128 array."""
    arr = np.asarray(a)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def check_unitary(u, atol=UNITARY_ATOL, min_dim=1):
    """Validate a square unitary and return it as complex128.

    Raises :class:`NotUnitaryError` carrying the offending deviation.
    """
    arr = check_matrix(u, "unitary")
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"unitary must be square, got shape {arr.shape}")
    if arr.shape[0] < min_dim:
        raise ValueError(f"unitary dimension must be >= {min_dim}, got {arr.shape[0]}")
    dev = unitarity_deviation(arr)
    if not dev < atol:
        raise NotUnitaryError(dev, atol)
    return arr


def check_same_shape(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def check_permutation(p, n=None, name="permutation"):
    """Return ``p`` as an int64 array after checking it is a bijection on 0..n-1."""
    arr = np.asarray(p)
    if arr.ndim != 1 or not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"{name} must be a 1-D integer array")
    if n is not None and arr.size != n:
        raise ValueError(f"{name} has length {arr.size}, expected {n}")
    if not np.array_equal(np.sort(arr), np.arange(arr.size)):
        raise ValueError(f"{name} is not a bijection on 0..{arr.size - 1}")
    return arr.astype(np.int64)


def check_tau(tau):
    if not isinstance(tau, numbers.Real) or not 0.0 < float(tau) < 1.0:
        raise ValueError(f"tau must lie strictly between 0 and 1, got {tau!r}")
    return float(tau)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_int_list(values, name, minimum=1):
    vals = [check_positive_int(v, name, minimum) for v in values]
    if not vals:
        raise ValueError(f"{name} must not be empty")
    return vals
