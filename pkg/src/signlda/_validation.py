"""Input validation helpers.

All public entry points funnel array arguments through these functions so
error messages stay uniform and downstream code can assume float64 arrays
with finite entries.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray


def as_matrix(x: ArrayLike, name: str = "X", min_rows: int = 1) -> NDArray[np.float64]:
    """Coerce to a 2-D float64 array with finite entries.

    Args:
        x: Array-like of shape (n, p).
        name: Argument name used in error messages.
        min_rows: Minimum acceptable number of rows.

    Returns:
        A float64 ndarray of shape (n, p).

    Raises:
        ValueError: If the input is not 2-D, has fewer than ``min_rows``
            rows, zero columns, or contains non-finite entries.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} row(s), got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise ValueError(f"{name} must have at least one column")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_vector(x: ArrayLike, name: str = "v") -> NDArray[np.float64]:
    """Coerce to a 1-D float64 array with finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if arr.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(x: ArrayLike, name: str = "S") -> NDArray[np.float64]:
    """Coerce to a square 2-D float64 array with finite entries."""
    arr = as_matrix(x, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_same_width(a: NDArray[np.float64], b: NDArray[np.float64],
                     name_a: str = "X1", name_b: str = "X2") -> int:
    """Assert that two matrices share a column count and return it."""
    if a.shape[1] != b.shape[1]:
        raise ValueError(
            f"{name_a} and {name_b} disagree on dimension: "
            f"{a.shape[1]} vs {b.shape[1]}"
        )
    return a.shape[1]


def check_labels(y: ArrayLike, name: str = "y") -> NDArray[np.int64]:
    """Validate a label vector whose entries must all be 1 or 2."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={arr.ndim}")
    as_float = np.asarray(arr, dtype=np.float64)
    if not np.all(np.isfinite(as_float)):
        raise ValueError(f"{name} contains non-finite entries")
    as_int = as_float.astype(np.int64)
    if not np.all(as_float == as_int):
        raise ValueError(f"{name} labels must be integers 1 or 2")
    bad = ~np.isin(as_int, (1, 2))
    if np.any(bad):
        first = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"{name} labels must be 1 or 2, found {arr[first]!r} at position {first}"
        )
    return as_int


def check_positive_scalar(value: float, name: str, allow_zero: bool = False) -> float:
    """Validate a finite scalar that must be positive (or non-negative)."""
    val = float(value)
    if not np.isfinite(val):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if allow_zero:
        if val < 0:
            raise ValueError(f"{name} must be >= 0, got {val}")
    elif val <= 0:
        raise ValueError(f"{name} must be > 0, got {val}")
    return val
