"""Input validation helpers shared by the solvers and estimators."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_nonnegative_matrix(X, name: str = "X", allow_all_zero: bool = False) -> np.ndarray:
    """Return ``X`` as a dense float64 2-D array, rejecting negative or non-finite input."""
    X = check_array(X, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                    ensure_min_features=1, input_name=name)
    if np.any(X < 0):
        raise ValueError(f"{name} must be non-negative")
    if not allow_all_zero and not np.any(X):
        raise ValueError(f"{name} is all zero")
    return X


def check_rank(rank) -> int:
    if isinstance(rank, bool) or not isinstance(rank, (int, np.integer)):
        raise TypeError(f"rank must be an integer, got {type(rank).__name__}")
    if rank < 1:
        raise ValueError(f"rank must be >= 1, got {rank}")
    return int(rank)


def check_same_columns(A: np.ndarray, B: np.ndarray, names=("X", "Y")) -> None:
    if A.shape[1] != B.shape[1]:
        raise ValueError(
            f"{names[0]} has {A.shape[1]} columns but {names[1]} has {B.shape[1]}"
        )


def check_positive(value, name: str) -> float:
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
