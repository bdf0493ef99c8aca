"""Dense complex matrix kernel.

Matrices are plain 2-D ``numpy`` arrays of dtype ``complex128``.  The
functions here add the shape checks, singularity diagnostics and block
addressing the rest of the package relies on.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, SingularMatrixError, ValidationError

EPS = np.finfo(float).eps
# pivot threshold is PIVOT_FACTOR * eps * max|a_ij|
PIVOT_FACTOR = 1e3


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite 2-D complex array."""
    m = np.asarray(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=complex)


def max_norm(a) -> float:
    """Entrywise max-norm."""
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def rel_deviation(a, b) -> float:
    """Max-norm of ``a - b`` relative to ``1 + max |entry|`` of either."""
    scale = 1.0 + max(max_norm(a), max_norm(b))
    return max_norm(np.asarray(a) - np.asarray(b)) / scale


def mat_mul(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


@dataclass(frozen=True)
class LUResult:
    lu: np.ndarray
    piv: np.ndarray
    norm_max: float


def lu_factor(a, scale: float | None = None) -> LUResult:
    """LU with partial pivoting; raises :class:`SingularMatrixError` on a tiny pivot.

    The pivot threshold is relative to ``max(|a|_max, scale)``.  Pass ``scale``
    when ``a`` is a sum of larger terms that may cancel, so that a cancelled
    result is recognised as singular.
    """
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"LU needs a square matrix, got {a.shape}")
    norm = max_norm(a)
    threshold = PIVOT_FACTOR * EPS * max(norm, scale or 0.0)
    if norm == 0.0:
        raise SingularMatrixError(0, 0.0, threshold)
    with warnings.catch_warnings():
        # exact zero pivots are reported below with better diagnostics
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    bad = np.flatnonzero(pivots < threshold)
    if bad.size:
        k = int(bad[0])
        raise SingularMatrixError(k, float(pivots[k]), threshold)
    return LUResult(lu, piv, norm)


def lu_solve(f: LUResult, b) -> np.ndarray:
    return scipy.linalg.lu_solve((f.lu, f.piv), np.asarray(b, dtype=complex), check_finite=False)


def mat_inv_cond(a) -> tuple[np.ndarray, float]:
    """Inverse of ``a`` together with its 1-norm condition number."""
    a = as_matrix(a)
    f = lu_factor(a)
    inv = lu_solve(f, np.eye(a.shape[0], dtype=complex))
    cond = float(np.linalg.norm(a, 1) * np.linalg.norm(inv, 1))
    return inv, cond


def mat_inv(a) -> np.ndarray:
    return mat_inv_cond(a)[0]


def solve(a, b, scale: float | None = None) -> np.ndarray:
    """``a^{-1} b`` through the checked LU."""
    return lu_solve(lu_factor(a, scale), b)


@dataclass(frozen=True)
class BlockLayout:
    """Square-block layout of a ``(block_rows*size) x (block_cols*size)`` matrix."""

    block_rows: int
    block_cols: int
    block_size: int

    def __post_init__(self):
        for name in ("block_rows", "block_cols", "block_size"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"{name} must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return self.block_rows * self.block_size, self.block_cols * self.block_size

    def _slices(self, i: int, j: int) -> tuple[slice, slice]:
        if not (0 <= i < self.block_rows and 0 <= j < self.block_cols):
            raise IndexError(f"block ({i}, {j}) outside {self.block_rows}x{self.block_cols} layout")
        s = self.block_size
        return slice(i * s, (i + 1) * s), slice(j * s, (j + 1) * s)


def _check_layout(m: np.ndarray, layout: BlockLayout):
    if m.shape != layout.shape:
        raise DimensionError(f"matrix shape {m.shape} does not match layout {layout.shape}")


def block_get(m, layout: BlockLayout, i: int, j: int) -> np.ndarray:
    m = np.asarray(m)
    _check_layout(m, layout)
    rs, cs = layout._slices(i, j)
    return m[rs, cs].copy()


def block_set(m, layout: BlockLayout, i: int, j: int, block) -> np.ndarray:
    """Return a copy of ``m`` with block ``(i, j)`` replaced."""
    m = np.array(m, dtype=complex)
    _check_layout(m, layout)
    block = np.asarray(block, dtype=complex)
    if block.shape != (layout.block_size, layout.block_size):
        raise DimensionError(f"block shape {block.shape} != {layout.block_size}")
    rs, cs = layout._slices(i, j)
    m[rs, cs] = block
    return m


def assemble(blocks) -> np.ndarray:
    """Build a matrix from a nested list (or 4-D array) of equal square blocks."""
    return np.block([[np.asarray(b, dtype=complex) for b in row] for row in blocks])


def block_diag(blocks) -> np.ndarray:
    return scipy.linalg.block_diag(*[np.asarray(b, dtype=complex) for b in blocks])


def scalar_block_diag(scalars, size: int) -> np.ndarray:
    """``diag(s_1 I, ..., s_r I)`` with ``size x size`` identity blocks."""
    return np.kron(np.diag(np.asarray(scalars, dtype=complex)), np.eye(size))
