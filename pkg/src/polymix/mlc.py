"""Matrices with labeled columns.

An ``Mlc`` is a real matrix whose columns are keyed by symbol identifiers.
Sums and concatenations align columns by label instead of by position, which
is exactly the bookkeeping needed to add generator matrices of symbolic sets
without losing dependencies: the column labeled ``i`` of ``a + b`` is the
vector sum of the ``i`` columns of the operands, treating a missing column
as zero.

Canonical form: labels strictly increasing, no exactly-zero column.  On that
form label-aligned addition is commutative and associative structurally, not
just semantically.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError

__all__ = ["Mlc", "mlc_add", "mlc_vcat", "mlc_scale"]


class Mlc:
    """A real matrix with distinct, sorted column labels."""

    __slots__ = ("matrix", "labels")

    def __init__(self, matrix, labels):
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        labels = np.asarray(labels, dtype=np.int64).ravel()
        if matrix.ndim != 2:
            raise DimensionError("matrix must be 2-D")
        if matrix.shape[1] != labels.size:
            raise DimensionError(
                f"{matrix.shape[1]} columns but {labels.size} labels"
            )
        if labels.size != np.unique(labels).size:
            raise DimensionError("labels must be pairwise distinct")
        order = np.argsort(labels, kind="stable")
        matrix = matrix[:, order]
        labels = labels[order]
        keep = (matrix != 0.0).any(axis=0)
        self.matrix = np.ascontiguousarray(matrix[:, keep])
        self.labels = labels[keep]

    @classmethod
    def empty(cls, rows: int) -> "Mlc":
        return cls(np.zeros((rows, 0)), np.zeros(0, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def width(self) -> int:
        return self.matrix.shape[1]

    def column(self, label: int) -> np.ndarray:
        """Column keyed by ``label``; zeros if the label is absent."""
        j = np.searchsorted(self.labels, label)
        if j < self.labels.size and self.labels[j] == label:
            return self.matrix[:, j].copy()
        return np.zeros(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mlc):
            return NotImplemented
        return (
            self.matrix.shape == other.matrix.shape
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.matrix, other.matrix)
        )

    def __add__(self, other: "Mlc") -> "Mlc":
        return mlc_add(self, other)

    def __repr__(self) -> str:
        return f"Mlc(rows={self.rows}, labels={self.labels.tolist()})"


def mlc_add(a: Mlc, b: Mlc) -> Mlc:
    """Label-aligned sum; absent columns count as zero, zero results drop."""
    if a.rows != b.rows:
        raise DimensionError(f"row counts differ: {a.rows} vs {b.rows}")
    labels = np.union1d(a.labels, b.labels)
    out = np.zeros((a.rows, labels.size))
    out[:, np.searchsorted(labels, a.labels)] = a.matrix
    out[:, np.searchsorted(labels, b.labels)] += b.matrix
    return Mlc(out, labels)


def mlc_vcat(a: Mlc, b: Mlc) -> Mlc:
    """Stack vertically, aligning shared labels and zero-padding the rest.

    Equivalent to ``[a; 0] + [0; b]`` with the zero blocks sized to match.
    """
    pad_a = Mlc(np.vstack([a.matrix, np.zeros((b.rows, a.width))]), a.labels)
    pad_b = Mlc(np.vstack([np.zeros((a.rows, b.width)), b.matrix]), b.labels)
    return mlc_add(pad_a, pad_b)


def mlc_scale(t, a: Mlc) -> Mlc:
    """Left-multiply the matrix part by ``t``, keeping labels."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if t.shape[1] != a.rows:
        raise DimensionError(
            f"matrix has {t.shape[1]} columns but operand has {a.rows} rows"
        )
    return Mlc(t @ a.matrix, a.labels)
