"""Small dense complex matrices and 2x2 block matrices over channels.

A channel matrix is a plain ``(n, n)`` complex numpy array.  Every function
here returns a fresh read-only array; inputs are never modified.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingularMatrix

DEFAULT_TOL = 1e-12


def frozen(a) -> np.ndarray:
    """Return a read-only complex copy of ``a``."""
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


def channel_matrix(value, n: int | None = None) -> np.ndarray:
    """Coerce a scalar or nested sequence into an ``(n, n)`` channel matrix.

    Scalars are promoted to ``value * identity(n)`` (``n`` defaults to 1).
    """
    a = np.asarray(value, dtype=complex)
    if a.ndim == 0:
        a = a * np.eye(n or 1, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"channel matrix must be square, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DimensionMismatch(f"expected {n} channels, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise ValueError("channel matrix entries must be finite")
    return frozen(a)


def identity(n: int) -> np.ndarray:
    return frozen(np.eye(n, dtype=complex))


def max_norm(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def invert(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Invert a square matrix by Gauss-Jordan elimination with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot falls below ``tol`` relative to
    the largest entry of ``a``, when the elimination growth factor exceeds
    ``1/tol``, or when the max-norm residual ``|A B - 1|`` exceeds
    ``tol * |A| * |B| * n``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"cannot invert array of shape {a.shape}")
    n = a.shape[0]
    scale = max_norm(a)
    if scale == 0.0 or not np.isfinite(scale):
        raise SingularMatrix("matrix is zero or non-finite", pivot=0.0)

    work = np.hstack([a, np.eye(n, dtype=complex)])
    smallest = np.inf
    for col in range(n):
        p = col + int(np.argmax(np.abs(work[col:, col])))
        pivot = work[p, col]
        smallest = min(smallest, abs(pivot))
        if abs(pivot) <= tol * scale:
            raise SingularMatrix(
                f"pivot {abs(pivot):.3e} below tolerance in column {col}", pivot=abs(pivot)
            )
        if p != col:
            work[[col, p]] = work[[p, col]]
        work[col] /= pivot
        others = np.arange(n) != col
        work[others] -= np.outer(work[others, col], work[col])
        growth = max_norm(work[:, :n]) / scale
        if growth * tol > 1.0:
            raise SingularMatrix(f"growth factor {growth:.3e} indicates rank deficiency",
                                 pivot=smallest)

    b = work[:, n:]
    residual = max_norm(a @ b - np.eye(n))
    if residual > tol * scale * max_norm(b) * n:
        raise SingularMatrix(f"inversion residual {residual:.3e} exceeds tolerance",
                             pivot=smallest)
    return frozen(b)


@dataclass(frozen=True, eq=False)
class Block2Matrix:
    """2x2 block matrix whose blocks are ``(n, n)`` channel matrices.

    Stored as a single ``(2n, 2n)`` array; ``b11`` .. ``b22`` are views.
    """

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] % 2:
            raise DimensionMismatch(f"block matrix needs an even square array, got {d.shape}")
        object.__setattr__(self, "data", frozen(d))

    @classmethod
    def from_blocks(cls, b11, b12, b21, b22) -> "Block2Matrix":
        blocks = [np.asarray(b, dtype=complex) for b in (b11, b12, b21, b22)]
        shapes = {b.shape for b in blocks}
        if len(shapes) != 1:
            raise DimensionMismatch(f"blocks have unequal shapes {sorted(shapes)}")
        return cls(np.block([[blocks[0], blocks[1]], [blocks[2], blocks[3]]]))

    @classmethod
    def identity(cls, n: int) -> "Block2Matrix":
        return cls(np.eye(2 * n, dtype=complex))

    @property
    def n(self) -> int:
        return self.data.shape[0] // 2

    @property
    def b11(self):
        return self.data[: self.n, : self.n]

    @property
    def b12(self):
        return self.data[: self.n, self.n :]

    @property
    def b21(self):
        return self.data[self.n :, : self.n]

    @property
    def b22(self):
        return self.data[self.n :, self.n :]

    def block(self, i: int, j: int) -> np.ndarray:
        return (self.b11, self.b12, self.b21, self.b22)[2 * (i - 1) + (j - 1)]

    @property
    def T(self) -> "Block2Matrix":
        """Full transpose: blocks are transposed and the off-diagonal pair swapped."""
        return Block2Matrix(self.data.T)

    def __matmul__(self, other: "Block2Matrix") -> "Block2Matrix":
        return block_mul(self, other)

    def allclose(self, other: "Block2Matrix", atol: float) -> bool:
        return self.n == other.n and max_norm(self.data - other.data) <= atol

    def __repr__(self):
        return f"Block2Matrix(n={self.n}, data={self.data!r})"


def block_mul(a: Block2Matrix, b: Block2Matrix) -> Block2Matrix:
    if a.n != b.n:
        raise DimensionMismatch(f"cannot multiply block matrices with n={a.n} and n={b.n}")
    return Block2Matrix(a.data @ b.data)


def condition_estimate(a) -> float:
    """Infinity-norm condition number (``inf`` when singular)."""
    return float(np.linalg.cond(np.asarray(a, dtype=complex), np.inf))
