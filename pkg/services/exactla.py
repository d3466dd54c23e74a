"""Exact linear algebra over prime fields F_p.

Matrices are dense int64 numpy arrays whose entries are kept reduced mod p.
The modulus stays below 2**31, so a product of two entries fits in a signed
64-bit word and elimination can update whole blocks with outer products.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy

logger = logging.getLogger(__name__)

MAX_MODULUS = 2**31
_WORD_LIMIT = 2**63 - 1


class FieldError(Exception):
    """Raised when a modulus is not a word-sized prime."""


@dataclass(frozen=True)
class PrimeField:
    """The prime field F_p."""

    p: int

    def __post_init__(self) -> None:
        p = self.p
        if isinstance(p, bool) or not isinstance(p, (int, np.integer)):
            raise FieldError(f"Modulus must be an integer, got {p!r}")
        p = int(p)
        if p < 2 or p >= MAX_MODULUS:
            raise FieldError(f"Modulus {p} is outside [2, 2**31)")
        if not sympy.isprime(p):
            raise FieldError(f"Modulus {p} is not prime")
        object.__setattr__(self, "p", p)

    def reduce(self, values: object) -> np.ndarray:
        """Return values as an int64 array with entries in [0, p)."""
        arr = np.asarray(values)
        if arr.dtype == object:
            return (arr % self.p).astype(np.int64)
        return np.mod(arr.astype(np.int64), self.p)

    def inverse(self, x: int) -> int:
        x = int(x) % self.p
        if x == 0:
            raise ZeroDivisionError("0 has no inverse in F_p")
        return pow(x, self.p - 2, self.p)


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Product of two reduced int64 arrays mod p without int64 overflow."""
    inner = a.shape[1]
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if inner == 0:
        return out
    # partial sums of `chunk` products plus the running residue stay below 2**63
    chunk = max(1, (_WORD_LIMIT - p) // ((p - 1) ** 2 or 1))
    for start in range(0, inner, chunk):
        stop = min(start + chunk, inner)
        out = (out + a[:, start:stop] @ b[start:stop, :]) % p
    return out


@dataclass(frozen=True, eq=False)
class Matrix:
    """Dense matrix over a prime field, stored row-major."""

    field: PrimeField
    entries: np.ndarray

    def __post_init__(self) -> None:
        arr = self.field.reduce(self.entries)
        if arr.ndim != 2:
            raise ValueError(f"Matrix entries must be 2-dimensional, got shape {arr.shape}")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_rows(
        cls, field: PrimeField, rows: Sequence[Sequence[int]], cols: Optional[int] = None
    ) -> "Matrix":
        if len(rows) == 0:
            return cls.zeros(field, 0, cols or 0)
        return cls(field, np.array([list(r) for r in rows], dtype=object))

    @classmethod
    def zeros(cls, field: PrimeField, rows: int, cols: int) -> "Matrix":
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: PrimeField, n: int) -> "Matrix":
        return cls(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return int(self.entries.shape[0])

    @property
    def cols(self) -> int:
        return int(self.entries.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def modulus(self) -> int:
        return self.field.p

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.entries.T.copy())

    def vstack(self, *others: "Matrix") -> "Matrix":
        blocks = [self.entries] + [o.entries for o in others]
        return Matrix(self.field, np.vstack(blocks))

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"Cannot multiply {self.shape} by {other.shape}")
        return Matrix(self.field, matmul_mod(self.entries, other.entries, self.field.p))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        return self.matmul(other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Matrix):
            return NotImplemented
        return self.field == other.field and np.array_equal(self.entries, other.entries)

    def tolist(self) -> List[List[int]]:
        return self.entries.tolist()


def _echelon(entries: np.ndarray, p: int, reduced: bool) -> Tuple[np.ndarray, List[int]]:
    """Gaussian elimination; returns the nonzero echelon rows and pivot columns."""
    a = np.array(entries, dtype=np.int64, copy=True)
    n_rows, n_cols = a.shape
    pivots: List[int] = []
    row = 0
    for col in range(n_cols):
        if row == n_rows:
            break
        nonzero = np.flatnonzero(a[row:, col])
        if nonzero.size == 0:
            continue
        pivot_row = row + int(nonzero[0])
        if pivot_row != row:
            a[[row, pivot_row]] = a[[pivot_row, row]]
        inverse = pow(int(a[row, col]), p - 2, p)
        a[row, col:] = (a[row, col:] * inverse) % p
        if reduced:
            targets = np.flatnonzero(a[:, col])
            targets = targets[targets != row]
        else:
            targets = row + 1 + np.flatnonzero(a[row + 1:, col])
        if targets.size:
            factors = a[targets, col]
            a[targets, col:] = (a[targets, col:] - np.outer(factors, a[row, col:])) % p
        pivots.append(col)
        row += 1
    return a[:row], pivots


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of F_p^n held by its reduced row-echelon basis."""

    ambient_dim: int
    basis: Matrix
    pivots: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.basis.rows

    @property
    def field(self) -> PrimeField:
        return self.basis.field

    @classmethod
    def zero(cls, field: PrimeField, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, Matrix.zeros(field, 0, ambient_dim), ())

    @classmethod
    def full(cls, field: PrimeField, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, Matrix.identity(field, ambient_dim), tuple(range(ambient_dim)))

    def coordinates(self, vectors: np.ndarray) -> np.ndarray:
        """Coordinates of row vectors lying in the subspace, w.r.t. the basis.

        The basis is in RREF, so the coordinates are the values at the pivots.
        """
        vectors = self.field.reduce(vectors)
        return vectors[:, list(self.pivots)]

    def contains(self, vectors: np.ndarray) -> bool:
        vectors = self.field.reduce(np.atleast_2d(vectors))
        rebuilt = matmul_mod(self.coordinates(vectors), self.basis.entries, self.field.p)
        return bool(np.array_equal(rebuilt, vectors))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis


def rank(m: Matrix) -> int:
    """F_p-rank of m."""
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = _echelon(m.entries, m.field.p, reduced=False)
    return len(pivots)


def row_space(m: Matrix) -> Subspace:
    """RREF basis of the row space of m."""
    if m.rows == 0 or m.cols == 0:
        return Subspace.zero(m.field, m.cols)
    echelon, pivots = _echelon(m.entries, m.field.p, reduced=True)
    return Subspace(m.cols, Matrix(m.field, echelon), tuple(pivots))


def kernel_basis(m: Matrix) -> Subspace:
    """Basis of {v : m v = 0}."""
    p = m.field.p
    if m.rows == 0:
        return Subspace.full(m.field, m.cols)
    echelon, pivots = _echelon(m.entries, p, reduced=True)
    pivot_set = set(pivots)
    free = [c for c in range(m.cols) if c not in pivot_set]
    if not free:
        return Subspace.zero(m.field, m.cols)
    basis = np.zeros((len(free), m.cols), dtype=np.int64)
    basis[np.arange(len(free)), free] = 1
    if pivots:
        basis[:, pivots] = (-echelon[:, free].T) % p
    return row_space(Matrix(m.field, basis))


def span(field: PrimeField, ambient_dim: int, blocks: Iterable[np.ndarray]) -> Subspace:
    """Row space of the vertical stack of several blocks of row vectors."""
    stacked = [b for b in blocks if b.shape[0] > 0]
    if not stacked:
        return Subspace.zero(field, ambient_dim)
    return row_space(Matrix(field, np.vstack(stacked)))
