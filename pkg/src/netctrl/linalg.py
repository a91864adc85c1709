"""Exact rational matrices plus the float kernels used for spectra and Gramians.

Every controllability rank in the package is decided here with exact
arithmetic.  Floats only appear in :func:`float_rank`, :func:`eigenvalues`
and :func:`expm`, whose inputs are plain ``numpy`` arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.linalg


class DimensionError(ValueError):
    """Raised when matrix shapes do not fit together."""


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction, finite float or numeric string to a Fraction.

    Strings may be integers, ``p/q`` rationals or finite decimals; they are
    converted exactly.  Floats go through their shortest decimal repr so that
    ``0.1`` becomes ``1/10`` rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not matrix entries")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite entry {value!r}")
        return Fraction(repr(float(value)))
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    if isinstance(value, str):
        text = value.strip()
        try:
            out = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
        return out
    raise TypeError(f"cannot convert {type(value).__name__} to Fraction")


class RatMatrix:
    """Immutable dense matrix of :class:`fractions.Fraction` entries (row-major)."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: int, cols: int, entries: Iterable = ()):
        if rows < 0 or cols < 0:
            raise DimensionError("negative dimension")
        data = tuple(to_fraction(x) for x in entries)
        if not data and rows * cols:
            data = (Fraction(0),) * (rows * cols)
        if len(data) != rows * cols:
            raise DimensionError(
                f"expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(data)}"
            )
        self.rows = rows
        self.cols = cols
        self._data = data

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RatMatrix":
        rows = [list(r) for r in rows]
        if not rows:
            return cls(0, 0)
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        return cls(len(rows), ncols, (x for r in rows for x in r))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        one, zero = Fraction(1), Fraction(0)
        return cls(n, n, (one if i == j else zero for i in range(n) for j in range(n)))

    @classmethod
    def from_numpy(cls, arr) -> "RatMatrix":
        arr = np.atleast_2d(np.asarray(arr))
        return cls(arr.shape[0], arr.shape[1], (to_fraction(x.item()) for x in arr.ravel()))

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def entries(self) -> tuple[Fraction, ...]:
        return self._data

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(ij)
        return self._data[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self._data[i * self.cols:(i + 1) * self.cols]

    def col(self, j: int) -> tuple[Fraction, ...]:
        return self._data[j::self.cols] if self.cols else ()

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def iter_rows(self) -> Iterator[tuple[Fraction, ...]]:
        for i in range(self.rows):
            yield self.row(i)

    @property
    def T(self) -> "RatMatrix":
        return RatMatrix(self.cols, self.rows,
                         (self._data[i * self.cols + j] for j in range(self.cols) for i in range(self.rows)))

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int] | None = None) -> "RatMatrix":
        if col_idx is None:
            col_idx = range(self.cols)
        col_idx = list(col_idx)
        return RatMatrix(len(row_idx), len(col_idx),
                         (self._data[i * self.cols + j] for i in row_idx for j in col_idx))

    def is_zero(self) -> bool:
        return not any(self._data)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(x) for x in self._data], dtype=float).reshape(self.rows, self.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatMatrix):
            return NotImplemented
        return self.shape == other.shape and self._data == other._data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self._data))

    def __repr__(self) -> str:
        body = "; ".join(" ".join(str(x) for x in r) for r in self.iter_rows())
        return f"RatMatrix({self.rows}x{self.cols}: [{body}])"

    def _check_same_shape(self, other: "RatMatrix") -> None:
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other)
        return RatMatrix(self.rows, self.cols, (a + b for a, b in zip(self._data, other._data)))

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        self._check_same_shape(other)
        return RatMatrix(self.rows, self.cols, (a - b for a, b in zip(self._data, other._data)))

    def __neg__(self) -> "RatMatrix":
        return RatMatrix(self.rows, self.cols, (-a for a in self._data))

    def scale(self, k) -> "RatMatrix":
        k = to_fraction(k)
        return RatMatrix(self.rows, self.cols, (k * a for a in self._data))

    def __rmul__(self, k) -> "RatMatrix":
        return self.scale(k)

    def __matmul__(self, other: "RatMatrix") -> "RatMatrix":
        return mat_mul(self, other)

    def __pow__(self, k: int) -> "RatMatrix":
        if self.rows != self.cols:
            raise DimensionError("power of a non-square matrix")
        if k < 0:
            raise ValueError("negative power")
        out = RatMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            k >>= 1
            if k:
                base = base @ base
        return out


def hstack(blocks: Sequence[RatMatrix]) -> RatMatrix:
    blocks = list(blocks)
    if not blocks:
        raise ValueError("nothing to stack")
    rows = blocks[0].rows
    if any(b.rows != rows for b in blocks):
        raise DimensionError("hstack row mismatch")
    cols = sum(b.cols for b in blocks)
    return RatMatrix(rows, cols, (x for i in range(rows) for b in blocks for x in b.row(i)))


def vstack(blocks: Sequence[RatMatrix]) -> RatMatrix:
    blocks = list(blocks)
    if not blocks:
        raise ValueError("nothing to stack")
    cols = blocks[0].cols
    if any(b.cols != cols for b in blocks):
        raise DimensionError("vstack column mismatch")
    return RatMatrix(sum(b.rows for b in blocks), cols, (x for b in blocks for x in b.entries))


def block(grid: Sequence[Sequence[RatMatrix]]) -> RatMatrix:
    return vstack([hstack(row) for row in grid])


def mat_mul(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Exact product ``a @ b``; zero entries of ``a`` are skipped."""
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    n, m = a.cols, b.cols
    zero = Fraction(0)
    brows = [b.row(k) for k in range(n)]
    out = []
    for i in range(a.rows):
        acc = [zero] * m
        for k, aik in enumerate(a.row(i)):
            if aik:
                bk = brows[k]
                for j in range(m):
                    if bk[j]:
                        acc[j] += aik * bk[j]
        out.extend(acc)
    return RatMatrix(a.rows, m, out)


def kron(a: RatMatrix, b: RatMatrix) -> RatMatrix:
    """Kronecker product; entry ``(i*b.rows + k, j*b.cols + l)`` is ``a[i,j]*b[k,l]``."""
    rows, cols = a.rows * b.rows, a.cols * b.cols
    data = []
    for i in range(a.rows):
        arow = a.row(i)
        for k in range(b.rows):
            brow = b.row(k)
            for aij in arow:
                data.extend(aij * bkl for bkl in brow)
    return RatMatrix(rows, cols, data)


def _integer_rows(m: RatMatrix) -> list[list[int]]:
    out = []
    for r in m.iter_rows():
        scale = 1
        for x in r:
            scale = scale * x.denominator // math.gcd(scale, x.denominator)
        out.append([int(x * scale) for x in r])
    return out


def rat_rank(m: RatMatrix) -> int:
    """Exact rank by fraction-free (Bareiss) elimination with full pivoting.

    Rows are first cleared of denominators, which does not change the rank.
    Each step picks the largest-magnitude entry of the trailing block as pivot;
    all Bareiss divisions are exact integer divisions.
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    a = _integer_rows(m)
    nr, nc = m.rows, m.cols
    prev = 1
    rank = 0
    for r in range(min(nr, nc)):
        best, pi, pj = 0, -1, -1
        for i in range(r, nr):
            row = a[i]
            for j in range(r, nc):
                v = abs(row[j])
                if v > best:
                    best, pi, pj = v, i, j
        if best == 0:
            break
        if pi != r:
            a[r], a[pi] = a[pi], a[r]
        if pj != r:
            for row in a:
                row[r], row[pj] = row[pj], row[r]
        piv = a[r][r]
        prow = a[r]
        for i in range(r + 1, nr):
            row = a[i]
            f = row[r]
            for j in range(r + 1, nc):
                row[j] = (row[j] * piv - f * prow[j]) // prev
            row[r] = 0
        prev = piv
        rank += 1
    return rank


def rat_inverse(m: RatMatrix) -> RatMatrix:
    """Exact inverse by Gauss-Jordan elimination; raises ``ValueError`` if singular."""
    if m.rows != m.cols:
        raise DimensionError("inverse of a non-square matrix")
    n = m.rows
    one, zero = Fraction(1), Fraction(0)
    aug = [list(m.row(i)) + [one if i == j else zero for j in range(n)] for i in range(n)]
    for c in range(n):
        p = next((i for i in range(c, n) if aug[i][c]), None)
        if p is None:
            raise ValueError("matrix is singular")
        aug[c], aug[p] = aug[p], aug[c]
        inv = 1 / aug[c][c]
        aug[c] = [x * inv for x in aug[c]]
        for i in range(n):
            f = aug[i][c]
            if i != c and f:
                ri, rc = aug[i], aug[c]
                aug[i] = [x - f * y for x, y in zip(ri, rc)]
    return RatMatrix(n, n, (x for row in aug for x in row[n:]))


def rat_nullspace(m: RatMatrix) -> list[list[Fraction]]:
    """Exact basis of the right null space of ``m`` (reduced row echelon form)."""
    rows = [list(r) for r in m.iter_rows()]
    nc = m.cols
    pivots: list[int] = []
    r = 0
    for c in range(nc):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            f = rows[i][c]
            if i != r and f:
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * nc
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -rows[i][fc]
        basis.append(v)
    return basis


class RowEchelon:
    """Incremental echelon basis over the rationals.

    ``add`` reports whether a vector is independent of everything added so far
    and, if so, keeps it.  Used to pick the first independent columns of a
    controllability matrix and to search independent row subsets.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._basis: list[tuple[int, list[Fraction]]] = []

    def __len__(self) -> int:
        return len(self._basis)

    def copy(self) -> "RowEchelon":
        out = RowEchelon(self.dim)
        out._basis = list(self._basis)
        return out

    def reduce(self, vec: Sequence) -> list[Fraction]:
        v = [to_fraction(x) for x in vec]
        if len(v) != self.dim:
            raise DimensionError("vector length mismatch")
        for pivot, brow in self._basis:
            f = v[pivot]
            if f:
                v = [x - f * y for x, y in zip(v, brow)]
        return v

    def add(self, vec: Sequence) -> bool:
        v = self.reduce(vec)
        pivot = next((i for i, x in enumerate(v) if x), None)
        if pivot is None:
            return False
        inv = 1 / v[pivot]
        v = [x * inv for x in v]
        self._basis.append((pivot, v))
        return True


def float_rank(m, tol: float | None = None) -> int:
    """Numerical rank: singular values above ``tol * sigma_max``.

    The default relative tolerance is ``max(rows, cols) * eps``.
    """
    a = np.atleast_2d(np.asarray(m))
    if a.size == 0:
        return 0
    if tol is not None and tol <= 0:
        raise ValueError("tol must be positive")
    if tol is None:
        tol = max(a.shape) * np.finfo(float).eps
    s = np.linalg.svd(a, compute_uv=False)
    smax = s[0]
    if smax == 0:
        return 0
    return int(np.count_nonzero(s > tol * smax))


def as_float_matrix(m) -> np.ndarray:
    """Float (or complex) 2-D array view of a RatMatrix or array-like; rejects NaN."""
    if isinstance(m, RatMatrix):
        return m.to_numpy()
    a = np.atleast_2d(np.asarray(m))
    if not np.iscomplexobj(a):
        a = a.astype(float)
    if np.isnan(a).any():
        raise ValueError("NaN entry in float matrix")
    return a


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues (with multiplicity) as a complex array, unordered."""
    a = as_float_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("eigenvalues of a non-square matrix")
    return np.linalg.eigvals(a).astype(complex)


def expm(m) -> np.ndarray:
    """Matrix exponential (scaling and squaring with a Pade approximant)."""
    a = as_float_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError("expm of a non-square matrix")
    with np.errstate(over="raise", invalid="raise"):
        try:
            out = scipy.linalg.expm(a)
        except FloatingPointError as exc:
            raise OverflowError("matrix exponential overflowed") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError("matrix exponential overflowed")
    return out


@dataclass(frozen=True)
class ZeroPattern:
    """Three row groups, three column groups and the blocks forced to zero.

    Groups are index tuples, so a pattern may describe a matrix whose
    rows/columns would have to be permuted to show contiguous blocks.
    """

    row_groups: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    col_groups: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    zero_blocks: frozenset[tuple[int, int]]

    @classmethod
    def s_form(cls, groups: Sequence[Iterable[int]]) -> "ZeroPattern":
        """The square ``[[*,0,*],[*,*,*],[*,0,*]]`` pattern on one set of groups."""
        g = tuple(tuple(x) for x in groups)
        if len(g) != 3:
            raise ValueError("an S pattern has exactly three groups")
        return cls(g, g, frozenset({(0, 1), (2, 1)}))

    @classmethod
    def s_form_sizes(cls, s: int, c: int, d: int) -> "ZeroPattern":
        return cls.s_form((range(0, s), range(s, s + c), range(s + c, s + c + d)))


def _check_groups(groups, n: int, what: str) -> None:
    seen = sorted(i for g in groups for i in g)
    if seen != list(range(n)):
        raise DimensionError(f"{what} groups do not partition range({n})")


def conforms_to_pattern(m: RatMatrix, p: ZeroPattern) -> bool:
    """True iff every entry inside a declared zero block of ``m`` is exactly 0."""
    _check_groups(p.row_groups, m.rows, "row")
    _check_groups(p.col_groups, m.cols, "column")
    for rg, cg in p.zero_blocks:
        for i in p.row_groups[rg]:
            for j in p.col_groups[cg]:
                if m[i, j]:
                    return False
    return True
