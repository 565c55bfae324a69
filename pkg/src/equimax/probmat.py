"""Row-stochastic prediction matrices: validation, structure queries, enumeration.

A prediction matrix holds one probability row per sample and one column per
class.  This module owns that contract for the whole package: finite entries
in [0, 1], every row summing to 1, at least one row and two columns.  All
downstream code (losses, theorem checks, optimizers) assumes its inputs went
through :func:`validate` and never re-checks.

Matrices are plain float64 ``numpy`` arrays, returned read-only so validated
values can be shared freely between threads.
"""

from __future__ import annotations

import itertools
import math
from typing import IO, Iterator, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9
ENTRY_TOL = 1e-9
DEFAULT_ENUM_BUDGET = 10**7


class DimensionError(ValueError):
    """Input is ragged or has too few rows/columns to be a prediction matrix."""


class DomainError(ValueError):
    """Entries or row sums violate the probability-matrix contract."""


class BudgetError(RuntimeError):
    """An enumeration would produce more items than the configured budget."""


def validate(raw) -> np.ndarray:
    """Check ``raw`` against the prediction-matrix contract and return it.

    Values are preserved exactly; nothing is renormalized.  Use
    :func:`renormalize_rows` first if the input needs fixing.

    Raises
    ------
    DimensionError
        If the input is ragged, not 2-D, or smaller than 1 x 2.
    DomainError
        Naming the first offending row, if an entry leaves [0, 1] by more
        than 1e-9, a row sum deviates from 1 by more than 1e-9, or any
        entry is not finite.
    """
    try:
        mat = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionError(f"input is not a rectangular numeric matrix: {exc}") from None
    if mat.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got {mat.ndim} dimension(s)")
    n_rows, n_cols = mat.shape
    if n_rows < 1 or n_cols < 2:
        raise DimensionError(f"need at least 1 row and 2 columns, got {n_rows} x {n_cols}")
    for i in range(n_rows):
        row = mat[i]
        if not np.all(np.isfinite(row)):
            raise DomainError(f"row {i} contains a non-finite entry")
        if np.any(row < -ENTRY_TOL) or np.any(row > 1.0 + ENTRY_TOL):
            j = int(np.argmax((row < -ENTRY_TOL) | (row > 1.0 + ENTRY_TOL)))
            raise DomainError(f"row {i} entry {j} is {row[j]!r}, outside [0, 1]")
        s = float(row.sum())
        if abs(s - 1.0) > ROW_SUM_TOL:
            raise DomainError(f"row {i} sums to {s!r}, expected 1 within {ROW_SUM_TOL}")
    mat.setflags(write=False)
    return mat


def renormalize_rows(raw) -> np.ndarray:
    """Divide each row by its sum.  Rows with non-positive sums raise."""
    mat = np.array(raw, dtype=float)
    if mat.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got {mat.ndim} dimension(s)")
    sums = mat.sum(axis=1, keepdims=True)
    if np.any(sums <= 0) or not np.all(np.isfinite(sums)):
        i = int(np.argmax((sums <= 0) | ~np.isfinite(sums)))
        raise DomainError(f"row {i} sums to {float(sums[i, 0])!r}, cannot renormalize")
    return mat / sums


def class_sizes(P: np.ndarray) -> np.ndarray:
    """Soft class sizes: the column sums of the prediction matrix.

    Row-stochasticity forces the sizes to add up to the number of rows.
    """
    return np.asarray(P, dtype=float).sum(axis=0)


def is_one_hot_rows(P: np.ndarray, tol: float = 0.0) -> bool:
    """True iff every row has one entry within ``tol`` of 1 and the rest within ``tol`` of 0."""
    if not 0.0 <= tol < 0.5:
        raise ValueError(f"tol must be in [0, 0.5), got {tol}")
    P = np.asarray(P, dtype=float)
    near_one = np.abs(P - 1.0) <= tol
    near_zero = np.abs(P) <= tol
    return bool(np.all(near_one.sum(axis=1) == 1) and np.all(near_one | near_zero))


def one_hot_matrix(labels: Sequence[int], n_cols: int) -> np.ndarray:
    """Build the one-hot-row matrix whose row i is hot in column ``labels[i]``."""
    labels = np.asarray(labels, dtype=int)
    mat = np.zeros((labels.size, n_cols))
    mat[np.arange(labels.size), labels] = 1.0
    return mat


def enumerate_one_hot(
    n_rows: int, n_cols: int, budget: int = DEFAULT_ENUM_BUDGET
) -> Iterator[np.ndarray]:
    """Yield all ``n_cols ** n_rows`` one-hot-row matrices.

    Ordering is lexicographic on the tuple of hot-column labels, so the
    stream is reproducible byte for byte.
    """
    count = n_cols**n_rows
    if count > budget:
        raise BudgetError(f"{n_cols}^{n_rows} = {count} one-hot matrices exceeds budget {budget}")
    for labels in itertools.product(range(n_cols), repeat=n_rows):
        yield one_hot_matrix(labels, n_cols)


def count_size_compositions(total: int, parts: int) -> int:
    return math.comb(total + parts - 1, parts - 1)


def enumerate_size_compositions(
    total: int, parts: int, budget: int = DEFAULT_ENUM_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield all ``parts``-tuples of non-negative integers summing to ``total``.

    Lexicographic ascending order, e.g. (0, 2), (1, 1), (2, 0) for 2 into 2.
    """
    count = count_size_compositions(total, parts)
    if count > budget:
        raise BudgetError(f"{count} compositions of {total} into {parts} parts exceeds budget {budget}")

    def rec(remaining: int, slots: int) -> Iterator[tuple[int, ...]]:
        if slots == 1:
            yield (remaining,)
            return
        for head in range(remaining + 1):
            for tail in rec(remaining - head, slots - 1):
                yield (head,) + tail

    return rec(total, parts)


def project_row_simplex(v) -> np.ndarray:
    """Euclidean projection of a vector onto the probability simplex.

    Exact sort-and-threshold method: find the shift tau with
    sum(max(v - tau, 0)) = 1 and clip.  Idempotent on feasible points.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("project_row_simplex expects a 1-D vector")
    return project_rows(v[None, :])[0]


def project_rows(rows: np.ndarray) -> np.ndarray:
    """Project every row of ``rows`` (shape (..., C)) onto the simplex."""
    rows = np.asarray(rows, dtype=float)
    shape = rows.shape
    flat = rows.reshape(-1, shape[-1])
    n = shape[-1]
    u = np.sort(flat, axis=1)[:, ::-1]
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = u * idx > css
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(flat.shape[0]), rho] / (rho + 1.0)
    out = np.maximum(flat - tau[:, None], 0.0)
    return out.reshape(shape)


def _frozen(rows) -> np.ndarray:
    mat = np.array(rows, dtype=float)
    mat.setflags(write=False)
    return mat


# Canonical example matrices used throughout the docs, demos, and tests.
# The 4 x 2 family shares maximal confidence but differs in class balance;
# the 2 x 2 family is the full set of one-hot extreme points.
EXAMPLES_4X2 = {
    "P1": _frozen([[1, 0], [1, 0], [1, 0], [1, 0]]),
    "P2": _frozen([[1, 0], [1, 0], [1, 0], [0, 1]]),
    "P3": _frozen([[1, 0], [1, 0], [0, 1], [0, 1]]),
}

EXAMPLES_2X2 = {
    "P1": _frozen([[0, 1], [0, 1]]),
    "P2": _frozen([[1, 0], [0, 1]]),
    "P3": _frozen([[0, 1], [1, 0]]),
    "P4": _frozen([[1, 0], [1, 0]]),
}


def read_matrix_csv(source: str | IO[str]) -> np.ndarray:
    """Read a prediction matrix from CSV and validate it.

    One sample per line, comma-separated decimal probabilities with '.' as
    the decimal separator; leading lines starting with '#' are skipped.
    ``source`` is a path or an open text stream.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    rows = []
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#") and not rows:
            continue
        try:
            rows.append([float(tok) for tok in stripped.split(",")])
        except ValueError as exc:
            raise DimensionError(f"unparseable CSV line {stripped!r}: {exc}") from None
    if not rows:
        raise DimensionError("CSV input contains no data rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DimensionError(f"ragged CSV input, row widths {sorted(widths)}")
    return validate(rows)


def read_array_csv(source: str | IO[str]) -> np.ndarray:
    """Read a rectangular numeric CSV (no probability validation).

    Same format as the matrix CSV; used for files that are matrices but
    not probability matrices, e.g. gradients.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        with open(source, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    rows = []
    for line in lines:
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            rows.append([float(tok) for tok in stripped.split(",")])
        except ValueError as exc:
            raise DimensionError(f"unparseable CSV line {stripped!r}: {exc}") from None
    if not rows:
        raise DimensionError("CSV input contains no data rows")
    if len({len(r) for r in rows}) != 1:
        raise DimensionError("ragged CSV input")
    return np.array(rows)


def write_matrix_csv(target: str | IO[str], mat: np.ndarray, header: str | None = None) -> None:
    """Write a matrix as CSV with full float64 precision (round-trip safe)."""
    mat = np.asarray(mat, dtype=float)
    lines = []
    if header:
        lines.append(header if header.startswith("#") else "# " + header)
    for row in mat:
        lines.append(",".join(repr(float(x)) for x in row))
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
