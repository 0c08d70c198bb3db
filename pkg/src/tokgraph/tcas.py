"""Token-class alignment scoring.

Builds the co-occurrence matrix between assigned token classes and true
patch classes, row-normalizes it, and scores how far it is from a perfect
one-token-per-class alignment.  Lower is better; 0 means every token class
maps to exactly one true class and no two token classes overlap.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Any

import numpy as np

from .errors import DataFormatError, ValidationError


@dataclass(frozen=True)
class CoOccurrence:
    """counts[i, j] = number of patches with token class i and true class j."""

    counts: np.ndarray

    @property
    def l1(self) -> int:
        return self.counts.shape[0]

    @property
    def l2(self) -> int:
        return self.counts.shape[1]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class RowNormalized:
    """L1 row-normalized co-occurrence; all-zero source rows flagged dead."""

    rows: np.ndarray
    dead: np.ndarray

    @property
    def l1(self) -> int:
        return self.rows.shape[0]

    @property
    def l2(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class TcasScore:
    """Alignment score with its two components.

    term1 penalizes token classes whose true-class distribution is spread
    out (or never used at all); term2 penalizes distinct token classes with
    overlapping true-class distributions.  value = term1 + term2 with
    normalizers lambda1 = 1/l1 and lambda2 = 1/l1^2.
    """

    value: float
    term1: float
    term2: float
    l1: int
    l2: int
    dead_rows: int

    @property
    def lambda1(self) -> float:
        return 1.0 / self.l1

    @property
    def lambda2(self) -> float:
        return 1.0 / (self.l1 * self.l1)

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "term1": self.term1,
            "term2": self.term2,
            "l1": self.l1,
            "l2": self.l2,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "dead_rows": self.dead_rows,
            # rows are plain L1-normalized counts; a softmax reading of the
            # normalization exists but would not attain 0 at perfect
            # alignment, so it is documented here rather than implemented
            "normalization": "l1-row",
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def _as_index_array(values, name: str) -> np.ndarray:
    arr = np.asarray(getattr(values, "tokens", values))
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValidationError(f"{name} must contain integers")
    return arr.astype(np.int64)


def accumulate(tokens, labels, l1: int, l2: int) -> CoOccurrence:
    """Count (token, label) pairs into an l1 x l2 matrix.

    ``tokens`` may be a TokenAssignment or a plain index array.  Raises on
    the first out-of-range entry, naming its position.
    """
    tok = _as_index_array(tokens, "tokens")
    lab = _as_index_array(labels, "labels")
    if tok.shape != lab.shape:
        raise ValidationError(
            f"tokens ({tok.shape[0]}) and labels ({lab.shape[0]}) differ in length"
        )
    if l1 < 1 or l2 < 1:
        raise ValidationError(f"l1 and l2 must be >= 1, got l1={l1}, l2={l2}")
    for name, arr, hi in (("token", tok, l1), ("label", lab, l2)):
        bad = np.flatnonzero((arr < 0) | (arr >= hi))
        if bad.size:
            pos = int(bad[0])
            raise ValidationError(
                f"{name} {arr[pos]} at position {pos} outside [0, {hi})"
            )
    counts = np.zeros((l1, l2), dtype=np.int64)
    np.add.at(counts, (tok, lab), 1)
    return CoOccurrence(counts=counts)


def normalize_rows(co: CoOccurrence) -> RowNormalized:
    """Divide each row by its sum; all-zero rows stay zero and are flagged."""
    counts = np.asarray(co.counts, dtype=np.float64)
    sums = counts.sum(axis=1)
    dead = sums == 0.0
    rows = np.zeros_like(counts)
    alive = ~dead
    rows[alive] = counts[alive] / sums[alive, None]
    return RowNormalized(rows=rows, dead=dead)


def tcas(normalized: RowNormalized) -> TcasScore:
    """Alignment score of a row-normalized co-occurrence matrix.

    term1 = (1/l1) * sum_i (1 - ||row_i||_2)^2, where a dead row has norm 0
    and therefore contributes 1 to the sum.  term2 = (1/l1^2) *
    sum_{i != i'} (row_i . row_i')^2 over ordered pairs.
    """
    rows = normalized.rows
    l1, l2 = rows.shape
    norms = np.sqrt(np.einsum("ij,ij->i", rows, rows))
    sum1 = float(np.sum((1.0 - norms) ** 2))

    gram = rows @ rows.T
    off = gram - np.diag(np.diag(gram))
    sum2 = float(np.sum(off * off))

    term1 = sum1 / l1
    term2 = sum2 / (l1 * l1)
    return TcasScore(
        value=term1 + term2,
        term1=term1,
        term2=term2,
        l1=l1,
        l2=l2,
        dead_rows=int(normalized.dead.sum()),
    )


def score_tokens(tokens, labels, l1: int, l2: int) -> TcasScore:
    """Convenience pipeline: accumulate, normalize, score."""
    return tcas(normalize_rows(accumulate(tokens, labels, l1, l2)))


def write_cooccurrence_csv(path, co: CoOccurrence) -> None:
    """CSV dump with a header row of true-class ids."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([str(j) for j in range(co.l2)])
        for row in co.counts:
            writer.writerow([str(int(v)) for v in row])


def read_cooccurrence_csv(path) -> CoOccurrence:
    """Read a matrix written by write_cooccurrence_csv."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty co-occurrence file") from None
        if [h.strip() for h in header] != [str(j) for j in range(len(header))]:
            raise DataFormatError(f"{path}: header row is not 0..{len(header) - 1}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno} has {len(row)} fields, expected {len(header)}"
                )
            try:
                rows.append([int(v) for v in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no count rows")
    counts = np.array(rows, dtype=np.int64)
    if np.any(counts < 0):
        raise DataFormatError(f"{path}: negative count")
    return CoOccurrence(counts=counts)
