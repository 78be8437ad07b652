"""Binarisation of expression data by per-gene thresholding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from .errors import DataError, DegenerateRow, MalformedRow, UsageError
from .ingest import ExpressionMatrix, _check_shape, format_table, parse_table

__all__ = [
    "BinaryMatrix",
    "ThresholdMethod",
    "threshold",
    "kmeans_log_centroids",
    "discretize",
    "parse_binary_matrix",
    "read_binary_matrix",
    "serialize_binary_matrix",
]


class ThresholdMethod(str, enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"
    KMEANS_LOG = "kmeans_log"

    @classmethod
    def parse(cls, name: "str | ThresholdMethod") -> "ThresholdMethod":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).replace("-", "_").lower())
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise UsageError(f"unknown threshold method {name!r} (choose from {choices})") from None


@dataclass(frozen=True, eq=False)
class BinaryMatrix:
    """Genes x samples matrix over {0, 1}."""

    gene_ids: tuple[str, ...]
    sample_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.size and not np.all((raw == 0) | (raw == 1)):
            raise DataError("binary matrix entries must be 0 or 1")
        values = raw.astype(np.uint8)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        _check_shape(self.gene_ids, self.sample_ids, values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, BinaryMatrix):
            return NotImplemented
        return (
            self.gene_ids == other.gene_ids
            and self.sample_ids == other.sample_ids
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def kmeans_log_centroids(row: Sequence[float]) -> tuple[float, float]:
    """Two-cluster 1-D k-means on the log of ``row``.

    Zeros are placed at log(min_positive / 10). Centroids start at the
    extreme log-values and Lloyd updates run until the assignment is stable.
    A point joins the upper cluster when it is >= the centroid midpoint.
    """
    x = np.asarray(row, dtype=float)
    positive = x[x > 0]
    if positive.size == 0:
        raise DegenerateRow("k-means on logs needs at least one positive value")
    floor = positive.min() / 10.0
    logs = np.log(np.where(x > 0, x, floor))
    lo, hi = logs.min(), logs.max()
    if lo == hi:
        raise DegenerateRow("all values identical; two clusters are impossible")
    c0, c1 = lo, hi
    upper = logs >= (c0 + c1) / 2
    # Lloyd iterations cannot cycle; the cap only guards against a bug
    for _ in range(10 * len(logs) + 100):
        c0 = logs[~upper].mean()
        c1 = logs[upper].mean()
        new = logs >= (c0 + c1) / 2
        if np.array_equal(new, upper):
            break
        upper = new
    return float(c0), float(c1)


def threshold(row: Sequence[float], method: ThresholdMethod | str) -> float:
    """Threshold separating 0 from 1 for a single gene's values.

    The median is the lower median, i.e. the ``(n + 1) // 2``-th smallest
    value, so the threshold is always an observed value.
    """
    method = ThresholdMethod.parse(method)
    x = np.asarray(row, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("threshold needs a 1-D row of at least two values")
    if method is ThresholdMethod.MEAN:
        return float(x.mean())
    if method is ThresholdMethod.MEDIAN:
        return float(np.sort(x)[(x.size + 1) // 2 - 1])
    c0, c1 = kmeans_log_centroids(x)
    return math.exp((c0 + c1) / 2)


def discretize(m: ExpressionMatrix, method: ThresholdMethod | str = ThresholdMethod.MEDIAN,
               axis: str = "genes") -> BinaryMatrix:
    """Binarise ``m``: 0 where value < t, 1 where value >= t.

    ``axis="genes"`` computes one threshold per gene row (the default and
    the mode the pipeline uses); ``axis="samples"`` one per sample column.
    """
    method = ThresholdMethod.parse(method)
    if axis not in ("genes", "samples"):
        raise UsageError(f"axis must be 'genes' or 'samples', not {axis!r}")
    values = m.values if axis == "genes" else m.values.T
    labels = m.gene_ids if axis == "genes" else m.sample_ids
    out = np.empty(values.shape, dtype=np.uint8)
    for i, row in enumerate(values):
        try:
            t = threshold(row, method)
        except DegenerateRow as exc:
            raise DegenerateRow(f"{labels[i]}: {exc}") from exc
        out[i] = row >= t
    if axis == "samples":
        out = out.T
    return BinaryMatrix(m.gene_ids, m.sample_ids, out)


def parse_binary_matrix(text: str | TextIO) -> BinaryMatrix:
    gene_ids, sample_ids, cells = parse_table(text)
    values = np.empty((len(gene_ids), len(sample_ids)), dtype=np.uint8)
    for i, row in enumerate(cells):
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell not in ("0", "1"):
                raise MalformedRow(f"gene {gene_ids[i]!r}: binary cell {cell!r} is not 0 or 1")
            values[i, j] = cell == "1"
    return BinaryMatrix(tuple(gene_ids), tuple(sample_ids), values)


def read_binary_matrix(path: str | Path) -> BinaryMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_binary_matrix(fh)


def serialize_binary_matrix(b: BinaryMatrix) -> str:
    return format_table(b.gene_ids, b.sample_ids, ([str(int(v)) for v in row] for row in b.values))
