"""Reading, validating and subsetting tab-separated expression matrices.

File layout: the first line is a header whose first cell is ignored and whose
remaining cells are sample ids. Every following line holds a gene id and one
decimal value per sample, all separated by tabs.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .errors import (
    DataError,
    DuplicateGeneId,
    EmptyInput,
    MalformedRow,
    MissingValue,
    NegativeValue,
    NonNumericValue,
    UnknownGeneId,
)

__all__ = [
    "ExpressionMatrix",
    "parse_expression_matrix",
    "read_expression_matrix",
    "serialize_expression_matrix",
    "select_genes",
]


@dataclass(frozen=True, eq=False)
class ExpressionMatrix:
    """Genes x samples matrix of non-negative expression ratios."""

    gene_ids: tuple[str, ...]
    sample_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "gene_ids", tuple(self.gene_ids))
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        _check_shape(self.gene_ids, self.sample_ids, values)
        if not np.all(np.isfinite(values)):
            raise NonNumericValue("expression values must be finite")
        if np.any(values < 0):
            raise NegativeValue("expression values must be >= 0")

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other):
        if not isinstance(other, ExpressionMatrix):
            return NotImplemented
        return (
            self.gene_ids == other.gene_ids
            and self.sample_ids == other.sample_ids
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _check_shape(gene_ids, sample_ids, values):
    if values.ndim != 2 or values.shape != (len(gene_ids), len(sample_ids)):
        raise MalformedRow(
            f"values shape {values.shape} does not match "
            f"{len(gene_ids)} genes x {len(sample_ids)} samples"
        )
    if len(gene_ids) < 1:
        raise EmptyInput("matrix has no genes")
    if len(sample_ids) < 2:
        raise DataError("at least two samples are required")
    seen = set()
    for g in gene_ids:
        if g in seen:
            raise DuplicateGeneId(f"duplicate gene id {g!r}")
        seen.add(g)


def _split_rows(text: str | TextIO) -> list[list[str]]:
    if not isinstance(text, str):
        text = text.read()
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise EmptyInput("no header line")
    return [line.split("\t") for line in lines]


def parse_table(text: str | TextIO) -> tuple[list[str], list[str], list[list[str]]]:
    """Split a tab-separated table into (gene ids, sample ids, raw cells).

    Checks the layout only; cell contents are returned unparsed.
    """
    rows = _split_rows(text)
    header, body = rows[0], rows[1:]
    sample_ids = header[1:]
    if not body:
        raise EmptyInput("no gene rows")
    width = len(header)
    gene_ids = []
    cells = []
    for lineno, row in enumerate(body, start=2):
        if len(row) != width:
            raise MalformedRow(f"line {lineno}: expected {width} fields, got {len(row)}")
        gene_ids.append(row[0])
        cells.append(row[1:])
    return gene_ids, sample_ids, cells


def parse_expression_matrix(text: str | TextIO) -> ExpressionMatrix:
    """Parse the tab-separated expression format.

    ``text`` is either the document itself or an open text stream.
    """
    gene_ids, sample_ids, cells = parse_table(text)
    values = np.empty((len(gene_ids), len(sample_ids)))
    for i, (gene, row) in enumerate(zip(gene_ids, cells)):
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == "NA":
                raise MissingValue(f"gene {gene!r}, sample {sample_ids[j]!r}: missing value")
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericValue(
                    f"gene {gene!r}, sample {sample_ids[j]!r}: {cell!r} is not a number"
                ) from None
            if not math.isfinite(v):
                raise NonNumericValue(f"gene {gene!r}, sample {sample_ids[j]!r}: {cell!r} is not finite")
            if v < 0:
                raise NegativeValue(f"gene {gene!r}, sample {sample_ids[j]!r}: negative value {cell}")
            values[i, j] = v
    return ExpressionMatrix(tuple(gene_ids), tuple(sample_ids), values)


def read_expression_matrix(path: str | Path) -> ExpressionMatrix:
    with open(path, encoding="utf-8") as fh:
        return parse_expression_matrix(fh)


def format_table(gene_ids: Sequence[str], sample_ids: Sequence[str], rows: Iterable[Iterable[str]],
                 corner: str = "gene") -> str:
    out = io.StringIO()
    out.write("\t".join([corner, *sample_ids]) + "\n")
    for gene, row in zip(gene_ids, rows):
        out.write("\t".join([gene, *row]) + "\n")
    return out.getvalue()


def serialize_expression_matrix(m: ExpressionMatrix) -> str:
    # repr() is the shortest string that parses back to the same double
    return format_table(m.gene_ids, m.sample_ids, ([repr(float(v)) for v in row] for row in m.values))


def select_genes(m: ExpressionMatrix, wanted: Sequence[str]) -> ExpressionMatrix:
    """Return the rows named in ``wanted``, in that order."""
    index = {g: i for i, g in enumerate(m.gene_ids)}
    rows = []
    for g in wanted:
        if g not in index:
            raise UnknownGeneId(f"unknown gene id {g!r}")
        rows.append(index[g])
    return ExpressionMatrix(tuple(wanted), m.sample_ids, m.values[rows, :])
