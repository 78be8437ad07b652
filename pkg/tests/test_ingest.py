import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbninfer.errors import (
    DuplicateGeneId,
    EmptyInput,
    MalformedRow,
    MissingValue,
    NegativeValue,
    NonNumericValue,
    UnknownGeneId,
)
from pbninfer.ingest import (
    ExpressionMatrix,
    parse_expression_matrix,
    read_expression_matrix,
    select_genes,
    serialize_expression_matrix,
)

TEXT = "id\tA\tB\tC\nWNT5A\t1.5\t0.25\t3\npirin\t0\t2.0\t0.75\n"


def test_parse_well_formed():
    m = parse_expression_matrix(TEXT)
    assert m.gene_ids == ("WNT5A", "pirin")
    assert m.sample_ids == ("A", "B", "C")
    np.testing.assert_array_equal(m.values, [[1.5, 0.25, 3.0], [0.0, 2.0, 0.75]])


def test_parse_accepts_stream():
    assert parse_expression_matrix(io.StringIO(TEXT)) == parse_expression_matrix(TEXT)


@pytest.mark.parametrize(
    "text, error",
    [
        ("id\tA\tB\nWNT5A\t-0.5\t1\n", NegativeValue),
        ("id\tA\tB\nWNT5A\t1\t2\nWNT5A\t3\t4\n", DuplicateGeneId),
        ("id\tA\tB\nWNT5A\t1\n", MalformedRow),
        ("id\tA\tB\nWNT5A\t1\tabc\n", NonNumericValue),
        ("id\tA\tB\nWNT5A\t1\tinf\n", NonNumericValue),
        ("id\tA\tB\nWNT5A\tNA\t1\n", MissingValue),
        ("", EmptyInput),
        ("id\tA\tB\n", EmptyInput),
    ],
)
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_expression_matrix(text)


def test_gene_ids_are_case_sensitive():
    m = parse_expression_matrix("id\tA\tB\nWNT5A\t1\t2\nwnt5a\t3\t4\n")
    assert m.gene_ids == ("WNT5A", "wnt5a")
    with pytest.raises(UnknownGeneId):
        select_genes(m, ["Wnt5a"])


def test_select_reorders_rows():
    m = parse_expression_matrix(TEXT)
    sub = select_genes(m, ["pirin", "WNT5A"])
    assert sub.gene_ids == ("pirin", "WNT5A")
    np.testing.assert_array_equal(sub.values, m.values[[1, 0]])
    assert sub.sample_ids == m.sample_ids


def test_select_identity_and_unknown():
    m = parse_expression_matrix(TEXT)
    assert select_genes(m, list(m.gene_ids)) == m
    with pytest.raises(UnknownGeneId, match="NOSUCHGENE"):
        select_genes(m, ["NOSUCHGENE"])


def test_read_fixture(fixture_path):
    m = read_expression_matrix(fixture_path)
    assert m.shape == (7, 31)
    assert m.gene_ids[0] == "WNT5A"


matrices = st.integers(1, 5).flatmap(
    lambda m: st.integers(2, 6).flatmap(
        lambda n: st.lists(
            st.lists(st.floats(0, 1e6, allow_nan=False, allow_infinity=False), min_size=n, max_size=n),
            min_size=m,
            max_size=m,
        )
    )
)


@given(matrices)
def test_round_trip(rows):
    m = ExpressionMatrix([f"g{i}" for i in range(len(rows))], [f"s{j}" for j in range(len(rows[0]))], rows)
    assert parse_expression_matrix(serialize_expression_matrix(m)) == m


@given(matrices, st.randoms())
def test_select_never_alters_values(rows, random):
    m = ExpressionMatrix([f"g{i}" for i in range(len(rows))], [f"s{j}" for j in range(len(rows[0]))], rows)
    wanted = random.sample(list(m.gene_ids), random.randint(1, len(m.gene_ids)))
    sub = select_genes(m, wanted)
    for g, row in zip(wanted, sub.values):
        np.testing.assert_array_equal(row, m.values[m.gene_ids.index(g)])
