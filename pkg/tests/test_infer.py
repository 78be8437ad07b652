import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_ranking
from pbninfer.discretize import BinaryMatrix
from pbninfer.errors import ConstantTarget, EmptyPredictorList, KTooLarge, UsageError
from pbninfer.infer import (
    Candidate,
    PredictorBuffer,
    assemble_pbn,
    assign_probabilities,
    enumerate_predictors,
    infer_pbn,
)
from pbninfer.pbn import Predictor


def _binary(values):
    values = np.asarray(values, dtype=np.uint8)
    m, n = values.shape
    return BinaryMatrix([f"g{i}" for i in range(m)], [f"s{j}" for j in range(n)], values)


def _random_binary(m, n, seed):
    rng = np.random.default_rng(seed)
    values = rng.integers(0, 2, size=(m, n))
    values[:, 0], values[:, 1] = 0, 1  # no constant rows
    return _binary(values)


def _cand(cod, inputs):
    return Candidate(cod, (0.0,) * (len(inputs) + 1), tuple(inputs))


def test_equal_rows_example():
    b = _binary([[0, 1, 1, 0, 1, 0], [0, 1, 1, 0, 1, 0], [1, 1, 0, 0, 1, 0], [0, 0, 0, 1, 1, 1]])
    top = enumerate_predictors(b, k=1, n_p=2)[0]
    assert top[0].inputs == (1,)
    assert top[0].cod == 1.0
    assert len(top) <= 2


def test_combination_count():
    search = enumerate_predictors(_random_binary(7, 12, 0), k=3, n_p=10)
    assert search.scored == (math.comb(6, 3),) * 7


def test_capacity_larger_than_candidates():
    b = _random_binary(7, 12, 1)
    search = enumerate_predictors(b, k=3, n_p=50)
    for t in range(7):
        assert len(search[t]) <= 20
        assert [(c.cod, c.inputs) for c in search[t]] == brute_force_ranking(b.values, t, 3, 50)


def test_k_too_large():
    with pytest.raises(KTooLarge):
        enumerate_predictors(_binary([[0, 1]]), k=1)
    with pytest.raises(KTooLarge):
        enumerate_predictors(_random_binary(3, 6, 0), k=3)


def test_constant_gene_flagged():
    b = _binary([[0, 1, 0, 1], [1, 1, 1, 1], [0, 1, 1, 0]])
    search = enumerate_predictors(b, k=1, n_p=2)
    assert search.constant == (False, True, False)
    assert search[1] == ()
    with pytest.raises(ConstantTarget):
        infer_pbn(b, k=1, n_p=2)


def test_no_informative_predictor():
    # gene 0 is independent of gene 1 over the full table
    b = _binary([[0, 1, 0, 1], [0, 0, 1, 1]])
    with pytest.raises(EmptyPredictorList):
        infer_pbn(b, k=1)


def test_buffer_keeps_best_and_breaks_ties_lexicographically():
    buf = PredictorBuffer(2)
    assert not buf.offer(_cand(0.0, (0,)))
    assert not buf.offer(_cand(-0.5, (1,)))
    for cod, ins in [(0.5, (3,)), (0.5, (1,)), (0.9, (4,)), (0.5, (2,))]:
        buf.offer(_cand(cod, ins))
        assert len(buf) <= 2
    assert [(c.cod, c.inputs) for c in buf.entries] == [(0.9, (4,)), (0.5, (1,))]
    with pytest.raises(UsageError):
        PredictorBuffer(0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from([0.25, 0.5, 0.75, 1.0, -0.5]), st.integers(0, 6)), max_size=30),
       st.integers(1, 5), st.randoms(use_true_random=False))
def test_buffer_is_order_independent(items, capacity, rnd):
    cands = [_cand(cod, (g, g + 1)) for cod, g in items]
    shuffled = list(cands)
    rnd.shuffle(shuffled)
    a, b = PredictorBuffer(capacity), PredictorBuffer(capacity)
    for c in cands:
        a.offer(c)
    for c in shuffled:
        b.offer(c)
    assert a.entries == b.entries
    expected = sorted((c for c in cands if c.cod > 0), key=lambda c: c.key)[:capacity]
    assert [c.key for c in a.entries] == [c.key for c in expected]


def test_buffer_merge_equals_single_pass():
    rnd = random.Random(0)
    cands = [_cand(rnd.choice([0.2, 0.4, 0.6]), (i,)) for i in range(40)]
    whole, left, right = PredictorBuffer(5), PredictorBuffer(5), PredictorBuffer(5)
    for c in cands:
        whole.offer(c)
    for c in cands[:17]:
        left.offer(c)
    for c in cands[17:]:
        right.offer(c)
    right.merge(left)
    assert right.entries == whole.entries


def test_chunking_and_threads_do_not_change_result():
    b = _random_binary(9, 16, 5)
    ref = enumerate_predictors(b, k=3, n_p=6)
    for chunk_size, threads in [(1, 1), (7, 1), (13, 4), (4096, 3)]:
        assert enumerate_predictors(b, k=3, n_p=6, threads=threads, chunk_size=chunk_size) == ref


def test_exhaustive_rescore():
    b = _random_binary(8, 14, 11)
    search = enumerate_predictors(b, k=2, n_p=4)
    for t in range(8):
        kept = [(c.cod, c.inputs) for c in search[t]]
        assert kept == brute_force_ranking(b.values, t, 2, 4)
        worst = min((c for c, _ in kept), default=None)
        everything = brute_force_ranking(b.values, t, 2, 1000)
        for cod, ins in everything:
            if (cod, ins) not in kept:
                assert cod <= worst


def test_entries_exclude_target():
    search = enumerate_predictors(_random_binary(6, 10, 2), k=2, n_p=10)
    for t in range(6):
        for c in search[t]:
            assert t not in c.inputs and list(c.inputs) == sorted(set(c.inputs)) and c.cod > 0


def test_assign_probabilities_examples():
    p = assign_probabilities([[_cand(0.7, (1,))]])
    assert p[0][0].probability == 1.0
    p = assign_probabilities([[_cand(0.5, (1,)), _cand(0.5, (2,))]])
    assert [f.probability for f in p[0]] == [0.5, 0.5]
    p = assign_probabilities([[_cand(0.9, (1,)), _cand(0.3, (2,))], [_cand(0.2, (0,))]])
    assert [f.probability for f in p[0]] == pytest.approx([0.75, 0.25], abs=1e-15)
    assert p[1][0].probability == 1.0
    with pytest.raises(EmptyPredictorList):
        assign_probabilities([[]])


def test_probabilities_sum_to_one_and_keep_order():
    net = infer_pbn(_random_binary(7, 20, 3), k=3, n_p=10)
    for fs in net.functions:
        assert abs(math.fsum(f.probability for f in fs) - 1) <= 1e-12
        probs = [f.probability for f in fs]
        assert probs == sorted(probs, reverse=True)


def test_assemble_examples():
    fs = [[Predictor(i, sorted([(i + 1) % 7, (i + 2) % 7]), [0.1, 0.2, 0.3], probability=0.1, cod=0.5)
           for _ in range(10)] for i in range(7)]
    net = assemble_pbn(fs, 0.001)
    assert net.n == 7 and net.n_predictors == 70
    with pytest.raises(UsageError):
        assemble_pbn(fs, 0.0)
    with pytest.raises(EmptyPredictorList):
        assemble_pbn([[]], 0.01)


def test_infer_pbn_carries_gene_ids(fixture_path):
    from pbninfer.discretize import discretize
    from pbninfer.ingest import read_expression_matrix

    b = discretize(read_expression_matrix(fixture_path), "median")
    net = infer_pbn(b)
    assert net.gene_ids == tuple(b.gene_ids)
    assert net.n == 7 and all(1 <= len(fs) <= 10 for fs in net.functions)
    assert all(f.k == 3 for fs in net.functions for f in fs)
