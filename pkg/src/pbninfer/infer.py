"""Predictor search: score every k-subset of genes against every target.

For each target gene all C(m-1, k) input combinations that exclude the target
are fitted with the closed-form perceptron and ranked by COD. Only the best
``n_p`` with positive COD are kept; ties on COD go to the lexicographically
smaller input tuple, so the result does not depend on evaluation order or on
how the work is split between threads.
"""

from __future__ import annotations

import bisect
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .cod import _augment, cod_batch, pinv
from .discretize import BinaryMatrix
from .errors import ConstantTarget, EmptyPredictorList, KTooLarge, UsageError
from .pbn import PBN, Predictor

__all__ = [
    "Candidate",
    "PredictorBuffer",
    "PredictorSearch",
    "enumerate_predictors",
    "assign_probabilities",
    "assemble_pbn",
    "infer_pbn",
]

DEFAULT_K = 3
DEFAULT_N_PREDICTORS = 10
DEFAULT_PERTURBATION = 0.001
CHUNK_SIZE = 4096


class Candidate(NamedTuple):
    cod: float
    weights: tuple[float, ...]
    inputs: tuple[int, ...]

    @property
    def key(self):
        return (-self.cod, self.inputs)


class PredictorBuffer:
    """Keeps the ``capacity`` best candidates, best first.

    A candidate is admitted only with a positive COD that beats the current
    worst entry (or while there is room); the worst entry is then evicted.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise UsageError("buffer capacity must be >= 1")
        self.capacity = capacity
        self._keys: list = []
        self._entries: list[Candidate] = []

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self) -> list[Candidate]:
        return list(self._entries)

    def offer(self, cand: Candidate) -> bool:
        if not cand.cod > 0:
            return False
        key = cand.key
        if len(self._entries) == self.capacity:
            if not key < self._keys[-1]:
                return False
            self._keys.pop()
            self._entries.pop()
        pos = bisect.bisect_left(self._keys, key)
        self._keys.insert(pos, key)
        self._entries.insert(pos, cand)
        return True

    def merge(self, other: "PredictorBuffer") -> None:
        for cand in other._entries:
            self.offer(cand)


@dataclass(frozen=True)
class PredictorSearch:
    """Result of :func:`enumerate_predictors`, indexed by target gene."""

    entries: tuple[tuple[Candidate, ...], ...]
    constant: tuple[bool, ...]
    scored: tuple[int, ...]

    def __getitem__(self, target: int) -> tuple[Candidate, ...]:
        return self.entries[target]

    def __len__(self):
        return len(self.entries)


def _score_chunk(values: np.ndarray, combos: np.ndarray, targets: Sequence[int], n_p: int):
    """Score one block of combinations against every target.

    Returns one local buffer and one scored-count per target.
    """
    X = values[combos].astype(float)  # (c, k, n)
    Xa = _augment(X)
    R_pinv = pinv(Xa @ np.swapaxes(Xa, -1, -2))
    order_index = np.arange(len(combos))
    buffers, counts = [], []
    for t in targets:
        buf = PredictorBuffer(n_p)
        mask = ~np.any(combos == t, axis=1)
        counts.append(int(mask.sum()))
        if not mask.any():
            buffers.append(buf)
            continue
        theta, w, _, _ = cod_batch(X[mask], values[t], R_pinv[mask])
        idx = order_index[mask]
        good = np.flatnonzero(theta > 0)
        # combos are in lexicographic order, so index order is the tie-break
        best = good[np.lexsort((idx[good], -theta[good]))][:n_p]
        for b in best:
            buf.offer(Candidate(float(theta[b]), tuple(float(x) for x in w[b]),
                                tuple(int(g) for g in combos[idx[b]])))
        buffers.append(buf)
    return buffers, counts


def _chunks(m: int, k: int, size: int) -> Iterable[np.ndarray]:
    it = itertools.combinations(range(m), k)
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(-1, k)


def enumerate_predictors(b: BinaryMatrix, k: int = DEFAULT_K, n_p: int = DEFAULT_N_PREDICTORS,
                         threads: int = 1, chunk_size: int = CHUNK_SIZE) -> PredictorSearch:
    """Top-``n_p`` positive-COD input sets of size ``k`` for every gene.

    Constant genes cannot be scored; they get an empty list and are flagged
    in ``PredictorSearch.constant``.
    """
    values = np.asarray(b.values, dtype=np.uint8)
    m = values.shape[0]
    if k < 1:
        raise UsageError("k must be >= 1")
    if k > m - 1:
        raise KTooLarge(f"k={k} needs at least {k + 1} genes, matrix has {m}")
    if n_p < 1:
        raise UsageError("number of predictors must be >= 1")
    if threads < 1:
        raise UsageError("threads must be >= 1")

    ones = values.sum(axis=1)
    constant = tuple(bool(c == 0 or c == values.shape[1]) for c in ones)
    targets = [t for t in range(m) if not constant[t]]

    finals = [PredictorBuffer(n_p) for _ in range(m)]
    scored = [0] * m

    def absorb(result):
        buffers, counts = result
        for t, buf, cnt in zip(targets, buffers, counts):
            finals[t].merge(buf)
            scored[t] += cnt

    if threads == 1:
        for combos in _chunks(m, k, chunk_size):
            absorb(_score_chunk(values, combos, targets, n_p))
    else:
        with ThreadPoolExecutor(threads) as pool:
            for result in pool.map(lambda c: _score_chunk(values, c, targets, n_p), _chunks(m, k, chunk_size)):
                absorb(result)

    for t in range(m):
        if constant[t]:
            scored[t] = 0
    return PredictorSearch(
        entries=tuple(tuple(buf.entries) for buf in finals),
        constant=constant,
        scored=tuple(scored),
    )


def assign_probabilities(entries: Sequence[Sequence[Candidate]]) -> list[list[Predictor]]:
    """Selection probability of each predictor proportional to its COD,
    normalised separately for every target gene."""
    out = []
    for t, cands in enumerate(entries):
        if not cands:
            raise EmptyPredictorList(f"gene {t} has no predictor with positive COD")
        if any(not c.cod > 0 for c in cands):
            raise EmptyPredictorList(f"gene {t} has a predictor with non-positive COD")
        total = math.fsum(c.cod for c in cands)
        out.append([Predictor(t, c.inputs, c.weights, probability=c.cod / total, cod=c.cod) for c in cands])
    return out


def assemble_pbn(predictors: Sequence[Sequence[Predictor]], p: float = DEFAULT_PERTURBATION,
                 gene_ids: Sequence[str] = ()) -> PBN:
    for t, fs in enumerate(predictors):
        if not fs:
            raise EmptyPredictorList(f"gene {t} has no predictors")
    return PBN(tuple(tuple(fs) for fs in predictors), p, tuple(gene_ids))


def infer_pbn(b: BinaryMatrix, k: int = DEFAULT_K, n_p: int = DEFAULT_N_PREDICTORS,
              p: float = DEFAULT_PERTURBATION, threads: int = 1) -> PBN:
    """Binary matrix to PBN: search, normalise, assemble."""
    search = enumerate_predictors(b, k, n_p, threads=threads)
    for t, is_const in enumerate(search.constant):
        if is_const:
            raise ConstantTarget(f"gene {b.gene_ids[t]} is constant across samples; drop it before inference")
    missing = [b.gene_ids[t] for t, e in enumerate(search.entries) if not e]
    if missing:
        raise EmptyPredictorList(f"no input set improves on the constant predictor for: {', '.join(missing)}")
    return assemble_pbn(assign_probabilities(search.entries), p, b.gene_ids)
