"""Random networks and planted data sets for testing and demos."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .discretize import BinaryMatrix
from .ingest import ExpressionMatrix
from .pbn import PBN, Predictor

__all__ = [
    "PLANTED_FUNCTIONS",
    "PlantedGene",
    "random_pbn",
    "constant_pbn",
    "planted_binary_matrix",
    "expression_from_binary",
]

# All linearly separable. Least-squares fitting with a 0.5 cutoff still
# misses "or3" (the fit is exactly 0.5 on 000 under a uniform design) and
# "and3" whenever 111 is under-represented.
PLANTED_FUNCTIONS = {
    "identity": (1, lambda x: x[0]),
    "negation": (1, lambda x: 1 - x[0]),
    "and": (2, lambda x: x[0] & x[1]),
    "or": (2, lambda x: x[0] | x[1]),
    "and3": (3, lambda x: x[0] & x[1] & x[2]),
    "or3": (3, lambda x: x[0] | x[1] | x[2]),
    "majority": (3, lambda x: int(x[0] + x[1] + x[2] >= 2)),
}


def random_pbn(n: int, rng: np.random.Generator, max_k: int = 3, max_predictors: int = 4,
               perturbation: float = 0.01) -> PBN:
    """PBN with random perceptron predictors.

    Each gene gets 1..max_predictors predictors over 1..max_k distinct other
    genes, weights uniform on [-1, 1], bias uniform on [0, 1] and selection
    probabilities proportional to uniform(0.1, 1) scores.
    """
    functions = []
    for i in range(n):
        others = [g for g in range(n) if g != i]
        count = int(rng.integers(1, max_predictors + 1))
        scores = rng.uniform(0.1, 1.0, size=count)
        probs = scores / scores.sum()
        fs = []
        for j in range(count):
            k = int(rng.integers(1, min(max_k, len(others)) + 1))
            inputs = sorted(int(g) for g in rng.choice(others, size=k, replace=False))
            w = list(rng.uniform(-1, 1, size=k)) + [float(rng.uniform(0, 1))]
            fs.append(Predictor(i, inputs, w, probability=float(probs[j])))
        fs = _fix_sum(fs)
        functions.append(fs)
    return PBN(functions, perturbation)


def _fix_sum(fs: list[Predictor]) -> list[Predictor]:
    # put the rounding residue on the last predictor so the list sums to 1
    head = sum(f.probability for f in fs[:-1])
    last = fs[-1]
    fs[-1] = Predictor(last.target, last.inputs, last.weights, probability=1.0 - head, cod=last.cod)
    return fs


def constant_pbn(n: int, value: int, perturbation: float = 0.01) -> PBN:
    """Every gene is driven towards ``value`` regardless of the state."""
    bias = 1.0 if value else 0.0
    functions = [[Predictor(i, [], [bias])] for i in range(n)]
    return PBN(functions, perturbation)


@dataclass(frozen=True)
class PlantedGene:
    target: int
    function: str
    inputs: tuple[int, ...]


def planted_binary_matrix(n_sources: int, planted: Sequence[tuple[str, Sequence[int]]], n_samples: int,
                          rng: np.random.Generator, design: str = "factorial",
                          max_tries: int = 1000) -> tuple[BinaryMatrix, list[PlantedGene]]:
    """Source genes followed by one target gene per planted function.

    ``planted`` lists (function name, source indices). With
    ``design="factorial"`` the samples are ``n_samples`` distinct source
    patterns drawn without replacement, which keeps pattern frequencies as
    even as the sample count allows. ``design="random"`` draws source bits
    independently and redraws until every planted input set shows all of
    its input patterns.
    """
    if design == "factorial":
        if n_samples > 2 ** n_sources:
            raise ValueError(f"{n_samples} distinct patterns need more than {n_sources} sources")
        chosen = rng.choice(2 ** n_sources, size=n_samples, replace=False)
        shifts = np.arange(n_sources - 1, -1, -1)
        src = ((chosen[None, :] >> shifts[:, None]) & 1).astype(np.uint8)
    elif design == "random":
        for _ in range(max_tries):
            src = rng.integers(0, 2, size=(n_sources, n_samples)).astype(np.uint8)
            if all(_all_patterns(src[list(ins)]) for _, ins in planted):
                break
        else:
            raise RuntimeError("could not draw sources covering every input pattern")
    else:
        raise ValueError(f"unknown design {design!r}")
    if not all(_all_patterns(src[list(ins)]) for _, ins in planted):
        raise RuntimeError("sample design misses an input pattern")
    rows = [src]
    genes = []
    for t, (name, ins) in enumerate(planted):
        arity, fn = PLANTED_FUNCTIONS[name]
        if len(ins) != arity:
            raise ValueError(f"{name} takes {arity} inputs, got {len(ins)}")
        rows.append(np.array([fn(src[list(ins), s]) for s in range(n_samples)], dtype=np.uint8)[None])
        genes.append(PlantedGene(n_sources + t, name, tuple(sorted(ins))))
    values = np.vstack(rows)
    gene_ids = [f"s{i}" for i in range(n_sources)] + [f"t{i}_{g.function}" for i, g in enumerate(genes)]
    sample_ids = [f"sample{j}" for j in range(n_samples)]
    return BinaryMatrix(gene_ids, sample_ids, values), genes


def _all_patterns(x: np.ndarray) -> bool:
    seen = {tuple(col) for col in x.T}
    return len(seen) == 2 ** x.shape[0]


def expression_from_binary(b: BinaryMatrix, rng: np.random.Generator, spread: float = 0.8) -> ExpressionMatrix:
    """Log-normal ratios around 1: above 1 for on bits, below 1 for off bits."""
    sign = np.where(b.values == 1, 1.0, -1.0)
    logs = sign * (0.3 + rng.exponential(spread, size=b.values.shape))
    return ExpressionMatrix(b.gene_ids, b.sample_ids, np.exp(logs))


def all_patterns(k: int) -> np.ndarray:
    """(k, 2**k) matrix of every k-bit input pattern as columns."""
    return np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.uint8).reshape(-1, k).T
