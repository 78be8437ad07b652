"""Exact transition matrix and stationary distribution for small networks.

States are indexed by their plain binary code with gene 0 as the most
significant bit. The matrix mirrors :func:`pbninfer.pbn.step` exactly: a
move of Hamming distance h >= 1 happens by perturbation with probability
p**h * (1-p)**(n-h); with probability (1-p)**n nothing flips and each gene
independently takes the output of a randomly chosen predictor.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NetworkTooLarge, NotConverged
from .pbn import PBN
from .ssd import StateHistogram

__all__ = [
    "MAX_ORACLE_GENES",
    "state_bits",
    "activation_probabilities",
    "build_transition_matrix",
    "stationary_distribution",
    "total_variation",
]

MAX_ORACLE_GENES = 14


def state_bits(n: int) -> np.ndarray:
    """(2**n, n) array; row s holds the bits of state code s, MSB first."""
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def _selection_probabilities(net: PBN) -> list[float]:
    return [f.probability for fs in net.functions for f in fs]


def activation_probabilities(net: PBN) -> np.ndarray:
    """(2**n, n) array: P(gene i's chosen predictor outputs 1 | state s)."""
    n = net.n
    bits = state_bits(n).astype(np.int64)
    c = net.compiled
    probs = _selection_probabilities(net)
    q = np.zeros((2 ** n, n))
    for i in range(n):
        for j in range(c.gene_start[i], c.gene_start[i + 1]):
            pattern = np.zeros(2 ** n, dtype=np.int64)
            for g in c.inputs[j, : c.kcount[j]]:
                pattern = (pattern << 1) | bits[:, g]
            q[:, i] += probs[j] * c.tables[j, pattern]
    return q


def build_transition_matrix(net: PBN, max_genes: int = MAX_ORACLE_GENES) -> np.ndarray:
    """Dense row-stochastic matrix P[s, s'] over all 2**n states."""
    n = net.n
    if n > max_genes:
        raise NetworkTooLarge(f"{n} genes exceed the exact-oracle limit of {max_genes}")
    p = net.perturbation
    q = activation_probabilities(net)
    bits = state_bits(n)
    size = 2 ** n
    P = np.full((size, size), (1 - p) ** n)
    for i in range(n):
        on = bits[:, i].astype(bool)
        P[:, on] *= q[:, i, None]
        P[:, ~on] *= 1 - q[:, i, None]
    codes = np.arange(size, dtype=np.int64)
    hamming = _popcount(codes[:, None] ^ codes[None, :])
    flip = np.where(hamming > 0, p ** hamming * (1 - p) ** (n - hamming), 0.0)
    return P + flip


def _popcount(x: np.ndarray) -> np.ndarray:
    x = x.copy()
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x >>= 1
    return count


def stationary_distribution(P: np.ndarray, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Power iteration from the uniform vector until ||pi P - pi||_1 < tol."""
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise DimensionMismatch(f"transition matrix must be square, got {P.shape}")
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = pi @ P
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            return nxt
        pi = nxt
    raise NotConverged(f"power iteration did not reach tolerance {tol} in {max_iter} iterations")


def total_variation(a, b) -> float:
    """Half the L1 distance between two distributions over the same states.

    Histograms are normalised and re-indexed from Gray integers to binary
    state codes first.
    """
    a = a.to_distribution() if isinstance(a, StateHistogram) else np.asarray(a, dtype=float)
    b = b.to_distribution() if isinstance(b, StateHistogram) else np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"distributions of shape {a.shape} and {b.shape}")
    return float(0.5 * np.abs(a - b).sum())
