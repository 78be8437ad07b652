"""Probabilistic Boolean network model, stochastic update and JSON format.

Each gene carries a list of perceptron predictors with selection
probabilities. One synchronous update first flips every gene independently
with probability ``p``; if anything flipped, that perturbed state is the
result. Otherwise every gene draws one of its predictors and evaluates it on
the current state.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from . import _kernels
from .cod import predict_many
from .errors import DataError, LengthMismatch, OddRecordLength, UsageError

__all__ = [
    "FORMAT_VERSION",
    "Predictor",
    "PBN",
    "as_generator",
    "step",
    "simulate",
    "simulate_codes",
    "pbn_to_json",
    "pbn_from_json",
    "read_pbn",
    "write_pbn",
]

FORMAT_VERSION = 1
PROBABILITY_TOL = 1e-12
MAX_CODE_GENES = 62


@dataclass(frozen=True)
class Predictor:
    """One candidate function for ``target``: a perceptron over ``inputs``.

    ``weights`` holds one weight per input followed by the bias. ``cod`` is
    the score the predictor was selected with; hand-built predictors may
    leave it unset.
    """

    target: int
    inputs: tuple[int, ...]
    weights: tuple[float, ...]
    probability: float = 1.0
    cod: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(int(i) for i in self.inputs))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if any(b <= a for a, b in zip(self.inputs, self.inputs[1:])):
            raise DataError(f"predictor inputs must be strictly ascending: {self.inputs}")
        if len(self.weights) != len(self.inputs) + 1:
            raise DataError(f"{len(self.inputs)} inputs need {len(self.inputs) + 1} weights")
        if not all(math.isfinite(w) for w in self.weights):
            raise DataError("predictor weights must be finite")
        if not 0 < self.probability <= 1:
            raise DataError(f"selection probability {self.probability} outside (0, 1]")
        if self.cod is not None and not 0 < self.cod <= 1:
            raise DataError(f"COD {self.cod} outside (0, 1]")

    @property
    def k(self) -> int:
        return len(self.inputs)

    def truth_table(self) -> np.ndarray:
        """Outputs for every input pattern; ``inputs[0]`` is the high bit."""
        patterns = np.array(list(itertools.product((0, 1), repeat=self.k)), dtype=float).reshape(2 ** self.k, self.k)
        return predict_many(np.array(self.weights), patterns.T)

    def __call__(self, state) -> int:
        return int(self.truth_table()[_pattern(state, self.inputs)])


def _pattern(state, inputs) -> int:
    code = 0
    for i in inputs:
        code = (code << 1) | int(state[i])
    return code


@dataclass(frozen=True)
class _Compiled:
    gene_start: np.ndarray
    cum: np.ndarray
    inputs: np.ndarray
    kcount: np.ndarray
    tables: np.ndarray


@dataclass(frozen=True)
class PBN:
    """Per-gene predictor lists plus a per-gene, per-step flip probability."""

    functions: tuple[tuple[Predictor, ...], ...]
    perturbation: float
    gene_ids: tuple[str, ...] = field(default=())

    def __post_init__(self):
        functions = tuple(tuple(fs) for fs in self.functions)
        object.__setattr__(self, "functions", functions)
        n = len(functions)
        if n < 1:
            raise DataError("a PBN needs at least one gene")
        gene_ids = tuple(self.gene_ids) or tuple(f"g{i}" for i in range(n))
        object.__setattr__(self, "gene_ids", gene_ids)
        if len(gene_ids) != n or len(set(gene_ids)) != n:
            raise DataError("gene_ids must be unique, one per gene")
        if not 0 < self.perturbation < 0.5:
            raise UsageError(f"perturbation probability must lie in (0, 0.5), got {self.perturbation}")
        for i, fs in enumerate(functions):
            if not fs:
                raise DataError(f"gene {gene_ids[i]} has no predictors")
            total = math.fsum(f.probability for f in fs)
            if abs(total - 1) > PROBABILITY_TOL:
                raise DataError(f"gene {gene_ids[i]}: probabilities sum to {total!r}, not 1")
            for f in fs:
                if f.target != i:
                    raise DataError(f"predictor for gene {f.target} listed under gene {i}")
                if f.inputs and not 0 <= f.inputs[0] <= f.inputs[-1] < n:
                    raise DataError(f"gene {gene_ids[i]}: input index out of range in {f.inputs}")

    @property
    def n(self) -> int:
        return len(self.functions)

    @property
    def n_predictors(self) -> int:
        return sum(len(fs) for fs in self.functions)

    @cached_property
    def compiled(self) -> _Compiled:
        preds = [f for fs in self.functions for f in fs]
        kmax = max(f.k for f in preds)
        gene_start = np.zeros(self.n + 1, dtype=np.int64)
        gene_start[1:] = np.cumsum([len(fs) for fs in self.functions])
        cum = np.empty(len(preds))
        inputs = np.zeros((len(preds), max(kmax, 1)), dtype=np.int64)
        kcount = np.empty(len(preds), dtype=np.int64)
        tables = np.zeros((len(preds), 2 ** kmax), dtype=np.uint8)
        j = 0
        for fs in self.functions:
            c = np.cumsum([f.probability for f in fs])
            c[-1] = 1.0
            for f, cj in zip(fs, c):
                cum[j] = cj
                inputs[j, : f.k] = f.inputs
                kcount[j] = f.k
                tables[j, : 2 ** f.k] = f.truth_table()
                j += 1
        return _Compiled(gene_start, cum, inputs, kcount, tables)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def _check_state(net: PBN, s) -> np.ndarray:
    s = np.asarray(s)
    if s.shape != (net.n,):
        raise LengthMismatch(f"state of length {s.shape} for a {net.n}-gene network")
    if not np.all((s == 0) | (s == 1)):
        raise DataError("network state must be binary")
    return s.astype(np.uint8)


def _step(net: PBN, s: np.ndarray, rng: np.random.Generator, p: float) -> np.ndarray:
    flips = rng.random(net.n) < p
    if flips.any():
        return s ^ flips.astype(np.uint8)
    choice = rng.random(net.n)
    c = net.compiled
    nxt = np.empty_like(s)
    for i in range(net.n):
        lo, hi = c.gene_start[i], c.gene_start[i + 1]
        j = lo + min(int(np.searchsorted(c.cum[lo:hi], choice[i], side="right")), hi - lo - 1)
        nxt[i] = c.tables[j, _pattern(s, c.inputs[j, : c.kcount[j]])]
    return nxt


def step(net: PBN, s, rng: np.random.Generator) -> np.ndarray:
    """One synchronous stochastic update of state ``s``."""
    return _step(net, _check_state(net, s), rng, net.perturbation)


def _check_run(net, s0, burn_in, record):
    if burn_in < 0:
        raise UsageError("burn-in must be >= 0")
    if record < 2 or record % 2:
        raise OddRecordLength(f"record length must be even and >= 2, got {record}")
    s0 = np.zeros(net.n, dtype=np.uint8) if s0 is None else _check_state(net, s0)
    return s0


def _kernel_args(net: PBN):
    c = net.compiled
    return (float(net.perturbation), c.gene_start, c.cum, c.inputs, c.kcount, c.tables)


def simulate(net: PBN, s0=None, burn_in: int = 0, record: int = 2, rng=None) -> np.ndarray:
    """Run ``burn_in`` unrecorded steps, then record ``record`` states.

    Returns a (record, n) uint8 array. ``s0`` defaults to all zeros.
    """
    s0 = _check_run(net, s0, burn_in, record)
    rng = as_generator(rng)
    return _kernels.run_bits(rng, s0, int(burn_in), int(record), *_kernel_args(net))


def simulate_codes(net: PBN, s0=None, burn_in: int = 0, record: int = 2, rng=None) -> np.ndarray:
    """Like :func:`simulate` but each state is packed into an int64.

    Gene 0 is the most significant bit. Limited to 62 genes.
    """
    if net.n > MAX_CODE_GENES:
        raise UsageError(f"packed codes support at most {MAX_CODE_GENES} genes")
    s0 = _check_run(net, s0, burn_in, record)
    rng = as_generator(rng)
    return _kernels.run_codes(rng, s0, int(burn_in), int(record), *_kernel_args(net))


def pbn_to_dict(net: PBN) -> dict:
    return {
        "version": FORMAT_VERSION,
        "n": net.n,
        "gene_ids": list(net.gene_ids),
        "perturbation": net.perturbation,
        "functions": [
            [
                {"inputs": list(f.inputs), "weights": list(f.weights), "cod": f.cod, "probability": f.probability}
                for f in fs
            ]
            for fs in net.functions
        ],
    }


def pbn_to_json(net: PBN) -> str:
    # float repr is the shortest round-tripping decimal (at most 17 digits)
    return json.dumps(pbn_to_dict(net), indent=1) + "\n"


def pbn_from_dict(doc: dict) -> PBN:
    try:
        if doc["version"] != FORMAT_VERSION:
            raise DataError(f"unsupported PBN document version {doc['version']!r}")
        functions = [
            [
                Predictor(target=i, inputs=f["inputs"], weights=f["weights"],
                          probability=f["probability"], cod=f.get("cod"))
                for f in fs
            ]
            for i, fs in enumerate(doc["functions"])
        ]
        net = PBN(functions, float(doc["perturbation"]), tuple(doc["gene_ids"]))
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed PBN document: {exc!r}") from None
    if doc["n"] != net.n:
        raise DataError(f"document declares n={doc['n']} but lists {net.n} genes")
    return net


def pbn_from_json(text: str) -> PBN:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"PBN document is not valid JSON: {exc}") from None
    return pbn_from_dict(doc)


def read_pbn(path: str | Path) -> PBN:
    return pbn_from_json(Path(path).read_text(encoding="utf-8"))


def write_pbn(net: PBN, path: str | Path) -> None:
    Path(path).write_text(pbn_to_json(net), encoding="utf-8")


def boolean_network(inputs: Sequence[Sequence[int]], weights: Sequence[Sequence[float]], perturbation: float,
                    gene_ids: Sequence[str] = ()) -> PBN:
    """PBN with a single predictor per gene, i.e. a BN plus perturbation."""
    functions = [[Predictor(i, ins, w)] for i, (ins, w) in enumerate(zip(inputs, weights))]
    return PBN(functions, perturbation, tuple(gene_ids))
