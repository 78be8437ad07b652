"""Steady-state analysis of recorded trajectories.

States are shown as Gray-decoded integers: the state's bit vector (gene 0
as the most significant bit) is read as a reflected binary Gray code, so
neighbouring histogram positions differ in a single gene.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EmptyHistogram, LengthMismatch, OddRecordLength, TooFewSamples, UsageError
from .pbn import simulate, simulate_codes

__all__ = [
    "StateHistogram",
    "KsReport",
    "gray_encode",
    "gray_decode",
    "gray_to_int",
    "int_to_gray_bits",
    "gray_decode_array",
    "states_to_codes",
    "histogram",
    "histogram_from_codes",
    "ks_critical_value",
    "ks_from_counts",
    "ks_two_half_test",
    "half_counts",
    "emit_histogram",
    "format_ks_report",
    "parse_histogram",
    "ChainSummary",
    "summarize_codes",
    "summarize_states",
    "pooled_report",
    "estimate_ssd",
]

DEFAULT_ALPHA = 0.05
DEFAULT_SUBSAMPLE = 10


def gray_encode(i: int) -> int:
    return i ^ (i >> 1)


def gray_decode(g: int) -> int:
    shift = 1
    while g >> shift:
        g ^= g >> shift
        shift <<= 1
    return g


def _bits_to_int(bits: Iterable[int]) -> int:
    code = 0
    for b in bits:
        code = (code << 1) | int(b)
    return code


def gray_to_int(bits: Sequence[int]) -> int:
    """Decode a state's bits (index 0 most significant) as a Gray code."""
    return gray_decode(_bits_to_int(bits))


def int_to_gray_bits(i: int, n: int) -> tuple[int, ...]:
    """Inverse of :func:`gray_to_int` for an ``n``-gene state."""
    g = gray_encode(i)
    return tuple((g >> (n - 1 - j)) & 1 for j in range(n))


def gray_decode_array(codes: np.ndarray) -> np.ndarray:
    """Vectorised :func:`gray_decode` for non-negative int64 codes."""
    g = np.array(codes, dtype=np.int64)
    for shift in (1, 2, 4, 8, 16, 32):
        g ^= g >> shift
    return g


def states_to_codes(states, n: int | None = None) -> np.ndarray:
    """Pack an (N, n) array of bits into int64 codes, gene 0 highest."""
    arr = np.asarray(states, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if arr.ndim != 2 or (n is not None and arr.shape[1] != n):
        raise LengthMismatch(f"states have shape {arr.shape}, expected (N, {n})")
    if arr.shape[1] > 62:
        raise UsageError("packed codes support at most 62 genes")
    weights = np.left_shift(1, np.arange(arr.shape[1] - 1, -1, -1, dtype=np.int64))
    return arr @ weights


@dataclass
class StateHistogram:
    """Visit counts keyed by Gray-decoded state integer."""

    n: int
    counts: dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __add__(self, other: "StateHistogram") -> "StateHistogram":
        if other.n != self.n:
            raise LengthMismatch(f"cannot merge {self.n}-gene and {other.n}-gene histograms")
        merged = Counter(self.counts)
        merged.update(other.counts)
        return StateHistogram(self.n, dict(sorted(merged.items())))

    def probabilities(self) -> dict[int, float]:
        total = self.total
        if total == 0:
            raise EmptyHistogram("histogram is empty")
        return {g: c / total for g, c in sorted(self.counts.items())}

    def to_distribution(self) -> np.ndarray:
        """Probability vector over plain binary state codes (length 2**n)."""
        total = self.total
        if total == 0:
            raise EmptyHistogram("histogram is empty")
        out = np.zeros(2 ** self.n)
        for g, c in self.counts.items():
            out[gray_encode(g)] = c / total
        return out


def _counts(values: np.ndarray) -> dict[int, int]:
    keys, cnt = np.unique(values, return_counts=True)
    return {int(k): int(c) for k, c in zip(keys, cnt)}


def histogram_from_codes(codes: np.ndarray, n: int) -> StateHistogram:
    """Histogram from plain binary state codes (as produced by simulation)."""
    return StateHistogram(n, _counts(gray_decode_array(codes)))


def histogram(states, n: int) -> StateHistogram:
    states = list(states) if not isinstance(states, np.ndarray) else states
    if len(states) == 0:
        return StateHistogram(n, {})
    if any(len(s) != n for s in states):
        raise LengthMismatch(f"every state must have {n} genes")
    if n <= 62:
        return histogram_from_codes(states_to_codes(states, n), n)
    return StateHistogram(n, dict(sorted(Counter(gray_to_int(s) for s in states).items())))


@dataclass(frozen=True)
class KsReport:
    statistic: float
    n1: int
    n2: int
    alpha: float
    critical: float
    converged: bool


def ks_critical_value(n1: int, n2: int, alpha: float = DEFAULT_ALPHA) -> float:
    """Asymptotic two-sample critical value for significance ``alpha``."""
    if not 0 < alpha < 1:
        raise UsageError("alpha must lie in (0, 1)")
    c = math.sqrt(-math.log(alpha / 2) / 2)
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def ks_from_counts(a: Mapping[int, int], b: Mapping[int, int], alpha: float = DEFAULT_ALPHA) -> KsReport:
    """Two-sample KS test from value -> count tables."""
    n1, n2 = sum(a.values()), sum(b.values())
    if n1 < 1 or n2 < 1:
        raise TooFewSamples("both samples must be non-empty")
    keys = sorted(set(a) | set(b))
    ca = np.cumsum([a.get(k, 0) for k in keys], dtype=np.int64)
    cb = np.cumsum([b.get(k, 0) for k in keys], dtype=np.int64)
    # integer cross-multiplication keeps D exact up to the final division
    d = int(np.max(np.abs(ca * n2 - cb * n1))) / (n1 * n2)
    crit = ks_critical_value(n1, n2, alpha)
    return KsReport(d, n1, n2, alpha, crit, d < crit)


def half_counts(values: np.ndarray, subsample: int) -> tuple[dict[int, int], dict[int, int]]:
    """Counts of the subsampled first and second halves of ``values``."""
    N = len(values)
    if N % 2:
        raise OddRecordLength(f"record length {N} is odd")
    if subsample < 1:
        raise UsageError("subsample interval must be >= 1")
    half = N // 2
    return _counts(values[:half:subsample]), _counts(values[half::subsample])


def ks_two_half_test(states, subsample: int = DEFAULT_SUBSAMPLE, alpha: float = DEFAULT_ALPHA,
                     n: int | None = None) -> KsReport:
    """Compare the first and second half of a trajectory.

    ``states`` is an (N, n) bit array or list of states. Each half keeps
    entries 0, G, 2G, ... of itself.
    """
    states = states if isinstance(states, np.ndarray) else np.asarray(list(states))
    N = len(states)
    if N % 2:
        raise OddRecordLength(f"record length {N} is odd")
    if subsample < 1:
        raise UsageError("subsample interval must be >= 1")
    if N // (2 * subsample) < 1:
        raise TooFewSamples(f"{N} states leave nothing after subsampling every {subsample}")
    if states.ndim == 2 and states.shape[1] > 62:
        values = np.array([gray_to_int(s) for s in states], dtype=object)
    else:
        values = gray_decode_array(states_to_codes(states, n))
    a, b = half_counts(values, subsample)
    return ks_from_counts(a, b, alpha)


def emit_histogram(h: StateHistogram, header: Mapping[str, object] | None = None) -> str:
    """CSV lines ``state,count,probability`` sorted by Gray integer."""
    total = h.total
    if total == 0:
        raise EmptyHistogram("histogram is empty")
    lines = []
    if header:
        lines.append("# " + " ".join(f"{k}={v}" for k, v in header.items()))
    lines.append("state,count,probability")
    for g, c in sorted(h.counts.items()):
        lines.append(f"{g},{c},{c / total!r}")
    return "\n".join(lines) + "\n"


def parse_histogram(text: str) -> tuple[dict[str, str], StateHistogram]:
    """Read back :func:`emit_histogram` output; ``n`` must be in the header."""
    header: dict[str, str] = {}
    counts: dict[int, int] = {}
    for line in text.splitlines():
        if line.startswith("#"):
            for item in line[1:].split():
                key, _, value = item.partition("=")
                header[key] = value
        elif line and not line.startswith("state,"):
            state, count, _ = line.split(",")
            counts[int(state)] = int(count)
    return header, StateHistogram(int(header["n"]), counts)


def format_ks_report(r: KsReport) -> str:
    return (
        f"D={r.statistic!r}\n"
        f"n1={r.n1}\n"
        f"n2={r.n2}\n"
        f"alpha={r.alpha!r}\n"
        f"critical={r.critical!r}\n"
        f"converged={str(r.converged).lower()}\n"
    )


@dataclass
class ChainSummary:
    """Mergeable per-chain result: full histogram plus subsampled halves."""

    hist: StateHistogram
    first: Counter
    second: Counter

    def __add__(self, other: "ChainSummary") -> "ChainSummary":
        return ChainSummary(self.hist + other.hist, self.first + other.first, self.second + other.second)


def summarize_codes(codes: np.ndarray, n: int, subsample: int = DEFAULT_SUBSAMPLE) -> ChainSummary:
    """Summarise one recorded chain given as plain binary state codes."""
    gray = gray_decode_array(codes)
    a, b = half_counts(gray, subsample)
    return ChainSummary(StateHistogram(n, _counts(gray)), Counter(a), Counter(b))


def summarize_states(states: np.ndarray, subsample: int = DEFAULT_SUBSAMPLE) -> ChainSummary:
    """Like :func:`summarize_codes` for an (N, n) bit array of any width."""
    n = states.shape[1]
    if n <= 62:
        return summarize_codes(states_to_codes(states, n), n, subsample)
    gray = np.array([gray_to_int(s) for s in states], dtype=object)
    a, b = half_counts(gray, subsample)
    return ChainSummary(StateHistogram(n, _counts(gray)), Counter(a), Counter(b))


def pooled_report(summary: ChainSummary, alpha: float = DEFAULT_ALPHA) -> KsReport:
    """KS test of all first halves against all second halves."""
    return ks_from_counts(summary.first, summary.second, alpha)


def estimate_ssd(net, burn_in: int, record: int, repeats: int = 1, subsample: int = DEFAULT_SUBSAMPLE,
                 alpha: float = DEFAULT_ALPHA, seed: int = 0, threads: int = 1,
                 s0=None) -> tuple[StateHistogram, KsReport]:
    """Monte Carlo steady-state estimate from ``repeats`` independent chains.

    Chain r uses the r-th child of ``SeedSequence(seed)``; histograms and
    half-split counts are pooled, so the result does not depend on
    ``threads``.
    """
    if repeats < 1 or threads < 1:
        raise UsageError("repeats and threads must be >= 1")
    if record // (2 * subsample) < 1:
        raise TooFewSamples(f"{record} samples leave nothing after subsampling every {subsample}")
    seeds = np.random.SeedSequence(seed).spawn(repeats)

    def one(child):
        rng = np.random.default_rng(child)
        if net.n <= 62:
            return summarize_codes(simulate_codes(net, s0, burn_in, record, rng), net.n, subsample)
        return summarize_states(simulate(net, s0, burn_in, record, rng), subsample)

    if threads == 1:
        parts = [one(c) for c in seeds]
    else:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(one, seeds))
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total.hist, pooled_report(total, alpha)
