"""Compiled inner loops for PBN simulation.

The draw order must stay identical to :func:`pbninfer.pbn.step`: n uniforms
for the perturbation test, then (only if nothing flipped) n uniforms for the
per-gene predictor choice.
"""

import numba
import numpy as np


@numba.njit(nogil=True, cache=True)
def step_into(rng, s, nxt, p, gene_start, cum, inputs, kcount, tables):
    n = s.shape[0]
    flipped = False
    for i in range(n):
        if rng.random() < p:
            nxt[i] = 1 - s[i]
            flipped = True
        else:
            nxt[i] = s[i]
    if flipped:
        return
    for i in range(n):
        v = rng.random()
        j = gene_start[i]
        last = gene_start[i + 1] - 1
        while j < last and v >= cum[j]:
            j += 1
        pattern = 0
        for q in range(kcount[j]):
            pattern = (pattern << 1) | s[inputs[j, q]]
        nxt[i] = tables[j, pattern]


@numba.njit(nogil=True, cache=True)
def run_bits(rng, s0, burn_in, record, p, gene_start, cum, inputs, kcount, tables):
    n = s0.shape[0]
    a = s0.copy()
    b = np.empty_like(a)
    for _ in range(burn_in):
        step_into(rng, a, b, p, gene_start, cum, inputs, kcount, tables)
        a, b = b, a
    out = np.empty((record, n), dtype=np.uint8)
    for t in range(record):
        step_into(rng, a, b, p, gene_start, cum, inputs, kcount, tables)
        a, b = b, a
        out[t, :] = a
    return out


@numba.njit(nogil=True, cache=True)
def run_codes(rng, s0, burn_in, record, p, gene_start, cum, inputs, kcount, tables):
    # gene 0 is the most significant bit of each code
    n = s0.shape[0]
    a = s0.copy()
    b = np.empty_like(a)
    for _ in range(burn_in):
        step_into(rng, a, b, p, gene_start, cum, inputs, kcount, tables)
        a, b = b, a
    out = np.empty(record, dtype=np.int64)
    for t in range(record):
        step_into(rng, a, b, p, gene_start, cum, inputs, kcount, tables)
        a, b = b, a
        code = 0
        for i in range(n):
            code = (code << 1) | a[i]
        out[t] = code
    return out
