"""Regenerate synthetic_7gene.tsv (synthetic data, not real measurements).

Three source genes are drawn at random; the other four are noisy Boolean
functions of them. Bits are turned into log-normal expression ratios.
"""

from pathlib import Path

import numpy as np

from pbninfer.discretize import BinaryMatrix
from pbninfer.ingest import serialize_expression_matrix
from pbninfer.synthetic import expression_from_binary

GENES = ["WNT5A", "pirin", "S100P", "RET1", "MART1", "HADHB", "STC2"]


def main():
    rng = np.random.default_rng(20240607)
    n = 31
    src = rng.integers(0, 2, size=(3, n))
    a, b, c = src
    targets = np.array([a & b, b | c, 1 - a, (a + b + c >= 2).astype(int)])
    noise = rng.random(targets.shape) < 0.1
    values = np.vstack([src, targets ^ noise]).astype(np.uint8)
    bm = BinaryMatrix(GENES, [f"sample{j + 1}" for j in range(n)], values)
    m = expression_from_binary(bm, rng)
    out = Path(__file__).with_name("synthetic_7gene.tsv")
    out.write_text(serialize_expression_matrix(m), encoding="utf-8")


if __name__ == "__main__":
    main()
