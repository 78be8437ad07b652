"""Command line interface.

Subcommands ``discretize``, ``infer``, ``simulate``, ``analyze``,
``oracle`` and ``pipeline`` each write their outputs into ``--out``.
Settings are layered: built-in defaults, then a ``--config`` file of flat
``key=value`` lines, then flags given explicitly on the command line.

Exit status: 0 success, 1 usage error, 2 data error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .discretize import BinaryMatrix, ThresholdMethod, discretize, read_binary_matrix, serialize_binary_matrix
from .errors import DataError, NumericError, PbnError, UsageError
from .infer import DEFAULT_K, DEFAULT_N_PREDICTORS, DEFAULT_PERTURBATION, infer_pbn
from .ingest import read_expression_matrix, select_genes
from .oracle import build_transition_matrix, stationary_distribution
from .pbn import MAX_CODE_GENES, read_pbn, simulate_codes, write_pbn
from .ssd import (
    DEFAULT_ALPHA,
    DEFAULT_SUBSAMPLE,
    emit_histogram,
    estimate_ssd,
    format_ks_report,
    gray_decode,
    pooled_report,
    summarize_codes,
)

log = logging.getLogger("pbninfer")

BINARY_FILE = "binary.tsv"
PBN_FILE = "pbn.json"
HISTOGRAM_FILE = "histogram.csv"
KS_FILE = "ks.txt"
TRAJECTORY_FILE = "trajectory.npz"
STATIONARY_FILE = "stationary.csv"
MANIFEST_FILE = "manifest.cfg"


@dataclass
class PipelineConfig:
    """Every setting of a run. Defaults are desk-scale; full-scale runs use
    burn_in=10**6, samples=4*10**6, repeats=100."""

    input: str | None = None
    genes: str | None = None
    method: str = ThresholdMethod.MEDIAN.value
    k: int = DEFAULT_K
    n_predictors: int = DEFAULT_N_PREDICTORS
    perturbation: float = DEFAULT_PERTURBATION
    burn_in: int = 10_000
    samples: int = 40_000
    subsample: int = DEFAULT_SUBSAMPLE
    repeats: int = 1
    alpha: float = DEFAULT_ALPHA
    seed: int = 0
    threads: int = 1
    out: str = "."
    # single-stage inputs
    binary: str | None = None
    pbn: str | None = None
    trajectory: str | None = None
    gray: bool = False

    def validate(self) -> None:
        ThresholdMethod.parse(self.method)
        checks = [
            (self.k >= 1, "k must be >= 1"),
            (self.n_predictors >= 1, "n-predictors must be >= 1"),
            (0 < self.perturbation < 0.5, "perturbation must lie in (0, 0.5)"),
            (self.burn_in >= 0, "burn-in must be >= 0"),
            (self.samples >= 2 and self.samples % 2 == 0, "samples must be even and >= 2"),
            (self.subsample >= 1, "subsample must be >= 1"),
            (self.samples // (2 * max(self.subsample, 1)) >= 1, "samples too small for the subsample interval"),
            (self.repeats >= 1, "repeats must be >= 1"),
            (0 < self.alpha < 1, "alpha must lie in (0, 1)"),
            (self.seed >= 0, "seed must be >= 0"),
            (self.threads >= 1, "threads must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise UsageError(message)

    def manifest(self) -> str:
        lines = [f"# pbninfer {__version__}"]
        for key, value in asdict(self).items():
            if value is None:
                continue
            lines.append(f"{key}={str(value).lower() if isinstance(value, bool) else value}")
        return "\n".join(lines) + "\n"


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return raw.lower() in ("true", "1", "yes")
    except ValueError:
        raise UsageError(f"config key {key!r}: cannot parse {raw!r}") from None
    return raw


def read_config(path: str | Path) -> dict:
    """Flat ``key=value`` file; keys use the long flag names (- or _)."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELD_TYPES:
            raise UsageError(f"{path}:{lineno}: unrecognised config line {line!r}")
        out[key] = _coerce(key, value.strip())
    return out


def parse_gene_list(spec: str) -> list[str]:
    """Gene ids from a file (one per line) or a comma-separated list."""
    path = Path(spec)
    if path.is_file():
        ids = path.read_text(encoding="utf-8").split()
    else:
        ids = [g.strip() for g in spec.split(",") if g.strip()]
    if not ids:
        raise UsageError("empty gene list")
    return ids


def _load_expression_binary(cfg: PipelineConfig) -> BinaryMatrix:
    if cfg.binary:
        b = read_binary_matrix(cfg.binary)
        if cfg.genes:
            wanted = parse_gene_list(cfg.genes)
            index = {g: i for i, g in enumerate(b.gene_ids)}
            missing = [g for g in wanted if g not in index]
            if missing:
                raise DataError(f"unknown gene id {missing[0]!r}")
            rows = [index[g] for g in wanted]
            b = BinaryMatrix(wanted, b.sample_ids, b.values[rows])
        return b
    if not cfg.input:
        raise UsageError("--input (or --binary) is required")
    m = read_expression_matrix(cfg.input)
    if cfg.genes:
        m = select_genes(m, parse_gene_list(cfg.genes))
    return discretize(m, cfg.method)


def _histogram_header(cfg: PipelineConfig, n: int) -> dict:
    return {"n": n, "T": cfg.burn_in, "N": cfg.samples, "G": cfg.subsample, "seed": cfg.seed, "R": cfg.repeats}


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text, encoding="utf-8")
    log.info("wrote %s", path)
    return path


def run_discretize(cfg: PipelineConfig) -> BinaryMatrix:
    b = _load_expression_binary(cfg)
    _write(Path(cfg.out), BINARY_FILE, serialize_binary_matrix(b))
    return b


def run_infer(cfg: PipelineConfig):
    b = _load_expression_binary(cfg)
    net = infer_pbn(b, cfg.k, cfg.n_predictors, cfg.perturbation, threads=cfg.threads)
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    write_pbn(net, Path(cfg.out) / PBN_FILE)
    return net


def _require(value, flag):
    if not value:
        raise UsageError(f"{flag} is required")
    return value


def run_simulate(cfg: PipelineConfig) -> Path:
    net = read_pbn(_require(cfg.pbn, "--pbn"))
    if net.n > MAX_CODE_GENES:
        raise UsageError(f"trajectory files hold at most {MAX_CODE_GENES} genes; use 'pipeline' instead")
    codes = np.empty((cfg.repeats, cfg.samples), dtype=np.int64)
    for r, child in enumerate(np.random.SeedSequence(cfg.seed).spawn(cfg.repeats)):
        codes[r] = simulate_codes(net, None, cfg.burn_in, cfg.samples, np.random.default_rng(child))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / TRAJECTORY_FILE
    np.savez_compressed(path, codes=codes, n=net.n, burn_in=cfg.burn_in, seed=cfg.seed)
    log.info("wrote %s", path)
    return path


def run_analyze(cfg: PipelineConfig):
    try:
        with np.load(_require(cfg.trajectory, "--trajectory")) as data:
            codes, n = data["codes"], int(data["n"])
            burn_in, seed = int(data["burn_in"]), int(data["seed"])
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"cannot read trajectory: {exc}") from None
    codes = np.atleast_2d(codes)
    summary = None
    for chain in codes:
        part = summarize_codes(chain, n, cfg.subsample)
        summary = part if summary is None else summary + part
    report = pooled_report(summary, cfg.alpha)
    header = {"n": n, "T": burn_in, "N": codes.shape[1], "G": cfg.subsample, "seed": seed, "R": codes.shape[0]}
    out = Path(cfg.out)
    _write(out, HISTOGRAM_FILE, emit_histogram(summary.hist, header))
    _write(out, KS_FILE, format_ks_report(report))
    return summary.hist, report


def run_oracle(cfg: PipelineConfig) -> np.ndarray:
    net = read_pbn(_require(cfg.pbn, "--pbn"))
    pi = stationary_distribution(build_transition_matrix(net))
    rows = [(gray_decode(s) if cfg.gray else s, float(prob)) for s, prob in enumerate(pi)]
    lines = [f"# n={net.n} index={'gray' if cfg.gray else 'binary'}", "state,count,probability"]
    lines += [f"{s},,{prob!r}" for s, prob in sorted(rows)]
    _write(Path(cfg.out), STATIONARY_FILE, "\n".join(lines) + "\n")
    return pi


def run_pipeline(cfg: PipelineConfig) -> dict[str, Path]:
    """Discretise, infer, simulate and analyse; write every artefact."""
    cfg.validate()
    out = Path(cfg.out)
    written = {"manifest": _write(out, MANIFEST_FILE, cfg.manifest())}
    try:
        b = _load_expression_binary(cfg)
    except PbnError as exc:
        raise type(exc)(f"discretize: {exc}") from exc
    written["binary"] = _write(out, BINARY_FILE, serialize_binary_matrix(b))
    try:
        net = infer_pbn(b, cfg.k, cfg.n_predictors, cfg.perturbation, threads=cfg.threads)
    except PbnError as exc:
        raise type(exc)(f"infer: {exc}") from exc
    write_pbn(net, out / PBN_FILE)
    written["pbn"] = out / PBN_FILE
    hist, report = estimate_ssd(net, cfg.burn_in, cfg.samples, cfg.repeats, cfg.subsample,
                                cfg.alpha, cfg.seed, cfg.threads)
    written["histogram"] = _write(out, HISTOGRAM_FILE, emit_histogram(hist, _histogram_header(cfg, net.n)))
    written["ks"] = _write(out, KS_FILE, format_ks_report(report))
    return written


# ---------------------------------------------------------------- argparse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_FLAGS = {
    "input": dict(help="tab-separated expression matrix"),
    "binary": dict(help="already discretised 0/1 matrix (instead of --input)"),
    "genes": dict(help="gene subset: file with one id per line, or comma-separated ids"),
    "method": dict(choices=["mean", "median", "kmeans-log", "kmeans_log"], help="threshold method"),
    "k": dict(type=int, help="input genes per predictor"),
    "n-predictors": dict(type=int, help="predictors kept per gene"),
    "perturbation": dict(type=float, help="per-gene flip probability per step"),
    "burn-in": dict(type=int, help="unrecorded steps (T)"),
    "samples": dict(type=int, help="recorded steps (N, even)"),
    "subsample": dict(type=int, help="KS subsampling interval (G)"),
    "repeats": dict(type=int, help="independent chains (R)"),
    "alpha": dict(type=float, help="KS significance level"),
    "seed": dict(type=int, help="master random seed"),
    "threads": dict(type=int, help="worker threads"),
    "out": dict(help="output directory"),
    "pbn": dict(help="PBN JSON document"),
    "trajectory": dict(help="trajectory .npz written by 'simulate'"),
    "gray": dict(action="store_true", default=None, help="index states by Gray-decoded integer"),
}

_COMMANDS = {
    "discretize": (run_discretize, ["input", "binary", "genes", "method", "out"]),
    "infer": (run_infer, ["input", "binary", "genes", "method", "k", "n-predictors", "perturbation",
                          "threads", "out"]),
    "simulate": (run_simulate, ["pbn", "burn-in", "samples", "repeats", "seed", "out"]),
    "analyze": (run_analyze, ["trajectory", "subsample", "alpha", "out"]),
    "oracle": (run_oracle, ["pbn", "gray", "out"]),
    "pipeline": (run_pipeline, ["input", "binary", "genes", "method", "k", "n-predictors", "perturbation",
                                "burn-in", "samples", "subsample", "repeats", "alpha", "seed", "threads", "out"]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pbninfer", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"pbninfer {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, flags) in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value settings file")
        p.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        for flag in flags:
            opts = dict(_FLAGS[flag])
            opts.setdefault("default", None)
            p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), **opts)
    return parser


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    settings = read_config(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if "method" in settings:
        settings["method"] = ThresholdMethod.parse(settings["method"]).value
    return PipelineConfig(**settings)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    action, _ = _COMMANDS[args.command]
    try:
        cfg = config_from_args(args)
        cfg.validate()
        action(cfg)
    except UsageError as exc:
        print(f"pbninfer {args.command}: usage error: {exc}", file=sys.stderr)
        return 1
    except NumericError as exc:
        print(f"pbninfer {args.command}: {exc}", file=sys.stderr)
        return 3
    except (DataError, OSError) as exc:
        print(f"pbninfer {args.command}: data error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
