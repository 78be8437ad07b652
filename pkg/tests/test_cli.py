import subprocess
import sys

import numpy as np
import pytest

from pbninfer.cli import PipelineConfig, config_from_args, build_parser, main, read_config
from pbninfer.errors import UsageError
from pbninfer.pbn import read_pbn
from pbninfer.ssd import parse_histogram

SMALL = ["--burn-in", "200", "--samples", "2000"]


def test_defaults():
    cfg = PipelineConfig()
    assert (cfg.method, cfg.k, cfg.n_predictors, cfg.subsample, cfg.alpha, cfg.perturbation) == \
        ("median", 3, 10, 10, 0.05, 0.001)
    assert (cfg.burn_in, cfg.samples) == (10_000, 40_000)


def test_pipeline_writes_everything(tmp_path, fixture_path):
    out = tmp_path / "run"
    assert main(["pipeline", "--input", str(fixture_path), "--out", str(out), *SMALL]) == 0
    for name in ("manifest.cfg", "binary.tsv", "pbn.json", "histogram.csv", "ks.txt"):
        assert (out / name).is_file()
    net = read_pbn(out / "pbn.json")
    assert net.n == 7 and all(len(fs) <= 10 for fs in net.functions)
    header, hist = parse_histogram((out / "histogram.csv").read_text())
    assert header == {"n": "7", "T": "200", "N": "2000", "G": "10", "seed": "0", "R": "1"}
    assert hist.total == 2000


def test_manifest_reproduces_run(tmp_path, fixture_path):
    a = tmp_path / "a"
    assert main(["pipeline", "--input", str(fixture_path), "--out", str(a), "--seed", "4", *SMALL]) == 0
    b = tmp_path / "b"
    assert main(["pipeline", "--config", str(a / "manifest.cfg"), "--out", str(b)]) == 0
    for name in ("pbn.json", "histogram.csv", "ks.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_stages_chain(tmp_path, fixture_path):
    out = str(tmp_path)
    assert main(["discretize", "--input", str(fixture_path), "--method", "kmeans-log", "--out", out]) == 0
    assert main(["infer", "--binary", f"{out}/binary.tsv", "--k", "2", "--n-predictors", "3",
                 "--perturbation", "0.01", "--out", out]) == 0
    net = read_pbn(tmp_path / "pbn.json")
    assert all(f.k == 2 for fs in net.functions for f in fs) and net.perturbation == 0.01
    assert main(["simulate", "--pbn", f"{out}/pbn.json", "--repeats", "2", *SMALL, "--out", out]) == 0
    with np.load(tmp_path / "trajectory.npz") as data:
        assert data["codes"].shape == (2, 2000)
    assert main(["analyze", "--trajectory", f"{out}/trajectory.npz", "--out", out]) == 0
    header, hist = parse_histogram((tmp_path / "histogram.csv").read_text())
    assert hist.total == 4000 and header["R"] == "2"
    assert "n1=200\n" in (tmp_path / "ks.txt").read_text()
    assert main(["oracle", "--pbn", f"{out}/pbn.json", "--out", out]) == 0
    lines = (tmp_path / "stationary.csv").read_text().splitlines()
    assert lines[1] == "state,count,probability" and len(lines) == 2 + 2 ** 7
    assert abs(sum(float(l.split(",")[2]) for l in lines[2:]) - 1) < 1e-12


def test_gene_subset(tmp_path, fixture_path):
    out = str(tmp_path)
    assert main(["discretize", "--input", str(fixture_path), "--genes", "pirin,WNT5A", "--out", out]) == 0
    rows = (tmp_path / "binary.tsv").read_text().splitlines()
    assert [r.split("\t")[0] for r in rows[1:]] == ["pirin", "WNT5A"]


def test_config_layering(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# comment\nk=2\nn-predictors=4\nseed=9\n")
    args = build_parser().parse_args(["pipeline", "--config", str(cfg_file), "--seed", "3"])
    cfg = config_from_args(args)
    assert (cfg.k, cfg.n_predictors, cfg.seed, cfg.samples) == (2, 4, 3, 40_000)


def test_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense=1\n")
    with pytest.raises(UsageError):
        read_config(bad)
    bad.write_text("k=three\n")
    with pytest.raises(UsageError):
        read_config(bad)


def test_exit_codes(tmp_path, fixture_path, capsys):
    out = str(tmp_path)
    assert main(["pipeline", "--input", str(fixture_path), "--samples", "2001", "--out", out]) == 1
    assert not (tmp_path / "pbn.json").exists()
    assert main(["pipeline", "--input", str(fixture_path), "--k", "7", *SMALL, "--out", out]) == 1
    bad = tmp_path / "neg.tsv"
    bad.write_text("gene\ts1\ts2\nA\t1.0\t-2\n")
    assert main(["discretize", "--input", str(bad), "--out", out]) == 2
    assert main(["discretize", "--input", str(tmp_path / "missing.tsv"), "--out", out]) == 2
    assert main(["oracle", "--pbn", str(fixture_path), "--out", out]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["pipeline", "--no-such-flag"])
    assert exc.value.code == 1
    assert "usage error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pbninfer", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("pbninfer ")
