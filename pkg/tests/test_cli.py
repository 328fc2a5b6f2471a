import os

import numpy as np
import pytest

from sclrl.cli import main, read_embeddings
from sclrl.config import RunConfig, load_config, set_option, validate
from sclrl.datasets import export_generic
from sclrl.errors import ConfigError
from sclrl.synthetic import planted_partition
from helpers import random_graph


@pytest.fixture()
def small_dataset(tmp_path):
    g = planted_partition(num_nodes=100, num_blocks=2, p_in=0.12, p_out=0.02,
                          feat_dim=6, noise=0.1, seed=3)
    edges = tmp_path / "edges.txt"
    feats = tmp_path / "feats.csv"
    export_generic(g, edges, feats)
    return edges, feats


def _base_args(tmp_path, edges, feats, out="run"):
    return ["--set", f"edges_path={edges}", "--set", f"features_path={feats}",
            "--set", f"out_dir={tmp_path / out}",
            "--set", "epochs=2", "--set", "batch_size=16",
            "--set", "hidden_dim=16", "--set", "embed_dim=8",
            "--set", "folds=3", "--set", "repeats=1",
            "--set", "link_fraction=0.9", "--seed", "7"]


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("""
# a comment
epochs = 9
k_per_hop = 3,1
hops = 2
refresh_views = false
temperature = 0.25   # trailing comment
""")
    cfg = load_config(str(path))
    assert cfg.epochs == 9
    assert cfg.k_per_hop == (3, 1)
    assert cfg.hops == 2
    assert cfg.refresh_views is False
    assert cfg.temperature == 0.25


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(str(tmp_path / "missing.cfg"))
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 3\n")
    with pytest.raises(ConfigError, match="unknown configuration key"):
        load_config(str(bad))
    bad.write_text("epochs = many\n")
    with pytest.raises(ConfigError, match="bad value"):
        load_config(str(bad))
    bad.write_text("just some text\n")
    with pytest.raises(ConfigError, match="key = value"):
        load_config(str(bad))


def test_validate_requires_one_source(tmp_path):
    cfg = RunConfig()
    with pytest.raises(ConfigError, match="exactly one dataset source"):
        validate(cfg)
    cfg.edges_path = str(tmp_path / "absent.txt")
    cfg.features_path = str(tmp_path / "absent.csv")
    with pytest.raises(ConfigError, match="not found"):
        validate(cfg)
    set_option(cfg, "aug1", "identical")
    with pytest.raises(ConfigError):
        set_option(cfg, "aug1", "")  # empty value is not a kind
        validate(cfg)


def test_unknown_override_returns_config_error(tmp_path, small_dataset):
    edges, feats = small_dataset
    code = main(["prepare", "--set", "bogus=1",
                 "--set", f"edges_path={edges}",
                 "--set", f"features_path={feats}"])
    assert code == 1


def test_missing_prerequisite_names_stage(tmp_path, small_dataset, capsys):
    edges, feats = small_dataset
    code = main(["train"] + _base_args(tmp_path, edges, feats))
    assert code == 2
    assert "'prepare'" in capsys.readouterr().err


def test_full_pipeline_smoke(tmp_path, small_dataset):
    edges, feats = small_dataset
    assert main(["all"] + _base_args(tmp_path, edges, feats)) == 0
    out = tmp_path / "run"
    for name in ("links.tsv", "subgraph_stats.tsv", "checkpoint.bin",
                 "loss.csv", "embeddings.tsv", "metrics_sclrl.csv",
                 "metrics_heuristics.csv"):
        assert (out / name).exists(), name
    # artifacts are audited: headers carry the resolved config
    for name in ("links.tsv", "loss.csv", "metrics_sclrl.csv"):
        text = (out / name).read_text()
        assert text.startswith("#")
        assert "seed = 7" in text
    labels, splits, emb = read_embeddings(out / "embeddings.tsv")
    assert emb.shape[1] == 8
    assert set(splits) == {"train", "val", "test"}
    metrics = (out / "metrics_sclrl.csv").read_text()
    assert "sclrl,auc," in metrics
    assert "sclrl_test_split,auc," in metrics
    heur = (out / "metrics_heuristics.csv").read_text()
    for kind in ("cn", "salton", "aa", "ra"):
        assert f"{kind},auc," in heur


def test_stages_are_idempotent(tmp_path, small_dataset):
    edges, feats = small_dataset
    args = _base_args(tmp_path, edges, feats)
    assert main(["prepare"] + args) == 0
    assert main(["train"] + args) == 0
    assert main(["embed"] + args) == 0
    out = tmp_path / "run"
    first = {name: (out / name).read_bytes()
             for name in ("links.tsv", "checkpoint.bin", "embeddings.tsv")}
    assert main(["prepare"] + args) == 0
    assert main(["train"] + args) == 0
    assert main(["embed"] + args) == 0
    for name, blob in first.items():
        assert (out / name).read_bytes() == blob, name


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_bad_command_exits_one():
    assert main(["frobnicate"]) == 1
