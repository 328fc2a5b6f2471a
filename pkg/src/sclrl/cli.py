"""End-to-end command-line driver.

Stages::

    prepare     ingest the graph, sample and split links, report subgraph stats
    train       contrastive pre-training on the train-split subgraphs
    embed       write one embedding row per link from the saved checkpoint
    evaluate    cross-validated probe metrics plus the fixed test-split metrics
    heuristics  neighborhood-heuristic baselines on the masked graph
    all         the full chain in order

Every artifact starts with comment lines recording the resolved
configuration, so a run can be audited and reproduced from its outputs.
Exit codes: 0 success, 1 configuration error, 2 data error, 3 numerical
divergence.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .config import (RunConfig, config_lines, load_config, sampler_config,
                     set_option, train_config, validate)
from .contrast import embed_links, train
from .datasets import ingest_citation, ingest_generic
from .encoder import EncoderDims, init_encoder, load_checkpoint, save_checkpoint
from .errors import ConfigError, DataError, DivergenceError
from .evaluate import (HEURISTIC_KINDS, auc, average_precision, cross_validate,
                       heuristic_scores, probe_scores, score_report, train_probe)
from .graph import Graph
from .links import (TEST, TRAIN, VAL, LinkDataset, masked_graph,
                    read_link_file, sample_links, split_links, write_link_file)
from .subgraph import extract_all

logger = logging.getLogger(__name__)

STAGES = ("prepare", "train", "embed", "evaluate", "heuristics", "all")

LINKS_FILE = "links.tsv"
STATS_FILE = "subgraph_stats.tsv"
CHECKPOINT_FILE = "checkpoint.bin"
LOSS_FILE = "loss.csv"
EMBEDDINGS_FILE = "embeddings.tsv"
METRICS_FILE = "metrics_sclrl.csv"
HEURISTICS_FILE = "metrics_heuristics.csv"


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _header_lines(cfg: RunConfig, stage: str) -> list[str]:
    return [f"# sclrl {stage}"] + [f"# {line}" for line in config_lines(cfg)]


def _require(path: str, producer: str) -> str:
    if not os.path.exists(path):
        raise DataError(f"missing {path}; run the '{producer}' stage first")
    return path


def _load_graph(cfg: RunConfig) -> Graph:
    if cfg.content_path:
        return ingest_citation(cfg.content_path, cfg.cites_path)
    return ingest_generic(cfg.edges_path, cfg.features_path)


def _load_dataset(cfg: RunConfig) -> LinkDataset:
    return read_link_file(_require(_out(cfg, LINKS_FILE), "prepare"))


def stage_prepare(cfg: RunConfig) -> None:
    g = _load_graph(cfg)
    links = sample_links(g, cfg.link_fraction, cfg.seed)
    dataset = split_links(links, cfg.seed)
    os.makedirs(cfg.out_dir, exist_ok=True)
    header = {line.split(" = ")[0]: line.split(" = ", 1)[1]
              for line in config_lines(cfg)}
    write_link_file(_out(cfg, LINKS_FILE), dataset, header=header)

    samples = extract_all(g, dataset, sampler_config(cfg), workers=cfg.workers)
    sizes = np.array([s.size for s in samples])
    with open(_out(cfg, STATS_FILE), "w") as f:
        f.write("\n".join(_header_lines(cfg, "prepare")) + "\n")
        f.write("stat\tvalue\n")
        f.write(f"links\t{len(samples)}\n")
        f.write(f"size_mean\t{sizes.mean():.4f}\n")
        f.write(f"size_max\t{sizes.max()}\n")
        f.write(f"size_bound\t{sampler_config(cfg).max_nodes}\n")
        for m in range(2, int(sizes.max()) + 1):
            f.write(f"size_{m}\t{int((sizes == m).sum())}\n")
    logger.info("prepared %d links (graph: %d nodes, %d edges)",
                len(dataset), g.num_nodes, g.num_edges)


def stage_train(cfg: RunConfig) -> None:
    g = _load_graph(cfg)
    dataset = _load_dataset(cfg)
    sampler = sampler_config(cfg)
    samples = extract_all(g, dataset, sampler, workers=cfg.workers)
    train_samples = [samples[i] for i in dataset.indices_for(TRAIN)]
    dims = EncoderDims(feat_dim=g.feat_dim, sim_dim=sampler.max_nodes,
                       hidden_dim=cfg.hidden_dim, out_dim=cfg.embed_dim)
    params = init_encoder(dims, seed=cfg.seed)
    params, report = train(train_samples, params, train_config(cfg))
    save_checkpoint(params, _out(cfg, CHECKPOINT_FILE))
    with open(_out(cfg, LOSS_FILE), "w") as f:
        f.write("\n".join(_header_lines(cfg, "train")) + "\n")
        f.write(f"# peak_memory_bytes = {report.peak_memory_bytes}\n")
        f.write("epoch,mean_loss,seconds\n")
        for e, (loss, secs) in enumerate(zip(report.epoch_losses,
                                             report.epoch_seconds)):
            f.write(f"{e},{loss:.6f},{secs:.3f}\n")
    logger.info("trained %d epochs on %d subgraphs; final loss %.4f; "
                "peak memory estimate %.1f MB",
                cfg.epochs, len(train_samples), report.epoch_losses[-1],
                report.peak_memory_bytes / 2**20)


def stage_embed(cfg: RunConfig) -> None:
    g = _load_graph(cfg)
    dataset = _load_dataset(cfg)
    params = load_checkpoint(_require(_out(cfg, CHECKPOINT_FILE), "train"))
    samples = extract_all(g, dataset, sampler_config(cfg), workers=cfg.workers)
    emb = embed_links(samples, params, source=cfg.embed_source)
    with open(_out(cfg, EMBEDDINGS_FILE), "w") as f:
        f.write("\n".join(_header_lines(cfg, "embed")) + "\n")
        cols = "\t".join(f"z{i + 1}" for i in range(emb.shape[1]))
        f.write(f"u\tv\tlabel\tsplit\t{cols}\n")
        for (link, split), row in zip(zip(dataset.links, dataset.assignment), emb):
            values = "\t".join(f"{x:.6e}" for x in row)
            f.write(f"{link.u}\t{link.v}\t{link.label}\t{split}\t{values}\n")
    logger.info("embedded %d links into %d dimensions", emb.shape[0], emb.shape[1])


def read_embeddings(path):
    """Parse an embeddings file into (labels, splits, matrix)."""
    labels, splits, rows = [], [], []
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#") or line.startswith("u\t"):
                continue
            parts = line.split("\t")
            labels.append(int(parts[2]))
            splits.append(parts[3])
            rows.append([float(x) for x in parts[4:]])
    return np.array(labels), splits, np.array(rows, dtype=np.float64)


def _write_metrics(path, cfg: RunConfig, stage: str, rows) -> None:
    with open(path, "w") as f:
        f.write("\n".join(_header_lines(cfg, stage)) + "\n")
        f.write("method,metric,mean,std,folds,repeats\n")
        for method, metric, mean, std, folds, repeats in rows:
            f.write(f"{method},{metric},{mean:.6f},{std:.6f},{folds},{repeats}\n")


def stage_evaluate(cfg: RunConfig) -> None:
    labels, splits, emb = read_embeddings(
        _require(_out(cfg, EMBEDDINGS_FILE), "embed"))
    fit_idx = [i for i, s in enumerate(splits) if s in (TRAIN, VAL)]
    test_idx = [i for i, s in enumerate(splits) if s == TEST]
    report = cross_validate(emb[fit_idx], labels[fit_idx],
                            folds=cfg.folds, repeats=cfg.repeats, seed=cfg.seed)
    rows = [("sclrl", "auc", report.auc_mean, report.auc_std,
             report.folds, report.repeats),
            ("sclrl", "ap", report.ap_mean, report.ap_std,
             report.folds, report.repeats)]
    if test_idx:
        probe = train_probe(emb[fit_idx], labels[fit_idx], seed=cfg.seed)
        scores = probe_scores(probe, emb[test_idx])
        rows.append(("sclrl_test_split", "auc",
                     auc(scores, labels[test_idx]), 0.0, 1, 1))
        rows.append(("sclrl_test_split", "ap",
                     average_precision(scores, labels[test_idx]), 0.0, 1, 1))
    _write_metrics(_out(cfg, METRICS_FILE), cfg, "evaluate", rows)
    logger.info("probe cross-validation: auc %.4f +- %.4f, ap %.4f +- %.4f",
                report.auc_mean, report.auc_std, report.ap_mean, report.ap_std)


def stage_heuristics(cfg: RunConfig) -> None:
    g = _load_graph(cfg)
    dataset = _load_dataset(cfg)
    observed = masked_graph(g, dataset)
    test_links = dataset.links_for(TEST)
    if not test_links:
        raise DataError("no test-split links to score; re-run 'prepare'")
    pairs = [(l.u, l.v) for l in test_links]
    labels = np.array([l.label for l in test_links])
    rows = []
    for kind in HEURISTIC_KINDS:
        scores = heuristic_scores(observed, kind, pairs)
        rep = score_report(scores, labels, folds=cfg.folds,
                           repeats=cfg.repeats, seed=cfg.seed)
        rows.append((kind, "auc", rep.auc_mean, rep.auc_std,
                     rep.folds, rep.repeats))
        rows.append((kind, "ap", rep.ap_mean, rep.ap_std,
                     rep.folds, rep.repeats))
        logger.info("heuristic %s: auc %.4f +- %.4f", kind,
                    rep.auc_mean, rep.auc_std)
    _write_metrics(_out(cfg, HEURISTICS_FILE), cfg, "heuristics", rows)


def run_pipeline(command: str, cfg: RunConfig) -> None:
    """Run one stage, or all of them in order."""
    if command not in STAGES:
        raise ConfigError(f"unknown command {command!r}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    stages = {"prepare": (stage_prepare,), "train": (stage_train,),
              "embed": (stage_embed,), "evaluate": (stage_evaluate,),
              "heuristics": (stage_heuristics,),
              "all": (stage_prepare, stage_train, stage_embed,
                      stage_evaluate, stage_heuristics)}[command]
    for stage in stages:
        stage(cfg)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sclrl",
        description="Link representation learning via subgraph contrast.")
    parser.add_argument("command", choices=STAGES)
    parser.add_argument("--config", help="path to a 'key = value' config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--workers", type=int,
                        help="worker processes for subgraph extraction "
                             "(1 guarantees bit-reproducibility)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key (repeatable)")
    parser.add_argument("--out-dir", help="override the output directory")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = load_config(args.config)
        for item in args.set:
            if "=" not in item:
                raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
            key, value = item.split("=", 1)
            set_option(cfg, key.strip(), value)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out_dir is not None:
            cfg.out_dir = args.out_dir
        validate(cfg)
        run_pipeline(args.command, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except DivergenceError as exc:
        print(f"numerical divergence: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
