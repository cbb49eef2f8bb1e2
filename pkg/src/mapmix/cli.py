"""Command-line pipeline: synth, map, train, eval, compare.

Configuration comes from an optional JSON file (``--config``) with flag
overrides winning. Exit codes: 0 success, 2 configuration error, 3 data
error, 4 numeric error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import augment, synth
from .corpus import (
    DEFAULT_FRAME_RATE_HZ,
    Corpus,
    load_corpus,
    subsample_budget,
    write_corpus,
)
from .dynamics import (
    DatamapConfig,
    compute_stats,
    export_datamap,
    load_datamap,
    partition_regions,
)
from .errors import ConfigurationError, DataError, MapmixError, NumericError, SchemaError
from .metrics import build_report, evaluate, write_confusion_csv, write_report_json
from .model import TrainConfig, load_checkpoint, save_checkpoint, train


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    return config


def _merged(args: argparse.Namespace) -> dict:
    """Config file values with non-None flags layered on top."""
    config = _load_config_file(args.config)
    for key in ("seed", "out", "strategy", "datamap", "manifest", "frames", "taxonomy", "frame_rate_hz", "checkpoint"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _require(config: dict, key: str) -> object:
    if config.get(key) is None:
        raise ConfigurationError(f"missing required setting {key!r} (flag or config file)")
    return config[key]


def _out_dir(config: dict) -> Path:
    out = Path(str(_require(config, "out")))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _train_config(config: dict, **overrides) -> TrainConfig:
    keys = {f.name for f in fields(TrainConfig)}
    kwargs = {k: v for k, v in config.items() if k in keys}
    kwargs.update(overrides)
    try:
        train_config = TrainConfig(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(str(exc)) from exc
    train_config.validate()
    return train_config


def _load_corpus_from(config: dict) -> Corpus:
    return load_corpus(
        manifest_path=str(_require(config, "manifest")),
        frames_path=str(_require(config, "frames")),
        taxonomy_path=config.get("taxonomy"),
        frame_rate_hz=float(config.get("frame_rate_hz", DEFAULT_FRAME_RATE_HZ)),
    )


def _datamap_config(config: dict) -> DatamapConfig:
    datamap_config = DatamapConfig()
    if "variability_percentile" in config:
        datamap_config.variability_percentile = float(config["variability_percentile"])
    if "confidence_percentile" in config:
        datamap_config.confidence_percentile = float(config["confidence_percentile"])
    return datamap_config


def cmd_synth(args: argparse.Namespace) -> int:
    config = _merged(args)
    out = _out_dir(config)
    synth_settings = dict(config.get("synth", {}))
    if "seed" in config:
        synth_settings["seed"] = int(config["seed"])
    known = {f.name for f in fields(synth.SynthConfig)}
    unknown = set(synth_settings) - known
    if unknown:
        raise ConfigurationError(f"unknown synth settings: {sorted(unknown)}")
    if "frames_range" in synth_settings:
        synth_settings["frames_range"] = tuple(synth_settings["frames_range"])
    synth_config = synth.SynthConfig(**synth_settings)

    corpus, noised_ids = synth.generate(synth_config)
    write_corpus(corpus, out / "manifest.jsonl", out / "frames.bin", out / "taxonomy.json")
    with open(out / "noised_ids.txt", "w", encoding="utf-8") as fh:
        for uid in sorted(noised_ids):
            fh.write(uid + "\n")
    print(
        f"wrote corpus: {corpus.n_utterances} utterances, "
        f"{corpus.taxonomy.n_dialects} dialects, {corpus.taxonomy.n_clusters} clusters, "
        f"D={corpus.D}, {len(noised_ids)} noised labels -> {out}"
    )
    return 0


def cmd_map(args: argparse.Namespace) -> int:
    config = _merged(args)
    out = _out_dir(config)
    corpus = _load_corpus_from(config)
    train_config = _train_config(config, strategy="none")
    output = train(corpus, None, train_config)
    datamap = partition_regions(compute_stats(output.dynamics), _datamap_config(config))
    export_datamap(datamap, out / "datamap.csv")
    counts = {region: len(datamap.ids_in(region)) for region in ("easy", "ambiguous", "hard")}
    print(f"wrote datamap for {len(datamap.entries)} examples {counts} -> {out / 'datamap.csv'}")
    return 0


def _write_dynamics_csv(dynamics, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", *[f"epoch_{e + 1}" for e in range(dynamics.epochs)]])
        for uid, seq in dynamics.records.items():
            writer.writerow([uid, *[repr(p) for p in seq]])


def _write_loss_curve_csv(loss_curve, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mean_loss"])
        for epoch, value in enumerate(loss_curve, start=1):
            writer.writerow([epoch, repr(value)])


def cmd_train(args: argparse.Namespace) -> int:
    config = _merged(args)
    out = _out_dir(config)
    corpus = _load_corpus_from(config)
    train_config = _train_config(config)
    datamap = load_datamap(config["datamap"]) if config.get("datamap") else None
    output = train(corpus, datamap, train_config)
    save_checkpoint(output.params, train_config, out / "checkpoint.json", corpus.taxonomy.dialects)
    _write_dynamics_csv(output.dynamics, out / "dynamics.csv")
    _write_loss_curve_csv(output.loss_curve, out / "loss_curve.csv")
    final = output.loss_curve[-1] if output.loss_curve else float("nan")
    print(
        f"trained strategy={train_config.strategy} for {train_config.epochs} epochs "
        f"(final mean loss {final:.4f}) -> {out}"
    )
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    config = _merged(args)
    out = _out_dir(config)
    params, payload = load_checkpoint(str(_require(config, "checkpoint")))
    corpus = _load_corpus_from(config)
    if params.W.shape != (corpus.taxonomy.n_dialects, corpus.D):
        raise SchemaError(
            f"checkpoint shape {params.W.shape} does not match corpus "
            f"(C={corpus.taxonomy.n_dialects}, D={corpus.D})"
        )
    if payload.get("dialects") and list(payload["dialects"]) != list(corpus.taxonomy.dialects):
        raise SchemaError("checkpoint dialect inventory does not match the corpus taxonomy")
    report = build_report(evaluate(corpus, params), corpus.taxonomy)
    write_report_json(report, corpus.taxonomy, out / "report.json")
    write_confusion_csv(report.confusion, corpus.taxonomy, out / "confusion.csv")
    print(
        f"n={report.n} acc={report.acc:.4f} wf1={report.wf1:.4f} "
        f"cluster_acc={report.cluster_acc:.4f} ece={report.ece:.4f} -> {out}"
    )
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    config = _merged(args)
    out = _out_dir(config)
    corpus = _load_corpus_from(config)

    strategies = config.get("strategies", list(augment.STRATEGIES))
    for strategy in strategies:
        if strategy not in augment.STRATEGIES:
            raise ConfigurationError(f"unknown strategy {strategy!r} in strategies list")
    seeds = config.get("seeds")
    n_subsets = config.get("n_subsets")
    if seeds is None:
        seeds = list(range(n_subsets)) if n_subsets is not None else [0, 1, 2]
    seeds = [int(s) for s in seeds]
    if n_subsets is not None and int(n_subsets) != len(seeds):
        raise ConfigurationError("n_subsets must equal the number of seeds")
    hours = float(config.get("hours_per_dialect", 5.0))

    # Each subset gets its own strategy-none run whose dynamics feed the
    # datamap used by every region strategy on that same subset.
    subsets = []
    for seed in seeds:
        sub = subsample_budget(corpus, hours, seed)
        none_output = train(sub, None, _train_config(config, strategy="none", seed=seed))
        datamap = partition_regions(compute_stats(none_output.dynamics), _datamap_config(config))
        subsets.append((seed, sub, none_output, datamap))

    detail: dict[str, list[dict]] = {}
    table_rows = []
    with open(out / "compare.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "acc", "wf1", "cluster_acc", "ece"])
        fh.flush()
        for strategy in strategies:
            runs = []
            for seed, sub, none_output, datamap in subsets:
                if strategy == "none":
                    output = none_output
                else:
                    output = train(sub, datamap, _train_config(config, strategy=strategy, seed=seed))
                report = build_report(evaluate(sub, output.params), corpus.taxonomy)
                runs.append(
                    {
                        "seed": seed,
                        "acc": report.acc,
                        "wf1": report.wf1,
                        "cluster_acc": report.cluster_acc,
                        "ece": report.ece,
                        "n": report.n,
                    }
                )
            detail[strategy] = runs
            means = {
                key: float(np.mean([run[key] for run in runs]))
                for key in ("acc", "wf1", "cluster_acc", "ece")
            }
            writer.writerow(
                [strategy, repr(means["acc"]), repr(means["wf1"]), repr(means["cluster_acc"]), repr(means["ece"])]
            )
            fh.flush()
            table_rows.append((strategy, means))

    with open(out / "compare.json", "w", encoding="utf-8") as fh:
        json.dump(detail, fh, sort_keys=True, indent=2)
        fh.write("\n")

    print(f"{'strategy':<16}{'Acc':>8}{'WF1':>8}{'C.Acc':>8}{'ECE':>8}")
    for strategy, means in table_rows:
        print(
            f"{strategy:<16}{means['acc']:>8.4f}{means['wf1']:>8.4f}"
            f"{means['cluster_acc']:>8.4f}{means['ece']:>8.4f}"
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapmix",
        description="Datamaps-guided latent mixup toolkit over precomputed frame embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, corpus_flags: bool = True):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--strategy", choices=augment.STRATEGIES, help="mixup strategy")
        p.add_argument("--datamap", help="datamap CSV path (region strategies)")
        if corpus_flags:
            p.add_argument("--manifest", help="corpus manifest JSONL")
            p.add_argument("--frames", help="corpus frames file")
            p.add_argument("--taxonomy", help="taxonomy JSON (default: manifest sibling taxonomy.json)")
            p.add_argument("--frame-rate-hz", dest="frame_rate_hz", type=float, help="frames per second of audio")

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus")
    common(p_synth, corpus_flags=False)
    p_synth.set_defaults(func=cmd_synth)

    p_map = sub.add_parser("map", help="train a plain head and export the datamap CSV")
    common(p_map)
    p_map.set_defaults(func=cmd_map)

    p_train = sub.add_parser("train", help="train a head under a mixup strategy")
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on the eval split")
    common(p_eval)
    p_eval.add_argument("--checkpoint", help="checkpoint JSON path")
    p_eval.set_defaults(func=cmd_eval)

    p_compare = sub.add_parser("compare", help="train+eval every strategy over seeded budget subsets")
    common(p_compare)
    p_compare.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 4
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except MapmixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
