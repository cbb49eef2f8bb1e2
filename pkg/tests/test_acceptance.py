"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines as they complete. The desk-scale benchmark (criteria 4, 5, 10) is a
14-dialect, 5-cluster synthetic corpus with 20% label noise, trained for
20 epochs per run and averaged over 5 seeds.
"""
import json
import math
import time

import numpy as np
import pytest
from scipy.stats import chi2

from mapmix import (
    DynamicsLog,
    ModelParams,
    SynthConfig,
    TrainConfig,
    aggregate_chunks,
    attention_pool,
    build_report,
    chunk_offsets,
    compute_stats,
    ece,
    evaluate,
    forward,
    generate,
    gradients,
    latent_mix,
    make_pairs,
    mix_labels,
    one_hot,
    partition_regions,
    retained_set,
    sample_lambda,
    static_mix,
    train,
    weighted_f1,
)
from mapmix.cli import main as cli_main
from mapmix.model import batch_loss

# ---------------------------------------------------------------------------
# Desk-scale benchmark configuration (criteria 4, 5, 10).
# Pinned by the criteria: 5 clusters, 14 dialects, D=16, 50 train
# utterances/dialect, label_noise_frac=0.2, 20 epochs, 5 seeds.
# Free parameters below were fixed once by calibration and are frozen here.
BENCH_SEEDS = (0, 1, 2, 3, 4)
BENCH_SYNTH = dict(
    n_clusters=5,
    dialects_per_cluster=[4, 2, 2, 4, 2],
    D=16,
    train_per_dialect=50,
    eval_per_dialect=20,
    frames_range=(2, 40),
    cluster_sep=6.0,
    dialect_sep=2.0,
    frame_noise=5.0,
    label_noise_frac=0.2,
    frame_rate_hz=2.5,
)
BENCH_TRAIN = dict(epochs=20, learning_rate=1e-2, batch_size=32)
BENCH_STRATEGIES = ("static", "random", "amb_easy", "map_mix")


def _criterion(ok: bool, line: str):
    print(f"{'PASS' if ok else 'FAIL'} {line}")
    assert ok, line


@pytest.fixture(scope="module")
def benchmark():
    runs = []
    datamap_seconds = 0.0
    t_total = time.perf_counter()
    for seed in BENCH_SEEDS:
        t0 = time.perf_counter()
        corpus, noised = generate(SynthConfig(seed=seed, **BENCH_SYNTH))
        none_output = train(corpus, None, TrainConfig(strategy="none", seed=seed, **BENCH_TRAIN))
        datamap = partition_regions(compute_stats(none_output.dynamics))
        datamap_seconds += time.perf_counter() - t0
        run = {
            "seed": seed,
            "corpus": corpus,
            "noised": noised,
            "datamap": datamap,
            "reports": {},
            "dynamics": {},
        }
        for strategy in BENCH_STRATEGIES:
            output = train(corpus, datamap, TrainConfig(strategy=strategy, seed=seed, **BENCH_TRAIN))
            run["reports"][strategy] = build_report(evaluate(corpus, output.params), corpus.taxonomy)
            run["dynamics"][strategy] = output.dynamics
        runs.append(run)
    return {
        "runs": runs,
        "datamap_seconds": datamap_seconds,
        "total_seconds": time.perf_counter() - t_total,
    }


def test_criterion_1_gradient_correctness():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst = 0.0
    step = 1e-6
    for _ in range(100):
        D = int(rng.integers(2, 7))
        C = int(rng.integers(2, 7))
        params = ModelParams(
            w=0.5 * rng.standard_normal(D),
            W=0.5 * rng.standard_normal((C, D)),
            b=0.5 * rng.standard_normal(C),
        )
        batch = []
        for _ in range(int(rng.integers(1, 4))):
            label = rng.dirichlet(np.ones(C))
            if rng.uniform() < 0.3:
                batch.append((rng.standard_normal(D), label))
            else:
                batch.append((rng.standard_normal((int(rng.integers(1, 7)), D)), label))
        grads = gradients(batch, params)
        analytic = {"w": grads.dw, "W": grads.dW, "b": grads.db}
        for name in ("w", "W", "b"):
            arr = getattr(params, name)
            it = np.nditer(arr, flags=["multi_index"])
            while not it.finished:
                idx = it.multi_index
                hi = params.copy()
                lo = params.copy()
                getattr(hi, name)[idx] += step
                getattr(lo, name)[idx] -= step
                fd = (batch_loss(batch, hi) - batch_loss(batch, lo)) / (2 * step)
                a = analytic[name][idx]
                rel = abs(a - fd) / max(abs(a), abs(fd), 1e-5)
                worst = max(worst, rel)
                it.iternext()
    elapsed = time.perf_counter() - t0
    _criterion(
        worst < 1e-4 and elapsed < 30.0,
        f"criterion 1 (gradient correctness): max rel err {worst:.2e} over 100 instances "
        f"in {elapsed:.1f}s (limits 1e-4, 30s)",
    )


def test_criterion_2_mixup_laws():
    rng = np.random.default_rng(202)
    from mapmix import Utterance

    ok = True
    # endpoint laws, exact
    for _ in range(20):
        t_i, t_j = int(rng.integers(2, 9)), int(rng.integers(2, 9))
        u_i = Utterance(id="i", frames=rng.standard_normal((t_i, 5)), dialect=0,
                        duration_s=1.0, split="train")
        u_j = Utterance(id="j", frames=rng.standard_normal((t_j, 5)), dialect=1,
                        duration_s=1.0, split="train")
        t = min(t_i, t_j)
        ok &= np.array_equal(static_mix(u_i, u_j, 1.0), u_i.frames[:t])
        ok &= np.array_equal(static_mix(u_i, u_j, 0.0), u_j.frames[:t])
        z_i, z_j = rng.standard_normal(6), rng.standard_normal(6)
        ok &= np.array_equal(latent_mix(z_i, z_j, 1.0), z_i)
        ok &= np.array_equal(latent_mix(z_i, z_j, 0.0), z_j)

    # mixed labels stay on the simplex within 1e-9
    for _ in range(200):
        y_i = rng.dirichlet(np.ones(14))
        y_j = rng.dirichlet(np.ones(14))
        mixed = mix_labels(y_i, y_j, float(rng.uniform()))
        ok &= abs(mixed.sum() - 1.0) <= 1e-9 and (mixed >= 0).all()

    # 10-bin chi-square of 100k Beta(0.5, 0.5) draws at the 0.001 level
    draw_rng = np.random.default_rng(20240501)
    draws = np.array([sample_lambda(0.5, draw_rng) for _ in range(100_000)])
    edges = np.linspace(0.0, 1.0, 11)
    cdf = (2.0 / math.pi) * np.arcsin(np.sqrt(edges))
    expected = np.diff(cdf) * len(draws)
    observed, _ = np.histogram(draws, bins=edges)
    stat = float(((observed - expected) ** 2 / expected).sum())
    crit = float(chi2.ppf(0.999, df=9))
    ok &= stat < crit
    ok &= bool(((draws > 0) & (draws < 1)).all())
    _criterion(
        ok,
        f"criterion 2 (mixup laws): endpoints exact, labels on simplex, "
        f"chi-square {stat:.2f} < {crit:.2f}",
    )


def test_criterion_3_datamap_partition(benchmark):
    ok = True
    # the partition invariants on every benchmark run
    for run in benchmark["runs"]:
        datamap = run["datamap"]
        ids = [e.id for e in datamap.entries]
        easy, amb, hard = (datamap.ids_in(r) for r in ("easy", "ambiguous", "hard"))
        ok &= easy | amb | hard == set(ids)
        ok &= len(easy) + len(amb) + len(hard) == len(ids)
        ok &= all(0.0 <= e.confidence <= 1.0 for e in datamap.entries)
        ok &= all(0.0 <= e.variability <= 0.5 for e in datamap.entries)

    # plus random partitions
    rng = np.random.default_rng(303)
    for _ in range(50):
        n = int(rng.integers(3, 80))
        stats = [(f"u{i}", float(rng.uniform()), float(rng.uniform(0, 0.5))) for i in range(n)]
        result = partition_regions(stats)
        easy, amb, hard = (result.ids_in(r) for r in ("easy", "ambiguous", "hard"))
        ok &= easy | amb | hard == {f"u{i}" for i in range(n)}
        ok &= len(easy) + len(amb) + len(hard) == n

    # the 6-entry worked example: variability cut 0.25 leaves the two most
    # variable entries ambiguous; the remainder splits at median confidence.
    worked = [
        ("amb1", 0.60, 0.30),
        ("amb2", 0.55, 0.25),
        ("mid", 0.90, 0.20),
        ("lo1", 0.90, 0.05),
        ("lo2", 0.50, 0.04),
        ("lo3", 0.10, 0.03),
    ]
    result = partition_regions(worked)
    region = result.region_of()
    ok &= result.ids_in("ambiguous") == {"amb1", "amb2"}
    ok &= region["lo1"] == "easy" and region["lo2"] == "easy" and region["lo3"] == "hard"
    ok &= result.thresholds == (0.25, 0.5)
    _criterion(ok, "criterion 3 (datamap partition): disjoint+exhaustive, bounds, worked example")


def test_criterion_4_hard_region_captures_label_noise(benchmark):
    rates = []
    for run in benchmark["runs"]:
        hard = run["datamap"].ids_in("hard")
        rates.append(len(run["noised"] & hard) / len(run["noised"]))
    mean_rate = float(np.mean(rates))
    elapsed = benchmark["datamap_seconds"]
    _criterion(
        mean_rate >= 0.60 and elapsed < 120.0,
        f"criterion 4 (hard region captures label noise): capture {mean_rate:.3f} >= 0.60 "
        f"over {len(rates)} seeds in {elapsed:.1f}s (< 120s)",
    )


def test_criterion_5_directional_orderings(benchmark):
    mean = lambda strategy, key: float(
        np.mean([run["reports"][strategy].__getattribute__(key) for run in benchmark["runs"]])
    )
    wf1_static = mean("static", "wf1")
    wf1_random = mean("random", "wf1")
    wf1_amb_easy = mean("amb_easy", "wf1")
    wf1_map_mix = mean("map_mix", "wf1")
    ece_random = mean("random", "ece")
    ece_map_mix = mean("map_mix", "ece")
    elapsed = benchmark["total_seconds"]
    ok = (
        wf1_random > wf1_static
        and ece_map_mix < ece_random
        and wf1_map_mix >= wf1_amb_easy
        and elapsed < 900.0
    )
    _criterion(
        ok,
        "criterion 5 (directional orderings): "
        f"WF1 random {wf1_random:.4f} > static {wf1_static:.4f}; "
        f"ECE map_mix {ece_map_mix:.4f} < random {ece_random:.4f}; "
        f"WF1 map_mix {wf1_map_mix:.4f} >= amb_easy {wf1_amb_easy:.4f}; "
        f"{elapsed:.0f}s (< 900s)",
    )


def test_criterion_6_ece_oracle_equivalence():
    def naive_ece(probs, y_true, n_bins=10):
        edges = np.linspace(0.0, 1.0, n_bins + 1)
        n = len(y_true)
        total = 0.0
        for b in range(n_bins):
            members = []
            for k in range(n):
                conf = probs[k].max()
                inside = edges[b] <= conf < edges[b + 1]
                if b == n_bins - 1:
                    inside = edges[b] <= conf <= edges[b + 1]
                if inside:
                    members.append(k)
            if not members:
                continue
            conf_mean = np.mean([probs[k].max() for k in members])
            acc_mean = np.mean([float(np.argmax(probs[k]) == y_true[k]) for k in members])
            total += (len(members) / n) * abs(acc_mean - conf_mean)
        return total

    rng = np.random.default_rng(606)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 50))
        C = int(rng.integers(2, 8))
        probs = rng.dirichlet(np.ones(C), size=n)
        y_true = rng.integers(0, C, size=n)
        worst = max(worst, abs(ece(probs, y_true) - naive_ece(probs, y_true)))

    two_point = ece(np.array([[0.9, 0.1], [0.6, 0.4]]), np.array([0, 1]))
    ok = worst <= 1e-12 and two_point == 0.35
    _criterion(
        ok,
        f"criterion 6 (ECE oracle equivalence): max |diff| {worst:.2e} over 1000 sets, "
        f"two-point example {two_point!r}",
    )


def test_criterion_7_chunking():
    offsets = chunk_offsets(20.0)
    ok = offsets == [(0.0, 8.0), (3.0, 11.0), (6.0, 14.0), (9.0, 17.0), (12.0, 20.0)]
    ok &= chunk_offsets(7.5) == [(0.0, 7.5)]
    ok &= chunk_offsets(2.0) == [(0.0, 2.0)]
    rng = np.random.default_rng(707)
    for _ in range(20):
        p = rng.dirichlet(np.ones(6))
        k = int(rng.integers(1, 12))
        agg = aggregate_chunks([p] * k)
        ok &= bool(np.abs(agg - p).max() <= 1e-12)
    _criterion(ok, "criterion 7 (chunking): T=20 -> 5 chunks at (0,3,6,9,12); short signals whole; "
                   "identical-chunk aggregation exact")


def test_criterion_8_weighted_f1_oracle():
    value = weighted_f1(np.array([[8, 2], [3, 7]]))
    hand_derived = 299 / 399  # 0.5 * (16/21 + 14/19)
    ok = abs(value - hand_derived) < 1e-6
    rng = np.random.default_rng(808)
    for _ in range(20):
        diag = rng.integers(1, 30, size=int(rng.integers(2, 8)))
        ok &= weighted_f1(np.diag(diag)) == 1.0
    _criterion(
        ok,
        f"criterion 8 (weighted F1 oracle): [[8,2],[3,7]] -> {value:.6f} "
        f"(hand-derived {hand_derived:.6f}); diagonal exactly 1.0",
    )


def test_criterion_9_determinism(tmp_path):
    synth_settings = dict(
        n_clusters=2, dialects_per_cluster=[2, 2], D=6, train_per_dialect=6,
        eval_per_dialect=2, frames_range=[3, 12], cluster_sep=7.0, dialect_sep=2.5,
        frame_noise=1.0, label_noise_frac=0.0, frame_rate_hz=2.0, seed=3,
    )
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "synth": synth_settings, "frame_rate_hz": 2.0, "epochs": 3, "batch_size": 8,
        "hours_per_dialect": 0.002, "seeds": [0, 1], "n_subsets": 2,
        "strategies": ["none", "static", "map_mix"],
    }))
    corpus_dir = tmp_path / "corpus"
    assert cli_main(["synth", "--config", str(config_path), "--out", str(corpus_dir)]) == 0
    corpus_flags = [
        "--manifest", str(corpus_dir / "manifest.jsonl"),
        "--frames", str(corpus_dir / "frames.bin"),
        "--frame-rate-hz", "2.0",
    ]

    checkpoints = []
    for name in ("t1", "t2"):
        out = tmp_path / name
        assert cli_main(["train", "--config", str(config_path), *corpus_flags,
                         "--out", str(out), "--strategy", "random", "--seed", "9"]) == 0
        checkpoints.append((out / "checkpoint.json").read_bytes())

    tables = []
    for name in ("c1", "c2"):
        out = tmp_path / name
        assert cli_main(["compare", "--config", str(config_path), *corpus_flags,
                         "--out", str(out)]) == 0
        tables.append(((out / "compare.csv").read_bytes(), (out / "compare.json").read_bytes()))

    ok = checkpoints[0] == checkpoints[1] and tables[0] == tables[1]
    _criterion(ok, "criterion 9 (determinism): byte-identical checkpoints and compare tables on rerun")


def test_criterion_10_strategy_constraints(benchmark):
    run = benchmark["runs"][0]
    corpus, datamap = run["corpus"], run["datamap"]
    taxonomy = corpus.taxonomy
    train_ids = [u.id for u in corpus.split_utterances("train")]
    dialect_of = {u.id: u.dialect for u in corpus.utterances}
    cluster = lambda uid: taxonomy.cluster_of[dialect_of[uid]]
    easy, amb, hard = (datamap.ids_in(r) for r in ("easy", "ambiguous", "hard"))

    ok = True
    for strategy in ("static", "random", "within_cluster", "across_cluster",
                     "easy", "hard", "amb_easy", "map_mix"):
        retained = sorted(retained_set(train_ids, datamap, strategy))
        pairs = make_pairs(
            retained, datamap, taxonomy, strategy, n_pairs=10_000, alpha=0.5,
            rng=np.random.default_rng(1000), dialect_of=dialect_of,
        )
        allowed = set(retained)
        ok &= len(pairs) == 10_000
        ok &= all(p.i in allowed and p.j in allowed for p in pairs)
        if strategy == "within_cluster":
            ok &= all(cluster(p.i) == cluster(p.j) for p in pairs)
        elif strategy == "across_cluster":
            ok &= all(cluster(p.i) != cluster(p.j) for p in pairs)
        elif strategy == "easy":
            ok &= all(p.j in easy for p in pairs)
        elif strategy == "hard":
            ok &= all(p.j in hard for p in pairs)
        elif strategy in ("amb_easy", "map_mix"):
            ok &= all(p.i in easy and p.j in amb for p in pairs)
            ok &= not any(p.i in hard or p.j in hard for p in pairs)

    # map_mix training logs contain zero hard-region ids, on every seed
    for bench_run in benchmark["runs"]:
        logged = set(bench_run["dynamics"]["map_mix"].records)
        ok &= not (logged & bench_run["datamap"].ids_in("hard"))

    _criterion(ok, "criterion 10 (strategy constraints): 10000 pairs per strategy all valid; "
                   "map_mix logs exclude the hard region")
