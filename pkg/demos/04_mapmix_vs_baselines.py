"""Head-to-head: plain training, mixup baselines, and map_mix.

On a noisy-label corpus, region-guided latent mixup with confidence
labels (map_mix) should end up both more accurate and better calibrated
than unguided mixup. Evaluation chunks each eval utterance into 8-second
windows with a 3-second stride and averages the softmax outputs.
"""
import numpy as np

from mapmix import (
    SynthConfig,
    TrainConfig,
    build_report,
    compute_stats,
    evaluate,
    generate,
    partition_regions,
    train,
)

config = SynthConfig(
    train_per_dialect=50,
    eval_per_dialect=20,
    frames_range=(2, 40),
    frame_noise=5.0,
    label_noise_frac=0.2,
    frame_rate_hz=2.5,
    seed=0,
)
corpus, noised = generate(config)
print(f"benchmark corpus: {corpus.taxonomy.n_dialects} dialects, 20% flipped train labels")

train_settings = dict(epochs=20, learning_rate=1e-2, batch_size=32)

print("\ntraining the plain head for the datamap ...")
none_out = train(corpus, None, TrainConfig(strategy="none", seed=0, **train_settings))
datamap = partition_regions(compute_stats(none_out.dynamics))
hard = datamap.ids_in("hard")
print(f"hard region: {len(hard)} examples, {len(hard & noised)} of the {len(noised)} flipped")

rows = [("none", build_report(evaluate(corpus, none_out.params), corpus.taxonomy))]
for strategy in ("static", "random", "amb_easy", "map_mix"):
    output = train(corpus, datamap, TrainConfig(strategy=strategy, seed=0, **train_settings))
    rows.append((strategy, build_report(evaluate(corpus, output.params), corpus.taxonomy)))

print(f"\n{'strategy':<12}{'Acc':>8}{'WF1':>8}{'C.Acc':>8}{'ECE':>8}")
for name, report in rows:
    print(f"{name:<12}{report.acc:>8.3f}{report.wf1:>8.3f}{report.cluster_acc:>8.3f}{report.ece:>8.3f}")

map_mix = dict(rows)["map_mix"]
random_mix = dict(rows)["random"]
print(f"\nmap_mix vs random mixup: WF1 {map_mix.wf1 - random_mix.wf1:+.3f}, "
      f"ECE {map_mix.ece - random_mix.ece:+.3f} (lower is better)")

confusable = np.argsort(map_mix.confusion.sum(axis=1) - np.diag(map_mix.confusion))[-2:]
names = [corpus.taxonomy.dialects[int(d)] for d in confusable]
print(f"hardest dialects for map_mix on this corpus: {', '.join(names)}")
