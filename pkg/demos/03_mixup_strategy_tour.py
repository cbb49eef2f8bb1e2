"""Tour of the mixing primitives and the pair-sampling strategy catalog.

Interpolation coefficients come from Beta(alpha, alpha); with alpha = 0.5
the distribution is U-shaped, so most synthetic points stay close to one
of their two parents. Static mixing interpolates raw frame matrices
(truncating to the shorter one); latent mixing interpolates pooled
utterance embeddings. Region strategies constrain where the two parents
may come from.
"""
import numpy as np

from mapmix import (
    SynthConfig,
    TrainConfig,
    attention_pool,
    compute_stats,
    generate,
    latent_mix,
    make_pairs,
    partition_regions,
    retained_set,
    sample_lambda,
    static_mix,
    train,
)

rng = np.random.default_rng(0)
draws = np.array([sample_lambda(0.5, rng) for _ in range(20_000)])
print("lambda ~ Beta(0.5, 0.5):")
print(f"  mean {draws.mean():.3f} (theory 0.5), var {draws.var():.4f} (theory 0.125)")
print(f"  {np.mean((draws < 0.1) | (draws > 0.9)):.0%} of draws within 0.1 of an endpoint")

corpus, _ = generate(SynthConfig(train_per_dialect=12, eval_per_dialect=2, seed=5))
train_utts = corpus.split_utterances("train")
u_i, u_j = train_utts[0], train_utts[40]
print(f"\nstatic mix of {u_i.id} ({u_i.num_frames} frames) and {u_j.id} ({u_j.num_frames} frames):")
mixed = static_mix(u_i, u_j, lam=0.7)
print(f"  mixed frames shape {mixed.shape} (truncated to the shorter operand)")

w = np.zeros(corpus.D)  # zero scores = plain mean pooling
z = latent_mix(attention_pool(u_i.frames, w), attention_pool(u_j.frames, w), lam=0.7)
print(f"latent mix pools first, then interpolates: vector of shape {z.shape}")

# Regions come from a quick plain-training run.
output = train(corpus, None, TrainConfig(epochs=10, learning_rate=1e-2, seed=0))
datamap = partition_regions(compute_stats(output.dynamics))
dialect_of = {u.id: u.dialect for u in train_utts}
train_ids = [u.id for u in train_utts]
cluster = lambda uid: corpus.taxonomy.cluster_of[dialect_of[uid]]

print(f"\nregions: { {r: len(datamap.ids_in(r)) for r in ('easy', 'ambiguous', 'hard')} }")
print(f"{'strategy':<16}{'retained':>9}  sample pair constraint check")
for strategy in ("random", "within_cluster", "across_cluster", "easy", "hard", "amb_easy", "map_mix"):
    retained = sorted(retained_set(train_ids, datamap, strategy))
    pairs = make_pairs(retained, datamap, corpus.taxonomy, strategy, n_pairs=1000,
                       alpha=0.5, rng=np.random.default_rng(1), dialect_of=dialect_of)
    if strategy == "within_cluster":
        note = f"all same-cluster: {all(cluster(p.i) == cluster(p.j) for p in pairs)}"
    elif strategy == "across_cluster":
        note = f"all cross-cluster: {all(cluster(p.i) != cluster(p.j) for p in pairs)}"
    elif strategy in ("easy", "hard"):
        pool = datamap.ids_in(strategy)
        note = f"all partners in {strategy} region: {all(p.j in pool for p in pairs)}"
    elif strategy in ("amb_easy", "map_mix"):
        easy, amb = datamap.ids_in("easy"), datamap.ids_in("ambiguous")
        note = f"all pairs easy x ambiguous: {all(p.i in easy and p.j in amb for p in pairs)}"
    else:
        note = "unconstrained"
    print(f"{strategy:<16}{len(retained):>9}  {note}")
print("\n(amb_easy and map_mix also drop the hard region from training entirely)")
