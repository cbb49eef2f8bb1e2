"""Build a synthetic dialect corpus, write it to disk, and subsample a budget.

The corpus format is three files: a JSONL manifest, a binary frames file
(float32 frame embeddings), and a taxonomy JSON mapping dialects to
language clusters. Everything here is deterministic given the seed.
"""
import tempfile
from pathlib import Path

from mapmix import SynthConfig, generate, load_corpus, subsample_budget, write_corpus

# A small 14-dialect / 5-cluster corpus: 6 train + 2 eval utterances per
# dialect, 16-dim frame embeddings, 10% of train labels flipped.
config = SynthConfig(
    train_per_dialect=6,
    eval_per_dialect=2,
    label_noise_frac=0.1,
    seed=7,
)
corpus, noised_ids = generate(config)
print(f"generated {corpus.n_utterances} utterances over {corpus.taxonomy.n_dialects} dialects")
print(f"clusters: {', '.join(corpus.taxonomy.clusters)}")
print(f"{len(noised_ids)} train labels were flipped, e.g. {sorted(noised_ids)[:3]}")

workdir = Path(tempfile.mkdtemp(prefix="mapmix-demo-"))
write_corpus(corpus, workdir / "manifest.jsonl", workdir / "frames.bin")
print(f"\nwrote corpus to {workdir}")
for name in ("manifest.jsonl", "frames.bin", "taxonomy.json"):
    print(f"  {name}: {(workdir / name).stat().st_size} bytes")

reloaded = load_corpus(workdir / "manifest.jsonl", workdir / "frames.bin",
                       frame_rate_hz=corpus.frame_rate_hz)
assert reloaded.n_utterances == corpus.n_utterances
first = reloaded.utterances[0]
print(f"\nround-trip ok; first utterance {first.id}: {first.num_frames} frames x D={reloaded.D}, "
      f"{first.duration_s:.1f}s")

# Duration-budget subsampling: per dialect, accumulate shuffled train
# utterances until the budget is reached (the straddler is included).
budget_h = 0.005  # 18 seconds per dialect at demo scale
sub = subsample_budget(corpus, hours_per_dialect=budget_h, seed=1)
train_total = sum(u.duration_s for u in sub.utterances if u.split == "train")
eval_count = sum(1 for u in sub.utterances if u.split == "eval")
print(f"\nbudget subsample at {budget_h * 3600:.0f}s per dialect:")
print(f"  kept {sum(1 for u in sub.utterances if u.split == 'train')} train utterances "
      f"({train_total:.0f}s total); eval split untouched ({eval_count} utterances)")
