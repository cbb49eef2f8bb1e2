import numpy as np
import pytest

from mapmix import Corpus, Taxonomy, Utterance


@pytest.fixture
def small_taxonomy():
    return Taxonomy.from_mapping(
        {"a1": "A", "a2": "A", "b1": "B", "b2": "B", "c1": "C"}
    )


def make_utterance(uid, dialect, rng, D=4, T=6, split="train", frame_rate_hz=2.0):
    return Utterance(
        id=uid,
        frames=rng.standard_normal((T, D)),
        dialect=dialect,
        duration_s=T / frame_rate_hz,
        split=split,
    )


def make_corpus(taxonomy, rng, D=4, train_per_dialect=3, eval_per_dialect=1, frame_rate_hz=2.0):
    utterances = []
    for split, count in (("train", train_per_dialect), ("eval", eval_per_dialect)):
        for dialect in range(taxonomy.n_dialects):
            for k in range(count):
                T = int(rng.integers(3, 9))
                utterances.append(
                    make_utterance(
                        f"{taxonomy.dialects[dialect]}-{split}-{k}",
                        dialect,
                        rng,
                        D=D,
                        T=T,
                        split=split,
                        frame_rate_hz=frame_rate_hz,
                    )
                )
    return Corpus(taxonomy=taxonomy, utterances=utterances, D=D, frame_rate_hz=frame_rate_hz)


@pytest.fixture
def small_corpus(small_taxonomy):
    return make_corpus(small_taxonomy, np.random.default_rng(7))
