"""Synthetic trials: a prompted word inside a fixed-length window.

A trial is leading silence, one dwell-sized segment per pronunciation
phoneme, then trailing silence to the window end. Each frame mixes a
one-hot on the true phoneme with a confusion row: (1-eta)*onehot +
eta*confusion[true]. eta=0 is noiseless, eta=1 carries no information.

Sessions derive per-trial seeds from the session seed with
numpy.random.SeedSequence(seed).spawn(): child 0 shuffles the trial order,
child i+1 drives trial i's layout draws. Identical inputs and seed give
identical sessions, file for file.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dwell import DwellSampler, DwellSpec
from .emissions import EmissionStream, Segment
from .errors import ConfigError, LexiconError
from .phonemes import SIL, PhonemeInventory


@dataclass(frozen=True, eq=False)
class TrialSpec:
    word: str
    pronunciation: tuple
    leading_silence: int
    dwells: tuple                    # frames per pronunciation phoneme
    trial_frames: int = 225
    eta: float = 0.0
    confusion: Optional[object] = None  # row-stochastic (K, K); default uniform
    seed: int = 0                    # provenance: the draw seed that produced the layout

    def __post_init__(self):
        if not self.pronunciation:
            raise ConfigError(f"{self.word!r}: empty pronunciation")
        if len(self.dwells) != len(self.pronunciation):
            raise ConfigError(f"{self.word!r}: need one dwell per phoneme")
        if any(d < 1 for d in self.dwells):
            raise ConfigError(f"{self.word!r}: dwells must be >= 1 frame")
        if self.leading_silence < 0:
            raise ConfigError("leading silence cannot be negative")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must be in [0, 1], got {self.eta}")
        if self.leading_silence + sum(self.dwells) > self.trial_frames:
            raise ConfigError(
                f"{self.word!r}: silence + dwells exceed the {self.trial_frames}-frame trial"
            )


@dataclass
class LabeledStream:
    stream: EmissionStream
    labels: list
    target: str
    spec: Optional[TrialSpec] = None


def simulate_trial(spec: TrialSpec, inventory: PhonemeInventory, frame_rate_hz=100.0) -> LabeledStream:
    k = len(inventory)
    confusion = spec.confusion
    if confusion is None:
        confusion = np.full((k, k), 1.0 / k)
    else:
        confusion = np.asarray(confusion, dtype=float)
        if confusion.shape != (k, k) or (confusion < 0).any():
            raise ConfigError("confusion matrix must be a non-negative (K, K) array")
        if np.abs(confusion.sum(axis=1) - 1.0).max() > 1e-9:
            raise ConfigError("confusion matrix rows must sum to 1")

    labels = []
    pos = 0
    if spec.leading_silence:
        labels.append(Segment(SIL, 0, spec.leading_silence))
        pos = spec.leading_silence
    for sym, d in zip(spec.pronunciation, spec.dwells):
        if sym not in inventory or sym == SIL:
            raise ConfigError(f"{spec.word!r}: {sym!r} is not a speakable inventory phoneme")
        labels.append(Segment(sym, pos, pos + d))
        pos += d
    if pos < spec.trial_frames:
        labels.append(Segment(SIL, pos, spec.trial_frames))

    probs = np.empty((spec.trial_frames, k))
    for seg in labels:
        i = inventory.index(seg.phoneme)
        onehot = np.zeros(k)
        onehot[i] = 1.0
        probs[seg.start:seg.end] = (1.0 - spec.eta) * onehot + spec.eta * confusion[i]
    stream = EmissionStream(probs, inventory, frame_rate_hz)
    return LabeledStream(stream, labels, spec.word, spec)


@dataclass(frozen=True)
class SessionTemplate:
    seed: int
    trial_frames: int = 225
    lead_range: tuple = (15, 35)     # inclusive bounds for leading silence
    dwell: DwellSpec = field(default_factory=DwellSpec)
    eta: float = 0.0
    confusion: Optional[object] = None
    frame_rate_hz: float = 100.0

    def __post_init__(self):
        lo, hi = self.lead_range
        if lo < 0 or hi < lo:
            raise ConfigError(f"bad lead_range {self.lead_range}")
        if not 0.0 <= self.eta <= 1.0:
            raise ConfigError(f"eta must be in [0, 1], got {self.eta}")


def simulate_session(words, counts, template: SessionTemplate, lex, inventory):
    """Simulate sum(counts) trials; trial i repeats its prompted word.

    Words with several pronunciations get one drawn uniformly per trial.
    Returns LabeledStream objects in the session's shuffled order.
    """
    if isinstance(counts, int):
        counts = [counts] * len(words)
    if len(counts) != len(words):
        raise ConfigError("need one count per word")
    for word in words:
        if word not in lex:
            raise LexiconError(f"session word {word!r} is not in the lexicon")
    prompts = [w for w, c in zip(words, counts) for _ in range(int(c))]
    if not prompts:
        raise ConfigError("session has no trials")

    ss = np.random.SeedSequence(template.seed)
    children = ss.spawn(len(prompts) + 1)
    order = np.random.default_rng(children[0]).permutation(len(prompts))
    sampler = DwellSampler(template.dwell, inventory)

    out = []
    for i, j in enumerate(order.tolist()):
        word = prompts[j]
        rng = np.random.default_rng(children[i + 1])
        prons = lex[word]
        pron = prons[int(rng.integers(len(prons)))] if len(prons) > 1 else prons[0]
        lo, hi = template.lead_range
        lead = int(rng.integers(lo, hi + 1))
        idx = np.array([inventory.index(s) for s in pron], dtype=np.int64)
        dwells = tuple(int(d) for d in sampler.draw(rng, idx))
        spec = TrialSpec(
            word=word,
            pronunciation=pron,
            leading_silence=lead,
            dwells=dwells,
            trial_frames=template.trial_frames,
            eta=template.eta,
            confusion=template.confusion,
            seed=int(children[i + 1].generate_state(1)[0]),
        )
        out.append(simulate_trial(spec, inventory, template.frame_rate_hz))
    return out
