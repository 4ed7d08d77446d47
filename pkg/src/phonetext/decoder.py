"""Bootstrap particle filter over the prefix automaton.

Each particle is a hypothesis (current node, frames spent in it, weight,
path). Per frame: every particle flips an independent leave coin at its
dwell hazard given time in state, leavers jump to a successor drawn from
the node's transition distribution (a jump into the root completes a
word), every particle's weight is multiplied by the frame's probability for
its node's emitted phoneme, weights are renormalized, and the ensemble is
systematically resampled when the effective particle count drops below the
threshold. Weights live in log domain; per-particle state lives in flat
numpy arrays so stepping is O(P) vector work, not a Python loop.

Dwell is applied in hazard form rather than by drawing a duration at state
entry. The law is identical, but a drawn counter is copied by resampling,
so after a long matched segment every clone of a lineage leaves the state
on the same frame and segment-boundary timing rests on a handful of
distinct draws. Per-frame hazard coins keep leave times independent across
particles no matter how they were cloned.

The posterior over output strings sums weights by the sequence of completed
words (homophones resolved to the most frequent spelling), matching how the
final answer is selected.
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .automaton import PrefixAutomaton
from .dwell import DwellSampler, DwellSpec
from .emissions import EmissionFrame, EmissionStream, Segment
from .errors import ConfigError, DecodeError, StreamError

WEIGHT_SUM_TOL = 1e-9


def effective_particles(weights) -> float:
    """1 / sum(w^2) for normalized weights."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or (w < 0).any():
        raise DecodeError("weights must be a non-negative vector")
    if abs(w.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise DecodeError(f"weights sum to {w.sum()!r}, expected 1")
    return float(1.0 / (w ** 2).sum())


@dataclass(frozen=True)
class DecoderConfig:
    seed: int
    particles: int = 2000
    resample_threshold: Optional[float] = None  # defaults to particles / 2
    laplace_alpha: float = 0.01
    smooth_input: bool = True
    # Geometric dwell on the decoding side: its early hazard catches speech
    # onsets and its heavy tail keeps root dwellers alive through long
    # trailing silence, where concentrated families go extinct under
    # resampling and spurious short words get appended.
    dwell: DwellSpec = field(
        default_factory=lambda: DwellSpec(family="geometric", mean=10.0, sil_mean=75.0)
    )
    track_paths: bool = True

    def __post_init__(self):
        if self.particles < 1:
            raise ConfigError("need at least one particle")
        if self.smooth_input and self.laplace_alpha <= 0:
            raise ConfigError("laplace_alpha must be > 0")
        thresh = self.threshold()
        if not 0 <= thresh <= self.particles:
            raise ConfigError(f"resample threshold {thresh} outside [0, particles]")

    def threshold(self) -> float:
        if self.resample_threshold is None:
            return self.particles / 2.0
        return float(self.resample_threshold)


class StepSummary(NamedTuple):
    t: int
    p_eff: float
    best_string: tuple
    log_normalizer: float


@dataclass
class DecodeResult:
    best_string: tuple
    best_prob: float
    segments: list
    per_frame_best: list
    frames: int
    frame_rate_hz: float
    log_normalizer: float

    def to_dict(self):
        return {
            "best_string": list(self.best_string),
            "best_prob": float(self.best_prob),
            "segments": [
                {"phoneme": s.phoneme, "start": s.start, "end": s.end} for s in self.segments
            ],
            "per_frame_best": [list(b) for b in self.per_frame_best],
            "frames": self.frames,
            "frame_rate_hz": float(self.frame_rate_hz),
            "log_normalizer": float(self.log_normalizer),
        }


class _Tables:
    """Automaton flattened for vector stepping.

    Transition cdfs of all nodes are laid out in one ascending array with
    node i's segment shifted into (i, i+1], so one searchsorted of
    node_id + U(0,1) samples every pending jump at once.
    """

    def __init__(self, pa: PrefixAutomaton):
        self.emit_idx = np.array(
            [pa.inventory.index(n.emitted()) for n in pa.nodes], dtype=np.int64
        )
        self.words = []
        word_ids = {}
        flat_cdf, flat_succ, flat_word = [], [], []
        for node in pa.nodes:
            edges = pa.transition_distribution(node.id)
            acc = 0.0
            for succ, _, p in edges:
                acc += p
                flat_cdf.append(node.id + acc)
                flat_succ.append(succ)
                if succ == pa.root_id and node.word_total:
                    word = pa.best_homophone(node.id)
                    wid = word_ids.setdefault(word, len(self.words))
                    if wid == len(self.words):
                        self.words.append(word)
                    flat_word.append(wid)
                else:
                    flat_word.append(-1)
            flat_cdf[-1] = node.id + 1.0  # exact top; probs sum to 1 within 1e-12
        self.flat_cdf = np.array(flat_cdf)
        self.flat_succ = np.array(flat_succ, dtype=np.int64)
        self.flat_word = np.array(flat_word, dtype=np.int64)


class DecodeSession:
    def __init__(self, automaton: PrefixAutomaton, config: DecoderConfig):
        self.automaton = automaton
        self.config = config
        self.inventory = automaton.inventory
        self._tables = _Tables(automaton)
        self._sampler = DwellSampler(config.dwell, self.inventory)
        self._rng = np.random.default_rng(config.seed)
        p = config.particles
        self._nodes = np.zeros(p, dtype=np.int64)
        self._elapsed = np.zeros(p, dtype=np.int64)
        self._logw = np.full(p, -math.log(p))
        self._class_id = np.zeros(p, dtype=np.int64)
        self._last_complete = np.full(p, -1, dtype=np.int64)
        self._classes = [()]
        self._class_complete = [-1]  # earliest final-word completion frame per class
        self._memo = {}              # (class id, word id) -> extended class id
        if config.track_paths:
            self._hist = np.empty(p, dtype=object)
            self._hist[:] = [(None, 0, 0)] * p
        else:
            self._hist = None
        self.t = 0
        self.log_normalizer = 0.0
        self.per_frame_best = []

    # -- stepping -------------------------------------------------------

    def step(self, frame: EmissionFrame) -> StepSummary:
        if frame.t != self.t:
            raise StreamError(f"expected frame {self.t}, got {frame.t}")
        probs = np.asarray(frame.probs, dtype=float)
        if probs.shape != (len(self.inventory),):
            raise StreamError("frame does not match the session inventory")
        if self.config.smooth_input:
            a = self.config.laplace_alpha
            probs = (probs + a) / (1.0 + a * len(self.inventory))

        hazard = self._sampler.leave_prob(self._tables.emit_idx[self._nodes], self._elapsed)
        leavers = np.flatnonzero(self._rng.random(hazard.size) < hazard)
        if leavers.size:
            self._jump(leavers)

        with np.errstate(divide="ignore"):
            self._logw += np.log(probs)[self._tables.emit_idx[self._nodes]]
        self._elapsed += 1

        m = self._logw.max()
        if m == -np.inf:
            raise DecodeError("emission/model mismatch: all particle weights vanished")
        w = np.exp(self._logw - m)
        z = w.sum()
        self.log_normalizer += m + math.log(z)
        self._logw -= m + math.log(z)
        w /= z

        p_eff = float(1.0 / (w ** 2).sum())
        sums = np.bincount(self._class_id, weights=w, minlength=len(self._classes))
        best = self._classes[int(np.argmax(sums))]
        self.per_frame_best.append(best)

        if p_eff < self.config.threshold():
            self._resample(w)

        self.t += 1
        return StepSummary(self.t - 1, p_eff, best, self.log_normalizer)

    def _jump(self, idx):
        t = self.t
        u = self._rng.random(idx.size)
        pos = np.searchsorted(self._tables.flat_cdf, self._nodes[idx] + u, side="right")
        new_nodes = self._tables.flat_succ[pos]
        wid = self._tables.flat_word[pos]

        done = np.flatnonzero(wid >= 0)
        if done.size:
            self._complete(idx[done], wid[done], t)

        self._nodes[idx] = new_nodes
        self._elapsed[idx] = 0
        if self._hist is not None:
            hist = self._hist
            for i, nd in zip(idx.tolist(), new_nodes.tolist()):
                hist[i] = (hist[i], nd, t)

    def _complete(self, particle_idx, word_idx, t):
        n_words = len(self._tables.words)
        pairs = self._class_id[particle_idx] * n_words + word_idx
        uniq, inv = np.unique(pairs, return_inverse=True)
        mapped = np.empty(uniq.size, dtype=np.int64)
        for j, pair in enumerate(uniq.tolist()):
            key = (pair // n_words, pair % n_words)
            nid = self._memo.get(key)
            if nid is None:
                nid = len(self._classes)
                self._classes.append(self._classes[key[0]] + (self._tables.words[key[1]],))
                self._class_complete.append(t)
                self._memo[key] = nid
            mapped[j] = nid
        self._class_id[particle_idx] = mapped[inv]
        self._last_complete[particle_idx] = t

    def _resample(self, w):
        p = self.config.particles
        cum = np.cumsum(w)
        cum[-1] = 1.0
        positions = (np.arange(p) + self._rng.random()) / p
        take = np.searchsorted(cum, positions, side="right")
        self._nodes = self._nodes[take]
        self._elapsed = self._elapsed[take]
        self._class_id = self._class_id[take]
        self._last_complete = self._last_complete[take]
        if self._hist is not None:
            self._hist = self._hist[take]
        self._logw = np.full(p, -math.log(p))

    # -- results --------------------------------------------------------

    def posterior(self) -> dict:
        """Current posterior over word strings (class -> probability)."""
        w = np.exp(self._logw)
        w /= w.sum()
        sums = np.bincount(self._class_id, weights=w, minlength=len(self._classes))
        return {self._classes[i]: float(sums[i]) for i in range(len(self._classes)) if sums[i] > 0}

    def finalize(self) -> DecodeResult:
        if self.t == 0:
            raise DecodeError("no frames decoded")
        w = np.exp(self._logw)
        w /= w.sum()
        sums = np.bincount(self._class_id, weights=w, minlength=len(self._classes))
        top = sums.max()
        tied = np.flatnonzero(sums == top)
        best_id = min(
            tied.tolist(), key=lambda i: (self._class_complete[i], self._classes[i])
        )
        best = self._classes[best_id]

        if self._hist is None:
            raise DecodeError("paths were not tracked; only posterior() is available")
        members = np.flatnonzero(self._class_id == best_id)
        rep = members[int(np.argmax(w[members]))]
        segments = self._segments_of(rep)
        return DecodeResult(
            best_string=best,
            best_prob=float(sums[best_id]),
            segments=segments,
            per_frame_best=list(self.per_frame_best),
            frames=self.t,
            frame_rate_hz=100.0,
            log_normalizer=self.log_normalizer,
        )

    def _segments_of(self, particle):
        chain = []
        cell = self._hist[particle]
        while cell is not None:
            parent, node, frame = cell
            chain.append((node, frame))
            cell = parent
        chain.reverse()
        symbols = self.inventory.symbols
        segments = []
        for k, (node, start) in enumerate(chain):
            end = chain[k + 1][1] if k + 1 < len(chain) else self.t
            if end > start:
                segments.append(Segment(symbols[self._tables.emit_idx[node]], start, end))
        return segments


def decode_stream(automaton, stream: EmissionStream, config: DecoderConfig) -> DecodeResult:
    if stream.inventory != automaton.inventory:
        raise StreamError("stream inventory does not match the language model")
    session = DecodeSession(automaton, config)
    for frame in stream.frames():
        session.step(frame)
    result = session.finalize()
    result.frame_rate_hz = stream.frame_rate_hz
    return result
