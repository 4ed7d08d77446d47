"""Trial scoring and information-theoretic session metrics.

A decoded trial lands in exactly one category: correct (non-SIL phoneme
sequence equals the labels and every phoneme overlaps its label segment by
at least one frame), omission (empty decoded string), partial (at least one
true-positive phoneme), or incorrect. Phoneme-level TP/FP/FN come from a
greedy temporal-order matching of non-SIL segments; edit distance and PER
ignore timing.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import MetricsError
from .phonemes import SIL

CATEGORIES = ("correct", "partial", "incorrect", "omission")


def levenshtein(a, b) -> int:
    """Edit distance between two symbol sequences (insert/delete/substitute)."""
    a, b = list(a), list(b)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[len(b)]


def _overlaps(a, b):
    return min(a.end, b.end) - max(a.start, b.start) >= 1


def _speech(segments):
    return [s for s in segments if s.phoneme != SIL]


def match_segments(output, labels):
    """Greedy temporal matching of non-SIL segments -> (tp, fp, fn).

    Two pointers walk both lists; a pair matches iff the phonemes are equal
    and the segments overlap by >= 1 frame. On a non-match the segment that
    ends first (output on ties) is unmatched: FP for outputs, FN for
    labels, including any emitted during labeled silence.
    """
    out, lab = _speech(output), _speech(labels)
    tp = fp = fn = 0
    i = j = 0
    while i < len(out) and j < len(lab):
        if out[i].phoneme == lab[j].phoneme and _overlaps(out[i], lab[j]):
            tp += 1
            i += 1
            j += 1
        elif out[i].end <= lab[j].end:
            fp += 1
            i += 1
        else:
            fn += 1
            j += 1
    fp += len(out) - i
    fn += len(lab) - j
    return tp, fp, fn


@dataclass
class TrialOutcome:
    target: str
    category: str
    decoded: tuple
    tp: int
    fp: int
    fn: int
    edit_distance: int
    label_phonemes: int
    per: float


def score_trial(result, target, labels) -> TrialOutcome:
    """Score one decoded trial against its time-aligned labels."""
    lab = _speech(labels)
    if not lab:
        raise MetricsError(f"trial for {target!r} has no labeled speech")
    out = _speech(result.segments) if result.best_string else []
    tp, fp, fn = match_segments(out, labels) if out else (0, 0, len(lab))

    if not result.best_string:
        category = "omission"
    else:
        aligned = len(out) == len(lab) and all(
            o.phoneme == l.phoneme and _overlaps(o, l) for o, l in zip(out, lab)
        )
        if aligned:
            category = "correct"
        elif tp >= 1:
            category = "partial"
        else:
            category = "incorrect"
    dist = levenshtein([s.phoneme for s in out], [s.phoneme for s in lab])
    return TrialOutcome(
        target=target,
        category=category,
        decoded=tuple(result.best_string),
        tp=tp,
        fp=fp,
        fn=fn,
        edit_distance=dist,
        label_phonemes=len(lab),
        per=100.0 * dist / len(lab),
    )


def itr_bits(n: int, acc: float) -> float:
    """Bits per selection among n symbols at a given accuracy (0*log0 = 0)."""
    if n < 2:
        raise MetricsError("need at least two symbols")
    if not 0.0 <= acc <= 1.0:
        raise MetricsError(f"accuracy {acc} outside [0, 1]")
    bits = math.log2(n)
    if acc > 0.0:
        bits += acc * math.log2(acc)
    if acc < 1.0:
        bits += (1.0 - acc) * math.log2((1.0 - acc) / (n - 1))
    return bits


def word_bits(acc: float, targets, word_probs, weighting="session") -> float:
    """Expected bits per word selection against the LM's word distribution.

    Each distinct target word z contributes
    acc*log2(acc/p(z)) + (1-acc)*log2((1-acc)/(1-p(z))), weighted by its
    share of the session's trials ("session") or by its renormalized LM
    probability ("corpus").
    """
    if not 0.0 <= acc <= 1.0:
        raise MetricsError(f"accuracy {acc} outside [0, 1]")
    if not targets:
        raise MetricsError("no target words")
    counts = {}
    for z in targets:
        counts[z] = counts.get(z, 0) + 1
    for z in counts:
        p = word_probs.get(z)
        if p is None or not 0.0 < p < 1.0:
            raise MetricsError(f"target {z!r} needs a word probability in (0, 1), got {p!r}")
    if weighting == "session":
        weights = {z: c / len(targets) for z, c in counts.items()}
    elif weighting == "corpus":
        total = sum(word_probs[z] for z in counts)
        weights = {z: word_probs[z] / total for z in counts}
    else:
        raise MetricsError(f"unknown weighting {weighting!r}")
    bits = 0.0
    for z, w in weights.items():
        p = word_probs[z]
        if acc > 0.0:
            bits += w * acc * math.log2(acc / p)
        if acc < 1.0:
            bits += w * (1.0 - acc) * math.log2((1.0 - acc) / (1.0 - p))
    return bits


def mutual_info_rate(bits_per_word: float, wpm: float) -> float:
    """Information rate in bits/min from bits/word and words/min."""
    return bits_per_word * wpm


def chance_accuracy(word_probs, targets, draws=0, seed=None):
    """Accuracy of guessing words from the LM distribution.

    Closed form: mean LM probability of the session targets. With draws > 0
    a Monte Carlo estimate from that many seeded draws is returned as well.
    Returns (closed_form, monte_carlo_or_None).
    """
    if not targets:
        raise MetricsError("no target words")
    missing = [z for z in targets if z not in word_probs]
    if missing:
        raise MetricsError(f"targets not in the language model: {sorted(set(missing))[:5]}")
    closed = sum(word_probs[z] for z in targets) / len(targets)
    if not draws:
        return closed, None
    words = sorted(word_probs)
    p = np.array([word_probs[w] for w in words])
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    sampled = rng.choice(len(words), size=draws, p=p)
    freq = np.bincount(sampled, minlength=len(words)) / draws
    index = {w: i for i, w in enumerate(words)}
    mc = sum(float(freq[index[z]]) for z in targets) / len(targets)
    return closed, mc


@dataclass
class SessionReport:
    n_trials: int
    category_pct: dict
    acc_w: float
    precision: float
    recall: float
    per: float
    wpm: float
    b_w: Optional[float] = None
    mi_bits_per_min: Optional[float] = None
    b_c: Optional[float] = None
    itr_bits_per_min: Optional[float] = None
    chance_acc: Optional[float] = None
    counts: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "n_trials": self.n_trials,
            "category_pct": {k: float(v) for k, v in self.category_pct.items()},
            "acc_w": float(self.acc_w),
            "precision": float(self.precision),
            "recall": float(self.recall),
            "per": float(self.per),
            "wpm": float(self.wpm),
            "counts": {k: int(v) for k, v in self.counts.items()},
        }
        for key in ("b_w", "mi_bits_per_min", "b_c", "itr_bits_per_min", "chance_acc"):
            val = getattr(self, key)
            out[key] = float(val) if val is not None else None
        return out


def summarize_session(
    outcomes,
    word_probs=None,
    trial_seconds=2.25,
    weighting="session",
    inventory_size=None,
    chance_draws=0,
    chance_seed=0,
) -> SessionReport:
    if not outcomes:
        raise MetricsError("no trials to summarize")
    n = len(outcomes)
    counts = {c: sum(1 for o in outcomes if o.category == c) for c in CATEGORIES}
    tp = sum(o.tp for o in outcomes)
    fp = sum(o.fp for o in outcomes)
    fn = sum(o.fn for o in outcomes)
    label_total = sum(o.label_phonemes for o in outcomes)
    acc_w = counts["correct"] / n
    wpm = 60.0 / trial_seconds

    report = SessionReport(
        n_trials=n,
        category_pct={c: 100.0 * counts[c] / n for c in CATEGORIES},
        acc_w=acc_w,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
        per=100.0 * sum(o.edit_distance for o in outcomes) / label_total,
        wpm=wpm,
        counts=counts,
    )
    if word_probs is not None:
        targets = [o.target for o in outcomes]
        report.b_w = word_bits(acc_w, targets, word_probs, weighting)
        report.mi_bits_per_min = mutual_info_rate(report.b_w, wpm)
        report.chance_acc = chance_accuracy(word_probs, targets, chance_draws, chance_seed)[0]
    if inventory_size is not None:
        report.b_c = itr_bits(inventory_size, report.recall)
        cpm = label_total / (n * trial_seconds / 60.0)
        report.itr_bits_per_min = report.b_c * cpm
    return report


def render_report(report: SessionReport) -> str:
    lines = [
        f"trials            {report.n_trials}",
        "categories (%)    "
        + "  ".join(f"{c}={report.category_pct[c]:.2f}" for c in CATEGORIES),
        f"word accuracy     {100.0 * report.acc_w:.2f}%",
        f"precision/recall  {report.precision:.3f} / {report.recall:.3f}",
        f"phoneme error     {report.per:.2f}%",
        f"words per minute  {report.wpm:.2f}",
    ]
    if report.b_w is not None:
        lines.append(f"bits per word     {report.b_w:.3f}")
        lines.append(f"info rate         {report.mi_bits_per_min:.2f} bits/min")
    if report.chance_acc is not None:
        lines.append(f"chance accuracy   {100.0 * report.chance_acc:.3f}%")
    if report.b_c is not None:
        lines.append(f"bits per phoneme  {report.b_c:.3f}")
        lines.append(f"phoneme info rate {report.itr_bits_per_min:.2f} bits/min")
    return "\n".join(lines)
