import math
from functools import lru_cache
from types import SimpleNamespace

import pytest
from hypothesis import given
from hypothesis import strategies as st

from phonetext.emissions import Segment
from phonetext.errors import MetricsError
from phonetext.metrics import (
    CATEGORIES,
    chance_accuracy,
    itr_bits,
    levenshtein,
    match_segments,
    mutual_info_rate,
    render_report,
    score_trial,
    summarize_session,
    word_bits,
)
from phonetext.phonemes import SIL


def test_levenshtein_frozen():
    assert levenshtein("kitten", "sitting") == 3
    assert levenshtein("", "") == 0
    assert levenshtein("", "abc") == 3
    assert levenshtein("abc", "") == 3
    assert levenshtein(("N", "OW"), ("N", "AA", "T")) == 2
    assert levenshtein("ab", "ba") == 2
    assert levenshtein(("N", "OW"), ("N", "OW")) == 0


def brute_distance(a, b):
    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a):
            return len(b) - j
        if j == len(b):
            return len(a) - i
        return min(
            rec(i + 1, j) + 1,
            rec(i, j + 1) + 1,
            rec(i + 1, j + 1) + (a[i] != b[j]),
        )

    return rec(0, 0)


seqs = st.lists(st.sampled_from("ABCD"), max_size=6).map(tuple)


@given(seqs, seqs)
def test_levenshtein_matches_recursive_definition(a, b):
    assert levenshtein(a, b) == brute_distance(a, b)


def seg(ph, start, end):
    return Segment(ph, start, end)


def test_match_segments_cases():
    labels = [seg(SIL, 0, 3), seg("N", 3, 5), seg("OW", 5, 8), seg(SIL, 8, 12)]
    aligned = [seg(SIL, 0, 4), seg("N", 4, 5), seg("OW", 5, 9), seg(SIL, 9, 12)]
    assert match_segments(aligned, labels) == (2, 0, 0)
    # substitution in the middle
    sub = [seg("N", 3, 5), seg("AA", 5, 8)]
    assert match_segments(sub, labels) == (1, 1, 1)
    # an extra burst during labeled silence is a false positive
    extra = [seg("T", 0, 2), seg("N", 3, 5), seg("OW", 5, 8)]
    assert match_segments(extra, labels) == (2, 1, 0)
    # correct phonemes, no temporal overlap: nothing matches
    late = [seg("N", 9, 10), seg("OW", 10, 12)]
    assert match_segments(late, labels) == (0, 2, 2)
    # equal end frames break toward consuming the output segment
    tie = [seg("T", 3, 5)]
    assert match_segments(tie, [seg("N", 3, 5), seg("OW", 5, 8)]) == (0, 1, 2)
    assert match_segments([], labels) == (0, 0, 2)


def decoded(best_string, segments):
    return SimpleNamespace(best_string=tuple(best_string), segments=list(segments))


LABELS = [seg(SIL, 0, 3), seg("N", 3, 6), seg("OW", 6, 9), seg(SIL, 9, 15)]


def test_score_trial_correct():
    out = score_trial(
        decoded(("no",), [seg(SIL, 0, 4), seg("N", 4, 7), seg("OW", 7, 10), seg(SIL, 10, 15)]),
        "no",
        LABELS,
    )
    assert out.category == "correct"
    assert (out.tp, out.fp, out.fn) == (2, 0, 0)
    assert out.edit_distance == 0
    assert out.per == 0.0
    assert out.decoded == ("no",)


def test_score_trial_partial():
    out = score_trial(
        decoded(("knob",), [seg(SIL, 0, 4), seg("N", 4, 7), seg("AA", 7, 10), seg("B", 10, 12), seg(SIL, 12, 15)]),
        "no",
        LABELS,
    )
    assert out.category == "partial"
    assert out.tp == 1
    assert out.edit_distance == 2
    assert out.per == pytest.approx(100.0)


def test_score_trial_incorrect():
    out = score_trial(
        decoded(("oat",), [seg(SIL, 0, 4), seg("OW", 4, 6), seg("T", 6, 9), seg(SIL, 9, 15)]),
        "no",
        LABELS,
    )
    assert out.category == "incorrect"
    assert out.tp == 0


def test_score_trial_right_phonemes_wrong_time():
    out = score_trial(
        decoded(("no",), [seg(SIL, 0, 10), seg("N", 10, 12), seg("OW", 12, 14), seg(SIL, 14, 15)]),
        "no",
        LABELS,
    )
    assert out.category == "incorrect"  # no frame overlap, so no credit
    assert out.edit_distance == 0       # but the edit distance ignores timing


def test_score_trial_omission():
    out = score_trial(decoded((), [seg(SIL, 0, 15)]), "no", LABELS)
    assert out.category == "omission"
    assert (out.tp, out.fp, out.fn) == (0, 0, 2)
    assert out.edit_distance == 2
    assert out.per == pytest.approx(100.0)


def test_score_trial_needs_labeled_speech():
    with pytest.raises(MetricsError):
        score_trial(decoded((), [seg(SIL, 0, 5)]), "no", [seg(SIL, 0, 5)])


def test_itr_bits_identities():
    for n in (2, 8, 10, 28):
        assert itr_bits(n, 1.0) == math.log2(n)
        assert abs(itr_bits(n, 1.0 / n)) < 1e-12
    assert itr_bits(4, 0.0) == pytest.approx(math.log2(4) + math.log2(1 / 3))
    with pytest.raises(MetricsError):
        itr_bits(1, 0.5)
    with pytest.raises(MetricsError):
        itr_bits(4, 1.5)


def test_word_bits_frozen():
    assert word_bits(1.0, ["a"], {"a": 0.25}) == pytest.approx(2.0)
    assert word_bits(0.5, ["a"], {"a": 0.5}) == pytest.approx(0.0)
    probs = {"a": 0.5, "b": 0.1}
    session = word_bits(1.0, ["a", "b", "b"], probs, weighting="session")
    corpus = word_bits(1.0, ["a", "b", "b"], probs, weighting="corpus")
    assert session == pytest.approx((1 / 3) * 1.0 + (2 / 3) * math.log2(10))
    assert corpus == pytest.approx((5 / 6) * 1.0 + (1 / 6) * math.log2(10))


def test_word_bits_validation():
    with pytest.raises(MetricsError):
        word_bits(0.5, [], {"a": 0.5})
    with pytest.raises(MetricsError):
        word_bits(0.5, ["b"], {"a": 0.5})
    with pytest.raises(MetricsError):
        word_bits(0.5, ["a"], {"a": 1.0})
    with pytest.raises(MetricsError):
        word_bits(1.5, ["a"], {"a": 0.5})
    with pytest.raises(MetricsError):
        word_bits(0.5, ["a"], {"a": 0.5}, weighting="median")


def test_word_bits_reduces_to_itr_on_uniform_targets():
    n = 8
    words = [f"w{i}" for i in range(n)]
    probs = {w: 1.0 / n for w in words}
    for acc in (0.3, 0.7, 1.0):
        assert word_bits(acc, words, probs) == pytest.approx(itr_bits(n, acc))


def test_mutual_info_rate():
    assert mutual_info_rate(3.31, 26.67) == pytest.approx(3.31 * 26.67)
    assert mutual_info_rate(0.0, 26.67) == 0.0


def test_chance_accuracy_closed_vs_sampled():
    probs = {"to": 0.5, "no": 0.3, "at": 0.15, "ooh": 0.05}
    targets = ["to", "no", "no", "ooh"]
    closed, mc = chance_accuracy(probs, targets, draws=200_000, seed=8)
    assert closed == pytest.approx((0.5 + 0.3 + 0.3 + 0.05) / 4)
    assert mc == pytest.approx(closed, abs=0.01)
    closed_only, none = chance_accuracy(probs, targets)
    assert closed_only == closed and none is None
    with pytest.raises(MetricsError):
        chance_accuracy(probs, ["absent"])
    with pytest.raises(MetricsError):
        chance_accuracy(probs, [])


def outcome(category, target="no", tp=0, fp=0, fn=0, dist=0, lab=2):
    from phonetext.metrics import TrialOutcome

    return TrialOutcome(
        target=target, category=category, decoded=(target,) if category != "omission" else (),
        tp=tp, fp=fp, fn=fn, edit_distance=dist, label_phonemes=lab, per=100.0 * dist / lab,
    )


def test_summarize_session():
    outcomes = [
        outcome("correct", tp=2),
        outcome("correct", tp=2),
        outcome("partial", tp=1, fp=1, fn=1, dist=1),
        outcome("omission", fn=2, dist=2),
    ]
    probs = {"no": 0.25}
    report = summarize_session(outcomes, word_probs=probs, trial_seconds=2.25, inventory_size=9)
    assert report.n_trials == 4
    assert report.counts == {"correct": 2, "partial": 1, "incorrect": 0, "omission": 1}
    assert sum(report.counts.values()) == 4
    assert sum(report.category_pct.values()) == pytest.approx(100.0)
    assert report.acc_w == 0.5
    assert report.precision == pytest.approx(5 / 6)
    assert report.recall == pytest.approx(5 / 8)
    assert report.per == pytest.approx(100.0 * 3 / 8)
    assert report.wpm == pytest.approx(60.0 / 2.25)
    assert report.b_w == pytest.approx(word_bits(0.5, ["no"] * 4, probs))
    assert report.mi_bits_per_min == pytest.approx(report.b_w * report.wpm)
    assert report.chance_acc == pytest.approx(0.25)
    assert report.b_c == pytest.approx(itr_bits(9, report.recall))
    cpm = 8 / (4 * 2.25 / 60.0)
    assert report.itr_bits_per_min == pytest.approx(report.b_c * cpm)
    rounded = report.to_dict()
    assert rounded["counts"]["correct"] == 2
    assert rounded["b_w"] == pytest.approx(report.b_w)

    with pytest.raises(MetricsError):
        summarize_session([])


def test_categories_partition_every_trial():
    outcomes = [outcome(c) for c in CATEGORIES for _ in range(3)]
    report = summarize_session(outcomes)
    assert sum(report.counts[c] for c in CATEGORIES) == len(outcomes)
    assert report.b_w is None and report.b_c is None


def test_render_report_lines():
    report = summarize_session([outcome("correct", tp=2)], word_probs={"no": 0.25})
    text = render_report(report)
    assert "word accuracy     100.00%" in text
    assert "bits per word" in text
    assert "chance accuracy" in text
    assert "trials            1" in text
