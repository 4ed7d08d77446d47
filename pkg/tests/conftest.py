"""Shared fixtures: a hand-trimmed dictionary, a synthetic corpus with
pinned word counts, and helpers for building small automata inline."""

from pathlib import Path

import numpy as np
import pytest

from phonetext.automaton import build_automaton
from phonetext.corpus import count_corpus, tokenize
from phonetext.lexicon import PronouncingLexicon, parse_cmu_dict, restrict_to_inventory
from phonetext.phonemes import ARPABET, PhonemeInventory

DATA = Path(__file__).parent / "data"

INV8 = PhonemeInventory(["AA", "AE", "B", "IY", "N", "OW", "T", "UW"])

# Exact per-word occurrence counts for the synthetic corpus. The first
# block stays within INV8; the last three words need phonemes outside it
# and drop out after restriction.
MINI_COUNTS = {
    "to": 600, "no": 500, "on": 450, "not": 400, "at": 350, "know": 300,
    "bat": 250, "bee": 200, "eat": 150, "tea": 120, "too": 100, "two": 90,
    "beat": 80, "boot": 70, "tan": 60, "ban": 50, "toe": 45, "oat": 40,
    "bean": 35, "neat": 30, "nab": 25, "knob": 20, "tab": 15, "knot": 12,
    "boo": 10, "ooh": 3,
    "the": 800, "lead": 50, "it's": 40,
}

RESTRICTED_TOTAL = 4005  # sum of the INV8 block above


def mini_corpus_text() -> str:
    """Deterministic shuffled prose hitting MINI_COUNTS exactly."""
    words = [w for w, c in MINI_COUNTS.items() for _ in range(c)]
    rng = np.random.default_rng(20101)
    words = [words[i] for i in rng.permutation(len(words))]
    sentences = []
    i = 0
    while i < len(words):
        n = int(rng.integers(6, 13))
        chunk = words[i : i + n]
        sentences.append(" ".join(chunk).capitalize() + ".")
        i += n
    return "\n".join(sentences) + "\n"


def toy_automaton(entries, counts, seed=0, inventory=None):
    """Automaton from explicit pronunciations and per-word counts."""
    lex = PronouncingLexicon(entries)
    tokens = [w for w, c in counts.items() for _ in range(c)]
    stats = count_corpus(tokens, lex, seed)
    return build_automaton(lex, stats, inventory)


@pytest.fixture(scope="session")
def corpus_text():
    return mini_corpus_text()


@pytest.fixture(scope="session")
def full_lexicon():
    return parse_cmu_dict((DATA / "mini_cmudict.txt").read_text())


@pytest.fixture(scope="session")
def restricted_lexicon(full_lexicon):
    return restrict_to_inventory(full_lexicon, INV8)


@pytest.fixture(scope="session")
def mini_stats(corpus_text, restricted_lexicon):
    return count_corpus(tokenize(corpus_text), restricted_lexicon, seed=7)


@pytest.fixture(scope="session")
def mini_lm(restricted_lexicon, mini_stats):
    return build_automaton(restricted_lexicon, mini_stats, INV8)


@pytest.fixture(scope="session")
def corpus_file(tmp_path_factory, corpus_text):
    path = tmp_path_factory.mktemp("corpus") / "corpus.txt"
    path.write_text(corpus_text)
    return path


def synth_scale_lexicon(n_words=15000, seed=4021) -> PronouncingLexicon:
    """Random dictionary at realistic scale for build/serialization tests."""
    rng = np.random.default_rng(seed)
    letters = np.array(list("abcdefghijklmnopqrstuvwxyz"))
    arpabet = sorted(ARPABET)
    entries = {}
    while len(entries) < n_words:
        length = int(rng.integers(3, 11))
        word = "".join(rng.choice(letters, size=length))
        if word in entries:
            continue
        prons = []
        for _ in range(2 if rng.random() < 0.08 else 1):
            plen = int(rng.integers(2, 9))
            pron = tuple(arpabet[j] for j in rng.integers(0, len(arpabet), plen))
            if pron not in prons:
                prons.append(pron)
        entries[word] = prons
    return PronouncingLexicon(entries)


def synth_scale_tokens(lex, n_tokens=60000, seed=4022):
    """Zipf-weighted token stream over the scale lexicon."""
    words = sorted(lex.words())
    rng = np.random.default_rng(seed)
    p = 1.0 / np.arange(1, len(words) + 1)
    p /= p.sum()
    idx = rng.choice(len(words), size=n_tokens, p=p)
    return [words[i] for i in idx]
