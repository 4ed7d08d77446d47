"""Corpus tokenization and phoneme-frequency accounting.

Counting expands every word occurrence to a pronunciation. Words with a
single pronunciation take it directly; for words with several, one is drawn
uniformly per occurrence, in corpus position order, from
numpy.random.default_rng(seed). Two runs with the same corpus, lexicon and
seed produce identical statistics.
"""

import re
from dataclasses import dataclass, field

import numpy as np

from .errors import CorpusError
from .phonemes import PhonemeInventory

_TOKEN_RE = re.compile(r"[a-z]+(?:'[a-z]+)*")


def tokenize(text):
    """Case-folded alphabetic tokens; internal apostrophes survive."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class CorpusStats:
    word_counts: dict = field(default_factory=dict)
    total_words: int = 0
    phoneme_counts: dict = field(default_factory=dict)
    total_phonemes: int = 0
    # (word, pronunciation index) -> times that pronunciation was drawn;
    # the automaton needs the split, not just the word totals
    pronunciation_counts: dict = field(default_factory=dict)

    def check(self):
        if sum(self.word_counts.values()) != self.total_words:
            raise CorpusError("word counts do not sum to total_words")
        if sum(self.phoneme_counts.values()) != self.total_phonemes:
            raise CorpusError("phoneme counts do not sum to total_phonemes")
        per_word = {}
        for (word, _), n in self.pronunciation_counts.items():
            per_word[word] = per_word.get(word, 0) + n
        if per_word != self.word_counts:
            raise CorpusError("pronunciation draws do not sum to word counts")


def count_corpus(words, lex, seed):
    """Count lexicon words (others are dropped) and their expanded phonemes.

    `words` is a token iterable, usually tokenize() output. Raises if no
    token is in the lexicon.
    """
    rng = np.random.default_rng(seed)
    stats = CorpusStats()
    wc = stats.word_counts
    pc = stats.phoneme_counts
    draws = stats.pronunciation_counts
    for word in words:
        if word not in lex:
            continue
        prons = lex[word]
        if len(prons) > 1:
            k = int(rng.integers(len(prons)))
        else:
            k = 0
        wc[word] = wc.get(word, 0) + 1
        draws[(word, k)] = draws.get((word, k), 0) + 1
        for sym in prons[k]:
            pc[sym] = pc.get(sym, 0) + 1
        stats.total_words += 1
        stats.total_phonemes += len(prons[k])
    if stats.total_words == 0:
        raise CorpusError("no corpus token matched the lexicon")
    return stats


def phoneme_priors(stats, inventory: PhonemeInventory):
    """Relative phoneme frequencies as a vector over the inventory.

    Non-SIL entries sum to 1; SIL and unseen phonemes get 0.
    """
    if stats.total_phonemes == 0:
        raise CorpusError("empty statistics")
    stray = set(stats.phoneme_counts) - set(inventory.non_sil())
    if stray:
        raise CorpusError(f"statistics contain phonemes outside the inventory: {sorted(stray)}")
    vec = np.zeros(len(inventory))
    for i, sym in enumerate(inventory.non_sil()):
        vec[i] = stats.phoneme_counts.get(sym, 0) / stats.total_phonemes
    return vec
