"""Phoneme symbols and inventories.

Symbols follow the ARPAbet convention used by the CMU pronouncing
dictionary, without stress digits. The silence marker SIL is not an ARPAbet
phoneme but is a first-class inventory member here: emission streams carry a
probability for it and the language model emits it between words.
"""

from dataclasses import dataclass

from .errors import LexiconError

SIL = "SIL"

VOWELS = frozenset(
    "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW".split()
)
CONSONANTS = frozenset(
    "B CH D DH F G HH JH K L M N NG P R S SH T TH V W Y Z ZH".split()
)
ARPABET = VOWELS | CONSONANTS


def kind_of(symbol):
    if symbol == SIL:
        return "silence"
    if symbol in VOWELS:
        return "vowel"
    if symbol in CONSONANTS:
        return "consonant"
    raise LexiconError(f"unknown phoneme symbol {symbol!r}")


@dataclass(frozen=True)
class Phoneme:
    symbol: str
    kind: str

    @classmethod
    def of(cls, symbol: str) -> "Phoneme":
        return cls(symbol, kind_of(symbol))


class PhonemeInventory:
    """An ordered phoneme set with SIL always present and always last.

    The order is significant: emission CSV columns, probability vectors and
    prior vectors all follow it.
    """

    def __init__(self, symbols):
        ordered = []
        seen = set()
        for sym in symbols:
            if sym == SIL:
                continue
            if sym in seen:
                raise LexiconError(f"duplicate phoneme in inventory: {sym}")
            kind_of(sym)  # validates
            seen.add(sym)
            ordered.append(sym)
        ordered.append(SIL)
        self._symbols = tuple(ordered)
        self._index = {s: i for i, s in enumerate(self._symbols)}

    @property
    def symbols(self) -> tuple:
        return self._symbols

    @property
    def sil_index(self) -> int:
        return len(self._symbols) - 1

    def __len__(self):
        return len(self._symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def __iter__(self):
        return iter(self._symbols)

    def __eq__(self, other):
        return isinstance(other, PhonemeInventory) and self._symbols == other._symbols

    def __repr__(self):
        return f"PhonemeInventory({list(self._symbols)!r})"

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise LexiconError(f"phoneme {symbol!r} not in inventory") from None

    def non_sil(self) -> tuple:
        return self._symbols[:-1]


def full_inventory() -> PhonemeInventory:
    """All 39 ARPAbet phonemes (sorted) plus SIL."""
    return PhonemeInventory(sorted(ARPABET))
