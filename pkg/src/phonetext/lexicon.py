"""CMU-style pronouncing dictionary parsing and inventory restriction."""

import logging
import re

from .errors import DictFormatError, LexiconError
from .phonemes import ARPABET, PhonemeInventory

log = logging.getLogger(__name__)

# headwords the corpus tokenizer can actually produce: letters with
# internal apostrophes, starting with a letter
_WORD_RE = re.compile(r"^[A-Za-z](?:[A-Za-z']*[A-Za-z])?$")
_VARIANT_RE = re.compile(r"^(.*)\((\d+)\)$")
_PHONE_RE = re.compile(r"^([A-Z]+)([0-2])?$")


class PronouncingLexicon:
    """word -> ordered list of pronunciations (tuples of stress-free symbols)."""

    def __init__(self, entries=None):
        self._entries = {}
        if entries:
            for word, prons in entries.items():
                for pron in prons:
                    self.add(word, pron)

    def add(self, word, pron):
        pron = tuple(pron)
        if not pron:
            raise LexiconError(f"empty pronunciation for {word!r}")
        for sym in pron:
            if sym not in ARPABET:
                raise LexiconError(f"{word!r}: unknown phoneme {sym!r}")
        prons = self._entries.setdefault(word, [])
        if pron not in prons:
            prons.append(pron)

    def __contains__(self, word):
        return word in self._entries

    def __len__(self):
        return len(self._entries)

    def __getitem__(self, word):
        return tuple(self._entries[word])

    def __eq__(self, other):
        if not isinstance(other, PronouncingLexicon):
            return NotImplemented
        return self._entries == other._entries

    def words(self):
        return self._entries.keys()

    def items(self):
        for word, prons in self._entries.items():
            yield word, tuple(prons)

    def alphabet(self):
        """Set of phoneme symbols used by at least one pronunciation."""
        out = set()
        for prons in self._entries.values():
            for pron in prons:
                out.update(pron)
        return out


def parse_cmu_dict(text, strict=False):
    """Parse CMU dictionary text into a PronouncingLexicon.

    Lines look like ``WORD  PH PH PH`` with alternate pronunciations as
    ``WORD(1)``; comment lines start with ``;;;``. Stress digits are
    stripped, headwords are lowercased, and headwords that the corpus
    tokenizer cannot produce (punctuation entries, abbreviations,
    hyphenations) are skipped. Malformed lines raise DictFormatError when
    strict, otherwise they are skipped with a warning.
    """
    lex = PronouncingLexicon()
    skipped = 0
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";;;"):
            continue
        try:
            word, pron = _parse_line(line, line_no)
        except DictFormatError:
            if strict:
                raise
            skipped += 1
            continue
        if word is None:
            continue
        lex.add(word, pron)
    if skipped:
        log.warning("skipped %d malformed dictionary lines", skipped)
    if len(lex) == 0:
        raise LexiconError("dictionary contained no usable entries")
    return lex


def _parse_line(line, line_no):
    parts = line.split()
    if len(parts) < 2:
        raise DictFormatError("no pronunciation", line_no)
    head = parts[0]
    m = _VARIANT_RE.match(head)
    if m:
        head = m.group(1)
    if not _WORD_RE.match(head):
        return None, None  # not a speakable headword; skip silently
    pron = []
    for tok in parts[1:]:
        m = _PHONE_RE.match(tok.upper())
        if not m or m.group(1) not in ARPABET:
            raise DictFormatError(f"unparseable phoneme token {tok!r}", line_no)
        pron.append(m.group(1))
    return head.lower(), tuple(pron)


def format_cmu_dict(lex):
    """Inverse of parse_cmu_dict (modulo skipped lines and stress digits)."""
    lines = []
    for word in sorted(lex.words()):
        for i, pron in enumerate(lex[word]):
            head = word.upper() if i == 0 else f"{word.upper()}({i})"
            lines.append(f"{head}  {' '.join(pron)}")
    return "\n".join(lines) + "\n"


def restrict_to_inventory(lex, inventory: PhonemeInventory):
    """Keep only pronunciations made entirely of inventory phonemes.

    Words left with no pronunciation are dropped. Raises if nothing
    survives.
    """
    allowed = set(inventory.non_sil())
    out = PronouncingLexicon()
    for word, prons in lex.items():
        for pron in prons:
            if all(sym in allowed for sym in pron):
                out.add(word, pron)
    if len(out) == 0:
        raise LexiconError("no lexicon entries survive the inventory restriction")
    return out
