import pytest

from phonetext.errors import LexiconError
from phonetext.phonemes import (
    ARPABET,
    CONSONANTS,
    SIL,
    VOWELS,
    Phoneme,
    PhonemeInventory,
    full_inventory,
    kind_of,
)


def test_alphabet_partition():
    assert VOWELS | CONSONANTS == ARPABET
    assert not VOWELS & CONSONANTS
    assert len(ARPABET) == 39
    assert SIL not in ARPABET


def test_kind_of():
    assert kind_of("OW") == "vowel"
    assert kind_of("N") == "consonant"
    assert kind_of(SIL) == "silence"
    with pytest.raises(LexiconError):
        kind_of("ZZ")


def test_phoneme_of():
    p = Phoneme.of("AA")
    assert p.symbol == "AA" and p.kind == "vowel"


def test_inventory_orders_sil_last():
    inv = PhonemeInventory(["N", "OW", "AA"])
    assert inv.symbols == ("N", "OW", "AA", SIL)
    assert inv.sil_index == 3
    assert inv.index("OW") == 1
    assert inv.non_sil() == ("N", "OW", "AA")
    assert "OW" in inv and "ZH" not in inv


def test_inventory_rejects_junk():
    with pytest.raises(LexiconError):
        PhonemeInventory(["N", "XX"])
    with pytest.raises(LexiconError):
        PhonemeInventory(["N", "N"])


def test_sil_only_inventory():
    # degenerate but legal; SIL is implicit, so no symbols means just SIL
    inv = PhonemeInventory([])
    assert inv.symbols == (SIL,)
    assert inv.non_sil() == ()


def test_full_inventory():
    inv = full_inventory()
    assert len(inv) == 40
    assert inv.symbols[-1] == SIL
    assert list(inv.non_sil()) == sorted(ARPABET)


def test_inventory_equality():
    a = PhonemeInventory(["N", "OW"])
    b = PhonemeInventory(["N", "OW"])
    c = PhonemeInventory(["OW", "N"])
    assert a == b
    assert a != c
