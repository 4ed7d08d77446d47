"""Phoneme-probability streams in, English words out.

A corpus-weighted prefix automaton over pronunciations supplies the word
prior; a bootstrap particle filter tracks it through time against noisy
per-frame phoneme distributions. An exactly expanded Markov chain gives a
reference posterior for small models, and the metrics module scores decoded
sessions (accuracy categories, phoneme error, information rates).
"""

from .automaton import PrefixAutomaton, build_automaton, load, save
from .corpus import count_corpus, phoneme_priors, tokenize
from .decoder import DecodeResult, DecodeSession, DecoderConfig, decode_stream
from .dwell import DwellSpec
from .emissions import EmissionStream, Segment, read_emissions_csv, write_emissions_csv
from .emitsim import SessionTemplate, TrialSpec, simulate_session, simulate_trial
from .errors import PhonetextError
from .lexicon import PronouncingLexicon, parse_cmu_dict
from .metrics import score_trial, summarize_session
from .oracle import exact_posterior, expand
from .phonemes import SIL, PhonemeInventory, full_inventory

__version__ = "0.1.0"

__all__ = [
    "PrefixAutomaton",
    "build_automaton",
    "load",
    "save",
    "count_corpus",
    "phoneme_priors",
    "tokenize",
    "DecodeResult",
    "DecodeSession",
    "DecoderConfig",
    "decode_stream",
    "DwellSpec",
    "EmissionStream",
    "Segment",
    "read_emissions_csv",
    "write_emissions_csv",
    "SessionTemplate",
    "TrialSpec",
    "simulate_session",
    "simulate_trial",
    "PhonetextError",
    "PronouncingLexicon",
    "parse_cmu_dict",
    "score_trial",
    "summarize_session",
    "exact_posterior",
    "expand",
    "SIL",
    "PhonemeInventory",
    "full_inventory",
    "__version__",
]
