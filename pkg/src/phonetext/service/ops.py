"""Operation handlers behind the HTTP endpoints.

The CLI calls these directly when no server is configured, so everything
here is plain functions of (registry, request model) -> response model.
"""

import hashlib
import threading
from pathlib import Path

import numpy as np

from .. import automaton as automaton_io
from ..automaton import PrefixAutomaton, build_automaton, canonical_json
from ..corpus import count_corpus, phoneme_priors, tokenize
from ..decoder import DecodeSession, DecoderConfig, decode_stream
from ..dwell import DwellSpec
from ..emissions import (
    EmissionStream,
    read_emissions_csv,
    read_labels,
    smooth_emissions,
    write_emissions_csv,
    write_labels,
)
from ..emitsim import SessionTemplate, simulate_session
from ..errors import ConfigError, DataError, StreamError
from ..lexicon import parse_cmu_dict, restrict_to_inventory
from ..metrics import render_report, score_trial, summarize_session
from ..oracle import exact_posterior, expand, total_variation
from ..phonemes import SIL, PhonemeInventory, full_inventory
from . import schemas


class LmRegistry:
    def __init__(self):
        self._models = {}
        self._lock = threading.Lock()

    def put(self, pa: PrefixAutomaton) -> str:
        lm_id = hashlib.sha256(automaton_io.serialize(pa)).hexdigest()[:12]
        with self._lock:
            self._models[lm_id] = pa
        return lm_id

    def get(self, lm_id: str) -> PrefixAutomaton:
        with self._lock:
            if lm_id not in self._models:
                raise DataError(f"no loaded model with id {lm_id!r}")
            return self._models[lm_id]

    def ids(self):
        with self._lock:
            return sorted(self._models)


def resolve_lm(registry: LmRegistry, lm_id=None, lm_path=None) -> PrefixAutomaton:
    if lm_id:
        return registry.get(lm_id)
    if lm_path:
        path = Path(lm_path)
        if not path.exists():
            raise DataError(f"model file not found: {path}")
        return automaton_io.load(path)
    raise DataError("request needs lm_id or lm_path")


def _summary(registry, pa) -> schemas.LmSummary:
    return schemas.LmSummary(
        lm_id=registry.put(pa),
        nodes=len(pa),
        words=len(pa.word_probs),
        word_total=pa.word_total,
        inventory=list(pa.inventory.symbols),
    )


def dwell_spec(model: schemas.DwellModel) -> DwellSpec:
    return DwellSpec(
        family=model.family,
        mean=model.mean,
        sil_mean=model.sil_mean,
        means=dict(model.means),
        r=model.r,
        pmfs=dict(model.pmfs),
    )


def decoder_config(model: schemas.DecoderConfigModel, seed: int) -> DecoderConfig:
    return DecoderConfig(
        seed=seed,
        particles=model.particles,
        resample_threshold=model.resample_threshold,
        laplace_alpha=model.laplace_alpha,
        smooth_input=model.smooth_input,
        dwell=dwell_spec(model.dwell),
        track_paths=model.track_paths,
    )


def build_lm(registry: LmRegistry, req: schemas.BuildLmRequest) -> schemas.BuildLmResponse:
    dict_path = Path(req.dict_path)
    if not dict_path.exists():
        raise DataError(f"dictionary file not found: {dict_path}")
    corpus_paths = [Path(p) for p in req.corpus_paths]
    for p in corpus_paths:
        if not p.exists():
            raise DataError(f"corpus file not found: {p}")

    lex = parse_cmu_dict(dict_path.read_text())
    inventory = (
        PhonemeInventory(req.inventory) if req.inventory is not None else full_inventory()
    )
    restricted = restrict_to_inventory(lex, inventory)

    words = []
    digests = []
    for p in corpus_paths:
        text = p.read_text()
        words.extend(tokenize(text))
        digests.append({"path": p.name, "sha256": hashlib.sha256(text.encode()).hexdigest()})
    stats = count_corpus(words, restricted, req.seed)
    priors_stats = stats
    if req.priors_scope == "full":
        priors_stats = count_corpus(words, lex, req.seed)
        priors_inv = PhonemeInventory(sorted(lex.alphabet()))
    else:
        priors_inv = inventory
    priors_vec = phoneme_priors(priors_stats, priors_inv)
    priors = {
        sym: float(p) for sym, p in zip(priors_inv.symbols, priors_vec) if sym != SIL
    }

    pa = build_automaton(restricted, stats, inventory)
    pa.provenance = {
        "corpus": digests,
        "dictionary": {
            "path": dict_path.name,
            "sha256": hashlib.sha256(dict_path.read_bytes()).hexdigest(),
        },
        "seed": req.seed,
        "priors_scope": req.priors_scope,
        "phoneme_priors": priors,
    }
    if req.out_path:
        automaton_io.save(pa, req.out_path)
    summary = _summary(registry, pa)
    return schemas.BuildLmResponse(
        **summary.model_dump(), out_path=req.out_path, priors=priors
    )


def load_lm(registry: LmRegistry, req: schemas.LoadLmRequest) -> schemas.LmSummary:
    return _summary(registry, resolve_lm(registry, lm_path=req.path))


def default_session_words(pa: PrefixAutomaton, n_words: int):
    """The most frequent modelled words, the usual prompt set."""
    ranked = sorted(pa.word_probs.items(), key=lambda kv: (-kv[1], kv[0]))
    return [w for w, _ in ranked[:n_words]]


def simulate(registry: LmRegistry, req: schemas.SimulateRequest) -> schemas.SimulateResponse:
    pa = resolve_lm(registry, req.lm_id, req.lm_path)
    words = req.words or default_session_words(pa, req.n_words)
    lex = _lexicon_of(pa)
    template = SessionTemplate(
        seed=req.seed,
        trial_frames=req.trial_frames,
        lead_range=tuple(req.lead_range),
        dwell=dwell_spec(req.dwell),
        eta=req.eta,
        frame_rate_hz=req.frame_rate_hz,
    )
    trials = simulate_session(words, req.counts, template, lex, pa.inventory)
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out = []
    for i, trial in enumerate(trials):
        stem = f"trial_{i:04d}"
        epath = out_dir / f"{stem}.csv"
        lpath = out_dir / f"{stem}.labels.csv"
        write_emissions_csv(trial.stream, epath)
        write_labels(lpath, trial.target, trial.labels)
        out.append(
            schemas.SimulatedTrial(
                index=i, target=trial.target, emissions_path=str(epath), labels_path=str(lpath)
            )
        )
    return schemas.SimulateResponse(trials=out)


def _lexicon_of(pa: PrefixAutomaton):
    """Word -> pronunciations recoverable from the automaton's word-end nodes."""
    from ..lexicon import PronouncingLexicon

    lex = PronouncingLexicon()
    for node in pa.nodes:
        for word, _ in node.homophones:
            lex.add(word, node.prefix)
    return lex


def _result_model(result, out_path=None) -> schemas.DecodeResultModel:
    d = result.to_dict()
    return schemas.DecodeResultModel(**d, out_path=str(out_path) if out_path else None)


def _write_result(result, path):
    payload = canonical_json(result.to_dict()) + b"\n"
    Path(path).write_bytes(payload)


def decode(registry: LmRegistry, req: schemas.DecodeRequest) -> schemas.DecodeResultModel:
    pa = resolve_lm(registry, req.lm_id, req.lm_path)
    if (req.emissions_path is None) == (req.frames is None):
        raise DataError("provide exactly one of emissions_path or frames")
    if req.emissions_path:
        stream = read_emissions_csv(req.emissions_path, pa.inventory, req.frame_rate_hz)
    else:
        stream = EmissionStream(np.array(req.frames), pa.inventory, req.frame_rate_hz)
    result = decode_stream(pa, stream, decoder_config(req.config, req.seed))
    if req.out_path:
        _write_result(result, req.out_path)
    return _result_model(result, req.out_path)


def decode_batch(registry: LmRegistry, req: schemas.DecodeBatchRequest) -> schemas.DecodeBatchResponse:
    pa = resolve_lm(registry, req.lm_id, req.lm_path)
    if (req.emissions_dir is None) == (req.emissions_paths is None):
        raise DataError("provide exactly one of emissions_dir or emissions_paths")
    if req.emissions_dir:
        root = Path(req.emissions_dir)
        if not root.is_dir():
            raise DataError(f"not a directory: {root}")
        paths = sorted(
            p for p in root.glob("*.csv") if not p.name.endswith(".labels.csv")
        )
    else:
        paths = [Path(p) for p in req.emissions_paths]
    if not paths:
        raise DataError("no emission files to decode")
    out_dir = Path(req.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    # one child seed per file, in listed order
    children = np.random.SeedSequence(req.seed).spawn(len(paths))
    out = []
    for path, child in zip(paths, children):
        stream = read_emissions_csv(path, pa.inventory)
        cfg = decoder_config(req.config, child)
        result = decode_stream(pa, stream, cfg)
        out_path = out_dir / (path.name.removesuffix(".csv") + ".result.json")
        _write_result(result, out_path)
        out.append(
            schemas.DecodedTrial(
                emissions_path=str(path),
                out_path=str(out_path),
                best_string=list(result.best_string),
                best_prob=result.best_prob,
            )
        )
    return schemas.DecodeBatchResponse(trials=out)


class _ResultView:
    def __init__(self, payload):
        from ..emissions import Segment

        self.best_string = tuple(payload["best_string"])
        self.segments = [
            Segment(s["phoneme"], s["start"], s["end"]) for s in payload["segments"]
        ]
        self.frames = payload["frames"]
        self.frame_rate_hz = payload["frame_rate_hz"]


def evaluate(registry: LmRegistry, req: schemas.EvaluateRequest) -> schemas.EvaluateResponse:
    import json

    results_dir = Path(req.results_dir)
    labels_dir = Path(req.labels_dir) if req.labels_dir else results_dir
    result_paths = sorted(results_dir.glob("*.result.json"))
    if not result_paths:
        raise DataError(f"no *.result.json files in {results_dir}")

    outcomes = []
    speech_seconds = []
    for rpath in result_paths:
        stem = rpath.name.removesuffix(".result.json")
        lpath = labels_dir / f"{stem}.labels.csv"
        if not lpath.exists():
            raise DataError(f"missing labels for {stem}: {lpath}")
        view = _ResultView(json.loads(rpath.read_text()))
        target, labels = read_labels(lpath)
        if labels[-1].end != view.frames:
            raise StreamError(f"{stem}: labels cover {labels[-1].end} frames, result has {view.frames}")
        outcomes.append(score_trial(view, target, labels))
        speech = sum(s.end - s.start for s in labels if s.phoneme != SIL)
        speech_seconds.append(speech / view.frame_rate_hz)

    word_probs = None
    inventory_size = None
    if req.lm_id or req.lm_path:
        pa = resolve_lm(registry, req.lm_id, req.lm_path)
        word_probs = pa.word_probs
        inventory_size = len(pa.inventory)
    trial_seconds = req.trial_seconds
    if req.wpm_basis == "speech":
        trial_seconds = sum(speech_seconds) / len(speech_seconds)
    report = summarize_session(
        outcomes,
        word_probs=word_probs,
        trial_seconds=trial_seconds,
        weighting=req.bw_weighting,
        inventory_size=inventory_size,
    )
    payload = report.to_dict()
    if req.out_path:
        Path(req.out_path).write_bytes(canonical_json(payload) + b"\n")
    return schemas.EvaluateResponse(
        report=payload, table=render_report(report), out_path=req.out_path
    )


def oracle_check(registry: LmRegistry, req: schemas.OracleCheckRequest) -> schemas.OracleCheckResponse:
    pa = resolve_lm(registry, req.lm_id, req.lm_path)
    spec = dwell_spec(req.dwell)
    chain = expand(pa, spec)
    stream = read_emissions_csv(req.emissions_path, pa.inventory)
    smoothed = smooth_emissions(stream, req.laplace_alpha)
    exact = exact_posterior(chain, smoothed, max_completions=req.max_completions)

    if req.n_seeds < 1:
        raise ConfigError("need at least one decoder seed")
    tvs = []
    agree = 0
    for child in np.random.SeedSequence(req.seed).spawn(req.n_seeds):
        cfg = DecoderConfig(
            seed=child,
            particles=req.particles,
            smooth_input=False,
            dwell=spec,
            track_paths=False,
        )
        session = DecodeSession(pa, cfg)
        for frame in smoothed.frames():
            session.step(frame)
        post = session.posterior()
        tvs.append(total_variation(exact.probs, post))
        if max(post.items(), key=lambda kv: kv[1])[0] == exact.top():
            agree += 1
    return schemas.OracleCheckResponse(
        exact_top=list(exact.top()),
        exact_top_prob=exact.probs[exact.top()],
        residual=exact.residual,
        tv=tvs,
        agreement=agree / req.n_seeds,
    )
