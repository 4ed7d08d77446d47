import math

import numpy as np
import pytest
from conftest import INV8, toy_automaton

from phonetext.decoder import DecodeSession, DecoderConfig, decode_stream, effective_particles
from phonetext.dwell import DwellSpec
from phonetext.emissions import EmissionStream, Segment
from phonetext.emitsim import TrialSpec, simulate_trial
from phonetext.errors import ConfigError, DecodeError, StreamError
from phonetext.phonemes import SIL, PhonemeInventory

GEO = DwellSpec(family="geometric", mean=8.0, sil_mean=15.0)


def sil_stream(frames, inv, frame_rate_hz=100.0):
    probs = np.zeros((frames, len(inv)))
    probs[:, inv.sil_index] = 1.0
    return EmissionStream(probs, inv, frame_rate_hz)


@pytest.fixture(scope="module")
def no_on():
    return toy_automaton(
        {"no": [("N", "OW")], "on": [("AA", "N")]}, {"no": 6, "on": 2}
    )


def test_effective_particles_frozen():
    assert effective_particles([0.25, 0.25, 0.25, 0.25]) == pytest.approx(4.0)
    assert effective_particles([0.5, 0.5, 0.0, 0.0]) == pytest.approx(2.0)
    assert effective_particles([1.0, 0.0]) == pytest.approx(1.0)
    with pytest.raises(DecodeError):
        effective_particles([0.5, 0.4])
    with pytest.raises(DecodeError):
        effective_particles([-0.5, 1.5])


def test_config_validation():
    with pytest.raises(ConfigError):
        DecoderConfig(seed=0, particles=0)
    with pytest.raises(ConfigError):
        DecoderConfig(seed=0, particles=100, resample_threshold=200)
    with pytest.raises(ConfigError):
        DecoderConfig(seed=0, laplace_alpha=0.0)
    assert DecoderConfig(seed=0, particles=100).threshold() == 50.0


def test_all_silence_stays_at_root(no_on):
    stream = sil_stream(60, no_on.inventory)
    cfg = DecoderConfig(seed=3, particles=400, dwell=GEO)
    session = DecodeSession(no_on, cfg)
    for frame in stream.frames():
        session.step(frame)
    post = session.posterior()
    assert post[()] > 0.99
    result = session.finalize()
    assert result.best_string == ()
    assert result.segments == [Segment(SIL, 0, 60)]
    assert result.best_prob > 0.99


def test_decodes_clean_word(no_on):
    spec = TrialSpec(
        word="no", pronunciation=("N", "OW"), leading_silence=10,
        dwells=(8, 8), trial_frames=80,
    )
    trial = simulate_trial(spec, no_on.inventory)
    result = decode_stream(no_on, trial.stream, DecoderConfig(seed=5, particles=800, dwell=GEO))
    assert result.best_string == ("no",)
    assert result.best_prob > 0.95
    # segment tiling covers the trial exactly
    assert result.segments[0].start == 0
    assert result.segments[-1].end == 80
    for a, b in zip(result.segments, result.segments[1:]):
        assert a.end == b.start
    spoken = [s.phoneme for s in result.segments if s.phoneme != SIL]
    assert spoken == ["N", "OW"]


def test_same_seed_same_result(no_on):
    spec = TrialSpec(
        word="on", pronunciation=("AA", "N"), leading_silence=12,
        dwells=(7, 9), trial_frames=80, eta=0.5,
    )
    trial = simulate_trial(spec, no_on.inventory)
    cfg = DecoderConfig(seed=11, particles=500, dwell=GEO)
    a = decode_stream(no_on, trial.stream, cfg)
    b = decode_stream(no_on, trial.stream, cfg)
    assert a.to_dict() == b.to_dict()


def test_smoothing_matches_presmoothed_stream(no_on):
    from phonetext.emissions import smooth_emissions

    spec = TrialSpec(
        word="no", pronunciation=("N", "OW"), leading_silence=5,
        dwells=(6, 6), trial_frames=40,
    )
    trial = simulate_trial(spec, no_on.inventory)
    raw = decode_stream(no_on, trial.stream, DecoderConfig(seed=2, particles=300, dwell=GEO))
    pre = decode_stream(
        no_on,
        smooth_emissions(trial.stream, 0.01),
        DecoderConfig(seed=2, particles=300, dwell=GEO, smooth_input=False),
    )
    assert raw.to_dict() == pre.to_dict()


def test_unsmoothed_zero_likelihood_raises(no_on):
    inv = no_on.inventory
    probs = np.zeros((3, len(inv)))
    probs[:, inv.index("N")] = 1.0  # silence impossible at frame 0
    stream = EmissionStream(probs, inv)
    cfg = DecoderConfig(seed=0, particles=50, smooth_input=False, dwell=GEO)
    session = DecodeSession(no_on, cfg)
    with pytest.raises(DecodeError):
        for frame in stream.frames():
            session.step(frame)


def test_step_order_enforced(no_on):
    stream = sil_stream(5, no_on.inventory)
    session = DecodeSession(no_on, DecoderConfig(seed=0, particles=20, dwell=GEO))
    session.step(stream.frame(0))
    with pytest.raises(StreamError):
        session.step(stream.frame(0))
    with pytest.raises(StreamError):
        session.step(stream.frame(2))


def test_frame_shape_enforced(no_on):
    from phonetext.emissions import EmissionFrame

    session = DecodeSession(no_on, DecoderConfig(seed=0, particles=20, dwell=GEO))
    with pytest.raises(StreamError):
        session.step(EmissionFrame(0, np.array([0.5, 0.5])))


def test_stream_inventory_must_match(no_on):
    stream = sil_stream(5, INV8)
    with pytest.raises(StreamError):
        decode_stream(no_on, stream, DecoderConfig(seed=0, particles=20, dwell=GEO))


def test_posterior_sums_to_one(no_on):
    spec = TrialSpec(
        word="no", pronunciation=("N", "OW"), leading_silence=8,
        dwells=(8, 8), trial_frames=60, eta=0.7,
    )
    trial = simulate_trial(spec, no_on.inventory)
    session = DecodeSession(no_on, DecoderConfig(seed=9, particles=400, dwell=GEO))
    for frame in trial.stream.frames():
        session.step(frame)
    post = session.posterior()
    assert sum(post.values()) == pytest.approx(1.0, abs=1e-9)
    assert all(p > 0 for p in post.values())


def test_posterior_only_mode(no_on):
    stream = sil_stream(10, no_on.inventory)
    cfg = DecoderConfig(seed=1, particles=50, dwell=GEO, track_paths=False)
    session = DecodeSession(no_on, cfg)
    for frame in stream.frames():
        session.step(frame)
    assert session.posterior()[()] > 0.9
    with pytest.raises(DecodeError):
        session.finalize()


def test_finalize_needs_frames(no_on):
    session = DecodeSession(no_on, DecoderConfig(seed=0, particles=20, dwell=GEO))
    with pytest.raises(DecodeError):
        session.finalize()


def test_systematic_resample_copy_counts(no_on):
    """Systematic resampling keeps floor(P*w) to ceil(P*w) copies of each."""
    cfg = DecoderConfig(seed=13, particles=100, dwell=GEO)
    session = DecodeSession(no_on, cfg)
    session._class_id = np.arange(100, dtype=np.int64)  # tag particles
    session._classes = [(i,) for i in range(100)]
    session._class_complete = [-1] * 100
    w = np.zeros(100)
    w[:4] = [0.42, 0.3, 0.2, 0.08]
    session._resample(w)
    counts = np.bincount(session._class_id, minlength=100)
    for i, wi in enumerate(w):
        assert math.floor(100 * wi) <= counts[i] <= math.ceil(100 * wi)
    assert counts.sum() == 100
    np.testing.assert_allclose(session._logw, -math.log(100))


def test_per_frame_best_tracks_frames(no_on):
    stream = sil_stream(7, no_on.inventory)
    session = DecodeSession(no_on, DecoderConfig(seed=0, particles=30, dwell=GEO))
    summaries = [session.step(f) for f in stream.frames()]
    assert [s.t for s in summaries] == list(range(7))
    assert all(0 < s.p_eff <= 30 for s in summaries)
    result = session.finalize()
    assert len(result.per_frame_best) == 7


def test_homophones_resolve_to_most_frequent():
    pa = toy_automaton(
        {"know": [("N", "OW")], "no": [("N", "OW")]}, {"no": 9, "know": 1}
    )
    spec = TrialSpec(
        word="know", pronunciation=("N", "OW"), leading_silence=10,
        dwells=(8, 8), trial_frames=70,
    )
    trial = simulate_trial(spec, pa.inventory)
    result = decode_stream(pa, trial.stream, DecoderConfig(seed=4, particles=500, dwell=GEO))
    assert result.best_string == ("no",)  # spelled by corpus frequency
