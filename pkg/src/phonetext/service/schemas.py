"""Request/response models shared by the HTTP service and the CLI client."""

from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, Field


class DwellModel(BaseModel):
    family: Literal["negative_binomial", "geometric", "pmf"] = "negative_binomial"
    mean: float = 10.0
    sil_mean: float = 20.0
    means: dict = Field(default_factory=dict)
    r: int = 3
    pmfs: dict = Field(default_factory=dict)


class DecoderConfigModel(BaseModel):
    """Mirrors phonetext.decoder.DecoderConfig (seed travels per request)."""

    particles: int = 2000
    resample_threshold: Optional[float] = None
    laplace_alpha: float = 0.01
    smooth_input: bool = True
    dwell: DwellModel = Field(
        default_factory=lambda: DwellModel(family="geometric", sil_mean=75.0)
    )
    track_paths: bool = True


class LmSummary(BaseModel):
    lm_id: str
    nodes: int
    words: int
    word_total: int
    inventory: List[str]


class BuildLmRequest(BaseModel):
    corpus_paths: List[str]
    dict_path: str
    seed: int
    inventory: Optional[List[str]] = None  # omitted = every dictionary phoneme
    out_path: Optional[str] = None
    priors_scope: Literal["restricted", "full"] = "restricted"


class BuildLmResponse(LmSummary):
    out_path: Optional[str] = None
    priors: dict = Field(default_factory=dict)


class LoadLmRequest(BaseModel):
    path: str


class SegmentModel(BaseModel):
    phoneme: str
    start: int
    end: int


class SimulateRequest(BaseModel):
    seed: int
    out_dir: str
    lm_id: Optional[str] = None
    lm_path: Optional[str] = None
    words: Optional[List[str]] = None   # omitted = most frequent LM words
    n_words: int = 8
    counts: int = 1                      # trials per word
    eta: float = 0.0
    trial_frames: int = 225
    lead_range: Tuple[int, int] = (15, 35)
    dwell: DwellModel = Field(default_factory=DwellModel)
    frame_rate_hz: float = 100.0


class SimulatedTrial(BaseModel):
    index: int
    target: str
    emissions_path: str
    labels_path: str


class SimulateResponse(BaseModel):
    trials: List[SimulatedTrial]


class DecodeRequest(BaseModel):
    seed: int
    lm_id: Optional[str] = None
    lm_path: Optional[str] = None
    emissions_path: Optional[str] = None
    frames: Optional[List[List[float]]] = None  # inline alternative
    frame_rate_hz: float = 100.0
    config: DecoderConfigModel = Field(default_factory=DecoderConfigModel)
    out_path: Optional[str] = None


class DecodeResultModel(BaseModel):
    best_string: List[str]
    best_prob: float
    segments: List[SegmentModel]
    per_frame_best: List[List[str]]
    frames: int
    frame_rate_hz: float
    log_normalizer: float
    out_path: Optional[str] = None


class DecodeBatchRequest(BaseModel):
    seed: int
    out_dir: str
    lm_id: Optional[str] = None
    lm_path: Optional[str] = None
    emissions_dir: Optional[str] = None
    emissions_paths: Optional[List[str]] = None
    config: DecoderConfigModel = Field(default_factory=DecoderConfigModel)


class DecodedTrial(BaseModel):
    emissions_path: str
    out_path: str
    best_string: List[str]
    best_prob: float


class DecodeBatchResponse(BaseModel):
    trials: List[DecodedTrial]


class EvaluateRequest(BaseModel):
    results_dir: str
    labels_dir: Optional[str] = None     # defaults to results_dir
    lm_id: Optional[str] = None
    lm_path: Optional[str] = None
    trial_seconds: float = 2.25
    wpm_basis: Literal["trial", "speech"] = "trial"
    bw_weighting: Literal["session", "corpus"] = "session"
    out_path: Optional[str] = None


class EvaluateResponse(BaseModel):
    report: dict
    table: str
    out_path: Optional[str] = None


class OracleCheckRequest(BaseModel):
    seed: int
    lm_id: Optional[str] = None
    lm_path: Optional[str] = None
    emissions_path: str
    particles: int = 50000
    n_seeds: int = 20
    laplace_alpha: float = 0.01
    dwell: DwellModel = Field(default_factory=lambda: DwellModel(family="geometric"))
    max_completions: int = 3


class OracleCheckResponse(BaseModel):
    exact_top: List[str]
    exact_top_prob: float
    residual: float
    tv: List[float]
    agreement: float


class HealthResponse(BaseModel):
    status: str
    version: str
    loaded_models: List[str]
