"""Command line front end.

Every subcommand builds the same request model the HTTP service accepts,
then either calls the handler in process (default) or posts it to a
running server given with --server.

Exit codes: 0 ok, 1 usage, 2 bad data or config, 3 internal failure.
"""

import argparse
import json
import sys

from .errors import DataError, PhonetextError
from .service import ops, schemas

EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; re-route to our usage code
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class Client:
    """Runs requests in process or against a server, same surface either way."""

    def __init__(self, server=None):
        self.server = server.rstrip("/") if server else None
        self._registry = None if server else ops.LmRegistry()

    def call(self, route, handler, request, response_model):
        if self.server is None:
            return handler(self._registry, request)
        import httpx

        resp = httpx.post(
            self.server + route, json=request.model_dump(mode="json"), timeout=None
        )
        if resp.status_code >= 400:
            detail = resp.json().get("detail", resp.text)
            raise DataError(f"server rejected request: {detail}")
        return response_model.model_validate(resp.json())


def _split_csv(text):
    return [part for part in text.split(",") if part]


def _dwell_flags(args) -> dict:
    out = {}
    for attr, key in [
        ("dwell_family", "family"),
        ("dwell_mean", "mean"),
        ("dwell_sil_mean", "sil_mean"),
        ("dwell_r", "r"),
    ]:
        val = getattr(args, attr, None)
        if val is not None:
            out[key] = val
    return out


def _dwell_model(args, default=None) -> schemas.DwellModel:
    base = (default or schemas.DwellModel()).model_dump()
    base.update(_dwell_flags(args))
    return schemas.DwellModel.model_validate(base)


def _decoder_config(args) -> schemas.DecoderConfigModel:
    """--config JSON first, explicit flags on top."""
    base = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise DataError(f"{args.config}: decoder config must be a JSON object")
    for attr, key in [
        ("particles", "particles"),
        ("resample_threshold", "resample_threshold"),
        ("laplace_alpha", "laplace_alpha"),
        ("smooth_input", "smooth_input"),
    ]:
        val = getattr(args, attr, None)
        if val is not None:
            base[key] = val
    flags = _dwell_flags(args)
    if flags:
        dwell = base.get("dwell") or schemas.DecoderConfigModel().dwell.model_dump()
        dwell.update(flags)
        base["dwell"] = dwell
    return schemas.DecoderConfigModel.model_validate(base)


def _add_dwell_args(parser):
    parser.add_argument(
        "--dwell-family", choices=["negative_binomial", "geometric", "pmf"], default=None
    )
    parser.add_argument("--dwell-mean", type=float, default=None)
    parser.add_argument("--dwell-sil-mean", type=float, default=None)
    parser.add_argument("--dwell-r", type=int, default=None)


def _add_lm_arg(parser):
    parser.add_argument("--lm", required=True, help="language model file (*.lm.json)")


def cmd_build_lm(client, args):
    req = schemas.BuildLmRequest(
        corpus_paths=args.corpus,
        dict_path=args.dict,
        seed=args.seed,
        inventory=_split_csv(args.inventory) if args.inventory else None,
        out_path=args.out,
        priors_scope=args.priors_scope,
    )
    resp = client.call("/lm/build", ops.build_lm, req, schemas.BuildLmResponse)
    print(f"built {resp.nodes} nodes over {resp.words} words ({resp.word_total} draws)")
    if resp.out_path:
        print(f"wrote {resp.out_path}")
    return 0


def cmd_simulate(client, args):
    req = schemas.SimulateRequest(
        seed=args.seed,
        out_dir=args.out_dir,
        lm_path=args.lm,
        words=_split_csv(args.words) if args.words else None,
        n_words=args.n_words,
        counts=args.counts,
        eta=args.eta,
        trial_frames=args.trial_frames,
        lead_range=tuple(int(x) for x in _split_csv(args.lead_range)),
        dwell=_dwell_model(args),
        frame_rate_hz=args.frame_rate,
    )
    resp = client.call("/simulate", ops.simulate, req, schemas.SimulateResponse)
    print(f"wrote {len(resp.trials)} trials to {args.out_dir}")
    return 0


def cmd_decode(client, args):
    if (args.emissions is None) == (args.emissions_dir is None):
        raise DataError("give exactly one of --emissions or --emissions-dir")
    config = _decoder_config(args)
    if args.emissions:
        req = schemas.DecodeRequest(
            seed=args.seed,
            lm_path=args.lm,
            emissions_path=args.emissions,
            config=config,
            out_path=args.out,
        )
        resp = client.call("/decode", ops.decode, req, schemas.DecodeResultModel)
        decoded = " ".join(resp.best_string) if resp.best_string else "(silence)"
        print(f"decoded: {decoded}  p={resp.best_prob:.4f}")
        if resp.out_path:
            print(f"wrote {resp.out_path}")
        return 0
    if not args.out_dir:
        raise DataError("--emissions-dir needs --out-dir")
    req = schemas.DecodeBatchRequest(
        seed=args.seed,
        out_dir=args.out_dir,
        lm_path=args.lm,
        emissions_dir=args.emissions_dir,
        config=config,
    )
    resp = client.call("/decode/batch", ops.decode_batch, req, schemas.DecodeBatchResponse)
    for trial in resp.trials:
        decoded = " ".join(trial.best_string) if trial.best_string else "(silence)"
        print(f"{trial.emissions_path}: {decoded}  p={trial.best_prob:.4f}")
    print(f"wrote {len(resp.trials)} results to {args.out_dir}")
    return 0


def cmd_evaluate(client, args):
    req = schemas.EvaluateRequest(
        results_dir=args.results_dir,
        labels_dir=args.labels_dir,
        lm_path=args.lm,
        trial_seconds=args.trial_seconds,
        wpm_basis=args.wpm_basis,
        bw_weighting=args.bw_weighting,
        out_path=args.out,
    )
    resp = client.call("/evaluate", ops.evaluate, req, schemas.EvaluateResponse)
    print(resp.table)
    if resp.out_path:
        print(f"wrote {resp.out_path}")
    return 0


def cmd_oracle_check(client, args):
    req = schemas.OracleCheckRequest(
        seed=args.seed,
        lm_path=args.lm,
        emissions_path=args.emissions,
        particles=args.particles,
        n_seeds=args.n_seeds,
        laplace_alpha=args.laplace_alpha,
        dwell=_dwell_model(args, schemas.DwellModel(family="geometric")),
        max_completions=args.max_completions,
    )
    resp = client.call("/oracle-check", ops.oracle_check, req, schemas.OracleCheckResponse)
    top = " ".join(resp.exact_top) if resp.exact_top else "(silence)"
    worst = max(resp.tv)
    print(f"exact top: {top}  p={resp.exact_top_prob:.4f}  residual={resp.residual:.2e}")
    print(f"filter agreement {resp.agreement * 100:.0f}% over {len(resp.tv)} seeds, "
          f"tv max={worst:.4f} mean={sum(resp.tv) / len(resp.tv):.4f}")
    return 0


def cmd_pipeline(client, args):
    """build-lm -> simulate -> decode -> evaluate under one directory."""
    from pathlib import Path

    work = Path(args.workdir)
    work.mkdir(parents=True, exist_ok=True)
    lm_path = str(work / "model.lm.json")
    trials_dir = str(work / "trials")
    results_dir = str(work / "results")

    args.out = lm_path
    cmd_build_lm(client, args)

    sim = schemas.SimulateRequest(
        seed=args.seed,
        out_dir=trials_dir,
        lm_path=lm_path,
        n_words=args.n_words,
        counts=args.counts,
        eta=args.eta,
        dwell=_dwell_model(args),
    )
    resp = client.call("/simulate", ops.simulate, sim, schemas.SimulateResponse)
    print(f"wrote {len(resp.trials)} trials to {trials_dir}")

    dec = schemas.DecodeBatchRequest(
        seed=args.seed + 1,
        out_dir=results_dir,
        lm_path=lm_path,
        emissions_dir=trials_dir,
        config=_decoder_config(args),
    )
    client.call("/decode/batch", ops.decode_batch, dec, schemas.DecodeBatchResponse)

    ev = schemas.EvaluateRequest(
        results_dir=results_dir,
        labels_dir=trials_dir,
        lm_path=lm_path,
        out_path=str(work / "report.json"),
    )
    out = client.call("/evaluate", ops.evaluate, ev, schemas.EvaluateResponse)
    print(out.table)
    print(f"wrote {out.out_path}")
    return 0


def cmd_serve(client, args):
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="phonetext", description=__doc__.splitlines()[0])
    parser.add_argument("--server", default=None, help="base URL of a running service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lm", help="build a language model from corpus text")
    p.add_argument("corpus", nargs="+", help="corpus text file(s)")
    p.add_argument("--dict", required=True, help="pronouncing dictionary")
    p.add_argument("--seed", type=int, required=True, help="pronunciation draw seed")
    p.add_argument("--inventory", default=None, help="comma list of phonemes to keep")
    p.add_argument("--out", default=None, help="write the model here")
    p.add_argument("--priors-scope", choices=["restricted", "full"], default="restricted")
    p.set_defaults(fn=cmd_build_lm)

    p = sub.add_parser("simulate", help="synthesize cued word trials")
    _add_lm_arg(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--words", default=None, help="comma list of target words")
    p.add_argument("--n-words", type=int, default=8)
    p.add_argument("--counts", type=int, default=1, help="trials per word")
    p.add_argument("--eta", type=float, default=0.0, help="emission noise level in [0, 1]")
    p.add_argument("--trial-frames", type=int, default=225)
    p.add_argument("--lead-range", default="15,35", help="leading silence frames, lo,hi")
    p.add_argument("--frame-rate", type=float, default=100.0)
    _add_dwell_args(p)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("decode", help="decode emission streams into words")
    _add_lm_arg(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--emissions", default=None, help="one emission csv")
    p.add_argument("--emissions-dir", default=None, help="decode every csv in a directory")
    p.add_argument("--out", default=None, help="result path (single stream)")
    p.add_argument("--out-dir", default=None, help="results directory (batch)")
    p.add_argument("--config", default=None, help="decoder config JSON")
    p.add_argument("--particles", type=int, default=None)
    p.add_argument("--resample-threshold", type=float, default=None)
    p.add_argument("--laplace-alpha", type=float, default=None)
    p.add_argument("--smooth-input", action=argparse.BooleanOptionalAction, default=None)
    _add_dwell_args(p)
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("evaluate", help="score decode results against labels")
    p.add_argument("--results-dir", required=True)
    p.add_argument("--labels-dir", default=None, help="defaults to --results-dir")
    p.add_argument("--lm", default=None, help="enables word-level information metrics")
    p.add_argument("--trial-seconds", type=float, default=2.25)
    p.add_argument("--wpm-basis", choices=["trial", "speech"], default="trial")
    p.add_argument("--bw-weighting", choices=["session", "corpus"], default="session")
    p.add_argument("--out", default=None, help="write the report JSON here")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("oracle-check", help="compare the filter with the exact posterior")
    _add_lm_arg(p)
    p.add_argument("--emissions", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--particles", type=int, default=50000)
    p.add_argument("--n-seeds", type=int, default=20)
    p.add_argument("--laplace-alpha", type=float, default=0.01)
    p.add_argument("--max-completions", type=int, default=3)
    _add_dwell_args(p)
    p.set_defaults(fn=cmd_oracle_check)

    p = sub.add_parser("pipeline", help="build, simulate, decode, evaluate in one run")
    p.add_argument("corpus", nargs="+")
    p.add_argument("--dict", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workdir", required=True)
    p.add_argument("--inventory", default=None)
    p.add_argument("--priors-scope", choices=["restricted", "full"], default="restricted")
    p.add_argument("--n-words", type=int, default=8)
    p.add_argument("--counts", type=int, default=5)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--config", default=None)
    p.add_argument("--particles", type=int, default=None)
    p.add_argument("--resample-threshold", type=float, default=None)
    p.add_argument("--laplace-alpha", type=float, default=None)
    p.add_argument("--smooth-input", action=argparse.BooleanOptionalAction, default=None)
    _add_dwell_args(p)
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    client = Client(args.server)
    try:
        return args.fn(client, args)
    except PhonetextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
