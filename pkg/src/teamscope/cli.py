"""``teamscope`` command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, pipeline
from .corpus import SnapshotVersionError
from .econometrics import RegressionError

EXIT_OK = 0
EXIT_IO = 3
EXIT_DATA = 4
EXIT_STAGE = 5


def _seed(parser):
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config (JSON); used by 'run'")
    common.add_argument("--threads", type=int, help="cap on worker threads (default 1)")
    common.add_argument("--log-level", help="logging level (default WARNING)")
    # subcommands accept the global flags too, without clobbering earlier values
    sub_common = argparse.ArgumentParser(add_help=False)
    for action in common._actions:
        sub_common.add_argument(*action.option_strings, type=action.type,
                                default=argparse.SUPPRESS, help=action.help)

    p = argparse.ArgumentParser(prog="teamscope", description=__doc__, parents=[common])
    p.add_argument("--version", action="version", version=f"teamscope {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[sub_common], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("ingest", help="read NDJSON papers into a snapshot")
    s.add_argument("--input", nargs="+", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--year-range", nargs=2, type=int, default=(1900, 2100))

    s = sub.add_parser("parse", help="extract activity profiles from statements")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--lexicon")
    s.add_argument("--out", required=True)
    s.add_argument("--report", required=True)

    s = sub.add_parser("cluster", help="cluster the activity co-occurrence graph")
    s.add_argument("--profiles", required=True)
    s.add_argument("--out", required=True)
    _seed(s)
    s.add_argument("--resolution", type=float, default=1.0)
    s.add_argument("--unit", choices=("pair", "paper"), default="pair")

    s = sub.add_parser("roles", help="assign Lead/Direct/Indirect roles")
    s.add_argument("--profiles", required=True)
    s.add_argument("--partition")
    s.add_argument("--use-clusters", action="store_true",
                   help="use the clustered partition instead of the reference one")
    s.add_argument("--out", required=True)

    s = sub.add_parser("lratio", help="per-paper L-ratio table")
    s.add_argument("--roles", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--promote", choices=("corresponding", "first"))

    s = sub.add_parser("train-roles", help="train the lead/support classifier")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--roles", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--report")
    s.add_argument("--hidden", type=int, default=16)
    s.add_argument("--epochs", type=int, default=400)
    _seed(s)

    s = sub.add_parser("predict", help="extrapolate L-ratio with a trained model")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--roles", help="with --only-missing, skip papers that have parsed roles")
    s.add_argument("--only-missing", action="store_true")

    s = sub.add_parser("embed", help="train keyword embeddings")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--dim", type=int, default=100)
    s.add_argument("--epochs", type=int, default=5)
    s.add_argument("--min-count", type=int, default=5)
    s.add_argument("--negatives", type=int, default=5)
    _seed(s)

    s = sub.add_parser("metrics", help="paper-level outcome table")
    s.add_argument("--snapshot", required=True)
    s.add_argument("--roles", required=True)
    s.add_argument("--embeddings")
    s.add_argument("--predicted", help="lratio_pred.csv for papers without statements")
    s.add_argument("--model", help="model.bin, used to split predicted teams into lead/support")
    s.add_argument("--out", required=True)
    s.add_argument("--quantile", type=float, default=0.9)
    s.add_argument("--exclude-pub-year", action="store_true",
                   help="start the 10-year citation window the year after publication")

    s = sub.add_parser("regress", help="OLS / author fixed-effects regression on L-ratio")
    s.add_argument("--metrics", required=True)
    s.add_argument("--outcome", required=True)
    s.add_argument("--fe", choices=("author",))
    s.add_argument("--controls", default="")
    s.add_argument("--snapshot", help="needed with --fe author")
    s.add_argument("--cluster", choices=("author",))
    s.add_argument("--out", required=True)

    s = sub.add_parser("curve", help="bootstrapped binned curve")
    s.add_argument("--metrics", required=True)
    s.add_argument("--x", default="lratio")
    s.add_argument("--y", required=True)
    s.add_argument("--bins", type=int, default=10)
    s.add_argument("--n-boot", type=int, default=1000)
    _seed(s)
    s.add_argument("--out", required=True)

    s = sub.add_parser("synth", help="write a synthetic corpus with ground truth")
    s.add_argument("--out", required=True)
    s.add_argument("--papers", type=int, default=200)
    _seed(s)

    s = sub.add_parser("run", help="run the whole pipeline from --config")
    s.add_argument("--force", action="store_true")
    return p


def _dispatch(args) -> dict:
    cmd = args.command
    if cmd == "ingest":
        return pipeline.stage_ingest(args.input, args.out, tuple(args.year_range))
    if cmd == "parse":
        return pipeline.stage_parse(args.snapshot, args.out, args.report, args.lexicon)
    if cmd == "cluster":
        return pipeline.stage_cluster(args.profiles, args.out, args.seed, args.resolution, args.unit)
    if cmd == "roles":
        return pipeline.stage_roles(args.profiles, args.out, args.partition, args.use_clusters)
    if cmd == "lratio":
        return pipeline.stage_lratio(args.roles, args.out, args.promote)
    if cmd == "train-roles":
        return pipeline.stage_train(args.snapshot, args.roles, args.out, args.seed, args.report,
                                    hidden=args.hidden, epochs=args.epochs)
    if cmd == "predict":
        return pipeline.stage_predict(args.snapshot, args.model, args.out, args.only_missing, args.roles)
    if cmd == "embed":
        return pipeline.stage_embed(args.snapshot, args.out, dim=args.dim, epochs=args.epochs,
                                    min_count=args.min_count, negatives=args.negatives,
                                    seed=args.seed, workers=max(1, args.threads))
    if cmd == "metrics":
        return pipeline.stage_metrics(args.snapshot, args.roles, args.out, args.embeddings,
                                      args.predicted, args.model, quantile=args.quantile,
                                      include_pub_year=not args.exclude_pub_year)
    if cmd == "regress":
        controls = [c for c in args.controls.split(",") if c]
        return pipeline.stage_regress(args.metrics, args.out, args.outcome, controls, args.fe,
                                      args.snapshot, args.cluster)
    if cmd == "curve":
        return pipeline.stage_curve(args.metrics, args.out, args.x, args.y, args.bins,
                                    args.n_boot, seed=args.seed)
    if cmd == "synth":
        from .synth import generate_synthetic_corpus
        truth = generate_synthetic_corpus(args.out, args.papers, args.seed)
        return {"papers": len(truth)}
    if cmd == "run":
        if not args.config:
            raise ValueError("'run' needs --config")
        cfg = pipeline.PipelineConfig.from_file(args.config)
        manifest = pipeline.run_pipeline(cfg, force=args.force)
        return {name: ("skipped" if s["skipped"] else "ran") for name, s in manifest["stages"].items()}
    raise ValueError(f"unknown command {cmd}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.threads = args.threads or 1
    logging.basicConfig(level=getattr(logging, str(args.log_level or "WARNING").upper(), logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = _dispatch(args)
    except pipeline.PipelineError as exc:
        print(f"teamscope: {exc}", file=sys.stderr)
        return EXIT_STAGE
    except OSError as exc:
        print(f"teamscope: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, SnapshotVersionError, RegressionError) as exc:
        print(f"teamscope: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(json.dumps(pipeline._clean(summary), sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
