"""Command-line front end.

Four subcommands: ``decompose`` and ``indices`` run the exact pipeline on a
pmf file and a model file, ``estimate`` runs the sample-based pipeline on a
CSV of observations, and ``reproduce`` regenerates the reference
experiments.  Every report embeds the resolved configuration and the
library version, contains no timestamps, and is therefore byte-identical
across reruns of the same invocation; failures exit nonzero after printing
a one-object error JSON.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from . import reproduce as rep
from .basis import gram_matrix
from .decomposition import auto_decompose
from .distributions import load_pmf, load_samples
from .errors import MbhdError
from .estimation import estimate, estimate_empirical, predict_with_ci
from .indices import SensitivityReport, save_sobol_matrix_csv, sensitivity
from .models import load_binarization_spec, load_model
from .subsets import enumerate_subsets


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mbhd",
        description="Exact decompositions and sensitivity indices for models "
        "of dependent binary inputs",
    )
    parser.add_argument("--version", action="version", version=f"mbhd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    dec = sub.add_parser("decompose", help="exact (or capped) decomposition")
    dec.add_argument("--pmf", required=True, help="pmf JSON file")
    dec.add_argument("--model", required=True, help="model JSON file")
    dec.add_argument("--cap", type=int, default=None, help="cardinality cap")
    dec.add_argument("-o", "--output", default="mbhd_out", help="output directory")

    ind = sub.add_parser("indices", help="sensitivity indices and Shapley effects")
    ind.add_argument("--pmf", required=True)
    ind.add_argument("--model", required=True)
    ind.add_argument("--cap", type=int, default=None)
    ind.add_argument("-o", "--output", default="mbhd_out")

    est = sub.add_parser("estimate", help="sample-based estimation")
    est.add_argument("--samples", required=True, help="sample CSV file")
    est.add_argument("--model", default=None, help="model JSON (optional if CSV has y)")
    est.add_argument("--pmf", default=None, help="known pmf JSON; omit to use the empirical table")
    est.add_argument(
        "--cap", "--n-cap", dest="cap", type=int, default=None, help="cardinality cap"
    )
    est.add_argument("--level", type=float, default=0.95, help="confidence level")
    est.add_argument(
        "--predict",
        default=None,
        help="comma-separated binary vector to predict with a confidence interval",
    )
    est.add_argument("-o", "--output", default="mbhd_out")

    repro = sub.add_parser("reproduce", help="regenerate a reference experiment")
    repro.add_argument("which", choices=["perceptron", "fgm", "mushroom"])
    repro.add_argument("--data", default=None, help="dataset path (mushroom only)")
    repro.add_argument(
        "--binarization", default=None, help="override rule spec JSON (mushroom only)"
    )
    repro.add_argument("--smoothing", type=float, default=0.0)
    repro.add_argument("--nodes", type=int, default=64, help="quadrature nodes")
    repro.add_argument("--seed", type=int, default=0)
    repro.add_argument("-o", "--output", default="mbhd_out")
    return parser


def _config_of(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items())}
    return config


def _write_report(outdir: Path, name: str, doc: dict) -> str:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    (outdir / name).write_text(text)
    return text


def _require_file(path_str: str, what: str) -> Path:
    path = Path(path_str)
    if not path.exists():
        raise ValueError(f"{what} file {path} does not exist")
    return path


def _cmd_decompose(args) -> dict:
    pmf = load_pmf(_require_file(args.pmf, "pmf"))
    model = load_model(_require_file(args.model, "model"))
    dec = auto_decompose(pmf, model, cap=args.cap)
    doc = {"report": "decomposition", **dec.to_dict()}
    return doc


def _cmd_indices(args) -> tuple[dict, SensitivityReport]:
    pmf = load_pmf(_require_file(args.pmf, "pmf"))
    model = load_model(_require_file(args.model, "model"))
    dec = auto_decompose(pmf, model, cap=args.cap)
    report = sensitivity(dec)
    doc = {"report": "sensitivity", **report.to_dict()}
    return doc, report


def _cmd_estimate(args) -> dict:
    samples = load_samples(_require_file(args.samples, "samples"))
    model = load_model(_require_file(args.model, "model")) if args.model else None
    if args.pmf:
        pmf = load_pmf(_require_file(args.pmf, "pmf"))
        order = enumerate_subsets(pmf.d, args.cap)
        gs = gram_matrix(pmf, order)
        result = estimate(samples, model, gs, c=args.cap)
    else:
        result = estimate_empirical(samples, model, c=args.cap)
    doc = {"report": "estimation", **result.to_dict()}
    if args.predict is not None:
        x = [int(tok) for tok in args.predict.split(",")]
        pred = predict_with_ci(result, x, level=args.level)
        doc["prediction"] = {
            "x": list(pred.x),
            "g_hat": pred.g_hat,
            "delta_n": pred.delta_n,
            "level": pred.level,
            "interval": list(pred.interval),
        }
    return doc


def _cmd_reproduce(args, outdir: Path) -> tuple[dict, list[str]]:
    if args.which == "perceptron":
        bundle = rep.perceptron_bundle(nodes=args.nodes)
        files = rep.write_perceptron_csvs(bundle, outdir)
    elif args.which == "fgm":
        bundle = rep.fgm_bundle()
        files = rep.write_fgm_csv(bundle, outdir)
    else:
        spec = (
            load_binarization_spec(_require_file(args.binarization, "binarization"))
            if args.binarization
            else None
        )
        bundle = rep.mushroom_bundle(args.data, spec=spec, smoothing=args.smoothing)
        files = rep.write_mushroom_csv(bundle, outdir)
    doc = {"report": "reproduce", **bundle, "files": files}
    return doc, files


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        meta = {"version": __version__, "config": _config_of(args)}
        if args.command == "decompose":
            doc = {**_cmd_decompose(args), **meta}
            text = _write_report(outdir, "decomposition.json", doc)
        elif args.command == "indices":
            doc, report = _cmd_indices(args)
            doc = {**doc, **meta, "sobol_matrix_csv": "sobol_matrix.csv"}
            save_sobol_matrix_csv(report, outdir / "sobol_matrix.csv")
            text = _write_report(outdir, "indices.json", doc)
        elif args.command == "estimate":
            doc = {**_cmd_estimate(args), **meta}
            text = _write_report(outdir, "estimation.json", doc)
        else:
            doc, _ = _cmd_reproduce(args, outdir)
            doc = {**doc, **meta}
            text = _write_report(outdir, f"{args.which}.json", doc)
    except MbhdError as exc:
        print(json.dumps(exc.payload(), sort_keys=True))
        return 1
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": "invalid-input", "message": str(exc)}, sort_keys=True))
        return 1
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
