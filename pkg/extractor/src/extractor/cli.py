"""CLI: extract --model SPEC --labeled PATH --unlabeled PATH --out DIR --seed N

Emits ``grads.grdx`` and ``confidence.jsonl`` into the output directory.
"""

import argparse
import json
import sys
from pathlib import Path

from .extract import (
    ExtractionError,
    ExtractionJob,
    extract_confidence,
    extract_gradients,
    read_labeled,
    read_unlabeled,
)
from .models import build_model


def build_parser():
    parser = argparse.ArgumentParser(
        prog="extract",
        description="Produce a GRDX gradient dump and confidence JSONL from a model.",
    )
    parser.add_argument("--model", required=True, help="model spec, e.g. 'toy'")
    parser.add_argument("--labeled", required=True, help="labeled examples JSONL")
    parser.add_argument("--unlabeled", required=True, help="unlabeled inputs JSONL")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--decode-length", type=int, default=4)
    parser.add_argument(
        "--layers",
        default=None,
        help="comma-separated parameter names to treat as layers (default: all)",
    )
    parser.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        model = build_model(args.model, seed=args.seed)
        job = ExtractionJob(
            model=model,
            labeled=read_labeled(args.labeled),
            unlabeled=read_unlabeled(args.unlabeled),
            layers=args.layers.split(",") if args.layers else None,
            decode_length=args.decode_length,
            seed=args.seed,
            batch_size=args.batch_size,
        )
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        manifest = extract_gradients(job, out / "grads.grdx")
        extract_confidence(job, out / "confidence.jsonl")
    except (ExtractionError, ValueError, OSError, json.JSONDecodeError, KeyError) as err:
        print(json.dumps({"error": f"{type(err).__name__}: {err}"}), file=sys.stderr)
        return 1
    print(
        json.dumps(
            {
                "grdx": str(out / "grads.grdx"),
                "confidence": str(out / "confidence.jsonl"),
                "layers": [[name, dim] for name, dim in manifest],
                "n_labeled": len(job.labeled),
                "n_unlabeled": len(job.unlabeled),
            }
        )
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
