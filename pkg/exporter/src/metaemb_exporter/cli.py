"""Command-line entry point: metaemb-export."""

import argparse
import sys
from pathlib import Path

from .core import ExportError, ExportJob, load_sentences
from .encoders import encode_batches, make_encoder
from .writer import write_embedding_file


def export(job: ExportJob) -> int:
    """Run one job; returns the number of exported rows.

    Input problems surface before any encoder work starts inference.
    """
    sentences = load_sentences(job.sentences_path)
    encoder = make_encoder(job.encoder_spec)
    matrix = encode_batches(encoder, sentences, job.batch_size)
    write_embedding_file(job.out_path, job.encoder_spec, matrix)
    return matrix.shape[0]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaemb-export",
        description="Encode a sentence list and write one embedding file per run.",
    )
    parser.add_argument("--sentences", required=True,
                        help="UTF-8 text file, one sentence per line")
    parser.add_argument("--encoder", required=True,
                        help="encoder spec: wordavg:<vectors.txt>, "
                             "sbert:<model-name>, or use:<model-path>")
    parser.add_argument("--out", required=True, help="output embedding file")
    parser.add_argument("--batch-size", type=int, default=64,
                        help="sentences per inference batch (default 64)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        job = ExportJob(Path(args.sentences), args.encoder, Path(args.out),
                        args.batch_size)
        rows = export(job)
    except (ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {rows} rows ({args.encoder}) -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
