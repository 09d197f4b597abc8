"""Command-line front end: fit, transform, eval, ablate, upproject.

View files are passed with repeated ``--views`` flags and their order is
significant: it fixes the concatenation layout, so transform must receive
the views in the same order used at fit time. All fitting commands accept
only the hyperparameters their method consumes; anything else is rejected
rather than silently ignored. Every failure exits 1 with a one-line
diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import sys

from .autoenc import AeConfig, AeModel, HIDDEN_COUNTS, LOSS_KINDS, fit_ae
from .baseline import up_project
from .core import EnsembleBatch, InvalidInput, MetaembError
from .evaluation import evaluate, format_report, report_to_json
from .fileio import read_embeddings, read_sts, save_model, load_model, write_embeddings
from .gcca import GccaModel, fit_gcca
from .naive import NAIVE_KINDS, NaiveModel
from .svd import SvdModel, fit_svd

METHODS = ("conc", "avg", "svd", "gcca", "ae")

# Flags each method is allowed to consume. Dest names, not flag spellings.
_METHOD_OPTIONS = {
    "conc": frozenset(),
    "avg": frozenset(),
    "svd": frozenset({"d"}),
    "gcca": frozenset({"d", "tau"}),
    "ae": frozenset({"d", "loss", "hidden", "epochs", "batch_size", "lr", "seed"}),
}

_DEFAULTS = {
    "d": 1024,
    "tau": 10.0,
    "loss": "kld",
    "hidden": 1,
    "epochs": 500,
    "batch_size": 10000,
    "lr": 1e-3,
    "seed": 0,
}

_FLAG_SPELLING = {
    "d": "--d",
    "tau": "--tau",
    "loss": "--loss",
    "hidden": "--hidden",
    "epochs": "--epochs",
    "batch_size": "--batch-size",
    "lr": "--lr",
    "seed": "--seed",
}


def _add_hyper_flags(parser: argparse.ArgumentParser) -> None:
    # All default to None so "user actually passed it" is distinguishable.
    parser.add_argument("--d", type=int, default=None, help="meta-embedding width")
    parser.add_argument("--tau", type=float, default=None, help="covariance regularizer")
    parser.add_argument("--loss", choices=LOSS_KINDS, default=None, help="reconstruction loss")
    parser.add_argument("--hidden", type=int, choices=HIDDEN_COUNTS, default=None,
                        help="hidden layers per encoder/decoder")
    parser.add_argument("--epochs", type=int, default=None)
    parser.add_argument("--batch-size", type=int, default=None)
    parser.add_argument("--lr", type=float, default=None)
    parser.add_argument("--seed", type=int, default=None)


def _resolve_options(args, methods) -> dict:
    """Reject flags outside the selected methods' tables, then fill defaults."""
    allowed = frozenset().union(*(_METHOD_OPTIONS[m] for m in methods))
    opts = {}
    for name, fallback in _DEFAULTS.items():
        value = getattr(args, name)
        if value is not None and name not in allowed:
            label = " or ".join(methods)
            raise InvalidInput(f"{_FLAG_SPELLING[name]} is not a valid option for method {label}")
        opts[name] = fallback if value is None else value
    return opts


def _load_batch(paths) -> EnsembleBatch:
    return EnsembleBatch(tuple(read_embeddings(p) for p in paths))


def _ae_config(opts) -> AeConfig:
    return AeConfig(
        d=opts["d"],
        loss_kind=opts["loss"],
        hidden_count=opts["hidden"],
        epochs=opts["epochs"],
        batch_size=opts["batch_size"],
        lr=opts["lr"],
        seed=opts["seed"],
    )


def _fit_method(method: str, batch: EnsembleBatch, opts: dict):
    if method in NAIVE_KINDS:
        return NaiveModel.fit(batch, method)
    if method == "svd":
        return fit_svd(batch, opts["d"])
    if method == "gcca":
        return fit_gcca(batch, opts["d"], opts["tau"])
    return fit_ae(batch, _ae_config(opts))


def _spectrum_head(values, k=5) -> str:
    head = ", ".join(f"{v:.6g}" for v in values[:k])
    return head + (", ..." if len(values) > k else "")


def cmd_fit(args) -> int:
    opts = _resolve_options(args, [args.method])
    batch = _load_batch(args.views)
    model = _fit_method(args.method, batch, opts)
    save_model(model, args.out)
    dims = "+".join(str(d) for d in batch.dims)
    print(f"fit {args.method}: {batch.n_views} views ({dims} dims), "
          f"{batch.n_sentences} rows -> {args.out}")
    if isinstance(model, SvdModel):
        print(f"  output dim {model.d}, singular values: {_spectrum_head(model.singular_values)}")
    elif isinstance(model, GccaModel):
        print(f"  output dim {model.d}, tau {model.tau}, "
              f"eigenvalues: {_spectrum_head(model.eigenvalues)}")
    elif isinstance(model, AeModel):
        print(f"  output dim {model.d}, loss {model.loss_kind}, "
              f"final epoch loss {model.train_log[-1]:.6g}")
    else:
        print(f"  output dim {model.output_dim}")
    return 0


def cmd_transform(args) -> int:
    if (args.model is None) == (args.method is None):
        raise InvalidInput("transform needs exactly one of --model or --method conc|avg")
    batch = _load_batch(args.views)
    if args.model is not None:
        model = load_model(args.model)
    else:
        # conc and avg carry no fitted state beyond the view layout.
        model = NaiveModel.fit(batch, args.method)
    fused = model.transform(batch)
    write_embeddings(fused, args.out)
    print(f"wrote {fused.encoder_id}: {fused.n_rows} x {fused.dim} -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    emb = read_embeddings(args.embedding)
    ds = read_sts(args.sts)
    report = evaluate(emb, ds)
    print(format_report(report))
    if args.report is not None:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report_to_json(report))
        print(f"report written to {args.report}")
    return 0


def _ablate_cell(method, views, opts, ds) -> str:
    """One grid cell: refit from scratch, evaluate, or name the failure."""
    try:
        batch = EnsembleBatch(tuple(views))
        model = _fit_method(method, batch, opts)
        fused = model.transform(batch)
        report = evaluate(fused, ds)
        p, s = report.aggregate_pooled
        return f"{p:.4f}/{s:.4f}"
    except MetaembError as exc:
        return type(exc).__name__


def cmd_ablate(args) -> int:
    methods = args.method or list(METHODS)
    opts = _resolve_options(args, methods)
    views = [read_embeddings(p) for p in args.views]
    ds = read_sts(args.sts)

    columns = ["full ensemble"] + [f"without {v.encoder_id}" for v in views]
    rows = []
    for method in methods:
        cells = [_ablate_cell(method, views, opts, ds)]
        for j in range(len(views)):
            kept = views[:j] + views[j + 1 :]
            cells.append(_ablate_cell(method, kept, opts, ds))
        rows.append([method] + cells)

    header = ["method"] + columns
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
    for line in [header] + rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
    return 0


def cmd_upproject(args) -> int:
    view = read_embeddings(args.embedding)
    seeds = args.seeds if args.seeds is not None else list(range(10))
    for seed in seeds:
        projected = up_project(view, args.d, seed)
        out = f"{args.out_prefix}.seed{seed}.emb"
        write_embeddings(projected, out)
        print(f"wrote {projected.encoder_id}: {projected.n_rows} x {projected.dim} -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metaemb",
        description="Fuse precomputed sentence-embedding views and score them on STS pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a fusion model on training views")
    p_fit.add_argument("--method", choices=METHODS, required=True)
    p_fit.add_argument("--views", action="append", required=True, metavar="PATH",
                       help="embedding file, repeat per view, order matters")
    p_fit.add_argument("--out", required=True, help="model file to write")
    _add_hyper_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_tr = sub.add_parser("transform", help="apply a fitted model to views")
    p_tr.add_argument("--model", default=None, help="model file from fit")
    p_tr.add_argument("--method", choices=NAIVE_KINDS, default=None,
                      help="stateless alternative to --model")
    p_tr.add_argument("--views", action="append", required=True, metavar="PATH")
    p_tr.add_argument("--out", required=True, help="embedding file to write")
    p_tr.set_defaults(func=cmd_transform)

    p_ev = sub.add_parser("eval", help="score an embedding file against gold pairs")
    p_ev.add_argument("--embedding", required=True)
    p_ev.add_argument("--sts", required=True, help="tab-separated pair file")
    p_ev.add_argument("--report", default=None, help="also write the report as JSON")
    p_ev.set_defaults(func=cmd_eval)

    p_ab = sub.add_parser("ablate", help="leave-one-view-out score grid")
    p_ab.add_argument("--method", choices=METHODS, action="append", default=None,
                      help="repeatable, defaults to all methods")
    p_ab.add_argument("--views", action="append", required=True, metavar="PATH")
    p_ab.add_argument("--sts", required=True)
    _add_hyper_flags(p_ab)
    p_ab.set_defaults(func=cmd_ablate)

    p_up = sub.add_parser("upproject", help="random up-projection baseline, one file per seed")
    p_up.add_argument("--embedding", required=True, help="source view")
    p_up.add_argument("--d", type=int, required=True, help="target width")
    p_up.add_argument("--seeds", type=int, action="append", default=None,
                      help="repeatable, defaults to 0..9")
    p_up.add_argument("--out-prefix", required=True)
    p_up.set_defaults(func=cmd_upproject)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MetaembError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
