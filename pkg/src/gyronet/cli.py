"""Batch command-line interface.

Commands: gen-data, train-embeddings, train-classifier, evaluate, convert,
geometry-check.  Every command is deterministic given --seed; data outputs
carry no timestamps, so identical configs produce byte-identical files.
Settings may come from a UTF-8 key=value config file (--config); explicit
command-line flags win over config-file values.  Log level comes from the
GYRONET_LOG environment variable (error|info|debug).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import bundle, checks, data, embed, train
from .geometry import to_hyperboloid, to_poincare
from .hypformer import TransformerConfig

log = logging.getLogger("gyronet")

# Presets mirroring the published character-level model variants; word-based
# segmentation pipelines are out of scope, so only character presets ship.
PRESETS = {
    "eucl-c2v-128": {"geometry": "euclidean", "dim": 128, "dropout": 0.2, "lr": 0.0001},
    "eucl-c2v-256": {"geometry": "euclidean", "dim": 256, "dropout": 0.2, "lr": 0.0001},
    "hyp-c2v-100-nodrop": {"geometry": "poincare", "dim": 100, "dropout": 0.0, "lr": 0.001},
    "hyp-c2v-100-drop30": {"geometry": "poincare", "dim": 100, "dropout": 0.3, "lr": 0.001},
}


class CliError(Exception):
    pass


def _setup_logging():
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("GYRONET_LOG", "info").lower(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(asctime)s %(message)s")


def _load_config_file(path, parser):
    values = {}
    valid = {action.dest: action for action in parser._actions if action.dest != "help"}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected key=value")
            key, _, raw = line.partition("=")
            key = key.strip().replace("-", "_")
            if key not in valid:
                raise CliError(f"{path}:{lineno}: unknown config key '{key}'")
            action = valid[key]
            typ = action.type or str
            try:
                values[key] = typ(raw.strip())
            except ValueError as exc:
                raise CliError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    return values


def _parse_with_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    ns = argparse.Namespace()
    if known.config:
        for key, value in _load_config_file(known.config, parser).items():
            setattr(ns, key, value)
    args = parser.parse_args(argv, namespace=ns)
    log.info("resolved config: %s", {k: v for k, v in sorted(vars(args).items())})
    return args


def _add_common(parser):
    parser.add_argument("--config", help="key=value settings file")
    parser.add_argument("--seed", type=int, default=0)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_gen_data(argv):
    parser = argparse.ArgumentParser(prog="gyronet gen-data")
    _add_common(parser)
    parser.add_argument("--classes", type=int, default=8)
    parser.add_argument("--per-class", type=int, default=60)
    parser.add_argument("--vocab-size", type=int, default=48)
    parser.add_argument("--composites", type=int, default=2)
    parser.add_argument("--noise-len", type=int, default=3)
    parser.add_argument("--out", required=True)
    args = _parse_with_config(parser, argv)
    dataset = data.generate_synthetic_intents(
        args.classes, args.per_class, args.vocab_size, args.seed,
        composites=args.composites, noise_len=args.noise_len)
    data.save_intent_dataset(args.out, dataset.records)
    log.info("wrote %d utterances over %d intents to %s",
             len(dataset.records), len(dataset.label_to_id), args.out)


def cmd_train_embeddings(argv):
    parser = argparse.ArgumentParser(prog="gyronet train-embeddings")
    _add_common(parser)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--geometry", choices=["euclidean", "hyperboloid"],
                        default="hyperboloid")
    parser.add_argument("--dim", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=0.05)
    parser.add_argument("--window", type=int, default=5)
    parser.add_argument("--negatives", type=int, default=5)
    parser.add_argument("--theta", type=float, default=1.0)
    parser.add_argument("--min-count", type=int, default=1)
    parser.add_argument("--keep-whitespace", action="store_true")
    parser.add_argument("--out", required=True)
    args = _parse_with_config(parser, argv)
    tokens = list(data.ingest_corpus(args.corpus, keep_whitespace=args.keep_whitespace))
    config = embed.SkipgramConfig(
        geometry=args.geometry, dim=args.dim, mu=args.window, m=args.negatives,
        theta=args.theta, lr=args.lr, epochs=args.epochs, seed=args.seed,
        min_count=args.min_count)
    E, vocab, history = embed.train_skipgram(tokens, config, log_fn=log.info)
    embed.write_embeddings(args.out, vocab.id_to_token, E.A, args.geometry)
    log.info("wrote %d %s embeddings (dim %d) to %s",
             len(vocab), args.geometry, args.dim, args.out)


def _classifier_parser(prog):
    parser = argparse.ArgumentParser(prog=prog)
    _add_common(parser)
    parser.add_argument("--embeddings", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--geometry", choices=["euclidean", "poincare"], default="poincare")
    parser.add_argument("--preset", choices=sorted(PRESETS))
    parser.add_argument("--holdout", type=float, default=0.15)
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--head-dim", type=int, default=0, help="0 = model_dim // heads")
    parser.add_argument("--ffn-dim", type=int, default=0, help="0 = 2 * model_dim")
    parser.add_argument("--dropout", type=float, default=0.0)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--lr", type=float, default=0.001)
    parser.add_argument("--manifold-lr", type=float, default=0.05)
    parser.add_argument("--restart-epoch", type=int, default=-1, help="-1 = epoch midpoint")
    parser.add_argument("--max-seq-len", type=int, default=64)
    parser.add_argument("--pe-scale", type=float, default=1.0)
    parser.add_argument("--residual", action="store_true")
    parser.add_argument("--out", required=True)
    parser.add_argument("--metrics-out")
    return parser


def cmd_train_classifier(argv):
    parser = _classifier_parser("gyronet train-classifier")
    args = _parse_with_config(parser, argv)
    if args.preset:
        for key, value in PRESETS[args.preset].items():
            if key != "dim":
                setattr(args, key, value)
    token_map = train.load_embedding_points(args.embeddings, args.geometry)
    dataset = data.load_intent_dataset(args.data, args.holdout, args.seed)
    model_dim = token_map.dim
    head_dim = args.head_dim or max(model_dim // args.heads, 1)
    config = TransformerConfig(
        geometry=args.geometry, model_dim=model_dim, num_layers=args.layers,
        num_heads=args.heads, head_dim=head_dim,
        ffn_dim=args.ffn_dim or 2 * model_dim,
        num_classes=len(dataset.label_to_id), dropout=args.dropout,
        max_seq_len=args.max_seq_len, pe_scale=args.pe_scale,
        use_residual=args.residual)
    settings = train.TrainSettings(
        epochs=args.epochs, batch_size=args.batch_size, seed=args.seed,
        lr=args.lr, manifold_lr=args.manifold_lr,
        restart_epoch=None if args.restart_epoch < 0 else args.restart_epoch)
    params, history = train.train_classifier(dataset, token_map, config, settings,
                                             log_fn=log.info)
    metrics = train.evaluate_classifier(
        dataset, dataset.heldout_indices or dataset.train_indices,
        token_map, params, config)
    report = {
        "accuracy": metrics["accuracy"],
        "cross_entropy": metrics["cross_entropy"],
        "epochs": args.epochs,
        "geometry": args.geometry,
        "dims": model_dim,
        "seed": args.seed,
    }
    meta = config.to_dict()
    meta["labels"] = "\t".join(dataset.id_to_label)
    meta["embeddings_dim"] = str(model_dim)
    meta["epochs"] = str(args.epochs)
    bundle.save_bundle(args.out, args.geometry, meta, params)
    payload = json.dumps(report, sort_keys=True, indent=2)
    metrics_path = args.metrics_out or args.out + ".metrics.json"
    with open(metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(payload + "\n")
    print(payload)


def cmd_evaluate(argv):
    parser = argparse.ArgumentParser(prog="gyronet evaluate")
    _add_common(parser)
    parser.add_argument("--model", required=True)
    parser.add_argument("--embeddings", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--holdout", type=float, default=0.15)
    parser.add_argument("--split", choices=["heldout", "train", "all"], default="heldout")
    parser.add_argument("--metrics-out")
    args = _parse_with_config(parser, argv)
    geometry, meta, params = bundle.load_bundle(args.model)
    config = TransformerConfig.from_dict(meta)
    token_map = train.load_embedding_points(args.embeddings, geometry)
    dataset = data.load_intent_dataset(args.data, args.holdout, args.seed)
    if sorted(dataset.label_to_id) != sorted(meta["labels"].split("\t")):
        raise CliError("dataset labels do not match the trained model")
    indices = {"heldout": dataset.heldout_indices,
               "train": dataset.train_indices,
               "all": list(range(len(dataset.records)))}[args.split]
    metrics = train.evaluate_classifier(dataset, indices, token_map, params, config)
    report = {
        "accuracy": metrics["accuracy"],
        "cross_entropy": metrics["cross_entropy"],
        "epochs": int(meta.get("epochs", "0")) if meta.get("epochs") else 0,
        "geometry": geometry,
        "dims": config.model_dim,
        "seed": args.seed,
    }
    payload = json.dumps(report, sort_keys=True, indent=2)
    if args.metrics_out:
        with open(args.metrics_out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(payload + "\n")
    print(payload)


def cmd_convert(argv):
    parser = argparse.ArgumentParser(prog="gyronet convert")
    _add_common(parser)
    parser.add_argument("--in", dest="path_in", required=True)
    parser.add_argument("--out", required=True)
    args = _parse_with_config(parser, argv)
    tokens, matrix, geometry = embed.read_embeddings(args.path_in)
    if geometry == "hyperboloid":
        matrix = to_poincare(matrix)
        out_geometry = "poincare"
    elif geometry == "poincare":
        matrix = to_hyperboloid(matrix)
        out_geometry = "hyperboloid"
    else:
        raise CliError("euclidean embedding files cannot be converted")
    embed.write_embeddings(args.out, tokens, matrix, out_geometry)
    log.info("converted %s (%s) -> %s (%s)", args.path_in, geometry, args.out, out_geometry)


def cmd_geometry_check(argv):
    parser = argparse.ArgumentParser(prog="gyronet geometry-check")
    _add_common(parser)
    args = _parse_with_config(parser, argv)
    results = checks.run_all(seed_offset=args.seed)
    failed = False
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"suite {res.name} max_err {res.max_error:.3e} tol {res.tol:.1e} {status}")
        failed = failed or not res.passed
    return 1 if failed else 0


COMMANDS = {
    "gen-data": cmd_gen_data,
    "train-embeddings": cmd_train_embeddings,
    "train-classifier": cmd_train_classifier,
    "evaluate": cmd_evaluate,
    "convert": cmd_convert,
    "geometry-check": cmd_geometry_check,
}


def main(argv=None):
    _setup_logging()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        print("usage: gyronet COMMAND [options]\ncommands: " + ", ".join(sorted(COMMANDS)),
              file=sys.stderr)
        return 0 if argv else 2
    command = argv[0]
    handler = COMMANDS.get(command)
    if handler is None:
        print(f"gyronet: unknown command '{command}'", file=sys.stderr)
        return 2
    try:
        result = handler(argv[1:])
    except (CliError, ValueError, OSError, bundle.BundleError) as exc:
        print(f"gyronet {command}: error: {exc}", file=sys.stderr)
        return 1
    return int(result or 0)


if __name__ == "__main__":
    sys.exit(main())
