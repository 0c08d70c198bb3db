"""Command-line entry point for every pipeline stage.

One subcommand per stage; each writes a machine-readable report or binary
artifact and prints a one-line summary.  Exit codes: 0 on success, 2 on
validation errors, 3 on I/O or file-format errors.  Reports embed the full
resolved configuration so runs are reproducible from the report alone.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import dataio, tcas, tokenizer
from .errors import DataFormatError, ValidationError
from .toymodel import (
    CLASS_WISE,
    CROSS_CLASS,
    MAE_LIKE,
    ToySpaceSpec,
    build_mask_joint,
    build_point_space,
    make_partition,
    reconcile,
    verify_theorem1,
)
from .toymodel.graph import build_augmentation_matrix


def _parse_partition(value: str) -> tuple[str, int]:
    name, _, rest = value.partition(":")
    if name == "mae":
        return MAE_LIKE, 0
    if name == "class":
        return CLASS_WISE, 0
    if name == "cross":
        split = int(rest) if rest else 2
        return CROSS_CLASS, split
    raise ValidationError(
        f"unknown partition {value!r}; expected mae, class or cross[:l]"
    )


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_matrix_csv(path: str, matrix: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in matrix:
            writer.writerow([repr(float(v)) for v in row])


def _cmd_toymodel_analyze(args: argparse.Namespace) -> int:
    kind, split = _parse_partition(args.partition)
    spec = ToySpaceSpec(args.classes, args.n, args.m)
    report = reconcile(spec, kind, cross_split=split, c1=args.c1, c2=args.c2)
    payload = report.to_dict()
    payload["config"] = {
        "command": "toymodel-analyze",
        "classes": args.classes,
        "n": args.n,
        "m": args.m,
        "partition": args.partition,
        "c1": args.c1,
        "c2": args.c2,
        "threads": _threads(),
    }
    _write_json(args.out, payload)
    if args.dump_matrix:
        space = build_point_space(spec)
        joint = build_mask_joint(space)
        partition = make_partition(space, kind, cross_split=split)
        aug = build_augmentation_matrix(joint, partition)
        _dump_matrix_csv(args.dump_matrix, aug.matrix)
    print(
        f"toymodel-analyze: kind={kind} sum_lambda_sq={report.sum_lambda_sq:.6g} "
        f"alpha={report.alpha:.6g} bound={report.bound_raw:.6g} -> {args.out}"
    )
    return 0


def _cmd_toymodel_theorem1(args: argparse.Namespace) -> int:
    spec = ToySpaceSpec(args.classes, args.n, 0)
    space = build_point_space(spec)
    joint = build_mask_joint(space)
    result = verify_theorem1(space, joint, args.c1, args.c2)
    payload = result.to_dict()
    payload["config"] = {
        "command": "toymodel-theorem1",
        "classes": args.classes,
        "n": args.n,
        "c1": args.c1,
        "c2": args.c2,
        "threads": _threads(),
    }
    _write_json(args.out, payload)
    print(
        f"toymodel-theorem1: {result.n_partitions} partitions, "
        f"min={result.min_objective:.6g}, label attains min: "
        f"{result.label_attains_minimum} -> {args.out}"
    )
    return 0


def _cmd_tokenizer_train(args: argparse.Namespace) -> int:
    patches = dataio.read_patches(args.patches).astype(np.float64)
    if args.standardize:
        standardized, mean, std = tokenizer.standardize_features(patches)
        codebook = tokenizer.train_kmeans(
            standardized, args.k, args.seed, args.epochs, source=args.source
        )
        # store centers in raw feature units so inference needs no transform
        from dataclasses import replace

        codebook = replace(codebook, centers=codebook.centers * std + mean)
    else:
        codebook = tokenizer.train_kmeans(
            patches, args.k, args.seed, args.epochs, source=args.source
        )
    dataio.write_codebook(args.out, codebook)
    print(
        f"tokenizer-train: k={codebook.k} dim={codebook.dim} seed={codebook.seed} "
        f"epochs={codebook.epochs} -> {args.out}"
    )
    return 0


def _cmd_tokenizer_apply(args: argparse.Namespace) -> int:
    patches = dataio.read_patches(args.patches).astype(np.float64)
    codebook = dataio.read_codebook(args.codebook)
    assignment = tokenizer.assign_tokens(patches, codebook)
    dataio.write_tokens(args.out, assignment)
    print(
        f"tokenizer-apply: {assignment.tokens.size} patches over k={assignment.k} "
        f"codes, mean sq dist {assignment.distances.mean() if assignment.distances.size else 0.0:.6g} "
        f"-> {args.out}"
    )
    return 0


def _cmd_tcas_compute(args: argparse.Namespace) -> int:
    tokens, k = dataio.read_tokens(args.tokens)
    labels = dataio.read_labels(args.labels)
    co = tcas.accumulate(tokens, labels, k, args.classes)
    score = tcas.tcas(tcas.normalize_rows(co))
    payload = score.to_dict()
    payload["config"] = {
        "command": "tcas-compute",
        "tokens": args.tokens,
        "labels": args.labels,
        "classes": args.classes,
        "threads": _threads(),
    }
    _write_json(args.out, payload)
    if args.cooccurrence_out:
        tcas.write_cooccurrence_csv(args.cooccurrence_out, co)
    print(f"tcas-compute: value={score.value:.6g} (term1={score.term1:.6g}, "
          f"term2={score.term2:.6g}) -> {args.out}")
    return 0


def _cmd_synth_generate(args: argparse.Namespace) -> int:
    spec = dataio.SyntheticSpec(
        num_classes=args.classes,
        patches_per_class=args.per_class,
        dim=args.dim,
        center_spread=args.spread,
        noise_sigma=args.sigma,
        seed=args.seed,
    )
    patches, labels = dataio.generate_synthetic(spec)
    dataio.write_patches(args.out, patches)
    if args.labels_out:
        dataio.write_labels(args.labels_out, labels)
    print(
        f"synth-generate: {patches.shape[0]} patches of dim {patches.shape[1]} "
        f"({args.classes} classes, seed {args.seed}) -> {args.out}"
    )
    return 0


def _threads() -> int:
    env = os.environ.get("TOKGRAPH_THREADS")
    cpus = os.cpu_count() or 1
    try:
        return max(1, min(int(env), cpus)) if env is not None else cpus
    except ValueError:
        return cpus


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tokgraph",
        description="Toy-model bound analysis, K-means patch tokenizer, and "
                    "token-class alignment scoring.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toymodel-analyze", help="brute-force bound report with reconciliation")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--n", type=int, required=True, help="points per class")
    p.add_argument("--m", type=int, default=0, help="pairwise overlap")
    p.add_argument("--partition", required=True, help="mae | class | cross[:l]")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=2.5)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--dump-matrix", default=None, help="optional CSV dump of the augmentation matrix")
    p.set_defaults(func=_cmd_toymodel_analyze)

    p = sub.add_parser("toymodel-theorem1", help="exhaustive tokenizer-partition search")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--n", type=int, required=True, help="points per class (overlap is fixed at 0)")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=2.5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_toymodel_theorem1)

    p = sub.add_parser("tokenizer-train", help="train a K-means codebook over patches")
    p.add_argument("--patches", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--source", choices=(tokenizer.SOURCE_PIXEL, tokenizer.SOURCE_FEATURE),
                   default=tokenizer.SOURCE_PIXEL)
    p.add_argument("--standardize", action="store_true",
                   help="cluster per-feature standardized values")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tokenizer_train)

    p = sub.add_parser("tokenizer-apply", help="assign nearest-neighbor tokens")
    p.add_argument("--patches", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_tokenizer_apply)

    p = sub.add_parser("tcas-compute", help="token-class alignment score")
    p.add_argument("--tokens", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--classes", type=int, required=True, help="number of true classes")
    p.add_argument("--out", required=True)
    p.add_argument("--cooccurrence-out", default=None, help="optional CSV dump of counts")
    p.set_defaults(func=_cmd_tcas_compute)

    p = sub.add_parser("synth-generate", help="labeled Gaussian-blob patch dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--spread", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out", default=None)
    p.set_defaults(func=_cmd_synth_generate)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
