"""Command-line entry point.

Subcommands:
  run <config>            execute an experiment config and write reports
  synth <spec> <out>      generate a synthetic bundle from a spec file
  cam <tensor> <weights> <out>   render a class activation heatmap
  report <results dir>    rebuild reports from persisted predictions
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import cam as cam_mod
from .bundle import read_matrix, save_bundle
from .errors import ConfigError, FuselabError
from .runner import (
    emit_reports,
    load_experiment_config,
    parse_kv_file,
    replay_reports,
    run_experiment,
    write_predictions,
)
from .synthetic import SyntheticSpec, SyntheticView, complementary_spec, generate_synthetic


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 2 without a traceback
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fuselab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config", help="flat key-value experiment config file")
    p_run.add_argument("--seed", type=int, default=None, help="override config seed")
    p_run.add_argument("--folds", type=int, default=None, help="override fold count")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.set_defaults(func=_cmd_run)

    p_synth = sub.add_parser("synth", help="generate a synthetic bundle")
    p_synth.add_argument("spec", help="flat key-value synthetic spec file")
    p_synth.add_argument("out", help="bundle output directory")
    p_synth.add_argument("--seed", type=int, default=None, help="override spec seed")
    p_synth.set_defaults(func=_cmd_synth)

    p_cam = sub.add_parser("cam", help="render a class activation map")
    p_cam.add_argument("activations", help="CAMT1 activation tensor file")
    p_cam.add_argument("weights", help="FUSE1 matrix of classifier weights")
    p_cam.add_argument("out", help="output PGM path")
    p_cam.add_argument("--class-id", type=int, default=0, help="row of the weight matrix to use")
    p_cam.add_argument("--upsample", default=None, metavar="HxW", help="bilinear upsample target")
    p_cam.add_argument("--color", action="store_true", help="also write a blue-to-red PPM")
    p_cam.add_argument("--relu", action="store_true", help="clamp negatives before normalizing")
    p_cam.set_defaults(func=_cmd_cam)

    p_report = sub.add_parser("report", help="rebuild reports from a results directory")
    p_report.add_argument("results", help="directory holding run.json and predictions CSVs")
    p_report.set_defaults(func=_cmd_report)
    return parser


def _cmd_run(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.folds is not None:
        overrides["folds"] = args.folds
    if args.out is not None:
        overrides["out_dir"] = args.out
    config = load_experiment_config(args.config, overrides)
    result = run_experiment(config)
    written = write_predictions(result, config.out_dir)
    written += emit_reports(result, config.report_formats, config.out_dir)
    for path in written:
        print(path)
    return 0


_SYNTH_KEYS = {
    "name",
    "preset",
    "seed",
    "classes",
    "sizes",
    "views",
    "width",
    "noise",
    "separation",
    "spread",
}


def _synth_spec_from_file(path: str, seed_override: int | None) -> tuple[SyntheticSpec, int]:
    kv = parse_kv_file(path)
    unknown = set(kv) - _SYNTH_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    seed = seed_override if seed_override is not None else int(kv.get("seed", 0))
    preset = kv.get("preset", "blobs")
    if preset == "complementary":
        sizes = tuple(int(s) for s in kv.get("sizes", "50,50,50").split(","))
        if len(sizes) != 3:
            raise ConfigError("complementary preset needs exactly 3 class sizes")
        spec = complementary_spec(
            class_sizes=sizes,
            width=int(kv.get("width", 6)),
            separation=float(kv.get("separation", 3.0)),
            noise_scale=float(kv.get("noise", 0.5)),
        )
        if "name" in kv:
            spec = SyntheticSpec(
                dataset=kv["name"],
                class_names=spec.class_names,
                class_sizes=spec.class_sizes,
                views=spec.views,
            )
        return spec, seed
    if preset != "blobs":
        raise ConfigError(f"unknown preset '{preset}' (expected 'blobs' or 'complementary')")
    n_classes = int(kv.get("classes", 3))
    sizes = tuple(int(s) for s in kv.get("sizes", ",".join(["50"] * n_classes)).split(","))
    if len(sizes) != n_classes:
        raise ConfigError(f"'sizes' must list {n_classes} entries")
    noise = float(kv.get("noise", 0.5))
    spread = float(kv.get("spread", 3.0))
    entries = []
    for item in kv.get("views", "view0:8").split(","):
        name, _, width = item.strip().partition(":")
        if not width:
            raise ConfigError(f"view entry '{item.strip()}' must look like name:width")
        entries.append((name, int(width)))
    # class means drawn from the seed so the bundle is fully reproducible
    mean_rng = np.random.default_rng(np.random.SeedSequence([seed, len(entries)]))
    views = tuple(
        SyntheticView(
            name=name,
            class_means=mean_rng.normal(0.0, spread, size=(n_classes, width)),
            noise_scale=noise,
        )
        for name, width in entries
    )
    spec = SyntheticSpec(
        dataset=kv.get("name", "blobs"),
        class_names=tuple(f"class{i}" for i in range(n_classes)),
        class_sizes=sizes,
        views=views,
    )
    return spec, seed


def _cmd_synth(args) -> int:
    spec, seed = _synth_spec_from_file(args.spec, args.seed)
    bundle = generate_synthetic(spec, seed)
    save_bundle(bundle, args.out)
    print(args.out)
    return 0


def _cmd_cam(args) -> int:
    tensor = cam_mod.load_tensor(args.activations)
    weights = read_matrix(args.weights)
    if not 0 <= args.class_id < weights.shape[0]:
        raise ConfigError(
            f"class id {args.class_id} outside weight matrix with {weights.shape[0]} rows"
        )
    raw = cam_mod.compute_cam(tensor, weights[args.class_id], relu=args.relu)
    if args.upsample is not None:
        try:
            h, w = (int(p) for p in args.upsample.lower().split("x"))
        except ValueError as e:
            raise ConfigError(f"--upsample expects HxW, got {args.upsample!r}") from e
        raw = cam_mod.bilinear_upsample(raw, h, w)
    heatmap = cam_mod.normalize_minmax(raw, source_shape=tensor.shape, class_id=args.class_id)
    cam_mod.export_heatmap(heatmap, args.out, color=args.color)
    print(args.out)
    return 0


def _cmd_report(args) -> int:
    for path in replay_reports(args.results):
        print(path)
    return 0


def cli_main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (FuselabError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
