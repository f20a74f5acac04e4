"""extract: fine-tune a pretrained CNN on an image folder and export its
deep features, activations and classifier weights into a feature bundle.

    extract --arch resnet50 --data images/ --out bundle/ [--epochs 50
            --batch 16 --lr 0.0001 --momentum 0.9 --freeze-depth N
            --input-size S --no-pretrained --seed N]
    extract --validate bundle/
"""

from __future__ import annotations

import argparse
import sys

from .archs import ARCHITECTURES


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def _build_parser() -> _Parser:
    parser = _Parser(prog="extract", description=__doc__)
    parser.add_argument("--validate", metavar="BUNDLE", help="validate a bundle and exit")
    parser.add_argument("--arch", choices=ARCHITECTURES, help="architecture to fine-tune")
    parser.add_argument("--data", help="image directory with one subfolder per class")
    parser.add_argument("--out", help="bundle output directory")
    parser.add_argument("--epochs", type=int, default=50)
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--lr", type=float, default=0.0001)
    parser.add_argument("--momentum", type=float, default=0.9)
    parser.add_argument("--freeze-depth", type=int, default=0, help="freeze the first N backbone layers")
    parser.add_argument("--input-size", type=int, default=None, help="override the published input size")
    parser.add_argument("--no-pretrained", action="store_true", help="skip pretrained weights")
    parser.add_argument("--seed", type=int, default=0)
    return parser


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.validate is not None:
        from .validate import validate_bundle

        report = validate_bundle(args.validate)
        for problem in report.problems:
            print(problem, file=sys.stderr)
        print(f"{args.validate}: {'ok' if report.ok else f'{len(report.problems)} problem(s)'}")
        return 0 if report.ok else 1
    if not (args.arch and args.data and args.out):
        parser.print_usage(sys.stderr)
        return 2
    from .export import ExtractorJob, fine_tune_and_export

    try:
        job = ExtractorJob(
            architecture=args.arch,
            data_dir=args.data,
            out_dir=args.out,
            epochs=args.epochs,
            batch_size=args.batch,
            learning_rate=args.lr,
            momentum=args.momentum,
            freeze_depth=args.freeze_depth,
            input_size=args.input_size,
            pretrained=not args.no_pretrained,
            seed=args.seed,
        )
        result = fine_tune_and_export(job)
    except (ValueError, FileNotFoundError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(result.view_file)
    print(result.weights_file)
    print(result.activations_dir)
    print(f"feature width: {result.feature_width}, weights: {result.weights_source}")
    return 0


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
