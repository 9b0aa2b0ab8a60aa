"""Command-line front end.

    pulsecorr run CONFIG [--out DIR] [--format csv,svg] [--threads N]
    pulsecorr figures --paper [--out DIR] [--format csv,svg] [--threads N]

Exit codes: 0 success, 2 scenario error, 3 numeric error, 1 I/O error.
The output directory is taken from ``--out``, then ``$PULSECORR_OUT_DIR``,
then the scenario file.
"""

import argparse
import os
import sys

from .figures import builtin_figures
from .scenario import OUT_DIR_ENV, ConfigError, emit_figures, load_config, run_scenario

EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 1


def _formats(text):
    formats = tuple(f.strip() for f in text.split(",") if f.strip())
    bad = [f for f in formats if f not in ("csv", "svg")]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(bad)}")
    return formats


def build_parser():
    parser = argparse.ArgumentParser(prog="pulsecorr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario file")
    run.add_argument("config")
    fig = sub.add_parser("figures", help="write the built-in figure datasets")
    fig.add_argument("--paper", action="store_true", required=True)
    for p in (run, fig):
        p.add_argument("--out", help="output directory")
        p.add_argument("--format", type=_formats, default=None, help="comma list of csv,svg")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    env_out = os.environ.get(OUT_DIR_ENV)
    try:
        if args.command == "figures":
            out = args.out or env_out or "figures"
            paths = builtin_figures(out, formats=args.format or ("csv",), threads=args.threads)
        else:
            config = load_config(args.config)
            out = args.out or env_out or config.output.directory
            formats = args.format or config.output.formats
            dataset = run_scenario(config, threads=args.threads)
            paths = emit_figures(dataset, out, formats)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
