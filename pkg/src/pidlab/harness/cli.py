"""``pidlab`` command line: ``pidlab list`` and ``pidlab run --config FILE``.

Exit codes: 0 all bounded rows satisfied, 1 numerical failure / unsatisfied
bound / I/O error, 2 usage or config error.
"""

import argparse
import sys

from ..errors import InvalidInputError
from .config import load_config
from .experiments import REGISTRY, run_experiment
from .report import emit_report


def _build_parser():
    parser = argparse.ArgumentParser(prog="pidlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="print the experiment registry")
    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", help="override the config output_dir")
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "list":
        for name in REGISTRY:
            print(name)
        return 0

    try:
        config = load_config(args.config).with_overrides(args.seed, args.out)
    except InvalidInputError as exc:
        print(f"pidlab: {exc}", file=sys.stderr)
        return 2
    rows = run_experiment(config)
    try:
        csv_path, summary_path = emit_report(rows, config.output_dir)
    except OSError as exc:
        print(f"pidlab: cannot write report: {exc}", file=sys.stderr)
        return 1
    checked = [r for r in rows if r.satisfied is not None]
    failed = [r for r in checked if not r.satisfied]
    print(f"{config.experiment}: {len(rows)} rows, {len(checked) - len(failed)}/{len(checked)} satisfied -> {csv_path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
