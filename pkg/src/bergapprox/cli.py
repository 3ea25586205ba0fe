"""Command line: ``bergapprox run|validate|list-weights|list-test-functions``."""

from __future__ import annotations

import argparse
import logging
import sys

from .bergman import TEST_FUNCTIONS
from .experiment import SCENARIOS, ConfigError, RunError, emit, load_config, run
from .weights import MODEL_WEIGHTS


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.scenario:
        cfg = cfg.with_scenarios(args.scenario)
    report = run(cfg)
    for path in emit(report, cfg, args.out_dir):
        print(f"wrote {path}")
    for name, verdict in report.verdicts.items():
        status = {True: "PASS", False: "FAIL", None: "N/A "}[verdict["passed"]]
        print(f"{status} {name}: {verdict['detail']}")
    return 0 if report.passed else 1


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    enabled = ", ".join(s for s in SCENARIOS if cfg.scenarios[s]) or "none"
    print(f"ok: weight={cfg.weight['name']} k_values={cfg.k_values} resolution={cfg.resolution} scenarios: {enabled}")
    return 0


def _cmd_list(table) -> int:
    for name, desc in table.items():
        print(f"{name:16s} {desc}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergapprox", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress per k")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the k-sweep and write CSV/JSON reports")
    p_run.add_argument("config")
    p_run.add_argument("--out-dir", default=".")
    p_run.add_argument(
        "--scenario", action="append", choices=SCENARIOS,
        help="run only these scenarios (repeatable); overrides the config flags",
    )
    p_run.set_defaults(func=_cmd_run)

    p_val = sub.add_parser("validate", help="check a config file and print the resolved settings")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    sub.add_parser("list-weights").set_defaults(func=lambda a: _cmd_list(MODEL_WEIGHTS))
    sub.add_parser("list-test-functions").set_defaults(func=lambda a: _cmd_list(TEST_FUNCTIONS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, RunError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
