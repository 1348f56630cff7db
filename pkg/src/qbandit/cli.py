"""Command-line entry point: ``qbandit {run,sweep,trace,selftest}``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import config as cfgmod
from . import harness, selftest

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

log = logging.getLogger("qbandit")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment config (JSON)")
    common.add_argument("--out", dest="out_dir", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("--reps", type=int)
    common.add_argument("--horizon", type=int)
    common.add_argument("--policies", type=_str_list, help="comma-separated policy ids")
    common.add_argument("--k", dest="k_list", type=_int_list, help="comma-separated K values")
    common.add_argument("--no-figures", dest="figures", action="store_const", const=False,
                        help="skip writing PNG figures")
    common.add_argument("--print-config", action="store_true",
                        help="print the effective config and exit")

    parser = _Parser(prog="qbandit", description="Amplified adversarial bandit simulator.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("run", parents=[common], help="regret curves for one K (regret.csv)")
    sub.add_parser("sweep", parents=[common], help="final regret across K (final.csv)")
    sub.add_parser("trace", parents=[common], help="phase/ratio trace of qb (phase_trace.csv)")
    st = sub.add_parser("selftest", help="run the property suites")
    st.add_argument("--seed", type=int, default=0)
    return parser


def _effective_config(args) -> dict:
    d = cfgmod.load_dict(args.config) if args.config else cfgmod.default_dict()
    return cfgmod.apply_overrides(
        d,
        out_dir=args.out_dir, seed=args.seed, reps=args.reps, horizon=args.horizon,
        policies=args.policies, k_list=args.k_list, figures=args.figures,
    )


def _run(cfg: harness.ExperimentConfig, out: Path) -> None:
    result = harness.run_experiment(cfg)
    print(harness.write_regret_csv(result, out / "regret.csv"))
    if cfg.figures:
        from . import plotting

        print(plotting.plot_regret(result, out / "regret.png"))
    for pid in cfg.policies:
        print(f"  {pid:<11} final regret {result.final_mean(pid):9.3f} +- {result.final_std(pid):.3f}")


def _sweep(cfg: harness.ExperimentConfig, out: Path) -> None:
    results = harness.sweep_k(cfg)
    print(harness.write_final_csv(results, out / "final.csv"))
    if cfg.figures:
        from . import plotting

        print(plotting.plot_final(results, out / "final.png"))


def _trace(cfg: harness.ExperimentConfig, out: Path) -> None:
    rows = harness.phase_trace(cfg)
    bad = sum(not harness.trace_row_ok(r[1], r[3], r[4]) for r in rows)
    print(harness.write_phase_trace_csv(rows, out / "phase_trace.csv"))
    if cfg.figures:
        from . import plotting

        print(plotting.plot_phase_trace(rows, out / "phase_trace.png"))
    print(f"  {len(rows)} rows, {bad} outside the feasible phase/ratio range")
    if bad:
        raise RuntimeError(f"{bad} trace rows violate the phase range")


COMMANDS = {"run": _run, "sweep": _sweep, "trace": _trace}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        _, failed = selftest.run_all(args.seed)
        return EXIT_OK if failed == 0 else EXIT_RUNTIME

    try:
        d = _effective_config(args)
        cfg = cfgmod.to_experiment(d)
    except cfgmod.ConfigError as exc:
        print(f"qbandit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        print(json.dumps(d, indent=2))
        return EXIT_OK

    try:
        COMMANDS[args.command](cfg, Path(cfg.out_dir))
    except Exception as exc:
        log.debug("run failed", exc_info=True)
        print(f"qbandit: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
