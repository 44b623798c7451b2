"""Command-line driver.

Subcommands::

    osbd run <experiment> [--config PATH] [--seed U64] [--threads N]
                          [--preset desk|full] [--out DIR]
    osbd list
    osbd validate-config --config PATH
    osbd golden [--out DIR]

Exit codes: 0 every check passed, 1 a check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from ._backend import active_backend
from .config import ConfigError, ExperimentConfig, dumps17, load_config
from .coupling import lemma3_bound
from .deposition import InitialCondition, simulate_heights
from .experiments import list_experiments, resolve_params, run_experiment
from .lpp import TiePolicy, extract_geodesic, lpp_height
from .rng import MarkField, reverse_field


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer seed: {text!r}")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="osbd",
        description="Monte Carlo laboratory for one-sided deposition "
                    "heights and their directed-chain representations.")
    sub = p.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment")
    run_p.add_argument("experiment", help="E1..E8")
    run_p.add_argument("--config", metavar="PATH")
    run_p.add_argument("--seed", type=_parse_seed, metavar="U64")
    run_p.add_argument("--threads", type=int, metavar="N")
    run_p.add_argument("--preset", choices=("desk", "full"))
    run_p.add_argument("--out", metavar="DIR")

    sub.add_parser("list", help="list registered experiments")

    val_p = sub.add_parser("validate-config",
                           help="check a config file without running")
    val_p.add_argument("--config", required=True, metavar="PATH")

    gold_p = sub.add_parser(
        "golden", help="re-derive the fixed-input worked example")
    gold_p.add_argument("--out", metavar="DIR")
    return p


def _cmd_run(args) -> int:
    kwargs = {}
    if args.config:
        kwargs.update(load_config(args.config))
    kwargs["experiment"] = args.experiment
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.threads is not None:
        kwargs["threads"] = args.threads
    if args.preset is not None:
        kwargs["preset"] = args.preset
    if args.out is not None:
        kwargs["out_dir"] = args.out
    cfg = ExperimentConfig(**kwargs)
    manifest = run_experiment(cfg)
    print(f"{cfg.experiment} preset={cfg.preset} seed={cfg.seed:#x} "
          f"backend={manifest.config['backend']} "
          f"threads={cfg.threads}")
    for name in sorted(manifest.checks):
        rec = manifest.checks[name]
        verdict = "PASS" if rec["passed"] else "FAIL"
        detail = " ".join(
            f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
            for k, v in rec.items() if k != "passed")
        print(f"  {name}: {verdict} {detail}")
    print(f"wall {manifest.wall_clock_s:.2f} s -> "
          f"{Path(cfg.out_dir) / 'summary.json'}")
    return 0 if manifest.passed else 1


def _cmd_list() -> int:
    for name, title, summary in list_experiments():
        print(f"{name}  {title}")
        print(f"    desk: {summary}")
    return 0


def _cmd_validate(args) -> int:
    kwargs = load_config(args.config)
    if "experiment" not in kwargs:
        raise ConfigError("config file must set [run] experiment")
    cfg = ExperimentConfig(**kwargs)
    resolve_params(cfg)
    print(f"OK: {args.config} ({cfg.experiment}, preset {cfg.preset})")
    return 0


#: Fixed worked example: sixteen marks on eight columns, horizon 17.
_GOLDEN_COLUMNS = {1: (), 2: (10.0,), 3: (1.0, 5.0, 14.0),
                   4: (3.0, 4.0, 9.0), 5: (7.0, 15.0),
                   6: (2.0, 8.0, 11.0), 7: (12.0, 13.0), 8: (6.0, 16.0)}
_GOLDEN_PROFILE = (0, 1, 3, 4, 5, 6, 8, 9)
_GOLDEN_VALUE = 9
_GOLDEN_JUMPS = ((1.0, 1), (5.0, 2), (9.0, 3), (10.0, 4), (14.0, 5),
                 (16.0, 6))
_GOLDEN_BOUND = 4.520850e-13


def golden_report() -> dict:
    """Re-derive the worked example and the closed-form tail constant."""
    k = 8
    t = 17.0
    times = np.array([q for c in range(1, k + 1)
                      for q in _GOLDEN_COLUMNS[c]], dtype=np.float64)
    offs = np.cumsum(
        [0] + [len(_GOLDEN_COLUMNS[c]) for c in range(1, k + 1)]
    ).astype(np.int64)
    fld = MarkField(t, k, times, offs)
    prof = simulate_heights(fld, InitialCondition.flat(), t, k)
    rev = reverse_field(fld)
    out = lpp_height(rev, InitialCondition.flat(), t, k, keep_trace=True)
    geo = extract_geodesic(out.trace, TiePolicy.PREFER_JUMP)
    bound = lemma3_bound(10.0, 10, 100, 10.0)
    return {
        "profile": {"got": list(prof.heights),
                    "want": list(_GOLDEN_PROFILE),
                    "passed": tuple(prof.heights) == _GOLDEN_PROFILE},
        "reflected_value": {"got": out.value, "want": _GOLDEN_VALUE,
                            "passed": out.value == _GOLDEN_VALUE},
        "geodesic_jumps": {"got": [list(j) for j in geo.jumps],
                           "want": [list(j) for j in _GOLDEN_JUMPS],
                           "passed": geo.jumps == _GOLDEN_JUMPS},
        "tail_constant": {"got": bound, "want": _GOLDEN_BOUND,
                          "passed": abs(bound - _GOLDEN_BOUND)
                          <= 1e-6 * _GOLDEN_BOUND},
    }


def _cmd_golden(args) -> int:
    report = golden_report()
    ok = True
    for name in sorted(report):
        rec = report[name]
        verdict = "PASS" if rec["passed"] else "FAIL"
        ok = ok and rec["passed"]
        print(f"  {name}: {verdict} got={rec['got']} want={rec['want']}")
    print(f"golden ({active_backend()} backend): "
          f"{'all checks passed' if ok else 'FAILURES'}")
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / "golden.json"
        path.write_text(dumps17(report) + "\n", encoding="utf-8")
        print(f"wrote {path}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "list":
            return _cmd_list()
        if args.command == "validate-config":
            return _cmd_validate(args)
        return _cmd_golden(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
