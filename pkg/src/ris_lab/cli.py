"""``ris-lab`` command line: experiment subcommands writing CSVs to ``--out``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, SystemConfig, check, load_config
from .ris import EnumerationError

SUBCOMMANDS = {
    "convergence": "per-episode training reward of DQN and HDRL",
    "sweep-L": "secure sum rate against RIS size for all algorithms",
    "timing": "wall time per optimizer run against RIS size",
    "power-sweep": "RSMA vs NOMA secure sum rate against transmit power",
    "oracle": "small-instance comparison with exhaustive search",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a flag given before the command from being reset by the
    # subcommand parser; defaults are filled in by _defaults()
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", type=Path, help="JSON system config")
    common.add_argument("--seed", type=int, help="experiment seed (unsigned 64-bit)")
    common.add_argument("--out", type=Path, help="output directory (default: .)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a system or experiment field; repeatable")
    p = _Parser(prog="ris-lab", description="RIS phase-shift optimization experiments.", parents=[common])
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, text in SUBCOMMANDS.items():
        sub.add_parser(name, help=text, parents=[common], description=text)
    return p


def _defaults(args) -> argparse.Namespace:
    for name, value in (("config", None), ("seed", None), ("out", Path(".")), ("set", [])):
        if not hasattr(args, name):
            setattr(args, name, value)
    return args


def _parse_value(text: str, default):
    if isinstance(default, tuple):
        items = [t for t in text.split(",") if t.strip()]
        return tuple(_parse_value(t.strip(), 0.0 if any(isinstance(d, float) for d in default) else 0) for t in items)
    if isinstance(default, bool):
        if text.lower() in ("1", "true", "yes"):
            return True
        if text.lower() in ("0", "false", "no"):
            return False
        raise ValueError(f"not a boolean: {text!r}")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    if default is None:
        if text.lower() == "none":
            return None
        try:
            return int(text)
        except ValueError:
            return tuple(float(t) for t in text.split(","))
    return text


def _split_overrides(pairs, cfg: SystemConfig, st: harness.Settings):
    sys_kw, exp_kw = {}, {}
    sys_names = {f.name for f in dataclasses.fields(SystemConfig)}
    for item in pairs:
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        if key in sys_names:
            sys_kw[key] = _parse_value(val, getattr(cfg, key) if key != "d_Rk" else None)
        elif key in harness.Settings.field_names():
            exp_kw[key] = _parse_value(val, getattr(st, key))
        else:
            raise UsageError(f"unknown field {key!r} in --set")
    return sys_kw, exp_kw


def build(args) -> tuple[SystemConfig, harness.Settings]:
    cfg = SystemConfig().derive(**harness.DESK_DEFAULTS)
    if args.config is not None:
        cfg = load_config(args.config, **{k: v for k, v in harness.DESK_DEFAULTS.items()
                                          if k not in _config_keys(args.config)})
    st = harness.Settings()
    sys_kw, exp_kw = _split_overrides(args.set, cfg, st)
    if args.seed is not None:
        sys_kw["rng_seed"] = args.seed
    cfg = check(cfg.derive(**sys_kw))
    st = st.with_(**exp_kw)
    return cfg, st


def _config_keys(path) -> set:
    return set(json.loads(Path(path).read_text(encoding="utf-8")))


def run(command: str, cfg: SystemConfig, st: harness.Settings, out: Path) -> list[Path]:
    out.mkdir(parents=True, exist_ok=True)
    written = []

    def emit(name, header, rows):
        path = out / name
        harness.write_csv(path, header, rows)
        written.append(path)

    if command == "convergence":
        emit("convergence.csv", harness.CONV_HEADER, harness.convergence(cfg, st))
    elif command == "sweep-L":
        rows, _ = harness.sweep_L(cfg, st)
        emit("sweep_L.csv", harness.SWEEP_HEADER, rows)
    elif command == "timing":
        emit("timing.csv", harness.TIMING_HEADER, harness.timing(cfg, st))
    elif command == "power-sweep":
        rows, _ = harness.power_sweep(cfg, st)
        emit("power_sweep.csv", harness.POWER_HEADER, rows)
    elif command == "oracle":
        emit("oracle.csv", harness.ORACLE_HEADER, harness.oracle(cfg, st))
    else:
        raise UsageError(f"unknown command {command!r}")
    return written


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = _defaults(parser.parse_args(argv))
        if args.command is None:
            raise UsageError("a command is required")
        cfg, st = build(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ris-lab: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"ris-lab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    try:
        for path in run(args.command, cfg, st, args.out):
            print(path)
    except EnumerationError as exc:
        print(f"ris-lab: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
