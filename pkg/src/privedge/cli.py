"""Command-line front end.

    privedge simulate --scheme 2 --e 9 --p 5 --n 4 --k 2
    privedge optimize --scheme 1 --z 2 --set gamma=2.5
    privedge sweep --scheme 1,2 --z 1,2 --gamma-grid 0:5:0.5
    privedge deadline --scheme 1,2 --gamma-grid 1,4.5 --deadline-grid 5000:20000:5000
    privedge trace --scheme 2 --e 3 --p 2 --n 3 --k 2

Results go to ``--out`` (default stdout) as CSV; the resolved parameters are
echoed to stderr as a config file that reproduces the run.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np

from .baseline import baseline_batch, optimize_baseline
from .engine import format_log, run_trial, simulate
from .exceptions import EmptySpace, PrivEdgeError
from .latency import SystemConfig, setup_matrix
from .optimizer import (SearchSpace, _mean_stderr, deadline_profile, optimize, scheme_row,
                        table_csv)
from .schemes import PrivateCodingScheme

EXIT_OK, EXIT_CONFIG, EXIT_EMPTY = 0, 2, 3

TUPLE_FIELDS = ("variant", "e", "p", "n", "k", "n_prime", "k_prime", "t")
SWEEP_COLUMNS = ("gamma", "scheme", "z", "mean_latency", "stderr") + TUPLE_FIELDS
DEADLINE_COLUMNS = ("gamma", "scheme", "deadline", "exceedance_probability") + TUPLE_FIELDS
RUN_KEYS = {"trials": int}


class ConfigError(Exception):
    pass


def _convert(name: str, raw: str):
    raw = raw.strip()
    if name in RUN_KEYS:
        return RUN_KEYS[name](raw)
    kinds = {f.name: f.type for f in fields(SystemConfig)}
    if name not in kinds:
        raise ConfigError(f"unknown config key {name!r}")
    if name == "u":
        return None if raw.lower() in ("", "none") else int(raw)
    if name in ("mu", "log_base"):
        return raw
    if name in ("e_max", "m", "r", "q", "seed"):
        return int(raw)
    return float(raw)


def parse_pairs(lines, source: str) -> dict:
    out = {}
    for no, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected key=value, got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        try:
            out[key] = _convert(key, val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{no}: bad value for {key}: {exc}") from None
    return out


def resolve(args) -> tuple[SystemConfig, dict]:
    """Defaults, then the config file, then ``--set`` overrides, then dedicated flags."""
    values = {}
    if args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        values.update(parse_pairs(path.read_text(encoding="utf-8").splitlines(), str(path)))
    values.update(parse_pairs(args.set or [], "--set"))
    if args.seed is not None:
        values["seed"] = args.seed
    run = {"trials": values.pop("trials", None)}
    if args.trials is not None:
        run["trials"] = args.trials
    if run["trials"] is None:
        run["trials"] = DEFAULT_TRIALS[args.command]
    if run["trials"] < 1:
        raise ConfigError("trials must be >= 1")
    try:
        cfg = SystemConfig(**values)
    except PrivEdgeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, run


DEFAULT_TRIALS = {"simulate": 10_000, "optimize": 10_000, "sweep": 10_000,
                  "deadline": 100_000, "trace": 1}


def echo(cfg: SystemConfig, run: dict, stream) -> None:
    for name, val in cfg.items():
        stream.write(f"{name}={'none' if val is None else val}\n")
    for name, val in run.items():
        stream.write(f"{name}={val}\n")


def parse_grid(text: str) -> list[float]:
    """``a,b,c`` or an inclusive ``start:stop:step`` range."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError("step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 12) for i in range(n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from None


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad {what} list {text!r}") from None


def parse_schemes(text: str) -> list[str]:
    out = [s.strip() for s in text.split(",") if s.strip()]
    for s in out:
        if s not in ("1", "2", "3", "b"):
            raise ConfigError(f"unknown scheme {s!r}; use 1, 2, 3 or b")
    return out


def scheme_from_args(args) -> PrivateCodingScheme:
    need = ["e", "p", "n", "k"]
    if args.scheme == "1":
        need.append("t")
    if args.scheme == "3":
        need += ["n_prime", "k_prime"]
    missing = [f"--{x.replace('_', '-')}" for x in need if getattr(args, x) is None]
    if args.scheme not in ("1", "2", "3"):
        raise ConfigError("a single private scheme (1, 2 or 3) is required")
    if missing:
        raise ConfigError(f"scheme {args.scheme} needs {' '.join(missing)}")
    try:
        return PrivateCodingScheme(int(args.scheme), args.e, args.p, args.n, args.k, args.z_one,
                                   args.t if args.scheme == "1" else None,
                                   args.n_prime if args.scheme == "3" else None,
                                   args.k_prime if args.scheme == "3" else None)
    except PrivEdgeError as exc:
        raise ConfigError(str(exc)) from None


def write_rows(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({c: repr(v) if isinstance(v, float) else v for c, v in row.items()})
    return buf.getvalue()


def _tuple_fields(s: PrivateCodingScheme) -> dict:
    row = scheme_row(s)
    return {k: row[k] for k in TUPLE_FIELDS}


def _baseline_fields(b) -> dict:
    # the baseline reuses the tuple columns: p holds the replication, (n, k) the code
    return {"variant": "b", "e": b.e, "p": b.replication, "n": b.N_c, "k": b.K_c,
            "n_prime": "", "k_prime": "", "t": ""}


def cmd_simulate(args, cfg, run) -> str:
    s = scheme_from_args(args)
    lam = setup_matrix(run["trials"], max(cfg.e_max, s.e), cfg.eta, cfg.seed)
    mean, se = _mean_stderr(simulate(s, cfg, lam))
    row = scheme_row(s)
    row.update(mean=mean, stderr=se, trials=run["trials"])
    return table_csv([row])


def cmd_optimize(args, cfg, run) -> str:
    (variant,) = _single_private(args)
    z = _single_z(args)
    res = optimize(SearchSpace.from_config(variant, z, cfg), cfg, run["trials"])
    sys.stderr.write(f"# best {res.best} mean={res.mean!r} stderr={res.stderr!r}\n")
    return res.to_csv()


def _single_z(args) -> int:
    zs = parse_ints(args.z, "z")
    if len(zs) != 1:
        raise ConfigError("this command takes exactly one privacy level")
    return zs[0]


def _single_private(args) -> tuple[int]:
    schemes = parse_schemes(args.scheme)
    if len(schemes) != 1 or schemes[0] == "b":
        raise ConfigError("optimize takes exactly one private scheme")
    return (int(schemes[0]),)


def cmd_sweep(args, cfg, run) -> str:
    gammas = parse_grid(args.gamma_grid)
    if not gammas:
        raise ConfigError("empty gamma grid")
    schemes = parse_schemes(args.scheme)
    zs = parse_ints(args.z, "z")
    lam = setup_matrix(run["trials"], cfg.e_max, cfg.eta, cfg.seed)
    rows = []
    for g in gammas:
        c = cfg.replace(gamma=g)
        for sch in schemes:
            if sch == "b":
                b, _ = optimize_baseline(c, lam)
                mean, se = _mean_stderr(baseline_batch(b, c, lam))
                rows.append({"gamma": g, "scheme": sch, "z": "", "mean_latency": mean,
                             "stderr": se, **_baseline_fields(b)})
                continue
            for z in zs:
                res = optimize(SearchSpace.from_config(int(sch), z, c), c, run["trials"], lam)
                rows.append({"gamma": g, "scheme": sch, "z": z, "mean_latency": res.mean,
                             "stderr": res.stderr, **_tuple_fields(res.best)})
    return write_rows(SWEEP_COLUMNS, rows)


def cmd_deadline(args, cfg, run) -> str:
    if run["trials"] < 10_000:
        raise ConfigError("deadline runs need at least 10^4 trials")
    if run["trials"] < 100_000:
        warnings.warn("fewer than 10^5 trials resolve small probabilities poorly")
    gammas = parse_grid(args.gamma_grid)
    deadlines = parse_grid(args.deadline_grid)
    if not gammas or not deadlines:
        raise ConfigError("empty gamma or deadline grid")
    z = _single_z(args)
    lam = setup_matrix(run["trials"], cfg.e_max, cfg.eta, cfg.seed)
    rows = []
    for g in gammas:
        c = cfg.replace(gamma=g)
        for sch in parse_schemes(args.scheme):
            if sch == "b":
                raise ConfigError("deadline runs cover the private schemes only")
            space = SearchSpace.from_config(int(sch), z, c)
            pts = deadline_profile(space, c, deadlines, run["trials"],
                                   screen_trials=min(args.screen_trials, run["trials"]),
                                   lam_matrix=lam)
            for pt in pts:
                rows.append({"gamma": g, "scheme": sch, "deadline": pt.deadline,
                             "exceedance_probability": pt.probability,
                             **_tuple_fields(pt.scheme)})
    return write_rows(DEADLINE_COLUMNS, rows)


def cmd_trace(args, cfg, run) -> str:
    s = scheme_from_args(args)
    lam = setup_matrix(args.trial + 1, max(cfg.e_max, s.e), cfg.eta, cfg.seed)[args.trial]
    out, log = run_trial(s, cfg, lam, log_capacity=100_000)
    text = format_log(log, cfg, s)
    summary = (f"upload_end={out.upload_end!r} compute_end={out.compute_end!r} "
               f"download_end={out.download_end!r} decode={out.decode_time!r} "
               f"total={out.total!r}")
    return text + "\n" + summary + "\n"


COMMANDS = {"simulate": cmd_simulate, "optimize": cmd_optimize, "sweep": cmd_sweep,
            "deadline": cmd_deadline, "trace": cmd_trace}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privedge",
                                     description="Latency simulator for private coded edge computing.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="key=value file, '#' starts a comment")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one config key (repeatable)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        if name in ("simulate", "trace"):
            p.add_argument("--scheme", required=True, choices=["1", "2", "3"])
            for f in ("e", "p", "n", "k", "t", "n-prime", "k-prime"):
                p.add_argument(f"--{f}", type=int)
            p.add_argument("--z", dest="z_one", type=int, default=None)
            if name == "trace":
                p.add_argument("--trial", type=int, default=0, help="row of the setup-time matrix")
        else:
            p.add_argument("--scheme", default="1", help="comma list of 1, 2, 3, b (baseline)")
            p.add_argument("--z", default="1", help="comma list of privacy levels")
        if name in ("sweep", "deadline"):
            p.add_argument("--gamma-grid", default="0:5:1")
        if name == "deadline":
            p.add_argument("--deadline-grid", default="10000")
            p.add_argument("--screen-trials", type=int, default=10_000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg, run = resolve(args)
        echo(cfg, run, sys.stderr)
        text = COMMANDS[args.command](args, cfg, run)
    except EmptySpace as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_EMPTY
    except (ConfigError, PrivEdgeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
