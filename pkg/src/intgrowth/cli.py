"""Command-line entry point: ``intgrowth <command> <action> ...``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import group_core as gc
from .diffeo_action import CHECKS, ActionConfig, derivative_action, eval_action, plot_rows, verify_suite
from .dynamics import (AtomicMeasure, PLHomeo, detect_crossed, pingpong_certificate, translation_number,
                       verify_certificate, wreath_pair, wreath_separation)
from .dynamics.crossing import CrossWitness, PingPongCert
from .dynamics.pl import fmt
from .geometry import EquivariantFamily, GeometryParams, kn_plan


class ValidationError(Exception):
    pass


@dataclass
class CommandConfig:
    command: str
    geometry: GeometryParams | None = None
    seed: int = 0
    tol: float = 1e-12
    options: dict = field(default_factory=dict)


def parse_config(path: str) -> CommandConfig:
    """Read a JSON config; geometry keys as in GeometryParams, plus optional
    command, seed, tol and free-form options."""
    if not os.path.isfile(path):
        raise ValidationError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    data = dict(data)
    command = data.pop("command", "embed")
    seed = data.pop("seed", 0)
    options = data.pop("options", {})
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer")
    geometry = None
    if "variant" in data:
        try:
            geometry = GeometryParams.from_json(data)
        except (ValueError, TypeError) as exc:
            raise ValidationError(str(exc)) from exc
    elif data.keys() - {"tol"}:
        raise ValidationError(f"unknown keys {sorted(data.keys() - {'tol'})}")
    tol = geometry.tol if geometry else float(data.get("tol", 1e-12))
    if not tol > 0:
        raise ValidationError("tol must be positive")
    return CommandConfig(command, geometry, seed, tol, options)


# ---------------------------------------------------------------------------
# io helpers


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _read_text(path: str) -> str:
    if not os.path.isfile(path):
        raise ValidationError(f"file not found: {path}")
    with open(path) as fh:
        return fh.read()


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def growth_csv(tables) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "r", "count"])
    for t in tables:
        w.writerows(t.rows())
    return buf.getvalue()


def read_growth_csv(text: str) -> dict:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["level", "r", "count"]:
        raise ValueError("growth CSV must start with the header level,r,count")
    out: dict = {}
    for level, r, count in rows[1:]:
        out.setdefault(int(level), []).append((int(r), int(count)))
    return {lvl: tuple(c for _, c in sorted(v)) for lvl, v in out.items()}


def cert_from_json(data: dict) -> PingPongCert:
    q = lambda s: Fraction(s)
    w = data["witness"]
    witness = CrossWitness(q(w["u"]), q(w["v"]), w["fixer"], w["mover"], w["side"])
    return PingPongCert(
        data["m"], data["n"], data["fixer_sign"],
        PLHomeo([(q(x), q(y)) for x, y in data["F"]]), PLHomeo([(q(x), q(y)) for x, y in data["G"]]),
        tuple(map(q, data["X"])), tuple(map(q, data["FX"])), tuple(map(q, data["GX"])), witness)


def _levels(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = map(int, text.split("-"))
            levels = list(range(lo, hi + 1))
        else:
            levels = [int(text)]
    except ValueError as exc:
        raise ValidationError(f"bad level spec {text!r}") from exc
    if not levels or min(levels) < 1:
        raise ValidationError("levels must be positive")
    return levels


def _word(text: str, group: str = "H") -> gc.Word:
    try:
        return gc.Word.parse(text, group)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad rational {text!r}") from exc


def _load_map(path: str, line: bool = False) -> PLHomeo:
    try:
        f = PLHomeo.from_tsv(_read_text(path))
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc
    if line and not f.line:
        f = PLHomeo(f.knots, line=True)
    return f


# ---------------------------------------------------------------------------
# commands


def cmd_growth(args) -> int:
    tables = []
    for n in _levels(args.level):
        try:
            tables.append(gc.ball_sizes(args.group, n, args.radius, cap=args.cap, threads=args.threads))
        except gc.CapExceeded as exc:
            tables.append(exc.partial)
            _write(args.out, growth_csv(tables))
            print(f"cap reached: {exc}", file=sys.stderr)
            return 1
    _write(args.out, growth_csv(tables))
    if args.stabilized:
        stab = gc.stabilized_counts(tables)
        msg = "not stabilized" if stab is None else ",".join(map(str, stab))
        print(f"stabilized: {msg}", file=sys.stderr)
    return 0


def cmd_element(args) -> int:
    w = _word(args.word, args.group)
    if args.action == "eval":
        if args.prefix is not None:
            try:
                prefix = tuple(int(x) for x in args.prefix.split(",") if x.strip())
            except ValueError as exc:
                raise ValidationError("prefix must be comma-separated integers") from exc
            if len(prefix) > args.depth:
                raise ValidationError("prefix longer than depth")
            image = gc.act_prefix(gc.word_to_portrait(w, args.depth), prefix)
            _write(args.out, ",".join(map(str, image)) + "\n")
        else:
            _write(args.out, _dump_json(gc.word_to_portrait(w, args.depth).to_json()))
        return 0
    if args.action == "equal":
        if args.other is None:
            raise ValidationError("equal needs --other")
        _write(args.out, f"{str(gc.equal_at_level(w, _word(args.other, args.group), args.depth)).lower()}\n")
        return 0
    try:
        order = gc.order_at_level(w, args.depth, cap=args.cap)
    except gc.CapExceeded as exc:
        print(str(exc), file=sys.stderr)
        return 1
    _write(args.out, f"{order}\n")
    return 0


def _geometry_from_args(args, depth: int) -> GeometryParams:
    if args.config:
        cfg = parse_config(args.config)
        if cfg.geometry is None:
            raise ValidationError("config has no geometry")
        return cfg.geometry
    if args.k:
        try:
            return GeometryParams.navas([int(x) for x in args.k.split(",")], tol=args.tol)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    if args.ratio:
        return GeometryParams.affine(_rational(args.ratio), tol=args.tol)
    if not args.M > 0:
        raise ValidationError("M must be positive")
    return GeometryParams.navas(kn_plan(args.M, depth).k, tol=args.tol)


def _action_config(args) -> ActionConfig:
    geometry = _geometry_from_args(args, args.depth)
    try:
        return ActionConfig(EquivariantFamily(args.family), geometry, args.depth,
                            "rescale_to_unit" if args.normalize else "none")
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def cmd_embed(args) -> int:
    if args.action == "kn":
        if not args.M > 0 or args.n_max < 1:
            raise ValidationError("need M > 0 and --n-max >= 1")
        plan = kn_plan(args.M, args.n_max)
        _write(args.out, _dump_json({"M": plan.M, "k": list(plan.k), "report": plan.report}))
        return 0
    cfg = _action_config(args)
    if args.action in ("eval", "derive"):
        if args.x is None or args.word is None:
            raise ValidationError(f"{args.action} needs --word and --x")
        w = _word(args.word)
        fn = eval_action if args.action == "eval" else derivative_action
        try:
            val = fn(cfg, w, float(args.x))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        _write(args.out, f"{val!r}\n")
        return 0
    if args.action == "plot":
        rows = plot_rows(cfg, _word(args.word or "a"), args.resolution)
        _write(args.out, "x\tf\tdf\n" + "".join(f"{x!r}\t{y!r}\t{d!r}\n" for x, y, d in rows))
        return 0
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    if set(checks) - set(CHECKS):
        raise ValidationError(f"unknown checks {sorted(set(checks) - set(CHECKS))}")
    rep = verify_suite(cfg, checks, samples=args.samples, seed=args.seed, M=args.M)
    out = rep.to_json()
    out["geometry"] = cfg.geometry.to_json()
    _write(args.out, _dump_json(out))
    return 0 if all(rep.passed.values()) else 1


def cmd_dyn(args) -> int:
    if args.action == "wreath":
        x0, c = _rational(args.x0 or "1/2"), _rational(args.contraction)
        try:
            f, g = wreath_pair(x0, c)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        rep = wreath_separation(f, g, x0, args.max_len)
        if args.f:
            _write(args.f, f.to_tsv())
        if args.g:
            _write(args.g, g.to_tsv())
        _write(args.out, _dump_json({"max_len": rep.max_len, "words": rep.words, "pairs": rep.pairs,
                                     "failures": rep.failures, "test_point": fmt(rep.test_point), "m": rep.m}))
        return 0 if not rep.failures else 1
    if args.action == "tau":
        if not (args.measure and args.map and args.x0 is not None):
            raise ValidationError("tau needs --measure, --map and --x0")
        try:
            mu = AtomicMeasure.from_json(_read_text(args.measure))
        except (ValueError, json.JSONDecodeError) as exc:
            raise ValidationError(f"{args.measure}: {exc}") from exc
        g = _load_map(args.map, line=not args.interval)
        try:
            tau = translation_number(mu, g, _rational(args.x0))
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
        _write(args.out, f"{tau.numerator}\n" if tau.denominator == 1 else f"{fmt(tau)}\n")
        return 0
    if not (args.f and args.g):
        raise ValidationError(f"{args.action} needs --f and --g")
    f, g = _load_map(args.f), _load_map(args.g)
    w = detect_crossed(f, g)
    if args.action == "crossed":
        _write(args.out, _dump_json(None if w is None else w.to_json()))
        return 0
    if w is None:
        print("no crossed pair found", file=sys.stderr)
        return 1
    try:
        cert = pingpong_certificate(f, g, w, cap=args.cap)
    except gc.CapExceeded as exc:
        print(str(exc), file=sys.stderr)
        return 1
    out = cert.to_json()
    out["verified"] = verify_certificate(cert)
    _write(args.out, _dump_json(out))
    return 0


# ---------------------------------------------------------------------------
# parser


def _globals_parent(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="random seed (default 0)")
    p.add_argument("--tol", type=float, default=d(1e-12), help="numeric tolerance (default 1e-12)")
    p.add_argument("--threads", type=int, default=d(1), help="worker threads (default 1)")
    return p


def build_parser() -> argparse.ArgumentParser:
    sub_globals = _globals_parent(True)
    parser = argparse.ArgumentParser(prog="intgrowth", parents=[_globals_parent(False)],
                                     description="Automaton groups of intermediate growth and their interval actions.")
    cmds = parser.add_subparsers(dest="command", required=True)

    g = cmds.add_parser("growth", parents=[sub_globals], help="ball sizes in level quotients")
    g.add_argument("--group", choices=gc.GROUPS, default="H")
    g.add_argument("--level", required=True, help="level n or range lo-hi")
    g.add_argument("--radius", type=int, required=True)
    g.add_argument("--cap", type=int, default=None, help="element-count cap")
    g.add_argument("--stabilized", action="store_true", help="report whether the deepest two levels agree")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_growth)

    e = cmds.add_parser("element", parents=[sub_globals], help="portraits, equality, orders")
    e.add_argument("action", choices=["eval", "equal", "order"])
    e.add_argument("--word", required=True)
    e.add_argument("--other", help="second word for 'equal'")
    e.add_argument("--group", choices=gc.GROUPS, default="H")
    e.add_argument("--depth", type=int, required=True)
    e.add_argument("--prefix", help="comma-separated prefix to act on")
    e.add_argument("--cap", type=int, default=1 << 20)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_element)

    m = cmds.add_parser("embed", parents=[sub_globals], help="interval action of the level quotients")
    m.add_argument("action", choices=["eval", "derive", "verify", "kn", "plot"])
    m.add_argument("--config", help="geometry JSON")
    m.add_argument("--k", help="comma-separated k sequence (navas geometry)")
    m.add_argument("--ratio", help="affine geometry ratio p/q")
    m.add_argument("--M", type=float, default=1.0, help="σ-norm budget used to plan k (default 1)")
    m.add_argument("--n-max", dest="n_max", type=int, default=5)
    m.add_argument("--depth", type=int, default=2)
    m.add_argument("--family", choices=["yoccoz", "affine"], default="yoccoz")
    m.add_argument("--normalize", action="store_true", help="rescale the ambient interval to [0,1]")
    m.add_argument("--word")
    m.add_argument("--x")
    m.add_argument("--checks", default=",".join(CHECKS))
    m.add_argument("--samples", type=int, default=1000)
    m.add_argument("--resolution", type=int, default=200)
    m.add_argument("--out", default=None)
    m.set_defaults(func=cmd_embed)

    d = cmds.add_parser("dyn", parents=[sub_globals], help="PL dynamics toolbox")
    d.add_argument("action", choices=["crossed", "pingpong", "tau", "wreath"])
    d.add_argument("--f", help="PL map TSV")
    d.add_argument("--g", help="PL map TSV (or output path for 'wreath')")
    d.add_argument("--map", help="PL map TSV for 'tau'")
    d.add_argument("--interval", action="store_true", help="treat the 'tau' map as an interval map")
    d.add_argument("--measure", help="atomic measure JSON")
    d.add_argument("--x0")
    d.add_argument("--contraction", default="1/2")
    d.add_argument("--max-len", dest="max_len", type=int, default=6)
    d.add_argument("--cap", type=int, default=10_000)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_dyn)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    if not args.tol > 0:
        parser.error("--tol must be positive")
    for name in ("radius", "depth", "samples", "resolution", "max_len"):
        if getattr(args, name, 1) is not None and getattr(args, name, 1) < 0:
            parser.error(f"--{name.replace('_', '-')} must be non-negative")
    out = getattr(args, "out", None)
    if out and out != "-" and not os.path.isdir(os.path.dirname(os.path.abspath(out))):
        parser.error(f"output directory does not exist: {out}")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, gc.CapExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
