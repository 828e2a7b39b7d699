"""Command-line interface: experiment orchestration and the verify suite.

Subcommands: entropy | condent | excellent | square | pairs | verify.
Exit status: 0 all assertions pass, 1 an assertion failed, 2 configuration
error.  Reports are deterministic for a fixed seed; wall-clock timing is
omitted from serialized output unless requested, so identical seeds produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import entropy as entropy_mod
from .entropy import (
    CoordinateSet,
    block_indicator_partition,
    cond_entropy,
    fine_partition,
    partition_from_spec,
    pinsker_residual,
    process_entropy,
)
from .excellent import SearchExhausted, SpacingSchedule, choose_spacings
from .markov import MarkovMeasure, MarkovMeasureError, measure_from_spec, measure_preset
from .pairs import (
    Inconclusive,
    classify_pair,
    coupling_law_experiment,
    delta_sup,
    find_separated_pair,
    stable_class_count,
)
from .shiftspace import Cylinder, ShiftSpaceError, system_from_spec
from .square import (
    ConditionalSquare,
    PinskerModel,
    conditional_atom_masses,
    convergence_profile,
    diagonal_mass,
    lambda_rect,
    nu_rect,
    sample_coupling,
)
from .verify import DEFAULT_SEED, CriterionResult, run_criteria

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    measure: MarkovMeasure
    seed: int
    params: dict = field(default_factory=dict)
    fmt: str = "json"
    out: str | None = None
    timing: bool = False


@dataclass
class Report:
    inputs: dict
    results: list = field(default_factory=list)
    wall_clock_seconds: float | None = None

    def add(self, name: str, value, kind: str, passed: bool | None = None, **extra) -> None:
        rec = {"name": name, "value": value, "provenance": kind}
        if passed is not None:
            rec["passed"] = bool(passed)
        rec.update(extra)
        self.results.append(rec)

    @property
    def all_passed(self) -> bool:
        return all(r.get("passed", True) for r in self.results)

    def as_dict(self, timing: bool = False) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "inputs": self.inputs,
            "results": self.results,
            "passed": self.all_passed,
        }
        if timing:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        return out


def _fmt_float(x) -> object:
    if isinstance(x, float):
        return float("%.15g" % x)
    if isinstance(x, (list, tuple)):
        return [_fmt_float(v) for v in x]
    if isinstance(x, dict):
        return {k: _fmt_float(v) for k, v in x.items()}
    return x


def emit_report(report: Report, fmt: str = "json", path: str | None = None,
                timing: bool = False) -> str:
    """Serialize a report with stable key order and 15 significant digits."""
    payload = _fmt_float(report.as_dict(timing=timing))
    if fmt == "json":
        text = json.dumps(payload, indent=2, sort_keys=False) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value", "provenance", "passed"])
        for rec in payload["results"]:
            writer.writerow([rec["name"], rec.get("value"), rec.get("provenance"),
                             rec.get("passed", "")])
        text = buf.getvalue()
    else:
        raise ConfigError("unknown format %r" % fmt)
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _load_json_arg(raw: str) -> dict:
    """Accept an inline JSON object or a path to a JSON file."""
    raw = raw.strip()
    if raw.startswith("{"):
        try:
            return json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ConfigError("bad inline JSON: %s" % exc) from None
    if not os.path.exists(raw):
        raise ConfigError("no such file: %s" % raw)
    with open(raw) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("bad JSON in %s: %s" % (raw, exc)) from None


def parse_config(args: argparse.Namespace) -> ExperimentConfig:
    """Resolve measure, seed, and output options from parsed flags."""
    spec = _load_json_arg(args.measure) if args.measure else {"preset": "two-state-lazy"}
    system = None
    if getattr(args, "system", None):
        system = system_from_spec(_load_json_arg(args.system))
    try:
        measure = measure_from_spec(spec, system=system)
    except (MarkovMeasureError, ShiftSpaceError) as exc:
        raise ConfigError(str(exc)) from None
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("SFTLAB_SEED", DEFAULT_SEED))
    return ExperimentConfig(
        measure=measure,
        seed=int(seed),
        fmt=getattr(args, "format", "json"),
        out=getattr(args, "out", None),
        timing=bool(getattr(args, "timing", False)),
    )


def _parse_cylinder(raw: str) -> Cylinder:
    """Cylinder syntax: WORD@START, e.g. 01@-2."""
    try:
        word, start = raw.split("@")
        return Cylinder(int(start), tuple(int(ch) for ch in word))
    except (ValueError, ShiftSpaceError) as exc:
        raise ConfigError("bad cylinder %r (want WORD@START): %s" % (raw, exc)) from None


def _parse_coordinate_set(raw: str) -> CoordinateSet:
    spec = _load_json_arg(raw)
    return CoordinateSet(
        points=tuple(spec.get("points", ())),
        left_ray=spec.get("left_ray"),
        right_ray=spec.get("right_ray"),
    )


def _inputs_echo(cfg: ExperimentConfig, **extra) -> dict:
    echo = {
        "transition": [list(map(float, row)) for row in cfg.measure.transition],
        "seed": cfg.seed,
    }
    echo.update(extra)
    return echo


# --- subcommands -----------------------------------------------------------


def _cmd_entropy(args) -> int:
    cfg = parse_config(args)
    m = cfg.measure
    report = Report(inputs=_inputs_echo(cfg))
    report.add("entropy_rate_nats", m.entropy_rate(), "exact")
    info = m.spectral_info()
    report.add("period", info.period, "exact")
    report.add("second_modulus", info.second_modulus, "exact")
    report.add("stationary", list(map(float, m.stationary)), "exact")
    print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
    return EXIT_OK


def _cmd_condent(args) -> int:
    cfg = parse_config(args)
    m = cfg.measure
    part = partition_from_spec(m.system, _load_json_arg(args.partition))
    report = Report(inputs=_inputs_echo(cfg, partition=args.partition))
    if args.coords:
        S = _parse_coordinate_set(args.coords)
        bracket = cond_entropy(part, S, m, depth=args.depth)
        report.add("cond_entropy", [bracket.lower, bracket.upper],
                   "exact" if bracket.exact else "bracketed", width=bracket.width)
    bracket = process_entropy(part, m, depth=args.depth)
    report.add("process_entropy", [bracket.lower, bracket.upper],
               "exact" if bracket.exact else "bracketed", width=bracket.width)
    report.add("partition_entropy", entropy_mod.entropy(part, m), "exact")
    print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
    return EXIT_OK


def _cmd_excellent(args) -> int:
    cfg = parse_config(args)
    m = cfg.measure
    if args.family == "indicator":
        seq = [block_indicator_partition(m.system, (0, n + 1), (1, 1))
               for n in range(args.levels)]
    elif args.family == "fine":
        seq = [fine_partition(m.system, (0, n)) for n in range(args.levels)]
    else:
        raise ConfigError("unknown family %r" % args.family)
    schedule = SpacingSchedule.geometric(args.levels, base=args.eps_base,
                                         first=args.eps_base, k_max=args.k_max)
    report = Report(inputs=_inputs_echo(cfg, levels=args.levels, family=args.family,
                                        eps_base=args.eps_base, k_max=args.k_max))
    try:
        result = choose_spacings(seq, schedule, m)
    except SearchExhausted as exc:
        report.add("search", str(exc), "bracketed", passed=False)
        print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
        return EXIT_ASSERTION
    for rec in result.levels:
        report.add("level_%d" % rec.level,
                   {"spacing": rec.spacing, "defect": [rec.defect.lower, rec.defect.upper],
                    "epsilon": rec.epsilon, "defect_bound": rec.defect_bound},
                   "exact" if rec.defect.exact else "bracketed",
                   passed=rec.defect.upper < rec.epsilon)
    report.add("spacings", result.spacings, "exact")
    print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
    return EXIT_OK if report.all_passed else EXIT_ASSERTION


def _cmd_square(args) -> int:
    cfg = parse_config(args)
    m = cfg.measure
    sq = ConditionalSquare(m, args.n)
    pm = PinskerModel.identify(m)
    report = Report(inputs=_inputs_echo(cfg, n=args.n))
    if args.rect:
        A = _parse_cylinder(args.rect[0])
        B = _parse_cylinder(args.rect[1])
        report.add("nu_rect", nu_rect(sq, A, B), "exact")
        report.add("lambda_rect", lambda_rect(pm, m, A, B), "exact")
        if args.profile:
            prof = convergence_profile(m, A, B, args.profile)
            report.add("profile", prof, "exact",
                       envelope=m.spectral_info().second_modulus)
    if args.diag:
        report.add("diagonal_mass", [diagonal_mass(sq, L) for L in range(1, args.diag + 1)],
                   "exact")
    if args.future:
        word = tuple(int(ch) for ch in args.future)
        masses = conditional_atom_masses(word, args.diag or 4, m)
        report.add("max_atom_mass", max(p for _, p in masses), "exact",
                   atoms=len(masses))
    if args.samples:
        hits = 0
        for i in range(args.samples):
            s = sample_coupling(sq, cfg.seed + i, horizon=args.horizon)
            if args.rect:
                A = _parse_cylinder(args.rect[0])
                B = _parse_cylinder(args.rect[1])
                wa = s.x.word_at(A.start, A.end)
                wb = s.y.word_at(B.start, B.end)
                hits += int(wa == A.word and wb == B.word)
        if args.rect:
            report.add("empirical_rect", hits / args.samples, "sampled",
                       samples=args.samples, seed_base=cfg.seed)
    print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
    return EXIT_OK


def _cmd_pairs(args) -> int:
    cfg = parse_config(args)
    m = cfg.measure
    pm = PinskerModel.identify(m)
    report = Report(inputs=_inputs_echo(cfg, action=args.action))
    if args.action == "delta":
        rep = delta_sup(pm, m)
        report.add("delta", rep.delta, "exact",
                   witness=None if rep.witness is None else
                   ["%s@%d" % ("".join(map(str, rep.witness[0].word)), rep.witness[0].start),
                    "%s@%d" % ("".join(map(str, rep.witness[1].word)), rep.witness[1].start)],
                   witness_mass=rep.witness_mass)
    elif args.action == "branching":
        counts = [stable_class_count((0,), d, m) for d in range(1, args.depth + 1)]
        report.add("stable_class_counts", counts, "exact")
    elif args.action == "separate":
        Q = partition_from_spec(m.system, _load_json_arg(args.partition))
        try:
            pair = find_separated_pair(Q, m)
        except Inconclusive as exc:
            report.add("separated_pair", str(exc), "bracketed", passed=False)
            print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
            return EXIT_ASSERTION
        if pair is None:
            report.add("separated_pair", None, "exact")
        else:
            x, y = pair
            verdict = classify_pair(x, y, horizon=args.horizon)
            report.add("separated_pair",
                       {"x_window": "".join(map(str, x.word_at(-4, 8))),
                        "y_window": "".join(map(str, y.word_at(-4, 8))),
                        "labels": sorted(verdict.labels)},
                       "exact")
    elif args.action == "sample":
        rep = coupling_law_experiment(m, samples=args.samples, seed=cfg.seed,
                                      approach_horizon=args.horizon)
        report.add("forward_certificate_fraction", rep.forward_certificate_fraction,
                   "sampled", samples=args.samples)
        report.add("backward_separation_fraction", rep.backward_separation_fraction,
                   "sampled", horizon=rep.separation_horizon)
        report.add("backward_approach_fraction", rep.backward_approach_fraction,
                   "sampled", horizon=rep.approach_horizon,
                   threshold=rep.approach_threshold)
    else:
        raise ConfigError("unknown pairs action %r" % args.action)
    print(emit_report(report, cfg.fmt, cfg.out, cfg.timing), end="")
    return EXIT_OK


def _cmd_verify(args) -> int:
    t0 = time.perf_counter()
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("SFTLAB_SEED", DEFAULT_SEED))
    results = run_criteria(seed=int(seed), only=args.only)
    if not results:
        print("no criteria match --only %r" % args.only, file=sys.stderr)
        return EXIT_CONFIG
    report = Report(inputs={"seed": int(seed), "only": args.only})
    for res in results:
        line = "criterion %2d [%s] %s: %s" % (
            res.cid, res.group, res.title, "PASS" if res.passed else "FAIL")
        print(line, file=sys.stderr)
        for a in res.assertions:
            report.add("c%02d: %s" % (res.cid, a.name), a.observed, a.kind,
                       passed=a.passed, bound=a.bound, detail=a.detail)
    report.wall_clock_seconds = time.perf_counter() - t0
    text = emit_report(report, args.format, args.out, timing=args.timing)
    if args.out:
        print("report written to %s" % args.out, file=sys.stderr)
    else:
        print(text, end="")
    return EXIT_OK if report.all_passed else EXIT_ASSERTION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sftlab",
        description="entropy, conditional squares, and pair experiments for "
                    "Markov measures on subshifts of finite type",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--measure", help="measure spec JSON (inline or path); "
                       "default preset two-state-lazy")
        p.add_argument("--system", help="system spec JSON (inline or path)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write the report to this path")
        p.add_argument("--timing", action="store_true",
                       help="include wall-clock time in the report")

    p = sub.add_parser("entropy", help="entropy rate and spectral data")
    common(p)
    p.set_defaults(fn=_cmd_entropy)

    p = sub.add_parser("condent", help="conditional and process entropies")
    common(p)
    p.add_argument("--partition", required=True, help="partition spec JSON")
    p.add_argument("--coords", help="coordinate set JSON")
    p.add_argument("--depth", type=int, default=12)
    p.set_defaults(fn=_cmd_condent)

    p = sub.add_parser("excellent", help="inductive spacing search")
    common(p)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--eps-base", type=float, default=0.5)
    p.add_argument("--k-max", type=int, default=64)
    p.add_argument("--family", choices=("indicator", "fine"), default="indicator")
    p.set_defaults(fn=_cmd_excellent)

    p = sub.add_parser("square", help="conditional square computations")
    common(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--rect", nargs=2, metavar="CYL", help="two cylinders WORD@START")
    p.add_argument("--profile", type=int, default=0)
    p.add_argument("--diag", type=int, default=0)
    p.add_argument("--future", help="future word for atom masses")
    p.add_argument("--samples", type=int, default=0)
    p.add_argument("--horizon", type=int, default=32)
    p.set_defaults(fn=_cmd_square)

    p = sub.add_parser("pairs", help="pair classification and experiments")
    common(p)
    p.add_argument("action", choices=("delta", "branching", "separate", "sample"))
    p.add_argument("--partition", help="partition spec JSON (separate)")
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=1000)
    p.set_defaults(fn=_cmd_pairs)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--only", help="filter by group or criterion id")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(fn=_cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, MarkovMeasureError, ShiftSpaceError,
            entropy_mod.EntropyEngineError) as exc:
        print("configuration error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
