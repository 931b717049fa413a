"""Command-line interface: ``conesafe {simulate,profile,cone,demo,risk,tables}``.

Exit codes: 0 success (demo: accepted), 2 demo rejected, 1 error, 64 usage.
The default seed comes from ``CONESAFE_SEED`` when set; ``--seed`` overrides it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import formats, risk
from .demonstration import bind_profile_to_edge, run_demonstration
from .ensemble import DEFAULT_BOUND
from .errors import ConesafeError
from .inference import (StoppingRule, build_cone, check_complete, check_independent, edge,
                        edge_is_bijective)
from .model import Model, bundled_model_path, load_model
from .profile import StepPredicate, counting_norm, estimate_relative_profile, simulate_orbit

EXIT_OK, EXIT_ERROR, EXIT_REJECT, EXIT_USAGE = 0, 1, 2, 64
SEED_ENV = "CONESAFE_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a count >= 1, got {v}")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a count >= 0")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conesafe", description="Backward-inference safety demonstrations for actuated automata.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(sp, model=True, fmt=("text", "json")):
        if model:
            sp.add_argument("--model", required=True,
                            help="model document path, or the name of a bundled model (gate.model)")
            sp.add_argument("--bound", type=_positive, default=DEFAULT_BOUND,
                            help="enumeration bound (default %(default)s)")
        sp.add_argument("--seed", type=_seed, default=None, help=f"RNG seed (default ${SEED_ENV} or 0)")
        sp.add_argument("--format", choices=fmt, default=fmt[0])
        sp.add_argument("--output", help="write the report here instead of stdout")

    def cone_args(sp):
        sp.add_argument("--crux", required=True, help="crux name defined in the model")
        sp.add_argument("--depth", type=_positive, default=3, help="maximum predecessor depth")
        sp.add_argument("--entry", action="append", default=None,
                        help="entry locus ending a walk (repeatable; default from the crux spec)")

    sp = sub.add_parser("simulate", help="run an orbit under the model's usage pattern")
    common(sp)
    sp.add_argument("--steps", type=_positive, default=20)

    sp = sub.add_parser("profile", help="estimate a relative profile and counting norm")
    common(sp)
    sp.add_argument("--steps", type=_positive, default=100_000)
    sp.add_argument("--crux", help="use the edge of this crux's cone as reference set")
    sp.add_argument("--depth", type=_positive, default=3)
    sp.add_argument("--entry", action="append", default=None)
    sp.add_argument("--locus", action="append", default=None, help="reference loci (repeatable)")
    sp.add_argument("--where", help="frame predicate restricting the reference set")
    sp.add_argument("--window", type=_positive, default=None, help="diagnostic window (default steps/10)")
    sp.add_argument("--tol", type=float, default=0.01)

    sp = sub.add_parser("cone", help="build a cone and check its postconditions")
    common(sp)
    cone_args(sp)

    sp = sub.add_parser("demo", help="run a safety demonstration")
    common(sp)
    cone_args(sp)
    sp.add_argument("--samples", type=_positive, default=100, help="sample size N")
    sp.add_argument("--impl", help="implementation model replayed against the tests (default: the model)")
    sp.add_argument("--profile", choices=("orbit", "uniform"), default="orbit",
                    help="edge profile: estimated from an orbit, or uniform")
    sp.add_argument("--orbit-steps", type=_nonneg, default=100_000,
                    help="orbit length for the edge profile and norm (0: no norm)")

    sp = sub.add_parser("risk", help="compound Poisson risk and MIL-STD-882E assessment")
    common(sp, model=False)
    sp.add_argument("--lambda-per-hour", type=float, help="arrival rate per hour")
    sp.add_argument("--report", help="demonstration report JSON; its indemnification is the rate")
    sp.add_argument("--mu-loss", type=float, required=True, help="mean loss per arrival (currency units)")
    sp.add_argument("--iota", type=float, default=0.0, help="idle ratio")
    sp.add_argument("--hours", type=float, default=risk.HOURS_PER_YEAR,
                    help="horizon for expected loss and occurrence probability (default one year)")
    sp.add_argument("--category", type=int, choices=risk.CATEGORIES,
                    help="severity category (default: from --mu-loss as money)")
    sp.add_argument("--annual-probability", type=float, help="override the computed occurrence probability")
    sp.add_argument("--eliminated", action="store_true")

    sp = sub.add_parser("tables", help="reproduce the sampling and risk tables")
    common(sp, model=False, fmt=("text", "csv", "json"))
    sp.add_argument("--which", choices=sorted(risk.TABLES), default="power")
    return p


def _load(args) -> Model:
    path = Path(args.model)
    if not path.exists() and bundled_model_path(args.model).exists():
        path = bundled_model_path(args.model)
    return load_model(path, args.bound)


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _cone(model: Model, args):
    if args.crux not in model.cruxes:
        raise UsageError(f"unknown crux {args.crux!r}; defined: {sorted(model.cruxes)}")
    entry = model.cruxes[args.crux].entry if args.entry is None else frozenset(args.entry)
    unknown = sorted(entry - set(model.automaton.loci))
    if unknown:
        raise UsageError(f"--entry names unknown loci {unknown}")
    crux = model.crux_step(args.crux)
    return build_cone(model.automaton, crux, StoppingRule(args.depth, entry), args.bound)


def _pattern(model: Model, seed: int):
    if model.pattern is None:
        raise UsageError("the model has no usage pattern")
    return model.pattern.with_seed(seed)


def _start(model: Model):
    if model.start is None:
        raise UsageError("the model has no start step")
    return model.start


def cmd_simulate(args, seed: int) -> int:
    model = _load(args)
    w = simulate_orbit(model.automaton, _start(model), _pattern(model, seed), args.steps)
    if args.format == "json":
        d = formats.walk_to_dict(w)
        d["seed"] = seed
        _emit(args, formats.dumps(d))
        return EXIT_OK
    lines = [f"{'i':>6}  {'locus':<12} {'functionality':<14} abscissa -> ordinate"]
    for i, s in enumerate(w.steps, 1):
        lines.append(f"{i:>6}  {s.locus:<12} {s.functionality:<14} "
                     f"{json.dumps(s.abscissa.to_dict())} -> {json.dumps(s.ordinate.to_dict())}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_profile(args, seed: int) -> int:
    model = _load(args)
    a = model.automaton
    if args.crux:
        Z = StepPredicate(steps=frozenset(edge(_cone(model, args))), name=f"edge({args.crux})")
    elif args.locus or args.where:
        Z = StepPredicate(loci=args.locus, where=args.where, name="Z")
    else:
        raise UsageError("give --crux or --locus/--where to define the reference set")
    w = simulate_orbit(a, _start(model), _pattern(model, seed), args.steps)
    window = args.window or max(1, args.steps // 10)
    if args.steps < 2 * window:
        raise UsageError("--steps must cover two diagnostic windows")
    prof = estimate_relative_profile(w, Z, seed)
    norm = counting_norm(a, w, Z, window, args.tol)
    out = formats.profile_to_dict(prof)
    out["norm"] = {"value": norm.value, "window_delta": norm.window_delta,
                   "steps_used": norm.steps_used, "converged": norm.converged, "unit": "events/s"}
    if args.format == "json":
        _emit(args, formats.dumps(out))
        return EXIT_OK
    lines = [f"reference {Z.name}: {prof.total_matches} arrivals in {prof.walk_length} steps (seed {seed})",
             f"counting norm {norm.value:.6g} events/s, window delta {norm.window_delta:.3g}"
             f"{'' if norm.converged else ' (not converged)'}",
             f"{'probability':>12} {'count':>8}  step"]
    for s in prof.support:
        lines.append(f"{prof.probability[s]:>12.6f} {prof.counts[s]:>8}  {s.locus} "
                     f"{json.dumps(s.abscissa.to_dict())}")
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_cone(args, seed: int) -> int:
    model = _load(args)
    cone = _cone(model, args)
    a = model.automaton
    verdict = {
        "complete": bool(check_complete(a, cone.walks, args.bound)),
        "independent": check_independent(cone.walks),
        "acyclic": cone.acyclic,
        "edge_bijective": edge_is_bijective(cone),
        "walks": len(cone.walks),
        "edge_size": len(edge(cone)),
    }
    if args.format == "json":
        d = formats.cone_to_dict(cone)
        d["verdicts"] = verdict
        _emit(args, formats.dumps(d))
    else:
        lines = [f"{k:<16}{v}" for k, v in verdict.items()]
        for i, w in enumerate(cone.walks):
            lines.append(f"walk {i:>4}: " + " <- ".join(w.path()))
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_demo(args, seed: int) -> int:
    model = _load(args)
    a = model.automaton
    cone = _cone(model, args)
    impl = None
    if args.impl:
        ipath = Path(args.impl)
        if not ipath.exists() and bundled_model_path(args.impl).exists():
            ipath = bundled_model_path(args.impl)
        impl = load_model(ipath, args.bound).automaton
    profile = norm = None
    if args.orbit_steps:
        w = simulate_orbit(a, _start(model), _pattern(model, seed), args.orbit_steps)
        Z = StepPredicate(steps=frozenset(edge(cone)), name=f"edge({args.crux})")
        norm = counting_norm(a, w, Z, max(1, args.orbit_steps // 10)).value
        if args.profile == "orbit":
            profile = estimate_relative_profile(w, Z, seed)
    elif args.profile == "orbit":
        raise UsageError("--profile orbit needs --orbit-steps > 0")
    sampler = bind_profile_to_edge(cone, profile)
    report = run_demonstration(a, cone, sampler, model.constraints, args.samples, seed, impl, norm)
    _emit(args, report.to_json() if args.format == "json" else report.to_text())
    return EXIT_OK if report.accepted else EXIT_REJECT


def cmd_risk(args, seed: int) -> int:
    if (args.lambda_per_hour is None) == (args.report is None):
        raise UsageError("give exactly one of --lambda-per-hour and --report")
    if args.report:
        rep = json.loads(Path(args.report).read_text(encoding="utf-8"))
        lam = rep.get("indemnification_per_hour")
        if lam is None:
            raise UsageError("report carries no indemnification (demonstration failed or no norm)")
    else:
        lam = args.lambda_per_hour
    model = risk.CompoundPoissonModel(lam, args.mu_loss, args.iota)
    h = risk.statistical_risk(model)
    p = risk.annual_probability(model, args.hours) if args.annual_probability is None else args.annual_probability
    level = risk.classify_level(p, args.eliminated)
    category = args.category or risk.classify_severity(args.mu_loss)
    a = risk.MilStdAssessment.of(level, category)
    out = {
        "lambda_per_hour": lam, "mu_loss": args.mu_loss, "iota": args.iota,
        "statistical_risk_per_hour": h,
        "horizon_hours": args.hours,
        "expected_loss": risk.cpp_expectation(model, args.hours),
        "occurrence_probability": p,
        "probability_level": level, "level_name": risk.LEVEL_NAMES[level],
        "severity_category": category, "category_name": risk.CATEGORY_NAMES[category],
        "risk": a.risk_value,
    }
    if args.format == "json":
        _emit(args, formats.dumps(out))
    else:
        _emit(args, "".join(f"{k:<28}{v}\n" for k, v in out.items()))
    return EXIT_OK


def cmd_tables(args, seed: int) -> int:
    _emit(args, risk.render_table(args.which, args.format))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "profile": cmd_profile, "cone": cmd_cone,
            "demo": cmd_demo, "risk": cmd_risk, "tables": cmd_tables}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        return COMMANDS[args.command](args, seed)
    except UsageError as exc:
        print(f"conesafe: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConesafeError, OSError, json.JSONDecodeError) as exc:
        print(f"conesafe: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
