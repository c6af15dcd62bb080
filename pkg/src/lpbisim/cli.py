"""Command line front end.

Exit codes: 0 success or property holds, 1 property fails or certificate
invalid, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import bisim, core, lpmetric, metricfix
from .core import LMP, ModelError, ParseError, Relation, ValidationError, to_fraction

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class CommandConfig:
    subcommand: str
    inputs: list[str] = field(default_factory=list)
    tolerance: Fraction = metricfix.DEFAULT_TOL
    iterations: int = 100
    output: str = "json"

    def __post_init__(self):
        if self.tolerance <= 0:
            raise UsageError("tolerance must be positive")
        if self.iterations < 1:
            raise UsageError("iteration cap must be at least 1")


def _fraction_arg(text: str, name: str, lo=None, hi=None) -> Fraction:
    try:
        q = to_fraction(text)
    except ParseError:
        raise UsageError(f"{name} must be an exact rational like 3/10 or 0.3, got {text!r}") from None
    if lo is not None and q < lo or hi is not None and q > hi:
        raise UsageError(f"{name} = {q} outside [{lo}, {hi}]")
    return q


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_model(path: str) -> LMP:
    return core.parse_lmp(_read(path))


def _state(m: LMP, name: str) -> int:
    try:
        return m.state_index(name)
    except ModelError as exc:
        raise UsageError(str(exc)) from None


def _pair_arg(m: LMP, text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--pair expects s,t, got {text!r}")
    return _state(m, parts[0].strip()), _state(m, parts[1].strip())


def _approx(q: Fraction) -> str:
    return f"{q} (≈ {float(q):.6g})"


def _emit(text: str) -> None:
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _named_pairs(m: LMP, rel: Relation) -> list[list[str]]:
    return sorted([m.states[s], m.states[t]] for s, t in rel.pairs)


def _relation_from_names(m: LMP, pairs) -> Relation:
    if not isinstance(pairs, list) or not all(isinstance(p, list) and len(p) == 2 for p in pairs):
        raise UsageError("relation must be a list of [s, t] pairs")
    return Relation((_state(m, s), _state(m, t)) for s, t in pairs)


# -- subcommands -------------------------------------------------------------

def cmd_validate(args) -> int:
    try:
        m = _load_model(args.model)
    except ValidationError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(f"ok: {m.n_states} states, {m.n_actions} actions, {len(m.transitions)} transitions")
    return EXIT_OK


def cmd_bisim(args) -> int:
    m = _load_model(args.model)
    eps = _fraction_arg(args.epsilon, "--epsilon", 0, 1)
    if args.simulation:
        rel = bisim.greatest_eps_simulation(m, eps)
    else:
        rel = bisim.greatest_eps_bisimulation(m, eps)
    pairs = _named_pairs(m, rel)
    if args.format == "json":
        _emit(json.dumps({"epsilon": str(eps), "kind": "simulation" if args.simulation else "bisimulation",
                          "relation": pairs}, indent=2))
    else:
        _emit("\n".join(f"{s},{t}" if args.format == "csv" else f"{s} {t}" for s, t in pairs))
    return EXIT_OK


def cmd_dstar(args) -> int:
    m = _load_model(args.model)
    tol = _fraction_arg(args.tol, "--tol")
    CommandConfig("dstar", [args.model], tol, output=args.format)
    if args.pair:
        s, t = _pair_arg(m, args.pair)
        br = metricfix.dstar_pair(m, s, t, tol)
        if args.format == "human":
            _emit(f"d*({m.states[s]},{m.states[t]}) in [{_approx(br.lower)}, {_approx(br.upper)}]")
        elif args.format == "csv":
            _emit(f"s,t,lower,upper\n{m.states[s]},{m.states[t]},{br.lower},{br.upper}")
        else:
            _emit(json.dumps({"pair": [m.states[s], m.states[t]], "tol": str(tol),
                              "lower": str(br.lower), "upper": str(br.upper)}, indent=2))
        return EXIT_OK
    brackets = metricfix.dstar_brackets(m, tol)
    rows = sorted(sorted((m.states[i], m.states[j])) + [br.lower, br.upper] for (i, j), br in brackets.items())
    if args.format == "human":
        _emit("\n".join(f"{s} {t} [{_approx(lo)}, {_approx(hi)}]" for s, t, lo, hi in rows))
    elif args.format == "csv":
        _emit("\n".join(["s,t,lower,upper"] + [f"{s},{t},{lo},{hi}" for s, t, lo, hi in rows]))
    else:
        _emit(json.dumps({"states": sorted(m.states), "tol": str(tol),
                          "entries": [[s, t, str(lo), str(hi)] for s, t, lo, hi in rows]}, indent=2))
    return EXIT_OK


def cmd_lpdist(args) -> int:
    d = core.parse_metric(_read(args.metric))
    try:
        mu = core.parse_distribution(_read(args.mu), d.names)
        nu = core.parse_distribution(_read(args.nu), d.names)
    except ValidationError as exc:
        raise UsageError(str(exc)) from None
    value = lpmetric.lp_distance(mu, nu, d)
    _emit(_approx(value) if args.format == "human" else str(value))
    return EXIT_OK


def _certificate(m: LMP, rel: Relation, eps: Fraction, couplings) -> dict:
    return {
        "epsilon": str(eps),
        "relation": _named_pairs(m, rel),
        "couplings": [
            {"pair": [m.states[s], m.states[t]], "action": m.actions[a],
             "beta": sorted([m.states[x], m.states[y], str(w)] for (x, y), w in beta.weights.items())}
            for (s, t, a), beta in couplings
        ],
    }


def cmd_coupling(args) -> int:
    m = _load_model(args.model)
    eps = _fraction_arg(args.epsilon, "--epsilon", 0, 1)
    s, t = _pair_arg(m, args.pair)
    actions = [m.action_index(args.action)] if args.action else list(range(m.n_actions))
    if args.relation:
        doc = core.load_json(_read(args.relation))
        rel = _relation_from_names(m, doc.get("relation") if isinstance(doc, dict) else doc)
    else:
        rel = bisim.greatest_eps_bisimulation(m, eps)
    if (s, t) not in rel:
        print(f"no coupling: ({m.states[s]},{m.states[t]}) is not in the relation at epsilon {eps}",
              file=sys.stderr)
        return EXIT_FAIL
    found = []
    for a in actions:
        mu, nu = m.tau(s, a), m.tau(t, a)
        beta = bisim.find_eps_coupling(mu, nu, rel, eps)
        if beta is None:
            print(f"no coupling for pair ({m.states[s]},{m.states[t]}) action {m.actions[a]}: "
                  f"best coupled mass {bisim.max_coupled_mass(mu, nu, rel)} < {mu.mass} - {eps}",
                  file=sys.stderr)
            return EXIT_FAIL
        found.append(((s, t, a), beta))
    _emit(json.dumps(_certificate(m, rel, eps, found), indent=2))
    return EXIT_OK


def _parse_certificate(m: LMP, raw: bytes):
    doc = core.load_json(raw)
    if not isinstance(doc, dict) or "epsilon" not in doc:
        raise UsageError("certificate must be an object with 'epsilon', 'relation' and 'couplings'")
    eps = _fraction_arg(str(doc["epsilon"]), "epsilon", 0, 1)
    rel = _relation_from_names(m, doc.get("relation", []))
    couplings = []
    for k, entry in enumerate(doc.get("couplings", [])):
        try:
            s, t = (_state(m, x) for x in entry["pair"])
            a = m.action_index(entry["action"])
            weights = {}
            for x, y, w in entry["beta"]:
                key = (_state(m, x), _state(m, y))
                weights[key] = weights.get(key, Fraction(0)) + to_fraction(w)
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"coupling #{k} is malformed: {exc}") from None
        couplings.append(((s, t, a), bisim.EpsCoupling(rel, weights, eps)))
    return eps, rel, couplings


def cmd_verify(args) -> int:
    m = _load_model(args.model)
    eps, rel, couplings = _parse_certificate(m, _read(args.certificate))
    for (s, t, a), beta in couplings:
        label = f"pair ({m.states[s]},{m.states[t]}) action {m.actions[a]}"
        if (s, t) not in rel:
            print(f"FAIL {label}: pair is not in the certified relation", file=sys.stderr)
            return EXIT_FAIL
        problems = bisim.coupling_violations(beta, m.tau(s, a), m.tau(t, a))
        if problems:
            print(f"FAIL {label}: {problems[0]}", file=sys.stderr)
            return EXIT_FAIL
    kind = "bisimulation" if rel.is_symmetric() else "simulation"
    failing = bisim.first_failing_pair(m, rel, eps)
    if failing is not None:
        s, t, a = failing
        print(f"FAIL relation is not an eps-{kind}: pair ({m.states[s]},{m.states[t]}) "
              f"action {m.actions[a]} violates the transfer condition at epsilon {eps}", file=sys.stderr)
        return EXIT_FAIL
    _emit(f"ok: {len(couplings)} couplings verified; relation is a {eps}-{kind}")
    return EXIT_OK


def cmd_compare(args) -> int:
    m = _load_model(args.model)
    tol = _fraction_arg(args.tol, "--tol")
    cfg = CommandConfig("compare", [args.model], tol, args.iters, args.format)
    rows = metricfix.compare_table(m, cfg.tolerance, cfg.iterations)
    lines = ["s,t,dstar_lower,dstar_upper,dk_iterate"]
    for r in rows:
        if args.format == "human":
            lines.append(f"{r.s},{r.t},{_approx(r.dstar.lower)},{_approx(r.dstar.upper)},{_approx(r.dk_iterate)}")
        else:
            lines.append(f"{r.s},{r.t},{r.dstar.lower},{r.dstar.upper},{r.dk_iterate}")
    _emit("\n".join(lines))
    return EXIT_OK


def cmd_fixpoint(args) -> int:
    m = _load_model(args.model)
    tol = _fraction_arg(args.tol, "--tol")
    cfg = CommandConfig("fixpoint", [args.model], tol, args.iters, args.format)
    if args.init == "bisim":
        d0 = metricfix.bisim_distance_metric(m)
    else:
        d0 = core.PseudoMetric.zero(m.n_states, m.states)
    run = metricfix.iterate_delta_lp if args.functional == "lp" else metricfix.iterate_delta_k
    report = run(m, d0, cfg.iterations, cfg.tolerance)
    d = report.metric
    doc = {
        "functional": args.functional,
        "init": args.init,
        "iterations": report.iterations,
        "residual": str(report.residual),
        "converged": report.converged,
        "metric": {"states": list(m.states),
                   "entries": [[m.states[i], m.states[j], str(d(i, j))]
                               for i in range(m.n_states) for j in range(i + 1, m.n_states)]},
    }
    _emit(json.dumps(doc, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpbisim", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("json", "csv", "human"), default="json")
    parser.add_argument("--threads", type=int, default=1,
                        help="parallelism hint; accepted for compatibility, work runs on one thread")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bisim", help="greatest eps-bisimulation (or simulation)")
    p.add_argument("model")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--simulation", action="store_true")
    p.set_defaults(func=cmd_bisim)

    p = sub.add_parser("dstar", help="eps-distance brackets")
    p.add_argument("model")
    p.add_argument("--tol", default=str(metricfix.DEFAULT_TOL))
    p.add_argument("--pair")
    p.set_defaults(func=cmd_dstar)

    p = sub.add_parser("lpdist", help="exact LP distance between two distributions")
    p.add_argument("mu")
    p.add_argument("nu")
    p.add_argument("metric")
    p.set_defaults(func=cmd_lpdist)

    p = sub.add_parser("coupling", help="emit an eps-coupling certificate")
    p.add_argument("model")
    p.add_argument("--pair", required=True)
    p.add_argument("--action")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--relation")
    p.set_defaults(func=cmd_coupling)

    p = sub.add_parser("verify", help="check a coupling certificate")
    p.add_argument("model")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compare", help="eps-distance vs Kantorovich iterate, as CSV")
    p.add_argument("model")
    p.add_argument("--tol", default=str(metricfix.DEFAULT_TOL))
    p.add_argument("--iters", type=int, default=100)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fixpoint", help="iterate the LP or Kantorovich functional")
    p.add_argument("model")
    p.add_argument("--functional", choices=("lp", "k"), default="lp")
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--tol", default=str(metricfix.DEFAULT_TOL))
    p.add_argument("--init", choices=("zero", "bisim"), default="zero")
    p.set_defaults(func=cmd_fixpoint)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        if args.command == "validate":
            print(f"invalid: {exc}", file=sys.stderr)
            return EXIT_FAIL
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
