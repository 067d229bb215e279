"""Command-line front end: scenario runner, filter runner, adder census,
gate inspector, polynotope dumps.

Exit codes: 0 success, 1 malformed configuration or flags, 2 numeric abort
(set propagation became non-finite; the failing step index goes to stderr).
CSV output uses 17-significant-digit floats, '.' decimals and a trailing
newline, so byte-identical reruns certify determinism.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources

import numpy as np

from . import polynotope as pn
from .errors import BlowUpError, ConfigError, PolymixError
from .logic import GateKind, adder, adder_census, gate, verify_adder
from .reach import (
    FilterScenario,
    Scenario,
    mc_check,
    mc_check_filter,
    run,
    run_filter,
    scenario_from_config,
)
from .symbols import SymbolType

_BUNDLED = {"vdp", "traffic", "lotka_reach", "lotka_filter"}
_FLAVORS = {"signed": SymbolType.SIGNED, "boolean": SymbolType.BOOLEAN}


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def load_config(path: str) -> dict:
    """Read a JSON config from a path, or a bundled scenario by name."""
    if path in _BUNDLED:
        text = resources.files("polymix.configs").joinpath(f"{path}.json") \
            .read_text()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path!r}: {e}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {path!r}: {e}") from None


def write_reach_csv(trace, path: str) -> None:
    dim = trace.scenario.dim
    header = ["k"]
    for i in range(dim):
        header += [f"x{i + 1}_lo", f"x{i + 1}_hi"]
    header += ["monomial_count", "max_degree"]
    lines = [",".join(header)]
    for rec in trace.records:
        row = [str(rec.k)]
        for i in range(dim):
            row += [_fmt(rec.lo[i]), _fmt(rec.hi[i])]
        row += [str(rec.monomial_count), str(rec.max_degree)]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_filter_csv(trace, path: str) -> None:
    dim = len(trace.scenario.init)
    header = ["k"] + [f"x{i + 1}_c" for i in range(dim)]
    for i in range(dim):
        header += [f"x{i + 1}_lo", f"x{i + 1}_hi"]
    header += ["trace_cov", "monomial_count", "max_degree"]
    lines = [",".join(header)]
    for rec in trace.records:
        row = [str(rec.k)] + [_fmt(v) for v in rec.center]
        for i in range(dim):
            row += [_fmt(rec.lo[i]), _fmt(rec.hi[i])]
        row += [_fmt(rec.cov_trace), str(rec.monomial_count),
                str(rec.max_degree)]
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def polynomial_str(p: pn.Polynotope, names: dict) -> str:
    """Human-readable polynomial, e.g. '-0.5 + 0.5*a + 0.5*a*b'."""
    parts = []
    if p.dim != 1:
        raise ConfigError("can only render scalar polynomials")
    if p.c[0] != 0.0 or p.gen_count == 0:
        parts.append(_short(p.c[0]))
    for j in range(p.gen_count):
        factors = []
        for r, e in zip(p.I, p.E[:, j]):
            if e:
                name = names.get(int(r), f"s{int(r)}")
                factors.append(name if e == 1 else f"{name}^{int(e)}")
        coeff = p.R[0, j]
        term = "*".join(factors)
        if coeff == 1.0:
            parts.append(term)
        elif coeff == -1.0:
            parts.append(f"-{term}")
        else:
            parts.append(f"{_short(coeff)}*{term}")
    out = " + ".join(parts)
    return out.replace("+ -", "- ")


def _short(v: float) -> str:
    return format(float(v), "g")


def _overrides(args) -> dict:
    out = {}
    if args.steps is not None:
        out["N"] = args.steps
    if args.dt is not None:
        out["h"] = args.dt
    if args.order is not None:
        out["q"] = args.order
    if args.level is not None:
        out["level"] = args.level
    if args.seed is not None:
        out["seed"] = args.seed
    return out


def _cmd_reach(args) -> int:
    scenario = scenario_from_config(load_config(args.config),
                                    _overrides(args))
    if not isinstance(scenario, Scenario):
        raise ConfigError("reach expects a config with kind='reach'")
    trace = run(scenario)
    if args.out:
        write_reach_csv(trace, args.out)
    final = trace.records[-1]
    print(f"{scenario.name}: {scenario.N} steps, final box "
          + " x ".join(f"[{_fmt(lo)}, {_fmt(hi)}]"
                       for lo, hi in zip(final.lo, final.hi)))
    if args.mc:
        rep = mc_check(scenario, samples=args.mc, trace=trace)
        print(f"mc: {rep.samples} samples, {rep.violations} violations, "
              f"worst defect {rep.worst_defect:.3e}")
        if not rep.ok:
            return 2
    return 0


def _cmd_filter(args) -> int:
    scenario = scenario_from_config(load_config(args.config),
                                    _overrides(args))
    if not isinstance(scenario, FilterScenario):
        raise ConfigError("filter expects a config with kind='filter'")
    trace = run_filter(scenario)
    if args.out:
        write_filter_csv(trace, args.out)
    inside = all(
        np.all(trace.truth[k] >= rec.lo - 1e-9)
        and np.all(trace.truth[k] <= rec.hi + 1e-9)
        for k, rec in enumerate(trace.records)
    )
    print(f"{scenario.name}: {scenario.N} iterations, max degree "
          f"{trace.max_degree_overall}, truth contained: {inside}")
    if args.mc:
        rep = mc_check_filter(scenario, samples=args.mc)
        extra = (f", {rep.divergent} divergent plant realizations"
                 if rep.divergent else "")
        print(f"mc: {rep.samples} samples, {rep.violations} violations on "
              f"{rep.steps_checked} checked steps{extra}, "
              f"worst defect {rep.worst_defect:.3e}")
        if not rep.ok:
            return 2
    return 0


def _cmd_adder(args) -> int:
    flavor = _FLAVORS.get(args.flavor)
    if flavor is None:
        raise ConfigError(f"unknown flavor {args.flavor!r}")
    if args.census or not args.verify:
        t0 = time.perf_counter()
        count = adder_census(args.bits, flavor)
        dt = time.perf_counter() - t0
        print(f"monomials: {count}")
        print(f"time: {dt:.3f} s")
    if args.verify:
        ok = verify_adder(args.bits, flavor)
        print(f"verify: {'ok' if ok else 'FAILED'} "
              f"({2 ** (2 * args.bits + 1)} input combinations)")
        if not ok:
            return 2
    return 0


def _cmd_gates(args) -> int:
    flavor = _FLAVORS.get(args.flavor)
    if flavor is None:
        raise ConfigError(f"unknown flavor {args.flavor!r}")
    lo = -1.0 if flavor == SymbolType.SIGNED else 0.0
    a = pn.make([0.0], [[1.0]], [int(flavor) + 4], [[1]])
    b = pn.make([0.0], [[1.0]], [int(flavor) + 8], [[1]])
    names = {int(flavor) + 4: "a", int(flavor) + 8: "b"}
    print(f"# {args.flavor} logic over {{{_short(lo)}, 1}}")
    for kind in GateKind:
        if kind == GateKind.NOT:
            poly = gate(kind, a, flavor=flavor)
        elif kind in (GateKind.TRUE, GateKind.FALSE):
            poly = gate(kind, flavor=flavor)
        else:
            poly = gate(kind, a, b, flavor)
        print(f"{kind.value:>5s}: {polynomial_str(poly, names)}")
    return 0


def _cmd_dump(args) -> int:
    cfg = load_config(args.config)
    scenario = scenario_from_config(cfg, _overrides(args))
    if isinstance(scenario, FilterScenario):
        trace = run_filter(scenario)
        states = trace.states
    else:
        states = run(scenario).states
    k = args.steps if args.steps is not None else 0
    if not 0 <= k < len(states):
        raise ConfigError(f"step {k} outside the computed trace")
    payload = pn.to_json(states[k])
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polymix",
                     description="mixed polynotope scenarios and tools")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True,
                           help="JSON config path or bundled name "
                                f"({', '.join(sorted(_BUNDLED))})")
        p.add_argument("--out", help="output file path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--steps", type=int, default=None,
                       help="override step count N")
        p.add_argument("--dt", type=float, default=None,
                       help="override step size h")
        p.add_argument("--order", "--q", dest="order", type=int,
                       default=None, help="override reduction order q")
        p.add_argument("--level", type=int, default=None,
                       help="override encoding level g")

    p_reach = sub.add_parser("reach", help="propagate a reach scenario")
    common(p_reach)
    p_reach.add_argument("--mc", type=int, default=0,
                         help="Monte-Carlo containment samples")
    p_reach.set_defaults(fn=_cmd_reach)

    p_filter = sub.add_parser("filter", help="run the polynotopic filter")
    common(p_filter)
    p_filter.add_argument("--mc", type=int, default=0,
                          help="closed-loop containment samples")
    p_filter.set_defaults(fn=_cmd_filter)

    p_adder = sub.add_parser("adder", help="nand-adder census/verification")
    p_adder.add_argument("--bits", type=int, required=True)
    p_adder.add_argument("--flavor", default="signed",
                         choices=sorted(_FLAVORS))
    p_adder.add_argument("--census", action="store_true",
                         help="print the distinct-monomial count and timing")
    p_adder.add_argument("--verify", action="store_true",
                         help="exhaustive addition check (bits <= 8)")
    p_adder.set_defaults(fn=_cmd_adder)

    p_gates = sub.add_parser("gates", help="print the gate polynomials")
    p_gates.add_argument("--flavor", default="signed",
                         choices=sorted(_FLAVORS))
    p_gates.set_defaults(fn=_cmd_gates)

    p_dump = sub.add_parser("dump", help="dump a propagated set as JSON")
    common(p_dump)
    p_dump.set_defaults(fn=_cmd_dump)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except BlowUpError as e:
        print(f"numeric abort: {e}", file=sys.stderr)
        return 2
    except PolymixError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
