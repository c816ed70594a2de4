"""Command-line front end.

Reports are JSON documents stamped with ``schema_version``; sweeps can also
be written as CSV.  Exit codes: 0 all checks passed, 1 a check failed,
2 usage error, 3 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import bounds
from .engine import (BudgetExceeded, DEFAULT_NODE_CAP, NonHalting, build_config_graph, expected_runtime,
                     hitting_probability, monte_carlo, overall_acceptance, overall_rejection, solve_absorption)
from .languages import ALPHABETS, PROTOCOLS, parse_knapsack, reference_decider
from .machine import MachineFileError, load_machine
from .protocols import build_verifier
from .prover import EnumerationBudgetExceeded, enumerate_adversaries, honest_prover
from .suites import SUITES, loglog_slope, member_of_length, mpal_growth_ratios, run_suite, sweep_rows

REPORT_SCHEMA_VERSION = 1
SIG = 12
SWEEP_COLUMNS = ("protocol", "n", "k", "epsilon", "p_accept_iter", "p_reject_iter", "expected_steps_iter",
                 "overall_acceptance", "expected_total_steps")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _num(x):
    """Round floats to ``SIG`` significant digits, recursively."""
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            return str(x)
        return float(f"{x:.{SIG}g}")
    if isinstance(x, dict):
        return {k: _num(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_num(v) for v in x]
    return x


def _param(p):
    if isinstance(p, tuple):
        return list(p)
    return p


def _document(command: str, args, body: dict, started: float | None) -> dict:
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "timing", "started")}
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "command": command, "arguments": echo}
    doc.update(body)
    if started is not None:
        doc["timing"] = {"wall_seconds": time.perf_counter() - started}
    return _num(doc)


def _emit(doc: dict, out):
    out.write(json.dumps(doc, indent=2, ensure_ascii=False))
    out.write("\n")


def _check_word(protocol: str, word: str):
    if protocol != "knapsack" and set(word) - ALPHABETS[protocol]:
        bad = sorted(set(word) - ALPHABETS[protocol])
        raise UsageError(f"input {word!r} has symbols {bad} outside the alphabet of {protocol}")
    if protocol == "knapsack" and set(word) - ALPHABETS["knapsack"]:
        raise UsageError(f"input {word!r} is not over {{0, 1, #}}")


def _check_epsilon(eps: float):
    if not 0 < eps < 0.5:
        raise UsageError(f"--epsilon must lie in (0, 1/2), got {eps}")


def _verifier(args):
    spec, params = build_verifier(args.protocol, args.epsilon)
    if args.machine_file:
        try:
            with open(args.machine_file, encoding="utf-8") as fh:
                spec = load_machine(fh.read())
        except (OSError, MachineFileError) as exc:
            raise UsageError(f"cannot load machine file: {exc}") from None
    return spec, params


def _exact_report(spec, params, word, prover, max_nodes) -> dict:
    graph = build_config_graph(spec, word, prover, max_nodes)
    out = solve_absorption(graph)
    rep = {"prover": _param(getattr(prover, "parameter", None)), "engine": "exact",
           "outcome": out.as_dict()}
    try:
        rep["overall_acceptance"] = overall_acceptance(out)
        rep["expected_total_steps"] = expected_runtime(out)
    except NonHalting:
        rep["overall_acceptance"] = None
        rep["expected_total_steps"] = None
    if params.protocol == "knapsack" and parse_knapsack(word) is not None:
        reach = hitting_probability(graph, lambda c: c.classical == "fin")
        rep["final_check_reach"] = reach
        rep["final_check_rejection"] = out.p_reject / reach if reach > 0 else None
    return rep


def _mc_report(spec, word, prover, args) -> dict:
    est = monte_carlo(spec, word, prover, trials=args.trials, seed=args.seed, step_cap=args.step_cap)
    return {"prover": _param(getattr(prover, "parameter", None)), "engine": "mc", "estimate": est.as_dict()}


def _bound_check(name, measured, bound, strict=False) -> dict:
    ok = measured > bound if strict else measured >= bound - 1e-9
    return {"name": name, "measured": measured, "bound": bound, "margin": measured - bound, "passed": bool(ok)}


def cmd_analyze(args, out) -> int:
    _check_epsilon(args.epsilon)
    _check_word(args.protocol, args.input)
    spec, params = _verifier(args)
    word, protocol, n = args.input, args.protocol, len(args.input)
    member = reference_decider(protocol, word)
    provers = [honest_prover(protocol, word)] if member else enumerate_adversaries(protocol, word)
    if args.engine == "mc":
        reports = [_mc_report(spec, word, p, args) for p in provers]
    else:
        reports = [_exact_report(spec, params, word, p, args.max_nodes) for p in provers]
    checks = []
    if args.engine == "exact":
        outs = [r["outcome"] for r in reports]
        if member:
            r = reports[0]
            p_rej = outs[0]["p_reject"]
            checks.append({"name": "completeness p_reject = 0", "measured": p_rej, "bound": 0.0,
                           "margin": -p_rej, "passed": p_rej <= 1e-9})
            checks.append(_bound_check("overall acceptance = 1", r["overall_acceptance"], 1.0))
            if protocol == "middle" and not args.machine_file:
                g = bounds.gadget_accept(n, params.k)
                checks.append({"name": "gadget_accept", "measured": outs[0]["p_accept"], "bound": g,
                               "margin": outs[0]["p_accept"] - g,
                               "passed": abs(outs[0]["p_accept"] - g) <= 1e-12})
        else:
            rej = [_overall_rejection(o) for o in outs]
            checks.append(_bound_check("overall rejection > 1 - epsilon", min(rej), 1 - params.epsilon, strict=True))
            min_rej = min(o["p_reject"] for o in outs)
            if protocol == "middle":
                checks.append(_bound_check("middle_reject_lb", min_rej, bounds.middle_reject_lb(n)))
            elif protocol == "mpal":
                checks.append(_bound_check("mpal_reject_lb", min_rej, bounds.mpal_reject_lb(n)))
            elif protocol == "knapsack" and parse_knapsack(word) is not None:
                cond = [r["final_check_rejection"] for r in reports if r["final_check_rejection"] is not None]
                if cond:
                    checks.append(_bound_check("knapsack_reject_lb", min(cond), bounds.knapsack_reject_lb()))
    body = {"protocol": protocol, "input": word, "epsilon": params.epsilon, "k": params.k, "member": member,
            "reports": reports, "checks": checks, "passed": all(c["passed"] for c in checks)}
    _emit(_document("analyze", args, body, args.started), out)
    return EXIT_OK if body["passed"] else EXIT_FAIL


def _overall_rejection(outcome: dict) -> float:
    h = outcome["p_accept"] + outcome["p_reject"]
    return outcome["p_reject"] / h if h > 0 else 0.0


_SUITE_LIMITS = {
    "unitarity": (),
    "middle": ("max_n", "seed"),
    "mpal": ("max_n",),
    "knapsack": ("max_items", "max_bits"),
    "L1L2": ("max_n",),
    "engine-selfcheck": ("trials", "seed"),
    "sin2": ("max_j",),
    "xy": ("max_len",),
}


def cmd_verify(args, out) -> int:
    limits = {k: getattr(args, k) for k in _SUITE_LIMITS[args.suite] if getattr(args, k) is not None}
    if args.suite == "middle" and args.max_n is not None:
        limits.setdefault("complete_n", args.max_n)
    res = run_suite(args.suite, **limits)
    _emit(_document("verify", args, res.as_dict(), args.started), out)
    return EXIT_OK if res.passed else EXIT_FAIL


def _parse_ns(text: str) -> list[int]:
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            start, stop = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step <= 0:
                raise ValueError
            return list(range(start, stop + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--n must be a comma list or start:stop[:step], got {text!r}") from None


def cmd_sweep(args, out) -> int:
    _check_epsilon(args.epsilon)
    ns = _parse_ns(args.n)
    if not ns:
        raise UsageError("--n selects no lengths")
    if args.protocol == "knapsack":
        raise UsageError("sweeps are defined for middle, mpal, L1 and L2")
    for n in ns:
        try:
            member_of_length(args.protocol, n)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    rows, complete = [], True
    for n in ns:
        try:
            rows.extend(sweep_rows(args.protocol, [n], args.epsilon, max_nodes=args.max_nodes))
        except BudgetExceeded:
            complete = False
            break
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (f"{v:.{SIG}g}" if isinstance(v, float) else v) for k, v in r.items()})
        out.write(buf.getvalue())
    else:
        body = {"protocol": args.protocol, "epsilon": args.epsilon, "complete": complete, "rows": rows}
        if len(rows) >= 2:
            body["loglog_slope"] = loglog_slope([r["n"] for r in rows], [r["expected_total_steps"] for r in rows])
            if args.protocol == "mpal":
                body["growth_ratio_vs_kn2kn"] = mpal_growth_ratios(rows)
        _emit(_document("sweep", args, body, args.started), out)
    return EXIT_OK if complete else EXIT_BUDGET


def cmd_simulate(args, out) -> int:
    _check_epsilon(args.epsilon)
    _check_word(args.protocol, args.input)
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    spec, params = _verifier(args)
    word, protocol = args.input, args.protocol
    member = reference_decider(protocol, word)
    exact = None
    if member:
        prover = honest_prover(protocol, word)
    else:
        advs = enumerate_adversaries(protocol, word)
        if args.adversary is not None:
            if not 0 <= args.adversary < len(advs):
                raise UsageError(f"--adversary must lie in [0, {len(advs) - 1}]")
            prover = advs[args.adversary]
        else:
            # strongest adversary: least per-iteration rejection
            try:
                outs = [solve_absorption(build_config_graph(spec, word, a, args.max_nodes)) for a in advs]
                i = min(range(len(advs)), key=lambda j: (outs[j].p_reject, -outs[j].p_accept))
                prover, exact = advs[i], outs[i]
            except BudgetExceeded:
                prover = advs[-1]
    if exact is None:
        try:
            exact = solve_absorption(build_config_graph(spec, word, prover, args.max_nodes))
        except BudgetExceeded:
            exact = None
    est = monte_carlo(spec, word, prover, trials=args.trials, seed=args.seed, step_cap=args.step_cap,
                      per_iteration=not args.until_halt)
    body = {"protocol": protocol, "input": word, "epsilon": params.epsilon, "k": params.k, "member": member,
            "prover": _param(getattr(prover, "parameter", None)), "estimate": est.as_dict()}
    checks = []
    if exact is not None:
        body["exact"] = exact.as_dict()
        if args.until_halt:
            targets = [("accept", overall_acceptance(exact), est.p_accept),
                       ("reject", overall_rejection(exact), est.p_reject)]
        else:
            targets = [("accept", exact.p_accept, est.p_accept), ("reject", exact.p_reject, est.p_reject)]
        for name, p, got in targets:
            se = (p * (1 - p) / est.trials) ** 0.5
            z = 0.0 if got == p else (abs(got - p) / se if se > 0 else float("inf"))
            checks.append({"name": f"{name} within 4 standard errors", "measured": got, "bound": p,
                           "z": z, "passed": z <= 4.0})
    body["checks"] = checks
    body["passed"] = all(c["passed"] for c in checks)
    _emit(_document("simulate", args, body, args.started), out)
    return EXIT_OK if body["passed"] else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qam2qcfa", description="Exact analysis and simulation of QAM(2QCFA) protocols.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, word=True):
        sp.add_argument("--protocol", required=True, choices=PROTOCOLS)
        if word:
            sp.add_argument("--input", required=True, help="input word (may be empty)")
        sp.add_argument("--epsilon", type=float, default=0.25)
        sp.add_argument("--max-nodes", type=int, default=DEFAULT_NODE_CAP, help="configuration graph budget")
        sp.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")

    a = sub.add_parser("analyze", help="exact or sampled analysis of one input")
    common(a)
    a.add_argument("--engine", choices=("exact", "mc"), default="exact")
    a.add_argument("--trials", type=int, default=10**5)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--step-cap", type=int, default=10**6)
    a.add_argument("--machine-file", help="JSON machine description replacing the built-in verifier")
    a.add_argument("--format", choices=("doc",), default="doc")
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="run a bound-verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--max-n", type=int)
    v.add_argument("--max-j", type=int)
    v.add_argument("--max-len", type=int)
    v.add_argument("--max-items", type=int)
    v.add_argument("--max-bits", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--timing", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="honest-prover expected runtime over input lengths")
    common(s, word=False)
    s.add_argument("--n", required=True, help="lengths: comma list or start:stop[:step]")
    s.add_argument("--format", choices=("doc", "csv"), default="doc")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("simulate", help="seeded Monte-Carlo run with exact comparison")
    common(m)
    m.add_argument("--trials", type=int, default=10**5)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--step-cap", type=int, default=10**6)
    m.add_argument("--adversary", type=int, help="index into the adversary family (non-members)")
    m.add_argument("--until-halt", action="store_true", help="sample whole runs instead of single iterations")
    m.add_argument("--machine-file", help="JSON machine description replacing the built-in verifier")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.started = time.perf_counter() if getattr(args, "timing", False) else None
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, EnumerationBudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
