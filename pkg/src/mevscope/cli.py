"""Command-line driver.

Commands: ``lmev``, ``mev``, ``rlmev`` (value searches), ``nonint``,
``richnonint``, ``epsilon`` (verdicts), ``strip-check``, ``table2`` (the
composition matrix over the bundled scenarios), ``battery`` (structural
properties) and ``examples`` (all golden reproductions).

Exit codes: 0 holds / success, 1 violated / reproduction failure, 2 unknown
or hypothesis-not-met, 3 incomplete result (escalation or memo cap hit),
10 usage error, 11 scenario error.

Reports are deterministic byte-for-byte for a fixed scenario and flag set:
maps are emitted in sorted order, witnesses are canonically tie-broken and
no volatile data (time, paths, ids) is included.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional

from .analysis import (
    Verdict,
    epsilon_composable,
    nonint,
    richnonint,
    verify_stripping,
)
from .battery import structural_battery
from .goldens import GOLDENS, load_bundled
from .ledger import Account
from .scenario import ScenarioError, build_state, load_scenario
from .search import SearchBudget, global_mev, lmev, rlmev

EXIT_HOLDS = 0
EXIT_VIOLATED = 1
EXIT_UNKNOWN = 2
EXIT_INCOMPLETE = 3
EXIT_USAGE = 10
EXIT_SCENARIO = 11

TABLE2_ROWS = (
    ("row1_amm_amm.scn", "holds", "contract-independent"),
    ("row2_bet_on_amm.scn", "violated", "counterexample"),
    ("row3_bet_on_exchange.scn", "holds", "stable"),
    ("row4_best_swap.scn", "holds", "zero-mev"),
    ("row5_swap_router.scn", "holds", "zero-mev"),
    ("row6_best_swap_router.scn", "holds", "zero-mev"),
    ("row7_lp_arbitrage.scn", "holds", "zero-mev"),
    ("row8_flash_loan_arbitrage.scn", "holds", "zero-mev"),
)

CONDITION_NUMBER = {"zero-mev": 1, "contract-independent": 2, "stable": 3}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rat(v: Optional[Fraction]):
    return None if v is None else str(v)


def _witness_json(witness):
    return [tx.label() for tx in witness or ()]


def _budget_from(args) -> SearchBudget:
    try:
        return SearchBudget(max_depth=args.depth, grid=args.grid,
                            exhaustive=args.exhaustive)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _budget_json(budget: SearchBudget, seed: Optional[int] = None) -> dict:
    out = {"depth": budget.max_depth, "grid": budget.grid,
           "exhaustive": budget.exhaustive}
    if seed is not None:
        out["seed"] = seed
    return out


def _verdict_json(v: Verdict) -> dict:
    return {
        "verdict": v.outcome,
        "justification": v.justification,
        "condition": CONDITION_NUMBER.get(v.justification),
        "unrestricted": _rat(v.lhs_value),
        "restricted": _rat(v.rhs_value),
        "witness": _witness_json(v.witness),
        "complete": v.complete,
        "note": v.note,
    }


def _verdict_exit(v: Verdict) -> int:
    if v.holds is True:
        return EXIT_HOLDS
    if v.holds is False:
        return EXIT_VIOLATED
    return EXIT_UNKNOWN


def _emit(report: dict, fmt: str, lines) -> None:
    if fmt == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _verdict_lines(kind: str, v: Verdict) -> list:
    lines = [f"{kind}: {v.outcome} ({v.justification})"]
    if v.lhs_value is not None:
        lines.append(f"  unrestricted value: {v.lhs_value}")
    if v.rhs_value is not None:
        lines.append(f"  restricted value:   {v.rhs_value}")
    if v.witness:
        lines.append("  witness:")
        lines.extend(f"    {tx.label()}" for tx in v.witness)
    if v.note:
        lines.append(f"  note: {v.note}")
    lines.append(f"  complete: {v.complete}")
    return lines


def _load(args) -> tuple:
    scn = load_scenario(args.scenario)
    state, delta = build_state(scn)
    return scn, state, delta


def _contract_set(state, names, default):
    if names is None:
        return default
    accs = frozenset(Account.contract(n) for n in names)
    missing = sorted(a.name for a in accs - state.deployed)
    if missing:
        raise UsageError(f"not deployed in this scenario: {', '.join(missing)}")
    return accs


def _run_value(args, which: str) -> int:
    scn, state, delta = _load(args)
    prices = scn.prices()
    budget = _budget_from(args)
    if scn.ceiling is not None and budget.exhaustive:
        budget = SearchBudget(budget.max_depth, budget.grid, True, ceiling=scn.ceiling)
    observed = _contract_set(state, args.observed, delta)
    restriction = _contract_set(state, args.restrict, None) if args.restrict else None
    if which == "lmev":
        res = lmev(state, observed, restriction, prices, budget)
    elif which == "rlmev":
        res = rlmev(state, observed, restriction, prices, budget)
    else:
        res = global_mev(state, prices, budget)
    exit_code = EXIT_INCOMPLETE if res.warning else EXIT_HOLDS
    report = {
        "command": which,
        "scenario": scn.name,
        "budget": _budget_json(budget),
        "observed": sorted(a.name for a in observed) if which != "mev" else None,
        "restriction": (sorted(a.name for a in restriction)
                        if restriction is not None else "universe"),
        "value": _rat(res.value),
        "witness": _witness_json(res.witness),
        "complete": res.complete,
        "warning": res.warning,
        "exit_code": exit_code,
    }
    lines = [f"{which} = {res.value}"]
    if which != "mev":
        lines.append(f"  observed: {', '.join(sorted(a.name for a in observed)) or '-'}")
        lines.append("  restriction: " + (", ".join(sorted(a.name for a in restriction))
                                          if restriction is not None else "universe"))
    if res.witness:
        lines.append("  witness:")
        lines.extend(f"    {tx.label()}" for tx in res.witness)
    lines.append(f"  complete: {res.complete}")
    if res.warning:
        lines.append(f"  warning: {res.warning}")
    _emit(report, args.format, lines)
    return exit_code


def _run_verdict(args, which: str) -> int:
    scn, state, delta = _load(args)
    prices = scn.prices()
    budget = _budget_from(args)
    if scn.ceiling is not None and budget.exhaustive:
        budget = SearchBudget(budget.max_depth, budget.grid, True, ceiling=scn.ceiling)
    if not delta:
        raise UsageError("scenario has an empty fragment after the split")
    if which == "nonint":
        v = nonint(state, delta, prices, budget)
    elif which == "richnonint":
        v = richnonint(state, delta, prices, budget)
    else:
        v = epsilon_composable(state, delta, Fraction(args.eps), prices, budget)
    exit_code = _verdict_exit(v)
    report = {
        "command": which,
        "scenario": scn.name,
        "budget": _budget_json(budget),
        "fragment": sorted(a.name for a in delta),
        **({"epsilon": str(Fraction(args.eps))} if which == "epsilon" else {}),
        "result": _verdict_json(v),
        "exit_code": exit_code,
    }
    _emit(report, args.format, _verdict_lines(which, v))
    return exit_code


def _run_strip_check(args) -> int:
    scn, state, delta = _load(args)
    prices = scn.prices()
    budget = _budget_from(args)
    observed = _contract_set(state, args.observed, delta)
    restriction = _contract_set(state, args.restrict, None) if args.restrict else None
    rep = verify_stripping(state, observed, restriction, prices, budget)
    exit_code = {"verified": EXIT_HOLDS, "mismatch": EXIT_VIOLATED,
                 "hypothesis-not-met": EXIT_UNKNOWN}[rep.status]
    report = {
        "command": "strip-check",
        "scenario": scn.name,
        "budget": _budget_json(budget),
        "observed": sorted(a.name for a in observed),
        "status": rep.status,
        "reason": rep.reason,
        "full_value": _rat(rep.full_value),
        "stripped_value": _rat(rep.stripped_value),
        "exit_code": exit_code,
    }
    lines = [
        f"strip-check: {rep.status}",
        f"  reason: {rep.reason}",
        f"  full value:     {rep.full_value}",
        f"  stripped value: {rep.stripped_value}",
    ]
    _emit(report, args.format, lines)
    return exit_code


def _run_table2(args) -> int:
    budget = _budget_from(args)
    rows = []
    lines = ["composition matrix (wealth-independent non-interference)"]
    all_match = True
    for fname, expected, expected_just in TABLE2_ROWS:
        scn = load_bundled(f"compositions/{fname}")
        state, delta = build_state(scn)
        v = richnonint(state, delta, scn.prices(), budget)
        match = v.outcome == expected and (
            expected != "holds" or v.justification == expected_just)
        all_match = all_match and match
        mark = "ok" if match else "MISMATCH"
        cond = CONDITION_NUMBER.get(v.justification)
        verdict = "yes" if v.holds else ("NO" if v.holds is False else "unknown")
        lines.append(f"  {fname:32} {verdict:8} "
                     f"{'(' + str(cond) + ')' if cond else '':5} [{mark}]")
        rows.append({
            "scenario": fname,
            "verdict": v.outcome,
            "justification": v.justification,
            "condition": cond,
            "expected": expected,
            "match": match,
        })
    exit_code = EXIT_HOLDS if all_match else EXIT_VIOLATED
    lines.append("all rows match" if all_match else "MISMATCH against expectations")
    report = {"command": "table2", "budget": _budget_json(budget),
              "rows": rows, "exit_code": exit_code}
    _emit(report, args.format, lines)
    return exit_code


def _run_battery(args) -> int:
    budget = _budget_from(args)
    rep = structural_battery(budget, seed=args.seed)
    exit_code = EXIT_HOLDS if rep.passed else EXIT_VIOLATED
    lines = ["structural-property battery"]
    for r in rep.rows:
        lines.append(f"  [{'PASS' if r.passed else 'FAIL'}] {r.row} ({r.kind}): {r.claim}")
        lines.append(f"         {r.detail}")
    report = {
        "command": "battery",
        "budget": _budget_json(budget, args.seed),
        "rows": [{"row": r.row, "kind": r.kind, "claim": r.claim,
                  "passed": r.passed, "detail": r.detail} for r in rep.rows],
        "exit_code": exit_code,
    }
    _emit(report, args.format, lines)
    return exit_code


def _run_examples(args) -> int:
    checks = []
    lines = []
    for name, fn in GOLDENS:
        for c in fn():
            checks.append({"name": c.name, "ok": c.ok, "detail": c.detail})
            lines.append(f"[{'PASS' if c.ok else 'FAIL'}] {c.name}"
                         + ("" if c.ok else f" ({c.detail})"))
    ok = all(c["ok"] for c in checks)
    exit_code = EXIT_HOLDS if ok else EXIT_VIOLATED
    lines.append(f"{sum(c['ok'] for c in checks)}/{len(checks)} golden checks passed")
    report = {"command": "examples", "checks": checks, "exit_code": exit_code}
    _emit(report, args.format, lines)
    return exit_code


def _add_common(p) -> None:
    p.add_argument("--depth", type=int, default=4, help="trace length bound")
    p.add_argument("--grid", type=int, default=8, help="amount grid resolution")
    p.add_argument("--exhaustive", action="store_true",
                   help="signature-driven exhaustive enumeration (micro states)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized parts")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> _Parser:
    parser = _Parser(prog="mevscope",
                     description="extractable-value and composability analyzer")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="path to a .scn scenario file")
        _add_common(p)
        return p

    for name, help_ in (("lmev", "local extractable loss of the observed contracts"),
                        ("rlmev", "wealthy-adversary local extractable loss")):
        p = scenario_cmd(name, help_)
        p.add_argument("--observed", nargs="+", metavar="NAME",
                       help="observed contracts (default: the post-split fragment)")
        p.add_argument("--restrict", nargs="+", metavar="NAME",
                       help="restrict callable contracts (default: universe)")
    scenario_cmd("mev", "whole-state extractable value")
    scenario_cmd("nonint", "non-interference at the given adversary wealth")
    scenario_cmd("richnonint", "wealth-independent non-interference")
    p = scenario_cmd("epsilon", "whole-state growth criterion")
    p.add_argument("--eps", required=True, help="tolerated growth factor (rational)")
    p = scenario_cmd("strip-check", "dependency-stripping preservation check")
    p.add_argument("--observed", nargs="+", metavar="NAME")
    p.add_argument("--restrict", nargs="+", metavar="NAME")

    for name, help_ in (("table2", "run the bundled composition matrix"),
                        ("battery", "run the structural-property battery"),
                        ("examples", "run every golden reproduction")):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "lmev":
            return _run_value(args, "lmev")
        if args.command == "rlmev":
            return _run_value(args, "rlmev")
        if args.command == "mev":
            return _run_value(args, "mev")
        if args.command in ("nonint", "richnonint", "epsilon"):
            if args.command == "epsilon":
                try:
                    eps = Fraction(args.eps)
                except (ValueError, ZeroDivisionError):
                    raise UsageError(f"bad --eps value {args.eps!r}") from None
                if eps < 0:
                    raise UsageError("--eps must be non-negative")
            return _run_verdict(args, args.command)
        if args.command == "strip-check":
            return _run_strip_check(args)
        if args.command == "table2":
            return _run_table2(args)
        if args.command == "battery":
            return _run_battery(args)
        if args.command == "examples":
            return _run_examples(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as e:
        print(f"scenario error: {e}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    sys.exit(main())
