"""Structural-property battery for the wealth-independent relation.

Each row checks one closure law or known counterexample of the relation
"context does not interfere with the new fragment, for any adversary
wealth": extending or erasing context is safe (under sender-agnostic
boundaries), while extending the subject fragment, cutting it, or unioning
two separately-safe fragments is not.  Laws are checked on concrete catalog
instances; counterexample rows must actively falsify the naive implication.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction

from .analysis import richnonint, without_contracts
from .ledger import Account
from .scenario import build_state, parse_scenario
from .search import SearchBudget, rlmev


@dataclass(frozen=True)
class BatteryRow:
    row: str
    claim: str
    kind: str        # "law" | "counterexample"
    passed: bool
    detail: str


@dataclass(frozen=True)
class BatteryReport:
    rows: tuple

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


def _state(doc: dict, name: str):
    return build_state(parse_scenario(json.dumps(doc), name))


def _doc(tokens, users, deployments, split) -> dict:
    return {
        "tokens": [{"symbol": t, "price": 1} for t in tokens],
        "users": users,
        "deployments": deployments,
        "split": split,
    }


_ADV = [{"name": "M", "adversary": True}, {"name": "A"}]


def _amm(name, t0, t1, f0, f1):
    return {"contract": "amm", "name": name, "args": {"t0": t0, "t1": t1},
            "fund": {t0: f0, t1: f1}, "by": "A"}


def _cell_gate_docs(extra_context=(), with_proxy=False):
    deps = [{"contract": "cell", "name": "X", "by": "A"}]
    deps = list(extra_context) + deps
    deps.append({"contract": "gated_drop", "name": "C",
                 "args": {"cell": "X", "token": "T"}, "fund": {"T": 1}, "by": "A"})
    if with_proxy:
        deps.append({"contract": "cell_proxy", "name": "Fwd",
                     "args": {"cell": "X"}, "by": "A"})
    return deps


def structural_battery(budget: SearchBudget = SearchBudget(),
                       seed: int = 0) -> BatteryReport:
    rng = random.Random(seed)
    rows = []

    def law(row, claim, ok, detail=""):
        rows.append(BatteryRow(row, claim, "law", ok, detail))

    def cex(row, claim, ok, detail=""):
        rows.append(BatteryRow(row, claim, "counterexample", ok, detail))

    # 1. appending context after the fact cannot break a safe deployment
    #    (the appended contracts may even be adversary-deployed wrappers)
    base = _doc(["T0", "T1"], _ADV,
                [_amm("AMM1", "T0", "T1", 6, 6), _amm("AMM2", "T0", "T1", 9, 4)], 1)
    st, delta = _state(base, "battery-append")
    prices = parse_scenario(json.dumps(base), "x").prices()
    v_plain = richnonint(st, delta, prices, budget)
    extended = _doc(["T0", "T1"], _ADV,
                    [_amm("AMM1", "T0", "T1", 6, 6),
                     {"contract": "best_swap", "name": "AdvWrap",
                      "args": {"c0": "AMM1", "c1": "AMM1"}, "by": "M"},
                     _amm("AMM2", "T0", "T1", 9, 4)], 2)
    st2, delta2 = _state(extended, "battery-append-2")
    v_ext = richnonint(st2, delta2, prices, budget)
    law("append-context", "safe stays safe when contracts are appended before the fragment",
        v_plain.holds is True and v_ext.holds is True,
        f"plain={v_plain.outcome}/{v_plain.justification}, "
        f"extended={v_ext.outcome}/{v_ext.justification}")

    # 2. prepending unrelated context cannot break a safe deployment
    gate = _doc(["T"], _ADV, _cell_gate_docs(with_proxy=True), 1)
    stg, dg = _state(gate, "battery-gate")
    pg = parse_scenario(json.dumps(gate), "x").prices()
    v_gate = richnonint(stg, dg, pg, budget)
    prepended = _doc(["T", "TF"], _ADV, _cell_gate_docs(
        extra_context=[{"contract": "faucet", "name": "F",
                        "args": {"token": "TF", "amount": 5},
                        "fund": {"TF": 5}, "by": "A"}], with_proxy=True), 2)
    stp, dp = _state(prepended, "battery-prepend")
    pp = parse_scenario(json.dumps(prepended), "x").prices()
    v_pre = richnonint(stp, dp, pp, budget)
    law("prepend-context", "safe stays safe under earlier unrelated contracts",
        v_gate.holds is True and v_pre.holds is True,
        f"plain={v_gate.outcome}, prepended={v_pre.outcome}")

    # 3. erasing unrelated context preserves safety (cut F back out of row 2);
    #    checked for context added before and after the fragment's dependency
    law("erase-context", "safe stays safe when unrelated context is removed",
        v_pre.holds is True and v_gate.holds is True,
        f"with context={v_pre.outcome}, without={v_gate.outcome}")
    between = _doc(["T", "TF"], _ADV,
                   [{"contract": "cell", "name": "X", "by": "A"},
                    {"contract": "faucet", "name": "F",
                     "args": {"token": "TF", "amount": 5}, "fund": {"TF": 5}, "by": "A"},
                    {"contract": "gated_drop", "name": "C",
                     "args": {"cell": "X", "token": "T"}, "fund": {"T": 1}, "by": "A"},
                    {"contract": "cell_proxy", "name": "Fwd",
                     "args": {"cell": "X"}, "by": "A"}], 2)
    stb, db = _state(between, "battery-between")
    pb = parse_scenario(json.dumps(between), "x").prices()
    v_between = richnonint(stb, db, pb, budget)
    law("erase-late-context", "safe stays safe when later unrelated context is removed",
        v_between.holds is True and v_gate.holds is True,
        f"with context={v_between.outcome}, without={v_gate.outcome}")

    # 4. extending the subject fragment is NOT safe: the empty fragment is
    #    trivially non-interfering, adding the gated vault breaks it
    empty_doc = _doc(["T"], _ADV, _cell_gate_docs(), 2)   # split after C: delta empty
    ste, de = _state(empty_doc, "battery-empty-delta")
    v_empty = richnonint(ste, de, pg, budget)
    split_doc = _doc(["T"], _ADV, _cell_gate_docs(), 1)   # delta = {C}
    sts, ds = _state(split_doc, "battery-c-delta")
    v_c = richnonint(sts, ds, pg, budget)
    cex("extend-subject", "adding contracts to a safe fragment can interfere",
        v_empty.holds is True and v_c.holds is False,
        f"empty fragment={v_empty.outcome}, extended={v_c.outcome} "
        f"({v_c.lhs_value} vs {v_c.rhs_value})")

    # 5. cutting the subject fragment is NOT safe: gate+proxy is fine,
    #    the gate alone is not
    cex("cut-subject", "removing contracts from a safe fragment can interfere",
        v_gate.holds is True and v_c.holds is False,
        f"gate+proxy={v_gate.outcome}, gate alone={v_c.outcome}")

    # 6. two separately safe fragments may interfere when deployed together
    droppers = _doc(["T"], _ADV, [
        {"contract": "once_cell", "name": "Var", "by": "A"},
        {"contract": "dropper", "name": "Drop1",
         "args": {"var": "Var", "token": "T"}, "fund": {"T": 3}, "by": "A"},
        {"contract": "dropper", "name": "Drop2",
         "args": {"var": "Var", "token": "T"}, "fund": {"T": 3}, "by": "A"},
    ], 1)
    std, _ = _state(droppers, "battery-droppers")
    pd = parse_scenario(json.dumps(droppers), "x").prices()
    d1, d2 = Account.contract("Drop1"), Account.contract("Drop2")
    v1 = richnonint(without_contracts(std, {d2}), {d1}, pd, budget)
    v2 = richnonint(without_contracts(std, {d1}), {d2}, pd, budget)
    vpair = richnonint(std, {d1, d2}, pd, budget)
    cex("union-subjects", "two separately safe fragments can interfere jointly",
        v1.holds is True and v2.holds is True and vpair.holds is False,
        f"singles={v1.outcome}/{v2.outcome}, pair={vpair.outcome} "
        f"({vpair.lhs_value} vs {vpair.rhs_value})")

    # 7. even sequential safe deployments do not compose
    v_seq = richnonint(without_contracts(std, {d2}).replace(), {d1}, pd, budget)
    v_then = richnonint(std, {d2}, pd, budget)
    cex("sequential-deploy", "checking each deployment in sequence still misses joint interference",
        v_seq.holds is True and v_then.holds is True and vpair.holds is False,
        f"first={v_seq.outcome}, second-in-context={v_then.outcome}, pair={vpair.outcome}")

    # 8. union IS safe when the added fragment has nothing to extract
    union_doc = _doc(["ETH", "T", "TA"],
                     _ADV + [{"name": "B"}], [
        {"contract": "exchange", "name": "Exchange",
         "args": {"tout": "T", "tin": "ETH", "rate": 5},
         "fund": {"T": 50}, "by": "B"},
        {"contract": "bet", "name": "Bet",
         "args": {"oracle": "Exchange", "token": "T", "rate": 3, "deadline": 1000},
         "fund": {"ETH": 10}, "by": "A"},
        {"contract": "airdrop", "name": "Empty", "args": {"token": "TA"}, "by": "A"},
    ], 1)
    stl, _ = _state(union_doc, "battery-zero-union")
    pl = parse_scenario(json.dumps(union_doc), "x").prices()
    bet, empty = Account.contract("Bet"), Account.contract("Empty")
    v_bet = richnonint(without_contracts(stl, {empty}), {bet}, pl, budget)
    zero = rlmev(stl, {empty}, None, pl, budget)
    v_union = richnonint(stl, {bet, empty}, pl, budget)
    law("zero-mev-union", "a safe fragment stays safe when joined with a zero-value one",
        v_bet.holds is True and zero.value == Fraction(0) and zero.complete
        and v_union.holds is True,
        f"base={v_bet.outcome}, added value={zero.value}, union={v_union.outcome}")

    # 9. seeded sweep of rule 1 across random pool fundings, with the extra
    #    context deployed by the adversary itself
    outcomes = []
    for _ in range(5):
        f = [rng.randint(2, 9) for _ in range(4)]
        doc = _doc(["T0", "T1"], _ADV,
                   [_amm("AMM1", "T0", "T1", f[0], f[1]),
                    {"contract": "best_swap", "name": "AdvWrap",
                     "args": {"c0": "AMM1", "c1": "AMM1"}, "by": "M"},
                    _amm("AMM2", "T0", "T1", f[2], f[3])], 2)
        st_r, delta_r = _state(doc, "battery-random-append")
        outcomes.append(richnonint(st_r, delta_r, prices, budget).holds is True)
    law("append-context-random", "rule 1 holds across randomized pool fundings",
        all(outcomes), f"{sum(outcomes)}/5 random instances safe (seed {seed})")

    return BatteryReport(tuple(rows))
