"""Composability analysis: non-interference verdicts and supporting checks.

The two verdict relations compare what an adversary can extract from a set
of newly deployed contracts when allowed to touch the whole state against
what the same adversary extracts when confined to the new contracts alone.
``nonint`` fixes the adversary's wealth to the given state; ``richnonint``
takes the wealthy-adversary value, which is wallet-independent.

Verdicts are three-valued.  "holds" is only emitted when a sufficient
condition fires or when both searched values are complete (wealth bound hit
or exhaustive enumeration); a budget-limited equality without either yields
"unknown".  "violated" verdicts always carry a replayable witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .ledger import (
    Account,
    BlockchainState,
    PriceMap,
    Wallet,
    wealth,
)
from .search import (
    SearchBudget,
    adversary_moves,
    global_mev,
    lmev,
    rlmev,
    rich_wallet,
    with_adversary_wallet,
)
from .vm import Transaction, check_well_formed, deps, execute

JUST_ZERO_MEV = "zero-mev"
JUST_CONTRACT_INDEP = "contract-independent"
JUST_STABLE = "stable"
JUST_SEARCH = "direct-search"
JUST_COUNTEREXAMPLE = "counterexample"


@dataclass(frozen=True)
class Verdict:
    """Outcome of a composability check.

    ``holds`` is True / False / None (unknown).  ``lhs_value`` is the
    unrestricted figure, ``rhs_value`` the restricted (or baseline) one;
    either may be None when a sufficient condition decided the verdict
    without running the search.
    """

    holds: Optional[bool]
    justification: str
    lhs_value: Optional[Fraction] = None
    rhs_value: Optional[Fraction] = None
    witness: Optional[tuple] = None
    complete: bool = False
    note: str = ""

    @property
    def outcome(self) -> str:
        if self.holds is True:
            return "holds"
        if self.holds is False:
            return "violated"
        return "unknown"


# --- state surgery -------------------------------------------------------------


def strip(state: BlockchainState, keep: Iterable[Account]) -> BlockchainState:
    """Restrict the contract part to the dependency closure of ``keep``.

    The result is well-formed: the closure is downward-closed in the
    deployment order.  User wallets are preserved.
    """
    closure = deps(keep, state)
    order = tuple(a for a in state.order if a in closure)
    return BlockchainState(
        state.users,
        {a: state.contracts[a] for a in order},
        order,
        {a: state.codes[a] for a in order},
        state.height,
        state.adversary,
    )


def without_contracts(state: BlockchainState, drop: Iterable[Account]) -> BlockchainState:
    """Remove a suffix fragment (no remaining contract may depend on it)."""
    dropset = frozenset(drop)
    keep = [a for a in state.order if a not in dropset]
    for a in keep:
        if any(Account.contract(n) in dropset for n in state.codes[a].declared_deps):
            raise ValueError(f"{a} depends on a dropped contract")
    return BlockchainState(
        state.users,
        {a: state.contracts[a] for a in keep},
        tuple(keep),
        {a: state.codes[a] for a in keep},
        state.height,
        state.adversary,
    )


# --- token and contract independence ---------------------------------------------


def intok_outtok(state: BlockchainState, fragment: Iterable[Account],
                 budget: SearchBudget = SearchBudget()) -> tuple:
    """(receivable, sendable) token sets of a contract fragment.

    Declared over-approximations unioned with anything observed while
    probing the fragment's own generated moves one step deep; a declared
    ``None`` means "all scenario tokens".  The result over-approximates the
    semantic sets, which makes a True token-independence verdict sound.
    """
    frag = frozenset(fragment) & state.deployed
    all_tokens = frozenset(prober_tokens(state))
    intok: set = set()
    outtok: set = set()
    for acc in frag:
        code = state.codes[acc]
        intok |= all_tokens if code.intok_decl is None else code.intok_decl
        outtok |= all_tokens if code.outtok_decl is None else code.outtok_decl
    probe_state = _enriched(state, budget)
    for tx in adversary_moves(probe_state, frag, budget):
        res = execute(probe_state, tx, want_log=True)
        if not res.valid:
            continue
        for rec in res.trace_log:
            if rec.callee in frag and rec.attached:
                intok.update(t for t, _ in rec.attached.items())
            if rec.callee in frag:
                for _, w in rec.transfers:
                    outtok.update(t for t, _ in w.items())
    return frozenset(intok), frozenset(outtok)


def prober_tokens(state: BlockchainState) -> tuple:
    toks = set()
    for w in state.users.values():
        toks.update(t for t, _ in w.items())
    for cs in state.contracts.values():
        toks.update(t for t, _ in cs.wallet.items())
    for code in state.codes.values():
        toks.update(code.intok_decl or ())
        toks.update(code.outtok_decl or ())
    return tuple(sorted(toks))


def token_independent(state: BlockchainState, frag_a: Iterable[Account],
                      frag_b: Iterable[Account],
                      budget: SearchBudget = SearchBudget()) -> bool:
    in_a, out_a = intok_outtok(state, frag_a, budget)
    in_b, out_b = intok_outtok(state, frag_b, budget)
    return not (in_a & out_b) and not (in_b & out_a)


def contract_independent(state: BlockchainState, frag_a: Iterable[Account],
                         frag_b: Iterable[Account]) -> bool:
    return not (deps(frag_a, state) & deps(frag_b, state))


# --- stability under adversary moves ----------------------------------------------


def _enriched(state: BlockchainState, budget: SearchBudget) -> BlockchainState:
    prices = PriceMap.uniform(prober_tokens(state) or ("T",))
    return with_adversary_wallet(state, rich_wallet(state, prices, budget, 1))


def _observations(state: BlockchainState, watched: Sequence) -> tuple:
    """Observation triples (valid, return, target transfers) of every probe,
    run by a wealthy throwaway user so funding never masks behaviour."""
    prober = Account.user("__prober__")
    obs = []
    for callee, method, args, attached in watched:
        users = dict(state.users)
        users[prober] = state.user_wallet(prober) + attached
        probe_state = state.replace(users=users)
        tx = Transaction(prober, callee, method, args, attached)
        res = execute(probe_state, tx, want_log=True)
        rec = next((r for r in res.trace_log
                    if r.callee == callee and r.method == method), None)
        obs.append((
            callee, method, args, attached,
            res.valid,
            rec.returned if rec else None,
            rec.transfers if rec else (),
        ))
    return tuple(obs)


def stable_wrt_adversary(state: BlockchainState, context: Iterable[Account],
                         subject: Iterable[Account], prices: PriceMap,
                         budget: SearchBudget = SearchBudget(),
                         wealthy: bool = False) -> tuple:
    """Bounded falsification of "adversary moves on the context cannot change
    what the subject observes of it".

    Probes the observable behaviour (abort flag, return value, transferred
    tokens) of every context method the subject's code calls, in the given
    state and in every state reachable through adversary transactions on the
    context within the budget.  Returns ("stable" | "unstable" | "unknown",
    witness trace or None).  "stable" is a bounded-exploration conclusion:
    sound only as far as the probes and the reachable set go.
    """
    ctx_accs = frozenset(context) & state.deployed
    subj_accs = frozenset(subject) & state.deployed
    watched = []
    missing = []
    for acc in sorted(subj_accs):
        for dep_name, method in sorted(state.codes[acc].calls_out):
            dep = Account.contract(dep_name)
            if dep not in ctx_accs:
                continue
            probes = [(dep, m, args, att)
                      for m, args, att in state.codes[dep].probes if m == method]
            if not probes:
                missing.append((dep_name, method))
            watched.extend(probes)
    if missing:
        return ("unknown", None)
    if not watched:
        return ("stable", None)   # no observable channel into the context

    base = _enriched(state, budget) if wealthy else state
    base_obs = _observations(base, watched)
    cap = budget.state_cap if budget.state_cap is not None else 4096
    seen = {base.core_key()}
    frontier = [(base, ())]
    for _ in range(budget.max_depth):
        nxt = []
        for cur, trace in frontier:
            for tx in adversary_moves(cur, ctx_accs, budget):
                res = execute(cur, tx)
                if not res.valid:
                    continue
                key = res.state.core_key()
                if key in seen:
                    continue
                if len(seen) >= cap:
                    return ("unknown", None)
                seen.add(key)
                here = trace + (tx,)
                if _observations(res.state, watched) != base_obs:
                    return ("unstable", here)
                nxt.append((res.state, here))
        frontier = nxt
        if not frontier:
            break
    return ("stable", None)


# --- verdicts -------------------------------------------------------------------


def _fragment_split(state: BlockchainState, delta: Iterable[Account]) -> tuple:
    delta_accs = frozenset(delta) & state.deployed
    gamma_accs = state.deployed - delta_accs
    return gamma_accs, delta_accs


def nonint(state: BlockchainState, delta: Iterable[Account], prices: PriceMap,
           budget: SearchBudget = SearchBudget()) -> Verdict:
    """Non-interference at the given adversary wealth: unrestricted vs
    delta-restricted extractable loss of the delta contracts must agree.
    The restricted value never exceeds the unrestricted one, so only a
    strict unrestricted excess falsifies."""
    if not check_well_formed(state):
        raise ValueError("nonint: composed state is not well-formed")
    gamma, delta_accs = _fragment_split(state, delta)

    if token_independent(state, gamma, delta_accs, budget):
        if contract_independent(state, gamma, delta_accs):
            return Verdict(True, JUST_CONTRACT_INDEP,
                           note="token and contract independent")
        status, _ = stable_wrt_adversary(state, gamma, delta_accs, prices, budget)
        if status == "stable":
            return Verdict(True, JUST_STABLE,
                           note="token independent and context stable")

    unrestricted = lmev(state, delta_accs, None, prices, budget)
    if unrestricted.value == 0 and unrestricted.complete:
        return Verdict(True, JUST_ZERO_MEV, unrestricted.value, None,
                       complete=True, note="nothing extractable from the new contracts")
    restricted = lmev(state, delta_accs, delta_accs, prices, budget)
    if unrestricted.value > restricted.value:
        return Verdict(False, JUST_COUNTEREXAMPLE, unrestricted.value,
                       restricted.value, unrestricted.witness,
                       complete=unrestricted.complete and restricted.complete)
    complete = unrestricted.complete and restricted.complete
    return Verdict(True if complete else None, JUST_SEARCH,
                   unrestricted.value, restricted.value, complete=complete,
                   note="" if complete else "no gap found within budget")


def richnonint(state: BlockchainState, delta: Iterable[Account], prices: PriceMap,
               budget: SearchBudget = SearchBudget()) -> Verdict:
    """Wealth-independent non-interference: the wealthy-adversary values of
    the delta contracts, unrestricted vs delta-restricted, must agree."""
    if not check_well_formed(state):
        raise ValueError("richnonint: composed state is not well-formed")
    gamma, delta_accs = _fragment_split(state, delta)

    if contract_independent(state, gamma, delta_accs):
        return Verdict(True, JUST_CONTRACT_INDEP, note="disjoint dependency cones")
    status, _ = stable_wrt_adversary(state, gamma, delta_accs, prices, budget,
                                     wealthy=True)
    if status == "stable":
        return Verdict(True, JUST_STABLE,
                       note="context observations unchanged by adversary moves")

    unrestricted = rlmev(state, delta_accs, None, prices, budget)
    if unrestricted.value == 0 and unrestricted.complete:
        return Verdict(True, JUST_ZERO_MEV, unrestricted.value, None,
                       complete=True, note="nothing extractable from the new contracts")
    restricted = rlmev(state, delta_accs, delta_accs, prices, budget)
    if unrestricted.value > restricted.value:
        return Verdict(False, JUST_COUNTEREXAMPLE, unrestricted.value,
                       restricted.value, unrestricted.witness,
                       complete=unrestricted.complete and restricted.complete)
    complete = unrestricted.complete and restricted.complete
    return Verdict(True if complete else None, JUST_SEARCH,
                   unrestricted.value, restricted.value, complete=complete,
                   note="" if complete else "no gap found within budget")


def epsilon_composable(state: BlockchainState, delta: Iterable[Account],
                       epsilon: Fraction, prices: PriceMap,
                       budget: SearchBudget = SearchBudget()) -> Verdict:
    """Whole-state criterion: deploying delta must not raise the global
    extractable value by more than a (1 + epsilon) factor.  Searched values
    are lower bounds, so "violated" is budget-certified while "holds" is
    budget-relative unless both sides are complete."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    if not check_well_formed(state):
        raise ValueError("epsilon_composable: composed state is not well-formed")
    _, delta_accs = _fragment_split(state, delta)
    baseline_state = without_contracts(state, delta_accs)
    lhs = global_mev(state, prices, budget)
    rhs = global_mev(baseline_state, prices, budget)
    ok = lhs.value <= (1 + epsilon) * rhs.value
    complete = lhs.complete and rhs.complete
    if ok:
        return Verdict(True, JUST_SEARCH, lhs.value, rhs.value, complete=complete,
                       note="" if complete else "holds at the searched budget")
    return Verdict(False, JUST_COUNTEREXAMPLE, lhs.value, rhs.value,
                   lhs.witness, complete=complete)


# --- stripping ---------------------------------------------------------------------


@dataclass(frozen=True)
class StrippingReport:
    status: str                     # "verified" | "mismatch" | "hypothesis-not-met"
    reason: str
    full_value: Optional[Fraction] = None
    stripped_value: Optional[Fraction] = None


def verify_stripping(state: BlockchainState, observed: Iterable[Account],
                     restriction, prices: PriceMap,
                     budget: SearchBudget = SearchBudget()) -> StrippingReport:
    """Check that dropping non-dependencies of the observed contracts
    preserves the wealthy-adversary value.

    That preservation is guaranteed when the boundary contracts (those both
    in the observed closure and reachable from the restriction outside it)
    are sender-agnostic and themselves callable; when the hypothesis fails
    the report says so instead of claiming a boolean, but still carries both
    values so the gap can be inspected.
    """
    obs = frozenset(observed) & state.deployed
    restr_universe = state.deployed if restriction is None else frozenset(restriction)
    obs_closure = deps(obs, state)
    outside = restr_universe - obs_closure
    boundary = obs_closure & (deps(outside, state) if outside else frozenset())

    full = rlmev(state, obs, restriction, prices, budget)
    stripped_state = strip(state, obs)
    restr2 = restriction if restriction is None else (
        frozenset(restriction) & stripped_state.deployed)
    stripped = rlmev(stripped_state, obs, restr2, prices, budget)

    not_agnostic = sorted(a.name for a in boundary
                          if not state.codes[a].sender_agnostic)
    uncallable = sorted(a.name for a in boundary - restr_universe)
    if not_agnostic or uncallable:
        reasons = []
        if not_agnostic:
            reasons.append(f"boundary contracts not sender-agnostic: {not_agnostic}")
        if uncallable:
            reasons.append(f"boundary contracts outside the callable set: {uncallable}")
        return StrippingReport("hypothesis-not-met", "; ".join(reasons),
                               full.value, stripped.value)
    if full.value == stripped.value:
        return StrippingReport("verified", "values agree across stripping",
                               full.value, stripped.value)
    return StrippingReport("mismatch", "stripping changed the value",
                           full.value, stripped.value)
