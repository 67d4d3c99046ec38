"""Bounded adversarial search for extractable value.

The engine maximises over traces of adversary-crafted transactions, bounded
by a trace-length budget, with moves proposed by per-contract generators (or
by exhaustive signature-driven enumeration in micro mode).  Values are
certified lower bounds of the unbounded-trace quantities; they are exact
when the result carries ``complete=True``, which happens when the value hits
the wealth upper bound of the observed contracts or when exhaustive mode ran
within its caps.

Invalid transactions are pruned: they cannot change any gain.  The one
exception is a distinguished tick move, generated only when a deployed
contract reads the block height, whose sole effect is advancing the height
through a rolled-back no-op.

Tie-breaking among equal-value witnesses: larger adversary gain first, then
the shortest and lexicographically smallest trace.  This keeps reports
reproducible and makes witnesses prefer traces where the attacker also
banks the damage.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .ledger import (
    Account,
    BlockchainState,
    PriceMap,
    Token,
    Wallet,
    contract_holdings,
    total_supply,
    wealth,
)
from .vm import TICK_METHOD, Transaction, check_well_formed, execute, trace_key

ESCALATION_CAP = 20          # wealthy-adversary wallet doublings before giving up
DEFAULT_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class SearchBudget:
    """Bounds of one search: trace length, amount-grid resolution, mode."""

    max_depth: int = 4
    grid: int = 8
    exhaustive: bool = False
    state_cap: Optional[int] = None
    ceiling: Optional[int] = None   # exhaustive-mode amount ceiling

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.grid < 1:
            raise ValueError("grid must be >= 1")


@dataclass(frozen=True)
class MevResult:
    """An extractable-value figure with the witness trace achieving it."""

    value: Fraction
    witness: tuple
    complete: bool
    budget: SearchBudget
    warning: Optional[str] = None


def _tick_move(state: BlockchainState, targets) -> Optional[Transaction]:
    if not targets or not state.adversary:
        return None
    if not any(state.codes[a].reads_height for a in state.order):
        return None
    origin = min(state.adversary)
    callee = min(targets)
    return Transaction(origin, callee, TICK_METHOD)


def adversary_moves(state: BlockchainState, restriction, budget: SearchBudget) -> tuple:
    """Candidate adversary transactions targeting contracts in ``restriction``
    (None meaning the whole universe), deduplicated and deterministically
    ordered.  Every returned transaction has an adversary origin."""
    deployed = state.deployed
    targets = deployed if restriction is None else (frozenset(restriction) & deployed)
    moves = []
    for acc in state.order:
        if acc not in targets:
            continue
        gen = state.codes[acc].move_generator
        if gen is None:
            continue
        for origin in sorted(state.adversary):
            moves.extend(gen(state, origin, budget))
    tick = _tick_move(state, targets)
    if tick is not None:
        moves.append(tick)
    uniq = {m.key(): m for m in moves}
    return tuple(uniq[k] for k in sorted(uniq))


def default_ceiling(state: BlockchainState) -> int:
    supply = total_supply(state)
    return max([n for _, n in supply.items()] + [3])


def universal_moves(state: BlockchainState, tokens: Sequence[Token],
                    budget: SearchBudget, restriction=None) -> tuple:
    """Exhaustive signature-driven enumeration of adversary transactions.

    Every method of every (restricted) deployed contract is proposed with
    every argument tuple from its declared domains and every attachment up
    to the amount ceiling.  Intended for micro states; guard-only arguments
    declare singleton domains, documented on the signatures themselves.
    """
    ceiling = budget.ceiling if budget.ceiling is not None else default_ceiling(state)
    accounts = tuple(sorted(state.users)) + tuple(state.order)
    deployed = state.deployed
    targets = deployed if restriction is None else (frozenset(restriction) & deployed)
    moves = []
    for acc in state.order:
        if acc not in targets:
            continue
        code = state.codes[acc]
        for mname in sorted(code.methods):
            mdef = code.methods[mname]
            arg_domains = [a.domain(tokens, accounts, ceiling) for a in mdef.args]
            slot_domains = [tuple(s.combos(tokens, ceiling)) for s in mdef.attach]
            for args in itertools.product(*arg_domains):
                for combo in itertools.product(*slot_domains):
                    d: dict = {}
                    for t, n in combo:
                        d[t] = d.get(t, 0) + n
                    attach = Wallet(d)
                    for origin in sorted(state.adversary):
                        moves.append(Transaction(origin, acc, mname, args, attach))
    tick = _tick_move(state, targets)
    if tick is not None:
        moves.append(tick)
    uniq = {m.key(): m for m in moves}
    return tuple(uniq[k] for k in sorted(uniq))


def _trace_order(trace) -> tuple:
    return (len(trace), trace_key(trace))


def _better(cand, best, best_tk):
    """Maximise value, then adversary gain; then prefer the shortest and
    lexicographically smallest trace."""
    if cand[0] != best[0]:
        return cand[0] > best[0]
    if cand[1] != best[1]:
        return cand[1] > best[1]
    ck = _trace_order(cand[2])
    return best_tk is None or ck < best_tk


class _MaxSearch:
    """Shared depth-limited search core (loss or gain objectives)."""

    def __init__(self, state, prices, budget, restriction, use_memo=True):
        self.prices = prices
        self.budget = budget
        self.restriction = restriction
        self.tokens = prices.tokens()
        self.include_height = any(state.codes[a].reads_height for a in state.order)
        self.use_memo = use_memo
        self.memo: dict = {}
        self.moves_cache: dict = {}
        self.cap = budget.state_cap if budget.state_cap is not None else DEFAULT_STATE_CAP
        self.capped = False

    def moves(self, state):
        key = (state.core_key(), state.height) if self.include_height else state.core_key()
        cached = self.moves_cache.get(key)
        if cached is None:
            if self.budget.exhaustive:
                cached = universal_moves(state, self.tokens, self.budget, self.restriction)
            else:
                cached = adversary_moves(state, self.restriction, self.budget)
            if len(self.moves_cache) < self.cap:
                self.moves_cache[key] = cached
        return cached

    def run(self, state, measure):
        """``measure(s) -> (objective, adversary wealth)``, computed once per
        node.  The maximised value of a trace is the end-to-end objective
        increase.  Ties break on adversary gain, then on the shortest and
        lexicographically smallest trace."""
        memo = self.memo

        def best(state, m, k):
            if k == 0:
                return (0, 0, ())
            mkey = ((state.core_key(), state.height, k) if self.include_height
                    else (state.core_key(), k))
            if self.use_memo:
                hit = memo.get(mkey)
                if hit is not None:
                    return hit
            top = (0, 0, ())
            top_tk: Optional[tuple] = (0, ())
            for tx in self.moves(state):
                res = execute(state, tx)
                if not res.valid and tx.method != TICK_METHOD:
                    continue
                nxt = res.state
                m2 = measure(nxt)
                sub = best(nxt, m2, k - 1)
                cand = (m2[0] - m[0] + sub[0],
                        m2[1] - m[1] + sub[1],
                        (tx,) + sub[2])
                if _better(cand, top, top_tk):
                    top = cand
                    top_tk = _trace_order(top[2])
            if self.use_memo:
                if len(memo) < self.cap:
                    memo[mkey] = top
                else:
                    self.capped = True
            return top

        return best(state, measure(state), self.budget.max_depth)


def _prepare_sets(state, observed, restriction):
    deployed = state.deployed
    obs = frozenset(observed) & deployed
    restr = None if restriction is None else frozenset(restriction)
    return obs, restr


def lmev(state: BlockchainState, observed, restriction, prices: PriceMap,
         budget: SearchBudget = SearchBudget(), use_memo: bool = True) -> MevResult:
    """Maximal loss the adversary can inflict on ``observed`` contracts using
    transactions that target only ``restriction`` (None = no restriction).

    A certified lower bound of the unbounded-trace quantity; exact when the
    returned value equals the observed contracts' wealth or in exhaustive
    mode.  The empty trace clamps the value at zero.
    """
    if not check_well_formed(state):
        raise ValueError("lmev: state is not well-formed")
    obs, restr = _prepare_sets(state, observed, restriction)
    obs_t = tuple(sorted(obs))
    adv_t = tuple(sorted(state.adversary))
    upper = wealth(obs_t, state, prices)
    if upper == 0:
        # nothing to lose: exact by the wealth bound
        return MevResult(Fraction(0), (), True, budget)

    engine = _MaxSearch(state, prices, budget, restr, use_memo)

    def measure(s):
        w = wealth(obs_t, s, prices)
        adv = wealth(adv_t, s, prices) if adv_t else 0
        # objective is the observed contracts' loss, so it grows as w falls
        return (-w, adv)

    value, _, witness = engine.run(state, measure)
    value = Fraction(value)
    complete = budget.exhaustive or value == upper
    warning = "memo cap exceeded; search ran unmemoised" if engine.capped else None
    return MevResult(value, witness, complete, budget, warning)


def global_mev(state: BlockchainState, prices: PriceMap,
               budget: SearchBudget = SearchBudget(), use_memo: bool = True) -> MevResult:
    """Maximal adversary gain over bounded traces (no call restriction)."""
    if not check_well_formed(state):
        raise ValueError("global_mev: state is not well-formed")
    adv_t = tuple(sorted(state.adversary))
    # the adversary can only gain what contracts hold; with no adversary
    # accounts there are no craftable transactions at all
    upper = wealth(tuple(state.order), state, prices)
    if upper == 0 or not adv_t:
        return MevResult(Fraction(0), (), True, budget)
    engine = _MaxSearch(state, prices, budget, None, use_memo)

    def measure(s):
        adv = wealth(adv_t, s, prices)
        return (adv, adv)

    value, _, witness = engine.run(state, measure)
    value = Fraction(value)
    complete = budget.exhaustive or value == upper
    warning = "memo cap exceeded; search ran unmemoised" if engine.capped else None
    return MevResult(value, witness, complete, budget, warning)


def rich_wallet(state: BlockchainState, prices: PriceMap, budget: SearchBudget,
                 scale: int) -> Wallet:
    held = contract_holdings(state)
    base = {t: (held.get(t) + budget.grid) * scale for t in prices.tokens()}
    return Wallet({t: n for t, n in base.items() if n})


def with_adversary_wallet(state: BlockchainState, wallet: Wallet) -> BlockchainState:
    """Every adversary account gets ``wallet``; other user wallets are
    dropped (they cannot influence any adversary trace)."""
    adversary = state.adversary or frozenset({Account.user("Madv")})
    users = {a: wallet for a in adversary}
    return BlockchainState(users, state.contracts, state.order, state.codes,
                           state.height, adversary)


def stability_probe(state: BlockchainState, observed, restriction,
                    prices: PriceMap, budget: SearchBudget = SearchBudget()) -> tuple:
    """The escalation ladder underlying the wealthy-adversary value:
    ((scale, value), ...) for adversary wallets scale * W0, doubling until a
    plateau, the wealth bound, or the escalation cap."""
    obs = frozenset(observed) & state.deployed
    upper = wealth(tuple(sorted(obs)), state, prices)
    ladder = []
    prev = None
    scale = 1
    for _ in range(ESCALATION_CAP + 1):
        rich = with_adversary_wallet(state, rich_wallet(state, prices, budget, scale))
        res = lmev(rich, obs, restriction, prices, budget)
        ladder.append((scale, res.value))
        if res.value == upper or (prev is not None and res.value == prev):
            break
        prev = res.value
        scale *= 2
    return tuple(ladder)


def rlmev(state: BlockchainState, observed, restriction, prices: PriceMap,
          budget: SearchBudget = SearchBudget()) -> MevResult:
    """Wealthy-adversary local value: the plateau of the loss under doubling
    adversary wallets, starting from the total contract holdings plus a grid
    headroom.  The plateau exists because the observed contracts' wealth
    bounds the loss and the value is monotone in the adversary's wallet; the
    escalation cap is surfaced as an incomplete result, never trusted."""
    obs = frozenset(observed) & state.deployed
    upper = wealth(tuple(sorted(obs)), state, prices)
    prev: Optional[MevResult] = None
    scale = 1
    for _ in range(ESCALATION_CAP + 1):
        rich = with_adversary_wallet(state, rich_wallet(state, prices, budget, scale))
        res = lmev(rich, obs, restriction, prices, budget)
        if res.value == upper:
            return res
        if prev is not None and res.value == prev.value:
            return prev
        prev = res
        scale *= 2
    assert prev is not None
    return MevResult(prev.value, prev.witness, False, budget,
                     "escalation cap reached without a plateau")
