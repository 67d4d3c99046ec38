"""Deterministic execution semantics for the contract model.

A transaction is a user-signed call to one contract method, optionally
carrying attached tokens.  Execution is all-or-nothing: a failed guard, an
unfunded transfer, a call-depth overflow, an undeployed callee or a failed
deferred final check invalidates the whole transaction, which is then rolled
back.  Valid or not, each top-level transaction advances the block height by
exactly one; a method executing inside transaction ``i`` observes the height
left by transaction ``i - 1``.

Contracts may only call methods of contracts deployed before them and listed
in their declared dependencies, which keeps the call relation a partial
order and rules out reentrancy.  Methods cannot inspect other accounts
except through calls; the only way tokens move is attached transfers and
explicit pays.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .ledger import (
    EMPTY_WALLET,
    Account,
    BlockchainState,
    ContractState,
    PriceMap,
    Scalar,
    Token,
    Wallet,
    wealth,
)

MAX_CALL_DEPTH = 16

# A transaction with this method name is never dispatched; it exists so the
# search layer can advance the block height through a rolled-back no-op.
TICK_METHOD = "__tick__"


class Abort(Exception):
    """Raised inside method bodies to invalidate the enclosing transaction."""


class WellFormednessError(ValueError):
    """Deployment would break the dependency order or name uniqueness."""


class DeployError(ValueError):
    """Constructor aborted or the deployer could not fund the deployment."""


class ContractBugError(RuntimeError):
    """A catalog implementation broke a model rule (not a rollback)."""


def _scalar_key(v: Scalar) -> tuple:
    # total order over mixed-type scalars, for deterministic sorting
    if v is None:
        return (0, 0)
    if isinstance(v, bool):
        return (1, int(v))
    if isinstance(v, int):
        return (2, v)
    if isinstance(v, Fraction):
        return (3, v)
    if isinstance(v, str):
        return (4, v)
    if isinstance(v, Account):
        return (5, (v.kind, v.name))
    if isinstance(v, tuple):
        return (6, tuple(_scalar_key(x) for x in v))
    raise TypeError(f"unsupported scalar: {v!r}")


def _fmt_scalar(v: Scalar) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, Account):
        return v.name
    return repr(v) if isinstance(v, str) else str(v)


@dataclass(frozen=True)
class Transaction:
    """``origin:callee.method(args)`` with tokens attached by the origin."""

    origin: Account
    callee: Account
    method: str
    args: tuple = ()
    attached: Wallet = EMPTY_WALLET

    def __post_init__(self) -> None:
        if not self.origin.is_user:
            raise ValueError("transaction origin must be a user account")
        if not self.callee.is_contract:
            raise ValueError("transaction callee must be a contract account")

    def key(self) -> tuple:
        return (
            self.origin.name,
            self.callee.name,
            self.method,
            tuple(_scalar_key(a) for a in self.args),
            self.attached.items(),
        )

    def label(self) -> str:
        parts = []
        if self.attached:
            parts.append("?" + self.attached.pretty())
        parts.extend(_fmt_scalar(a) for a in self.args)
        return f"{self.origin}:{self.callee}.{self.method}({', '.join(parts)})"

    def __repr__(self) -> str:
        return f"<tx {self.label()}>"


def trace_key(trace: Sequence[Transaction]) -> tuple:
    return tuple(tx.key() for tx in trace)


@dataclass(frozen=True)
class CallContext:
    origin: Account
    sender: Account
    depth: int


# --- method metadata ---------------------------------------------------------
#
# Each method carries a declarative signature used by the exhaustive move
# enumerator (and, independently, by test oracles).  The executor itself only
# needs ``fn``.

@dataclass(frozen=True)
class ArgSpec:
    kind: str            # "int" | "token" | "account" | "choice"
    choices: tuple = ()  # only for kind "choice"

    def domain(self, tokens: Sequence[Token], accounts: Sequence[Account], ceiling: int):
        if self.kind == "choice":
            return self.choices
        if self.kind == "int":
            return tuple(range(ceiling + 1))
        if self.kind == "token":
            return tuple(tokens)
        if self.kind == "account":
            return tuple(accounts)
        raise ValueError(self.kind)


@dataclass(frozen=True)
class AttachSpec:
    tokens: Optional[tuple] = None   # None: any scenario token
    amounts: Optional[tuple] = None  # None: 0..ceiling

    def combos(self, tokens: Sequence[Token], ceiling: int):
        toks = self.tokens if self.tokens is not None else tuple(tokens)
        amts = self.amounts if self.amounts is not None else tuple(range(ceiling + 1))
        for t in toks:
            for n in amts:
                yield (t, n)


@dataclass(frozen=True, eq=False)
class MethodDef:
    name: str
    fn: Callable
    args: tuple = ()     # tuple[ArgSpec, ...]
    attach: tuple = ()   # tuple[AttachSpec, ...]


@dataclass(frozen=True, eq=False)
class ContractCode:
    """Behaviour of one contract: methods, dependencies and search metadata.

    ``move_generator(state, origin, budget)`` proposes candidate adversary
    transactions targeting this contract; it may read the whole state (it is
    engine metadata, not contract code, so the no-inspection rule does not
    apply to it).  ``intok_decl`` / ``outtok_decl`` are declared
    over-approximations of the receivable / sendable token sets; ``None``
    means "unknown, assume every token".  ``calls_out`` lists the
    (dependency name, method) pairs the contract's code may invoke, and
    ``probes`` gives observation probes used by stability checking.
    """

    name: str
    methods: Mapping[str, MethodDef]
    constructor: Optional[MethodDef] = None
    declared_deps: frozenset = frozenset()
    sender_agnostic: bool = True
    intok_decl: Optional[frozenset] = frozenset()
    outtok_decl: Optional[frozenset] = frozenset()
    reads_height: bool = False
    calls_out: frozenset = frozenset()
    move_generator: Optional[Callable] = None
    probes: tuple = ()   # tuple[(method, args, attached wallet)]

    @property
    def account(self) -> Account:
        return Account.contract(self.name)


@dataclass(frozen=True)
class CallRecord:
    """Observation of one call frame: what happened, observable from outside."""

    callee: Account
    method: str
    args: tuple
    attached: Wallet
    sender: Account
    origin: Account
    returned: Scalar
    transfers: tuple   # tuple[(recipient Account, Wallet)]
    aborted: bool


@dataclass(frozen=True)
class ExecResult:
    state: BlockchainState
    valid: bool
    trace_log: tuple = ()


# --- scratch working copy -----------------------------------------------------


class _Scratch:
    """Copy-on-write overlay over a base state, mutated during one transaction."""

    __slots__ = ("base", "uw", "cw", "st", "finals", "log")

    def __init__(self, base: BlockchainState, want_log: bool):
        self.base = base
        self.uw: dict = {}   # Account -> dict[token, int]
        self.cw: dict = {}
        self.st: dict = {}
        self.finals: list = []   # (contract Account, token, minimum)
        self.log: Optional[list] = [] if want_log else None

    # wallet overlays

    def _user(self, acc: Account) -> dict:
        d = self.uw.get(acc)
        if d is None:
            d = dict(self.base.user_wallet(acc).as_dict())
            self.uw[acc] = d
        return d

    def _cwallet(self, acc: Account) -> dict:
        d = self.cw.get(acc)
        if d is None:
            cs = self.base.contracts.get(acc)
            # unknown contract accounts (only reachable by spot-check probes)
            # start empty; freeze() rejects leaks into them
            d = cs.wallet.as_dict() if cs is not None else {}
            self.cw[acc] = d
        return d

    def store_of(self, acc: Account) -> dict:
        d = self.st.get(acc)
        if d is None:
            d = dict(self.base.contracts[acc].store)
            self.st[acc] = d
        return d

    def balance(self, acc: Account, token: Token) -> int:
        if acc.is_contract:
            d = self.cw.get(acc)
            if d is None:
                cs = self.base.contracts.get(acc)
                return cs.wallet.get(token) if cs is not None else 0
            return d.get(token, 0)
        d = self.uw.get(acc)
        if d is None:
            return self.base.user_wallet(acc).get(token)
        return d.get(token, 0)

    def credit(self, acc: Account, wallet: Wallet) -> None:
        if not wallet:
            return
        d = self._cwallet(acc) if acc.is_contract else self._user(acc)
        for tok, n in wallet.items():
            d[tok] = d.get(tok, 0) + n

    def debit(self, acc: Account, wallet: Wallet) -> bool:
        if not wallet:
            return True
        d = self._cwallet(acc) if acc.is_contract else self._user(acc)
        for tok, n in wallet.items():
            if d.get(tok, 0) < n:
                return False
        for tok, n in wallet.items():
            left = d[tok] - n
            if left:
                d[tok] = left
            else:
                del d[tok]
        return True

    def freeze(self, height: int) -> BlockchainState:
        base = self.base
        users = dict(base.users)
        for acc, d in self.uw.items():
            users[acc] = Wallet._from_clean({t: n for t, n in d.items() if n})
        contracts = base.contracts
        if self.cw or self.st:
            contracts = dict(contracts)
            for acc in set(self.cw) | set(self.st):
                if acc not in base.contracts:
                    if any(self.cw.get(acc, {}).values()):
                        raise ContractBugError(f"tokens leaked to undeployed {acc}")
                    continue
                old = base.contracts[acc]
                w = old.wallet
                if acc in self.cw:
                    w = Wallet._from_clean({t: n for t, n in self.cw[acc].items() if n})
                s = self.st.get(acc)
                contracts[acc] = ContractState(w, s if s is not None else old.store)
        return BlockchainState(
            users, contracts, base.order, base.codes, height, base.adversary
        )


class MethodCtx:
    """Execution context handed to contract method bodies.

    This is the whole surface a method may touch: its own balance and store,
    its arguments and attached tokens, explicit token transfers, inner calls
    to declared dependencies, deferred final checks and the block height.
    """

    __slots__ = ("_sc", "_state", "ctx", "self_acc", "args", "attached", "_transfers")

    def __init__(self, sc: _Scratch, state: BlockchainState, ctx: CallContext,
                 self_acc: Account, args: tuple, attached: Wallet):
        self._sc = sc
        self._state = state
        self.ctx = ctx
        self.self_acc = self_acc
        self.args = args
        self.attached = attached
        self._transfers: list = []

    # guards

    def require(self, cond) -> None:
        if not cond:
            raise Abort()

    def abort(self) -> None:
        raise Abort()

    # arguments / attached tokens

    def arg(self, i: int) -> Scalar:
        if i >= len(self.args):
            raise Abort()
        return self.args[i]

    def arg_int(self, i: int) -> int:
        v = self.arg(i)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise Abort()
        return v

    def attached_single(self) -> tuple:
        """(token, amount) of a single-token attachment; aborts otherwise."""
        items = self.attached.items()
        if len(items) != 1:
            raise Abort()
        return items[0]

    # state access (own account only)

    def balance(self, token: Token) -> int:
        return self._sc.balance(self.self_acc, token)

    def store(self, key: str) -> Scalar:
        return self._sc.store_of(self.self_acc)[key]

    def put(self, key: str, value: Scalar) -> None:
        self._sc.store_of(self.self_acc)[key] = value

    @property
    def origin(self) -> Account:
        return self.ctx.origin

    @property
    def sender(self) -> Account:
        return self.ctx.sender

    def height(self) -> int:
        return self._state.height

    # effects

    def pay(self, recipient: Account, amount: int, token: Token) -> None:
        if not isinstance(amount, int) or isinstance(amount, bool) or amount < 0:
            raise ContractBugError(f"bad transfer amount {amount!r}")
        if amount == 0:
            return
        w = Wallet.single(token, amount)
        if not self._sc.debit(self.self_acc, w):
            raise Abort()
        self._sc.credit(recipient, w)
        self._transfers.append((recipient, w))

    def pay_sender(self, amount: int, token: Token) -> None:
        self.pay(self.ctx.sender, amount, token)

    def require_final_min(self, token: Token, minimum: int) -> None:
        self._sc.finals.append((self.self_acc, token, minimum))

    def call(self, callee_name: str, method: str, args: tuple = (),
             attach: Wallet = EMPTY_WALLET) -> Scalar:
        code = self._state.codes[self.self_acc]
        if callee_name not in code.declared_deps:
            raise ContractBugError(
                f"{self.self_acc} calls undeclared dependency {callee_name!r}"
            )
        callee = Account.contract(callee_name)
        if callee not in self._state.contracts:
            raise Abort()
        if self._state.deploy_index(callee) >= self._state.deploy_index(self.self_acc):
            raise ContractBugError(
                f"{self.self_acc} calls {callee_name}, which is not deployed earlier"
            )
        if self.ctx.depth + 1 > MAX_CALL_DEPTH:
            raise Abort()
        if not self._sc.debit(self.self_acc, attach):
            raise Abort()
        self._sc.credit(callee, attach)
        inner = CallContext(self.ctx.origin, self.self_acc, self.ctx.depth + 1)
        return _run_frame(self._sc, self._state, inner, callee, method, tuple(args), attach)


def _run_frame(sc: _Scratch, state: BlockchainState, ctx: CallContext,
               callee: Account, method: str, args: tuple, attached: Wallet) -> Scalar:
    code = state.codes[callee]
    mdef = code.methods.get(method)
    if mdef is None:
        raise Abort()
    mctx = MethodCtx(sc, state, ctx, callee, args, attached)
    try:
        ret = mdef.fn(mctx)
    except Abort:
        if sc.log is not None:
            sc.log.append(CallRecord(callee, method, args, attached, ctx.sender,
                                     ctx.origin, None, (), True))
        raise
    if sc.log is not None:
        sc.log.append(CallRecord(callee, method, args, attached, ctx.sender,
                                 ctx.origin, ret, tuple(mctx._transfers), False))
    return ret


def execute(state: BlockchainState, tx: Transaction, want_log: bool = False) -> ExecResult:
    """Run one top-level transaction; invalidity rolls everything back.

    The block height advances by one either way.
    """
    new_height = state.height + 1

    def invalid(log=()) -> ExecResult:
        return ExecResult(state.with_height(new_height), False, tuple(log))

    if tx.callee not in state.contracts:
        return invalid()
    code = state.codes[tx.callee]
    if tx.method not in code.methods:
        return invalid()

    sc = _Scratch(state, want_log)
    if not sc.debit(tx.origin, tx.attached):
        return invalid()
    sc.credit(tx.callee, tx.attached)
    ctx = CallContext(tx.origin, tx.origin, 1)
    try:
        _run_frame(sc, state, ctx, tx.callee, tx.method, tx.args, tx.attached)
    except Abort:
        return invalid(sc.log or ())
    for acc, token, minimum in sc.finals:
        if sc.balance(acc, token) < minimum:
            return invalid(sc.log or ())
    return ExecResult(sc.freeze(new_height), True, tuple(sc.log or ()))


def execute_trace(state: BlockchainState, trace: Sequence[Transaction],
                  want_log: bool = False) -> ExecResult:
    """Left fold of ``execute``; invalid transactions roll back and the fold
    continues.  ``valid`` is True only when every transaction was valid."""
    all_valid = True
    log: list = []
    for tx in trace:
        res = execute(state, tx, want_log)
        state = res.state
        all_valid = all_valid and res.valid
        log.extend(res.trace_log)
    return ExecResult(state, all_valid, tuple(log))


def gain(accounts: Iterable[Account], state: BlockchainState,
         trace: Sequence[Transaction], prices: PriceMap):
    """Wealth delta of ``accounts`` after firing ``trace`` from ``state``."""
    accs = tuple(accounts)
    end = execute_trace(state, trace).state
    return wealth(accs, end, prices) - wealth(accs, state, prices)


# --- deployment and well-formedness -------------------------------------------


def deploy(state: BlockchainState, code: ContractCode, constructor_args: tuple = (),
           attached: Wallet = EMPTY_WALLET, deployer: Optional[Account] = None) -> BlockchainState:
    """Append a contract in deployment order and run its constructor.

    The deployer funds ``attached``.  Deployment is scenario setup, not a
    traced transaction: the block height does not advance.
    """
    acc = code.account
    if acc in state.contracts:
        raise WellFormednessError(f"contract name {code.name!r} already deployed")
    if any(u.name == code.name for u in state.users):
        raise WellFormednessError(f"name {code.name!r} already used by a user")
    deployed_names = {a.name for a in state.order}
    missing = sorted(code.declared_deps - deployed_names)
    if missing:
        raise WellFormednessError(
            f"contract {code.name!r} depends on undeployed {', '.join(missing)}"
        )
    if deployer is None:
        deployer = Account.user("deployer")
    if not deployer.is_user:
        raise ValueError("deployer must be a user account")

    staged = BlockchainState(
        state.users,
        {**state.contracts, acc: ContractState(EMPTY_WALLET, {})},
        state.order + (acc,),
        {**state.codes, acc: code},
        state.height,
        state.adversary,
    )
    sc = _Scratch(staged, want_log=False)
    if not sc.debit(deployer, attached):
        raise DeployError(f"deployer {deployer} cannot fund {attached.pretty()}")
    sc.credit(acc, attached)
    if code.constructor is not None:
        ctx = CallContext(deployer, deployer, 1)
        mctx = MethodCtx(sc, staged, ctx, acc, tuple(constructor_args), attached)
        try:
            code.constructor.fn(mctx)
        except Abort:
            raise DeployError(f"constructor of {code.name!r} aborted") from None
    for facc, token, minimum in sc.finals:
        if sc.balance(facc, token) < minimum:
            raise DeployError(f"constructor of {code.name!r} failed a final check")
    return sc.freeze(state.height)


def deps(targets: Iterable[Account], state: BlockchainState) -> frozenset:
    """Reflexive-transitive closure of declared dependencies, downward-closed
    under the deployment order."""
    frontier = list(targets)
    seen = set()
    while frontier:
        acc = frontier.pop()
        if acc in seen:
            continue
        if acc not in state.contracts:
            raise ValueError(f"deps: {acc} is not deployed")
        seen.add(acc)
        for name in state.codes[acc].declared_deps:
            frontier.append(Account.contract(name))
    return frozenset(seen)


def check_well_formed(state: BlockchainState) -> bool:
    """Deployment order linearises the dependency relation, every dependency
    is present, and the adversary set is a set of user accounts (the finite
    tokens axiom holds by construction: balances are finite integers)."""
    seen: set = set()
    for acc in state.order:
        code = state.codes.get(acc)
        if code is None or code.name != acc.name:
            return False
        if not all(Account.contract(n) in seen for n in code.declared_deps):
            return False
        seen.add(acc)
    user_names = {u.name for u in state.users}
    if user_names & {a.name for a in state.order}:
        return False
    return all(a in state.users for a in state.adversary)


# --- model-assumption spot checks ----------------------------------------------


def check_wallet_monotonic(state: BlockchainState, tx: Transaction,
                           delta: Mapping[Account, Wallet]) -> bool:
    """Spot check: enriching user wallets by ``delta`` preserves the effect
    of a valid ``tx`` up to the enrichment."""
    base = execute(state, tx)
    if not base.valid:
        raise ValueError("check_wallet_monotonic: tx is invalid in the base state")
    for acc in delta:
        if not acc.is_user:
            raise ValueError("delta must enrich user wallets")
    enriched_users = dict(state.users)
    for acc, w in delta.items():
        enriched_users[acc] = state.user_wallet(acc) + w
    rich = state.replace(users=enriched_users)
    res = execute(rich, tx)
    if not res.valid:
        return False
    expect_users = dict(base.state.users)
    for acc, w in delta.items():
        expect_users[acc] = base.state.user_wallet(acc) + w
    expected = base.state.replace(users=expect_users)
    return res.state == expected


def sender_agnostic_witness(state: BlockchainState, callee: Account, method: str,
                            args: tuple = (), attached: Wallet = EMPTY_WALLET,
                            origin: Optional[Account] = None,
                            senders: Optional[Sequence[Account]] = None) -> Optional[str]:
    """Run one method under several senders (same origin, args, attachment)
    and diff the effects modulo the sender-directed transfer.

    Returns None when every run agrees (the sender-agnostic contract shape)
    or a short description of the first difference.  The attachment is
    granted to the callee directly in each run, emulating an already-paid
    caller, so a phantom contract can stand in as a sender.
    """
    if origin is None:
        origin = min(state.adversary) if state.adversary else Account.user("probe")
    if senders is None:
        # legitimate contract senders are callers, hence deployed after the
        # callee; earlier contracts could collide with store-directed payouts
        idx = state.deploy_index(callee)
        senders = [origin, Account.contract("__probe_sender__")]
        senders += [a for a in state.order if state.deploy_index(a) > idx]

    def run(sender: Account):
        sc = _Scratch(state, want_log=False)
        sc.credit(callee, attached)
        ctx = CallContext(origin, sender, 1)
        aborted = False
        ret: Scalar = None
        try:
            ret = _run_frame(sc, state, ctx, callee, method, tuple(args), attached)
        except Abort:
            aborted = True
        deltas = {}
        for acc, d in list(sc.uw.items()) + list(sc.cw.items()):
            if acc.is_contract and acc in state.contracts:
                before = state.contracts[acc].wallet
            elif acc.is_contract:
                before = EMPTY_WALLET
            else:
                before = state.user_wallet(acc)
            keys = set(d) | {t for t, _ in before.items()}
            diff = tuple(sorted(
                (t, d.get(t, 0) - before.get(t))
                for t in keys
                if d.get(t, 0) != before.get(t)
            ))
            if diff:
                key = "<sender>" if acc == sender else f"{acc.kind}:{acc.name}"
                deltas[key] = diff
        stores = {acc.name: tuple(sorted(d.items())) for acc, d in sc.st.items()}
        return aborted, ret, tuple(sorted(deltas.items())), tuple(sorted(stores.items()))

    runs = [(s, run(s)) for s in senders]
    first_sender, first = runs[0]
    labels = ("aborted", "return value", "token deltas", "store writes")
    for sender, other in runs[1:]:
        if other == first:
            continue
        for name, x, y in zip(labels, first, other):
            if x != y:
                return (f"{name} differ between senders "
                        f"{first_sender} and {sender}: {x!r} vs {y!r}")
    return None
