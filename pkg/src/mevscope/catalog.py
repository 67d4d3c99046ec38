"""Built-in contract catalog.

Each entry builds a ``ContractCode`` from named parameters: token symbols,
integer constants and the instance names of already-deployed dependencies.
Method behaviours are host-coded Python (there is no contract DSL); scenario
files refer to entries by their catalog key.

Every entry also carries the metadata the analysis layers need: a move
generator proposing candidate adversary transactions, declared in/out token
sets, the (dependency, method) pairs its code calls, and observation probes
for stability checking.

Move generators derive amounts only from contract reserves and declared
constants, never from the adversary's wallet.  That makes the proposed move
set invariant under enriching user wallets, which in turn makes the searched
value monotone in the adversary's wealth by construction (wallet-poor
adversaries simply fail to afford some proposals, which the executor rejects
as invalid).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .ledger import Account, Token, Wallet
from .vm import ArgSpec, AttachSpec, ContractCode, MethodDef, Transaction

ZERO_ARG = (ArgSpec("choice", (0,)),)   # guard-only minimum-output argument


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str            # "token" | "int" | "contract" | "user" | "str"
    required: bool = True
    default: object = None


@dataclass(frozen=True)
class CatalogEntry:
    key: str
    summary: str
    params: tuple
    build: Callable[[str, Mapping[str, object]], ContractCode]

    def make(self, name: str, **args) -> ContractCode:
        return self.build(name, args)


def _take(args: Mapping[str, object], params: Sequence[ParamSpec], key: str) -> dict:
    out = {}
    unknown = set(args) - {p.name for p in params}
    if unknown:
        raise ValueError(f"{key}: unknown parameters {sorted(unknown)}")
    for p in params:
        if p.name in args:
            out[p.name] = args[p.name]
        elif p.required:
            raise ValueError(f"{key}: missing parameter {p.name!r}")
        else:
            out[p.name] = p.default
    return out


def _grid_amounts(reserve: int, grid: int) -> list:
    amounts = {1} if reserve > 0 else set()
    for k in range(1, grid + 1):
        a = reserve * k // grid
        if a > 0:
            amounts.add(a)
    return sorted(amounts)


# --- constant-product pool ------------------------------------------------------


def _amm_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _AMM_PARAMS, "amm")
    t0, t1 = p["t0"], p["t1"]
    if t0 == t1:
        raise ValueError("amm: the two pool tokens must differ")
    acc = Account.contract(name)

    def ctor(c):
        c.require(not (set(c.attached.tokens()) - {t0, t1}))

    def add_liq(c):
        # deposit must preserve the reserve ratio; balances include the deposit
        c.require(not (set(c.attached.tokens()) - {t0, t1}))
        x0, x1 = c.attached.get(t0), c.attached.get(t1)
        b0, b1 = c.balance(t0), c.balance(t1)
        c.require(b0 * (b1 - x1) == (b0 - x0) * b1)

    def get_tokens(c):
        return (t0, t1)

    def get_rate(c):
        c.require(len(c.args) == 1)
        t = c.arg(0)
        b0, b1 = c.balance(t0), c.balance(t1)
        if t == t0:
            c.require(b1 > 0)
            return Fraction(b0, b1)
        if t == t1:
            c.require(b0 > 0)
            return Fraction(b1, b0)
        c.abort()

    def swap(c):
        tin, x = c.attached_single()
        ymin = c.arg_int(0)
        if tin == t0:
            tout = t1
        elif tin == t1:
            tout = t0
        else:
            c.abort()
        bin_, bout = c.balance(tin), c.balance(tout)
        c.require(bin_ > 0)
        y = (x * bout) // bin_
        c.require(ymin <= y < bout)
        c.pay_sender(y, tout)

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        moves = []
        for tin in (t0, t1):
            for a in _grid_amounts(cs.wallet.get(tin), budget.grid):
                moves.append(Transaction(origin, acc, "swap", (0,), Wallet.single(tin, a)))
        return moves

    return ContractCode(
        name=name,
        methods={
            "addLiq": MethodDef("addLiq", add_liq,
                                attach=(AttachSpec((t0,)), AttachSpec((t1,)))),
            "getTokens": MethodDef("getTokens", get_tokens),
            "getRate": MethodDef("getRate", get_rate, args=(ArgSpec("token"),)),
            "swap": MethodDef("swap", swap, args=ZERO_ARG,
                              attach=(AttachSpec((t0, t1)),)),
        },
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset({t0, t1}),
        outtok_decl=frozenset({t0, t1}),
        move_generator=gen,
        probes=(
            ("getTokens", (), Wallet()),
            ("getRate", (t0,), Wallet()),
            ("getRate", (t1,), Wallet()),
            ("swap", (0,), Wallet.single(t0, 1)),
            ("swap", (0,), Wallet.single(t1, 1)),
        ),
    )


_AMM_PARAMS = (ParamSpec("t0", "token"), ParamSpec("t1", "token"))


# --- airdrop and fixed-rate exchange --------------------------------------------


def _airdrop_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _AIRDROP_PARAMS, "airdrop")
    tout = p["token"]
    acc = Account.contract(name)

    def ctor(c):
        c.require(not (set(c.attached.tokens()) - {tout}))
        c.put("tout", tout)

    def withdraw(c):
        c.pay_sender(c.balance(tout), tout)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "withdraw"),)

    return ContractCode(
        name=name,
        methods={"withdraw": MethodDef("withdraw", withdraw)},
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tout}),
        move_generator=gen,
        probes=(("withdraw", (), Wallet()),),
    )


_AIRDROP_PARAMS = (ParamSpec("token", "token"),)


def _exchange_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _EXCHANGE_PARAMS, "exchange")
    tout, tin, rate0 = p["tout"], p["tin"], p["rate"]
    if tin == tout:
        raise ValueError("exchange: tin and tout must differ")
    if not isinstance(rate0, int) or rate0 <= 0:
        raise ValueError("exchange: rate must be a positive int")
    acc = Account.contract(name)

    def ctor(c):
        c.require(not (set(c.attached.tokens()) - {tout}))
        c.put("rate", rate0)
        c.put("tout", tout)
        c.put("tin", tin)
        c.put("owner", c.origin)

    def get_tokens(c):
        return (tin, tout)

    def get_rate(c):
        # tolerates an optional token argument, for use as a price oracle
        return c.store("rate")

    def set_rate(c):
        c.require(c.origin == c.store("owner"))
        c.put("rate", c.arg_int(0))

    def swap(c):
        t, x = c.attached_single()
        rate = c.store("rate")
        c.require(t == tin and c.balance(tout) >= x * rate)
        c.pay_sender(x * rate, tout)

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        rate = cs.store["rate"]
        moves = []
        cap = cs.wallet.get(tout) // rate if rate else 0
        for a in _grid_amounts(cap, budget.grid):
            moves.append(Transaction(origin, acc, "swap", (), Wallet.single(tin, a)))
        for v in sorted({0, 1, 2, rate}):
            moves.append(Transaction(origin, acc, "setRate", (v,)))
        return moves

    return ContractCode(
        name=name,
        methods={
            "getTokens": MethodDef("getTokens", get_tokens),
            "getRate": MethodDef("getRate", get_rate,
                                 args=(ArgSpec("choice", (tin,)),)),
            "setRate": MethodDef("setRate", set_rate, args=(ArgSpec("int"),)),
            "swap": MethodDef("swap", swap, attach=(AttachSpec((tin,)),)),
        },
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset({tin}),
        outtok_decl=frozenset({tout}),
        move_generator=gen,
        probes=(
            ("getTokens", (), Wallet()),
            ("getRate", (tin,), Wallet()),
            ("swap", (), Wallet.single(tin, 1)),
        ),
    )


_EXCHANGE_PARAMS = (
    ParamSpec("tout", "token"),
    ParamSpec("tin", "token"),
    ParamSpec("rate", "int"),
)


# --- pot bet against a price oracle ----------------------------------------------


def _bet_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _BET_PARAMS, "bet")
    oracle, tok, rate, deadline = p["oracle"], p["token"], p["rate"], p["deadline"]
    pot_tok = p["pot_token"]
    acc = Account.contract(name)

    def ctor(c):
        c.require(tok != pot_tok)
        c.require(c.call(oracle, "getTokens") == (pot_tok, tok))
        c.put("tok", tok)
        c.put("rate", rate)
        c.put("owner", c.origin)
        c.put("deadline", deadline)
        c.put("player", None)

    def bet(c):
        # the stake must match the pot as it was before this call
        x = c.attached.get(pot_tok)
        c.require(not (set(c.attached.tokens()) - {pot_tok}))
        pot_before = c.balance(pot_tok) - x
        c.require(c.store("player") is None and x == pot_before)
        c.put("player", c.origin)

    def win(c):
        c.require(c.height() <= c.store("deadline") and c.origin == c.store("player"))
        c.require(c.call(oracle, "getRate", (pot_tok,)) > c.store("rate"))
        c.pay(c.store("player"), c.balance(pot_tok), pot_tok)

    def close(c):
        c.require(c.height() > c.store("deadline") and c.origin == c.store("owner"))
        c.pay(c.store("owner"), c.balance(pot_tok), pot_tok)

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        pot = cs.wallet.get(pot_tok)
        moves = [Transaction(origin, acc, "win"), Transaction(origin, acc, "close")]
        moves.append(Transaction(origin, acc, "bet", (), Wallet.single(pot_tok, pot))
                     if pot else Transaction(origin, acc, "bet"))
        return moves

    return ContractCode(
        name=name,
        methods={
            "bet": MethodDef("bet", bet, attach=(AttachSpec((pot_tok,)),)),
            "win": MethodDef("win", win),
            "close": MethodDef("close", close),
        },
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({oracle}),
        intok_decl=frozenset({pot_tok}),
        outtok_decl=frozenset({pot_tok}),
        reads_height=True,
        calls_out=frozenset({(oracle, "getRate"), (oracle, "getTokens")}),
        move_generator=gen,
        probes=(("win", (), Wallet()),),
    )


_BET_PARAMS = (
    ParamSpec("oracle", "contract"),
    ParamSpec("token", "token"),
    ParamSpec("rate", "int"),
    ParamSpec("deadline", "int"),
    ParamSpec("pot_token", "token", required=False, default="ETH"),
)


# --- pool wrappers ---------------------------------------------------------------


def _wrapper_gen(acc: Account, deps: tuple, method: str):
    # amounts come from the reserves of the wrapped pools
    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        store = state.contracts[acc].store
        toks = [v for k, v in sorted(store.items()) if k.startswith("t")]
        moves = []
        for t in toks:
            reserve = max((state.contracts[Account.contract(d)].wallet.get(t)
                           for d in deps if Account.contract(d) in state.contracts),
                          default=0)
            for a in _grid_amounts(reserve, budget.grid):
                moves.append(Transaction(origin, acc, method, (0,), Wallet.single(t, a)))
        return moves
    return gen


def _best_swap_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _TWO_POOL_PARAMS, "best_swap")
    c0, c1 = p["c0"], p["c1"]
    acc = Account.contract(name)

    def ctor(c):
        pair = c.call(c0, "getTokens")
        c.require(pair == c.call(c1, "getTokens"))
        c.put("t0", pair[0])
        c.put("t1", pair[1])

    def get_tokens(c):
        return (c.store("t0"), c.store("t1"))

    def get_rate(c):
        t = c.arg(0)
        return min(c.call(c0, "getRate", (t,)), c.call(c1, "getRate", (t,)))

    def swap(c):
        t, x = c.attached_single()
        ymin = c.arg_int(0)
        t0, t1 = c.store("t0"), c.store("t1")
        c.require(t in (t0, t1))
        tout = t1 if t == t0 else t0
        # route to the pool with the lower (better) rate for the input token
        target = c0 if c.call(c0, "getRate", (t,)) < c.call(c1, "getRate", (t,)) else c1
        c.call(target, "swap", (ymin,), Wallet.single(t, x))
        c.pay_sender(c.balance(tout), tout)

    return ContractCode(
        name=name,
        methods={
            "getTokens": MethodDef("getTokens", get_tokens),
            "getRate": MethodDef("getRate", get_rate, args=(ArgSpec("token"),)),
            "swap": MethodDef("swap", swap, args=ZERO_ARG, attach=(AttachSpec(None),)),
        },
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({c0, c1}),
        intok_decl=None,
        outtok_decl=None,
        calls_out=frozenset({(d, m) for d in (c0, c1)
                             for m in ("getTokens", "getRate", "swap")}),
        move_generator=_wrapper_gen(acc, (c0, c1), "swap"),
        probes=(("getTokens", (), Wallet()),),
    )


def _swap_router_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _TWO_POOL_PARAMS, "swap_router")
    c0, c1 = p["c0"], p["c1"]
    acc = Account.contract(name)

    def ctor(c):
        t0, t1 = c.call(c0, "getTokens")
        t1b, t2 = c.call(c1, "getTokens")
        c.require(t1 == t1b)
        c.put("t0", t0)
        c.put("t1", t1)
        c.put("t2", t2)

    def get_tokens(c):
        return (c.store("t0"), c.store("t2"))

    def get_rate(c):
        t = c.arg(0)
        t0, t1, t2 = c.store("t0"), c.store("t1"), c.store("t2")
        # composed end-to-end rate across the two pools
        if t == t0:
            return c.call(c0, "getRate", (t0,)) * c.call(c1, "getRate", (t1,))
        if t == t2:
            return c.call(c1, "getRate", (t2,)) * c.call(c0, "getRate", (t1,))
        c.abort()

    def swap(c):
        t, x = c.attached_single()
        ymin = c.arg_int(0)
        t0, t1, t2 = c.store("t0"), c.store("t1"), c.store("t2")
        if t == t0:
            c.call(c0, "swap", (0,), Wallet.single(t0, x))
            c.call(c1, "swap", (0,), Wallet.single(t1, c.balance(t1)))
            c.require(c.balance(t2) >= ymin)
            c.pay_sender(c.balance(t2), t2)
        elif t == t2:
            c.call(c1, "swap", (0,), Wallet.single(t2, x))
            c.call(c0, "swap", (0,), Wallet.single(t1, c.balance(t1)))
            c.require(c.balance(t0) >= ymin)
            c.pay_sender(c.balance(t0), t0)
        else:
            c.abort()

    return ContractCode(
        name=name,
        methods={
            "getTokens": MethodDef("getTokens", get_tokens),
            "getRate": MethodDef("getRate", get_rate, args=(ArgSpec("token"),)),
            "swap": MethodDef("swap", swap, args=ZERO_ARG, attach=(AttachSpec(None),)),
        },
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({c0, c1}),
        intok_decl=None,
        outtok_decl=None,
        calls_out=frozenset({(d, m) for d in (c0, c1)
                             for m in ("getTokens", "getRate", "swap")}),
        move_generator=_wrapper_gen(acc, (c0, c1), "swap"),
        probes=(("getTokens", (), Wallet()),),
    )


_TWO_POOL_PARAMS = (ParamSpec("c0", "contract"), ParamSpec("c1", "contract"))


# --- lending pool and arbitrage wrappers ------------------------------------------


def _lp_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _LP_PARAMS, "lending_pool")
    tok = p["token"]
    cmin, rliq, imul, fee = p["cmin"], p["rliq"], p["imul"], p["fee"]
    oracle_user = p["oracle"]
    if rliq <= 1 or imul <= 1:
        raise ValueError("lending_pool: rliq and imul must exceed 1")
    acc = Account.contract(name)

    def mint_key(a: Account) -> str:
        return f"mint:{a.name}"

    def debt_key(a: Account) -> str:
        return f"debt:{a.name}"

    def sget(c, key):
        try:
            return c.store(key)
        except KeyError:
            return 0

    def rate_x(c, n):
        # mint-token exchange rate at pool balance n
        m = c.store("M")
        if m == 0:
            return Fraction(1)
        return Fraction(n + c.store("D") * c.store("Ir"), m)

    def coll(c, a, n):
        # collateralization of account a; None encodes "no debt"
        debt = sget(c, debt_key(a))
        if debt == 0:
            return None
        return (sget(c, mint_key(a)) * rate_x(c, n)) / (debt * c.store("Ir"))

    def ctor(c):
        c.require(not (set(c.attached.tokens()) - {tok}))
        c.put("Cmin", cmin)
        c.put("Rliq", rliq)
        c.put("Ir", 1)
        c.put("Imul", imul)
        c.put("D", Fraction(0))
        c.put("M", 0)
        c.put("fee", fee)

    def get_token(c):
        return tok

    def deposit(c):
        t, x = c.attached_single()
        c.require(t == tok)
        x_rate = rate_x(c, c.balance(tok) - x)
        c.require(x_rate > 0)
        y = int(Fraction(x) / x_rate)
        c.put(mint_key(c.origin), sget(c, mint_key(c.origin)) + y)
        c.put("M", c.store("M") + y)

    def borrow(c):
        x = c.arg_int(0)
        c.require(c.balance(tok) > x)
        c.pay_sender(x, tok)
        ir = c.store("Ir")
        c.put(debt_key(c.origin), sget(c, debt_key(c.origin)) + Fraction(x, ir))
        c.put("D", c.store("D") + Fraction(x, ir))
        cr = coll(c, c.origin, c.balance(tok))
        c.require(cr is None or cr >= c.store("Cmin"))

    def accrue(c):
        c.require(c.origin == Account.user(oracle_user))
        c.put("Ir", c.store("Ir") * c.store("Imul"))

    def repay(c):
        t, x = c.attached_single()
        c.require(t == tok)
        ir = c.store("Ir")
        debt = sget(c, debt_key(c.origin))
        c.require(debt * ir >= x)
        c.put(debt_key(c.origin), debt - Fraction(x, ir))
        c.put("D", c.store("D") - Fraction(x, ir))

    def redeem(c):
        x = c.arg_int(0)
        y = int(x * rate_x(c, c.balance(tok)))
        c.require(sget(c, mint_key(c.origin)) >= x and c.balance(tok) >= y)
        c.pay_sender(y, tok)
        c.put(mint_key(c.origin), c.store(mint_key(c.origin)) - x)
        c.put("M", c.store("M") - x)
        cr = coll(c, c.origin, c.balance(tok))
        c.require(cr is None or cr >= c.store("Cmin"))

    def liquidate(c):
        t, x = c.attached_single()
        c.require(t == tok)
        b = c.arg(0)
        c.require(isinstance(b, Account))
        x_rate = rate_x(c, c.balance(tok) - x)
        c.require(x_rate > 0)
        y = int(Fraction(x) / x_rate * c.store("Rliq"))
        ir = c.store("Ir")
        debt_b = sget(c, debt_key(b))
        cr_b = coll(c, b, c.balance(tok) - x)
        c.require(debt_b * ir > x and cr_b is not None and cr_b < c.store("Cmin"))
        c.require(sget(c, mint_key(b)) >= y)
        c.put(mint_key(c.origin), sget(c, mint_key(c.origin)) + y)
        c.put(mint_key(b), c.store(mint_key(b)) - y)
        c.put(debt_key(b), debt_b - Fraction(x, ir))
        c.put("D", c.store("D") - Fraction(x, ir))
        cr_after = coll(c, b, c.balance(tok))
        c.require(cr_after is not None and cr_after <= c.store("Cmin"))

    def flash_loan(c):
        x = c.arg_int(0)
        old = c.balance(tok)
        c.pay_sender(x, tok)
        c.require_final_min(tok, old + c.store("fee"))

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        amounts = _grid_amounts(cs.wallet.get(tok), budget.grid)
        moves = [Transaction(origin, acc, "accrue")]
        for a in amounts:
            moves.append(Transaction(origin, acc, "deposit", (), Wallet.single(tok, a)))
            moves.append(Transaction(origin, acc, "borrow", (a,)))
            moves.append(Transaction(origin, acc, "repay", (), Wallet.single(tok, a)))
            moves.append(Transaction(origin, acc, "redeem", (a,)))
            moves.append(Transaction(origin, acc, "flashLoan", (a,)))
        debtors = sorted(k.split(":", 1)[1] for k, v in cs.store.items()
                         if k.startswith("debt:") and v)
        for dname in debtors:
            for a in amounts:
                moves.append(Transaction(origin, acc, "liquidate",
                                         (Account.user(dname),), Wallet.single(tok, a)))
        return moves

    return ContractCode(
        name=name,
        methods={
            "getToken": MethodDef("getToken", get_token),
            "deposit": MethodDef("deposit", deposit, attach=(AttachSpec((tok,)),)),
            "borrow": MethodDef("borrow", borrow, args=(ArgSpec("int"),)),
            "accrue": MethodDef("accrue", accrue),
            "repay": MethodDef("repay", repay, attach=(AttachSpec((tok,)),)),
            "redeem": MethodDef("redeem", redeem, args=(ArgSpec("int"),)),
            "liquidate": MethodDef("liquidate", liquidate,
                                   args=(ArgSpec("account"),),
                                   attach=(AttachSpec((tok,)),)),
            "flashLoan": MethodDef("flashLoan", flash_loan, args=(ArgSpec("int"),)),
        },
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset({tok}),
        outtok_decl=frozenset({tok}),
        move_generator=gen,
        probes=(("getToken", (), Wallet()), ("borrow", (1,), Wallet()),
                ("flashLoan", (1,), Wallet()),
                ("repay", (), Wallet.single(tok, 1))),
    )


_LP_PARAMS = (
    ParamSpec("token", "token"),
    ParamSpec("cmin", "int", required=False, default=2),
    ParamSpec("rliq", "int", required=False, default=2),
    ParamSpec("imul", "int", required=False, default=2),
    ParamSpec("fee", "int", required=False, default=0),
    ParamSpec("oracle", "user", required=False, default="Oracle"),
)


def _arb_gen(acc: Account, lp: str):
    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        lp_acc = Account.contract(lp)
        reserve = (state.contracts[lp_acc].wallet.get(state.contracts[acc].store["t0"])
                   if lp_acc in state.contracts else 0)
        return tuple(Transaction(origin, acc, "arbitrage", (a,))
                     for a in _grid_amounts(reserve, budget.grid))
    return gen


def _lp_arbitrage_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _ARB_PARAMS, "lp_arbitrage")
    c0, c1, lp = p["c0"], p["c1"], p["lp"]
    acc = Account.contract(name)

    def ctor(c):
        t0, t1 = c.call(c0, "getTokens")
        c.require(c.call(lp, "getToken") == t0)
        c.require(c.call(c1, "getTokens") == (t0, t1))
        c.put("t0", t0)
        c.put("t1", t1)

    def arbitrage(c):
        x = c.arg_int(0)
        t0, t1 = c.store("t0"), c.store("t1")
        c.call(lp, "borrow", (x,))
        c.call(c0, "swap", (0,), Wallet.single(t0, x))
        c.call(c1, "swap", (0,), Wallet.single(t1, c.balance(t1)))
        c.call(lp, "repay", (), Wallet.single(t0, x))
        c.require(c.balance(t0) > 0)
        c.pay_sender(c.balance(t0), t0)

    return ContractCode(
        name=name,
        methods={"arbitrage": MethodDef("arbitrage", arbitrage, args=(ArgSpec("int"),))},
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({c0, c1, lp}),
        intok_decl=None,
        outtok_decl=None,
        calls_out=frozenset({(lp, "getToken"), (lp, "borrow"), (lp, "repay"),
                             (c0, "getTokens"), (c0, "swap"),
                             (c1, "getTokens"), (c1, "swap")}),
        move_generator=_arb_gen(acc, lp),
    )


def _flash_arbitrage_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _ARB_PARAMS, "flash_loan_arbitrage")
    c0, c1, lp = p["c0"], p["c1"], p["lp"]
    acc = Account.contract(name)

    def ctor(c):
        t0, t1 = c.call(c0, "getTokens")
        c.require(c.call(lp, "getToken") == t0)
        c.require(c.call(c1, "getTokens") == (t0, t1))
        c.put("t0", t0)
        c.put("t1", t1)

    def arbitrage(c):
        x = c.arg_int(0)
        t0, t1 = c.store("t0"), c.store("t1")
        c.call(lp, "flashLoan", (x,))
        c.call(c0, "swap", (0,), Wallet.single(t0, x))
        c.call(c1, "swap", (0,), Wallet.single(t1, c.balance(t1)))
        c.pay(Account.contract(lp), x, t0)   # repay the flash loan directly
        c.pay_sender(c.balance(t0), t0)
        # the lender's deferred balance check fires when the transaction ends

    return ContractCode(
        name=name,
        methods={"arbitrage": MethodDef("arbitrage", arbitrage, args=(ArgSpec("int"),))},
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({c0, c1, lp}),
        intok_decl=None,
        outtok_decl=None,
        calls_out=frozenset({(lp, "getToken"), (lp, "flashLoan"),
                             (c0, "getTokens"), (c0, "swap"),
                             (c1, "getTokens"), (c1, "swap")}),
        move_generator=_arb_gen(acc, lp),
    )


_ARB_PARAMS = (
    ParamSpec("c0", "contract"),
    ParamSpec("c1", "contract"),
    ParamSpec("lp", "contract"),
)


# --- small stateful vaults used by the verdict test corpus -----------------------
#
# These tiny contracts exercise the corner cases of the composability
# relations: shared one-shot latches, gated payouts, proxies and fixed-rate
# relays.  Argument proposals for latch setters come from {0, 1, 2} plus any
# integers already stored.


def _latch_args(cs) -> list:
    vals = {0, 1, 2}
    if cs is not None:
        vals |= {v for v in cs.store.values()
                 if isinstance(v, int) and not isinstance(v, bool)}
    return sorted(vals)


def _cell_build(name: str, args: Mapping[str, object]) -> ContractCode:
    _take(args, (), "cell")
    acc = Account.contract(name)

    def ctor(c):
        c.put("x", 0)

    def get(c):
        return c.store("x")

    def set_(c):
        c.put("x", c.arg_int(0))

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        return tuple(Transaction(origin, acc, "set", (v,)) for v in _latch_args(cs))

    return ContractCode(
        name=name,
        methods={"get": MethodDef("get", get),
                 "set": MethodDef("set", set_, args=(ArgSpec("int"),))},
        constructor=MethodDef("constructor", ctor),
        move_generator=gen,
        probes=(("get", (), Wallet()),),
    )


def _once_cell_build(name: str, args: Mapping[str, object]) -> ContractCode:
    _take(args, (), "once_cell")
    acc = Account.contract(name)

    def ctor(c):
        c.put("x", 0)

    def get(c):
        return c.store("x")

    def set_(c):
        # write-once: later writes are silently ignored
        if c.store("x") == 0:
            c.put("x", c.arg_int(0))

    def gen(state, origin, budget):
        cs = state.contracts.get(acc)
        if cs is None:
            return ()
        return tuple(Transaction(origin, acc, "set", (v,)) for v in _latch_args(cs))

    return ContractCode(
        name=name,
        methods={"get": MethodDef("get", get),
                 "set": MethodDef("set", set_, args=(ArgSpec("int"),))},
        constructor=MethodDef("constructor", ctor),
        move_generator=gen,
        probes=(("get", (), Wallet()),),
    )


def _cell_proxy_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("cell", "contract"),), "cell_proxy")
    cell = p["cell"]
    acc = Account.contract(name)

    def get_x(c):
        return c.call(cell, "get")

    def set_x(c):
        c.call(cell, "set", (c.arg_int(0),))

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        cs = state.contracts.get(Account.contract(cell))
        return tuple(Transaction(origin, acc, "set_x", (v,)) for v in _latch_args(cs))

    return ContractCode(
        name=name,
        methods={"get_x": MethodDef("get_x", get_x),
                 "set_x": MethodDef("set_x", set_x, args=(ArgSpec("int"),))},
        declared_deps=frozenset({cell}),
        calls_out=frozenset({(cell, "get"), (cell, "set")}),
        move_generator=gen,
        probes=(("get_x", (), Wallet()),),
    )


def _gated_drop_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _GATED_PARAMS, "gated_drop")
    cell, tok, amount = p["cell"], p["token"], p["amount"]
    acc = Account.contract(name)

    def f(c):
        c.require(c.call(cell, "get") == 1)
        c.pay_sender(amount, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f"),)

    return ContractCode(
        name=name,
        methods={"f": MethodDef("f", f)},
        declared_deps=frozenset({cell}),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        calls_out=frozenset({(cell, "get")}),
        move_generator=gen,
    )


_GATED_PARAMS = (
    ParamSpec("cell", "contract"),
    ParamSpec("token", "token"),
    ParamSpec("amount", "int", required=False, default=1),
)


def _gated_vault_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("cell", "contract"), ParamSpec("token", "token")),
              "gated_vault")
    cell, tok = p["cell"], p["token"]
    acc = Account.contract(name)

    def f(c):
        c.require(c.call(cell, "get") == 1)
        c.pay_sender(c.balance(tok), tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f"),)

    return ContractCode(
        name=name,
        methods={"f": MethodDef("f", f)},
        declared_deps=frozenset({cell}),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        calls_out=frozenset({(cell, "get")}),
        move_generator=gen,
    )


def _paid_cell_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("token", "token"),), "paid_cell")
    tok = p["token"]
    acc = Account.contract(name)

    def ctor(c):
        c.put("x", 0)

    def get(c):
        return c.store("x")

    def set_(c):
        t, x = c.attached_single()
        c.require(t == tok and x == 1)
        c.put("x", 1)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "set", (), Wallet.single(tok, 1)),)

    return ContractCode(
        name=name,
        methods={"get": MethodDef("get", get),
                 "set": MethodDef("set", set_, attach=(AttachSpec((tok,), (1,)),))},
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset({tok}),
        outtok_decl=frozenset(),
        move_generator=gen,
        probes=(("get", (), Wallet()),),
    )


def _dropper_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("var", "contract"), ParamSpec("token", "token")),
              "dropper")
    var, tok = p["var"], p["token"]
    acc = Account.contract(name)

    def ctor(c):
        c.put("b", 0)

    def drop2(c):
        c.require(c.store("b") == 0 and c.call(var, "get") == 1)
        c.put("b", 1)
        c.pay_sender(2, tok)

    def drop3(c):
        c.require(c.store("b") == 0 and c.call(var, "get") == 0)
        c.put("b", 1)
        c.call(var, "set", (2,))
        c.pay_sender(3, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "drop2"), Transaction(origin, acc, "drop3"))

    return ContractCode(
        name=name,
        methods={"drop2": MethodDef("drop2", drop2),
                 "drop3": MethodDef("drop3", drop3)},
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({var}),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        calls_out=frozenset({(var, "get"), (var, "set")}),
        move_generator=gen,
    )


def _mutex_vault_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("token", "token"),), "mutex_vault")
    tok = p["token"]
    acc = Account.contract(name)

    def ctor(c):
        c.require(c.attached.get(tok) == 1 and len(c.attached.items()) == 1)
        c.put("n", 0)

    def f1(c):
        c.require(c.store("n") == 0)
        c.put("n", 1)
        c.pay_sender(1, tok)

    def f2(c):
        c.require(c.store("n") == 0)
        c.put("n", 2)

    def f3(c):
        return c.store("n")

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f1"), Transaction(origin, acc, "f2"))

    return ContractCode(
        name=name,
        methods={"f1": MethodDef("f1", f1), "f2": MethodDef("f2", f2),
                 "f3": MethodDef("f3", f3)},
        constructor=MethodDef("constructor", ctor),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        move_generator=gen,
        probes=(("f3", (), Wallet()),),
    )


def _mutex_follower_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, (ParamSpec("c1", "contract"), ParamSpec("token", "token")),
              "mutex_follower")
    c1, tok = p["c1"], p["token"]
    acc = Account.contract(name)

    def ctor(c):
        c.require(c.attached.get(tok) == 1 and len(c.attached.items()) == 1)

    def g(c):
        c.require(c.call(c1, "f3") == 2)
        c.pay_sender(1, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "g"),)

    return ContractCode(
        name=name,
        methods={"g": MethodDef("g", g)},
        constructor=MethodDef("constructor", ctor),
        declared_deps=frozenset({c1}),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        calls_out=frozenset({(c1, "f3")}),
        move_generator=gen,
    )


def _faucet_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _FAUCET_PARAMS, "faucet")
    tok, amount = p["token"], p["amount"]
    acc = Account.contract(name)

    def f(c):
        c.pay_sender(amount, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f"),)

    return ContractCode(
        name=name,
        methods={"f": MethodDef("f", f)},
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        move_generator=gen,
        probes=(("f", (), Wallet()),),
    )


_FAUCET_PARAMS = (ParamSpec("token", "token"), ParamSpec("amount", "int"))


def _gated_faucet_build(name: str, args: Mapping[str, object]) -> ContractCode:
    # expected_sender is a stored reference, not a call edge, so it may name
    # a contract deployed later
    p = _take(args, _FAUCET_PARAMS + (ParamSpec("expected_sender", "str"),),
              "gated_faucet")
    tok, amount, expected = p["token"], p["amount"], p["expected_sender"]
    acc = Account.contract(name)

    def f(c):
        c.require(c.sender == Account.contract(expected))
        c.pay_sender(amount, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f"),)

    return ContractCode(
        name=name,
        methods={"f": MethodDef("f", f)},
        sender_agnostic=False,
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        move_generator=gen,
        probes=(("f", (), Wallet()),),
    )


def _chained_faucet_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _FAUCET_PARAMS + (ParamSpec("dep", "contract"),),
              "chained_faucet")
    tok, amount, dep = p["token"], p["amount"], p["dep"]
    acc = Account.contract(name)

    def g(c):
        c.call(dep, "f")
        c.pay_sender(amount, tok)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "g"),)

    return ContractCode(
        name=name,
        methods={"g": MethodDef("g", g)},
        declared_deps=frozenset({dep}),
        intok_decl=frozenset(),
        outtok_decl=frozenset({tok}),
        calls_out=frozenset({(dep, "f")}),
        move_generator=gen,
    )


def _relay_build(name: str, args: Mapping[str, object]) -> ContractCode:
    p = _take(args, _RELAY_PARAMS, "relay")
    tin, n_in, tout, n_out = p["tin"], p["amount_in"], p["tout"], p["amount_out"]
    acc = Account.contract(name)

    def f(c):
        c.require(c.attached == Wallet.single(tin, n_in))
        c.pay_sender(n_out, tout)

    def gen(state, origin, budget):
        if acc not in state.contracts:
            return ()
        return (Transaction(origin, acc, "f", (), Wallet.single(tin, n_in)),)

    return ContractCode(
        name=name,
        methods={"f": MethodDef("f", f, attach=(AttachSpec((tin,), (n_in,)),))},
        intok_decl=frozenset({tin}),
        outtok_decl=frozenset({tout}),
        move_generator=gen,
    )


_RELAY_PARAMS = (
    ParamSpec("tin", "token"),
    ParamSpec("amount_in", "int"),
    ParamSpec("tout", "token"),
    ParamSpec("amount_out", "int"),
)


# --- public registry ---------------------------------------------------------


def amm() -> CatalogEntry:
    return CatalogEntry("amm", "constant-product two-token pool",
                        _AMM_PARAMS, _amm_build)


def airdrop() -> CatalogEntry:
    return CatalogEntry("airdrop", "anyone withdraws the whole balance",
                        _AIRDROP_PARAMS, _airdrop_build)


def exchange() -> CatalogEntry:
    return CatalogEntry("exchange", "fixed-rate swap with an owner-set rate",
                        _EXCHANGE_PARAMS, _exchange_build)


def bet() -> CatalogEntry:
    return CatalogEntry("bet", "pot bet paid out on an oracle rate threshold",
                        _BET_PARAMS, _bet_build)


def best_swap() -> CatalogEntry:
    return CatalogEntry("best_swap", "routes a swap to the better of two pools",
                        _TWO_POOL_PARAMS, _best_swap_build)


def swap_router() -> CatalogEntry:
    return CatalogEntry("swap_router", "chains two pools to swap across a middle token",
                        _TWO_POOL_PARAMS, _swap_router_build)


def lending_pool() -> CatalogEntry:
    return CatalogEntry("lending_pool",
                        "deposit/borrow pool with accrual, liquidation and flash loans",
                        _LP_PARAMS, _lp_build)


def lp_arbitrage() -> CatalogEntry:
    return CatalogEntry("lp_arbitrage",
                        "borrows, round-trips two pools and keeps the spread",
                        _ARB_PARAMS, _lp_arbitrage_build)


def flash_loan_arbitrage() -> CatalogEntry:
    return CatalogEntry("flash_loan_arbitrage",
                        "same round-trip funded by an uncollateralised flash loan",
                        _ARB_PARAMS, _flash_arbitrage_build)


def counterexample_contracts() -> tuple:
    """Entries for the small vaults used to probe the composability relations."""
    return (
        CatalogEntry("cell", "settable integer cell", (), _cell_build),
        CatalogEntry("once_cell", "write-once integer cell", (), _once_cell_build),
        CatalogEntry("cell_proxy", "forwards get/set to a cell",
                     (ParamSpec("cell", "contract"),), _cell_proxy_build),
        CatalogEntry("gated_drop", "pays a fixed amount while a cell reads 1",
                     _GATED_PARAMS, _gated_drop_build),
        CatalogEntry("gated_vault", "pays its whole balance while a cell reads 1",
                     (ParamSpec("cell", "contract"), ParamSpec("token", "token")),
                     _gated_vault_build),
        CatalogEntry("paid_cell", "cell set to 1 against a one-token payment",
                     (ParamSpec("token", "token"),), _paid_cell_build),
        CatalogEntry("dropper", "one-shot payout branching on a shared cell",
                     (ParamSpec("var", "contract"), ParamSpec("token", "token")),
                     _dropper_build),
        CatalogEntry("mutex_vault", "one-shot choice latch paying on branch 1",
                     (ParamSpec("token", "token"),), _mutex_vault_build),
        CatalogEntry("mutex_follower", "pays only when the latch chose branch 2",
                     (ParamSpec("c1", "contract"), ParamSpec("token", "token")),
                     _mutex_follower_build),
        CatalogEntry("faucet", "pays a fixed amount to any caller",
                     _FAUCET_PARAMS, _faucet_build),
        CatalogEntry("gated_faucet", "faucet restricted to one contract sender",
                     _FAUCET_PARAMS + (ParamSpec("expected_sender", "str"),),
                     _gated_faucet_build),
        CatalogEntry("chained_faucet", "drains a faucet, then pays its own amount",
                     _FAUCET_PARAMS + (ParamSpec("dep", "contract"),),
                     _chained_faucet_build),
        CatalogEntry("relay", "fixed amount in, fixed amount out",
                     _RELAY_PARAMS, _relay_build),
    )


REGISTRY: dict = {
    e.key: e
    for e in (amm(), airdrop(), exchange(), bet(), best_swap(), swap_router(),
              lending_pool(), lp_arbitrage(), flash_loan_arbitrage(),
              *counterexample_contracts())
}


def entry(key: str) -> CatalogEntry:
    try:
        return REGISTRY[key]
    except KeyError:
        raise KeyError(f"unknown catalog entry {key!r}") from None
