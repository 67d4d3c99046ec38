"""Shared builders for the test suite: canned states and a seeded generator
of micro scenarios (small enough for exhaustive enumeration)."""

import random

from mevscope import (
    Account,
    PriceMap,
    Wallet,
    deploy,
    entry,
    genesis,
    total_supply,
)

M = Account.user("M")
A = Account.user("A")


def build(users, deployments, adversary=(M,), height=0):
    """users: {Account: {token: n}}; deployments: (catalog key, name, args, fund).
    Funding is minted to the deployer right before each deployment."""
    st = genesis({acc: Wallet(w) for acc, w in users.items()}, adversary, height)
    for key, name, args, fund in deployments:
        wallet = Wallet(fund)
        staged = dict(st.users)
        staged[A] = st.user_wallet(A) + wallet
        st = st.replace(users=staged)
        st = deploy(st, entry(key).make(name, **args), attached=wallet, deployer=A)
    return st


def two_pool_state():
    return build(
        {M: {"T0": 3}},
        [("amm", "AMM1", {"t0": "T0", "t1": "T1"}, {"T0": 6, "T1": 6}),
         ("amm", "AMM2", {"t0": "T1", "t1": "T2"}, {"T1": 4, "T2": 9})],
    )


def bet_state(rate=2, deadline=1000, adversary_eth=310):
    return build(
        {M: {"ETH": adversary_eth}},
        [("amm", "AMM", {"t0": "ETH", "t1": "T"}, {"ETH": 600, "T": 600}),
         ("bet", "Bet", {"oracle": "AMM", "token": "T", "rate": rate,
                         "deadline": deadline}, {"ETH": 10})],
    )


# --- random micro scenarios (total token supply <= 10) --------------------------


def _amm_solo(rng):
    r0, r1 = rng.randint(1, 2), rng.randint(1, 2)
    m0, m1 = rng.randint(0, 2), rng.randint(0, 1)
    st = build({M: {"T0": m0, "T1": m1}},
               [("amm", "AMM", {"t0": "T0", "t1": "T1"}, {"T0": r0, "T1": r1})])
    return st, ("T0", "T1"), rng.choice([2, 3])


def _amm_pair(rng):
    st = build({M: {"T0": rng.randint(0, 2)}},
               [("amm", "AMM1", {"t0": "T0", "t1": "T1"},
                 {"T0": rng.randint(1, 2), "T1": rng.randint(1, 2)}),
                ("amm", "AMM2", {"t0": "T1", "t1": "T2"},
                 {"T1": rng.randint(1, 2), "T2": rng.randint(1, 2)})])
    return st, ("T0", "T1", "T2"), 2


def _exchange(rng):
    rate = rng.randint(1, 2)
    st = build({M: {"TI": rng.randint(0, 2)}},
               [("exchange", "Ex", {"tout": "TO", "tin": "TI", "rate": rate},
                 {"TO": rng.randint(1, 4)})])
    return st, ("TI", "TO"), 4


def _airdrop_exchange(rng):
    st = build({M: {}},
               [("airdrop", "Drop", {"token": "T"}, {"T": 1}),
                ("exchange", "Ex", {"tout": "ETH", "tin": "T",
                                    "rate": rng.randint(1, 3)},
                 {"ETH": rng.randint(1, 4)})])
    return st, ("T", "ETH"), 4


def _relay(rng):
    k = rng.randint(1, 2)
    st = build({M: {}},
               [("faucet", "C0", {"token": "T0", "amount": k}, {"T0": k}),
                ("relay", "C1", {"tin": "T0", "amount_in": k,
                                 "tout": "T1", "amount_out": rng.randint(1, 3)},
                 {"T1": 3})])
    return st, ("T0", "T1"), 3


def _cells(rng):
    cell_kind = rng.choice(["cell", "once_cell"])
    if rng.random() < 0.5:
        deps = [(cell_kind, "X", {}, {}),
                ("gated_drop", "C", {"cell": "X", "token": "T"}, {"T": rng.randint(1, 3)})]
    else:
        deps = [(cell_kind, "X", {}, {}),
                ("dropper", "D1", {"var": "X", "token": "T"}, {"T": 3})]
        if rng.random() < 0.5:
            deps.append(("dropper", "D2", {"var": "X", "token": "T"}, {"T": 3}))
    st = build({M: {}}, deps)
    return st, ("T",), 3


def _mutex(rng):
    st = build({M: {}},
               [("mutex_vault", "C1", {"token": "T"}, {"T": 1}),
                ("mutex_follower", "C2", {"c1": "C1", "token": "T"}, {"T": 1})])
    return st, ("T",), 2


def _paid_vault(rng):
    st = build({M: {"T": rng.randint(0, 1)}},
               [("paid_cell", "C", {"token": "T"}, {}),
                ("gated_vault", "D", {"cell": "C", "token": "ETH"},
                 {"ETH": rng.randint(1, 4)})])
    return st, ("T", "ETH"), 4


def _micro_bet(rng):
    st = build({M: {"ETH": rng.randint(0, 3)}},
               [("amm", "AMM", {"t0": "ETH", "t1": "T"}, {"ETH": 2, "T": 2}),
                ("bet", "Bet", {"oracle": "AMM", "token": "T", "rate": 1,
                                "deadline": rng.randint(1, 5)}, {"ETH": 1})],
               height=0)
    return st, ("ETH", "T"), 3


MICRO_FAMILIES = (
    _amm_solo, _amm_pair, _exchange, _airdrop_exchange,
    _relay, _cells, _mutex, _paid_vault, _micro_bet,
)

LIGHT_FAMILIES = (_exchange, _relay, _cells, _mutex, _paid_vault, _airdrop_exchange)


def random_micro(rng: random.Random, families=MICRO_FAMILIES):
    """(state, prices, ceiling); total supply stays at most 10 tokens."""
    st, tokens, ceiling = rng.choice(families)(rng)
    assert sum(n for _, n in total_supply(st).items()) <= 10
    return st, PriceMap.uniform(tokens), ceiling


def random_observed(rng, state):
    contracts = list(state.order)
    k = rng.randint(1, len(contracts))
    return frozenset(rng.sample(contracts, k))
