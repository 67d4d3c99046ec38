import pytest
from fractions import Fraction
from hypothesis import given, strategies as st

from mevscope import Account, PriceMap, Wallet, richer_than, total_supply, wealth

from helpers import M, A, two_pool_state

TOKENS = ("T0", "T1", "T2")

wallets = st.dictionaries(st.sampled_from(TOKENS), st.integers(0, 20), max_size=3).map(Wallet)


def test_wallet_normalises_zeros():
    assert Wallet({"T0": 0, "T1": 2}) == Wallet({"T1": 2})
    assert not Wallet({"T0": 0})
    assert Wallet({"T0": 1}).get("T9") == 0


def test_wallet_rejects_negative_amounts():
    with pytest.raises(ValueError):
        Wallet({"T0": -1})


def test_wallet_arithmetic():
    w = Wallet({"T0": 2}) + Wallet({"T0": 1, "T1": 5})
    assert w == Wallet({"T0": 3, "T1": 5})
    assert w.minus(Wallet({"T1": 6})) is None
    assert w.minus(Wallet({"T0": 3})) == Wallet({"T1": 5})


@given(wallets, wallets)
def test_wallet_add_then_minus_roundtrips(a, b):
    assert (a + b).minus(b) == a


@given(wallets, wallets)
def test_dominates_iff_minus_defined(a, b):
    assert a.dominates(b) == ((a.minus(b)) is not None)


def test_account_namespaces():
    assert Account.user("M") != Account.contract("M")
    with pytest.raises(ValueError):
        Account("oracle", "x")


def test_prices_must_be_positive():
    with pytest.raises(ValueError):
        PriceMap.of({"T0": 0})
    assert PriceMap.of({"T0": "3/2"}).price("T0") == Fraction(3, 2)


def test_wealth_of_second_pool_and_adversary():
    state = two_pool_state()
    prices = PriceMap.uniform(TOKENS)
    assert wealth([Account.contract("AMM2")], state, prices) == 13
    assert wealth([M], state, prices) == 3
    assert wealth([], state, prices) == 0
    # unknown accounts contribute nothing
    assert wealth([Account.user("ghost"), Account.contract("ghost")], state, prices) == 0


def test_wealth_additive_over_disjoint_sets():
    state = two_pool_state()
    prices = PriceMap.uniform(TOKENS)
    a = [Account.contract("AMM1")]
    b = [Account.contract("AMM2"), M]
    assert wealth(a + b, state, prices) == wealth(a, state, prices) + wealth(b, state, prices)


def test_wealth_uses_exact_prices():
    state = two_pool_state()
    prices = PriceMap.of({"T0": 1, "T1": "1/3", "T2": "2/7"})
    assert wealth([Account.contract("AMM2")], state, prices) == Fraction(4, 3) + Fraction(18, 7)


def _with_user(state, acc, wallet):
    users = dict(state.users)
    users[acc] = wallet
    return state.replace(users=users)


def test_richer_than_examples():
    s = two_pool_state()
    assert richer_than(s, s)
    up = _with_user(s, M, s.user_wallet(M) + Wallet({"T0": 1}))
    assert richer_than(up, s) and not richer_than(s, up)
    sideways = _with_user(s, M, Wallet({"T0": 2, "T1": 1}))
    assert not richer_than(sideways, s) and not richer_than(s, sideways)


def test_richer_than_needs_matching_contract_parts():
    s = two_pool_state()
    with pytest.raises(ValueError):
        richer_than(s, s.with_height(3))


@given(wallets, wallets, wallets)
def test_richer_than_is_a_partial_order(wa, wb, wc):
    base = two_pool_state()
    sa, sb, sc = (_with_user(base, M, w) for w in (wa, wb, wc))
    # reflexive
    assert richer_than(sa, sa)
    # antisymmetric
    if richer_than(sa, sb) and richer_than(sb, sa):
        assert sa == sb
    # transitive
    if richer_than(sa, sb) and richer_than(sb, sc):
        assert richer_than(sa, sc)


def test_total_supply():
    state = two_pool_state()
    assert total_supply(state) == Wallet({"T0": 9, "T1": 10, "T2": 9})
