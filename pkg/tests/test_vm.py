import pytest

from mevscope import (
    Account,
    DeployError,
    PriceMap,
    Transaction,
    Wallet,
    WellFormednessError,
    check_wallet_monotonic,
    check_well_formed,
    deploy,
    deps,
    entry,
    execute,
    execute_trace,
    gain,
    genesis,
    sender_agnostic_witness,
    total_supply,
)
from mevscope.vm import MAX_CALL_DEPTH, TICK_METHOD, ContractCode, MethodDef

from helpers import M, A, bet_state, build, two_pool_state

PRICES = PriceMap.uniform(("T0", "T1", "T2"))
AMM1 = Account.contract("AMM1")
AMM2 = Account.contract("AMM2")

SWAP1 = Transaction(M, AMM1, "swap", (0,), Wallet({"T0": 3}))
SWAP2 = Transaction(M, AMM2, "swap", (0,), Wallet({"T1": 2}))


def test_first_swap_transition():
    res = execute(two_pool_state(), SWAP1)
    assert res.valid
    assert res.state.contract_state(AMM1).wallet == Wallet({"T0": 9, "T1": 4})
    assert res.state.user_wallet(M) == Wallet({"T1": 2})
    assert res.state.height == 1


def test_unfunded_attachment_rolls_back():
    state = two_pool_state()   # M holds no T1 yet
    res = execute(state, SWAP2)
    assert not res.valid
    assert res.state == state.with_height(1)


def test_win_before_the_pump_rolls_back():
    state = bet_state()
    res = execute_trace(state, [Transaction(M, Account.contract("Bet"), "bet", (),
                                            Wallet({"ETH": 10})),
                                Transaction(M, Account.contract("Bet"), "win")])
    assert not res.valid   # quoted rate is 1, the threshold is 2


def test_full_two_swap_trace():
    res = execute_trace(two_pool_state(), [SWAP1, SWAP2])
    assert res.valid
    assert res.state.contract_state(AMM2).wallet == Wallet({"T1": 6, "T2": 6})
    assert res.state.user_wallet(M) == Wallet({"T2": 3})


def test_empty_trace_is_identity_on_wallets():
    state = two_pool_state()
    res = execute_trace(state, [])
    assert res.state == state


def test_four_step_bet_attack_banks_the_pot():
    state = bet_state()
    trace = [
        Transaction(M, Account.contract("Bet"), "bet", (), Wallet({"ETH": 10})),
        Transaction(M, Account.contract("AMM"), "swap", (0,), Wallet({"ETH": 300})),
        Transaction(M, Account.contract("Bet"), "win"),
        Transaction(M, Account.contract("AMM"), "swap", (0,), Wallet({"T": 200})),
    ]
    res = execute_trace(state, trace)
    assert res.valid
    assert res.state.user_wallet(M) == Wallet({"ETH": 320})
    prices = PriceMap.uniform(("ETH", "T"))
    assert gain([Account.contract("Bet")], state, trace, prices) == -10


def test_gain_of_second_pool_on_the_two_swap_trace():
    state = two_pool_state()
    assert gain([AMM2], state, [SWAP1, SWAP2], PRICES) == -1
    assert gain([AMM2], state, [], PRICES) == 0


def test_gain_sums_to_zero_over_all_accounts():
    state = two_pool_state()
    everyone = list(state.users) + list(state.order)
    prices = PriceMap.of({"T0": 1, "T1": "2/3", "T2": "5/7"})
    assert gain(everyone, state, [SWAP1, SWAP2], prices) == 0


def test_deploy_appends_funded_contract():
    st = genesis({A: Wallet({"T0": 6, "T1": 6})})
    st = deploy(st, entry("amm").make("AMM1", t0="T0", t1="T1"),
                attached=Wallet({"T0": 6, "T1": 6}), deployer=A)
    assert st.contract_state(AMM1).wallet == Wallet({"T0": 6, "T1": 6})
    assert st.user_wallet(A) == Wallet()
    assert check_well_formed(st)


def test_deploy_requires_dependencies():
    st = genesis({A: Wallet({"ETH": 10})})
    bet = entry("bet").make("Bet", oracle="AMM", token="T", rate=2, deadline=9)
    with pytest.raises(WellFormednessError):
        deploy(st, bet, attached=Wallet({"ETH": 10}), deployer=A)


def test_follower_cannot_deploy_before_its_latch():
    st = genesis({A: Wallet({"T": 2})})
    follower = entry("mutex_follower").make("C2", c1="C1", token="T")
    with pytest.raises(WellFormednessError):
        deploy(st, follower, attached=Wallet({"T": 1}), deployer=A)


def test_aborting_constructor_is_a_deploy_error():
    st = genesis({A: Wallet({"T": 5})})
    vault = entry("mutex_vault").make("C1", token="T")
    with pytest.raises(DeployError):
        deploy(st, vault, attached=Wallet({"T": 5}), deployer=A)  # needs exactly 1


def test_unfunded_deployer_is_a_deploy_error():
    st = genesis({A: Wallet()})
    code = entry("amm").make("AMM1", t0="T0", t1="T1")
    with pytest.raises(DeployError):
        deploy(st, code, attached=Wallet({"T0": 1}), deployer=A)


def test_deps_closure():
    state = bet_state()
    bet, amm = Account.contract("Bet"), Account.contract("AMM")
    assert deps([bet], state) == {bet, amm}
    assert deps([amm], state) == {amm}
    with pytest.raises(ValueError):
        deps([Account.contract("ghost")], state)


def test_deps_of_the_seven_contract_router_stack():
    from mevscope.goldens import load_bundled
    from mevscope.scenario import build_state
    state, delta = build_state(load_bundled("compositions/row6_best_swap_router.scn"))
    (best,) = delta
    assert len(deps([best], state)) == 7


def test_well_formedness_examples():
    assert check_well_formed(two_pool_state())
    assert check_well_formed(bet_state())
    mutex = build({M: {}}, [("mutex_vault", "C1", {"token": "T"}, {"T": 1}),
                            ("mutex_follower", "C2", {"c1": "C1", "token": "T"}, {"T": 1})])
    assert check_well_formed(mutex)


def test_missing_dependency_breaks_well_formedness():
    from mevscope import BlockchainState
    state = bet_state()
    bet = Account.contract("Bet")
    # surgically drop the oracle the bet depends on
    damaged = BlockchainState(state.users, {bet: state.contracts[bet]}, (bet,),
                              {bet: state.codes[bet]}, state.height, state.adversary)
    assert not check_well_formed(damaged)


def test_determinism():
    state = two_pool_state()
    assert execute(state, SWAP1, want_log=True) == execute(state, SWAP1, want_log=True)


def test_conservation_per_token():
    state = bet_state()
    trace = [
        Transaction(M, Account.contract("Bet"), "bet", (), Wallet({"ETH": 10})),
        Transaction(M, Account.contract("AMM"), "swap", (0,), Wallet({"ETH": 300})),
        Transaction(M, Account.contract("Bet"), "win"),
    ]
    supply = total_supply(state)
    for tx in trace:
        res = execute(state, tx)
        state = res.state
        assert total_supply(state) == supply


def test_height_advances_on_valid_and_invalid():
    state = two_pool_state()
    assert execute(state, SWAP1).state.height == 1
    assert execute(state, SWAP2).state.height == 1
    assert execute(state, Transaction(M, AMM1, TICK_METHOD)).state.height == 1


def test_call_depth_cap_invalidates():
    def hot_potato(c):
        c.call("Chain0", "spin")

    codes = []
    prev = None
    for i in range(MAX_CALL_DEPTH + 2):
        name = f"Chain{i}"
        if prev is None:
            def base(c):
                c.require(True)
            code = ContractCode(name=name, methods={"spin": MethodDef("spin", base)})
        else:
            dep = prev
            def fwd(c, dep=dep):
                c.call(dep, "spin")
            code = ContractCode(name=name, methods={"spin": MethodDef("spin", fwd)},
                                declared_deps=frozenset({dep}))
        codes.append(code)
        prev = name
    st = genesis({M: Wallet()}, adversary=[M])
    for code in codes:
        st = deploy(st, code, deployer=A)
    deep = Transaction(M, Account.contract(f"Chain{MAX_CALL_DEPTH + 1}"), "spin")
    res = execute(st, deep)
    assert not res.valid
    shallow = Transaction(M, Account.contract("Chain3"), "spin")
    assert execute(st, shallow).valid


def test_trace_log_records_observations():
    res = execute(two_pool_state(), SWAP1, want_log=True)
    (rec,) = res.trace_log
    assert rec.callee == AMM1 and rec.method == "swap"
    assert rec.transfers == ((M, Wallet({"T1": 2})),)
    assert not rec.aborted


def test_wallet_monotonic_spot_check():
    state = two_pool_state()
    assert check_wallet_monotonic(state, SWAP1, {M: Wallet({"T0": 100})})
    with pytest.raises(ValueError):
        check_wallet_monotonic(state, SWAP2, {M: Wallet({"T0": 1})})


def test_wallet_monotonic_randomized():
    import random
    from helpers import random_micro
    from mevscope import adversary_moves, SearchBudget
    rng = random.Random(7)
    checked = 0
    while checked < 1000:
        state, prices, _ = random_micro(rng)
        moves = adversary_moves(state, None, SearchBudget(max_depth=2, grid=4))
        if not moves:
            continue
        tx = moves[rng.randrange(len(moves))]
        if not execute(state, tx).valid:
            continue
        bonus = Wallet({t: rng.randint(0, 3) for t in prices.tokens()})
        assert check_wallet_monotonic(state, tx, {M: bonus})
        checked += 1


def test_flash_loan_must_be_repaid_with_fee():
    st = build({M: {}}, [
        ("amm", "AMM1", {"t0": "T0", "t1": "T1"}, {"T0": 6, "T1": 6}),
        ("amm", "AMM2", {"t0": "T0", "t1": "T1"}, {"T0": 6, "T1": 6}),
        ("lending_pool", "LP", {"token": "T0", "fee": 1, "oracle": "Oracle"}, {"T0": 20}),
        ("flash_loan_arbitrage", "Arb", {"c0": "AMM1", "c1": "AMM2", "lp": "LP"}, {}),
    ])
    pre_supply = total_supply(st)
    res = execute(st, Transaction(M, Account.contract("Arb"), "arbitrage", (1,)))
    assert not res.valid                      # break-even swaps cannot cover the fee
    assert res.state == st.with_height(1)     # fully rolled back
    assert total_supply(res.state) == pre_supply


def test_sender_agnostic_flags_match_behaviour():
    state = two_pool_state()
    assert sender_agnostic_witness(state, AMM1, "swap", (0,), Wallet({"T0": 2})) is None
    assert sender_agnostic_witness(state, AMM1, "getRate", ("T0",)) is None

    gated = build({M: {}}, [
        ("gated_faucet", "C0", {"token": "T", "amount": 5, "expected_sender": "C1"},
         {"T": 5}),
        ("chained_faucet", "C1", {"dep": "C0", "token": "T", "amount": 5}, {}),
    ])
    assert not gated.code(Account.contract("C0")).sender_agnostic
    witness = sender_agnostic_witness(gated, Account.contract("C0"), "f")
    assert witness is not None and "senders" in witness
