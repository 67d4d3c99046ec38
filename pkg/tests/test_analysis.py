import pytest
from fractions import Fraction

from mevscope import (
    Account,
    PriceMap,
    SearchBudget,
    Wallet,
    contract_independent,
    deploy,
    entry,
    epsilon_composable,
    intok_outtok,
    nonint,
    richnonint,
    stable_wrt_adversary,
    strip,
    structural_battery,
    token_independent,
    verify_stripping,
    without_contracts,
)
from mevscope.goldens import load_bundled
from mevscope.scenario import build_state

from helpers import M, A, bet_state, build, two_pool_state

BUDGET = SearchBudget(max_depth=4, grid=8)
PRICES3 = PriceMap.uniform(("T0", "T1", "T2"))
AMM1, AMM2 = Account.contract("AMM1"), Account.contract("AMM2")


class TestStrip:
    def test_strip_independent_pool(self):
        state = two_pool_state()
        stripped = strip(state, {AMM2})
        assert stripped.order == (AMM2,)
        assert stripped.contracts[AMM2] == state.contracts[AMM2]

    def test_strip_keeps_the_oracle_dependency(self):
        state = bet_state()
        stripped = strip(state, {Account.contract("Bet")})
        assert stripped.order == (Account.contract("AMM"), Account.contract("Bet"))

    def test_strip_drops_the_forwarder(self):
        state, _ = build_state(load_bundled("faucet_forwarder.scn"))
        stripped = strip(state, {Account.contract("C0")})
        assert stripped.order == (Account.contract("C0"),)

    def test_strip_is_idempotent_and_well_formed(self):
        from mevscope import check_well_formed
        state = bet_state()
        once = strip(state, {Account.contract("Bet")})
        assert strip(once, {Account.contract("Bet")}) == once
        assert check_well_formed(once)


class TestTokenSets:
    def test_airdrop_has_no_inputs(self):
        st = build({M: {}}, [("airdrop", "Drop", {"token": "T"}, {"T": 1})])
        ins, outs = intok_outtok(st, {Account.contract("Drop")})
        assert ins == frozenset() and outs == frozenset({"T"})

    def test_exchange_directions(self):
        st = build({M: {"T": 1}}, [("exchange", "Ex", {"tout": "ETH", "tin": "T",
                                                       "rate": 10}, {"ETH": 10})])
        ins, outs = intok_outtok(st, {Account.contract("Ex")})
        assert ins == frozenset({"T"}) and outs == frozenset({"ETH"})

    def test_empty_fragment(self):
        assert intok_outtok(two_pool_state(), set()) == (frozenset(), frozenset())

    def test_airdrop_vs_matching_exchange_not_independent(self):
        state, _ = build_state(load_bundled("airdrop_feeds_exchange.scn"))
        assert not token_independent(state, {Account.contract("Drop")},
                                     {Account.contract("Exchange")})

    def test_disjoint_pools_are_independent(self):
        st = build({M: {}}, [
            ("amm", "AMM1", {"t0": "T0", "t1": "T1"}, {"T0": 2, "T1": 2}),
            ("amm", "AMM2", {"t0": "T2", "t1": "T3"}, {"T2": 2, "T3": 2}),
        ])
        assert token_independent(st, {AMM1}, {AMM2})
        assert token_independent(st, set(), {AMM2})


class TestContractIndependence:
    def test_pools_are_independent(self):
        st, _ = build_state(load_bundled("compositions/row1_amm_amm.scn"))
        assert contract_independent(st, {AMM1}, {AMM2})

    def test_bet_depends_on_its_oracle(self):
        state = bet_state()
        assert not contract_independent(state, {Account.contract("AMM")},
                                        {Account.contract("Bet")})

    def test_empty_fragment_is_independent(self):
        assert contract_independent(two_pool_state(), {AMM1}, set())


class TestStability:
    def test_fixed_rate_oracle_is_stable(self):
        state, delta = build_state(load_bundled("compositions/row3_bet_on_exchange.scn"))
        prices = PriceMap.uniform(("ETH", "T"))
        status, witness = stable_wrt_adversary(
            state, {Account.contract("Exchange")}, delta, prices, BUDGET, wealthy=True)
        assert status == "stable" and witness is None

    def test_pool_oracle_is_unstable_with_a_swap_witness(self):
        state = bet_state()
        prices = PriceMap.uniform(("ETH", "T"))
        status, witness = stable_wrt_adversary(
            state, {Account.contract("AMM")}, {Account.contract("Bet")},
            prices, BUDGET, wealthy=True)
        assert status == "unstable"
        assert witness and witness[-1].callee == Account.contract("AMM")
        assert witness[-1].method == "swap"

    def test_no_dependency_channel_is_trivially_stable(self):
        st, _ = build_state(load_bundled("compositions/row1_amm_amm.scn"))
        status, _ = stable_wrt_adversary(st, {AMM1}, {AMM2},
                                         PriceMap.uniform(("T0", "T1")), BUDGET)
        assert status == "stable"


class TestVerdicts:
    def test_independent_airdrop_holds(self):
        scn = load_bundled("airdrop_beside_amm.scn")
        state, delta = build_state(scn)
        v = nonint(state, delta, scn.prices(), BUDGET)
        assert v.holds is True and v.justification == "contract-independent"

    def test_bet_over_pool_is_interfering(self):
        scn = load_bundled("bet_on_amm_oracle.scn")
        state, delta = build_state(scn)
        v = nonint(state, delta, scn.prices(), BUDGET)
        assert v.holds is False
        assert (v.lhs_value, v.rhs_value) == (10, 0)
        assert v.witness

    def test_epsilon_on_the_mutex_pair(self):
        scn = load_bundled("mutex_vaults.scn")
        state, delta = build_state(scn)
        v0 = epsilon_composable(state, delta, Fraction(0), scn.prices(), BUDGET)
        assert v0.holds is True and (v0.lhs_value, v0.rhs_value) == (1, 1)

    def test_epsilon_rejects_negative_epsilon(self):
        scn = load_bundled("mutex_vaults.scn")
        state, delta = build_state(scn)
        with pytest.raises(ValueError):
            epsilon_composable(state, delta, Fraction(-1), scn.prices(), BUDGET)

    def test_unknown_requires_no_conditions_and_no_completeness(self):
        # two pools sharing tokens: no condition fires, equality at budget is
        # reported as unknown rather than a certified holds
        scn = load_bundled("compositions/row1_amm_amm.scn")
        state, delta = build_state(scn)
        budget = SearchBudget(max_depth=2, grid=2)
        v = nonint(state, delta, scn.prices(), budget)
        assert v.holds in (None, False)  # never a certified holds without grounds


class TestStripping:
    def test_identity_strip_verifies(self):
        state = bet_state(adversary_eth=0)
        rep = verify_stripping(state, state.deployed, None,
                               PriceMap.uniform(("ETH", "T")),
                               SearchBudget(max_depth=3, grid=8))
        assert rep.status == "verified"

    def test_forwarder_hypothesis_not_met_with_value_gap(self):
        state, _ = build_state(load_bundled("faucet_forwarder.scn"))
        c0, c1 = Account.contract("C0"), Account.contract("C1")
        rep = verify_stripping(state, {c0}, {c1}, PriceMap.uniform(("T",)), BUDGET)
        assert rep.status == "hypothesis-not-met"
        assert (rep.full_value, rep.stripped_value) == (5, 0)

    def test_router_stack_with_unrelated_pools_strips_cleanly(self):
        scn = load_bundled("compositions/row6_best_swap_router.scn")
        state, delta = build_state(scn)
        # extra pools nobody depends on
        state = deploy(state, entry("amm").make("X1", t0="T0", t1="T1"), deployer=A)
        state = deploy(state, entry("amm").make("X2", t0="T2", t1="T3"), deployer=A)
        rep = verify_stripping(state, delta, None, scn.prices(), BUDGET)
        assert rep.status == "verified"
        v_full = richnonint(state, delta, scn.prices(), BUDGET)
        v_stripped = richnonint(strip(state, delta), delta, scn.prices(), BUDGET)
        assert v_full.outcome == v_stripped.outcome == "holds"

    def test_adversary_deployed_wrapper_cannot_flip_a_verdict(self):
        scn = load_bundled("compositions/row1_amm_amm.scn")
        state, delta = build_state(scn)
        base = richnonint(state, delta, scn.prices(), BUDGET)
        context = without_contracts(state, delta)
        context = deploy(context, entry("best_swap").make("AdvWrap", c0="AMM1", c1="AMM1"),
                         deployer=M)
        funded = dict(context.users)
        funded[A] = context.user_wallet(A) + Wallet({"T0": 9, "T1": 4})
        context = context.replace(users=funded)
        extended = deploy(context, entry("amm").make("AMM2", t0="T0", t1="T1"),
                          attached=Wallet({"T0": 9, "T1": 4}), deployer=A)
        again = richnonint(extended, delta, scn.prices(), BUDGET)
        assert base.outcome == again.outcome == "holds"


def test_structural_battery_all_rows_pass():
    report = structural_battery(BUDGET)
    assert report.passed, [r for r in report.rows if not r.passed]
    kinds = {r.row: r.kind for r in report.rows}
    assert kinds["union-subjects"] == "counterexample"
    assert kinds["zero-mev-union"] == "law"


class TestJustificationSoundness:
    """A verdict decided by a sufficient condition is never contradicted by
    the direct search at a comparable budget."""

    def test_stable_oracle_row_agrees_with_search(self):
        from mevscope import rlmev
        scn = load_bundled("compositions/row3_bet_on_exchange.scn")
        state, delta = build_state(scn)
        assert richnonint(state, delta, scn.prices(), BUDGET).justification == "stable"
        u = rlmev(state, delta, None, scn.prices(), BUDGET)
        r = rlmev(state, delta, delta, scn.prices(), BUDGET)
        assert u.value == r.value == 10

    def test_independent_pools_row_agrees_with_search(self):
        from mevscope import rlmev
        scn = load_bundled("compositions/row1_amm_amm.scn")
        state, delta = build_state(scn)
        assert richnonint(state, delta, scn.prices(), BUDGET).justification \
            == "contract-independent"
        budget = SearchBudget(max_depth=3, grid=8)
        u = rlmev(state, delta, None, scn.prices(), budget)
        r = rlmev(state, delta, delta, scn.prices(), budget)
        assert u.value == r.value


class TestRichVsFixedWealth:
    """The wealth-independent verdict coincides with the fixed-wealth one at
    large enough adversary wallets."""

    def _at_wallet(self, state, delta, prices, scale):
        from mevscope.search import rich_wallet, with_adversary_wallet
        rich = with_adversary_wallet(state, rich_wallet(state, prices, BUDGET, scale))
        return nonint(rich, delta, prices, BUDGET)

    def test_violation_shows_up_at_some_rung(self):
        scn = load_bundled("cell_gated_vault.scn")
        state, delta = build_state(scn)
        assert richnonint(state, delta, scn.prices(), BUDGET).holds is False
        assert self._at_wallet(state, delta, scn.prices(), 1).holds is False

    def test_holding_verdict_holds_at_the_plateau_wallet(self):
        scn = load_bundled("once_cell_droppers.scn")
        state, _ = build_state(scn)
        alone = without_contracts(state, {Account.contract("Drop2")})
        delta = {Account.contract("Drop1")}
        assert richnonint(alone, delta, scn.prices(), BUDGET).holds is True
        v = self._at_wallet(alone, delta, scn.prices(), 1)
        assert v.holds is not False and v.lhs_value in (None, Fraction(3))
