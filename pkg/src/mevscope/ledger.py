"""Value types for an account-based token ledger.

Token amounts are arbitrary-precision non-negative integers and prices are
exact rationals, so every aggregate figure (wealth, gain, extractable value)
is exact and golden-value equality tests are bit-stable.

Wallets are normalised: zero balances are pruned, which makes state equality
canonical.  The search layer relies on that when memoising on state keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union

Token = str

USER = "user"
CONTRACT = "contract"


@dataclass(frozen=True, order=True)
class Account:
    """A named account.  User and contract namespaces are disjoint."""

    kind: str
    name: str

    def __post_init__(self) -> None:
        if self.kind not in (USER, CONTRACT):
            raise ValueError(f"bad account kind: {self.kind!r}")
        if not self.name:
            raise ValueError("empty account name")

    @staticmethod
    def user(name: str) -> "Account":
        return Account(USER, name)

    @staticmethod
    def contract(name: str) -> "Account":
        return Account(CONTRACT, name)

    @property
    def is_user(self) -> bool:
        return self.kind == USER

    @property
    def is_contract(self) -> bool:
        return self.kind == CONTRACT

    def __str__(self) -> str:
        return self.name


# Scalars that may appear in transaction arguments, contract stores and
# method return values.
Scalar = Union[int, bool, str, None, Fraction, Account, tuple]


class Wallet:
    """Immutable multiset of tokens.  Absent token == balance zero."""

    __slots__ = ("_d", "_items")

    def __init__(self, amounts: Union[Mapping[Token, int], Iterable[tuple]] = ()):
        d: dict = {}
        pairs = amounts.items() if isinstance(amounts, Mapping) else amounts
        for tok, n in pairs:
            if not isinstance(tok, str):
                raise TypeError(f"token symbol must be str, got {tok!r}")
            if not isinstance(n, int) or isinstance(n, bool):
                raise TypeError(f"token amount must be int, got {n!r}")
            if n < 0:
                raise ValueError(f"negative balance {n} for {tok}")
            if n:
                d[tok] = d.get(tok, 0) + n
        self._d = d
        self._items: Optional[tuple] = None

    @classmethod
    def _from_clean(cls, d: dict) -> "Wallet":
        # internal fast path: d already validated and zero-pruned
        w = cls.__new__(cls)
        w._d = d
        w._items = None
        return w

    @staticmethod
    def single(token: Token, amount: int) -> "Wallet":
        return Wallet({token: amount})

    def get(self, token: Token) -> int:
        return self._d.get(token, 0)

    def items(self) -> tuple:
        if self._items is None:
            self._items = tuple(sorted(self._d.items()))
        return self._items

    def tokens(self) -> tuple:
        return tuple(sorted(self._d))

    def as_dict(self) -> dict:
        return dict(self._d)

    def __iter__(self) -> Iterator[Token]:
        return iter(sorted(self._d))

    def __len__(self) -> int:
        return len(self._d)

    def __bool__(self) -> bool:
        return bool(self._d)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Wallet) and self._d == other._d

    def __hash__(self) -> int:
        return hash(self.items())

    def __add__(self, other: "Wallet") -> "Wallet":
        if not other._d:
            return self
        d = dict(self._d)
        for tok, n in other._d.items():
            d[tok] = d.get(tok, 0) + n
        return Wallet._from_clean(d)

    def minus(self, other: "Wallet") -> Optional["Wallet"]:
        """Pointwise subtraction; None if any balance would go negative."""
        d = dict(self._d)
        for tok, n in other._d.items():
            left = d.get(tok, 0) - n
            if left < 0:
                return None
            if left:
                d[tok] = left
            else:
                d.pop(tok, None)
        return Wallet._from_clean(d)

    def dominates(self, other: "Wallet") -> bool:
        """Pointwise >=."""
        return all(self._d.get(tok, 0) >= n for tok, n in other._d.items())

    def scaled(self, k: int) -> "Wallet":
        if k < 0:
            raise ValueError("negative scale")
        return Wallet._from_clean({t: n * k for t, n in self._d.items()} if k else {})

    def pretty(self) -> str:
        if not self._d:
            return "0"
        return "+".join(f"{n}:{t}" for t, n in self.items())

    def __repr__(self) -> str:
        return f"Wallet({dict(self.items())!r})"


EMPTY_WALLET = Wallet()


@dataclass(frozen=True)
class PriceMap:
    """Strictly positive exact-rational price per token type."""

    prices: tuple

    def __post_init__(self) -> None:
        for tok, p in self.prices:
            if not isinstance(p, Fraction) or p <= 0:
                raise ValueError(f"price of {tok} must be a positive Fraction")

    @staticmethod
    def of(mapping: Mapping[Token, object]) -> "PriceMap":
        return PriceMap(tuple(sorted((t, Fraction(p)) for t, p in mapping.items())))

    @staticmethod
    def uniform(tokens: Iterable[Token], price: int = 1) -> "PriceMap":
        return PriceMap.of({t: Fraction(price) for t in tokens})

    def price(self, token: Token) -> Fraction:
        for t, p in self.prices:
            if t == token:
                return p
        raise KeyError(f"no price for token {token!r}")

    def tokens(self) -> tuple:
        return tuple(t for t, _ in self.prices)

    def as_dict(self) -> dict:
        return dict(self.prices)

    @property
    def all_unit(self) -> bool:
        return all(p == 1 for _, p in self.prices)


class ContractState:
    """(wallet, key-value store) pair for one deployed contract."""

    __slots__ = ("wallet", "store", "_key")

    def __init__(self, wallet: Wallet = EMPTY_WALLET, store: Mapping[str, Scalar] = ()):
        self.wallet = wallet
        self.store = dict(store)
        self._key: Optional[tuple] = None

    def key(self) -> tuple:
        if self._key is None:
            self._key = (self.wallet.items(), tuple(sorted(self.store.items())))
        return self._key

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, ContractState)
            and self.wallet == other.wallet
            and self.store == other.store
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"ContractState({self.wallet.pretty()}, {self.store!r})"


class BlockchainState:
    """Immutable snapshot: user wallets, ordered contract states, height.

    ``order`` is the deployment order; it must linearise the contract
    dependency relation (checked by the executor on deploy).  ``adversary``
    is the designated set of attacker user accounts.

    Canonical form: ``users`` contains exactly the users with a non-empty
    wallet plus all adversary accounts.
    """

    __slots__ = ("users", "contracts", "order", "codes", "height", "adversary", "_core")

    def __init__(
        self,
        users: Mapping[Account, Wallet],
        contracts: Mapping[Account, ContractState],
        order: tuple,
        codes: Mapping[Account, object],
        height: int = 0,
        adversary: Iterable[Account] = (),
    ):
        adv = frozenset(adversary)
        for a in adv:
            if not a.is_user:
                raise ValueError(f"adversary must be a user account: {a!r}")
        norm = {}
        for a, w in users.items():
            if not a.is_user:
                raise ValueError(f"user wallet keyed by non-user account: {a!r}")
            if w or a in adv:
                norm[a] = w
        for a in adv:
            norm.setdefault(a, EMPTY_WALLET)
        if set(contracts) != set(order):
            raise ValueError("contract map and deployment order disagree")
        if height < 0:
            raise ValueError("negative block height")
        self.users = norm
        self.contracts = dict(contracts)
        self.order = tuple(order)
        self.codes = dict(codes)
        self.height = height
        self.adversary = adv
        self._core: Optional[tuple] = None

    # -- accessors ---------------------------------------------------------

    def user_wallet(self, acc: Account) -> Wallet:
        return self.users.get(acc, EMPTY_WALLET)

    def contract_state(self, acc: Account) -> ContractState:
        return self.contracts[acc]

    def code(self, acc: Account):
        return self.codes[acc]

    @property
    def deployed(self) -> frozenset:
        return frozenset(self.order)

    def deploy_index(self, acc: Account) -> int:
        return self.order.index(acc)

    # -- keys / equality ----------------------------------------------------

    def core_key(self) -> tuple:
        """Canonical key of everything except the block height."""
        if self._core is None:
            self._core = (
                tuple(sorted((a, w.items()) for a, w in self.users.items() if w)),
                tuple((a, self.contracts[a].key()) for a in self.order),
                tuple(sorted(self.adversary)),
            )
        return self._core

    def key(self) -> tuple:
        return (self.core_key(), self.height)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, BlockchainState) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    # -- functional updates --------------------------------------------------

    def with_height(self, height: int) -> "BlockchainState":
        s = BlockchainState.__new__(BlockchainState)
        s.users = self.users
        s.contracts = self.contracts
        s.order = self.order
        s.codes = self.codes
        s.height = height
        s.adversary = self.adversary
        s._core = self._core
        return s

    def replace(self, *, users=None, contracts=None, order=None, codes=None,
                height=None, adversary=None) -> "BlockchainState":
        return BlockchainState(
            users=self.users if users is None else users,
            contracts=self.contracts if contracts is None else contracts,
            order=self.order if order is None else order,
            codes=self.codes if codes is None else codes,
            height=self.height if height is None else height,
            adversary=self.adversary if adversary is None else adversary,
        )

    def __repr__(self) -> str:
        users = " | ".join(f"{a}[{w.pretty()}]" for a, w in sorted(self.users.items()))
        contracts = " | ".join(
            f"{a}[{self.contracts[a].wallet.pretty()}]" for a in self.order
        )
        return f"<state h={self.height} {users} | {contracts}>"


def genesis(
    users: Mapping[Account, Wallet],
    adversary: Iterable[Account] = (),
    height: int = 0,
) -> BlockchainState:
    """A contract-less starting state; contracts are added by ``vm.deploy``."""
    return BlockchainState(users, {}, (), {}, height, adversary)


def wealth(accounts: Iterable[Account], state: BlockchainState, prices: PriceMap):
    """Price-weighted token total held by ``accounts`` in ``state``.

    Accounts absent from the state contribute zero.  Returns an exact number
    (int when every price is 1, Fraction otherwise).
    """
    total = 0
    for acc in accounts:
        w = state.users.get(acc) if acc.is_user else None
        if w is None and acc.is_contract:
            cs = state.contracts.get(acc)
            w = cs.wallet if cs is not None else None
        if not w:
            continue
        for tok, n in w.items():
            total += n * prices.price(tok)
    return total


def richer_than(a: BlockchainState, b: BlockchainState) -> bool:
    """True iff ``a`` pointwise dominates ``b`` on user wallets.

    Both states must share the same contract part (and height); the relation
    is undefined otherwise.
    """
    if a.order != b.order or a.contracts != b.contracts:
        raise ValueError("richer_than: states differ in their contract parts")
    if a.height != b.height or a.adversary != b.adversary:
        raise ValueError("richer_than: states differ outside user wallets")
    domain = set(a.users) | set(b.users)
    return all(a.user_wallet(u).dominates(b.user_wallet(u)) for u in domain)


def total_supply(state: BlockchainState) -> Wallet:
    """Per-token unit totals across every wallet in the state."""
    acc = Wallet()
    for w in state.users.values():
        acc = acc + w
    for cs in state.contracts.values():
        acc = acc + cs.wallet
    return acc


def contract_holdings(state: BlockchainState) -> Wallet:
    """Per-token unit totals across contract wallets only."""
    acc = Wallet()
    for cs in state.contracts.values():
        acc = acc + cs.wallet
    return acc
