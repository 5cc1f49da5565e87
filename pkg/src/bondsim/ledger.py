"""Deterministic in-memory ledger core.

Accounts hold integer microAlgos and integer asset base units; a single
scalar clock gates time-dependent logic; every transaction pays a flat fee;
transaction groups of up to 16 transactions commit all-or-nothing against a
working copy of the state.  Stateless and stateful approval programs from
the `programs` module are evaluated during group submission.

All money arithmetic is integer arithmetic.  There is no randomness and no
wall-clock access anywhere, so identical operation sequences produce
identical ledgers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .programs import (
    CallContext,
    Deny,
    MAX_GLOBAL_KEYS,
    MAX_LOCAL_KEYS,
    OnComplete,
    SecretKey,
    Signature,
    StatefulProgram,
    StatelessProgram,
    contract_account_address,
    eval_logic_signature,
)

Address = str
MicroAlgos = int

MICRO_ALGOS_PER_ALGO = 1_000_000
FLAT_FEE = 1_000
BASE_MIN_BALANCE = 100_000
MAX_GROUP_SIZE = 16


class LedgerError(Exception):
    pass


class UnknownAddress(LedgerError):
    pass


class InsufficientBalance(LedgerError):
    pass


# ---------------------------------------------------------------------------
# transactions


@dataclass(frozen=True)
class Payment:
    sender: Address
    receiver: Address
    amount: int
    signature: Optional[Signature] = None  # None = sender's own key
    fee: int = FLAT_FEE
    note: bytes = b""
    valid_from: Optional[int] = None
    valid_until: Optional[int] = None


@dataclass(frozen=True)
class AssetTransfer:
    sender: Address
    asset_id: int
    receiver: Address
    amount: int
    revoke_target: Optional[Address] = None  # set = clawback from this account
    signature: Optional[Signature] = None
    fee: int = FLAT_FEE
    note: bytes = b""
    valid_from: Optional[int] = None
    valid_until: Optional[int] = None


@dataclass(frozen=True)
class AppCall:
    sender: Address
    app_id: int
    on_complete: OnComplete = OnComplete.NO_OP
    args: tuple = ()
    accounts: tuple = ()
    apps: tuple = ()
    signature: Optional[Signature] = None
    fee: int = FLAT_FEE
    note: bytes = b""
    valid_from: Optional[int] = None
    valid_until: Optional[int] = None


Transaction = Union[Payment, AssetTransfer, AppCall]


@dataclass(frozen=True)
class TransactionGroup:
    txns: tuple


def as_group(txns: Union[TransactionGroup, Sequence[Transaction]]) -> TransactionGroup:
    if isinstance(txns, TransactionGroup):
        return txns
    return TransactionGroup(tuple(txns))


# ---------------------------------------------------------------------------
# results


@dataclass
class Rejection:
    code: str
    detail: dict = field(default_factory=dict)

    def __str__(self) -> str:
        sub = self.detail.get("code")
        return f"{self.code}:{sub}" if sub else self.code


@dataclass
class SubmitResult:
    approved: bool
    rejection: Optional[Rejection] = None

    @property
    def rejected(self) -> bool:
        return not self.approved

    def reason(self) -> str:
        return "" if self.approved else str(self.rejection)


class _Reject(Exception):
    def __init__(self, code: str, detail: Optional[dict] = None, **extra):
        super().__init__(code)
        self.rejection = Rejection(code, {**(detail or {}), **extra})


# ---------------------------------------------------------------------------
# state


@dataclass(frozen=True)
class AssetDef:
    asset_id: int
    total: int
    decimals: int
    default_frozen: bool
    freeze_addr: Optional[Address]
    clawback_addr: Optional[Address]
    creator: Address


@dataclass(frozen=True)
class AssetHolding:
    """Read-only view of one account's position in one asset."""

    asset_id: int
    balance: int
    frozen: bool


@dataclass
class Account:
    balance: int = 0
    holdings: dict = field(default_factory=dict)  # asset_id -> base units
    local: dict = field(default_factory=dict)  # app_id -> {key: value}
    min_extra: int = 0  # schedule entries above the base minimum

    def clone(self) -> "Account":
        return Account(
            self.balance,
            dict(self.holdings),
            {app: dict(kv) for app, kv in self.local.items()},
            self.min_extra,
        )


@dataclass
class AppState:
    global_state: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    finalized: bool = False

    def clone(self) -> "AppState":
        return AppState(dict(self.global_state), dict(self.config), self.finalized)


@dataclass(frozen=True)
class _AppCode:
    app_id: int
    program: StatefulProgram
    creator: Address


class _LedgerState:
    __slots__ = ("accounts", "apps", "fees_paid")

    def __init__(self):
        self.accounts: dict = {}
        self.apps: dict = {}
        self.fees_paid: dict = {}

    def clone(self) -> "_LedgerState":
        st = _LedgerState()
        st.accounts = {a: acc.clone() for a, acc in self.accounts.items()}
        st.apps = {i: s.clone() for i, s in self.apps.items()}
        st.fees_paid = dict(self.fees_paid)
        return st


@dataclass(frozen=True)
class LogEntry:
    seq: int
    timestamp: int
    txn: Transaction


# ---------------------------------------------------------------------------
# cost accounting


@dataclass(frozen=True)
class MinBalanceSchedule:
    """Minimum-balance increments charged per opt-in/creation event."""

    asset_create: int = 100_000
    asset_opt_in: int = 100_000
    app_base: int = 100_000
    app_per_uint: int = 28_500
    app_per_byte_slice: int = 50_000

    def app_create_entry(self, program: StatefulProgram) -> int:
        if program.min_balance_create is not None:
            return program.min_balance_create
        s = program.schema
        return self.app_base + self.app_per_uint * s.global_uints + self.app_per_byte_slice * s.global_bytes

    def app_opt_in_entry(self, program: StatefulProgram) -> int:
        if program.min_balance_opt_in is not None:
            return program.min_balance_opt_in
        s = program.schema
        return self.app_base + self.app_per_uint * s.local_uints + self.app_per_byte_slice * s.local_bytes


@dataclass
class CostRow:
    actor: Address
    label: str
    amount: int = 0  # microAlgos paid out to escrows / contract accounts
    min_delta: int = 0  # minimum-balance increase
    fee: int = 0  # transaction fees
    tag: Optional[int] = None  # deployment this row belongs to, if any

    @property
    def total(self) -> int:
        return self.amount + self.min_delta + self.fee


class CostLedger:
    """Per-actor accumulation of fees and minimum-balance obligations plus
    labelled per-action rows for cost reporting."""

    def __init__(self, ledger: "Ledger"):
        self._ledger = ledger
        self.rows: list = []

    def record(self, actor: Address, label: str, *, amount: int = 0, min_delta: int = 0, fee: int = 0, tag: Optional[int] = None) -> None:
        self.rows.append(CostRow(actor, label, amount, min_delta, fee, tag))

    def rows_for(self, actor: Optional[Address] = None, tag: Optional[int] = None) -> list:
        out = []
        for row in self.rows:
            if actor is not None and row.actor != actor:
                continue
            if tag is not None and row.tag != tag:
                continue
            out.append(row)
        return out

    def total_for(self, actor: Address) -> int:
        return sum(row.total for row in self.rows_for(actor))

    def fees_paid(self, addr: Address) -> int:
        return self._ledger._state.fees_paid.get(addr, 0)

    def min_balance_locked(self, addr: Address) -> int:
        return self._ledger._account(addr).min_extra


# ---------------------------------------------------------------------------
# read port handed to stateful handlers


class _StatePort:
    def __init__(self, ledger: "Ledger", state: _LedgerState):
        self._ledger = ledger
        self._state = state

    def global_get(self, app_id: int, key: bytes):
        app = self._state.apps.get(app_id)
        return None if app is None else app.global_state.get(key)

    def config_get(self, app_id: int, key: str):
        app = self._state.apps.get(app_id)
        return None if app is None else app.config.get(key)

    def app_finalized(self, app_id: int) -> bool:
        app = self._state.apps.get(app_id)
        return bool(app and app.finalized)

    def local_exists(self, app_id: int, addr: str) -> bool:
        acc = self._state.accounts.get(addr)
        return bool(acc and app_id in acc.local)

    def local_get(self, app_id: int, addr: str, key: bytes):
        acc = self._state.accounts.get(addr)
        if acc is None or app_id not in acc.local:
            return None
        return acc.local[app_id].get(key)

    def asset_balance(self, addr: str, asset_id: int) -> int:
        acc = self._state.accounts.get(addr)
        return 0 if acc is None else acc.holdings.get(asset_id, 0)


# ---------------------------------------------------------------------------
# the ledger


class Ledger:
    """Single-writer ledger value.  All mutation flows through the explicit
    operations below; concurrent read-only queries are safe between them."""

    def __init__(self, schedule: Optional[MinBalanceSchedule] = None):
        self.schedule = schedule or MinBalanceSchedule()
        self._state = _LedgerState()
        self._assets: dict = {}
        self._app_code: dict = {}
        self._now = 0
        self._next_account = 1
        self._next_asset = 100
        self._next_app = 1000
        self._minted = 0
        self._log: list = []
        self.cost = CostLedger(self)

    # -- accounts -----------------------------------------------------------

    def create_account(self, label: Optional[str] = None) -> Address:
        if label is None:
            label = f"acct{self._next_account}"
            self._next_account += 1
        if label in self._state.accounts:
            raise LedgerError(f"account label already in use: {label}")
        self._state.accounts[label] = Account()
        return label

    def register_contract_account(self, program: StatelessProgram) -> Address:
        addr = contract_account_address(program)
        self._state.accounts.setdefault(addr, Account())
        return addr

    def _account(self, addr: Address) -> Account:
        acc = self._state.accounts.get(addr)
        if acc is None:
            raise UnknownAddress(addr)
        return acc

    def has_account(self, addr: Address) -> bool:
        return addr in self._state.accounts

    def fund_algos(self, addr: Address, amount: int) -> None:
        """Credit microAlgos out of thin air (dispenser plumbing, fee-free)."""
        if amount < 0:
            raise ValueError("amount must be non-negative")
        self._account(addr).balance += amount
        self._minted += amount

    def algo_balance(self, addr: Address) -> int:
        return self._account(addr).balance

    def min_balance(self, addr: Address) -> int:
        return BASE_MIN_BALANCE + self._account(addr).min_extra

    def accounts(self) -> list:
        return list(self._state.accounts)

    # -- assets ------------------------------------------------------------

    def create_asset(
        self,
        creator: Address,
        total: int,
        decimals: int,
        default_frozen: bool = False,
        freeze_addr: Optional[Address] = None,
        clawback_addr: Optional[Address] = None,
    ) -> int:
        if total <= 0 or decimals < 0:
            raise ValueError("bad asset parameters")
        acc = self._account(creator)
        new_extra = acc.min_extra + self.schedule.asset_create
        if acc.balance - FLAT_FEE < BASE_MIN_BALANCE + new_extra:
            raise InsufficientBalance(f"{creator} cannot cover asset creation")
        acc.balance -= FLAT_FEE
        self._state.fees_paid[creator] = self._state.fees_paid.get(creator, 0) + FLAT_FEE
        acc.min_extra = new_extra
        asset_id = self._next_asset
        self._next_asset += 1
        self._assets[asset_id] = AssetDef(asset_id, total, decimals, default_frozen, freeze_addr, clawback_addr, creator)
        acc.holdings[asset_id] = total  # creator holds the full supply
        return asset_id

    def asset(self, asset_id: int) -> AssetDef:
        a = self._assets.get(asset_id)
        if a is None:
            raise LedgerError(f"unknown asset {asset_id}")
        return a

    def asset_balance(self, addr: Address, asset_id: int) -> int:
        return self._account(addr).holdings.get(asset_id, 0)

    def holding(self, addr: Address, asset_id: int) -> Optional[AssetHolding]:
        acc = self._account(addr)
        if asset_id not in acc.holdings:
            return None
        return AssetHolding(asset_id, acc.holdings[asset_id], self.asset(asset_id).default_frozen)

    def grant_holding(self, addr: Address, asset_id: int) -> None:
        """Create an asset holding as deployment bookkeeping: no fee and no
        minimum-balance entry.  Used for contract-account escrows and the
        stablecoin dispenser; ordinary accounts opt in via `opt_in_asset`."""
        self.asset(asset_id)
        self._account(addr).holdings.setdefault(asset_id, 0)

    def dispense_asset(self, asset_id: int, source: Address, target: Address, amount: int) -> None:
        """Fee-free asset move for dispenser plumbing; opts the target in."""
        if amount < 0:
            raise ValueError("amount must be non-negative")
        src = self._account(source)
        if src.holdings.get(asset_id, 0) < amount:
            raise InsufficientBalance(f"{source} holds too little of asset {asset_id}")
        self.grant_holding(target, asset_id)
        src.holdings[asset_id] -= amount
        self._account(target).holdings[asset_id] += amount

    def opt_in_asset(self, addr: Address, asset_id: int) -> SubmitResult:
        if asset_id not in self._assets:
            return SubmitResult(False, Rejection("unknown_asset", {"asset": asset_id}))
        if asset_id in self._account(addr).holdings:
            return SubmitResult(False, Rejection("already_opted_in", {"asset": asset_id}))
        return self.submit_group([AssetTransfer(sender=addr, asset_id=asset_id, receiver=addr, amount=0)])

    # -- applications --------------------------------------------------------

    def register_app(self, program: StatefulProgram, creator: Address) -> int:
        acc = self._account(creator)
        entry = self.schedule.app_create_entry(program)
        new_extra = acc.min_extra + entry
        if acc.balance - FLAT_FEE < BASE_MIN_BALANCE + new_extra:
            raise InsufficientBalance(f"{creator} cannot cover app creation")
        acc.balance -= FLAT_FEE
        self._state.fees_paid[creator] = self._state.fees_paid.get(creator, 0) + FLAT_FEE
        acc.min_extra = new_extra
        app_id = self._next_app
        self._next_app += 1
        self._app_code[app_id] = _AppCode(app_id, program, creator)
        self._state.apps[app_id] = AppState()
        return app_id

    def app_program(self, app_id: int) -> StatefulProgram:
        return self._code(app_id).program

    def app_creator(self, app_id: int) -> Address:
        return self._code(app_id).creator

    def app_finalized(self, app_id: int) -> bool:
        return self._app_state(app_id).finalized

    def app_global(self, app_id: int, key: bytes):
        return self._app_state(app_id).global_state.get(key)

    def app_config(self, app_id: int, key: str):
        return self._app_state(app_id).config.get(key)

    def app_local(self, addr: Address, app_id: int, key: bytes):
        acc = self._account(addr)
        if app_id not in acc.local:
            return None
        return acc.local[app_id].get(key)

    def is_opted_in(self, addr: Address, app_id: int) -> bool:
        return app_id in self._account(addr).local

    def _code(self, app_id: int) -> _AppCode:
        code = self._app_code.get(app_id)
        if code is None:
            raise LedgerError(f"unknown app {app_id}")
        return code

    def _app_state(self, app_id: int) -> AppState:
        st = self._state.apps.get(app_id)
        if st is None:
            raise LedgerError(f"unknown app {app_id}")
        return st

    # -- time ------------------------------------------------------------------

    @property
    def now(self) -> int:
        return self._now

    def advance_time(self, to: int) -> None:
        if to < self._now:
            raise ValueError(f"cannot move time backwards: {to} < {self._now}")
        self._now = to

    # -- group submission --------------------------------------------------------

    def submit_group(self, txns: Union[TransactionGroup, Sequence[Transaction]]) -> SubmitResult:
        group = as_group(txns)
        if not 1 <= len(group.txns) <= MAX_GROUP_SIZE:
            return SubmitResult(False, Rejection("bad_group_size", {"size": len(group.txns)}))
        working = self._state.clone()
        touched: set = set()
        try:
            for idx in range(len(group.txns)):
                self._apply_txn(working, group, idx, touched)
            self._check_min_balances(working, touched)
        except _Reject as r:
            return SubmitResult(False, r.rejection)
        self._state = working
        for txn in group.txns:
            self._log.append(LogEntry(len(self._log), self._now, txn))
        return SubmitResult(True)

    @property
    def applied_log(self) -> list:
        return self._log

    # -- transaction application (internal) ----------------------------------------

    def _apply_txn(self, st: _LedgerState, group: TransactionGroup, idx: int, touched: set) -> None:
        txn = group.txns[idx]
        acc = st.accounts.get(txn.sender)
        if acc is None:
            raise _Reject("unknown_address", address=txn.sender)
        if txn.valid_from is not None and self._now < txn.valid_from:
            raise _Reject("clock_window", txn_index=idx)
        if txn.valid_until is not None and self._now > txn.valid_until:
            raise _Reject("clock_window", txn_index=idx)
        auth = self._auth_failure(txn, group, idx)
        if auth is not None:
            raise _Reject(auth, txn_index=idx)
        if txn.fee < FLAT_FEE:
            raise _Reject("fee_too_low", txn_index=idx)
        if acc.balance < txn.fee:
            raise _Reject("insufficient_balance", txn_index=idx, address=txn.sender)
        acc.balance -= txn.fee
        st.fees_paid[txn.sender] = st.fees_paid.get(txn.sender, 0) + txn.fee
        touched.add(txn.sender)

        if isinstance(txn, Payment):
            self._apply_payment(st, txn, idx, touched)
        elif isinstance(txn, AssetTransfer):
            self._apply_asset_transfer(st, txn, idx, touched)
        else:
            self._apply_app_call(st, group, idx, touched)

    def _auth_failure(self, txn: Transaction, group: TransactionGroup, idx: int) -> Optional[str]:
        sig = txn.signature or SecretKey(txn.sender)
        if isinstance(sig, SecretKey):
            if sig.address != txn.sender:
                return "bad_signature"
        else:
            expected = sig.delegator if sig.delegator is not None else contract_account_address(sig.program)
            if txn.sender != expected:
                return "bad_signature"
            if not eval_logic_signature(sig, group, idx, self._now):
                return "logic_rejected"
        if isinstance(txn, AssetTransfer) and txn.revoke_target is not None:
            asset = self._assets.get(txn.asset_id)
            if asset is None:
                return "unknown_asset"
            if asset.clawback_addr != txn.sender:
                return "bad_signature"
        return None

    def _apply_payment(self, st: _LedgerState, txn: Payment, idx: int, touched: set) -> None:
        if txn.amount < 0:
            raise _Reject("bad_amount", txn_index=idx)
        recv = st.accounts.get(txn.receiver)
        if recv is None:
            raise _Reject("unknown_address", address=txn.receiver, txn_index=idx)
        acc = st.accounts[txn.sender]
        if acc.balance < txn.amount:
            raise _Reject("insufficient_balance", txn_index=idx, address=txn.sender)
        acc.balance -= txn.amount
        recv.balance += txn.amount
        touched.add(txn.receiver)

    def _apply_asset_transfer(self, st: _LedgerState, txn: AssetTransfer, idx: int, touched: set) -> None:
        if txn.amount < 0:
            raise _Reject("bad_amount", txn_index=idx)
        asset = self._assets.get(txn.asset_id)
        if asset is None:
            raise _Reject("unknown_asset", txn_index=idx)
        sender = st.accounts[txn.sender]
        recv = st.accounts.get(txn.receiver)
        if recv is None:
            raise _Reject("unknown_address", address=txn.receiver, txn_index=idx)

        if txn.revoke_target is not None:
            # clawback: authority moves funds out of revoke_target, frozen or not
            src = st.accounts.get(txn.revoke_target)
            if src is None:
                raise _Reject("unknown_address", address=txn.revoke_target, txn_index=idx)
            if txn.asset_id not in src.holdings:
                raise _Reject("not_opted_in", address=txn.revoke_target, txn_index=idx)
            if txn.asset_id not in recv.holdings:
                raise _Reject("not_opted_in", address=txn.receiver, txn_index=idx)
            if src.holdings[txn.asset_id] < txn.amount:
                raise _Reject("insufficient_balance", txn_index=idx, address=txn.revoke_target)
            src.holdings[txn.asset_id] -= txn.amount
            recv.holdings[txn.asset_id] += txn.amount
            touched.update((txn.revoke_target, txn.receiver))
            return

        if txn.receiver == txn.sender and txn.amount == 0 and txn.asset_id not in sender.holdings:
            # opt-in: zero self-transfer creates the holding
            sender.holdings[txn.asset_id] = 0
            sender.min_extra += self.schedule.asset_opt_in
            return

        if txn.asset_id not in sender.holdings:
            raise _Reject("not_opted_in", address=txn.sender, txn_index=idx)
        if txn.asset_id not in recv.holdings:
            raise _Reject("not_opted_in", address=txn.receiver, txn_index=idx)
        if asset.default_frozen:
            raise _Reject("frozen_holding", txn_index=idx)
        if sender.holdings[txn.asset_id] < txn.amount:
            raise _Reject("insufficient_balance", txn_index=idx, address=txn.sender)
        sender.holdings[txn.asset_id] -= txn.amount
        recv.holdings[txn.asset_id] += txn.amount
        touched.add(txn.receiver)

    def _apply_app_call(self, st: _LedgerState, group: TransactionGroup, idx: int, touched: set) -> None:
        txn = group.txns[idx]
        code = self._app_code.get(txn.app_id)
        if code is None or txn.app_id not in st.apps:
            raise _Reject("unknown_app", txn_index=idx)
        program = code.program
        acc = st.accounts[txn.sender]
        oc = txn.on_complete

        if oc is OnComplete.OPT_IN:
            if txn.app_id in acc.local:
                raise _Reject("already_opted_in", txn_index=idx)
            acc.local[txn.app_id] = {}
            acc.min_extra += self.schedule.app_opt_in_entry(program)

        ctx = CallContext(
            app_id=txn.app_id,
            creator=code.creator,
            sender=txn.sender,
            on_complete=oc,
            args=txn.args,
            accounts=txn.accounts,
            apps=txn.apps,
            group=group,
            txn_index=idx,
            now=self._now,
            port=_StatePort(self, st),
        )
        handler = program.clear_state if oc is OnComplete.CLEAR_STATE else program.approval
        denied: Optional[Deny] = None
        if handler is not None:
            try:
                handler(ctx)
            except Deny as d:
                denied = d

        if oc is OnComplete.CLEAR_STATE:
            # clearing always removes local state, approved or not
            if txn.app_id not in acc.local:
                raise _Reject("not_opted_in", txn_index=idx)
            if denied is None:
                self._commit_app_writes(st, code, ctx, touched)
            del acc.local[txn.app_id]
            acc.min_extra -= self.schedule.app_opt_in_entry(program)
            return

        if denied is not None:
            raise _Reject(
                "app_rejected",
                {"txn_index": idx, "app": txn.app_id, "code": denied.code, **denied.detail},
            )
        self._commit_app_writes(st, code, ctx, touched)

        if oc is OnComplete.CLOSE_OUT:
            if txn.app_id not in acc.local:
                raise _Reject("not_opted_in", txn_index=idx)
            del acc.local[txn.app_id]
            acc.min_extra -= self.schedule.app_opt_in_entry(program)
        elif oc is OnComplete.DELETE_APPLICATION:
            del st.apps[txn.app_id]
            creator_acc = st.accounts[code.creator]
            creator_acc.min_extra -= self.schedule.app_create_entry(program)
            touched.add(code.creator)

    def _commit_app_writes(self, st: _LedgerState, code: _AppCode, ctx: CallContext, touched: set) -> None:
        app_state = st.apps[code.app_id]
        if ctx.config_writes:
            app_state.config.update(ctx.config_writes)
        if ctx.finalize_requested:
            app_state.finalized = True
        if ctx.global_writes:
            app_state.global_state.update(ctx.global_writes)
            cap = min(code.program.schema.global_keys, MAX_GLOBAL_KEYS)
            if len(app_state.global_state) > cap:
                raise _Reject("app_rejected", {"app": code.app_id, "code": "global_schema_exceeded"})
        for (addr, key), value in ctx.local_writes.items():
            target = st.accounts.get(addr)
            if target is None:
                raise _Reject("unknown_address", address=addr)
            if code.app_id not in target.local:
                raise _Reject("app_rejected", {"app": code.app_id, "code": "not_opted_in", "account": addr})
            target.local[code.app_id][key] = value
            cap = min(code.program.schema.local_keys, MAX_LOCAL_KEYS)
            if len(target.local[code.app_id]) > cap:
                raise _Reject("app_rejected", {"app": code.app_id, "code": "local_schema_exceeded"})
            touched.add(addr)

    def _check_min_balances(self, st: _LedgerState, touched: set) -> None:
        for addr in sorted(touched):
            acc = st.accounts[addr]
            if acc.balance == 0 and acc.min_extra == 0:
                continue  # dormant or pure-asset account
            required = BASE_MIN_BALANCE + acc.min_extra
            if acc.balance < required:
                raise _Reject("min_balance_violation", address=addr, required=required, available=acc.balance)

    # -- introspection ---------------------------------------------------------

    def fees_paid(self, addr: Address) -> int:
        return self._state.fees_paid.get(addr, 0)

    def total_fees_burned(self) -> int:
        return sum(self._state.fees_paid.values())

    def total_algos(self) -> int:
        return sum(acc.balance for acc in self._state.accounts.values())

    def total_minted(self) -> int:
        return self._minted

    def asset_supply_held(self, asset_id: int) -> int:
        return sum(acc.holdings.get(asset_id, 0) for acc in self._state.accounts.values())

    def observable_state(self) -> dict:
        """Canonical snapshot of everything a group submission may change.
        Two ledgers with equal snapshots are observably identical."""
        return {
            "now": self._now,
            "accounts": {
                addr: (
                    acc.balance,
                    tuple(sorted(acc.holdings.items())),
                    tuple(sorted((app, tuple(sorted(kv.items()))) for app, kv in acc.local.items())),
                    acc.min_extra,
                )
                for addr, acc in sorted(self._state.accounts.items())
            },
            "apps": {
                app_id: (
                    tuple(sorted(s.global_state.items())),
                    tuple(sorted(s.config.items())),
                    s.finalized,
                )
                for app_id, s in sorted(self._state.apps.items())
            },
            "fees": tuple(sorted(self._state.fees_paid.items())),
            "log_len": len(self._log),
        }
