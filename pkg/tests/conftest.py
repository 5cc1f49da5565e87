"""Shared fixtures: a funded environment with a stablecoin and helpers to
deploy a bond and approve investors."""
import pytest

from bondsim import greenbond as gb
from bondsim.ledger import Ledger


class BondEnv:
    def __init__(self):
        self.ledger = Ledger()
        self.bank = self.ledger.create_account("bank")
        self.ledger.fund_algos(self.bank, 10**14)
        self.stablecoin = self.ledger.create_asset(self.bank, total=10**15, decimals=6)
        self.operator = self.new_account("operator", algos=5_000_000)
        self.issuer = self.new_account("issuer", algos=2_000_000, stablecoin=10**12)
        self.verifier = self.new_account("verifier", algos=2_000_000)
        self.regulator = self.new_account("regulator", algos=2_000_000)
        self.dep = None

    def new_account(self, label=None, algos=2_000_000, stablecoin=0):
        addr = self.ledger.create_account(label)
        self.ledger.fund_algos(addr, algos)
        self.ledger.dispense_asset(self.stablecoin, self.bank, addr, stablecoin)
        return addr

    def deploy(
        self,
        total_bonds=100,
        coupon_rounds=2,
        start_buy=100,
        end_buy=200,
        maturity=400,
        bond_cost=100_000_000,
        coupon_base=100_000_000,
        principal=100_000_000,
        approve=True,
    ):
        params = gb.BondParams(
            total_bonds=total_bonds,
            coupon_rounds=coupon_rounds,
            start_buy=start_buy,
            end_buy=end_buy,
            maturity=maturity,
            bond_cost=bond_cost,
            coupon_base=coupon_base,
            principal=principal,
            issuer=self.issuer,
            green_verifier=self.verifier,
            financial_regulator=self.regulator,
            stablecoin_id=self.stablecoin,
        )
        self.dep = gb.issue(self.ledger, params, self.operator)
        if approve:
            assert gb.submit_freeze_all(self.ledger, self.dep, self.regulator, 1).approved
        return self.dep

    def approve_investor(self, addr):
        assert gb.register_investor(self.ledger, self.dep, addr).approved
        assert gb.submit_freeze_account(self.ledger, self.dep, self.regulator, addr, 1).approved

    def investor(self, label=None, algos=2_000_000, stablecoin=10**12):
        addr = self.new_account(label, algos=algos, stablecoin=stablecoin)
        self.approve_investor(addr)
        return addr

    def escrow_funds(self):
        return self.ledger.asset_balance(self.dep.stablecoin_escrow, self.stablecoin)


@pytest.fixture
def env():
    return BondEnv()
