"""Emulated on-chain contract state for device/fog monetization and auditing.

The ledger keeps three registry tables (IoT devices, fog nodes, audit
oracles), a shared fee pool, and an append-only event log.  Every mutating
call carries an ECDSA signature over a canonical call message; the caller's
address is recovered from that signature, never passed in.  All currency
amounts are integers in the smallest unit, so conservation can be checked
exactly: everything deposited either sits in a table, sits in the pool, or
has been withdrawn.

Reputation bookkeeping follows the audit contract: a passed audit rewards
the fog node up to a ceiling, a failed audit deducts reputation and seizes
part of the deposit, and a node is expelled the moment its reputation drops
below the floor or its deposit is exhausted.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import (
    AlreadyRegistered,
    BadSignature,
    InsufficientDeposit,
    InsufficientFunds,
    InvalidAmount,
    InvalidParams,
    InvalidRingSignature,
    NotRegistered,
    RingMemberNotInIoTTable,
    UnknownFog,
    UnknownOracle,
)
from .identity import DEFAULT_IDENTITY


class RemovalReason(enum.Enum):
    VOLUNTARY = "voluntary"
    REPUTATION_FLOOR = "reputation_floor"
    DEPOSIT_EXHAUSTED = "deposit_exhausted"


@dataclass(frozen=True)
class Params:
    """Contract parameters fixed at deployment time.

    ``fee_rate`` is interpreted exactly: it is parsed into a fraction so
    that the fee on an integer amount is ``floor(amount * rate)`` with no
    float rounding anywhere.
    """

    reputation_initial: int = 10
    reputation_max: int = 10
    reputation_min: int = 0
    reward_step: int = 1
    penalty_step: int = 2
    fee_rate: object = "0.01"
    deposit_requirement: int = 10
    deposit_deduction: int = 1
    audit_interval: int = 10
    audit_payment: int = 1
    oracle_bounty: int = 0

    def __post_init__(self):
        for name in ("reputation_initial", "reputation_max", "reputation_min",
                     "reward_step", "penalty_step", "deposit_requirement",
                     "deposit_deduction", "audit_interval", "audit_payment",
                     "oracle_bounty"):
            if not isinstance(getattr(self, name), int):
                raise InvalidParams("%s must be an integer" % name)
        if not self.reputation_min <= self.reputation_initial <= self.reputation_max:
            raise InvalidParams("need reputation_min <= reputation_initial <= reputation_max")
        if self.reward_step < 1:
            raise InvalidParams("reward_step must be positive")
        if self.penalty_step <= self.reward_step:
            raise InvalidParams("penalty_step must exceed reward_step")
        if self.deposit_requirement < 1:
            raise InvalidParams("deposit_requirement must be positive")
        if self.deposit_deduction < 1:
            raise InvalidParams("deposit_deduction must be positive")
        if self.audit_interval < 1:
            raise InvalidParams("audit_interval must be positive")
        if self.audit_payment < 0:
            raise InvalidParams("audit_payment must not be negative")
        if self.oracle_bounty < 0:
            raise InvalidParams("oracle_bounty must not be negative")
        try:
            rate = Fraction(str(self.fee_rate))
        except (ValueError, ZeroDivisionError):
            raise InvalidParams("fee_rate is not a number: %r" % (self.fee_rate,))
        if not 0 <= rate < 1:
            raise InvalidParams("fee_rate must lie in [0, 1)")
        object.__setattr__(self, "_rate", rate)

    def fee(self, amount: int) -> int:
        """Exact floor of ``amount * fee_rate``."""
        rate = self._rate
        return amount * rate.numerator // rate.denominator


@dataclass
class IoTRecord:
    address: str
    available_funds: int = 0


@dataclass
class FogRecord:
    address: str
    deposit: int = 0
    available_funds: int = 0
    reputation: int = 0
    requests_served: int = 0


@dataclass(frozen=True)
class OracleRecord:
    address: str


@dataclass(frozen=True)
class Event:
    seq: int
    op: str
    caller: str
    details: tuple  # ordered (key, value) pairs


@dataclass(frozen=True)
class AuditApplication:
    """Arithmetic trail of one reward or penalty application."""

    fog_address: str
    passed: bool
    reputation_after: int
    deducted: int = 0
    per_device: int = 0
    distributed_remainder: int = 0
    oracle_paid: int = 0
    removed: bool = False
    removal_reason: Optional[RemovalReason] = None
    refunded: int = 0


def call_message(op: str, **fields) -> bytes:
    """Canonical byte string a caller signs to invoke ``op`` with ``fields``.

    Both the contract and the agents build invocation messages through this
    one function, so a signature can never be replayed against different
    arguments.
    """
    parts = [op]
    for key in sorted(fields):
        parts.append("%s=%s" % (key, fields[key]))
    return "|".join(parts).encode()


def audit_message(fog_address: str, passed: bool) -> bytes:
    """Byte string the device ring signs to attest one audit outcome."""
    outcome = b"pass" if passed else b"fail"
    return b"audit|" + fog_address.encode() + b"|" + outcome


class Ledger:
    """In-memory contract state with signature-checked mutating operations."""

    def __init__(self, params: Params, identity=None, record_events: bool = True):
        self.params = params
        self.identity = identity if identity is not None else DEFAULT_IDENTITY
        self.iot_table = {}
        self.fog_table = {}
        self.oracle_table = {}
        self.fee_pool = 0
        self.total_deposited = 0
        self.total_withdrawn = 0
        self.events = []
        self.record_events = record_events
        self._seq = 0

    # -- helpers --

    def _caller(self, op: str, signature, **fields) -> str:
        return self.identity.recover_address(call_message(op, **fields), signature)

    def _log(self, op: str, caller: str, **details):
        self._seq += 1
        if self.record_events:
            self.events.append(Event(self._seq, op, caller, tuple(details.items())))

    def _require_iot(self, address: str) -> IoTRecord:
        record = self.iot_table.get(address)
        if record is None:
            raise NotRegistered("no IoT device at %s" % address)
        return record

    def _require_fog(self, address: str) -> FogRecord:
        record = self.fog_table.get(address)
        if record is None:
            raise NotRegistered("no fog node at %s" % address)
        return record

    # -- device lifecycle --

    def iot_registration(self, amount: int, signature) -> str:
        caller = self._caller("iot_registration", signature, amount=amount)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("registration amount must be a positive integer")
        if caller in self.iot_table:
            raise AlreadyRegistered("IoT device %s already registered" % caller)
        self.iot_table[caller] = IoTRecord(address=caller, available_funds=amount)
        self.total_deposited += amount
        self._log("iot_registration", caller, amount=amount, available_funds=amount)
        return caller

    def iot_add_funds(self, amount: int, signature) -> int:
        caller = self._caller("iot_add_funds", signature, amount=amount)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("top-up amount must be a positive integer")
        record = self._require_iot(caller)
        record.available_funds += amount
        self.total_deposited += amount
        self._log("iot_add_funds", caller, amount=amount,
                  available_funds=record.available_funds)
        return record.available_funds

    def iot_withdraw_funds(self, amount: int, signature) -> int:
        caller = self._caller("iot_withdraw_funds", signature, amount=amount)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("withdrawal amount must be a positive integer")
        record = self._require_iot(caller)
        if amount > record.available_funds:
            raise InsufficientFunds("%s holds %d, asked for %d"
                                    % (caller, record.available_funds, amount))
        record.available_funds -= amount
        self.total_withdrawn += amount
        self._log("iot_withdraw_funds", caller, amount=amount,
                  available_funds=record.available_funds)
        return amount

    def iot_remove(self, signature) -> int:
        caller = self._caller("iot_remove", signature)
        record = self._require_iot(caller)
        payout = record.available_funds
        del self.iot_table[caller]
        self.total_withdrawn += payout
        self._log("iot_remove", caller, payout=payout)
        return payout

    # -- fog lifecycle --

    def fog_registration(self, amount: int, signature) -> str:
        caller = self._caller("fog_registration", signature, amount=amount)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("registration amount must be a positive integer")
        if caller in self.fog_table:
            raise AlreadyRegistered("fog node %s already registered" % caller)
        need = self.params.deposit_requirement
        if amount < need:
            raise InsufficientDeposit("sent %d, deposit requirement is %d" % (amount, need))
        self.fog_table[caller] = FogRecord(
            address=caller,
            deposit=need,
            available_funds=amount - need,
            reputation=self.params.reputation_initial,
        )
        self.total_deposited += amount
        self._log("fog_registration", caller, amount=amount, deposit=need,
                  available_funds=amount - need,
                  reputation=self.params.reputation_initial)
        return caller

    def fog_withdraw_funds(self, amount: int, signature) -> int:
        caller = self._caller("fog_withdraw_funds", signature, amount=amount)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("withdrawal amount must be a positive integer")
        record = self._require_fog(caller)
        if amount > record.available_funds:
            raise InsufficientFunds("%s holds %d available, asked for %d"
                                    % (caller, record.available_funds, amount))
        record.available_funds -= amount
        self.total_withdrawn += amount
        self._log("fog_withdraw_funds", caller, amount=amount,
                  available_funds=record.available_funds)
        return amount

    def fog_remove(self, signature) -> int:
        """Voluntary exit: refunds the remaining deposit plus earnings."""
        caller = self._caller("fog_remove", signature)
        record = self._require_fog(caller)
        return self._remove_fog(record, RemovalReason.VOLUNTARY)

    def _remove_fog(self, record: FogRecord, reason: RemovalReason) -> int:
        payout = record.deposit + record.available_funds
        del self.fog_table[record.address]
        self.total_withdrawn += payout
        self._log("fog_remove", record.address, payout=payout, reason=reason.value)
        return payout

    # -- service payment --

    def iot_fog_payment(self, fog_address: str, amount: int, signature) -> int:
        """Move ``amount`` from the calling device to a fog node, minus the fee.

        Returns the fee retained by the pool.  Also advances the fog node's
        served-request counter, which drives the audit cadence.
        """
        caller = self._caller("iot_fog_payment", signature,
                              amount=amount, fog=fog_address)
        if not isinstance(amount, int) or amount <= 0:
            raise InvalidAmount("payment amount must be a positive integer")
        payer = self._require_iot(caller)
        payee = self._require_fog(fog_address)
        if amount > payer.available_funds:
            raise InsufficientFunds("%s holds %d, payment needs %d"
                                    % (caller, payer.available_funds, amount))
        fee = self.params.fee(amount)
        payer.available_funds -= amount
        payee.available_funds += amount - fee
        self.fee_pool += fee
        payee.requests_served += 1
        self._log("iot_fog_payment", caller, fog=fog_address, amount=amount,
                  fee=fee, payer_funds=payer.available_funds,
                  payee_funds=payee.available_funds,
                  requests_served=payee.requests_served)
        return fee

    # -- oracle and audits --

    def oracle_registration(self, signature) -> str:
        caller = self._caller("oracle_registration", signature)
        if caller in self.oracle_table:
            raise AlreadyRegistered("oracle %s already registered" % caller)
        self.oracle_table[caller] = OracleRecord(address=caller)
        self._log("oracle_registration", caller)
        return caller

    def fog_reward(self, fog_address: str, ring_signature, signature) -> AuditApplication:
        caller = self._caller("fog_reward", signature, fog=fog_address)
        self._check_audit(caller, fog_address, ring_signature, passed=True)
        return self._apply_audit(caller, fog_address, passed=True)

    def fog_penalize(self, fog_address: str, ring_signature, signature) -> AuditApplication:
        caller = self._caller("fog_penalize", signature, fog=fog_address)
        self._check_audit(caller, fog_address, ring_signature, passed=False)
        return self._apply_audit(caller, fog_address, passed=False)

    def _check_audit(self, caller: str, fog_address: str, ring_signature, passed: bool):
        if caller not in self.oracle_table:
            raise UnknownOracle("%s is not a registered oracle" % caller)
        if fog_address not in self.fog_table:
            raise UnknownFog("no fog node at %s" % fog_address)
        message = audit_message(fog_address, passed)
        if not self.identity.ring_verify(message, ring_signature):
            raise InvalidRingSignature("audit attestation does not verify")
        for member in self.identity.ring_addresses(ring_signature):
            if member not in self.iot_table:
                raise RingMemberNotInIoTTable("ring member %s is not a registered device"
                                              % member)

    def _apply_audit(self, caller: str, fog_address: str, passed: bool) -> AuditApplication:
        record = self.fog_table[fog_address]
        deducted = per_device = remainder = 0
        if passed:
            record.reputation = min(record.reputation + self.params.reward_step,
                                    self.params.reputation_max)
        else:
            record.reputation -= self.params.penalty_step
            deducted = min(self.params.deposit_deduction, record.deposit)
            record.deposit -= deducted
            per_device, remainder = self._distribute(deducted)
        # The pool reimburses the oracle's disguised service payment and pays
        # a flat bounty on top, to the extent the pool can cover it.
        oracle_paid = min(self.params.audit_payment + self.params.oracle_bounty,
                          self.fee_pool)
        self.fee_pool -= oracle_paid
        self.total_withdrawn += oracle_paid
        reputation_after = record.reputation
        removed = (record.reputation < self.params.reputation_min
                   or record.deposit == 0)
        reason = None
        refunded = 0
        op = "fog_reward" if passed else "fog_penalize"
        self._log(op, caller, fog=fog_address, reputation=reputation_after,
                  deducted=deducted, per_device=per_device, remainder=remainder,
                  oracle_paid=oracle_paid)
        if removed:
            reason = (RemovalReason.REPUTATION_FLOOR
                      if record.reputation < self.params.reputation_min
                      else RemovalReason.DEPOSIT_EXHAUSTED)
            refunded = self._remove_fog(record, reason)
        return AuditApplication(
            fog_address=fog_address, passed=passed,
            reputation_after=reputation_after, deducted=deducted,
            per_device=per_device, distributed_remainder=remainder,
            oracle_paid=oracle_paid, removed=removed, removal_reason=reason,
            refunded=refunded,
        )

    def _distribute(self, amount: int) -> tuple:
        """Split a seized amount evenly over registered devices.

        The integer remainder, and the whole amount when no device is
        registered, goes to the fee pool so nothing leaks.
        """
        devices = list(self.iot_table.values())
        if not devices:
            self.fee_pool += amount
            return 0, amount
        per_device = amount // len(devices)
        remainder = amount - per_device * len(devices)
        for record in devices:
            record.available_funds += per_device
        self.fee_pool += remainder
        return per_device, remainder

    # -- views and export --

    def conservation_gap(self) -> int:
        """Zero iff no currency has been created or destroyed."""
        held = self.fee_pool
        held += sum(r.available_funds for r in self.iot_table.values())
        held += sum(r.deposit + r.available_funds for r in self.fog_table.values())
        return self.total_deposited - self.total_withdrawn - held

    def to_snapshot(self) -> dict:
        return {
            "params": {
                "reputation_initial": self.params.reputation_initial,
                "reputation_max": self.params.reputation_max,
                "reputation_min": self.params.reputation_min,
                "reward_step": self.params.reward_step,
                "penalty_step": self.params.penalty_step,
                "fee_rate": str(self.params.fee_rate),
                "deposit_requirement": self.params.deposit_requirement,
                "deposit_deduction": self.params.deposit_deduction,
                "audit_interval": self.params.audit_interval,
                "audit_payment": self.params.audit_payment,
                "oracle_bounty": self.params.oracle_bounty,
            },
            "iot_table": [
                {"address": r.address, "available_funds": r.available_funds}
                for r in self.iot_table.values()
            ],
            "fog_table": [
                {"address": r.address, "deposit": r.deposit,
                 "available_funds": r.available_funds,
                 "reputation": r.reputation,
                 "requests_served": r.requests_served}
                for r in self.fog_table.values()
            ],
            "oracle_table": [r.address for r in self.oracle_table.values()],
            "fee_pool": self.fee_pool,
            "total_deposited": self.total_deposited,
            "total_withdrawn": self.total_withdrawn,
            "seq": self._seq,
        }

    @classmethod
    def from_snapshot(cls, snapshot: dict, identity=None,
                      record_events: bool = True) -> "Ledger":
        params = Params(**snapshot["params"])
        ledger = cls(params, identity=identity, record_events=record_events)
        for row in snapshot["iot_table"]:
            ledger.iot_table[row["address"]] = IoTRecord(**row)
        for row in snapshot["fog_table"]:
            ledger.fog_table[row["address"]] = FogRecord(**row)
        for address in snapshot["oracle_table"]:
            ledger.oracle_table[address] = OracleRecord(address=address)
        ledger.fee_pool = snapshot["fee_pool"]
        ledger.total_deposited = snapshot["total_deposited"]
        ledger.total_withdrawn = snapshot["total_withdrawn"]
        ledger._seq = snapshot["seq"]
        return ledger

    def export_events_csv(self, path: str):
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["seq", "op", "caller", "details"])
            for event in self.events:
                rendered = ";".join("%s=%s" % pair for pair in event.details)
                writer.writerow([event.seq, event.op, event.caller, rendered])
