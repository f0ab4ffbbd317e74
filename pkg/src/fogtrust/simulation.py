"""Monte-Carlo scenarios: misbehaving fog populations under audit policies.

Two scenario families are modeled.  The cost scenario counts how many audit
attempts each scheduling policy spends before every fog node has been
expelled; the state scenario tracks system health over time while fog nodes
adapt their misbehavior after penalties.

Bulk trials run thousands of audits per second, so they use lightweight
token identities instead of curve signatures: every contract rule (registry
checks, ring membership, conservation, reputation arithmetic) stays active,
while signing collapses to an equality check.  The cryptographic layer is
exercised end to end by the protocol flows and their tests; a trial's audit
verdict draws from the same Bernoulli law either way, because a corrupted
response never equals the correct one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from .constants import digest
from .errors import BadSignature, InvalidConfig, InvalidParams, NonTerminating
from .ledger import Ledger, Params, audit_message, call_message
from .scheduling import Policy, Scheduler


# -- token identities for bulk runs --

@dataclass(frozen=True)
class TokenSignature:
    address: str
    message: bytes


@dataclass(frozen=True)
class TokenRingSignature:
    members: tuple
    message: bytes


class TokenIdentity:
    """Drop-in identity scheme whose signatures are bearer tokens.

    recover_address returns the address baked into the token if and only if
    the token was minted for exactly the message being checked, mirroring
    how a curve signature only recovers over the signed message.
    """

    name = "token"

    def recover_address(self, message: bytes, signature) -> str:
        if signature.message != message:
            raise BadSignature("token was minted for a different message")
        return signature.address

    def ring_verify(self, message: bytes, signature) -> bool:
        return signature.message == message

    def ring_addresses(self, signature) -> tuple:
        return signature.members


def token_sign(address: str, message: bytes) -> TokenSignature:
    return TokenSignature(address, message)


# -- fog behavior --

@dataclass
class FogBehavior:
    malicious_rate: float
    adaptive: bool = False


def _corrupt(data: bytes, rng) -> bytes:
    position = rng.randrange(len(data))
    flip = 1 + rng.randrange(255)
    return (data[:position] + bytes([data[position] ^ flip])
            + data[position + 1:])


def fog_respond(behavior: FogBehavior, package: bytes, rng,
                service=digest) -> bytes:
    """Correct response, except one perturbed byte with probability m_f."""
    correct = service(package)
    if rng.random() < behavior.malicious_rate:
        return _corrupt(correct, rng)
    return correct


def behavior_hook(behavior: FogBehavior, rng):
    """Adapter plugging a FogBehavior into a protocol-level fog agent."""
    def hook(package, result):
        if rng.random() < behavior.malicious_rate:
            return _corrupt(result, rng)
        return result
    return hook


def adapt_on_penalty(behavior: FogBehavior, rng, subtractive: bool = False):
    """Shrink the malicious rate by a random fraction after a penalty."""
    draw = rng.random()
    if subtractive:
        behavior.malicious_rate -= draw * behavior.malicious_rate
    else:
        behavior.malicious_rate *= draw


# -- scenario configuration --

_POLICY_NAMES = {policy.value: policy for policy in Policy}


@dataclass(frozen=True)
class ScenarioConfig:
    fog_count: int = 100
    iot_count: int = 200
    policy: Policy = Policy.WEIGHTED
    cluster_size: int = 5
    deposit: int = 3
    deposit_deduction: int = 1
    reward_step: int = 1
    penalty_step: int = 2
    reputation_min: int = 0
    reputation_initial: int = 10
    reputation_max: int = 10
    audit_interval: int = 1
    fee_rate: object = "0"
    audit_payment: int = 0
    oracle_bounty: int = 0
    trials: int = 1000
    adaptive: bool = False
    subtractive_adaptation: bool = False
    seed: int = 0
    ring_size: int = 4
    horizon_per_fog: int = 50
    malicious_low: float = 0.4
    malicious_high: float = 1.0
    iot_funds: int = 10
    audit_cap: int = 10**6

    def __post_init__(self):
        if self.fog_count < 1 or self.iot_count < 1:
            raise InvalidConfig("population counts must be positive")
        if self.cluster_size < 1:
            raise InvalidConfig("cluster size must be positive")
        if self.trials < 1:
            raise InvalidConfig("need at least one trial")
        if self.ring_size < 2:
            raise InvalidConfig("rings need at least two members")
        if self.iot_count < self.ring_size - 1:
            raise InvalidConfig("not enough devices to hide the oracle in a ring")
        if not 0.0 <= self.malicious_low <= self.malicious_high <= 1.0:
            raise InvalidConfig("malicious rate bounds must satisfy 0 <= low <= high <= 1")
        if self.horizon_per_fog < 1:
            raise InvalidConfig("horizon must be positive")
        if self.audit_cap < 1:
            raise InvalidConfig("audit cap must be positive")
        try:
            self.params()
        except InvalidParams as exc:
            raise InvalidConfig(str(exc))

    def params(self) -> Params:
        return Params(
            reputation_initial=self.reputation_initial,
            reputation_max=self.reputation_max,
            reputation_min=self.reputation_min,
            reward_step=self.reward_step,
            penalty_step=self.penalty_step,
            fee_rate=self.fee_rate,
            deposit_requirement=self.deposit,
            deposit_deduction=self.deposit_deduction,
            audit_interval=self.audit_interval,
            audit_payment=self.audit_payment,
            oracle_bounty=self.oracle_bounty,
        )


def policy_from_name(name: str) -> Policy:
    try:
        return _POLICY_NAMES[name]
    except KeyError:
        raise InvalidConfig("unknown policy %r (choose from %s)"
                            % (name, ", ".join(sorted(_POLICY_NAMES))))


def trial_seed(master_seed: int, index: int) -> int:
    """Independent per-trial seed, stable across machines and runs."""
    material = digest(b"trial|%d|%d" % (master_seed, index))
    return int.from_bytes(material, "big")


ORACLE_DEVICE = "oracle-device"
ORACLE_ADMIN = "oracle-admin"


@dataclass
class _Population:
    ledger: Ledger
    fog_addresses: list
    iot_addresses: list
    behaviors: dict
    reward_messages: dict
    penalty_messages: dict
    reward_attestations: dict
    penalty_attestations: dict


def _build_population(config: ScenarioConfig, rng) -> _Population:
    ledger = Ledger(config.params(), identity=TokenIdentity(),
                    record_events=False)
    iot_addresses = ["iot-%04d" % n for n in range(config.iot_count)]
    for address in iot_addresses:
        message = call_message("iot_registration", amount=config.iot_funds)
        ledger.iot_registration(config.iot_funds, token_sign(address, message))
    message = call_message("iot_registration", amount=config.iot_funds)
    ledger.iot_registration(config.iot_funds,
                            token_sign(ORACLE_DEVICE, message))
    ledger.oracle_registration(
        token_sign(ORACLE_ADMIN, call_message("oracle_registration")))

    fog_addresses = ["fog-%04d" % n for n in range(config.fog_count)]
    behaviors = {}
    span = config.malicious_high - config.malicious_low
    for address in fog_addresses:
        message = call_message("fog_registration", amount=config.deposit)
        ledger.fog_registration(config.deposit, token_sign(address, message))
        behaviors[address] = FogBehavior(
            malicious_rate=config.malicious_low + span * rng.random(),
            adaptive=config.adaptive)

    reward_messages = {}
    penalty_messages = {}
    reward_attestations = {}
    penalty_attestations = {}
    for address in fog_addresses:
        reward_messages[address] = token_sign(
            ORACLE_ADMIN, call_message("fog_reward", fog=address))
        penalty_messages[address] = token_sign(
            ORACLE_ADMIN, call_message("fog_penalize", fog=address))
        reward_attestations[address] = audit_message(address, True)
        penalty_attestations[address] = audit_message(address, False)
    return _Population(ledger, fog_addresses, iot_addresses, behaviors,
                       reward_messages, penalty_messages,
                       reward_attestations, penalty_attestations)


def _submit_verdict(population: _Population, fog_address: str, passed: bool,
                    ring_size: int, rng):
    """Ring-attested verdict through the full contract path."""
    members = rng.sample(population.iot_addresses, ring_size - 1)
    members.append(ORACLE_DEVICE)
    if passed:
        attestation = TokenRingSignature(
            tuple(members), population.reward_attestations[fog_address])
        return population.ledger.fog_reward(
            fog_address, attestation, population.reward_messages[fog_address])
    attestation = TokenRingSignature(
        tuple(members), population.penalty_attestations[fog_address])
    return population.ledger.fog_penalize(
        fog_address, attestation, population.penalty_messages[fog_address])


# -- cost scenario --

def run_cost_trial(config: ScenarioConfig, rng) -> int:
    """Audit attempts spent until the last fog node is expelled.

    The three policies differ in what they can know about expulsions:
    the weighted scheduler maintains per-node state and drops a node the
    moment the contract removes it; the block-design scheduler only learns
    of a removal when an audit attempt comes back empty, then rebuilds its
    design; random sampling is stateless and keeps drawing from the initial
    roster.  An attempt against an already-expelled node still costs one
    audit, which is exactly the overhead the policies trade off.
    """
    population = _build_population(config, rng)
    ledger = population.ledger
    behaviors = population.behaviors
    scheduler = Scheduler(config.policy, config.cluster_size,
                          population.fog_addresses, rng)
    policy = config.policy
    attempts = 0
    cap = config.audit_cap
    fog_table = ledger.fog_table
    while fog_table:
        cluster = scheduler.next_cluster()
        if not cluster:
            raise NonTerminating("scheduler produced an empty cluster while "
                                 "fog nodes remain")
        for address in cluster:
            attempts += 1
            if attempts > cap:
                raise NonTerminating("audit cap %d exceeded" % cap)
            if address not in fog_table:
                # Wasted attempt: the node was expelled earlier.
                if policy is Policy.BIBD:
                    scheduler.eject(address)
                continue
            passed = rng.random() >= behaviors[address].malicious_rate
            outcome = _submit_verdict(population, address, passed,
                                      config.ring_size, rng)
            scheduler.record_outcome(address, passed)
            if outcome.removed and policy is Policy.WEIGHTED:
                scheduler.eject(address)
            if not fog_table:
                break
    return attempts


def run_cost_scenario(config: ScenarioConfig) -> list:
    """All cost trials for one configuration, independently seeded."""
    costs = []
    for index in range(config.trials):
        rng = random.Random(trial_seed(config.seed, index))
        costs.append(run_cost_trial(config, rng))
    return costs


# -- state scenario --

@dataclass
class TrialMetrics:
    total_audits: Optional[int] = None
    mean_malicious: list = field(default_factory=list)
    mean_reputation: list = field(default_factory=list)
    live_fogs: list = field(default_factory=list)


def run_state_trial(config: ScenarioConfig, rng) -> TrialMetrics:
    """System health per audit step over a fixed horizon.

    After every audit attempt the trial records the mean malicious rate
    over live nodes, their mean reputation, and how many are left.  Fog
    nodes notice their own penalties by watching their ledger record, and
    adaptive ones shrink their malicious rate in response.
    """
    population = _build_population(config, rng)
    ledger = population.ledger
    behaviors = population.behaviors
    scheduler = Scheduler(config.policy, config.cluster_size,
                          population.fog_addresses, rng)
    policy = config.policy
    horizon = config.horizon_per_fog * config.fog_count
    metrics = TrialMetrics()
    fog_table = ledger.fog_table

    live = len(fog_table)
    malicious_sum = sum(b.malicious_rate for b in behaviors.values())
    reputation_sum = sum(r.reputation for r in fog_table.values())

    steps = 0
    while steps < horizon and fog_table:
        cluster = scheduler.next_cluster()
        if not cluster:
            raise NonTerminating("scheduler produced an empty cluster while "
                                 "fog nodes remain")
        for address in cluster:
            steps += 1
            record = fog_table.get(address)
            if record is None:
                if policy is Policy.BIBD:
                    scheduler.eject(address)
            else:
                behavior = behaviors[address]
                passed = rng.random() >= behavior.malicious_rate
                before = record.reputation
                outcome = _submit_verdict(population, address, passed,
                                          config.ring_size, rng)
                scheduler.record_outcome(address, passed)
                reputation_sum += outcome.reputation_after - before
                if not passed and not outcome.removed and behavior.adaptive:
                    old_rate = behavior.malicious_rate
                    adapt_on_penalty(behavior, rng,
                                     config.subtractive_adaptation)
                    malicious_sum += behavior.malicious_rate - old_rate
                if outcome.removed:
                    live -= 1
                    malicious_sum -= behavior.malicious_rate
                    reputation_sum -= outcome.reputation_after
                    if policy is Policy.WEIGHTED:
                        scheduler.eject(address)
            if live:
                metrics.mean_malicious.append(malicious_sum / live)
                metrics.mean_reputation.append(reputation_sum / live)
            else:
                metrics.mean_malicious.append(0.0)
                metrics.mean_reputation.append(0.0)
            metrics.live_fogs.append(live)
            if steps >= horizon or not fog_table:
                break

    while len(metrics.live_fogs) < horizon:
        metrics.mean_malicious.append(0.0)
        metrics.mean_reputation.append(0.0)
        metrics.live_fogs.append(0)
    return metrics


def run_state_scenario(config: ScenarioConfig):
    """Generator over state trials, independently seeded per trial."""
    for index in range(config.trials):
        rng = random.Random(trial_seed(config.seed, index))
        yield run_state_trial(config, rng)


# -- aggregation --

@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    variance: float


def aggregate(values) -> Summary:
    """Sample mean and unbiased sample variance, two-pass for stability."""
    data = list(values)
    count = len(data)
    if count == 0:
        return Summary(0, 0.0, 0.0)
    mean = sum(data) / count
    if count == 1:
        return Summary(1, mean, 0.0)
    variance = sum((value - mean) ** 2 for value in data) / (count - 1)
    return Summary(count, mean, variance)


def aggregate_series(series_iter) -> list:
    """Pointwise mean across equally long series, streamed."""
    sums = None
    count = 0
    for series in series_iter:
        if sums is None:
            sums = [0.0] * len(series)
        elif len(series) != len(sums):
            raise ValueError("series lengths differ")
        for index, value in enumerate(series):
            sums[index] += value
        count += 1
    if sums is None:
        return []
    return [total / count for total in sums]
