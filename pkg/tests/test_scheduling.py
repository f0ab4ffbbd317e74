"""Cadence gating and the three cluster-sampling policies."""

import math
import random

import pytest

from fogtrust.errors import ClusterTooLarge, EmptyDesign, InvalidDesign, UnknownFog
from fogtrust.scheduling import (
    Policy,
    Scheduler,
    audit_due,
    build_bibd,
    next_bibd_cluster,
    sample_cluster_random,
    sample_cluster_weighted,
    update_weight,
)

import oracles


def addresses(count):
    return ["0x%040x" % n for n in range(1, count + 1)]


# -- cadence --

def test_audit_due_every_request_when_interval_is_one():
    assert all(audit_due(n, 1) for n in range(1, 20))


def test_audit_due_hits_exact_multiples():
    due = [n for n in range(1, 11) if audit_due(n, 5)]
    assert due == [5, 10]


def test_audit_not_due_before_first_request():
    assert not audit_due(0, 1)
    assert not audit_due(0, 7)


# -- random sampling --

def test_random_cluster_of_full_size_is_the_whole_roster():
    roster = addresses(6)
    cluster = sample_cluster_random(roster, 6, random.Random(1))
    assert sorted(cluster) == sorted(roster)


def test_random_cluster_members_are_distinct():
    roster = addresses(30)
    rng = random.Random(2)
    for _ in range(50):
        cluster = sample_cluster_random(roster, 7, rng)
        assert len(set(cluster)) == 7


def test_random_cluster_too_large_rejected():
    with pytest.raises(ClusterTooLarge):
        sample_cluster_random(addresses(3), 4, random.Random(3))


def test_random_single_draws_are_uniform():
    roster = addresses(100)
    rng = random.Random(4)
    draws = 100_000
    counts = {address: 0 for address in roster}
    for _ in range(draws):
        counts[sample_cluster_random(roster, 1, rng)[0]] += 1
    expected = draws / 100
    sigma = math.sqrt(draws * 0.01 * 0.99)
    for address in roster:
        assert abs(counts[address] - expected) < 3.5 * sigma


# -- weighted sampling --

def test_weighted_cluster_too_large_rejected():
    roster = addresses(3)
    weights = {a: 1.0 for a in roster}
    with pytest.raises(ClusterTooLarge):
        sample_cluster_weighted(roster, weights, 4, random.Random(5))


def test_weighted_sampling_requires_weights_for_all_nodes():
    roster = addresses(3)
    weights = {roster[0]: 1.0, roster[1]: 1.0}
    with pytest.raises(UnknownFog):
        sample_cluster_weighted(roster, weights, 2, random.Random(6))


def test_weighted_with_uniform_weights_matches_uniform_sampling():
    roster = addresses(20)
    weights = {a: 1.0 for a in roster}
    rng = random.Random(7)
    draws = 20_000
    counts = {a: 0 for a in roster}
    for _ in range(draws):
        for address in sample_cluster_weighted(roster, weights, 5, rng):
            counts[address] += 1
    inclusion = 5 / 20
    sigma = math.sqrt(draws * inclusion * (1 - inclusion))
    for address in roster:
        assert abs(counts[address] - draws * inclusion) < 4 * sigma


def test_weighted_heavy_node_frequency_matches_analytic_probability():
    roster = addresses(10)
    weights = {a: 1.0 for a in roster}
    weights[roster[0]] = 10.0
    rng = random.Random(8)
    draws = 100_000
    hits = 0
    for _ in range(draws):
        if sample_cluster_weighted(roster, weights, 1, rng)[0] == roster[0]:
            hits += 1
    p = 10.0 / 19.0
    sigma = math.sqrt(draws * p * (1 - p))
    assert abs(hits - draws * p) < 4 * sigma


def test_weighted_inclusion_grows_with_repeated_failures():
    roster = addresses(8)
    suspect = roster[3]
    frequencies = []
    for failures in (0, 2, 4):
        weights = {a: 1.0 for a in roster}
        for _ in range(failures):
            update_weight(weights, suspect, passed=False)
        rng = random.Random(9)
        hits = sum(
            suspect in sample_cluster_weighted(roster, weights, 2, rng)
            for _ in range(5000))
        frequencies.append(hits)
    assert frequencies[0] < frequencies[1] < frequencies[2]


def test_update_weight_rules():
    weights = {"a": 1.0, "b": 4.0}
    assert update_weight(weights, "a", passed=False) == 2.0
    assert update_weight(weights, "b", passed=True) == 2.0
    weights["a"] = 1.0
    assert update_weight(weights, "a", passed=True) == 1.0  # floor holds
    with pytest.raises(UnknownFog):
        update_weight(weights, "missing", passed=True)


# -- block designs --

@pytest.mark.parametrize("count,size", [(7, 3), (20, 5), (12, 1), (9, 9)])
def test_block_design_is_balanced(count, size):
    roster = addresses(count)
    blocks = build_bibd(roster, size)
    assert len(blocks) == count
    assert all(len(block) == size for block in blocks)
    assert all(len(set(block)) == size for block in blocks)
    counts = oracles.occurrence_counts(blocks)
    assert set(counts) == set(roster)
    assert all(c == size for c in counts.values())


def test_block_design_degenerate_sizes():
    roster = addresses(5)
    singletons = build_bibd(roster, 1)
    assert sorted(b[0] for b in singletons) == sorted(roster)
    full = build_bibd(roster, 5)
    assert all(sorted(block) == sorted(roster) for block in full)


def test_block_design_rejects_bad_sizes():
    with pytest.raises(InvalidDesign):
        build_bibd(addresses(3), 4)
    with pytest.raises(InvalidDesign):
        build_bibd(addresses(3), 0)
    with pytest.raises(InvalidDesign):
        build_bibd([], 1)


def test_next_cluster_cycles_through_every_block():
    roster = addresses(7)
    blocks = build_bibd(roster, 3)
    cursor = 0
    seen = []
    for _ in range(7):
        cluster, cursor = next_bibd_cluster(blocks, cursor)
        seen.append(tuple(cluster))
    assert sorted(seen) == sorted(tuple(b) for b in blocks)
    cluster, cursor = next_bibd_cluster(blocks, cursor)
    assert cluster == blocks[0]


def test_next_cluster_on_empty_design_rejected():
    with pytest.raises(EmptyDesign):
        next_bibd_cluster([], 0)


# -- scheduler wrapper --

@pytest.mark.parametrize("policy", list(Policy))
def test_scheduler_caps_cluster_at_roster_size(policy):
    scheduler = Scheduler(policy, 10, addresses(4), random.Random(11))
    cluster = scheduler.next_cluster()
    assert sorted(cluster) == sorted(addresses(4))


@pytest.mark.parametrize("policy", list(Policy))
def test_scheduler_on_empty_roster_returns_nothing(policy):
    scheduler = Scheduler(policy, 3, [], random.Random(12))
    assert scheduler.next_cluster() == []


def test_scheduler_ejection_rebuilds_design_and_resets_cursor():
    roster = addresses(7)
    scheduler = Scheduler(Policy.BIBD, 3, roster, random.Random(13))
    scheduler.next_cluster()
    scheduler.next_cluster()
    gone = roster[2]
    scheduler.eject(gone)
    assert scheduler.block_cursor == 0
    for _ in range(2 * len(scheduler.roster)):
        cluster = scheduler.next_cluster()
        assert gone not in cluster
    counts = oracles.occurrence_counts(scheduler.blocks)
    assert all(c == 3 for c in counts.values())


def test_scheduler_single_survivor_keeps_returning_it():
    scheduler = Scheduler(Policy.BIBD, 1, addresses(3), random.Random(14))
    scheduler.eject(addresses(3)[0])
    scheduler.eject(addresses(3)[1])
    for _ in range(3):
        assert scheduler.next_cluster() == [addresses(3)[2]]


def test_scheduler_weighted_learns_from_outcomes():
    roster = addresses(5)
    scheduler = Scheduler(Policy.WEIGHTED, 2, roster, random.Random(15))
    scheduler.record_outcome(roster[0], passed=False)
    scheduler.record_outcome(roster[0], passed=False)
    assert scheduler.weights[roster[0]] == 4.0
    scheduler.record_outcome(roster[0], passed=True)
    assert scheduler.weights[roster[0]] == 2.0
    scheduler.eject(roster[0])
    assert roster[0] not in scheduler.weights


def test_scheduler_note_request_gates_on_interval():
    scheduler = Scheduler(Policy.RANDOM, 1, addresses(2), random.Random(16))
    due = [scheduler.note_request(3) for _ in range(9)]
    assert due == [False, False, True] * 3


def test_scheduler_same_seed_same_cluster_sequence():
    roster = addresses(9)
    runs = []
    for _ in range(2):
        scheduler = Scheduler(Policy.WEIGHTED, 3, roster, random.Random(17))
        trace = []
        for step in range(20):
            cluster = scheduler.next_cluster()
            trace.append(tuple(cluster))
            scheduler.record_outcome(cluster[0], passed=step % 2 == 0)
        runs.append(trace)
    assert runs[0] == runs[1]


def test_scheduler_csv_dumps(tmp_path):
    scheduler = Scheduler(Policy.BIBD, 2, addresses(4), random.Random(18))
    weights_path = tmp_path / "weights.csv"
    blocks_path = tmp_path / "blocks.csv"
    scheduler.export_weights_csv(str(weights_path))
    scheduler.export_blocks_csv(str(blocks_path))
    weight_lines = weights_path.read_text().splitlines()
    block_lines = blocks_path.read_text().splitlines()
    assert weight_lines[0] == "fog_address,weight"
    assert len(weight_lines) == 5
    assert block_lines[0] == "block_index,members"
    assert len(block_lines) == 5
    assert block_lines[1].split(",")[1].count(";") == 1
