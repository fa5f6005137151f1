"""Influence detection: raw and conditioned scores, the matrix pipeline and
its significance layer."""

import math

import numpy as np
import pytest

from influence_scope import (
    AgentSchema,
    ConfigPartSchema,
    DetectionStrategy,
    Measure,
    Nominal,
    RealInterval,
    SampleLog,
    SampleRecord,
    conditioned_influence,
    entropy,
    extract_series,
    influence_matrix,
    joint_influence,
    raw_influence,
)
from influence_scope.model import ConfigSelector

from conftest import coupled_log, independent_log

FAST = DetectionStrategy(permutations=99)


def single_part_schema(agent_id, cats=("c1", "c2")):
    return AgentSchema(agent_id, (ConfigPartSchema("cfg", Nominal(cats)),))


# --- raw influence ----------------------------------------------------------


def test_raw_influence_invisible_on_agreement_coupling(coupled_10k):
    score = raw_influence(coupled_10k, "B", ("A", "cfg"), FAST)
    assert score.value <= 0.005


def test_raw_influence_copy_equals_entropy():
    rng = np.random.default_rng(0)
    n = 600
    a = rng.integers(0, 2, size=n)
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t,
            {("A", "cfg"): cats[a[t]], ("B", "cfg"): "c1"},
            {"A": 0.0, "B": float(a[t])},
        )
        for t in range(n)
    )
    log = SampleLog(
        (single_part_schema("A"), AgentSchema("B", (ConfigPartSchema("cfg", Nominal(cats)),))),
        records,
    )
    score = raw_influence(log, "B", ("A", "cfg"), FAST)
    cfg = extract_series(log, ConfigSelector("A", "cfg"))
    assert score.value == pytest.approx(entropy(cfg).value, abs=1e-9)


def test_raw_influence_picks_winning_lag():
    rng = np.random.default_rng(2)
    n = 500
    a = rng.integers(0, 2, size=n)
    cats = ("c1", "c2")
    records = []
    for t in range(n):
        prev = a[t - 1] if t > 0 else 0
        records.append(
            SampleRecord(
                t,
                {("A", "cfg"): cats[a[t]], ("B", "cfg"): "c1"},
                {"A": 0.0, "B": float(prev)},
            )
        )
    log = SampleLog(
        (single_part_schema("A"), single_part_schema("B")), tuple(records)
    )
    strategy = DetectionStrategy(lag_set=(0, 1), permutations=99)
    score = raw_influence(log, "B", ("A", "cfg"), strategy)
    assert score.lag == 1
    assert score.value > 0.9


def test_raw_influence_rejects_self_remote():
    with pytest.raises(ValueError):
        raw_influence(coupled_log(100), "B", ("B", "cfg"), FAST)


# --- conditioned influence -----------------------------------------------------


def test_conditioning_reveals_agreement_coupling(coupled_10k):
    cs = conditioned_influence(coupled_10k, "B", ("A", "cfg"), ("B", "cfg"), FAST)
    assert cs.aggregate is not None
    assert cs.aggregate >= 0.98
    raw = raw_influence(coupled_10k, "B", ("A", "cfg"), FAST)
    assert cs.aggregate - raw.value > 0.9


def test_conditioning_on_independent_noise_stays_low():
    log = independent_log(4000, seed=3)
    cs = conditioned_influence(log, "B", ("A", "cfg"), ("B", "cfg"), FAST)
    assert cs.aggregate is not None
    assert cs.aggregate < 0.01


def test_conditioning_on_constant_part_equals_raw():
    rng = np.random.default_rng(4)
    n = 800
    a = rng.integers(0, 2, size=n)
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t,
            {("A", "cfg"): cats[a[t]], ("B", "cfg"): "c1"},
            {"A": 0.0, "B": float(a[t]) + 0.1 * rng.standard_normal()},
        )
        for t in range(n)
    )
    log = SampleLog((single_part_schema("A"), single_part_schema("B")), records)
    cs = conditioned_influence(log, "B", ("A", "cfg"), ("B", "cfg"), FAST)
    raw = raw_influence(log, "B", ("A", "cfg"), FAST)
    assert len(cs.per_partition) == 1
    assert cs.aggregate == pytest.approx(raw.value, abs=1e-12)


def test_conditioned_weighted_mean_identity(coupled_10k):
    cs = conditioned_influence(coupled_10k, "B", ("A", "cfg"), ("B", "cfg"), FAST)
    used = [p for p in cs.per_partition if p.count >= FAST.min_partition_size]
    recomputed = sum(p.count * p.score.value for p in used) / sum(p.count for p in used)
    assert cs.aggregate == pytest.approx(recomputed, abs=1e-12)


def test_conditioned_insufficient_data_flag():
    log = coupled_log(60, seed=1)
    strategy = DetectionStrategy(min_partition_size=100, permutations=99)
    cs = conditioned_influence(log, "B", ("A", "cfg"), ("B", "cfg"), strategy)
    assert cs.insufficient_data
    assert cs.aggregate is None


# --- influence matrix -----------------------------------------------------------


def test_matrix_flags_only_the_coupled_entry(coupled_10k):
    matrix = influence_matrix(coupled_10k, FAST)
    entry = matrix.entries[("B", "A", "cfg")]
    assert entry.influenced
    assert entry.p_value <= 0.01
    assert not matrix.entries[("A", "B", "cfg")].influenced


def test_matrix_unconditioned_variant_misses_it(coupled_10k):
    matrix = influence_matrix(coupled_10k, FAST, conditioning=False)
    assert not matrix.entries[("B", "A", "cfg")].influenced


def test_matrix_has_no_self_entries(coupled_10k):
    assert all(t != r for t, r, _ in influence_matrix(coupled_10k, FAST).entries)


def test_matrix_is_deterministic():
    log = coupled_log(1500, seed=9)
    first = influence_matrix(log, FAST)
    second = influence_matrix(log, FAST)
    assert first.entries == second.entries


def test_matrix_threads_match_serial():
    log = coupled_log(1500, seed=9)
    serial = influence_matrix(log, FAST)
    threaded = influence_matrix(log, FAST, threads=4)
    assert serial.entries == threaded.entries


def test_matrix_relabeling_equivariance():
    log = coupled_log(1500, seed=12)
    renamed_schemas = tuple(
        AgentSchema("agent_" + s.agent_id, s.parts) for s in log.schemas
    )
    renamed_records = tuple(
        SampleRecord(
            r.t,
            {("agent_" + a, p): v for (a, p), v in r.config.items()},
            {"agent_" + a: v for a, v in r.performance.items()},
        )
        for r in log.records
    )
    renamed = SampleLog(renamed_schemas, renamed_records)
    base = influence_matrix(log, FAST)
    mapped = influence_matrix(renamed, FAST)
    for (t, r, p), entry in base.entries.items():
        twin = mapped.entries[("agent_" + t, "agent_" + r, p)]
        assert twin.headline == entry.headline
        assert twin.p_value == entry.p_value
        assert twin.influenced == entry.influenced


def test_matrix_symmetric_xor_coupling_both_directions():
    rng = np.random.default_rng(21)
    n = 4000
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    x = a ^ b
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t,
            {("A", "cfg"): cats[a[t]], ("B", "cfg"): cats[b[t]]},
            {"A": float(x[t]), "B": float(x[t])},
        )
        for t in range(n)
    )
    log = SampleLog((single_part_schema("A"), single_part_schema("B")), records)
    matrix = influence_matrix(log, FAST)
    assert matrix.entries[("B", "A", "cfg")].influenced
    assert matrix.entries[("A", "B", "cfg")].influenced


def test_matrix_monotone_encoding_invariance():
    rng = np.random.default_rng(17)
    n = 1200
    a = rng.uniform(size=n)
    b = rng.uniform(size=n)
    perf_b = np.where((a > 0.5) == (b > 0.5), 1.0, 0.5)
    schema = lambda name: AgentSchema(
        name, (ConfigPartSchema("knob", RealInterval(-100.0, 100.0)),)
    )

    def build(transform):
        records = tuple(
            SampleRecord(
                t,
                {("A", "knob"): float(transform(a[t])), ("B", "knob"): float(b[t])},
                {"A": 0.0, "B": float(perf_b[t])},
            )
            for t in range(n)
        )
        return SampleLog((schema("A"), schema("B")), records)

    base = influence_matrix(build(lambda v: v), FAST, targets=["B"])
    warped = influence_matrix(build(lambda v: math.exp(3 * v)), FAST, targets=["B"])
    for key, entry in base.entries.items():
        assert warped.entries[key].headline == entry.headline
        assert warped.entries[key].p_value == entry.p_value


def test_matrix_requires_two_agents():
    log = coupled_log(50)
    solo = SampleLog(
        (log.schemas[0],),
        tuple(
            SampleRecord(r.t, {("A", "cfg"): r.config[("A", "cfg")]}, {"A": r.performance["A"]})
            for r in log.records
        ),
    )
    with pytest.raises(ValueError):
        influence_matrix(solo, FAST)


# --- joint influence --------------------------------------------------------------


def xor_log(n=4000, seed=8):
    """C's performance is the XOR of A's and B's binary parts."""
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t,
            {
                ("A", "cfg"): cats[a[t]],
                ("B", "cfg"): cats[b[t]],
                ("C", "cfg"): "c1",
            },
            {"A": 0.0, "B": 0.0, "C": float(a[t] ^ b[t])},
        )
        for t in range(n)
    )
    schemas = (
        single_part_schema("A"),
        single_part_schema("B"),
        single_part_schema("C"),
    )
    return SampleLog(schemas, records)


JOINT = DetectionStrategy(joint_pairs=True, permutations=99)


def test_joint_score_reveals_xor():
    log = xor_log()
    single_a = raw_influence(log, "C", ("A", "cfg"), JOINT)
    single_b = raw_influence(log, "C", ("B", "cfg"), JOINT)
    pair = joint_influence(log, "C", (("A", "cfg"), ("B", "cfg")), JOINT)
    assert single_a.value < 0.01
    assert single_b.value < 0.01
    assert pair.aggregate is not None
    assert pair.aggregate > 0.95


def test_joint_score_tracks_single_part_when_one_suffices():
    rng = np.random.default_rng(14)
    n = 4000
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t,
            {("A", "cfg"): cats[a[t]], ("B", "cfg"): cats[b[t]], ("C", "cfg"): "c1"},
            {"A": 0.0, "B": 0.0, "C": float(a[t])},
        )
        for t in range(n)
    )
    schemas = (
        single_part_schema("A"),
        single_part_schema("B"),
        single_part_schema("C"),
    )
    log = SampleLog(schemas, records)
    single = raw_influence(log, "C", ("A", "cfg"), JOINT)
    pair = joint_influence(log, "C", (("A", "cfg"), ("B", "cfg")), JOINT)
    assert pair.aggregate == pytest.approx(single.value, abs=0.01)


def test_joint_score_null_stays_quiet():
    quiet = 0
    for seed in range(20):
        log = xor_log(n=500, seed=100 + seed)
        # break the coupling: fresh independent performance
        rng = np.random.default_rng(seed)
        records = tuple(
            SampleRecord(r.t, r.config, {**r.performance, "C": float(v)})
            for r, v in zip(log.records, rng.uniform(size=len(log.records)))
        )
        log = SampleLog(log.schemas, records)
        pair = joint_influence(log, "C", (("A", "cfg"), ("B", "cfg")), JOINT)
        if pair.aggregate is not None and pair.aggregate < 0.05:
            quiet += 1
    assert quiet >= 19


def test_joint_requires_enabled_strategy():
    with pytest.raises(ValueError):
        joint_influence(xor_log(200), "C", (("A", "cfg"), ("B", "cfg")), FAST)
