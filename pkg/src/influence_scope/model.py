"""Agent schemas and the sample-log format consumed by every detector.

A log is a time-ordered sequence of records, each holding every agent's
configuration-part values and one performance scalar per agent.  Nominal
and ordinal parts carry category labels; real-valued parts carry floats
inside a declared interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .series import CategorySeries, RealSeries, Series

ConfigValue = Union[str, float]
PartKey = tuple[str, str]  # (agent_id, part name)


@dataclass(frozen=True)
class Nominal:
    """Unordered categories."""

    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.categories) < 2:
            raise ValueError("nominal parts need at least 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("duplicate category labels")


@dataclass(frozen=True)
class Ordinal:
    """Ordered categories; the declared order is the rank order."""

    categories: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.categories) < 2:
            raise ValueError("ordinal parts need at least 2 categories")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("duplicate category labels")


@dataclass(frozen=True)
class RealInterval:
    """A real-valued part bounded to [lower, upper]."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not (self.lower < self.upper):
            raise ValueError("interval requires lower < upper")


PartKind = Union[Nominal, Ordinal, RealInterval]


@dataclass(frozen=True)
class ConfigPartSchema:
    name: str
    kind: PartKind


@dataclass(frozen=True)
class AgentSchema:
    agent_id: str
    parts: tuple[ConfigPartSchema, ...]

    def __post_init__(self) -> None:
        names = [p.name for p in self.parts]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate part names in agent {self.agent_id!r}")

    def part(self, name: str) -> ConfigPartSchema:
        for p in self.parts:
            if p.name == name:
                return p
        raise KeyError(f"agent {self.agent_id!r} has no part {name!r}")


@dataclass(frozen=True)
class SampleRecord:
    t: int
    config: dict[PartKey, ConfigValue]
    performance: dict[str, float]


@dataclass(frozen=True)
class SampleLog:
    schemas: tuple[AgentSchema, ...]
    records: tuple[SampleRecord, ...]

    def agent(self, agent_id: str) -> AgentSchema:
        for schema in self.schemas:
            if schema.agent_id == agent_id:
                return schema
        raise KeyError(f"unknown agent {agent_id!r}")

    @property
    def agent_ids(self) -> tuple[str, ...]:
        return tuple(s.agent_id for s in self.schemas)


@dataclass(frozen=True)
class Issue:
    """One validation finding; record_index is None for schema-level issues."""

    record_index: int | None
    path: str
    message: str


def validate_log(log: SampleLog) -> list[Issue]:
    """Check every log invariant; an empty list means the log is valid."""
    issues: list[Issue] = []

    seen_agents: set[str] = set()
    for schema in log.schemas:
        if schema.agent_id in seen_agents:
            issues.append(Issue(None, schema.agent_id, "duplicate agent id"))
        seen_agents.add(schema.agent_id)

    declared: set[PartKey] = set()
    for schema in log.schemas:
        for part in schema.parts:
            declared.add((schema.agent_id, part.name))

    prev_t: int | None = None
    for i, record in enumerate(log.records):
        if record.t < 0:
            issues.append(Issue(i, "t", f"negative time step {record.t}"))
        if prev_t is not None and record.t <= prev_t:
            issues.append(
                Issue(i, "t", f"time steps not strictly increasing ({prev_t} -> {record.t})")
            )
        prev_t = record.t

        for key in record.config:
            if key not in declared:
                issues.append(Issue(i, f"{key[0]}.{key[1]}", "undeclared config part"))
        for schema in log.schemas:
            for part in schema.parts:
                key = (schema.agent_id, part.name)
                if key not in record.config:
                    issues.append(Issue(i, f"{key[0]}.{key[1]}", "missing config value"))
                    continue
                value = record.config[key]
                kind = part.kind
                if isinstance(kind, (Nominal, Ordinal)):
                    if value not in kind.categories:
                        issues.append(
                            Issue(i, f"{key[0]}.{key[1]}", f"unknown category {value!r}")
                        )
                else:
                    if not isinstance(value, (int, float)) or not math.isfinite(float(value)):
                        issues.append(
                            Issue(i, f"{key[0]}.{key[1]}", f"non-finite value {value!r}")
                        )
                    elif not (kind.lower <= float(value) <= kind.upper):
                        issues.append(
                            Issue(
                                i,
                                f"{key[0]}.{key[1]}",
                                f"value {value!r} outside [{kind.lower}, {kind.upper}]",
                            )
                        )
            if schema.agent_id not in record.performance:
                issues.append(Issue(i, f"{schema.agent_id}.perf", "missing performance"))
            elif not math.isfinite(float(record.performance[schema.agent_id])):
                issues.append(Issue(i, f"{schema.agent_id}.perf", "non-finite performance"))
        for agent_id in record.performance:
            if agent_id not in seen_agents:
                issues.append(Issue(i, f"{agent_id}.perf", "performance for unknown agent"))
    return issues


@dataclass(frozen=True)
class ConfigSelector:
    agent_id: str
    part: str


@dataclass(frozen=True)
class PerformanceSelector:
    agent_id: str


Selector = Union[ConfigSelector, PerformanceSelector]


def extract_series(log: SampleLog, source: Selector, lag: int = 0) -> Series:
    """Extract one column, aligned for a configuration-to-performance lag.

    With lag L a configuration column keeps its first ``N - L`` entries and
    a performance column drops its first L, so that configuration at time t
    lines up with performance at time t + L.  Both sides end up with the
    same length.
    """
    n = len(log.records)
    if lag < 0:
        raise ValueError("lag must be >= 0")
    if lag >= n:
        raise ValueError(f"lag {lag} >= record count {n}")

    if isinstance(source, PerformanceSelector):
        log.agent(source.agent_id)
        values = np.array(
            [float(r.performance[source.agent_id]) for r in log.records[lag:]]
        )
        return RealSeries(values)

    schema = log.agent(source.agent_id)
    part = schema.part(source.part)
    rows = log.records[: n - lag]
    key = (source.agent_id, source.part)
    if isinstance(part.kind, (Nominal, Ordinal)):
        index = {label: i for i, label in enumerate(part.kind.categories)}
        codes = np.array([index[r.config[key]] for r in rows], dtype=np.int64)
        return CategorySeries(codes, len(part.kind.categories))
    values = np.array([float(r.config[key]) for r in rows])
    return RealSeries(values)
