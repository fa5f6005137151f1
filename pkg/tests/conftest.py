"""Shared builders for synthetic sample logs used across the test suite."""

import numpy as np
import pytest

from influence_scope import (
    AgentSchema,
    ConfigPartSchema,
    Nominal,
    SampleLog,
    SampleRecord,
)


def binary_agent(agent_id: str) -> AgentSchema:
    return AgentSchema(
        agent_id, (ConfigPartSchema("cfg", Nominal(("c1", "c2"))),)
    )


def coupled_log(n: int, seed: int = 0) -> SampleLog:
    """Two agents with uniform independent binary configurations.

    B's performance is 1.0 when the configurations agree and 0.5 when they
    disagree, so B depends on A only through B's own configuration.  A's
    performance is independent noise.
    """
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    noise = rng.uniform(size=n)
    cats = ("c1", "c2")
    records = []
    for t in range(n):
        perf_b = 1.0 if a[t] == b[t] else 0.5
        records.append(
            SampleRecord(
                t=t,
                config={("A", "cfg"): cats[a[t]], ("B", "cfg"): cats[b[t]]},
                performance={"A": float(noise[t]), "B": perf_b},
            )
        )
    return SampleLog(
        schemas=(binary_agent("A"), binary_agent("B")), records=tuple(records)
    )


def independent_log(n: int, seed: int = 0) -> SampleLog:
    """Two agents whose configurations and performances share nothing."""
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 2, size=n)
    b = rng.integers(0, 2, size=n)
    pa = rng.uniform(size=n)
    pb = rng.uniform(size=n)
    cats = ("c1", "c2")
    records = tuple(
        SampleRecord(
            t=t,
            config={("A", "cfg"): cats[a[t]], ("B", "cfg"): cats[b[t]]},
            performance={"A": float(pa[t]), "B": float(pb[t])},
        )
        for t in range(n)
    )
    return SampleLog(
        schemas=(binary_agent("A"), binary_agent("B")), records=records
    )


@pytest.fixture(scope="session")
def coupled_10k() -> SampleLog:
    return coupled_log(10000, seed=7)
