"""Choosing a detection strategy from system characteristics.

A system descriptor captures what is known up front: how dependencies are
expected to behave, which kinds of configuration parts exist, whether
effects are delayed or joint.  The recommender maps that to concrete
detection settings and explains each choice.
"""

from influence_scope import builtin_descriptor, recommend_strategy
from influence_scope.taxonomy import (
    AgentScale,
    CommKind,
    Communication,
    DependencyClass,
    Distinctiveness,
    InfluenceLocality,
    Jointness,
    NominalPart,
    SystemDescriptor,
    Temporality,
)


def show(title, descriptor):
    rec = recommend_strategy(descriptor)
    s = rec.strategy
    print(f"{title}:")
    print(
        f"  measure={s.measure_kind.value}, lags={list(s.lag_set)},"
        f" joint_pairs={s.joint_pairs}, permutations={s.permutations}"
    )
    for note in rec.notes:
        print(f"  - {note}")
    print()


def main():
    show("smart camera network (builtin)", builtin_descriptor("scn"))

    show(
        "delayed, joint, categorical system",
        SystemDescriptor(
            agent_scale=AgentScale.LARGE,
            part_kinds=(NominalPart(4), NominalPart(2)),
            communication=Communication(CommKind.NEIGHBORS_ONLY),
            influence_locality=InfluenceLocality.MULTI_HOP,
            jointness=Jointness.JOINT,
            dependency_class=DependencyClass.STOCHASTIC,
            distinctiveness=Distinctiveness.SUBTLE,
            temporality=Temporality(delayed=True, max_lag=2),
        ),
    )


if __name__ == "__main__":
    main()
