"""Shared exception types."""


class DegenerateSeriesError(ValueError):
    """A series carries no usable variation (fewer than two distinct values).

    Callers that can handle a constant column (e.g. the detection layer)
    catch this and treat the variable as carrying no influence information.
    """


class InternalConsistencyError(RuntimeError):
    """A numerical result violated an invariant beyond rounding tolerance."""
