"""Random geometric graphs on radial Poisson processes."""

from ._core import (
    DensitySpec,
    Graph,
    NumericFailure,
    UsageError,
    ball_mass,
    classify,
    cube_mass,
    expected_isolated,
    poisson_tail_bound,
    radial_cdf,
    run_sweep,
    sample,
    tail_empty_prob,
    tail_mass,
    tau,
)

__all__ = [
    "DensitySpec",
    "Graph",
    "NumericFailure",
    "UsageError",
    "ball_mass",
    "classify",
    "cube_mass",
    "expected_isolated",
    "poisson_tail_bound",
    "radial_cdf",
    "run_sweep",
    "sample",
    "tail_empty_prob",
    "tail_mass",
    "tau",
]
