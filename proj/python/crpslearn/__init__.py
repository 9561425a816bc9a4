"""Online aggregation of quantile forecasts with smoothed Bernstein online aggregation."""

from ._core import (
    Combiner,
    InputError,
    NumericalError,
    boa,
    boa_grid,
    combine_sorted,
    crps_grid,
    crps_series,
    dm_test,
    ewa,
    expert_slab,
    naive,
    normal_quantile,
    percentiles,
    pinball,
    simulate_drifting,
    simulate_static,
)

__all__ = [
    "Combiner",
    "InputError",
    "NumericalError",
    "boa",
    "boa_grid",
    "combine_sorted",
    "crps_grid",
    "crps_series",
    "dm_test",
    "ewa",
    "expert_slab",
    "naive",
    "normal_quantile",
    "percentiles",
    "pinball",
    "simulate_drifting",
    "simulate_static",
]
