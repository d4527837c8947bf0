"""Python access to the esbench core: metrics, kernels, config and the CLI."""

from esbench._core import (
    EsbError,
    __version__,
    build_report,
    default_config,
    exponential_think_time,
    micro_bench,
    parse_config,
    percentile,
    run_cli,
    stage_names,
    tier_sizes,
)

__all__ = [
    "EsbError",
    "__version__",
    "build_report",
    "default_config",
    "exponential_think_time",
    "micro_bench",
    "parse_config",
    "percentile",
    "run_cli",
    "stage_names",
    "tier_sizes",
]
