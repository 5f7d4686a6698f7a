"""Configuration, reference caching, studies and the command-line interface."""
from .config import ConfigError, MethodSpec, RunConfig, load_config, parse_config
from .reference import (
    CacheWarning,
    ReferenceSolution,
    compute_reference,
    h1_error_vs_reference,
    load_reference,
    problem_hash,
    reference_path,
    save_reference,
)
from .studies import (
    CSV_COLUMNS,
    Cell,
    EnergyTrace,
    ErrorRecord,
    fill_rates,
    records_to_csv,
    run_cell,
    run_energy_trace,
    run_solve,
    run_spatial_study,
    run_stability_study,
    run_temporal_study,
    worker_count,
)

__all__ = [
    "ConfigError", "MethodSpec", "RunConfig", "load_config", "parse_config",
    "CacheWarning", "ReferenceSolution", "compute_reference", "h1_error_vs_reference",
    "load_reference", "problem_hash", "reference_path", "save_reference",
    "CSV_COLUMNS", "Cell", "EnergyTrace", "ErrorRecord", "fill_rates", "records_to_csv",
    "run_cell", "run_energy_trace", "run_solve", "run_spatial_study", "run_stability_study",
    "run_temporal_study", "worker_count",
]
