"""Recirculating-loop optical transmission simulator (hollow-core vs standard fibre)."""

from ._core import (
    ExperimentConfig,
    SweepPoint,
    config_hash,
    fiber_preset,
    list_presets,
    parse_config_file,
    parse_config_text,
    preset_config,
    run_point,
    run_sweep,
    run_to_files,
    shaped_constellation,
)

__all__ = [
    "ExperimentConfig",
    "SweepPoint",
    "config_hash",
    "fiber_preset",
    "list_presets",
    "parse_config_file",
    "parse_config_text",
    "preset_config",
    "run_point",
    "run_sweep",
    "run_to_files",
    "shaped_constellation",
]
