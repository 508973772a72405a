"""Community epidemic portraits.

Turns case records, census risk factors, boundary polygons and intervention
headlines into per-community crown glyphs (case bars + factor wave strands),
with coordinated heatmap, ranking and parallel-coordinate analytics behind a
read-only HTTP API and a batch CLI.
"""

from .config import AppConfig, PhaseRules, PortraitConfig, load_config
from .geometry import (build_filter_trigger, build_portrait, category_stats,
                       eq4_literal, protein_height, rna_arc_angle,
                       rna_arc_length, rna_wave_path)
from .ingest import (DatasetSnapshot, generate_fixture, load_snapshot,
                     parse_boundaries, parse_cases, parse_events,
                     parse_profiles, snapshot_id)
from .layout import LayoutBody, pin, run_layout, unpin
from .temporal import build_grid, bucket_cases, classify_phases

__all__ = [
    "AppConfig", "PhaseRules", "PortraitConfig", "load_config",
    "build_filter_trigger", "build_portrait", "category_stats",
    "eq4_literal", "protein_height", "rna_arc_angle", "rna_arc_length",
    "rna_wave_path",
    "DatasetSnapshot", "generate_fixture", "load_snapshot",
    "parse_boundaries", "parse_cases", "parse_events", "parse_profiles",
    "snapshot_id",
    "LayoutBody", "pin", "run_layout", "unpin",
    "build_grid", "bucket_cases", "classify_phases",
]

__version__ = "0.1.0"
