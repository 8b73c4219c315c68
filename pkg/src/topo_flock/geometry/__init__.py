from __future__ import annotations

from topo_flock.geometry.distance import (
    ArcCounter,
    canonical_arc,
    mass_of_ball,
    max_offset_for,
    offset_distances,
    signed_offsets,
    topo_distance_1d,
    topo_distance_discrete,
)
from topo_flock.geometry.region import (
    REGION_SHAPES,
    CommRegion,
    enclosure_violations,
    region_contains,
    region_members,
    sample_region,
)

__all__ = [
    "REGION_SHAPES",
    "ArcCounter",
    "CommRegion",
    "canonical_arc",
    "enclosure_violations",
    "mass_of_ball",
    "max_offset_for",
    "offset_distances",
    "region_contains",
    "region_members",
    "sample_region",
    "signed_offsets",
    "topo_distance_1d",
    "topo_distance_discrete",
]
