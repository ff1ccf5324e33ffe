"""Geolocation inference from exposed MAC CE fields."""

from .cells import CSV_HEADER, CellDb, CellRecord, EARTH_RADIUS_M, LocalFrame, bearing_deg
from .locate import (
    MotionStep,
    ProfileCell,
    ProfileReport,
    RESIDENCE_LABEL,
    TrajectoryReport,
    TrajectoryStep,
    WORKPLACE_LABEL,
    long_term_profile,
    reconstruct_trajectory,
    triangulate,
)
from .regions import (
    DEFAULT_CELL_RADIUS_M,
    KIND_ANNULUS,
    KIND_ANNULUS_SECTOR,
    KIND_CELL_AREA,
    KIND_INTERSECTION,
    KIND_POINT,
    KIND_SECTOR,
    ObservationEvent,
    RegionEstimate,
    SPEED_OF_LIGHT_MPS,
    TA_INDEX_MAX,
    TA_UNIT_S,
    TaDistance,
    estimate_region,
    load_observations,
    ssb_to_sector,
    ta_step_m,
    ta_to_distance,
)
from .sketch import render_svg

__all__ = [
    "CSV_HEADER",
    "CellDb",
    "CellRecord",
    "DEFAULT_CELL_RADIUS_M",
    "EARTH_RADIUS_M",
    "KIND_ANNULUS",
    "KIND_ANNULUS_SECTOR",
    "KIND_CELL_AREA",
    "KIND_INTERSECTION",
    "KIND_POINT",
    "KIND_SECTOR",
    "LocalFrame",
    "MotionStep",
    "ObservationEvent",
    "ProfileCell",
    "ProfileReport",
    "RESIDENCE_LABEL",
    "RegionEstimate",
    "SPEED_OF_LIGHT_MPS",
    "TA_INDEX_MAX",
    "TA_UNIT_S",
    "TaDistance",
    "TrajectoryReport",
    "TrajectoryStep",
    "WORKPLACE_LABEL",
    "bearing_deg",
    "estimate_region",
    "load_observations",
    "long_term_profile",
    "reconstruct_trajectory",
    "render_svg",
    "ssb_to_sector",
    "ta_step_m",
    "ta_to_distance",
    "triangulate",
]
