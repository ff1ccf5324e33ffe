"""Single-observation location inference: TA annuli and SSB sectors.

Exposed timing advance quantizes UE-to-cell distance into half-step bands;
an SSB beam index (or a TCI / spatial relation ID resolved through the
cell's beam tables) cuts the circle into azimuth sectors. Combining both
shrinks one observation to an annulus-sector intersection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple

from ..errors import IndexBeyondBeamCount, OutOfRange
from .cells import CellDb, CellRecord, LocalFrame, bearing_deg

SPEED_OF_LIGHT_MPS = 299792458.0
TC_S = 1.0 / (480000.0 * 4096.0)  # basic NR timing unit
TA_UNIT_S = 16.0 * 64.0 * TC_S  # advance per TA index at mu=0

TA_INDEX_MAX = 16383
MU_MAX = 4

KIND_CELL_AREA = "cell_area"
KIND_ANNULUS = "annulus"
KIND_SECTOR = "sector"
KIND_ANNULUS_SECTOR = "annulus_sector"
KIND_INTERSECTION = "intersection"
KIND_POINT = "point"

DEFAULT_CELL_RADIUS_M = 5000.0


class TaDistance(NamedTuple):
    d_center: float
    d_min: float
    d_max: float


def ta_step_m(numerology_mu: int) -> float:
    """Distance represented by one TA index at the given numerology."""
    if not 0 <= numerology_mu <= MU_MAX:
        raise OutOfRange(f"mu {numerology_mu} outside 0..{MU_MAX}")
    # round trip: one index advances the clock by TA_UNIT / 2^mu, the
    # one-way distance is half of that times c
    return TA_UNIT_S * SPEED_OF_LIGHT_MPS / float(2 ** (numerology_mu + 1))


def ta_to_distance(ta_index: int, numerology_mu: int) -> TaDistance:
    """Map a TA index to the center and bounds of its distance band."""
    if not 0 <= ta_index <= TA_INDEX_MAX:
        raise OutOfRange(f"ta_index {ta_index} outside 0..{TA_INDEX_MAX}")
    step = ta_step_m(numerology_mu)
    d_center = ta_index * step
    return TaDistance(d_center, max(0.0, d_center - step / 2.0), d_center + step / 2.0)


def ssb_to_sector(ssb_index: int, cell: CellRecord) -> tuple[float, float]:
    """Azimuth interval of one SSB beam: (az_min, az_max) degrees.

    The circle is split into beam_count uniform sectors, sector i centered
    at boresight + i * (360 / beam_count). Bounds are normalized to
    [0, 360); az_min > az_max encodes a wrap through north, and a single
    beam yields the full circle (0, 360).
    """
    if not 0 <= ssb_index < cell.beam_count:
        raise IndexBeyondBeamCount(
            f"ssb_index {ssb_index} on a {cell.beam_count}-beam cell"
        )
    if cell.beam_count == 1:
        return 0.0, 360.0
    width = 360.0 / cell.beam_count
    center = (cell.boresight_deg + ssb_index * width) % 360.0
    return (center - width / 2.0) % 360.0, (center + width / 2.0) % 360.0


def _interval_width(az_min: float, az_max: float) -> float:
    if az_min == 0.0 and az_max == 360.0:
        return 360.0
    return (az_max - az_min) % 360.0


def _angle_in(az: float, az_min: float, az_max: float, tol_deg: float = 1e-9) -> bool:
    width = _interval_width(az_min, az_max)
    if width == 360.0:
        return True
    return (az - az_min) % 360.0 <= width + tol_deg


@dataclass(frozen=True)
class RegionEstimate:
    """Geometric hypothesis for a UE position.

    All radial kinds are anchored at ``center`` (a cell position or a
    derived centroid); ``point`` carries candidate coordinates, possibly
    two when the geometry cannot pick a side.
    """

    kind: str
    center_lat: float
    center_lon: float
    r_min: float = 0.0
    r_max: float = 0.0
    az_min: float | None = None
    az_max: float | None = None
    points: tuple[tuple[float, float], ...] = ()
    parts: tuple["RegionEstimate", ...] = ()
    area_m2: float = 0.0
    ambiguous: bool = False
    cell_id: int | None = None

    def __post_init__(self) -> None:
        if self.r_min < 0 or self.r_max < self.r_min:
            raise ValueError("need 0 <= r_min <= r_max")

    @property
    def point(self) -> tuple[float, float] | None:
        return self.points[0] if self.points else None

    def centroid(self) -> tuple[float, float]:
        """Representative (lat, lon) used for trajectories and motion."""
        if self.kind == KIND_POINT and self.points:
            lat = sum(p[0] for p in self.points) / len(self.points)
            lon = sum(p[1] for p in self.points) / len(self.points)
            return lat, lon
        if self.kind in (KIND_ANNULUS, KIND_ANNULUS_SECTOR, KIND_SECTOR):
            frame = LocalFrame(self.center_lat, self.center_lon)
            r_mid = (self.r_min + self.r_max) / 2.0
            if self.az_min is None or _interval_width(self.az_min, self.az_max) == 360.0:
                return self.center_lat, self.center_lon
            width = _interval_width(self.az_min, self.az_max)
            az_mid = math.radians((self.az_min + width / 2.0) % 360.0)
            return frame.to_latlon(r_mid * math.sin(az_mid), r_mid * math.cos(az_mid))
        return self.center_lat, self.center_lon

    def contains(self, lat: float, lon: float, tol_m: float = 1e-6) -> bool:
        if self.kind == KIND_POINT:
            frame = LocalFrame(self.center_lat, self.center_lon)
            x, y = frame.to_xy(lat, lon)
            for plat, plon in self.points:
                px, py = frame.to_xy(plat, plon)
                if math.hypot(x - px, y - py) <= max(tol_m, 1e-3):
                    return True
            return False
        if self.kind == KIND_INTERSECTION:
            return all(p.contains(lat, lon, tol_m) for p in self.parts)
        frame = LocalFrame(self.center_lat, self.center_lon)
        x, y = frame.to_xy(lat, lon)
        r = math.hypot(x, y)
        if not (self.r_min - tol_m <= r <= self.r_max + tol_m):
            return False
        if self.az_min is None:
            return True
        return _angle_in(bearing_deg(x, y), self.az_min, self.az_max)

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "center": [self.center_lat, self.center_lon],
            "r_min": self.r_min,
            "r_max": self.r_max,
            "area_m2": self.area_m2,
            "ambiguous": self.ambiguous,
        }
        if self.az_min is not None:
            out["az_min"] = self.az_min
            out["az_max"] = self.az_max
        if self.points:
            out["points"] = [[lat, lon] for lat, lon in self.points]
        if self.cell_id is not None:
            out["cell_id"] = self.cell_id
        if self.parts:
            out["parts"] = [p.to_dict() for p in self.parts]
        return out


def _sector_fraction(az_min: float | None, az_max: float | None) -> float:
    if az_min is None:
        return 1.0
    return _interval_width(az_min, az_max) / 360.0


def _ring_area(r_min: float, r_max: float) -> float:
    return math.pi * (r_max * r_max - r_min * r_min)


@dataclass(frozen=True)
class ObservationEvent:
    """One captured exposure tying a UE reference to radio geometry hints.

    ``distance_m`` is an attacker-refined exact range (averaged timing
    measurements); when present it overrides the quantized TA band.
    """

    time_s: float
    ue_ref: str
    cell_id: int
    ta_index: int | None = None
    ssb_index: int | None = None
    tci_state_id: int | None = None
    spatial_relation_id: int | None = None
    distance_m: float | None = None
    extra: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.ta_index is not None and not 0 <= self.ta_index <= TA_INDEX_MAX:
            raise OutOfRange(f"ta_index {self.ta_index} outside 0..{TA_INDEX_MAX}")
        if self.ssb_index is not None and not 0 <= self.ssb_index <= 63:
            raise OutOfRange(f"ssb_index {self.ssb_index} outside 0..63")
        if self.distance_m is not None and self.distance_m < 0:
            raise OutOfRange("distance_m must be >= 0")

    def to_dict(self) -> dict:
        out = {"time_s": self.time_s, "ue_ref": self.ue_ref, "cell_id": self.cell_id}
        for name in ("ta_index", "ssb_index", "tci_state_id", "spatial_relation_id", "distance_m"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        if self.extra:
            out["extra"] = dict(self.extra)
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "ObservationEvent":
        return cls(
            time_s=float(obj["time_s"]),
            ue_ref=str(obj["ue_ref"]),
            cell_id=int(obj["cell_id"]),
            ta_index=None if obj.get("ta_index") is None else int(obj["ta_index"]),
            ssb_index=None if obj.get("ssb_index") is None else int(obj["ssb_index"]),
            tci_state_id=None
            if obj.get("tci_state_id") is None
            else int(obj["tci_state_id"]),
            spatial_relation_id=None
            if obj.get("spatial_relation_id") is None
            else int(obj["spatial_relation_id"]),
            distance_m=None if obj.get("distance_m") is None else float(obj["distance_m"]),
            extra=dict(obj.get("extra", {})),
        )


def load_observations(path: str | Path) -> list[ObservationEvent]:
    """Read observation events from a JSON-lines file."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(ObservationEvent.from_dict(json.loads(line)))
    return events


def estimate_region(
    event: ObservationEvent,
    db: CellDb,
    default_radius_m: float = DEFAULT_CELL_RADIUS_M,
) -> RegionEstimate:
    """Region the single observation pins the UE to.

    Refinement ladder: cell alone gives a default-radius disk; a TA index
    narrows it to an annulus (an exact distance_m to a zero-width ring);
    a resolvable beam cuts the result to its azimuth sector.
    """
    cell = db.get(event.cell_id)
    beam = cell.beam_for(
        ssb_index=event.ssb_index,
        tci_state_id=event.tci_state_id,
        spatial_relation_id=event.spatial_relation_id,
    )
    sector = None
    if beam is not None:
        sector = ssb_to_sector(beam, cell)

    if event.distance_m is not None:
        r_min = r_max = event.distance_m
        radial = True
    elif event.ta_index is not None:
        _, r_min, r_max = ta_to_distance(event.ta_index, cell.mu)
        radial = True
    else:
        r_min, r_max = 0.0, default_radius_m
        radial = False

    if radial and sector is not None:
        kind = KIND_ANNULUS_SECTOR
    elif radial:
        kind = KIND_ANNULUS
    elif sector is not None:
        kind = KIND_SECTOR
    else:
        kind = KIND_CELL_AREA

    az_min, az_max = sector if sector is not None else (None, None)
    area = _ring_area(r_min, r_max) * _sector_fraction(az_min, az_max)
    return RegionEstimate(
        kind=kind,
        center_lat=cell.lat,
        center_lon=cell.lon,
        r_min=r_min,
        r_max=r_max,
        az_min=az_min,
        az_max=az_max,
        area_m2=area,
        cell_id=cell.cell_id,
    )
