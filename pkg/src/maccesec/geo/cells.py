"""Cell database and the local planar frame used by all geometry."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import UnknownCell

EARTH_RADIUS_M = 6371000.0

CSV_HEADER = ["cell_id", "pci", "lat", "lon", "boresight_deg", "beam_count", "mu"]


@dataclass(frozen=True)
class CellRecord:
    cell_id: int
    pci: int
    lat: float
    lon: float
    boresight_deg: float
    beam_count: int
    mu: int
    beam_by_tci: Mapping[int, int] = field(default_factory=dict)
    beam_by_spatial: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not -90.0 <= self.lat <= 90.0:
            raise ValueError(f"lat {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise ValueError(f"lon {self.lon} outside [-180, 180]")
        if not 0.0 <= self.boresight_deg < 360.0:
            raise ValueError(f"boresight {self.boresight_deg} outside [0, 360)")
        bc = self.beam_count
        if bc < 1 or bc > 64 or bc & (bc - 1):
            raise ValueError(f"beam_count {bc} not a power of two in 1..64")
        if not 0 <= self.mu <= 4:
            raise ValueError(f"numerology mu {self.mu} outside 0..4")

    def beam_for(self, ssb_index=None, tci_state_id=None, spatial_relation_id=None):
        """Resolve whichever beam hint the observation carries, if any."""
        if ssb_index is not None:
            return ssb_index
        if tci_state_id is not None:
            return self.beam_by_tci.get(tci_state_id)
        if spatial_relation_id is not None:
            return self.beam_by_spatial.get(spatial_relation_id)
        return None


class CellDb:
    def __init__(self, cells: Iterable[CellRecord]) -> None:
        self._cells: dict[int, CellRecord] = {}
        for c in cells:
            if c.cell_id in self._cells:
                raise ValueError(f"cell_id {c.cell_id} appears twice")
            self._cells[c.cell_id] = c

    def __len__(self) -> int:
        return len(self._cells)

    def __iter__(self):
        return iter(self._cells.values())

    def get(self, cell_id: int) -> CellRecord:
        cell = self._cells.get(cell_id)
        if cell is None:
            raise UnknownCell(f"cell_id {cell_id} not in the database")
        return cell

    @classmethod
    def from_csv(
        cls, path: str | Path, beam_map_path: str | Path | None = None
    ) -> "CellDb":
        beam_maps: dict = {}
        if beam_map_path is not None:
            with open(beam_map_path, "r", encoding="utf-8") as fh:
                beam_maps = json.load(fh)
        cells = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or list(reader.fieldnames) != CSV_HEADER:
                raise ValueError(
                    f"cell CSV header must be {','.join(CSV_HEADER)}, "
                    f"got {reader.fieldnames}"
                )
            for row in reader:
                bm = beam_maps.get(str(row["cell_id"]), {})
                cells.append(
                    CellRecord(
                        cell_id=int(row["cell_id"]),
                        pci=int(row["pci"]),
                        lat=float(row["lat"]),
                        lon=float(row["lon"]),
                        boresight_deg=float(row["boresight_deg"]),
                        beam_count=int(row["beam_count"]),
                        mu=int(row["mu"]),
                        beam_by_tci={int(k): int(v) for k, v in bm.get("tci", {}).items()},
                        beam_by_spatial={
                            int(k): int(v) for k, v in bm.get("spatial", {}).items()
                        },
                    )
                )
        return cls(cells)


class LocalFrame:
    """Equirectangular projection centered on an anchor point.

    Adequate at cell scale: meters east (x) and north (y) of the anchor.
    """

    def __init__(self, lat0: float, lon0: float) -> None:
        self.lat0 = lat0
        self.lon0 = lon0
        self._coslat = math.cos(math.radians(lat0))

    def to_xy(self, lat: float, lon: float) -> tuple[float, float]:
        x = math.radians(lon - self.lon0) * EARTH_RADIUS_M * self._coslat
        y = math.radians(lat - self.lat0) * EARTH_RADIUS_M
        return x, y

    def to_latlon(self, x: float, y: float) -> tuple[float, float]:
        lat = self.lat0 + math.degrees(y / EARTH_RADIUS_M)
        lon = self.lon0 + math.degrees(x / (EARTH_RADIUS_M * self._coslat))
        return lat, lon


def bearing_deg(dx: float, dy: float) -> float:
    """Compass bearing of the (east, north) displacement, degrees in [0, 360)."""
    return math.degrees(math.atan2(dx, dy)) % 360.0
