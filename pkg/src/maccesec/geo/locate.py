"""Multi-observation inference: triangulation, trajectories, dwell profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import CollinearCells, InconsistentObservations, InsufficientData
from .cells import CellDb, LocalFrame, bearing_deg
from .regions import (
    DEFAULT_CELL_RADIUS_M,
    KIND_INTERSECTION,
    KIND_POINT,
    ObservationEvent,
    RegionEstimate,
    estimate_region,
)


def _region_mask(
    region: RegionEstimate,
    frame: LocalFrame,
    x_grid: np.ndarray,
    y_grid: np.ndarray,
    pad_m: float,
) -> np.ndarray:
    if region.kind == KIND_INTERSECTION:
        mask = np.ones_like(x_grid, dtype=bool)
        for part in region.parts:
            mask &= _region_mask(part, frame, x_grid, y_grid, pad_m)
        return mask
    if region.kind == KIND_POINT:
        mask = np.zeros_like(x_grid, dtype=bool)
        for plat, plon in region.points:
            px, py = frame.to_xy(plat, plon)
            mask |= np.hypot(x_grid - px, y_grid - py) <= pad_m
        return mask
    cx, cy = frame.to_xy(region.center_lat, region.center_lon)
    dx = x_grid - cx
    dy = y_grid - cy
    r = np.hypot(dx, dy)
    mask = (r >= region.r_min - pad_m) & (r <= region.r_max + pad_m)
    if region.az_min is not None:
        width = (region.az_max - region.az_min) % 360.0
        if not (region.az_min == 0.0 and region.az_max == 360.0) and width > 0.0:
            az = np.degrees(np.arctan2(dx, dy)) % 360.0
            mask &= (az - region.az_min) % 360.0 <= width
    return mask


def _component_count(mask: np.ndarray) -> int:
    """4-connected components in a boolean grid (iterative flood fill)."""
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    rows, cols = mask.shape
    for start_r, start_c in zip(*np.nonzero(mask)):
        if seen[start_r, start_c]:
            continue
        count += 1
        stack = [(int(start_r), int(start_c))]
        seen[start_r, start_c] = True
        while stack:
            r, c = stack.pop()
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                if 0 <= nr < rows and 0 <= nc < cols and mask[nr, nc] and not seen[nr, nc]:
                    seen[nr, nc] = True
                    stack.append((nr, nc))
    return count


def _exact_point(
    anchors: Sequence[tuple[float, float]], dists: Sequence[float], frame: LocalFrame
) -> RegionEstimate:
    pts = np.asarray(anchors, dtype=float)
    d = np.asarray(dists, dtype=float)
    scale = max(1.0, float(np.max(np.hypot(pts[:, 0], pts[:, 1]))), float(np.max(d)))
    if len(pts) == 2:
        (x1, y1), (x2, y2) = pts
        r1, r2 = d
        dd = math.hypot(x2 - x1, y2 - y1)
        tol = 1e-9 * scale
        if dd > r1 + r2 + tol or dd < abs(r1 - r2) - tol:
            raise InconsistentObservations(
                f"range circles do not meet (centers {dd:.3f} m apart)"
            )
        a = (dd * dd + r1 * r1 - r2 * r2) / (2.0 * dd)
        h_sq = r1 * r1 - a * a
        h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
        ux, uy = (x2 - x1) / dd, (y2 - y1) / dd
        mx, my = x1 + a * ux, y1 + a * uy
        if h <= tol:
            candidates = [(mx, my)]
        else:
            candidates = sorted(
                [(mx - h * uy, my + h * ux), (mx + h * uy, my - h * ux)]
            )
        latlon = tuple(frame.to_latlon(x, y) for x, y in candidates)
        clat = sum(p[0] for p in latlon) / len(latlon)
        clon = sum(p[1] for p in latlon) / len(latlon)
        return RegionEstimate(
            kind=KIND_POINT,
            center_lat=clat,
            center_lon=clon,
            points=latlon,
            ambiguous=len(latlon) > 1,
        )
    # three or more anchors: subtracting the first circle's equation from the
    # others linearizes the system, one solve pins the point
    v = pts[1:] - pts[0]
    cross = np.abs(v[:, None, 0] * v[None, :, 1] - v[:, None, 1] * v[None, :, 0])
    if float(np.max(cross)) < 1e-9 * scale * scale:
        raise CollinearCells(
            "anchor cells lie on one line; mirror-image positions are indistinguishable"
        )
    a_mat = 2.0 * v
    norms = np.sum(pts * pts, axis=1)
    b_vec = (norms[1:] - norms[0]) + (d[0] * d[0] - d[1:] * d[1:])
    sol, *_ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    px, py = float(sol[0]), float(sol[1])
    for (cx, cy), di in zip(pts, d):
        residual = abs(math.hypot(px - cx, py - cy) - di)
        if residual > max(1e-6 * max(di, 1.0), 1e-3):
            raise InconsistentObservations(
                f"no point satisfies all ranges (residual {residual:.6f} m)"
            )
    lat, lon = frame.to_latlon(px, py)
    return RegionEstimate(
        kind=KIND_POINT, center_lat=lat, center_lon=lon, points=((lat, lon),)
    )


def triangulate(
    events: Sequence[ObservationEvent],
    db: CellDb,
    grid_n: int = 192,
    default_radius_m: float = DEFAULT_CELL_RADIUS_M,
) -> RegionEstimate:
    """Fuse simultaneous observations of one UE into a single region.

    When every event carries an exact ``distance_m`` and the cells are
    distinct, range circles are intersected algebraically: three or more
    non-collinear anchors give a unique point, two give candidate points
    flagged ambiguous. Otherwise the per-event regions are intersected on
    a deterministic raster over the common bounding box.
    """
    events = list(events)
    if len(events) < 2:
        raise ValueError("triangulation needs at least two events")
    refs = {e.ue_ref for e in events}
    if len(refs) != 1:
        raise ValueError(f"events reference several UEs: {sorted(refs)}")
    cells = [db.get(e.cell_id) for e in events]
    frame = LocalFrame(cells[0].lat, cells[0].lon)

    exact = all(e.distance_m is not None for e in events)
    distinct = len({c.cell_id for c in cells}) == len(cells)
    if exact and distinct:
        anchors = [frame.to_xy(c.lat, c.lon) for c in cells]
        return _exact_point(anchors, [e.distance_m for e in events], frame)

    regions = [estimate_region(e, db, default_radius_m=default_radius_m) for e in events]
    lo_x = lo_y = -math.inf
    hi_x = hi_y = math.inf
    for region in regions:
        cx, cy = frame.to_xy(region.center_lat, region.center_lon)
        lo_x = max(lo_x, cx - region.r_max)
        hi_x = min(hi_x, cx + region.r_max)
        lo_y = max(lo_y, cy - region.r_max)
        hi_y = min(hi_y, cy + region.r_max)
    if lo_x >= hi_x or lo_y >= hi_y:
        raise InconsistentObservations("region bounding boxes do not overlap")

    xs = np.linspace(lo_x, hi_x, grid_n, endpoint=False)
    ys = np.linspace(lo_y, hi_y, grid_n, endpoint=False)
    dx = (hi_x - lo_x) / grid_n
    dy = (hi_y - lo_y) / grid_n
    x_grid, y_grid = np.meshgrid(xs + dx / 2.0, ys + dy / 2.0)
    pad = 0.5 * math.hypot(dx, dy)
    mask = np.ones_like(x_grid, dtype=bool)
    for region in regions:
        mask &= _region_mask(region, frame, x_grid, y_grid, pad)
    count = int(np.count_nonzero(mask))
    if count == 0:
        raise InconsistentObservations("observed regions share no position")
    mx = float(np.mean(x_grid[mask]))
    my = float(np.mean(y_grid[mask]))
    bound = float(np.max(np.hypot(x_grid[mask] - mx, y_grid[mask] - my))) + pad
    lat, lon = frame.to_latlon(mx, my)
    return RegionEstimate(
        kind=KIND_INTERSECTION,
        center_lat=lat,
        center_lon=lon,
        r_min=0.0,
        r_max=bound,
        parts=tuple(regions),
        area_m2=count * dx * dy,
        ambiguous=_component_count(mask) > 1,
    )


@dataclass(frozen=True)
class MotionStep:
    t_from: float
    t_to: float
    distance_m: float
    speed_mps: float
    heading_deg: float

    def to_dict(self) -> dict:
        return {
            "t_from": self.t_from,
            "t_to": self.t_to,
            "distance_m": self.distance_m,
            "speed_mps": self.speed_mps,
            "heading_deg": self.heading_deg,
        }


@dataclass(frozen=True)
class TrajectoryStep:
    time_s: float
    region: RegionEstimate

    def to_dict(self) -> dict:
        centroid = self.region.centroid()
        return {
            "time_s": self.time_s,
            "centroid": [centroid[0], centroid[1]],
            "region": self.region.to_dict(),
        }


@dataclass(frozen=True)
class TrajectoryReport:
    steps: tuple[TrajectoryStep, ...]
    motion: tuple[MotionStep, ...]

    def to_dict(self) -> dict:
        return {
            "steps": [s.to_dict() for s in self.steps],
            "motion": [m.to_dict() for m in self.motion],
        }


def reconstruct_trajectory(
    events: Sequence[ObservationEvent],
    db: CellDb,
    bucket_s: float = 1.0,
    grid_n: int = 192,
    default_radius_m: float = DEFAULT_CELL_RADIUS_M,
) -> TrajectoryReport:
    """Per-time-bucket location estimates plus centroid-to-centroid motion.

    Events landing in the same ``bucket_s`` window are fused with
    ``triangulate``; lone events fall back to ``estimate_region``. A single
    step yields an empty motion summary.
    """
    events = list(events)
    if not events:
        raise ValueError("no events")
    refs = {e.ue_ref for e in events}
    if len(refs) != 1:
        raise ValueError(f"events reference several UEs: {sorted(refs)}")
    times = [e.time_s for e in events]
    if times != sorted(times):
        raise ValueError("events must be time-sorted")

    buckets: list[list[ObservationEvent]] = []
    current_key = None
    for event in events:
        key = math.floor(event.time_s / bucket_s)
        if key != current_key:
            buckets.append([])
            current_key = key
        buckets[-1].append(event)

    steps = []
    for group in buckets:
        if len(group) == 1:
            region = estimate_region(group[0], db, default_radius_m=default_radius_m)
        else:
            region = triangulate(
                group, db, grid_n=grid_n, default_radius_m=default_radius_m
            )
        steps.append(TrajectoryStep(time_s=group[0].time_s, region=region))

    motion = []
    for prev, nxt in zip(steps, steps[1:]):
        dt = nxt.time_s - prev.time_s
        if dt <= 0:
            continue
        p_lat, p_lon = prev.region.centroid()
        n_lat, n_lon = nxt.region.centroid()
        frame = LocalFrame(p_lat, p_lon)
        dx, dy = frame.to_xy(n_lat, n_lon)
        dist = math.hypot(dx, dy)
        motion.append(
            MotionStep(
                t_from=prev.time_s,
                t_to=nxt.time_s,
                distance_m=dist,
                speed_mps=dist / dt,
                heading_deg=bearing_deg(dx, dy),
            )
        )
    return TrajectoryReport(steps=tuple(steps), motion=tuple(motion))


NIGHT_HOURS = (0, 6)
WORK_HOURS = (9, 17)
RESIDENCE_LABEL = "residence-candidate"
WORKPLACE_LABEL = "workplace-candidate"


@dataclass
class ProfileCell:
    gx: int
    gy: int
    lat: float
    lon: float
    night_s: float = 0.0
    work_s: float = 0.0
    other_s: float = 0.0
    visits: int = 0
    labels: tuple[str, ...] = ()

    @property
    def total_s(self) -> float:
        return self.night_s + self.work_s + self.other_s

    def to_dict(self) -> dict:
        return {
            "gx": self.gx,
            "gy": self.gy,
            "lat": self.lat,
            "lon": self.lon,
            "night_s": self.night_s,
            "work_s": self.work_s,
            "other_s": self.other_s,
            "total_s": self.total_s,
            "visits": self.visits,
            "labels": list(self.labels),
        }


@dataclass(frozen=True)
class ProfileReport:
    days_observed: int
    grid_m: float
    events: int
    cells: tuple[ProfileCell, ...]
    residence: tuple[int, int] | None
    workplace: tuple[int, int] | None

    def cell_at(self, gx: int, gy: int) -> ProfileCell | None:
        for cell in self.cells:
            if (cell.gx, cell.gy) == (gx, gy):
                return cell
        return None

    def to_dict(self) -> dict:
        def key_or_none(key):
            if key is None:
                return None
            cell = self.cell_at(*key)
            return cell.to_dict() if cell else None

        return {
            "days_observed": self.days_observed,
            "grid_m": self.grid_m,
            "events": self.events,
            "cells": [c.to_dict() for c in self.cells],
            "residence_candidate": key_or_none(self.residence),
            "workplace_candidate": key_or_none(self.workplace),
        }


def _hour_bucket(local_s: float) -> str:
    hour = (local_s % 86400.0) / 3600.0
    if NIGHT_HOURS[0] <= hour < NIGHT_HOURS[1]:
        return "night"
    if WORK_HOURS[0] <= hour < WORK_HOURS[1]:
        return "work"
    return "other"


def long_term_profile(
    events: Iterable[ObservationEvent],
    db: CellDb,
    local_tz_offset_h: float = 0.0,
    min_days: int = 3,
    grid_m: float = 100.0,
    dwell_cap_s: float = 3600.0,
    default_radius_m: float = DEFAULT_CELL_RADIUS_M,
) -> ProfileReport:
    """Dwell-time histogram over a position grid, with home/work labeling.

    Each event's region centroid is quantized to a ``grid_m`` grid; the gap
    to the next event (capped) counts as dwell in the time-of-day bucket the
    event starts in. The grid cell with the most night dwell is labeled
    residence-candidate, the most work-hours dwell workplace-candidate.
    """
    events = sorted(events, key=lambda e: e.time_s)
    if not events:
        raise InsufficientData("no events")
    dates = {math.floor((e.time_s + local_tz_offset_h * 3600.0) / 86400.0) for e in events}
    if len(dates) < min_days:
        raise InsufficientData(
            f"{len(dates)} distinct local day(s) observed, profile needs {min_days}"
        )
    anchor = db.get(events[0].cell_id)
    frame = LocalFrame(anchor.lat, anchor.lon)
    cells: dict[tuple[int, int], ProfileCell] = {}
    for i, event in enumerate(events):
        region = estimate_region(event, db, default_radius_m=default_radius_m)
        lat, lon = region.centroid()
        x, y = frame.to_xy(lat, lon)
        gx = math.floor(x / grid_m)
        gy = math.floor(y / grid_m)
        if (gx, gy) not in cells:
            clat, clon = frame.to_latlon((gx + 0.5) * grid_m, (gy + 0.5) * grid_m)
            cells[(gx, gy)] = ProfileCell(gx=gx, gy=gy, lat=clat, lon=clon)
        cell = cells[(gx, gy)]
        cell.visits += 1
        if i + 1 < len(events):
            dwell = min(events[i + 1].time_s - event.time_s, dwell_cap_s)
        else:
            dwell = 0.0
        bucket = _hour_bucket(event.time_s + local_tz_offset_h * 3600.0)
        if bucket == "night":
            cell.night_s += dwell
        elif bucket == "work":
            cell.work_s += dwell
        else:
            cell.other_s += dwell

    def argmax(attr: str) -> tuple[int, int] | None:
        best = None
        best_val = 0.0
        for key in sorted(cells):
            val = getattr(cells[key], attr)
            if val > best_val:
                best, best_val = key, val
        return best

    residence = argmax("night_s")
    workplace = argmax("work_s")
    for key, labels in ((residence, RESIDENCE_LABEL), (workplace, WORKPLACE_LABEL)):
        if key is not None:
            cell = cells[key]
            cell.labels = tuple([*cell.labels, labels])
    ordered = sorted(cells.values(), key=lambda c: (-c.total_s, c.gx, c.gy))
    return ProfileReport(
        days_observed=len(dates),
        grid_m=grid_m,
        events=len(events),
        cells=tuple(ordered),
        residence=residence,
        workplace=workplace,
    )
