"""Static SVG sketches of region estimates. Figure output, not a UI."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

from .cells import CellDb, LocalFrame
from .regions import KIND_INTERSECTION, KIND_POINT, RegionEstimate

_PALETTE = ("#3366cc", "#cc5533", "#33a02c", "#7a4fa3", "#b8860b", "#2a8a99")


class _Canvas:
    def __init__(self, width: int, margin: float) -> None:
        self.width = width
        self.margin = margin
        self.min_x = math.inf
        self.min_y = math.inf
        self.max_x = -math.inf
        self.max_y = -math.inf

    def grow(self, x: float, y: float, r: float = 0.0) -> None:
        self.min_x = min(self.min_x, x - r)
        self.min_y = min(self.min_y, y - r)
        self.max_x = max(self.max_x, x + r)
        self.max_y = max(self.max_y, y + r)

    def finish(self) -> None:
        if not math.isfinite(self.min_x):
            self.min_x = self.min_y = -1.0
            self.max_x = self.max_y = 1.0
        span = max(self.max_x - self.min_x, self.max_y - self.min_y, 1.0)
        pad = span * self.margin
        self.min_x -= pad
        self.min_y -= pad
        self.max_x += pad
        self.max_y += pad
        self.scale = self.width / (self.max_x - self.min_x)
        self.height = int(round((self.max_y - self.min_y) * self.scale)) or self.width

    def px(self, x: float, y: float) -> tuple[float, float]:
        # y grows north, SVG grows down
        return (
            (x - self.min_x) * self.scale,
            self.height - (y - self.min_y) * self.scale,
        )


def _arc_point(cx: float, cy: float, r: float, az_deg: float) -> tuple[float, float]:
    a = math.radians(az_deg)
    return cx + r * math.sin(a), cy + r * math.cos(a)


def _ring_path(canvas: _Canvas, cx: float, cy: float, r_in: float, r_out: float) -> str:
    # full annulus as two circles under the even-odd rule
    parts = []
    for r in (r_out, r_in):
        if r <= 0:
            continue
        rp = r * canvas.scale
        x0, y0 = canvas.px(cx - r, cy)
        x1, y1 = canvas.px(cx + r, cy)
        parts.append(
            f"M {x0:.2f} {y0:.2f} A {rp:.2f} {rp:.2f} 0 1 0 {x1:.2f} {y1:.2f} "
            f"A {rp:.2f} {rp:.2f} 0 1 0 {x0:.2f} {y0:.2f} Z"
        )
    return " ".join(parts)


def _wedge_path(
    canvas: _Canvas,
    cx: float,
    cy: float,
    r_in: float,
    r_out: float,
    az_min: float,
    az_max: float,
) -> str:
    width = (az_max - az_min) % 360.0
    if width == 0.0 or (az_min == 0.0 and az_max == 360.0):
        return _ring_path(canvas, cx, cy, r_in, r_out)
    large = 1 if width > 180.0 else 0
    rp_out = r_out * canvas.scale
    rp_in = r_in * canvas.scale
    ox0, oy0 = canvas.px(*_arc_point(cx, cy, r_out, az_min))
    ox1, oy1 = canvas.px(*_arc_point(cx, cy, r_out, az_max))
    path = f"M {ox0:.2f} {oy0:.2f} A {rp_out:.2f} {rp_out:.2f} 0 {large} 1 {ox1:.2f} {oy1:.2f}"
    if r_in > 0:
        ix1, iy1 = canvas.px(*_arc_point(cx, cy, r_in, az_max))
        ix0, iy0 = canvas.px(*_arc_point(cx, cy, r_in, az_min))
        path += (
            f" L {ix1:.2f} {iy1:.2f} A {rp_in:.2f} {rp_in:.2f} 0 {large} 0 "
            f"{ix0:.2f} {iy0:.2f} Z"
        )
    else:
        px0, py0 = canvas.px(cx, cy)
        path += f" L {px0:.2f} {py0:.2f} Z"
    return path


def _flatten(regions: Iterable[RegionEstimate]):
    for region in regions:
        if region.kind == KIND_INTERSECTION and region.parts:
            yield from _flatten(region.parts)
        yield region


def render_svg(
    regions: Sequence[RegionEstimate],
    db: CellDb | None = None,
    width: int = 640,
    margin: float = 0.08,
) -> str:
    """Render regions (and optionally the cell sites) as a standalone SVG."""
    regions = list(regions)
    flat = list(_flatten(regions))
    anchor = None
    for region in flat:
        anchor = (region.center_lat, region.center_lon)
        break
    if anchor is None and db is not None:
        for cell in db:
            anchor = (cell.lat, cell.lon)
            break
    frame = LocalFrame(*(anchor or (0.0, 0.0)))

    canvas = _Canvas(width, margin)
    placed = []
    for region in flat:
        cx, cy = frame.to_xy(region.center_lat, region.center_lon)
        placed.append((region, cx, cy))
        if region.kind == KIND_POINT:
            for plat, plon in region.points:
                canvas.grow(*frame.to_xy(plat, plon), 5.0)
        else:
            canvas.grow(cx, cy, region.r_max)
    sites = []
    if db is not None:
        for cell in db:
            x, y = frame.to_xy(cell.lat, cell.lon)
            sites.append((cell, x, y))
            canvas.grow(x, y, 10.0)
    canvas.finish()

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{canvas.width}" '
        f'height="{canvas.height}" viewBox="0 0 {canvas.width} {canvas.height}">',
        f'<rect width="{canvas.width}" height="{canvas.height}" fill="#fcfcf8"/>',
    ]
    for i, (region, cx, cy) in enumerate(placed):
        color = _PALETTE[i % len(_PALETTE)]
        if region.kind == KIND_POINT:
            for plat, plon in region.points:
                px, py = canvas.px(*frame.to_xy(plat, plon))
                out.append(
                    f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="{color}"/>'
                )
            continue
        if region.kind == KIND_INTERSECTION:
            px, py = canvas.px(cx, cy)
            out.append(
                f'<circle cx="{px:.2f}" cy="{py:.2f}" r="4" fill="none" '
                f'stroke="{color}" stroke-width="2"/>'
            )
            continue
        if region.az_min is None:
            path = _ring_path(canvas, cx, cy, region.r_min, region.r_max)
        else:
            path = _wedge_path(
                canvas, cx, cy, region.r_min, region.r_max, region.az_min, region.az_max
            )
        out.append(
            f'<path d="{path}" fill="{color}" fill-opacity="0.18" '
            f'fill-rule="evenodd" stroke="{color}" stroke-width="1"/>'
        )
    for cell, x, y in sites:
        px, py = canvas.px(x, y)
        out.append(
            f'<path d="M {px:.2f} {py - 6:.2f} L {px - 5:.2f} {py + 4:.2f} '
            f'L {px + 5:.2f} {py + 4:.2f} Z" fill="#222"/>'
        )
        out.append(
            f'<text x="{px + 7:.2f}" y="{py + 4:.2f}" font-size="11" '
            f'font-family="sans-serif" fill="#222">{cell.cell_id}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
