"""LCID registry: maps CE kinds to logical channel IDs per direction.

The mapping is data, not code, so experiments can re-home a CE onto any
codepoint. The shipped default lives in ``data/lcid_default.json``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from ..errors import UnknownCeKind, UnknownLcid

DIR_DL = "dl"
DIR_UL = "ul"
DIRECTIONS = (DIR_DL, DIR_UL)

LCID_PADDING = 63
SDU_LCID_MAX = 32  # 0..32 carry upper-layer SDUs in both directions

# every codec-supported CE kind; a registry must bind each exactly once
CE_KINDS = (
    "crnti",
    "ta_report",
    "sp_csi_pucch",
    "ltm_cell_switch",
    "ta_command",
    "short_bsr",
    "field_bag",
)


@dataclass(frozen=True)
class LcidEntry:
    kind: str
    lcid: int
    direction: str  # "dl", "ul" or "both"
    fixed_length: int | None  # octets; None means variable (subheader carries L)

    def __post_init__(self) -> None:
        if not 0 <= self.lcid <= 63:
            raise ValueError(f"lcid {self.lcid} outside 0..63")
        if self.direction not in ("dl", "ul", "both"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.lcid <= SDU_LCID_MAX or self.lcid == LCID_PADDING:
            raise ValueError(f"lcid {self.lcid} is reserved for SDUs or padding")
        if self.fixed_length is not None and self.fixed_length < 1:
            raise ValueError("fixed_length must be >= 1 octet")

    def allows(self, direction: str) -> bool:
        return self.direction == "both" or self.direction == direction


class LcidRegistry:
    """Bidirectional kind <-> LCID lookup with per-direction uniqueness."""

    def __init__(self, entries: Iterable[LcidEntry]) -> None:
        entries = tuple(entries)
        by_kind: dict[str, LcidEntry] = {}
        by_lcid: dict[tuple[str, int], LcidEntry] = {}
        for e in entries:
            if e.kind not in CE_KINDS:
                raise UnknownCeKind(f"registry names unsupported kind {e.kind!r}")
            if e.kind in by_kind:
                raise ValueError(f"kind {e.kind!r} bound twice")
            by_kind[e.kind] = e
            dirs = DIRECTIONS if e.direction == "both" else (e.direction,)
            for d in dirs:
                key = (d, e.lcid)
                if key in by_lcid:
                    raise ValueError(f"lcid {e.lcid} bound twice for {d}")
                by_lcid[key] = e
        missing = [k for k in CE_KINDS if k not in by_kind]
        if missing:
            raise ValueError(f"registry missing kinds: {', '.join(missing)}")
        self.entries = entries
        self._by_kind = by_kind
        self._by_lcid = by_lcid

    def entry_for_kind(self, kind: str, direction: str | None = None) -> LcidEntry:
        entry = self._by_kind.get(kind)
        if entry is None:
            raise UnknownCeKind(f"no registry entry for CE kind {kind!r}")
        if direction is not None and not entry.allows(direction):
            raise UnknownCeKind(f"CE kind {kind!r} not allowed in {direction}")
        return entry

    def entry_for_lcid(self, lcid: int, direction: str) -> LcidEntry:
        if direction not in DIRECTIONS:
            raise ValueError(f"bad direction {direction!r}")
        entry = self._by_lcid.get((direction, lcid))
        if entry is None:
            raise UnknownLcid(f"lcid {lcid} has no {direction} CE binding")
        return entry

    def to_json_obj(self) -> list[dict]:
        return [
            {
                "kind": e.kind,
                "lcid": e.lcid,
                "direction": e.direction,
                "fixed_length": e.fixed_length,
            }
            for e in self.entries
        ]

    @classmethod
    def from_json_obj(cls, obj: Iterable[Mapping]) -> "LcidRegistry":
        return cls(
            LcidEntry(
                kind=item["kind"],
                lcid=int(item["lcid"]),
                direction=item.get("direction", "both"),
                fixed_length=item.get("fixed_length"),
            )
            for item in obj
        )

    @classmethod
    def load(cls, path: str | Path) -> "LcidRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_obj(), indent=2) + "\n", encoding="utf-8"
        )


def default_registry() -> LcidRegistry:
    from ..fixtures import data_path

    return LcidRegistry.load(data_path("lcid_default.json"))
