"""MAC PDU composition and parsing.

A PDU is a sequence of sub-PDUs, each led by a one-octet subheader
R(1) | F(1) | LCID(6). LCIDs 0..32 carry opaque SDUs with an explicit
length field (F selects 8 or 16 bit), 63 is padding and consumes the rest
of the buffer, and the remaining space is dispatched through the LCID
registry: fixed-size CEs have no length field, variable-size CEs carry one.

Placement rules: downlink puts CEs before SDUs, uplink puts them after,
and padding comes last in both. ``parse_pdu`` records breaches on the
returned PDU (or raises in strict mode); assembly always emits the
canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..errors import (
    LengthMismatch,
    NonZeroReservedBits,
    OrderingViolation,
    TargetTooSmall,
    TruncatedPdu,
    UnknownLcid,
)
from .ce import MacCe, ce_class_for
from .registry import DIRECTIONS, LCID_PADDING, SDU_LCID_MAX, LcidRegistry

KIND_CE = "ce"
KIND_SDU = "sdu"
KIND_PADDING = "padding"


@dataclass(frozen=True)
class MacSubheader:
    lcid: int
    r_bit: int = 0
    f_bit: int = 0
    length: int | None = None  # None: no length field on the wire

    def __post_init__(self) -> None:
        if not 0 <= self.lcid <= 63:
            raise ValueError(f"lcid {self.lcid} outside 0..63")
        if self.r_bit not in (0, 1) or self.f_bit not in (0, 1):
            raise ValueError("r_bit and f_bit are single bits")
        if self.length is not None:
            cap = 0xFFFF if self.f_bit else 0xFF
            if not 0 <= self.length <= cap:
                raise LengthMismatch(f"length {self.length} does not fit F={self.f_bit}")

    @property
    def wire_size(self) -> int:
        if self.length is None:
            return 1
        return 1 + (2 if self.f_bit else 1)

    def to_bytes(self) -> bytes:
        first = (self.r_bit << 7) | (self.f_bit << 6) | self.lcid
        if self.length is None:
            return bytes([first])
        return bytes([first]) + self.length.to_bytes(2 if self.f_bit else 1, "big")


@dataclass(frozen=True)
class MacSubPdu:
    subheader: MacSubheader
    ce: MacCe | None = None
    sdu: bytes | None = None
    padding: bytes | None = None

    def __post_init__(self) -> None:
        present = [x is not None for x in (self.ce, self.sdu, self.padding)]
        if sum(present) != 1:
            raise ValueError("sub-PDU carries exactly one of ce, sdu, padding")
        if self.padding is not None and self.subheader.length is not None:
            raise ValueError("padding never carries a length field")
        if self.subheader.length is not None:
            body = self.sdu if self.sdu is not None else self.ce.to_payload()
            if len(body) != self.subheader.length:
                raise LengthMismatch(
                    f"length field {self.subheader.length} != payload {len(body)}"
                )

    @property
    def kind(self) -> str:
        if self.ce is not None:
            return KIND_CE
        if self.sdu is not None:
            return KIND_SDU
        return KIND_PADDING

    def payload_bytes(self) -> bytes:
        if self.ce is not None:
            return self.ce.to_payload()
        if self.sdu is not None:
            return self.sdu
        return self.padding

    def to_bytes(self) -> bytes:
        return self.subheader.to_bytes() + self.payload_bytes()

    @property
    def wire_size(self) -> int:
        return self.subheader.wire_size + len(self.payload_bytes())


@dataclass(frozen=True)
class MacPdu:
    direction: str
    subpdus: tuple[MacSubPdu, ...]
    violations: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.direction not in DIRECTIONS:
            raise ValueError(f"bad direction {self.direction!r}")
        object.__setattr__(self, "subpdus", tuple(self.subpdus))
        object.__setattr__(self, "violations", tuple(self.violations))

    def to_bytes(self) -> bytes:
        return b"".join(sp.to_bytes() for sp in self.subpdus)

    @property
    def ces(self) -> tuple[MacCe, ...]:
        return tuple(sp.ce for sp in self.subpdus if sp.ce is not None)

    @property
    def sdus(self) -> tuple[bytes, ...]:
        return tuple(sp.sdu for sp in self.subpdus if sp.sdu is not None)


def ordering_violations(direction: str, subpdus: Sequence[MacSubPdu]) -> tuple[str, ...]:
    """Flag sub-PDUs that sit on the wrong side of the direction's boundary."""
    out = []
    seen_sdu = False
    seen_ce = False
    for i, sp in enumerate(subpdus):
        if direction == "dl":
            if sp.kind == KIND_SDU:
                seen_sdu = True
            elif sp.kind == KIND_CE and seen_sdu:
                out.append(f"dl: ce at index {i} follows an sdu")
        else:
            if sp.kind == KIND_CE:
                seen_ce = True
            elif sp.kind == KIND_SDU and seen_ce:
                out.append(f"ul: sdu at index {i} follows a ce")
    return tuple(out)


def encode_ce(
    ce: MacCe,
    registry: LcidRegistry,
    direction: str | None = None,
    r_bit: int = 0,
) -> bytes:
    """Serialize one CE as a standalone sub-PDU (subheader + payload)."""
    entry = registry.entry_for_kind(ce.KIND, direction)
    payload = ce.to_payload()
    if entry.fixed_length is not None:
        if len(payload) != entry.fixed_length:
            raise LengthMismatch(
                f"{ce.KIND} payload {len(payload)} != fixed {entry.fixed_length}"
            )
        sub = MacSubheader(lcid=entry.lcid, r_bit=r_bit)
    else:
        f_bit = 1 if len(payload) > 0xFF else 0
        sub = MacSubheader(lcid=entry.lcid, r_bit=r_bit, f_bit=f_bit, length=len(payload))
    return sub.to_bytes() + payload


def decode_ce(
    lcid: int,
    payload: bytes,
    registry: LcidRegistry,
    direction: str | None = None,
    strict: bool = False,
) -> MacCe:
    """Decode a CE payload for the given LCID.

    With ``direction=None`` the downlink binding is tried first, then uplink.
    """
    if direction is None:
        try:
            entry = registry.entry_for_lcid(lcid, "dl")
        except UnknownLcid:
            entry = registry.entry_for_lcid(lcid, "ul")
    else:
        entry = registry.entry_for_lcid(lcid, direction)
    if entry.fixed_length is not None and len(payload) != entry.fixed_length:
        raise LengthMismatch(
            f"lcid {lcid} payload {len(payload)} != fixed {entry.fixed_length}"
        )
    return ce_class_for(entry.kind).from_payload(payload, strict=strict)


def subpdu_for_ce(
    ce: MacCe, registry: LcidRegistry, direction: str | None = None, r_bit: int = 0
) -> MacSubPdu:
    entry = registry.entry_for_kind(ce.KIND, direction)
    payload = ce.to_payload()
    if entry.fixed_length is not None:
        if len(payload) != entry.fixed_length:
            raise LengthMismatch(
                f"{ce.KIND} payload {len(payload)} != fixed {entry.fixed_length}"
            )
        sub = MacSubheader(lcid=entry.lcid, r_bit=r_bit)
    else:
        f_bit = 1 if len(payload) > 0xFF else 0
        sub = MacSubheader(lcid=entry.lcid, r_bit=r_bit, f_bit=f_bit, length=len(payload))
    return MacSubPdu(subheader=sub, ce=ce)


def subpdu_for_sdu(data: bytes, lcid: int = 1, r_bit: int = 0) -> MacSubPdu:
    if not 0 <= lcid <= SDU_LCID_MAX:
        raise ValueError(f"sdu lcid {lcid} outside 0..{SDU_LCID_MAX}")
    f_bit = 1 if len(data) > 0xFF else 0
    sub = MacSubheader(lcid=lcid, r_bit=r_bit, f_bit=f_bit, length=len(data))
    return MacSubPdu(subheader=sub, sdu=bytes(data))


def padding_subpdu(total_octets: int) -> MacSubPdu:
    """Padding sub-PDU occupying ``total_octets`` including its subheader."""
    if total_octets < 1:
        raise ValueError("padding needs at least its subheader octet")
    return MacSubPdu(
        subheader=MacSubheader(lcid=LCID_PADDING), padding=bytes(total_octets - 1)
    )


def assemble_pdu(
    direction: str,
    ces: Sequence[MacCe],
    sdus: Iterable[bytes | tuple[int, bytes]] = (),
    target_size: int | None = None,
    registry: LcidRegistry | None = None,
) -> MacPdu:
    """Build a rule-compliant PDU: DL puts CEs first, UL puts them last.

    SDUs are opaque byte strings (optionally ``(lcid, bytes)`` pairs; plain
    bytes ride on LCID 1). With ``target_size`` the PDU is filled to exactly
    that many octets by one trailing padding sub-PDU.
    """
    if registry is None:
        from .registry import default_registry

        registry = default_registry()
    if direction not in DIRECTIONS:
        raise ValueError(f"bad direction {direction!r}")
    ce_subs = [subpdu_for_ce(ce, registry, direction) for ce in ces]
    sdu_subs = []
    for item in sdus:
        if isinstance(item, tuple):
            lcid, data = item
            sdu_subs.append(subpdu_for_sdu(data, lcid=lcid))
        else:
            sdu_subs.append(subpdu_for_sdu(item))
    subpdus = ce_subs + sdu_subs if direction == "dl" else sdu_subs + ce_subs
    if target_size is not None:
        size = sum(sp.wire_size for sp in subpdus)
        if size > target_size:
            raise TargetTooSmall(f"content needs {size} octets, target is {target_size}")
        if size < target_size:
            subpdus.append(padding_subpdu(target_size - size))
    return MacPdu(direction=direction, subpdus=tuple(subpdus))


def parse_pdu(
    direction: str,
    data: bytes,
    registry: LcidRegistry | None = None,
    strict: bool = False,
) -> MacPdu:
    """Parse a PDU byte-exactly; re-encoding the result reproduces ``data``.

    Lenient mode keeps nonzero reserved bits and records placement-rule
    breaches in ``MacPdu.violations``; strict mode raises on either.
    """
    if registry is None:
        from .registry import default_registry

        registry = default_registry()
    if direction not in DIRECTIONS:
        raise ValueError(f"bad direction {direction!r}")
    if not data:
        raise TruncatedPdu("empty PDU")
    subpdus = []
    pos = 0
    while pos < len(data):
        first = data[pos]
        pos += 1
        r_bit, f_bit, lcid = first >> 7, (first >> 6) & 1, first & 0x3F
        if strict and r_bit:
            raise NonZeroReservedBits(f"R bit set in subheader at octet {pos - 1}")
        if lcid == LCID_PADDING:
            if strict and f_bit:
                raise NonZeroReservedBits("F bit set on padding subheader")
            subpdus.append(
                MacSubPdu(
                    subheader=MacSubheader(lcid=lcid, r_bit=r_bit, f_bit=f_bit),
                    padding=data[pos:],
                )
            )
            pos = len(data)
            continue
        if lcid <= SDU_LCID_MAX:
            width = 2 if f_bit else 1
            if pos + width > len(data):
                raise TruncatedPdu("PDU ended inside an SDU length field")
            length = int.from_bytes(data[pos : pos + width], "big")
            pos += width
            if pos + length > len(data):
                raise TruncatedPdu(f"SDU declares {length} octets, fewer remain")
            subpdus.append(
                MacSubPdu(
                    subheader=MacSubheader(lcid=lcid, r_bit=r_bit, f_bit=f_bit, length=length),
                    sdu=data[pos : pos + length],
                )
            )
            pos += length
            continue
        entry = registry.entry_for_lcid(lcid, direction)
        if entry.fixed_length is not None:
            if strict and f_bit:
                raise NonZeroReservedBits(f"F bit set on fixed-size lcid {lcid}")
            length = entry.fixed_length
            if pos + length > len(data):
                raise TruncatedPdu(f"PDU ended inside fixed CE lcid {lcid}")
            payload = data[pos : pos + length]
            pos += length
            sub = MacSubheader(lcid=lcid, r_bit=r_bit, f_bit=f_bit)
        else:
            width = 2 if f_bit else 1
            if pos + width > len(data):
                raise TruncatedPdu("PDU ended inside a CE length field")
            length = int.from_bytes(data[pos : pos + width], "big")
            pos += width
            if pos + length > len(data):
                raise TruncatedPdu(f"CE declares {length} octets, fewer remain")
            payload = data[pos : pos + length]
            pos += length
            sub = MacSubheader(lcid=lcid, r_bit=r_bit, f_bit=f_bit, length=length)
        ce = ce_class_for(entry.kind).from_payload(payload, strict=strict)
        subpdus.append(MacSubPdu(subheader=sub, ce=ce))
    violations = ordering_violations(direction, subpdus)
    if strict and violations:
        raise OrderingViolation("; ".join(violations))
    return MacPdu(direction=direction, subpdus=tuple(subpdus), violations=violations)
