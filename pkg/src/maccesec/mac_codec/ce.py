"""MAC control element variants and their payload codecs.

Payloads are packed big-endian, MSB first, in declared field order, then
zero-padded to whole octets. Decoding is byte-exact: re-encoding a decoded
CE reproduces the input, including reserved and padding bits kept by
lenient mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from ..errors import FieldOverflow, LengthMismatch, NonZeroReservedBits, TruncatedPdu, UnknownCeKind
from .bits import BitReader, BitWriter


def _check_width(name: str, value: int, width: int) -> None:
    if not isinstance(value, int) or value < 0 or value >> width:
        raise FieldOverflow(f"{name}={value!r} does not fit in {width} bits")


@dataclass(frozen=True)
class CRntiCe:
    """Carries the 16-bit cell radio network temporary identifier."""

    crnti: int
    KIND = "crnti"

    def __post_init__(self) -> None:
        _check_width("crnti", self.crnti, 16)

    def to_payload(self) -> bytes:
        return self.crnti.to_bytes(2, "big")

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "CRntiCe":
        if len(data) != 2:
            raise LengthMismatch(f"crnti payload is 2 octets, got {len(data)}")
        return cls(int.from_bytes(data, "big"))


@dataclass(frozen=True)
class TaReportCe:
    """UE-originated timing advance report: 2 reserved bits + 14-bit TA."""

    ta_value: int
    reserved: int = 0
    KIND = "ta_report"

    def __post_init__(self) -> None:
        _check_width("reserved", self.reserved, 2)
        _check_width("ta_value", self.ta_value, 14)

    def to_payload(self) -> bytes:
        w = BitWriter()
        w.write(self.reserved, 2)
        w.write(self.ta_value, 14)
        return w.to_bytes()

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "TaReportCe":
        if len(data) != 2:
            raise LengthMismatch(f"ta_report payload is 2 octets, got {len(data)}")
        r = BitReader(data)
        reserved = r.read(2)
        ta_value = r.read(14)
        if strict and reserved:
            raise NonZeroReservedBits("ta_report reserved bits set")
        return cls(ta_value=ta_value, reserved=reserved)


@dataclass(frozen=True)
class SpCsiPucchActDeactCe:
    """Activation bitmap for semi-persistent CSI reporting on PUCCH.

    ``l_flag`` selects one or two S-octets; ``s_bits`` holds the per-resource
    activation flags, S0 in the most significant bit of the first S octet.
    """

    serving_cell_id: int
    bwp_id: int
    l_flag: int
    s_bits: tuple[bool, ...]
    KIND = "sp_csi_pucch"

    def __post_init__(self) -> None:
        _check_width("serving_cell_id", self.serving_cell_id, 5)
        _check_width("bwp_id", self.bwp_id, 2)
        _check_width("l_flag", self.l_flag, 1)
        object.__setattr__(self, "s_bits", tuple(bool(b) for b in self.s_bits))
        expected = 16 if self.l_flag else 8
        if len(self.s_bits) != expected:
            raise FieldOverflow(
                f"l_flag={self.l_flag} requires {expected} s_bits, got {len(self.s_bits)}"
            )

    def to_payload(self) -> bytes:
        w = BitWriter()
        w.write(self.serving_cell_id, 5)
        w.write(self.bwp_id, 2)
        w.write(self.l_flag, 1)
        for b in self.s_bits:
            w.write(int(b), 1)
        return w.to_bytes()

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "SpCsiPucchActDeactCe":
        if len(data) < 2:
            raise TruncatedPdu("sp_csi_pucch payload shorter than 2 octets")
        r = BitReader(data)
        serving_cell_id = r.read(5)
        bwp_id = r.read(2)
        l_flag = r.read(1)
        expected_len = 3 if l_flag else 2
        if len(data) != expected_len:
            raise LengthMismatch(
                f"l_flag={l_flag} implies {expected_len} octets, got {len(data)}"
            )
        s_bits = tuple(bool(r.read(1)) for _ in range(16 if l_flag else 8))
        return cls(serving_cell_id, bwp_id, l_flag, s_bits)


@dataclass(frozen=True)
class LtmCellSwitchCe:
    """Layer-1/2 triggered mobility cell switch command.

    A leading presence flag announces the optional security block; either all
    of ncc / algo_indication / key_set_change are given or none. Four layout
    padding bits close the final octet (kept verbatim by lenient decode).
    """

    target_config_id: int
    ta_value: int
    tci_state_id: int
    ncc: int | None = None
    algo_indication: int | None = None
    key_set_change: int | None = None
    trailing_bits: int = 0
    KIND = "ltm_cell_switch"

    def __post_init__(self) -> None:
        _check_width("target_config_id", self.target_config_id, 6)
        _check_width("ta_value", self.ta_value, 14)
        _check_width("tci_state_id", self.tci_state_id, 7)
        opts = (self.ncc, self.algo_indication, self.key_set_change)
        present = [o is not None for o in opts]
        if any(present) and not all(present):
            raise ValueError("ncc, algo_indication and key_set_change are all-or-none")
        if all(present):
            _check_width("ncc", self.ncc, 3)
            _check_width("algo_indication", self.algo_indication, 4)
            _check_width("key_set_change", self.key_set_change, 1)
        _check_width("trailing_bits", self.trailing_bits, 4)

    @property
    def has_security_block(self) -> bool:
        return self.ncc is not None

    def to_payload(self) -> bytes:
        w = BitWriter()
        w.write(int(self.has_security_block), 1)
        w.write(self.target_config_id, 6)
        w.write(self.ta_value, 14)
        w.write(self.tci_state_id, 7)
        if self.has_security_block:
            w.write(self.ncc, 3)
            w.write(self.algo_indication, 4)
            w.write(self.key_set_change, 1)
        w.write(self.trailing_bits, 4)
        return w.to_bytes()

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "LtmCellSwitchCe":
        if not data:
            raise TruncatedPdu("empty ltm_cell_switch payload")
        r = BitReader(data)
        p_flag = r.read(1)
        expected_len = 5 if p_flag else 4
        if len(data) != expected_len:
            raise LengthMismatch(
                f"presence flag {p_flag} implies {expected_len} octets, got {len(data)}"
            )
        target_config_id = r.read(6)
        ta_value = r.read(14)
        tci_state_id = r.read(7)
        ncc = algo = ksc = None
        if p_flag:
            ncc = r.read(3)
            algo = r.read(4)
            ksc = r.read(1)
        trailing = r.read(4)
        if strict and trailing:
            raise NonZeroReservedBits("ltm_cell_switch padding bits set")
        return cls(
            target_config_id=target_config_id,
            ta_value=ta_value,
            tci_state_id=tci_state_id,
            ncc=ncc,
            algo_indication=algo,
            key_set_change=ksc,
            trailing_bits=trailing,
        )


@dataclass(frozen=True)
class TaCommandCe:
    """Network-issued timing advance adjustment for one timing advance group."""

    tag_id: int
    ta_command: int
    KIND = "ta_command"

    def __post_init__(self) -> None:
        _check_width("tag_id", self.tag_id, 2)
        _check_width("ta_command", self.ta_command, 6)

    def to_payload(self) -> bytes:
        return bytes([(self.tag_id << 6) | self.ta_command])

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "TaCommandCe":
        if len(data) != 1:
            raise LengthMismatch(f"ta_command payload is 1 octet, got {len(data)}")
        return cls(tag_id=data[0] >> 6, ta_command=data[0] & 0x3F)


@dataclass(frozen=True)
class ShortBsrCe:
    """Short buffer status report: logical channel group + 5-bit size index."""

    lcg_id: int
    buffer_size: int
    KIND = "short_bsr"

    def __post_init__(self) -> None:
        _check_width("lcg_id", self.lcg_id, 3)
        _check_width("buffer_size", self.buffer_size, 5)

    def to_payload(self) -> bytes:
        return bytes([(self.lcg_id << 5) | self.buffer_size])

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "ShortBsrCe":
        if len(data) != 1:
            raise LengthMismatch(f"short_bsr payload is 1 octet, got {len(data)}")
        return cls(lcg_id=data[0] >> 5, buffer_size=data[0] & 0x1F)


@dataclass(frozen=True)
class BagField:
    """One named value inside a FieldBagCe."""

    name: str
    width: int
    value: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("bag field name must be non-empty")
        if len(self.name.encode("utf-8")) > 255:
            raise FieldOverflow("bag field name longer than 255 octets")
        if not 1 <= self.width <= 64:
            raise FieldOverflow(f"bag field width {self.width} outside 1..64")
        _check_width(self.name, self.value, self.width)


@dataclass(frozen=True)
class FieldBagCe:
    """Self-describing carrier for fields with no dedicated CE layout.

    Wire format: count octet, then per field a name length octet, the UTF-8
    name, a bit width octet, and the value big-endian in ceil(width/8) octets
    with zero upper padding.
    """

    fields: tuple[BagField, ...]
    KIND = "field_bag"

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "fields",
            tuple(f if isinstance(f, BagField) else BagField(*f) for f in self.fields),
        )
        if len(self.fields) > 255:
            raise FieldOverflow("field_bag holds at most 255 fields")

    def to_payload(self) -> bytes:
        out = bytearray([len(self.fields)])
        for f in self.fields:
            name = f.name.encode("utf-8")
            out.append(len(name))
            out += name
            out.append(f.width)
            out += f.value.to_bytes((f.width + 7) // 8, "big")
        return bytes(out)

    @classmethod
    def from_payload(cls, data: bytes, strict: bool = False) -> "FieldBagCe":
        if not data:
            raise TruncatedPdu("empty field_bag payload")
        pos = 1
        fields = []
        for _ in range(data[0]):
            if pos >= len(data):
                raise TruncatedPdu("field_bag ended inside a field header")
            name_len = data[pos]
            pos += 1
            if name_len == 0:
                raise LengthMismatch("field_bag name length 0")
            if pos + name_len + 1 > len(data):
                raise TruncatedPdu("field_bag ended inside a name or width")
            name = data[pos : pos + name_len].decode("utf-8")
            pos += name_len
            width = data[pos]
            pos += 1
            if not 1 <= width <= 64:
                raise FieldOverflow(f"bag field width {width} outside 1..64")
            nbytes = (width + 7) // 8
            if pos + nbytes > len(data):
                raise TruncatedPdu("field_bag ended inside a value")
            raw = int.from_bytes(data[pos : pos + nbytes], "big")
            pos += nbytes
            if raw >> width:
                # upper pad bits always zero on the wire; the encoder cannot
                # reproduce them so accepting would break byte-exact round trips
                raise NonZeroReservedBits(f"bag field {name!r} has pad bits set")
            fields.append(BagField(name, width, raw))
        if pos != len(data):
            raise LengthMismatch(f"{len(data) - pos} trailing octets after field_bag")
        return cls(tuple(fields))


MacCe = Union[
    CRntiCe,
    TaReportCe,
    SpCsiPucchActDeactCe,
    LtmCellSwitchCe,
    TaCommandCe,
    ShortBsrCe,
    FieldBagCe,
]

CE_CLASSES = {
    cls.KIND: cls
    for cls in (
        CRntiCe,
        TaReportCe,
        SpCsiPucchActDeactCe,
        LtmCellSwitchCe,
        TaCommandCe,
        ShortBsrCe,
        FieldBagCe,
    )
}


def ce_class_for(kind: str):
    try:
        return CE_CLASSES[kind]
    except KeyError:
        raise UnknownCeKind(f"unsupported CE kind {kind!r}") from None


def ce_to_dict(ce: MacCe) -> dict:
    """JSON-friendly view used by scenario files, the service and the CLI."""
    if isinstance(ce, CRntiCe):
        return {"kind": ce.KIND, "crnti": ce.crnti}
    if isinstance(ce, TaReportCe):
        return {"kind": ce.KIND, "ta_value": ce.ta_value, "reserved": ce.reserved}
    if isinstance(ce, SpCsiPucchActDeactCe):
        return {
            "kind": ce.KIND,
            "serving_cell_id": ce.serving_cell_id,
            "bwp_id": ce.bwp_id,
            "l_flag": ce.l_flag,
            "s_bits": [int(b) for b in ce.s_bits],
        }
    if isinstance(ce, LtmCellSwitchCe):
        out = {
            "kind": ce.KIND,
            "target_config_id": ce.target_config_id,
            "ta_value": ce.ta_value,
            "tci_state_id": ce.tci_state_id,
        }
        if ce.has_security_block:
            out["ncc"] = ce.ncc
            out["algo_indication"] = ce.algo_indication
            out["key_set_change"] = ce.key_set_change
        if ce.trailing_bits:
            out["trailing_bits"] = ce.trailing_bits
        return out
    if isinstance(ce, TaCommandCe):
        return {"kind": ce.KIND, "tag_id": ce.tag_id, "ta_command": ce.ta_command}
    if isinstance(ce, ShortBsrCe):
        return {"kind": ce.KIND, "lcg_id": ce.lcg_id, "buffer_size": ce.buffer_size}
    if isinstance(ce, FieldBagCe):
        return {
            "kind": ce.KIND,
            "fields": [
                {"name": f.name, "width": f.width, "value": f.value} for f in ce.fields
            ],
        }
    raise UnknownCeKind(f"unsupported CE object {type(ce).__name__}")


def ce_from_dict(obj: dict) -> MacCe:
    obj = dict(obj)
    kind = obj.pop("kind", None)
    if kind is None:
        raise UnknownCeKind("CE object missing 'kind'")
    cls = ce_class_for(kind)
    try:
        if cls is SpCsiPucchActDeactCe:
            obj["s_bits"] = tuple(bool(b) for b in obj.get("s_bits", ()))
        if cls is FieldBagCe:
            obj["fields"] = tuple(
                BagField(f["name"], int(f["width"]), int(f["value"]))
                for f in obj.get("fields", ())
            )
        return cls(**obj)
    except TypeError as exc:
        raise UnknownCeKind(f"bad fields for CE kind {kind!r}: {exc}") from None
