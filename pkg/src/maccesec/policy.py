"""Field sensitivity registry and protection-mechanism policy.

Sixteen MAC CE fields carry a tamper-risk rating plus per-dimension
requirement stars (confidentiality / integrity / latency) and a default
protection mechanism. Mechanisms form a join semilattice, not a chain:

    M1  plain codec, no protection
    M2  integrity tag
    M3  payload encryption
    M4  encryption plus integrity

M2 and M3 are incomparable, so combining requirements uses the join
(M2 with M3 gives M4) rather than a numeric maximum.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import UnknownField, UnmappedCeKind
from .mac_codec.ce import FieldBagCe, MacCe
from .mac_codec.pdu import MacPdu


class Mechanism(enum.Enum):
    M1 = 1
    M2 = 2
    M3 = 3
    M4 = 4

    @property
    def wire_code(self) -> int:
        return self.value

    @property
    def has_integrity(self) -> bool:
        return self in (Mechanism.M2, Mechanism.M4)

    @property
    def has_confidentiality(self) -> bool:
        return self in (Mechanism.M3, Mechanism.M4)

    def covers(self, other: "Mechanism") -> bool:
        """True when every guarantee of ``other`` is also provided by self."""
        if self is other or other is Mechanism.M1 or self is Mechanism.M4:
            return True
        return False

    def join(self, other: "Mechanism") -> "Mechanism":
        """Least mechanism providing both sets of guarantees."""
        if self is other:
            return self
        if self is Mechanism.M1:
            return other
        if other is Mechanism.M1:
            return self
        # remaining distinct pairs involve M4, or the incomparable M2/M3 pair
        return Mechanism.M4

    @classmethod
    def parse(cls, value: "Mechanism | str | int") -> "Mechanism":
        if isinstance(value, cls):
            return value
        if isinstance(value, int):
            return cls(value)
        name = str(value).strip().upper()
        try:
            return cls[name]
        except KeyError:
            raise ValueError(f"unknown mechanism {value!r}") from None


def join_all(mechanisms: Iterable[Mechanism]) -> Mechanism:
    out = Mechanism.M1
    for m in mechanisms:
        out = out.join(m)
    return out


def _normalize(name: str) -> str:
    return re.sub(r"[^a-z0-9]+", "", name.lower())


@dataclass(frozen=True)
class SensitivityRecord:
    """Policy row for one MAC CE field."""

    field_name: str
    tamper_risk: str
    risk_stars: int
    confidentiality_stars: int
    integrity_stars: int
    latency_stars: int
    mechanism: Mechanism
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        for label, stars in (
            ("risk", self.risk_stars),
            ("confidentiality", self.confidentiality_stars),
            ("integrity", self.integrity_stars),
            ("latency", self.latency_stars),
        ):
            if not 1 <= stars <= 5:
                raise ValueError(f"{label} stars {stars} outside 1..5")

    def to_dict(self) -> dict:
        return {
            "field": self.field_name,
            "aliases": list(self.aliases),
            "tamper_risk": self.tamper_risk,
            "risk_stars": self.risk_stars,
            "confidentiality_stars": self.confidentiality_stars,
            "integrity_stars": self.integrity_stars,
            "latency_stars": self.latency_stars,
            "mechanism": self.mechanism.name,
        }


class PolicyRegistry:
    """Name-indexed sensitivity records with alias-tolerant lookup."""

    def __init__(self, records: Iterable[SensitivityRecord]) -> None:
        self.records = tuple(records)
        self._by_key: dict[str, SensitivityRecord] = {}
        for rec in self.records:
            for name in (rec.field_name, *rec.aliases):
                key = _normalize(name)
                other = self._by_key.get(key)
                if other is not None and other is not rec:
                    raise ValueError(f"field name {name!r} maps to two records")
                self._by_key[key] = rec

    def __len__(self) -> int:
        return len(self.records)

    def classify_field(self, field_name: str) -> SensitivityRecord:
        rec = self._by_key.get(_normalize(field_name))
        if rec is None:
            raise UnknownField(f"field {field_name!r} not in the sensitivity registry")
        return rec

    def risk_rating(self, field_name: str) -> tuple[int, str]:
        rec = self.classify_field(field_name)
        return rec.risk_stars, rec.tamper_risk

    def mechanism_for(self, field_name: str) -> Mechanism:
        return self.classify_field(field_name).mechanism

    def field_names(self) -> tuple[str, ...]:
        return tuple(rec.field_name for rec in self.records)

    def to_json_obj(self) -> list[dict]:
        return [rec.to_dict() for rec in self.records]

    @classmethod
    def from_json_obj(cls, obj: Iterable[Mapping]) -> "PolicyRegistry":
        return cls(
            SensitivityRecord(
                field_name=item["field"],
                tamper_risk=item["tamper_risk"],
                risk_stars=int(item["risk_stars"]),
                confidentiality_stars=int(item["confidentiality_stars"]),
                integrity_stars=int(item["integrity_stars"]),
                latency_stars=int(item["latency_stars"]),
                mechanism=Mechanism.parse(item["mechanism"]),
                aliases=tuple(item.get("aliases", ())),
            )
            for item in obj
        )

    @classmethod
    def load(cls, path: str | Path) -> "PolicyRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_json_obj(), indent=2) + "\n", encoding="utf-8"
        )


@dataclass(frozen=True)
class FieldBinding:
    field_name: str
    attr: str


class CeFieldMap:
    """Maps each CE kind to the policy fields its attributes carry.

    FieldBagCe is self-describing: its entries name their fields directly,
    so its static binding list stays empty.
    """

    def __init__(self, bindings: Mapping[str, Sequence[FieldBinding]]) -> None:
        self._bindings = {k: tuple(v) for k, v in bindings.items()}

    def kinds(self) -> tuple[str, ...]:
        return tuple(self._bindings)

    def bindings_for(self, kind: str) -> tuple[FieldBinding, ...]:
        try:
            return self._bindings[kind]
        except KeyError:
            raise UnmappedCeKind(f"CE kind {kind!r} has no field map entry") from None

    def fields_for_ce(self, ce: MacCe) -> list[tuple[str, int]]:
        """(field name, value) pairs the CE exposes, bag entries included."""
        if isinstance(ce, FieldBagCe):
            self.bindings_for(ce.KIND)  # kind must still be mapped
            return [(f.name, f.value) for f in ce.fields]
        return [(b.field_name, getattr(ce, b.attr)) for b in self.bindings_for(ce.KIND)]

    def to_json_obj(self) -> dict:
        return {
            kind: [{"field": b.field_name, "attr": b.attr} for b in bindings]
            for kind, bindings in self._bindings.items()
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "CeFieldMap":
        return cls(
            {
                kind: [FieldBinding(item["field"], item.get("attr", "")) for item in items]
                for kind, items in obj.items()
            }
        )

    @classmethod
    def load(cls, path: str | Path) -> "CeFieldMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def required_mechanism(
    pdu: MacPdu | Sequence[MacCe],
    cefmap: CeFieldMap,
    policy: PolicyRegistry,
) -> Mechanism:
    """Join of the default mechanisms of every field the PDU's CEs carry.

    A PDU with no CEs needs no field protection and maps to M1. Unmapped CE
    kinds and unclassifiable bag field names raise rather than under-protect.
    """
    ces = pdu.ces if isinstance(pdu, MacPdu) else tuple(pdu)
    mechanisms = []
    for ce in ces:
        for field_name, _ in cefmap.fields_for_ce(ce):
            mechanisms.append(policy.classify_field(field_name).mechanism)
    return join_all(mechanisms)


def default_policy() -> PolicyRegistry:
    from .fixtures import data_path

    return PolicyRegistry.load(data_path("policy_table2.json"))


def default_ce_field_map() -> CeFieldMap:
    from .fixtures import data_path

    return CeFieldMap.load(data_path("ce_fields.json"))
