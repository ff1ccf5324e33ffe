"""Attacker's-eye view of secured frames: eavesdrop, tamper, campaigns.

The adversary model is an on-path observer who sees every frame, knows the
wire formats and the LCID registry, but holds no keys. Eavesdropping reads
whatever the mechanism leaves in the clear; tampering mutates frames and
scores the receiver's reaction; a campaign runs both over scripted traffic
and aggregates the damage per policy field and per mechanism.
"""

from __future__ import annotations

import dataclasses
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import (
    BadMechanism,
    EmptyScenario,
    FieldNotPresent,
    MacCeSecError,
    MalformedFrame,
    TagMismatch,
    TruncatedFrame,
)
from .mac_codec.ce import BagField, FieldBagCe, MacCe, ce_from_dict
from .mac_codec.pdu import MacPdu, assemble_pdu, parse_pdu
from .mac_codec.registry import LcidRegistry
from .policy import CeFieldMap, Mechanism, PolicyRegistry, required_mechanism
from .protection import HEADER_LEN, KeySlot, SecuredFrame, protect, unprotect

# --- traffic scenarios --------------------------------------------------------


@dataclass(frozen=True)
class ScenarioEntry:
    time_s: float
    pdu: MacPdu
    mechanism: Mechanism | None = None  # None: pick per policy at protect time

    def to_dict(self) -> dict:
        return {
            "time_s": self.time_s,
            "direction": self.pdu.direction,
            "mechanism": self.mechanism.name if self.mechanism else "auto",
            "pdu_hex": self.pdu.to_bytes().hex(),
        }


@dataclass(frozen=True)
class Scenario:
    entries: tuple[ScenarioEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_json_obj(cls, obj: Iterable[Mapping], registry: LcidRegistry) -> "Scenario":
        entries = []
        for item in obj:
            direction = item.get("direction", "dl")
            if "pdu_hex" in item:
                pdu = parse_pdu(direction, bytes.fromhex(item["pdu_hex"]), registry)
            else:
                ces = [ce_from_dict(c) for c in item.get("ce_list", ())]
                sdus = [bytes.fromhex(s) for s in item.get("sdus_hex", ())]
                pdu = assemble_pdu(direction, ces, sdus, registry=registry)
            mech = item.get("mechanism", "auto")
            entries.append(
                ScenarioEntry(
                    time_s=float(item.get("time_s", 0.0)),
                    pdu=pdu,
                    mechanism=None if mech in (None, "auto") else Mechanism.parse(mech),
                )
            )
        return cls(tuple(entries))

    @classmethod
    def load(cls, path: str | Path, registry: LcidRegistry) -> "Scenario":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh), registry)


# --- eavesdropping ------------------------------------------------------------


@dataclass(frozen=True)
class FieldExposure:
    exposed: bool
    values: tuple[int, ...] = ()


@dataclass(frozen=True)
class ExposureReport:
    mechanism: Mechanism
    fields: Mapping[str, FieldExposure]

    def exposed_fields(self) -> tuple[str, ...]:
        return tuple(sorted(n for n, e in self.fields.items() if e.exposed))

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism.name,
            "exposed": list(self.exposed_fields()),
            "fields": {
                name: {"exposed": e.exposed, "values": list(e.values)}
                for name, e in sorted(self.fields.items())
            },
        }


def _parse_body(
    body: bytes, registry: LcidRegistry, direction: str | None
) -> MacPdu:
    if direction is not None:
        try:
            return parse_pdu(direction, body, registry)
        except MacCeSecError as exc:
            raise MalformedFrame(f"body does not parse as a {direction} PDU: {exc}") from exc
    try:
        return parse_pdu("dl", body, registry)
    except MacCeSecError:
        try:
            return parse_pdu("ul", body, registry)
        except MacCeSecError as exc:
            raise MalformedFrame(f"body parses in neither direction: {exc}") from exc


def _canonical_name(name: str, policy: PolicyRegistry) -> str:
    try:
        return policy.classify_field(name).field_name
    except MacCeSecError:
        return name


def eavesdrop(
    frame: bytes,
    registry: LcidRegistry,
    cefmap: CeFieldMap,
    policy: PolicyRegistry,
    direction: str | None = None,
) -> ExposureReport:
    """Report which policy fields a passive observer reads from one frame.

    M1 and M2 leave the PDU in the clear, so their CE fields are exposed;
    M3 and M4 bodies are ciphertext and expose nothing at the field level.
    """
    try:
        sf = SecuredFrame.parse(frame)
    except (TruncatedFrame, BadMechanism) as exc:
        raise MalformedFrame(str(exc)) from exc
    exposures: dict[str, FieldExposure] = {}
    if not sf.mechanism.has_confidentiality:
        pdu = _parse_body(sf.body, registry, direction)
        seen: dict[str, list[int]] = {}
        for ce in pdu.ces:
            for name, value in cefmap.fields_for_ce(ce):
                seen.setdefault(_canonical_name(name, policy), []).append(value)
        exposures = {
            name: FieldExposure(exposed=True, values=tuple(values))
            for name, values in seen.items()
        }
    return ExposureReport(mechanism=sf.mechanism, fields=exposures)


# --- tampering ----------------------------------------------------------------


@dataclass(frozen=True)
class TamperOutcome:
    """Receiver's verdict on one tampered frame.

    ``detected`` means the receiver rejected the frame (error_code says how);
    ``delivered`` means it handed a PDU up; ``altered`` means that PDU is not
    byte-identical to the original. detected and delivered never both hold.
    """

    mutated_frame: bytes
    detected: bool
    delivered: bool
    altered: bool
    error_code: str | None = None
    delivered_pdu: bytes | None = None

    def to_dict(self) -> dict:
        return {
            "mutated_frame_hex": self.mutated_frame.hex(),
            "detected": self.detected,
            "delivered": self.delivered,
            "altered": self.altered,
            "error_code": self.error_code,
            "delivered_pdu_hex": self.delivered_pdu.hex() if self.delivered_pdu else None,
        }


def _judge(
    original_body: bytes,
    mutated: bytes,
    slots: KeySlot | Mapping[int, KeySlot],
) -> TamperOutcome:
    try:
        _, pdu_bytes = unprotect(mutated, slots, window=None)
    except MacCeSecError as exc:
        return TamperOutcome(
            mutated_frame=mutated,
            detected=True,
            delivered=False,
            altered=False,
            error_code=exc.code,
        )
    return TamperOutcome(
        mutated_frame=mutated,
        detected=False,
        delivered=True,
        altered=pdu_bytes != original_body,
        delivered_pdu=pdu_bytes,
    )


def _replace_field_in_ce(
    ce: MacCe, target: str, new_value: int, cefmap: CeFieldMap, policy: PolicyRegistry
) -> MacCe | None:
    if isinstance(ce, FieldBagCe):
        hit = False
        fields = []
        for f in ce.fields:
            if _canonical_name(f.name, policy) == target and not hit:
                fields.append(BagField(f.name, f.width, new_value))
                hit = True
            else:
                fields.append(f)
        return FieldBagCe(tuple(fields)) if hit else None
    for binding in cefmap.bindings_for(ce.KIND):
        if _canonical_name(binding.field_name, policy) == target:
            return dataclasses.replace(ce, **{binding.attr: new_value})
    return None


def tamper(
    frame: bytes,
    slots: KeySlot | Mapping[int, KeySlot],
    registry: LcidRegistry,
    cefmap: CeFieldMap,
    policy: PolicyRegistry,
    field_name: str | None = None,
    new_value: int | None = None,
    bit_positions: Sequence[int] | None = None,
    seed: int | None = None,
    direction: str | None = None,
) -> TamperOutcome:
    """Mutate one frame and score the receiver's reaction.

    Exactly one targeting mode applies: a named field with its replacement
    value (M1/M2 frames only, where the body is legible), an explicit list
    of absolute bit positions (0 is the MSB of octet 0), or a seed that
    flips one random bit in the protected body+tag region.
    """
    modes = sum(
        x is not None for x in (field_name, bit_positions, seed)
    )
    if modes != 1:
        raise ValueError("pick exactly one of field_name, bit_positions, seed")
    try:
        sf = SecuredFrame.parse(frame)
    except (TruncatedFrame, BadMechanism) as exc:
        raise MalformedFrame(str(exc)) from exc
    try:
        _, original_body = unprotect(frame, slots, window=None)
    except MacCeSecError:
        original_body = sf.body  # original already undeliverable; judge raw

    if field_name is not None:
        if new_value is None:
            raise ValueError("field targeting needs new_value")
        if sf.mechanism.has_confidentiality:
            raise FieldNotPresent(
                f"{sf.mechanism.name} body is ciphertext; fields are not addressable"
            )
        target = _canonical_name(field_name, policy)
        pdu = _parse_body(sf.body, registry, direction)
        new_subpdus = None
        for i, sp in enumerate(pdu.subpdus):
            if sp.ce is None:
                continue
            replaced = _replace_field_in_ce(sp.ce, target, new_value, cefmap, policy)
            if replaced is not None:
                new_subpdus = list(pdu.subpdus)
                new_subpdus[i] = dataclasses.replace(sp, ce=replaced)
                break
        if new_subpdus is None:
            raise FieldNotPresent(f"field {field_name!r} not carried by this frame")
        new_body = MacPdu(pdu.direction, tuple(new_subpdus)).to_bytes()
        # header and any tag stay stale: integrity must catch the edit
        mutated = sf.header_bytes() + new_body + (sf.tag or b"")
        return _judge(original_body, mutated, slots)

    if bit_positions is not None:
        positions = list(bit_positions)
        if not positions:
            raise ValueError("bit_positions must not be empty")
    else:
        rng = random.Random(seed)
        first = HEADER_LEN * 8
        positions = [rng.randrange(first, len(frame) * 8)]
    mutated = bytearray(frame)
    for pos in positions:
        if not 0 <= pos < len(frame) * 8:
            raise ValueError(f"bit position {pos} outside frame")
        mutated[pos // 8] ^= 1 << (7 - pos % 8)
    return _judge(original_body, bytes(mutated), slots)


# --- campaigns ----------------------------------------------------------------


@dataclass
class MechanismStats:
    frames: int = 0
    tamper_trials: int = 0
    detected: int = 0
    delivered: int = 0
    delivered_altered: int = 0

    @property
    def detection_rate(self) -> float | None:
        if self.tamper_trials == 0:
            return None
        return self.detected / self.tamper_trials

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "tamper_trials": self.tamper_trials,
            "detected": self.detected,
            "delivered": self.delivered,
            "delivered_altered": self.delivered_altered,
            "detection_rate": self.detection_rate,
        }


@dataclass(frozen=True)
class ExposureRow:
    field_name: str
    risk_stars: int
    tamper_risk: str
    assigned_mechanism: Mechanism
    exposed: bool
    occurrences: int
    values: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "field": self.field_name,
            "risk_stars": self.risk_stars,
            "tamper_risk": self.tamper_risk,
            "assigned_mechanism": self.assigned_mechanism.name,
            "exposed": self.exposed,
            "occurrences": self.occurrences,
            "values": list(self.values),
        }


@dataclass(frozen=True)
class AttackReport:
    frames: int
    trials: int
    seed: int
    exposure: tuple[ExposureRow, ...]
    per_mechanism: Mapping[str, MechanismStats]
    clean_rejections: int

    def exposed_fields(self) -> tuple[str, ...]:
        return tuple(sorted(r.field_name for r in self.exposure if r.exposed))

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "trials": self.trials,
            "seed": self.seed,
            "clean_rejections": self.clean_rejections,
            "exposed": list(self.exposed_fields()),
            "exposure": [r.to_dict() for r in self.exposure],
            "per_mechanism": {
                name: stats.to_dict() for name, stats in sorted(self.per_mechanism.items())
            },
        }

    def to_text(self) -> str:
        return render_report_text(self.to_dict())


def render_report_text(report: Mapping) -> str:
    """Plain-text table for an AttackReport dict (the JSON wire shape)."""
    lines = [
        "campaign: {frames} frames, {trials} tamper trials, seed {seed}".format_map(
            report
        ),
        f"clean traffic rejections: {report['clean_rejections']}",
        "",
        f"{'field':34} {'risk':>4} {'mech':>4} {'exposed':>7} {'seen':>4}  values",
    ]
    for r in report["exposure"]:
        values = ",".join(str(v) for v in r["values"][:6])
        if len(r["values"]) > 6:
            values += ",..."
        lines.append(
            f"{r['field']:34} {r['risk_stars']:>4} {r['assigned_mechanism']:>4} "
            f"{'yes' if r['exposed'] else 'no':>7} {r['occurrences']:>4}  {values}"
        )
    lines.append("")
    lines.append(
        f"{'mechanism':9} {'frames':>6} {'trials':>6} {'detected':>8} "
        f"{'delivered':>9} {'altered':>7} {'rate':>6}"
    )
    for name, s in sorted(report["per_mechanism"].items()):
        rate = "-" if s["detection_rate"] is None else f"{s['detection_rate']:.4f}"
        lines.append(
            f"{name:9} {s['frames']:>6} {s['tamper_trials']:>6} {s['detected']:>8} "
            f"{s['delivered']:>9} {s['delivered_altered']:>7} {rate:>6}"
        )
    return "\n".join(lines) + "\n"


def run_campaign(
    scenario: Scenario,
    registry: LcidRegistry,
    cefmap: CeFieldMap,
    policy: PolicyRegistry,
    slot: KeySlot,
    trials: int = 1000,
    seed: int = 0,
) -> AttackReport:
    """Protect scripted traffic, then eavesdrop and bit-flip it.

    Three phases: every entry is protected (per its declared mechanism, or
    per policy when auto) with seq equal to its index; the observer reads
    each frame; ``trials`` single-bit flips land on uniformly random
    positions in the body+tag region of uniformly chosen frames. Identical
    inputs and seed give an identical report.
    """
    if len(scenario) == 0:
        raise EmptyScenario("scenario has no entries")
    frames: list[tuple[bytes, Mechanism, ScenarioEntry]] = []
    for i, entry in enumerate(scenario.entries):
        mech = entry.mechanism or required_mechanism(entry.pdu, cefmap, policy)
        frames.append((protect(entry.pdu.to_bytes(), mech, slot, seq=i), mech, entry))

    stats = {m.name: MechanismStats() for m in Mechanism}
    for _, mech, _ in frames:
        stats[mech.name].frames += 1

    # phase 1: passive exposure
    seen: dict[str, list[int]] = {}
    occurrences: dict[str, int] = {}
    carried: dict[str, set[str]] = {}
    for frame_bytes, mech, entry in frames:
        for ce in entry.pdu.ces:
            for name, _ in cefmap.fields_for_ce(ce):
                carried.setdefault(_canonical_name(name, policy), set()).add(mech.name)
        report = eavesdrop(
            frame_bytes, registry, cefmap, policy, direction=entry.pdu.direction
        )
        for name, exp in report.fields.items():
            seen.setdefault(name, []).extend(exp.values)
            occurrences[name] = occurrences.get(name, 0) + 1

    # phase 2: clean delivery must be loss-free
    from .protection import ReplayWindow

    window = ReplayWindow()
    clean_rejections = 0
    for frame_bytes, _, _ in frames:
        try:
            unprotect(frame_bytes, slot, window=window)
        except MacCeSecError:
            clean_rejections += 1

    # phase 3: seeded bit flips across the protected region
    rng = random.Random(seed)
    for _ in range(trials):
        idx = rng.randrange(len(frames))
        frame_bytes, mech, _ = frames[idx]
        pos = rng.randrange(HEADER_LEN * 8, len(frame_bytes) * 8)
        outcome = tamper(
            frame_bytes, slot, registry, cefmap, policy, bit_positions=[pos]
        )
        s = stats[mech.name]
        s.tamper_trials += 1
        if outcome.detected:
            s.detected += 1
        if outcome.delivered:
            s.delivered += 1
            if outcome.altered:
                s.delivered_altered += 1

    rows = []
    for name in sorted(carried):
        rec = policy.classify_field(name)
        values = sorted(set(seen.get(name, ())))
        rows.append(
            ExposureRow(
                field_name=rec.field_name,
                risk_stars=rec.risk_stars,
                tamper_risk=rec.tamper_risk,
                assigned_mechanism=rec.mechanism,
                exposed=name in seen,
                occurrences=occurrences.get(name, 0),
                values=tuple(values),
            )
        )
    rows.sort(key=lambda r: (-r.risk_stars, r.field_name))
    return AttackReport(
        frames=len(frames),
        trials=trials,
        seed=seed,
        exposure=tuple(rows),
        per_mechanism={k: v for k, v in stats.items() if v.frames},
        clean_rejections=clean_rejections,
    )


# --- service-type inference ---------------------------------------------------


@dataclass(frozen=True)
class ServiceMap:
    """Coarse traffic taxonomy keyed by exposed scheduling hints."""

    bwp_classes: Mapping[int, str]
    class_labels: Mapping[str, str]
    lcg_labels: Mapping[int, str]
    default_label: str = "other"

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ServiceMap":
        return cls(
            bwp_classes={int(k): v for k, v in obj.get("bwp_classes", {}).items()},
            class_labels=dict(obj.get("class_labels", {})),
            lcg_labels={int(k): v for k, v in obj.get("lcg_labels", {}).items()},
            default_label=obj.get("default_label", "other"),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ServiceMap":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_obj(json.load(fh))


def infer_service_type(
    observations: Iterable[Mapping], service_map: ServiceMap
) -> list[dict]:
    """Label observed BWP/LCG values with likely service types.

    Each observation is a mapping with ``time_s`` and one of ``bwp_id`` or
    ``lcg_id``. Unmapped values fall back to the map's default label.
    """
    out = []
    for obs in observations:
        time_s = float(obs.get("time_s", 0.0))
        if "bwp_id" in obs and obs["bwp_id"] is not None:
            bwp = int(obs["bwp_id"])
            klass = service_map.bwp_classes.get(bwp)
            label = service_map.class_labels.get(klass, service_map.default_label)
            row = {
                "time_s": time_s,
                "source": "bwp_id",
                "value": bwp,
                "bandwidth_class": klass,
                "service": label,
            }
        elif "lcg_id" in obs and obs["lcg_id"] is not None:
            lcg = int(obs["lcg_id"])
            row = {
                "time_s": time_s,
                "source": "lcg_id",
                "value": lcg,
                "service": service_map.lcg_labels.get(lcg, service_map.default_label),
            }
        else:
            raise ValueError("observation needs bwp_id or lcg_id")
        out.append(row)
    return out


def default_service_map() -> ServiceMap:
    from .fixtures import data_path

    return ServiceMap.load(data_path("service_map_default.json"))
