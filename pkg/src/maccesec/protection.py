"""Tiered protection of MAC PDUs as secured frames.

Wire layout (all integers big-endian):

    octet 0      version, 0x01
    octet 1      mechanism wire code, 0x01..0x04
    octet 2      key_id
    octets 3-6   seq, u32
    octets 7..   body (plaintext for M1/M2, AES-256-CTR output for M3/M4)
    final 16     truncated HMAC-SHA-256 tag, present for M2/M4 only

The tag covers header plus body, computed after encryption, so receivers
authenticate the exact bytes they decrypt. The CTR counter block is
key_id (1) || seq (4) || zeros (7) || block counter (4, from 0); key_id and
seq never repeat per key, which keeps keystream reuse off the table.

Receivers verify the tag before acting on any header field, so a flipped
version or sequence octet in a tagged frame surfaces as TagMismatch, not
as a differently-shaped rejection.
"""

from __future__ import annotations

import hashlib
import hmac
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes

from .errors import (
    BadMechanism,
    BadVersion,
    EmptyPayload,
    ReplayDetected,
    SeqExhausted,
    TagMismatch,
    TruncatedFrame,
    UnknownKeyId,
)
from .mac_codec.pdu import MacPdu
from .policy import CeFieldMap, Mechanism, PolicyRegistry, required_mechanism

VERSION = 0x01
HEADER_LEN = 7
TAG_LEN = 16
SEQ_MAX = 0xFFFFFFFF
KEY_LEN = 32


@dataclass(frozen=True)
class KeySlot:
    """One provisioned key pair, addressed by an 8-bit key_id."""

    key_id: int
    integrity_key: bytes
    encryption_key: bytes

    def __post_init__(self) -> None:
        if not 0 <= self.key_id <= 0xFF:
            raise ValueError(f"key_id {self.key_id} outside 0..255")
        if len(self.integrity_key) != KEY_LEN:
            raise ValueError("integrity_key must be 32 octets")
        if len(self.encryption_key) != KEY_LEN:
            raise ValueError("encryption_key must be 32 octets")

    def to_dict(self) -> dict:
        return {
            "key_id": self.key_id,
            "integrity_key_hex": self.integrity_key.hex(),
            "encryption_key_hex": self.encryption_key.hex(),
        }

    @classmethod
    def from_dict(cls, obj: Mapping) -> "KeySlot":
        return cls(
            key_id=int(obj["key_id"]),
            integrity_key=bytes.fromhex(obj["integrity_key_hex"]),
            encryption_key=bytes.fromhex(obj["encryption_key_hex"]),
        )


def load_key_slots(path: str | Path) -> dict[int, KeySlot]:
    """Load one slot or a list of slots, keyed by key_id."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    items = obj if isinstance(obj, list) else [obj]
    slots = {}
    for item in items:
        slot = KeySlot.from_dict(item)
        if slot.key_id in slots:
            raise ValueError(f"key_id {slot.key_id} provisioned twice")
        slots[slot.key_id] = slot
    return slots


class ReplayWindow:
    """Sliding acceptance window over a 32-bit sequence space.

    Tracks the highest sequence seen plus a bitmap of the ``size`` most
    recent values below it. ``accept`` admits each sequence number exactly
    once and rejects anything older than the window.
    """

    def __init__(self, size: int = 64) -> None:
        if size < 1:
            raise ValueError("window size must be >= 1")
        self.size = size
        self.highest: int | None = None
        self._bitmap = 0  # bit i set: (highest - i) already seen

    def seen(self, seq: int) -> bool:
        if self.highest is None or seq > self.highest:
            return False
        offset = self.highest - seq
        if offset >= self.size:
            return True  # too old to tell apart from a replay: treat as seen
        return bool((self._bitmap >> offset) & 1)

    def accept(self, seq: int) -> None:
        if not 0 <= seq <= SEQ_MAX:
            raise ValueError(f"seq {seq} outside u32 range")
        if self.highest is None:
            self.highest = seq
            self._bitmap = 1
            return
        if seq > self.highest:
            shift = seq - self.highest
            self._bitmap = ((self._bitmap << shift) | 1) & ((1 << self.size) - 1)
            self.highest = seq
            return
        offset = self.highest - seq
        if offset >= self.size:
            raise ReplayDetected(f"seq {seq} older than the {self.size}-wide window")
        if (self._bitmap >> offset) & 1:
            raise ReplayDetected(f"seq {seq} already accepted")
        self._bitmap |= 1 << offset


@dataclass(frozen=True)
class SecuredFrame:
    """Structural view of a frame; no key material, no verification."""

    version: int
    mechanism: Mechanism
    key_id: int
    seq: int
    body: bytes
    tag: bytes | None

    @classmethod
    def parse(cls, frame: bytes) -> "SecuredFrame":
        if len(frame) < HEADER_LEN:
            raise TruncatedFrame(f"frame is {len(frame)} octets, header needs {HEADER_LEN}")
        mech_code = frame[1]
        try:
            mechanism = Mechanism(mech_code)
        except ValueError:
            raise BadMechanism(f"mechanism octet 0x{mech_code:02x} undefined") from None
        tag_len = TAG_LEN if mechanism.has_integrity else 0
        if len(frame) < HEADER_LEN + tag_len + 1:
            raise TruncatedFrame(
                f"{mechanism.name} frame needs >= {HEADER_LEN + tag_len + 1} octets"
            )
        tag = frame[len(frame) - tag_len :] if tag_len else None
        return cls(
            version=frame[0],
            mechanism=mechanism,
            key_id=frame[2],
            seq=int.from_bytes(frame[3:7], "big"),
            body=frame[HEADER_LEN : len(frame) - tag_len],
            tag=tag,
        )

    def header_bytes(self) -> bytes:
        return (
            bytes([self.version, self.mechanism.wire_code, self.key_id])
            + self.seq.to_bytes(4, "big")
        )

    def to_bytes(self) -> bytes:
        return self.header_bytes() + self.body + (self.tag or b"")


def _keystream_xor(key: bytes, key_id: int, seq: int, data: bytes) -> bytes:
    counter0 = bytes([key_id]) + seq.to_bytes(4, "big") + bytes(11)
    enc = Cipher(algorithms.AES(key), modes.CTR(counter0)).encryptor()
    return enc.update(data) + enc.finalize()


def _tag(integrity_key: bytes, header: bytes, body: bytes) -> bytes:
    return hmac.new(integrity_key, header + body, hashlib.sha256).digest()[:TAG_LEN]


def protect(
    pdu_bytes: bytes,
    mechanism: Mechanism | str | int,
    slot: KeySlot,
    seq: int,
) -> bytes:
    """Wrap encoded PDU bytes in a secured frame under the given mechanism."""
    mechanism = Mechanism.parse(mechanism)
    if not pdu_bytes:
        raise EmptyPayload("refusing to protect an empty PDU")
    if not 0 <= seq <= SEQ_MAX:
        raise ValueError(f"seq {seq} outside u32 range")
    if seq == SEQ_MAX:
        raise SeqExhausted("sequence space spent for this key; rekey")
    header = bytes([VERSION, mechanism.wire_code, slot.key_id]) + seq.to_bytes(4, "big")
    body = pdu_bytes
    if mechanism.has_confidentiality:
        body = _keystream_xor(slot.encryption_key, slot.key_id, seq, body)
    frame = header + body
    if mechanism.has_integrity:
        frame += _tag(slot.integrity_key, header, body)
    return frame


def unprotect(
    frame: bytes,
    slots: KeySlot | Mapping[int, KeySlot],
    window: ReplayWindow | None = None,
) -> tuple[Mechanism, bytes]:
    """Verify and unwrap a secured frame, returning (mechanism, pdu bytes).

    Passing a ``window`` arms replay rejection for M2/M3/M4 (an M1 sequence
    number is attacker-writable, so replay filtering would be theater); the
    window is updated only after every other check has passed.
    """
    sf = SecuredFrame.parse(frame)
    if isinstance(slots, KeySlot):
        slots = {slots.key_id: slots}
    slot = slots.get(sf.key_id)
    if slot is None:
        raise UnknownKeyId(f"no key slot for key_id {sf.key_id}")
    if sf.mechanism.has_integrity:
        header = frame[:HEADER_LEN]
        expected = _tag(slot.integrity_key, header, sf.body)
        if not hmac.compare_digest(expected, sf.tag):
            raise TagMismatch("integrity tag failed verification")
    if sf.version != VERSION:
        raise BadVersion(f"version 0x{sf.version:02x}, expected 0x{VERSION:02x}")
    if window is not None and sf.mechanism is not Mechanism.M1:
        window.accept(sf.seq)
    body = sf.body
    if sf.mechanism.has_confidentiality:
        body = _keystream_xor(slot.encryption_key, sf.key_id, sf.seq, body)
    return sf.mechanism, body


def protect_per_policy(
    pdu: MacPdu,
    policy: PolicyRegistry,
    cefmap: CeFieldMap,
    slot: KeySlot,
    seq: int,
) -> bytes:
    """Protect a PDU under the weakest mechanism its fields allow."""
    mechanism = required_mechanism(pdu, cefmap, policy)
    return protect(pdu.to_bytes(), mechanism, slot, seq)
