"""Exception taxonomy shared by every layer of the package.

Each error carries a ``kind`` string so transport layers (HTTP service,
CLI) can map failures onto a stable contract without matching on class
names: parse -> 2, ordering -> 3, policy -> 4, crypto -> 5, geometry and
data problems -> 6.
"""

from __future__ import annotations

KIND_PARSE = "parse"
KIND_ORDERING = "ordering"
KIND_POLICY = "policy"
KIND_CRYPTO = "crypto"
KIND_DATA = "data"

EXIT_CODE_BY_KIND = {
    KIND_PARSE: 2,
    KIND_ORDERING: 3,
    KIND_POLICY: 4,
    KIND_CRYPTO: 5,
    KIND_DATA: 6,
}


class MacCeSecError(Exception):
    """Base class for all domain errors raised by this package."""

    kind = KIND_DATA

    @property
    def code(self) -> str:
        return type(self).__name__

    @property
    def exit_code(self) -> int:
        return EXIT_CODE_BY_KIND[self.kind]


# --- wire parsing / encoding -------------------------------------------------


class ParseError(MacCeSecError):
    kind = KIND_PARSE


class TruncatedPdu(ParseError):
    """Input ended before a subheader, length field, or payload was complete."""


class UnknownLcid(ParseError):
    """LCID has no registry entry for the given direction."""


class LengthMismatch(ParseError):
    """Payload length contradicts the fixed size or the declared length field."""


class NonZeroReservedBits(ParseError):
    """Reserved or padding bits are set and strict decoding was requested."""


class FieldOverflow(ParseError):
    """Field value does not fit its declared bit width."""


class UnknownCeKind(ParseError):
    """CE kind missing from the registry (or not allowed in this direction)."""


class TargetTooSmall(ParseError):
    """Requested PDU size is below the size of the mandatory content."""


class OrderingViolation(MacCeSecError):
    """Sub-PDU order breaks the DL or UL placement rule (strict mode only)."""

    kind = KIND_ORDERING


# --- policy ------------------------------------------------------------------


class PolicyError(MacCeSecError):
    kind = KIND_POLICY


class UnknownField(PolicyError):
    """Field name absent from the sensitivity registry."""


class UnmappedCeKind(PolicyError):
    """CE kind has no entry in the CE-to-field map."""


# --- secured frames ----------------------------------------------------------


class CryptoError(MacCeSecError):
    kind = KIND_CRYPTO


class BadVersion(CryptoError):
    """Frame version octet is not the supported value."""


class BadMechanism(CryptoError):
    """Mechanism octet is outside the defined 0x01..0x04 range."""


class UnknownKeyId(CryptoError):
    """No key slot provisioned for the frame's key_id."""


class TagMismatch(CryptoError):
    """Integrity tag failed verification."""


class ReplayDetected(CryptoError):
    """Sequence number already seen or older than the replay window."""


class TruncatedFrame(CryptoError):
    """Frame shorter than header (plus tag, where one is required)."""


class EmptyPayload(CryptoError):
    """Refusing to protect a zero-length payload."""


class SeqExhausted(CryptoError):
    """Sequence space for this key is spent; rekey before continuing."""


# --- adversary simulation ----------------------------------------------------


class MalformedFrame(MacCeSecError):
    """Frame or its embedded PDU cannot be interpreted by the attacker model."""


class FieldNotPresent(MacCeSecError):
    """Targeted field is not visible in the frame (absent or encrypted)."""


class EmptyScenario(MacCeSecError):
    """Campaign invoked with no traffic to attack."""


# --- geolocation -------------------------------------------------------------


class GeoError(MacCeSecError):
    kind = KIND_DATA


class OutOfRange(GeoError):
    """Numeric argument outside its defined domain."""


class IndexBeyondBeamCount(GeoError):
    """SSB index does not exist on this cell."""


class UnknownCell(GeoError):
    """cell_id missing from the cell database."""


class InconsistentObservations(GeoError):
    """Observations admit no common position."""


class CollinearCells(GeoError):
    """Anchor geometry is degenerate; ranges cannot fix a unique point."""


class InsufficientData(GeoError):
    """Not enough observation history to build a profile."""
