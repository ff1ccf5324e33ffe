"""MSB-first bit packing helpers for octet-aligned control element layouts."""

from __future__ import annotations

from ..errors import FieldOverflow, TruncatedPdu


class BitWriter:
    """Accumulates integer fields MSB-first and pads the tail to a whole octet."""

    def __init__(self) -> None:
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int) -> None:
        if width <= 0:
            raise ValueError("width must be positive")
        if value < 0 or value >> width:
            raise FieldOverflow(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nbits += width

    @property
    def bit_length(self) -> int:
        return self._nbits

    def to_bytes(self) -> bytes:
        # zero-pad on the right so the final bit lands in the MSB side of the last octet
        pad = (-self._nbits) % 8
        acc = self._acc << pad
        return acc.to_bytes((self._nbits + pad) // 8, "big")


class BitReader:
    """Consumes integer fields MSB-first from a byte string."""

    def __init__(self, data: bytes) -> None:
        self._data = data
        self._pos = 0  # bit offset from the start

    def read(self, width: int) -> int:
        if width <= 0:
            raise ValueError("width must be positive")
        if self._pos + width > len(self._data) * 8:
            raise TruncatedPdu(f"need {width} bits, {self.bits_left} left")
        out = 0
        pos = self._pos
        for _ in range(width):
            byte = self._data[pos >> 3]
            out = (out << 1) | ((byte >> (7 - (pos & 7))) & 1)
            pos += 1
        self._pos = pos
        return out

    @property
    def bits_left(self) -> int:
        return len(self._data) * 8 - self._pos

    def read_padding(self) -> int:
        """Read whatever remains of the current octet (0 if already aligned)."""
        rem = self._pos % 8
        if rem == 0:
            return 0
        return self.read(8 - rem)
