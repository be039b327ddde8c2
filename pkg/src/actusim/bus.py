"""Bit-exact frame codec and latency model for the high-level <-> low-level
link. CAN-style 8-byte payloads; layouts are documented in protocol.md.

Command (8 bytes on the wire, module id inside the payload):
    [id:1][seq:2 LE][current mA: i16 LE][flags:1][crc16:2 LE]
Status pair (9 bytes each: id header byte + 8-byte payload):
    A: [id:1] [seq:2 LE][position counts: i32 LE][crc16:2 LE]
    B: [id:1] [seq:2 LE][velocity: i16 LE, counts/ms * 256][current: i16 LE, mA][crc16:2 LE]

CRC is CRC-16/CCITT-FALSE (poly 0x1021, init 0xFFFF) over every byte that
precedes the CRC field, stored little-endian.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass

FLAG_ENABLE = 0x01
FLAG_CLEAR_FAULT = 0x02

VELOCITY_SCALE = 256.0  # wire velocity unit: counts per millisecond / 256


class CrcMismatch(ValueError):
    """Frame failed its CRC check."""


class RangeOverflow(ValueError):
    """Field value does not fit its fixed-point wire representation."""


def _build_crc_table() -> tuple[int, ...]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
        table.append(crc)
    return tuple(table)


_CRC_TABLE = _build_crc_table()


def crc16_ccitt_false(data: bytes) -> int:
    crc = 0xFFFF
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _CRC_TABLE[(crc >> 8) ^ byte]
    return crc


@dataclass(frozen=True)
class CommandFrame:
    module_id: int            # u8
    sequence: int             # u16, wraps
    current_setpoint_ma: int  # i16, milliamperes
    flags: int = FLAG_ENABLE  # u8; bit0 enable, bit1 clear-fault


@dataclass(frozen=True)
class StatusFrame:
    module_id: int       # u8
    sequence: int        # u16, increments per high-level tick, wraps
    position_counts: int  # i32
    velocity_fixed: int  # i16, counts/ms * 256
    current_ma: int      # i16


def _check(name: str, value: int, lo: int, hi: int) -> None:
    if not (lo <= value <= hi):
        raise RangeOverflow(f"{name}={value} outside [{lo}, {hi}]")


def encode_command(frame: CommandFrame) -> bytes:
    _check("module_id", frame.module_id, 0, 0xFF)
    _check("sequence", frame.sequence, 0, 0xFFFF)
    _check("current_setpoint_ma", frame.current_setpoint_ma, -32768, 32767)
    _check("flags", frame.flags, 0, 0xFF)
    body = struct.pack(
        "<BHhB", frame.module_id, frame.sequence, frame.current_setpoint_ma, frame.flags
    )
    return body + struct.pack("<H", crc16_ccitt_false(body))


def decode_command(payload: bytes) -> CommandFrame:
    if len(payload) != 8:
        raise ValueError(f"command payload must be 8 bytes, got {len(payload)}")
    (crc,) = struct.unpack("<H", payload[6:8])
    if crc != crc16_ccitt_false(payload[:6]):
        raise CrcMismatch("command frame CRC mismatch")
    module_id, sequence, current_ma, flags = struct.unpack("<BHhB", payload[:6])
    return CommandFrame(module_id, sequence, current_ma, flags)


def encode_status(frame: StatusFrame) -> tuple[bytes, bytes]:
    """Two wire frames: the id header byte plus an 8-byte payload each.

    The CRC covers the id header and the payload bytes before it, so every
    transmitted bit is protected.
    """
    _check("module_id", frame.module_id, 0, 0xFF)
    _check("sequence", frame.sequence, 0, 0xFFFF)
    _check("position_counts", frame.position_counts, -(2**31), 2**31 - 1)
    _check("velocity_fixed", frame.velocity_fixed, -32768, 32767)
    _check("current_ma", frame.current_ma, -32768, 32767)
    head_a = struct.pack("<BHi", frame.module_id, frame.sequence, frame.position_counts)
    frame_a = head_a + struct.pack("<H", crc16_ccitt_false(head_a))
    head_b = struct.pack(
        "<BHhh", frame.module_id, frame.sequence, frame.velocity_fixed, frame.current_ma
    )
    frame_b = head_b + struct.pack("<H", crc16_ccitt_false(head_b))
    return frame_a, frame_b


def decode_status(frame_a: bytes, frame_b: bytes) -> StatusFrame:
    if len(frame_a) != 9 or len(frame_b) != 9:
        raise ValueError("status frames must be 9 bytes (id header + 8-byte payload)")
    for wire in (frame_a, frame_b):
        (crc,) = struct.unpack("<H", wire[-2:])
        if crc != crc16_ccitt_false(wire[:-2]):
            raise CrcMismatch("status frame CRC mismatch")
    id_a, seq_a, position = struct.unpack("<BHi", frame_a[:7])
    id_b, seq_b, velocity, current = struct.unpack("<BHhh", frame_b[:7])
    if id_a != id_b or seq_a != seq_b:
        raise ValueError("status frame pair mismatch (id or sequence)")
    return StatusFrame(id_a, seq_a, position, velocity, current)


def clamp_i16(value: float) -> int:
    """Saturating conversion to the i16 wire range."""
    return max(-32768, min(32767, round(value)))


class TransportQueue:
    """In-order, lossless delivery with a fixed latency in high-level ticks.

    A frame pushed at tick k is delivered by pop(k + latency); latency 0
    delivers within the same tick (push happens before pop in the loop).
    """

    def __init__(self, latency_ticks: int = 1):
        if latency_ticks < 0:
            raise ValueError(f"latency_ticks must be >= 0, got {latency_ticks}")
        self.latency = latency_ticks
        self._queue: deque[tuple[int, bytes]] = deque()

    def push(self, payload: bytes, tick: int) -> None:
        self._queue.append((tick + self.latency, payload))

    def pop(self, tick: int) -> list[bytes]:
        delivered = []
        while self._queue and self._queue[0][0] <= tick:
            delivered.append(self._queue.popleft()[1])
        return delivered
