import random

import numpy as np
import pytest

from actusim.bus import (
    CommandFrame,
    CrcMismatch,
    RangeOverflow,
    StatusFrame,
    TransportQueue,
    clamp_i16,
    crc16_ccitt_false,
    decode_command,
    decode_status,
    encode_command,
    encode_status,
)


def crc16_reference(data: bytes) -> int:
    """Independent bitwise CRC-16/CCITT-FALSE (oracle for the table version)."""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    return crc


class TestCrc:
    def test_standard_check_value(self):
        assert crc16_ccitt_false(b"123456789") == 0x29B1

    def test_matches_bitwise_reference(self):
        rng = random.Random(1234)
        for _ in range(200):
            data = bytes(rng.randrange(256) for _ in range(rng.randrange(1, 12)))
            assert crc16_ccitt_false(data) == crc16_reference(data)


class TestCommandCodec:
    def test_zero_frame_layout(self):
        frame = CommandFrame(module_id=0, sequence=0, current_setpoint_ma=0, flags=0)
        wire = encode_command(frame)
        assert len(wire) == 8
        assert wire[:6] == bytes(6)
        expected_crc = crc16_reference(bytes(6))
        assert int.from_bytes(wire[6:8], "little") == expected_crc

    def test_one_amp_little_endian(self):
        wire = encode_command(CommandFrame(1, 7, 1000, 1))
        assert wire[3] == 0xE8 and wire[4] == 0x03

    def test_roundtrip(self):
        frame = CommandFrame(17, 40000, -1234, 3)
        assert decode_command(encode_command(frame)) == frame

    def test_bad_crc_rejected(self):
        wire = bytearray(encode_command(CommandFrame(1, 2, 3, 1)))
        wire[2] ^= 0x10
        with pytest.raises(CrcMismatch):
            decode_command(bytes(wire))

    def test_range_overflow(self):
        with pytest.raises(RangeOverflow):
            encode_command(CommandFrame(1, 1, 40000, 1))
        with pytest.raises(RangeOverflow):
            encode_command(CommandFrame(300, 1, 0, 1))

    def test_wrong_length_rejected(self):
        with pytest.raises(ValueError):
            decode_command(bytes(7))


class TestStatusCodec:
    def test_payloads_are_eight_bytes(self):
        frame_a, frame_b = encode_status(StatusFrame(1, 2, 3, 4, 5))
        # one id header byte plus the 8-byte CAN payload
        assert len(frame_a) == 9 and len(frame_b) == 9
        assert frame_a[0] == 1 and frame_b[0] == 1

    def test_roundtrip(self):
        frame = StatusFrame(9, 65535, -2**31, -32768, 32767)
        assert decode_status(*encode_status(frame)) == frame

    def test_pair_mismatch_rejected(self):
        a1, _ = encode_status(StatusFrame(1, 5, 100, 0, 0))
        _, b2 = encode_status(StatusFrame(1, 6, 100, 0, 0))
        with pytest.raises(ValueError):
            decode_status(a1, b2)

    def test_velocity_overflow(self):
        with pytest.raises(RangeOverflow):
            encode_status(StatusFrame(1, 1, 0, 100000, 0))

    def test_clamp_i16_saturates(self):
        assert clamp_i16(1e9) == 32767
        assert clamp_i16(-1e9) == -32768
        assert clamp_i16(123.4) == 123


class TestRandomizedRoundtrip:
    def test_ten_thousand_command_frames(self):
        rng = random.Random(99)
        for _ in range(10_000):
            frame = CommandFrame(
                module_id=rng.randrange(256),
                sequence=rng.randrange(65536),
                current_setpoint_ma=rng.randrange(-32768, 32768),
                flags=rng.randrange(256),
            )
            assert decode_command(encode_command(frame)) == frame

    def test_ten_thousand_status_frames(self):
        rng = random.Random(100)
        for _ in range(10_000):
            frame = StatusFrame(
                module_id=rng.randrange(256),
                sequence=rng.randrange(65536),
                position_counts=rng.randrange(-2**31, 2**31),
                velocity_fixed=rng.randrange(-32768, 32768),
                current_ma=rng.randrange(-32768, 32768),
            )
            assert decode_status(*encode_status(frame)) == frame

    def test_every_single_bit_flip_is_detected(self):
        rng = random.Random(7)
        for _ in range(100):
            frame = CommandFrame(
                module_id=rng.randrange(256),
                sequence=rng.randrange(65536),
                current_setpoint_ma=rng.randrange(-32768, 32768),
                flags=rng.randrange(256),
            )
            wire = encode_command(frame)
            for bit in range(len(wire) * 8):
                corrupted = bytearray(wire)
                corrupted[bit // 8] ^= 1 << (bit % 8)
                with pytest.raises(CrcMismatch):
                    decode_command(bytes(corrupted))

    def test_status_bit_flips_detected_including_id_header(self):
        rng = random.Random(8)
        for _ in range(25):
            frame = StatusFrame(
                module_id=rng.randrange(256),
                sequence=rng.randrange(65536),
                position_counts=rng.randrange(-2**31, 2**31),
                velocity_fixed=rng.randrange(-32768, 32768),
                current_ma=rng.randrange(-32768, 32768),
            )
            frame_a, frame_b = encode_status(frame)
            for bit in range(len(frame_a) * 8):
                corrupted = bytearray(frame_a)
                corrupted[bit // 8] ^= 1 << (bit % 8)
                with pytest.raises(CrcMismatch):
                    decode_status(bytes(corrupted), frame_b)


class TestTransport:
    def test_zero_latency_same_tick(self):
        queue = TransportQueue(latency_ticks=0)
        queue.push(b"x", 5)
        assert queue.pop(5) == [b"x"]

    def test_unit_latency(self):
        queue = TransportQueue(latency_ticks=1)
        queue.push(b"a", 5)
        assert queue.pop(5) == []
        assert queue.pop(6) == [b"a"]

    def test_in_order_delivery(self):
        queue = TransportQueue(latency_ticks=2)
        for k in range(10):
            queue.push(k.to_bytes(1, "little"), k)
        seen = []
        for k in range(14):
            seen += [b[0] for b in queue.pop(k)]
        assert seen == list(range(10))
        assert all(b > a for a, b in zip(seen, seen[1:]))

    def test_rejects_negative_latency(self):
        with pytest.raises(ValueError):
            TransportQueue(latency_ticks=-1)

    @pytest.mark.parametrize("latency", [0, 1, 3, 7])
    def test_cross_correlation_peaks_at_latency(self, latency):
        # push a pseudo-random command stream; the delivered (effective)
        # stream must lag by exactly the configured tick count
        rng = np.random.default_rng(5)
        commands = rng.normal(size=400)
        queue = TransportQueue(latency_ticks=latency)
        effective = np.zeros_like(commands)
        last = 0.0
        for k, value in enumerate(commands):
            queue.push(str(float(value)).encode(), k)
            for payload in queue.pop(k):
                last = float(payload.decode())
            effective[k] = last
        lags = range(0, 12)
        scores = [
            float(np.dot(commands[: len(commands) - lag], effective[lag:]))
            for lag in lags
        ]
        assert int(np.argmax(scores)) == latency
