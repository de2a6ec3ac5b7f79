import sys
import struct
import wave

import numpy as np
import pytest


def write_wav_int16(path, samples, rate, channels=1):
    """Independent writer: stdlib ``wave`` module with 2**15 full-scale."""
    ints = np.clip(np.round(np.asarray(samples) * 32768), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(ints.tobytes())
    return ints


def write_wav_raw(path, payload, rate, channels, bits, code):
    """Hand-assembled RIFF file for encodings ``wave`` cannot write."""
    block = channels * bits // 8
    fmt = struct.pack("<HHIIHH", code, channels, rate, rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt + b"data" + struct.pack("<I", len(payload)) + payload
    if len(payload) % 2:
        body += b"\0"
    with open(path, "wb") as fh:
        fh.write(b"RIFF" + struct.pack("<I", len(body)) + body)


@pytest.fixture
def wav_writer():
    return write_wav_int16


@pytest.fixture
def raw_wav_writer():
    return write_wav_raw


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
