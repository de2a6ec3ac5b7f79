"""WAV decoding, analysis windows and the session manifest."""
import csv
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (CorruptHeader, DuplicateClipId, FileMissing, InvalidParams,
                     MalformedRow, UnsupportedEncoding)

FORMAT_PCM = 1
FORMAT_FLOAT = 3
FORMAT_EXTENSIBLE = 0xFFFE

GENDERS = ("female", "male", "unspecified")
MANIFEST_COLUMNS = ("clip_id", "audio_path", "transcript_path", "gender", "sentence_id")


@dataclass
class AudioClip:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise InvalidParams(f"sample_rate must be positive, got {self.sample_rate}")
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def duration(self):
        return len(self.samples) / self.sample_rate

    def __len__(self):
        return len(self.samples)


@dataclass
class SpeakerRecord:
    clip_id: str
    audio_path: str
    transcript_path: str = None
    speaker_gender: str = "unspecified"
    sentence_id: int = None


def _decode_pcm24(raw):
    b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
    v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
    return np.where(v >= 1 << 23, v - (1 << 24), v)


def load_wav(path):
    """Decode a RIFF/WAVE file (PCM 16/24-bit or float32, mono or stereo) to mono."""
    path = Path(path)
    if not path.exists():
        raise FileMissing(str(path))
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader(f"{path}: not a RIFF/WAVE file")
    fmt = None
    pcm = None
    off = 12
    while off + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, off)
        body = data[off + 8:off + 8 + size]
        if len(body) < size:
            raise CorruptHeader(f"{path}: chunk {cid!r} claims {size} bytes, {len(body)} present")
        if cid == b"fmt ":
            if size < 16:
                raise CorruptHeader(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body)
            if fmt[0] == FORMAT_EXTENSIBLE and size >= 26:
                # the real format code sits at the start of the sub-format GUID
                fmt = (struct.unpack_from("<H", body, 24)[0],) + fmt[1:]
        elif cid == b"data":
            pcm = body
        off += 8 + size + (size & 1)
    if fmt is None or pcm is None:
        raise CorruptHeader(f"{path}: missing fmt or data chunk")

    code, channels, rate, _, block_align, bits = fmt
    if channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: {channels} channels")
    if (code, bits) == (FORMAT_PCM, 16):
        x = np.frombuffer(pcm[:len(pcm) - len(pcm) % 2], dtype="<i2") / 32768.0
    elif (code, bits) == (FORMAT_PCM, 24):
        x = _decode_pcm24(pcm[:len(pcm) - len(pcm) % 3]) / float(1 << 23)
    elif (code, bits) == (FORMAT_FLOAT, 32):
        x = np.frombuffer(pcm[:len(pcm) - len(pcm) % 4], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedEncoding(f"{path}: format code {code}, {bits} bits")
    if block_align != channels * bits // 8 or rate == 0:
        raise CorruptHeader(f"{path}: inconsistent block alignment or sample rate")
    if len(x) % channels:
        raise CorruptHeader(f"{path}: data length is not a whole number of frames")
    if channels == 2:
        x = x.reshape(-1, 2).mean(axis=1)
    if not np.all(np.isfinite(x)):
        raise CorruptHeader(f"{path}: non-finite samples")
    return AudioClip(np.ascontiguousarray(x), rate)


def trim_prefix(clip, seconds=5.0):
    """First ``seconds`` of ``clip``; shorter clips come back whole."""
    if seconds <= 0:
        raise InvalidParams("seconds must be positive")
    n = int(round(seconds * clip.sample_rate))
    return AudioClip(clip.samples[:n].copy(), clip.sample_rate)


def load_manifest(path):
    """Read the session manifest CSV into :class:`SpeakerRecord` objects."""
    path = Path(path)
    if not path.exists():
        raise FileMissing(str(path))
    records = []
    seen = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return records
        if tuple(h.strip() for h in header) != MANIFEST_COLUMNS:
            raise MalformedRow(f"{path}: header must be {','.join(MANIFEST_COLUMNS)}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(MANIFEST_COLUMNS):
                raise MalformedRow(f"{path}:{lineno}: expected {len(MANIFEST_COLUMNS)} columns, got {len(row)}")
            clip_id, audio, transcript, gender, sentence = (c.strip() for c in row)
            if not clip_id or not audio:
                raise MalformedRow(f"{path}:{lineno}: clip_id and audio_path are required")
            gender = gender or "unspecified"
            if gender not in GENDERS:
                raise MalformedRow(f"{path}:{lineno}: gender {gender!r} not in {GENDERS}")
            sid = None
            if sentence:
                try:
                    sid = int(sentence)
                except ValueError:
                    raise MalformedRow(f"{path}:{lineno}: sentence_id {sentence!r} is not an integer") from None
                if not 1 <= sid <= 5:
                    raise MalformedRow(f"{path}:{lineno}: sentence_id {sid} outside 1..5")
            if clip_id in seen:
                raise DuplicateClipId(f"{path}:{lineno}: clip_id {clip_id!r} repeated")
            seen.add(clip_id)
            records.append(SpeakerRecord(clip_id, audio, transcript or None, gender, sid))
    return records


def resolve(path, base_dir):
    """``path`` relative to ``base_dir`` unless it is absolute."""
    p = Path(path)
    return p if p.is_absolute() or base_dir is None else Path(base_dir) / p
