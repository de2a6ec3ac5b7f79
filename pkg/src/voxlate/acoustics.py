"""Spectrograms, decibel intensity profiles and loudness classes."""
import enum
import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import get_window

from .errors import InvalidParams

EPS = 1e-10
FLOOR_DB = -100.0
DEFAULT_P_REF = 1e-4


class IntensityClass(enum.IntEnum):
    """Vocal loudness bands, ordered from quietest to loudest."""

    whisper = 0
    low_voice = 1
    normal_speech = 2
    excited = 3


@dataclass
class Spectrogram:
    magnitudes: np.ndarray  # [n_bins, n_frames]
    frame_size: int
    hop: int
    sample_rate: int
    window: str = "hann"

    @property
    def n_bins(self):
        return self.magnitudes.shape[0]

    @property
    def n_frames(self):
        return self.magnitudes.shape[1]

    def frequencies(self):
        return np.fft.rfftfreq(self.frame_size, 1.0 / self.sample_rate)


@dataclass
class IntensityProfile:
    frame_db: np.ndarray
    mean_db: float
    p_ref: float

    def to_csv_rows(self):
        return [(i, float(v)) for i, v in enumerate(self.frame_db)]

    def to_json(self):
        return json.dumps({"p_ref": self.p_ref, "mean_db": self.mean_db,
                           "frame_db": [float(v) for v in self.frame_db]})


def _check_frame(frame_size, hop):
    if frame_size <= 0 or hop <= 0:
        raise InvalidParams("frame_size and hop must be positive")
    if frame_size & (frame_size - 1):
        raise InvalidParams(f"frame_size must be a power of two, got {frame_size}")
    if hop > frame_size:
        raise InvalidParams("hop must not exceed frame_size")


def frame_signal(samples, frame_size, hop):
    """Frames starting every ``hop`` samples, zero-padded past the end.

    Returns ``(frames, valid)`` where ``frames`` is ``[n_frames, frame_size]``
    with ``n_frames = ceil(len / hop)`` and ``valid`` counts real samples per frame.
    """
    samples = np.asarray(samples, dtype=np.float64)
    n = len(samples)
    if n < 1:
        raise InvalidParams("clip must contain at least one sample")
    n_frames = -(-n // hop)
    padded = np.zeros((n_frames - 1) * hop + frame_size)
    padded[:n] = samples
    frames = np.lib.stride_tricks.sliding_window_view(padded, frame_size)[::hop][:n_frames]
    starts = np.arange(n_frames) * hop
    valid = np.minimum(frame_size, n - starts)
    return frames, valid


def stft(clip, frame_size=2048, hop=512):
    """Magnitude STFT with a periodic Hann window; frames are not centered."""
    _check_frame(frame_size, hop)
    frames, _ = frame_signal(clip.samples, frame_size, hop)
    win = get_window("hann", frame_size)
    mags = np.abs(np.fft.rfft(frames * win, axis=1)).T
    return Spectrogram(mags, frame_size, hop, clip.sample_rate)


def amplitude_to_db(amplitude, p_ref=DEFAULT_P_REF):
    """``20 log10(amplitude / p_ref)`` with a 1e-10 amplitude guard and a -100 dB floor.

    Works elementwise on arrays.
    """
    if not p_ref > 0:
        raise InvalidParams("p_ref must be positive")
    a = np.maximum(np.asarray(amplitude, dtype=np.float64), EPS)
    db = np.maximum(20.0 * np.log10(a / p_ref), FLOOR_DB)
    return float(db) if db.ndim == 0 else db


def intensity_profile(clip, frame_size=2048, hop=512, p_ref=DEFAULT_P_REF):
    """Per-frame RMS level in dB over the same framing as :func:`stft`.

    RMS is taken over the real samples of each frame, so the zero padding of
    the final frames does not pull their level down.
    """
    _check_frame(frame_size, hop)
    frames, valid = frame_signal(clip.samples, frame_size, hop)
    rms = np.sqrt((frames * frames).sum(axis=1) / valid)
    frame_db = amplitude_to_db(rms, p_ref)
    frame_db = np.atleast_1d(frame_db)
    return IntensityProfile(frame_db, float(frame_db.mean()), p_ref)


def classify_intensity(mean_db):
    if not math.isfinite(mean_db):
        raise InvalidParams("mean_db must be finite")
    if mean_db < 20:
        return IntensityClass.whisper
    if mean_db < 40:
        return IntensityClass.low_voice
    if mean_db <= 70:
        return IntensityClass.normal_speech
    return IntensityClass.excited


# ---------------------------------------------------------------------------
# mel scale (Slaney: linear below 1 kHz, logarithmic above)

_F_SP = 200.0 / 3
_MIN_LOG_HZ = 1000.0
_MIN_LOG_MEL = _MIN_LOG_HZ / _F_SP
_LOGSTEP = math.log(6.4) / 27.0


def hz_to_mel(f):
    f = np.asarray(f, dtype=np.float64)
    return np.where(f >= _MIN_LOG_HZ, _MIN_LOG_MEL + np.log(np.maximum(f, 1e-12) / _MIN_LOG_HZ) / _LOGSTEP, f / _F_SP)


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    return np.where(m >= _MIN_LOG_MEL, _MIN_LOG_HZ * np.exp(_LOGSTEP * (m - _MIN_LOG_MEL)), _F_SP * m)


def mel_filterbank(sample_rate, frame_size, n_mels=128, fmin=0.0, fmax=None, normalize=True):
    """Triangular filters ``[n_mels, frame_size // 2 + 1]``.

    With ``normalize`` each triangle is scaled to unit area over its band
    (height ``2 / bandwidth``); otherwise each peaks at 1.
    """
    fmax = sample_rate / 2 if fmax is None else fmax
    if not 0 <= fmin < fmax <= sample_rate / 2:
        raise InvalidParams("need 0 <= fmin < fmax <= sample_rate / 2")
    freqs = np.fft.rfftfreq(frame_size, 1.0 / sample_rate)
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    widths = np.diff(edges)
    ramps = edges[:, None] - freqs[None, :]
    lower = -ramps[:-2] / widths[:-1, None]
    upper = ramps[2:] / widths[1:, None]
    fb = np.maximum(0, np.minimum(lower, upper))
    if normalize:
        fb *= (2.0 / (edges[2:] - edges[:-2]))[:, None]
    return fb


def mel_spectrogram(spec, n_mels=128, fmin=0.0, fmax=None, normalize=True):
    """Mel-band power ``[n_mels, n_frames]`` from a magnitude spectrogram."""
    fb = mel_filterbank(spec.sample_rate, spec.frame_size, n_mels, fmin, fmax, normalize)
    return fb @ (spec.magnitudes ** 2)
