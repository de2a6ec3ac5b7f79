"""Joins loudness and sentiment per clip and summarises cohorts."""
import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .acoustics import DEFAULT_P_REF, IntensityClass, classify_intensity, intensity_profile
from .audio import trim_prefix
from .errors import EmptyCohort, InvalidParams, LengthMismatch, VoxlateError, ZeroVariance
from .sentiment import SentimentClass, SentimentConfig, classify_sentiment, polarity_scores

CONVERSATION_CEILING_DB = 90.0


@dataclass
class AnalysisConfig:
    trim_seconds: float = 5.0
    frame_size: int = 2048
    hop: int = 512
    p_ref: float = DEFAULT_P_REF
    sentiment: SentimentConfig = field(default_factory=SentimentConfig)


@dataclass
class SessionAnalysis:
    record: object
    intensity: object
    intensity_class: IntensityClass
    sentiment: object
    sentiment_class: SentimentClass

    def as_dict(self):
        r = self.record
        return {
            "clip_id": r.clip_id,
            "gender": r.speaker_gender,
            "sentence_id": r.sentence_id,
            "mean_db": self.intensity.mean_db,
            "p_ref": self.intensity.p_ref,
            "n_frames": len(self.intensity.frame_db),
            "intensity_class": self.intensity_class.name,
            "sentiment": self.sentiment.as_dict(),
            "sentiment_class": self.sentiment_class.name,
        }


@dataclass
class CohortSummary:
    n: int
    per_class_counts: dict
    group_means: dict
    pearson_r: float = None
    pairs: list = field(default_factory=list)  # (clip_id, pos_pct, intensity_pct)


def analyze_session(record, clip, transcript, config=None, lexicon=None):
    """Trim, measure loudness, score the transcript and package both."""
    config = config or AnalysisConfig()
    try:
        clip = trim_prefix(clip, config.trim_seconds)
        profile = intensity_profile(clip, config.frame_size, config.hop, config.p_ref)
        score = polarity_scores(transcript.text, lexicon, config.sentiment)
    except VoxlateError as exc:
        raise type(exc)(f"{record.clip_id}: {exc}") from exc
    return SessionAnalysis(record, profile, classify_intensity(profile.mean_db),
                           score, classify_sentiment(score.compound))


def pearson_correlation(xs, ys):
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"series lengths differ: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise LengthMismatch("need at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("a series has zero variance")
    return max(-1.0, min(1.0, float(dx @ dy) / math.sqrt(sxx * syy)))


def normalize_for_comparison(analysis):
    """Positive share and loudness (relative to 90 dB) both as percentages."""
    pos_pct = analysis.sentiment.pos * 100.0
    intensity_pct = min(max(analysis.intensity.mean_db / CONVERSATION_CEILING_DB, 0.0), 1.0) * 100.0
    return pos_pct, intensity_pct


def _group_key(record, group_by):
    if group_by == "gender":
        return record.speaker_gender
    if group_by == "sentence_id":
        return record.sentence_id
    raise InvalidParams(f"group_by must be 'gender' or 'sentence_id', got {group_by!r}")


def cohort_summary(analyses, group_by="gender"):
    """Sentiment-class histogram, mean dB per group and a positive-only correlation.

    ``pearson_r`` is computed over (pos %, intensity %) for clips with some
    positive sentiment; it is ``None`` when fewer than two such clips exist or
    either series is constant.
    """
    if not analyses:
        raise EmptyCohort("no analyses to summarise")
    counts = Counter(a.sentiment_class for a in analyses)
    per_class = {c: counts.get(c, 0) for c in SentimentClass}
    groups = {}
    for a in analyses:
        groups.setdefault(_group_key(a.record, group_by), []).append(a.intensity.mean_db)
    group_means = {k: float(np.mean(v)) for k, v in sorted(groups.items(), key=lambda kv: str(kv[0]))}
    pairs = sorted((a.record.clip_id, *normalize_for_comparison(a)) for a in analyses if a.sentiment.pos > 0)
    r = None
    if len(pairs) >= 2:
        try:
            r = pearson_correlation([p[1] for p in pairs], [p[2] for p in pairs])
        except ZeroVariance:
            r = None
    return CohortSummary(len(analyses), per_class, group_means, r, pairs)
