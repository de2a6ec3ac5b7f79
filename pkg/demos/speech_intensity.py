"""Loudness and sentiment for a small synthetic cohort.

Each speaker reads one sentence. We trim the first five seconds, measure
frame loudness in dB, classify the mean, score the transcript, and then
check whether positivity tracks loudness across the group.
"""
import numpy as np

from voxlate import AudioClip, analyze_session, cohort_summary
from voxlate.audio import SpeakerRecord
from voxlate.sentiment import Transcript

SENTENCES = [
    "Hello, how are you?",
    "Hi, good to see you.",
    "You know I am finally feeling happy.",
    "It feels great to talk to you after such a long time.",
    "oh my god, look at you.",
]

rng = np.random.default_rng(0)
sr = 16000
analyses = []
# speakers who sound happier talk a little louder
LOUDNESS = [0.004, 0.02, 0.08, 0.06, 0.01]
for i in range(10):
    sid = i % 5
    level = LOUDNESS[sid] * rng.uniform(0.8, 1.2)
    t = np.arange(8 * sr) / sr
    voice = level * np.sin(2 * np.pi * rng.uniform(110, 220) * t) * (1 + 0.3 * rng.normal(size=t.size))
    rec = SpeakerRecord(f"spk{i:02d}", f"spk{i:02d}.wav", speaker_gender="female" if i % 2 else "male",
                        sentence_id=sid + 1)
    a = analyze_session(rec, AudioClip(voice, sr), Transcript(rec.clip_id, SENTENCES[sid]))
    analyses.append(a)
    print(f"{rec.clip_id}  {a.intensity.mean_db:6.2f} dB  {a.intensity_class.name:<14}"
          f"compound {a.sentiment.compound:+.4f}  {a.sentiment_class.name}")

summary = cohort_summary(analyses)
print("\nclass counts:", {c.name: n for c, n in summary.per_class_counts.items()})
print("mean dB by gender:", {k: round(v, 2) for k, v in summary.group_means.items()})
print(f"Pearson r (positive share vs loudness): {summary.pearson_r:.3f}")
