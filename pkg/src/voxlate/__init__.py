"""Speech loudness/sentiment analysis and GRU English-French translation in numpy."""

__version__ = "0.1.0"

from .acoustics import (IntensityClass, amplitude_to_db, classify_intensity, intensity_profile,
                        mel_spectrogram, stft)
from .audio import AudioClip, SpeakerRecord, load_manifest, load_wav, trim_prefix
from .behavior import analyze_session, cohort_summary, normalize_for_comparison, pearson_correlation
from .corpus import (build_dataset, corpus_stats, fit_tokenizer, generate_synthetic, load_parallel, pad,
                     preprocess, split, subset_corpus, tokenize)
from .evaluation import BleuConfig, compare_models, evaluate_model, sentence_bleu
from .models import (ModelSpec, TrainConfig, accuracy, build_model, load_checkpoint, logits_to_text,
                     save_checkpoint, train)
from .neural import param_count
from .sentiment import (SentimentClass, classify_sentiment, default_lexicon, get_transcript, load_lexicon,
                        polarity_scores)

__all__ = [
    "IntensityClass", "amplitude_to_db", "classify_intensity", "intensity_profile", "mel_spectrogram", "stft",
    "AudioClip", "SpeakerRecord", "load_manifest", "load_wav", "trim_prefix",
    "analyze_session", "cohort_summary", "normalize_for_comparison", "pearson_correlation",
    "build_dataset", "corpus_stats", "fit_tokenizer", "generate_synthetic", "load_parallel", "pad",
    "preprocess", "split", "subset_corpus", "tokenize",
    "BleuConfig", "compare_models", "evaluate_model", "sentence_bleu",
    "ModelSpec", "TrainConfig", "accuracy", "build_model", "load_checkpoint", "logits_to_text",
    "save_checkpoint", "train", "param_count",
    "SentimentClass", "classify_sentiment", "default_lexicon", "get_transcript", "load_lexicon",
    "polarity_scores",
]
