"""Lexicon-and-rules polarity scoring in the VADER style, plus transcripts.

The bundled lexicon is the published VADER word list (MIT licence, see
``data/VADER_LICENSE.txt``). Scoring rules and constants follow the reference
algorithm: capitalisation emphasis, degree adverbs, negation, contrastive
"but", and exclamation/question emphasis.
"""
import enum
import logging
import math
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import EmptyLexicon, FileMissing, OutOfRange, TranscriptMissing

log = logging.getLogger(__name__)

B_INCR = 0.293
B_DECR = -0.293

DEFAULT_NEGATIONS = frozenset("""
aint arent cannot cant couldnt darent didnt doesnt ain't aren't can't couldn't daren't didn't
doesn't dont hadnt hasnt havent isnt mightnt mustnt neither don't hadn't hasn't haven't isn't
mightn't mustn't neednt needn't never none nope nor not nothing nowhere oughtnt shant shouldnt
uhuh wasnt werent oughtn't shan't shouldn't uh-uh wasn't weren't without wont wouldnt won't
wouldn't rarely seldom despite
""".split())

_BOOST_UP = """
absolutely amazingly awfully completely considerable considerably decidedly deeply effing enormous
enormously entirely especially exceptional exceptionally extreme extremely fabulously flipping
flippin frackin fracking fricking frickin frigging friggin fully fuckin fucking fuggin fugging
greatly hella highly hugely incredible incredibly intensely major majorly more most particularly
purely quite really remarkably so substantially thoroughly total totally tremendous tremendously
uber unbelievably unusually utter utterly very
""".split()
_BOOST_DOWN = """
almost barely hardly kinda kindof kind-of less little marginal marginally occasional occasionally
partly scarce scarcely slight slightly somewhat sorta sortof sort-of
""".split()
DEFAULT_BOOSTERS = {**{w: B_INCR for w in _BOOST_UP}, **{w: B_DECR for w in _BOOST_DOWN}}


@dataclass(frozen=True)
class SentimentConfig:
    alpha: float = 15.0
    caps_increment: float = 0.733
    negation_scalar: float = -0.74
    exclamation_increment: float = 0.292
    max_exclamations: int = 4
    question_increment: float = 0.18
    question_cap: float = 0.96
    but_before: float = 0.5
    but_after: float = 1.5
    distance_scale: tuple = (1.0, 0.95, 0.9)


@dataclass
class Lexicon:
    entries: dict
    boosters: dict = field(default_factory=lambda: dict(DEFAULT_BOOSTERS))
    negations: frozenset = DEFAULT_NEGATIONS
    skipped: int = 0
    duplicates: int = 0


class SentimentClass(enum.IntEnum):
    very_negative = 0
    negative = 1
    neutral = 2
    positive = 3
    very_positive = 4

    def mirror(self):
        return SentimentClass(4 - self.value)


@dataclass
class SentimentScore:
    neg: float
    neu: float
    pos: float
    compound: float
    alpha: float = 15.0

    def as_dict(self):
        return {"neg": self.neg, "neu": self.neu, "pos": self.pos, "compound": self.compound}


def _read_word_list(path):
    return [w.strip().lower() for w in Path(path).read_text(encoding="utf-8").splitlines() if w.strip()]


def load_lexicon(path, boosters_path=None, negations_path=None):
    """Parse a VADER-format TSV (token, mean, stddev, ratings).

    Malformed lines are skipped and counted in ``Lexicon.skipped``; repeated
    tokens keep the last row and are counted in ``Lexicon.duplicates``.
    """
    path = Path(path)
    if not path.exists():
        raise FileMissing(str(path))
    entries = {}
    skipped = duplicates = 0
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) < 2:
            skipped += 1
            continue
        try:
            value = float(parts[1])
        except ValueError:
            skipped += 1
            continue
        if not math.isfinite(value) or not parts[0].strip():
            skipped += 1
            continue
        token = parts[0].strip().lower()
        if token in entries:
            duplicates += 1
        entries[token] = value
    if not entries:
        raise EmptyLexicon(f"{path}: no valid lexicon rows")
    if skipped:
        log.warning("%s: skipped %d malformed lexicon lines", path, skipped)
    lex = Lexicon(entries, skipped=skipped, duplicates=duplicates)
    if boosters_path is not None:
        # one token per line; a leading "-" marks a dampener
        boosters = {}
        for w in _read_word_list(boosters_path):
            boosters[w.lstrip("-")] = B_DECR if w.startswith("-") else B_INCR
        lex.boosters = boosters
    if negations_path is not None:
        lex.negations = frozenset(_read_word_list(negations_path))
    return lex


_default = None


def default_lexicon():
    """The bundled VADER lexicon, loaded once."""
    global _default
    if _default is None:
        ref = resources.files("voxlate") / "data" / "vader_lexicon.txt"
        with resources.as_file(ref) as p:
            _default = load_lexicon(p)
    return _default


# ---------------------------------------------------------------------------
# scoring


def _strip_punct(token):
    stripped = token.strip(string.punctuation)
    # keep short tokens whole so emoticons like ":)" survive
    return token if len(stripped) <= 2 else stripped


def _is_negated(word, lex):
    w = word.lower()
    return w in lex.negations or "n't" in w


def _booster_value(word, valence, cap_differential, lex, cfg):
    w = word.lower()
    scalar = lex.boosters.get(w, 0.0)
    if scalar:
        if valence < 0:
            scalar = -scalar
        if word.isupper() and cap_differential:
            scalar += cfg.caps_increment if valence > 0 else -cfg.caps_increment
    return scalar


def _word_valence(i, words, lower, lex, cfg, cap_differential):
    word = words[i]
    w = lower[i]
    if w in lex.boosters:
        return 0.0
    if w == "kind" and i + 1 < len(words) and lower[i + 1] == "of":
        return 0.0
    if w not in lex.entries:
        return 0.0
    valence = lex.entries[w]
    if w == "no" and i + 1 < len(words) and lower[i + 1] in lex.entries:
        # "no" before another lexicon word acts as a negator, not a sentiment word
        valence = 0.0
    if (i > 0 and lower[i - 1] == "no") or (i > 1 and lower[i - 2] == "no") or (
            i > 2 and lower[i - 3] == "no" and lower[i - 1] in ("or", "nor")):
        valence = lex.entries[w] * cfg.negation_scalar
    if word.isupper() and cap_differential:
        valence += cfg.caps_increment if valence > 0 else -cfg.caps_increment

    for back in range(3):
        j = i - back - 1
        if j < 0:
            break
        if lower[j] in lex.entries:
            continue
        s = _booster_value(words[j], valence, cap_differential, lex, cfg)
        valence += s * cfg.distance_scale[back]
        valence = _apply_negation(valence, lower, i, back, lex, cfg)
        if back == 2:
            valence = _special_idioms(valence, lower, i)

    return _least_check(valence, lower, i, lex, cfg)


def _apply_negation(valence, lower, i, back, lex, cfg):
    if back == 0:
        if _is_negated(lower[i - 1], lex):
            valence *= cfg.negation_scalar
    elif back == 1:
        if lower[i - 2] == "never" and lower[i - 1] in ("so", "this"):
            valence *= 1.25
        elif lower[i - 2] == "without" and lower[i - 1] == "doubt":
            pass
        elif _is_negated(lower[i - 2], lex):
            valence *= cfg.negation_scalar
    else:
        # the reference groups this as (never and so/this two back) or (so/this one back);
        # kept for score parity
        if (lower[i - 3] == "never" and lower[i - 2] in ("so", "this")) or lower[i - 1] in ("so", "this"):
            valence *= 1.25
        elif lower[i - 3] == "without" and "doubt" in (lower[i - 2], lower[i - 1]):
            pass
        elif _is_negated(lower[i - 3], lex):
            valence *= cfg.negation_scalar
    return valence


def _special_idioms(valence, lower, i):
    # two-word degree phrases preceding the word act as dampeners
    for phrase in (" ".join(lower[i - 3:i - 1]), " ".join(lower[i - 2:i])):
        if phrase in ("kind of", "sort of", "just enough"):
            valence += B_DECR
    return valence


def _least_check(valence, lower, i, lex, cfg):
    if i > 1 and lower[i - 1] not in lex.entries and lower[i - 1] == "least":
        if lower[i - 2] not in ("at", "very"):
            valence *= cfg.negation_scalar
    elif i > 0 and lower[i - 1] not in lex.entries and lower[i - 1] == "least":
        valence *= cfg.negation_scalar
    return valence


def _but_check(lower, sentiments, cfg):
    if "but" not in lower:
        return sentiments
    k = lower.index("but")
    out = []
    for j, s in enumerate(sentiments):
        if j < k:
            out.append(s * cfg.but_before)
        elif j > k:
            out.append(s * cfg.but_after)
        else:
            out.append(s)
    return out


def _punctuation_emphasis(text, cfg):
    ep = min(text.count("!"), cfg.max_exclamations) * cfg.exclamation_increment
    qm = text.count("?")
    qm_amp = 0.0
    if qm > 1:
        qm_amp = qm * cfg.question_increment if qm <= 3 else cfg.question_cap
    return ep + qm_amp


def normalize(score, alpha=15.0):
    """Squash a valence sum into (-1, 1) via ``s / sqrt(s^2 + alpha)``."""
    value = score / math.sqrt(score * score + alpha)
    return max(-1.0, min(1.0, value))


def polarity_scores(text, lexicon=None, config=SentimentConfig()):
    """Score ``text`` into neg/neu/pos proportions and a compound value."""
    lex = lexicon or default_lexicon()
    words = [_strip_punct(t) for t in text.split()]
    if not words:
        return SentimentScore(0.0, 0.0, 0.0, 0.0, config.alpha)
    lower = [w.lower() for w in words]
    n_caps = sum(w.isupper() for w in words)
    cap_differential = 0 < len(words) - n_caps < len(words)

    sentiments = [_word_valence(i, words, lower, lex, config, cap_differential) for i in range(len(words))]
    sentiments = _but_check(lower, sentiments, config)

    total = math.fsum(sentiments)
    compound = 0.0
    punct = _punctuation_emphasis(text, config)
    if total:
        total += punct if total > 0 else -punct
        compound = normalize(total, config.alpha)

    pos_sum = math.fsum(s + 1 for s in sentiments if s > 0)
    neg_sum = math.fsum(s - 1 for s in sentiments if s < 0)
    neu_count = sum(1 for s in sentiments if s == 0)
    if pos_sum > abs(neg_sum):
        pos_sum += punct
    elif pos_sum < abs(neg_sum):
        neg_sum -= punct
    denom = pos_sum + abs(neg_sum) + neu_count
    return SentimentScore(abs(neg_sum) / denom, neu_count / denom, pos_sum / denom, compound, config.alpha)


def classify_sentiment(compound):
    if not -1.0 <= compound <= 1.0:
        raise OutOfRange(f"compound must lie in [-1, 1], got {compound}")
    if compound >= 0.5:
        return SentimentClass.very_positive
    if compound >= 0.05:
        return SentimentClass.positive
    if compound > -0.05:
        return SentimentClass.neutral
    if compound > -0.5:
        return SentimentClass.negative
    return SentimentClass.very_negative


# ---------------------------------------------------------------------------
# transcripts


@dataclass
class Transcript:
    clip_id: str
    text: str


class FileTranscriptProvider:
    """Reads the sidecar text file named by a record's ``transcript_path``."""

    def __init__(self, base_dir=None):
        self.base_dir = base_dir

    def __call__(self, record):
        if not record.transcript_path:
            raise TranscriptMissing(f"{record.clip_id}: no transcript path")
        path = Path(record.transcript_path)
        if self.base_dir is not None and not path.is_absolute():
            path = Path(self.base_dir) / path
        if not path.exists():
            raise TranscriptMissing(f"{record.clip_id}: {path} not found")
        return Transcript(record.clip_id, path.read_text(encoding="utf-8").rstrip())


class ChainProvider:
    """Tries providers in order and returns the first transcript found."""

    def __init__(self, *providers):
        self.providers = providers

    def __call__(self, record):
        for provider in self.providers:
            try:
                return provider(record)
            except TranscriptMissing:
                continue
        raise TranscriptMissing(f"{record.clip_id}: no provider had a transcript")


def get_transcript(record, provider=None):
    return (provider or FileTranscriptProvider())(record)
