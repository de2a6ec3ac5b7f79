"""Parallel corpora: loading, cleaning, vocabularies, padding and splits."""
import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (EmptyInput, FileMissing, InvalidParams, InvalidRatio,
                     LineCountMismatch, SequenceTooLong)

PUNCTUATION = ".,!?'\";:"
UNK_TOKEN = "<UNK>"
PAD_TOKEN = "<PAD>"
# the characters Keras' Tokenizer strips by default
KERAS_FILTERS = '!"#$%&()*+,-./:;<=>?@[\\]^_`{|}~\t\n'

_punct_re = re.compile("([" + re.escape(PUNCTUATION) + "])")


@dataclass
class ParallelCorpus:
    pairs: list = field(default_factory=list)

    def __len__(self):
        return len(self.pairs)

    @property
    def sources(self):
        return [s for s, _ in self.pairs]

    @property
    def targets(self):
        return [t for _, t in self.pairs]


@dataclass
class CorpusStats:
    sentence_pairs: int
    words_src: int
    words_tgt: int
    unique_src: int
    unique_tgt: int


def load_parallel(src_path, tgt_path):
    texts = []
    for path in (src_path, tgt_path):
        path = Path(path)
        if not path.exists():
            raise FileMissing(str(path))
        texts.append(path.read_text(encoding="utf-8").splitlines())
    src, tgt = texts
    if len(src) != len(tgt):
        raise LineCountMismatch(len(src), len(tgt))
    return ParallelCorpus(list(zip(src, tgt)))


def save_parallel(corpus, src_path, tgt_path):
    for path, side in ((src_path, corpus.sources), (tgt_path, corpus.targets)):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.writelines(line + "\n" for line in side)


def preprocess(text):
    """Lowercase and split punctuation marks off into their own tokens.

    >>> preprocess("New Jersey is quiet.")
    'new jersey is quiet .'
    """
    text = _punct_re.sub(r" \1 ", text.lower())
    return " ".join(text.split())


def _words(text, lower=True, filters=""):
    if lower:
        text = text.lower()
    if filters:
        text = text.translate(str.maketrans({c: " " for c in filters}))
    return text.split()


def corpus_stats(corpus, top_k=10):
    """Word counts after :func:`preprocess`; returns ``(stats, top_src, top_tgt)``.

    Top-k lists hold ``(word, count)`` ordered by count, ties by first occurrence.
    """
    counters = []
    totals = []
    for side in (corpus.sources, corpus.targets):
        c = Counter()
        for line in side:
            c.update(preprocess(line).split())
        counters.append(c)
        totals.append(sum(c.values()))
    stats = CorpusStats(len(corpus), totals[0], totals[1], len(counters[0]), len(counters[1]))
    # Counter preserves insertion order, and most_common is a stable sort
    return stats, counters[0].most_common(top_k), counters[1].most_common(top_k)


@dataclass
class Vocabulary:
    """Word <-> id maps with id 0 reserved for padding and UNK after the words."""

    word_to_id: dict
    counts: dict = field(default_factory=dict)
    lower: bool = True
    filters: str = ""

    def __post_init__(self):
        self.id_to_word = {i: w for w, i in self.word_to_id.items()}

    @property
    def n_words(self):
        return len(self.word_to_id)

    @property
    def unk_id(self):
        return self.n_words + 1

    @property
    def size(self):
        """Exclusive upper bound on ids: pad, the words, and UNK."""
        return self.n_words + 2

    def words(self, text):
        return _words(text, self.lower, self.filters)

    def lookup(self, word):
        return self.word_to_id.get(word, self.unk_id)

    def word(self, idx, verbose=False):
        idx = int(idx)
        if idx == 0:
            return PAD_TOKEN
        return self.id_to_word.get(idx, UNK_TOKEN)

    def to_json(self):
        return {
            "lower": self.lower,
            "filters": self.filters,
            "words": [[w, i, self.counts.get(w, 0)] for w, i in self.word_to_id.items()],
        }

    @classmethod
    def from_json(cls, obj):
        words = obj["words"]
        return cls({w: i for w, i, _ in words}, {w: c for w, _, c in words},
                   obj.get("lower", True), obj.get("filters", ""))

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), ensure_ascii=False, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_tokenizer(sentences, lower=True, filters=""):
    """Build a vocabulary with ids 1..V by descending frequency.

    Ties keep first-occurrence order. ``filters`` lists characters treated as
    separators, mirroring Keras' ``Tokenizer``; the default keeps punctuation
    tokens produced by :func:`preprocess`.
    """
    counts = Counter()
    for s in sentences:
        counts.update(_words(s, lower, filters))
    if not counts:
        raise EmptyInput("no tokens to fit a vocabulary on")
    ordered = counts.most_common()
    return Vocabulary({w: i for i, (w, _) in enumerate(ordered, start=1)}, dict(ordered), lower, filters)


def tokenize(sentences, vocab):
    return [[vocab.lookup(w) for w in vocab.words(s)] for s in sentences]


def detokenize(sequences, vocab):
    return [" ".join(vocab.id_to_word[i] for i in seq if i in vocab.id_to_word) for seq in sequences]


def pad(sequences, length, truncate=False):
    """Post-pad integer sequences with zeros to a ``[n, length]`` matrix."""
    out = np.zeros((len(sequences), length), dtype=np.int64)
    for row, seq in enumerate(sequences):
        if len(seq) > length:
            if not truncate:
                raise SequenceTooLong(f"sequence {row} has {len(seq)} tokens > {length}")
            seq = seq[:length]
        out[row, :len(seq)] = seq
    return out


@dataclass
class TokenizedDataset:
    source_ids: np.ndarray
    target_ids: np.ndarray
    source_vocab: Vocabulary
    target_vocab: Vocabulary

    def __post_init__(self):
        if self.source_ids.shape != self.target_ids.shape:
            raise InvalidParams(
                f"source {self.source_ids.shape} and target {self.target_ids.shape} must align")

    def __len__(self):
        return self.source_ids.shape[0]

    @property
    def pad_length(self):
        return self.source_ids.shape[1]

    def subset(self, index):
        return TokenizedDataset(self.source_ids[index], self.target_ids[index],
                                self.source_vocab, self.target_vocab)

    def to_csv(self, path):
        import csv

        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            T = self.pad_length
            w.writerow([f"src_{t}" for t in range(T)] + [f"tgt_{t}" for t in range(T)])
            for s, t in zip(self.source_ids, self.target_ids):
                w.writerow(list(map(int, s)) + list(map(int, t)))


def build_dataset(corpus, pad_length=None, source_vocab=None, target_vocab=None, truncate=False):
    """Preprocess, tokenize and pad both sides of ``corpus`` to a common length.

    Vocabularies are fitted on the corpus unless given. ``pad_length`` defaults
    to the longest sentence on either side.
    """
    src = [preprocess(s) for s in corpus.sources]
    tgt = [preprocess(t) for t in corpus.targets]
    source_vocab = source_vocab or fit_tokenizer(src)
    target_vocab = target_vocab or fit_tokenizer(tgt)
    src_seq = tokenize(src, source_vocab)
    tgt_seq = tokenize(tgt, target_vocab)
    if pad_length is None:
        pad_length = max(max(map(len, src_seq), default=0), max(map(len, tgt_seq), default=0))
    return TokenizedDataset(pad(src_seq, pad_length, truncate), pad(tgt_seq, pad_length, truncate),
                            source_vocab, target_vocab)


def split(dataset, ratio=0.8, seed=42):
    """Seeded shuffle then prefix split into ``floor(n * ratio)`` and the rest.

    Works on a :class:`TokenizedDataset`, a :class:`ParallelCorpus` or a list.
    """
    if not 0 < ratio < 1:
        raise InvalidRatio(f"ratio must be in (0, 1), got {ratio}")
    n = len(dataset)
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(n * ratio))
    parts = order[:n_train], order[n_train:]
    if isinstance(dataset, TokenizedDataset):
        return tuple(dataset.subset(p) for p in parts)
    items = dataset.pairs if isinstance(dataset, ParallelCorpus) else list(dataset)
    picked = [[items[i] for i in p] for p in parts]
    if isinstance(dataset, ParallelCorpus):
        return tuple(ParallelCorpus(p) for p in picked)
    return tuple(picked)


def subset_corpus(corpus, max_vocab_src, max_vocab_tgt, max_len):
    """Keep pairs fully covered by each side's top-k words and at most ``max_len`` tokens."""
    if min(max_vocab_src, max_vocab_tgt, max_len) <= 0:
        raise InvalidParams("limits must be positive")
    _, top_src, top_tgt = corpus_stats(corpus, top_k=None)
    keep_src = {w for w, _ in top_src[:max_vocab_src]}
    keep_tgt = {w for w, _ in top_tgt[:max_vocab_tgt]}
    kept = []
    for s, t in corpus.pairs:
        sw, tw = preprocess(s).split(), preprocess(t).split()
        if len(sw) <= max_len and len(tw) <= max_len and keep_src.issuperset(sw) and keep_tgt.issuperset(tw):
            kept.append((s, t))
    return ParallelCorpus(kept)


# ---------------------------------------------------------------------------
# synthetic corpus

_ONSETS = ["b", "c", "d", "f", "g", "l", "m", "n", "p", "r", "s", "t", "v", "br", "gr", "pl", "st", "tr"]
_VOWELS = ["a", "e", "i", "o", "u", "ai", "ou", "ei"]

# function words shared by every template: (english, french)
_FIXED = [
    ("is", "est"), ("and", "et"), ("sometimes", "parfois"), ("never", "jamais"),
    ("during", "pendant"), ("in", "en"), ("but", "mais"), ("usually", "habituellement"),
    ("the", "le"), ("very", "tres"), (",", ","), (".", "."),
]
# subject pronouns with grammatical gender
_PRONOUNS = [("he", "il", "m"), ("she", "elle", "f"), ("it", "il", "m")]


@dataclass
class SyntheticLexicon:
    """Word lists and translations behind :func:`generate_synthetic`."""

    nouns: list          # (english, french, gender)
    adjectives: list     # (english, french masculine, french feminine)
    verbs: list          # (english, french)
    fixed: list = field(default_factory=lambda: list(_FIXED))
    pronouns: list = field(default_factory=lambda: list(_PRONOUNS))

    def dictionary(self):
        """Map each source word to the set of target words it may produce."""
        d = {}
        for en, fr in self.fixed + self.verbs:
            d.setdefault(en, set()).add(fr)
        for en, fr, _ in self.nouns + self.pronouns:
            d.setdefault(en, set()).add(fr)
        for en, m, f in self.adjectives:
            d.setdefault(en, set()).update((m, f))
        return d


def _pseudo_words(rng, count, taken, syllables=(2, 3)):
    words = []
    while len(words) < count:
        n = rng.integers(syllables[0], syllables[1] + 1)
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(n))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def make_synthetic_lexicon(vocab_src, vocab_tgt, rng):
    n_fixed = len(_FIXED) + len(_PRONOUNS)
    n_fixed_tgt = len({fr for _, fr in _FIXED} | {fr for _, fr, _ in _PRONOUNS})
    n_content = vocab_src - n_fixed
    if n_content < 12:
        raise InvalidParams(f"vocab_src must be at least {n_fixed + 12}")
    # category sizes roughly follow how often each slot occurs per clause, so
    # every target word sees a similar number of training examples; each
    # adjective costs one extra target word for its feminine form
    n_adj = min(max(2, (n_content * 3) // 20), vocab_tgt - n_fixed_tgt - n_content)
    if n_adj < 2:
        raise InvalidParams("vocab_tgt too small for the requested source vocabulary")
    n_verb = max(2, (n_content * 3) // 20)
    n_noun = n_content - n_adj - n_verb
    taken = {w for pair in _FIXED for w in pair} | {w for trip in _PRONOUNS for w in trip[:2]}
    en = _pseudo_words(rng, n_content, taken)
    fr = _pseudo_words(rng, n_content, taken)
    nouns = [(en[i], fr[i], "mf"[i % 2]) for i in range(n_noun)]
    verbs = [(en[i], fr[i]) for i in range(n_noun, n_noun + n_verb)]
    # "lle" never occurs inside a generated word, so feminine forms stay unique
    adjectives = [(en[i], fr[i], fr[i] + "lle") for i in range(n_noun + n_verb, n_content)]
    return SyntheticLexicon(nouns, adjectives, verbs)


def _clause(lex, rng):
    """One aligned (english, french) clause; adjectives agree with the subject."""
    def pick(items):
        return items[rng.integers(len(items))]

    if rng.random() < 0.4:
        en_s, fr_s, gender = pick(lex.pronouns)
        src, tgt = [en_s], [fr_s]
    else:
        en_s, fr_s, gender = pick(lex.nouns)
        src, tgt = ["the", en_s], ["le", fr_s]
    kind = rng.integers(3)
    if kind == 0:
        adv = pick([("sometimes", "parfois"), ("never", "jamais"), ("usually", "habituellement"),
               ("very", "tres")])
        adj = pick(lex.adjectives)
        src += ["is", adv[0], adj[0]]
        tgt += ["est", adv[1], adj[1] if gender == "m" else adj[2]]
    elif kind == 1:
        adj = pick(lex.adjectives)
        noun = pick(lex.nouns)
        src += ["is", adj[0], "during", noun[0]]
        tgt += ["est", adj[1] if gender == "m" else adj[2], "pendant", noun[1]]
    else:
        verb = pick(lex.verbs)
        noun = pick(lex.nouns)
        src += [verb[0], "the", noun[0]]
        tgt += [verb[1], "le", noun[1]]
        if rng.random() < 0.5:
            place = pick(lex.nouns)
            src += ["in", place[0]]
            tgt += ["en", place[1]]
    return src, tgt


def generate_synthetic(n_pairs, vocab_src=200, vocab_tgt=350, max_len=21, seed=42, return_lexicon=False):
    """Seeded English-like / French-like sentence pairs aligned word by word.

    Every target word is a translation of the source word at the same position;
    adjectives take a feminine form after feminine subjects, so some positions
    depend on earlier context. Sentences end with ``.`` and never exceed
    ``max_len`` tokens.
    """
    if min(n_pairs, vocab_src, vocab_tgt, max_len) <= 0:
        raise InvalidParams("parameters must be positive")
    if max_len < 7:
        raise InvalidParams("max_len must allow at least one clause (7 tokens)")
    rng = np.random.default_rng(seed)
    lex = make_synthetic_lexicon(vocab_src, vocab_tgt, rng)
    pairs = []
    for _ in range(n_pairs):
        src, tgt = _clause(lex, rng)
        while rng.random() < 0.7:
            joiner = [(",", ","), ("and", "et"), ("but", "mais")][rng.integers(3)]
            s2, t2 = _clause(lex, rng)
            if len(src) + 1 + len(s2) + 1 > max_len:
                break
            src += [joiner[0]] + s2
            tgt += [joiner[1]] + t2
        src.append(".")
        tgt.append(".")
        pairs.append((" ".join(src), " ".join(tgt)))
    corpus = ParallelCorpus(pairs)
    return (corpus, lex) if return_lexicon else corpus
