"""Sentence BLEU and side-by-side model comparison."""
import csv
import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass, field

import numpy as np

from .corpus import preprocess
from .errors import EmptyHypothesis, EmptyReference, InvalidParams, MismatchedTestSets
from .models import accuracy, logits_to_text

SMOOTHING = ("none", "epsilon", "add_one_counts")
ZERO_POLICIES = ("truncate", "zero")


@dataclass(frozen=True)
class BleuConfig:
    """BLEU settings.

    ``zero_policy`` decides what unsmoothed scoring does once an n-gram order
    has no matches: ``"truncate"`` drops that order and every higher one from
    the geometric mean (weights are not renormalised), which is what the NLTK
    releases of 2017-2018 did without smoothing; ``"zero"`` returns 0.
    ``tokenizer`` is used by :func:`bleu_from_text` only.
    """

    max_n: int = 4
    weights: tuple = None
    smoothing: str = "none"
    epsilon: float = 0.1
    zero_policy: str = "truncate"
    tokenizer: str = "whitespace"

    def resolved_weights(self):
        w = self.weights or tuple([1.0 / self.max_n] * self.max_n)
        if self.max_n < 1 or len(w) != self.max_n or not math.isclose(sum(w), 1.0, abs_tol=1e-9):
            raise InvalidParams("need max_n >= 1 and max_n weights summing to 1")
        if self.smoothing not in SMOOTHING or self.zero_policy not in ZERO_POLICIES:
            raise InvalidParams(f"unknown smoothing {self.smoothing!r} or zero_policy {self.zero_policy!r}")
        return w


@dataclass
class BleuScore:
    score: float
    precisions: list
    brevity_penalty: float
    hyp_len: int
    ref_len: int
    counts: list = field(default_factory=list)  # (clipped matches, total) per order

    def as_dict(self):
        return asdict(self)


def ngrams(tokens, n):
    return [tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def modified_precision(references, hypothesis, n):
    """Clipped n-gram matches and the hypothesis n-gram total."""
    hyp = Counter(ngrams(hypothesis, n))
    max_ref = Counter()
    for ref in references:
        for g, c in Counter(ngrams(ref, n)).items():
            if c > max_ref[g]:
                max_ref[g] = c
    matches = sum(min(c, max_ref[g]) for g, c in hyp.items())
    return matches, sum(hyp.values())


def closest_ref_length(references, hyp_len):
    return min((len(r) for r in references), key=lambda r: (abs(r - hyp_len), r))


def brevity_penalty(ref_len, hyp_len):
    if hyp_len > ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1 - ref_len / hyp_len)


def sentence_bleu(references, hypothesis, config=BleuConfig()):
    """BLEU of one tokenized hypothesis against one or more tokenized references."""
    weights = config.resolved_weights()
    if not hypothesis:
        raise EmptyHypothesis("hypothesis has no tokens")
    if not references or not all(references):
        raise EmptyReference("need at least one non-empty reference")
    hyp_len = len(hypothesis)
    ref_len = closest_ref_length(references, hyp_len)
    bp = brevity_penalty(ref_len, hyp_len)

    counts = [modified_precision(references, hypothesis, n) for n in range(1, config.max_n + 1)]
    precisions = []
    for n, (m, total) in enumerate(counts, start=1):
        if config.smoothing == "epsilon" and m == 0:
            precisions.append(config.epsilon / total if total else 0.0)
        elif config.smoothing == "add_one_counts" and n > 1:
            precisions.append((m + 1) / (total + 1))
        else:
            precisions.append(m / total if total else 0.0)

    log_sum = 0.0
    for order, (w, p) in enumerate(zip(weights, precisions)):
        if p == 0:
            # no unigram overlap is a zero score under either policy
            if config.zero_policy == "zero" or order == 0:
                return BleuScore(0.0, precisions, bp, hyp_len, ref_len, counts)
            break
        log_sum += w * math.log(p)
    return BleuScore(bp * math.exp(log_sum), precisions, bp, hyp_len, ref_len, counts)


def tokenize_for_bleu(text, config=BleuConfig()):
    return preprocess(text).split() if config.tokenizer == "preprocess" else text.split()


def bleu_from_text(reference, hypothesis, config=BleuConfig()):
    refs = [reference] if isinstance(reference, str) else list(reference)
    return sentence_bleu([tokenize_for_bleu(r, config) for r in refs],
                         tokenize_for_bleu(hypothesis, config), config)


# ---------------------------------------------------------------------------
# model evaluation


@dataclass
class SentenceResult:
    source: str
    target: str
    prediction: str
    bleu: float
    empty_hypothesis: bool = False


@dataclass
class EvalReport:
    sentences: list
    mean_bleu: float
    accuracy_padded: float
    accuracy_masked: float
    empty_hypotheses: int = 0

    def to_json(self):
        return json.dumps(asdict(self), ensure_ascii=False, indent=1, sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target", "prediction", "bleu"])
        for s in self.sentences:
            w.writerow([s.source, s.target, s.prediction, repr(s.bleu)])
        return buf.getvalue()


def evaluate_model(model, testset, config=BleuConfig(), predictions=None):
    """Predict every test row and score it with BLEU and token accuracy.

    Empty predictions (all padding) count as BLEU 0 and are tallied in
    ``empty_hypotheses``. ``predictions`` may be passed to score precomputed ids.
    """
    pred = model.predict(testset.source_ids) if predictions is None else np.asarray(predictions)
    src_vocab, tgt_vocab = testset.source_vocab, testset.target_vocab
    rows = []
    empty = 0
    for s_ids, t_ids, p_ids in zip(testset.source_ids, testset.target_ids, pred):
        source = logits_to_text(s_ids, src_vocab)
        target = logits_to_text(t_ids, tgt_vocab)
        hyp = logits_to_text(p_ids, tgt_vocab)
        try:
            score = sentence_bleu([target.split()], hyp.split(), config).score
            rows.append(SentenceResult(source, target, hyp, score))
        except EmptyHypothesis:
            empty += 1
            rows.append(SentenceResult(source, target, hyp, 0.0, True))
    mean_bleu = float(np.mean([r.bleu for r in rows])) if rows else 0.0
    return EvalReport(rows, mean_bleu, accuracy(pred, testset.target_ids),
                      accuracy(pred, testset.target_ids, masked=True), empty)


@dataclass
class ComparisonRow:
    source: str
    target: str
    predictions: dict
    bleu: dict


def compare_models(reports):
    """Align per-sentence results of several named :class:`EvalReport` objects."""
    if len(reports) < 2:
        raise InvalidParams("need at least two reports to compare")
    names = [n for n, _ in reports]
    first = reports[0][1].sentences
    for name, rep in reports[1:]:
        if [(s.source, s.target) for s in rep.sentences] != [(s.source, s.target) for s in first]:
            raise MismatchedTestSets(f"{name} was evaluated on different sentences")
    rows = []
    for i, base in enumerate(first):
        rows.append(ComparisonRow(base.source, base.target,
                                  {n: r.sentences[i].prediction for n, r in reports},
                                  {n: r.sentences[i].bleu for n, r in reports}))
    return Comparison(names, rows, {n: r.mean_bleu for n, r in reports})


@dataclass
class Comparison:
    names: list
    rows: list
    mean_bleu: dict

    def deltas(self, a, b):
        return [row.bleu[a] - row.bleu[b] for row in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "target"] + [f"{n}_prediction" for n in self.names] + [f"{n}_bleu" for n in self.names])
        for r in self.rows:
            w.writerow([r.source, r.target] + [r.predictions[n] for n in self.names]
                       + [repr(r.bleu[n]) for n in self.names])
        return buf.getvalue()

    def to_text(self):
        lines = []
        for i, r in enumerate(self.rows, start=1):
            lines.append(f"[{i}] source : {r.source}")
            lines.append(f"    target : {r.target}")
            width = max(len(n) for n in self.names)
            for n in self.names:
                lines.append(f"    {n:<{width}} : {r.predictions[n]}  (BLEU {r.bleu[n]:.4f})")
        lines.append("mean BLEU: " + ", ".join(f"{n}={v:.4f}" for n, v in self.mean_bleu.items()))
        return "\n".join(lines)
