"""The two GRU translation models, their training loop, decoding and checkpoints.

Both models label each source position with a target word: ``simple_gru``
feeds the raw token id as a single real per timestep, ``embedded_gru`` looks
ids up in a trainable embedding first. A shared time-distributed dense layer
with softmax produces a distribution over the target vocabulary per position.
"""
import csv
import io
import json
import struct
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import neural as nn
from .corpus import Vocabulary, pad, preprocess, tokenize
from .errors import (CheckpointIOError, InvalidConfig, InvalidSpec, NonFiniteLoss,
                     ShapeMismatch, VersionMismatch)

MAGIC = b"VBNN1"
KINDS = ("simple_gru", "embedded_gru")


@dataclass
class ModelSpec:
    kind: str
    seq_len: int
    target_vocab_size: int
    source_vocab_size: int = None
    hidden: int = 64
    embed_dim: int = 64

    def validate(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.seq_len < 1 or self.target_vocab_size < 1 or self.hidden < 1:
            raise InvalidSpec("seq_len, target_vocab_size and hidden must be positive")
        if self.kind == "embedded_gru" and (not self.source_vocab_size or self.embed_dim < 1):
            raise InvalidSpec("embedded_gru needs source_vocab_size and embed_dim")


@dataclass
class LayerSummary:
    name: str
    output_shape: tuple
    params: int


class TranslationModel:
    """Parameters plus forward/backward for one of the two architectures.

    ``params`` is an ordered name -> array dict (``"gru_1/W_z"`` and so on)
    that the optimizer updates in place.
    """

    def __init__(self, spec, params):
        self.spec = spec
        self.params = params

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def _layer(self, prefix, cls):
        return cls(**{n: self.params[f"{prefix}/{n}"] for n in cls.NAMES})

    def summary(self):
        s = self.spec
        rows = []
        if s.kind == "simple_gru":
            rows.append(LayerSummary("input_1", (None, s.seq_len, 1), 0))
            gru_in = 1
        else:
            rows.append(LayerSummary("input_1", (None, s.seq_len), 0))
            rows.append(LayerSummary("embedding_1", (None, s.seq_len, s.embed_dim),
                                     s.source_vocab_size * s.embed_dim))
            gru_in = s.embed_dim
        rows.append(LayerSummary("gru_1", (None, s.seq_len, s.hidden), nn.gru_param_count(gru_in, s.hidden)))
        rows.append(LayerSummary("time_distributed_1", (None, s.seq_len, s.target_vocab_size),
                                 s.hidden * s.target_vocab_size + s.target_vocab_size))
        return rows

    def _check_input(self, x):
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != self.spec.seq_len:
            raise ShapeMismatch(f"expected source ids of shape [batch, {self.spec.seq_len}], got {x.shape}")
        return x

    def forward(self, x):
        """Map source ids ``[batch, T]`` to probabilities ``[batch, T, V]``."""
        x = self._check_input(x)
        if self.spec.kind == "simple_gru":
            inputs = x[..., None].astype(self.dtype)
            emb_cache = None
        else:
            inputs, emb_cache = nn.embedding_forward(x, self._layer("embedding_1", nn.EmbeddingParams))
        H, gru_cache = nn.gru_forward(inputs, self._layer("gru_1", nn.GruParams))
        probs, dense_cache = nn.dense_softmax_forward(H, self._layer("time_distributed_1", nn.DenseParams))
        return probs, (emb_cache, gru_cache, dense_cache)

    def backward(self, cache, dlogits):
        emb_cache, gru_cache, dense_cache = cache
        grads = {}
        d_dense, dH = nn.dense_softmax_backward(dense_cache, dlogits)
        d_gru, dx, _ = nn.gru_backward(gru_cache, dH)
        if emb_cache is not None:
            for n, g in nn.embedding_backward(emb_cache, dx).named():
                grads[f"embedding_1/{n}"] = g
        for prefix, rec in (("gru_1", d_gru), ("time_distributed_1", d_dense)):
            for n, g in rec.named():
                grads[f"{prefix}/{n}"] = g
        return {k: grads[k] for k in self.params}

    def loss(self, x, y):
        probs, _ = self.forward(x)
        return nn.sparse_ce_loss(probs, y)[0]

    def loss_and_grads(self, x, y):
        probs, cache = self.forward(x)
        loss, dlogits = nn.sparse_ce_loss(probs, y)
        return loss, self.backward(cache, dlogits), probs

    def predict(self, x):
        """Argmax target ids per position; ties resolve to the smaller id."""
        x = np.asarray(x)
        single = x.ndim == 1
        probs, _ = self.forward(x[None] if single else x)
        ids = probs.argmax(-1)  # numpy argmax returns the first maximum
        return ids[0] if single else ids


def build_model(spec, seed=42, dtype=np.float32):
    spec.validate()
    rng = np.random.default_rng(seed)
    params = {}
    if spec.kind == "embedded_gru":
        params["embedding_1/table"] = nn.EmbeddingParams.init(spec.source_vocab_size, spec.embed_dim, rng, dtype).table
        gru_in = spec.embed_dim
    else:
        gru_in = 1
    for n, a in nn.GruParams.init(gru_in, spec.hidden, rng, dtype).named():
        params[f"gru_1/{n}"] = a
    for n, a in nn.DenseParams.init(spec.hidden, spec.target_vocab_size, rng, dtype).named():
        params[f"time_distributed_1/{n}"] = a
    return TranslationModel(spec, params)


def spec_for_dataset(kind, dataset, hidden=64, embed_dim=64):
    return ModelSpec(kind, dataset.pad_length, dataset.target_vocab.size,
                     dataset.source_vocab.size if kind == "embedded_gru" else None, hidden, embed_dim)


# ---------------------------------------------------------------------------
# metrics and decoding


def accuracy(pred_ids, target_ids, masked=False):
    """Fraction of matching positions; ``masked`` ignores pad (id 0) targets."""
    pred_ids, target_ids = np.asarray(pred_ids), np.asarray(target_ids)
    if pred_ids.shape != target_ids.shape:
        raise ShapeMismatch(f"{pred_ids.shape} vs {target_ids.shape}")
    hit = pred_ids == target_ids
    if masked:
        keep = target_ids != 0
        n = keep.sum()
        return float(hit[keep].sum() / n) if n else 1.0
    return float(hit.mean()) if hit.size else 1.0


def logits_to_text(values, vocab, verbose=False):
    """Render ids, or per-position scores (argmaxed), as space-joined words.

    Pads print as ``<PAD>`` when ``verbose`` and are dropped otherwise.
    """
    values = np.asarray(values)
    ids = values.argmax(-1) if values.ndim == 2 else values
    words = []
    for i in ids:
        if int(i) == 0 and not verbose:
            continue
        words.append(vocab.word(i))
    return " ".join(words)


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 1024
    lr: float = 0.001
    seed: int = 42
    shuffle: bool = True

    def validate(self):
        if self.epochs < 1:
            raise InvalidConfig("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidConfig("batch_size must be >= 1")
        if not self.lr > 0:
            raise InvalidConfig("lr must be positive")


REPORT_COLUMNS = ("epoch", "train_loss", "train_acc_padded", "train_acc_masked",
                  "val_loss", "val_acc_padded", "val_acc_masked")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc_padded: float
    train_acc_masked: float
    val_loss: float = float("nan")
    val_acc_padded: float = float("nan")
    val_acc_masked: float = float("nan")
    wall_time: float = 0.0


@dataclass
class TrainReport:
    epochs: list = field(default_factory=list)

    def __len__(self):
        return len(self.epochs)

    @property
    def final(self):
        return self.epochs[-1]

    def to_csv(self, path=None):
        """CSV of the per-epoch metrics; wall time is left out so reruns match byte for byte."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for e in self.epochs:
            w.writerow([e.epoch] + [repr(float(getattr(e, c))) for c in REPORT_COLUMNS[1:]])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def evaluate_batches(model, dataset, batch_size=1024):
    """Mean loss plus padded and masked accuracy over ``dataset``."""
    total_loss = 0.0
    hits = hits_masked = n_masked = 0
    n = len(dataset)
    for start in range(0, n, batch_size):
        x = dataset.source_ids[start:start + batch_size]
        y = dataset.target_ids[start:start + batch_size]
        probs, _ = model.forward(x)
        loss, _ = nn.sparse_ce_loss(probs, y)
        total_loss += loss * y.size
        pred = probs.argmax(-1)
        hits += int((pred == y).sum())
        keep = y != 0
        hits_masked += int((pred[keep] == y[keep]).sum())
        n_masked += int(keep.sum())
    count = dataset.target_ids.size
    return total_loss / count, hits / count, (hits_masked / n_masked if n_masked else 1.0)


def train(model, dataset, config, validation=None, checkpoint_dir=None, log=None):
    """Fit ``model`` on ``dataset`` with mini-batch Adam.

    Training metrics are averaged over the epoch's batches as they are seen;
    validation metrics are computed after each epoch. Returns a
    :class:`TrainReport`. With ``checkpoint_dir`` a checkpoint is written per
    epoch.
    """
    config.validate()
    if dataset.pad_length != model.spec.seq_len:
        raise ShapeMismatch(f"dataset pad length {dataset.pad_length} != model seq_len {model.spec.seq_len}")
    if dataset.target_ids.max(initial=0) >= model.spec.target_vocab_size:
        raise ShapeMismatch("target ids exceed the model's output width")
    rng = np.random.default_rng(config.seed)
    state = nn.AdamState(lr=config.lr)
    report = TrainReport()
    n = len(dataset)
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = rng.permutation(n) if config.shuffle else np.arange(n)
        loss_sum = 0.0
        hits = hits_masked = n_masked = n_pos = 0
        for b, start in enumerate(range(0, n, config.batch_size)):
            idx = order[start:start + config.batch_size]
            x, y = dataset.source_ids[idx], dataset.target_ids[idx]
            loss, grads, probs = model.loss_and_grads(x, y)
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, b, loss)
            for name, g in grads.items():
                nn.check_finite(f"gradient {name} (epoch {epoch}, batch {b})", g)
            nn.adam_step(model.params, grads, state)
            pred = probs.argmax(-1)
            keep = y != 0
            loss_sum += loss * y.size
            hits += int((pred == y).sum())
            hits_masked += int((pred[keep] == y[keep]).sum())
            n_masked += int(keep.sum())
            n_pos += y.size
        stats = EpochStats(epoch, loss_sum / n_pos, hits / n_pos, hits_masked / n_masked if n_masked else 1.0)
        if validation is not None and len(validation):
            stats.val_loss, stats.val_acc_padded, stats.val_acc_masked = evaluate_batches(
                model, validation, config.batch_size)
        stats.wall_time = time.perf_counter() - t0
        report.epochs.append(stats)
        if log is not None:
            log(stats)
        if checkpoint_dir is not None:
            save_checkpoint(model, Path(checkpoint_dir) / f"epoch_{epoch:03d}.vbnn",
                            seed=config.seed, epoch=epoch)
    return report


# ---------------------------------------------------------------------------
# checkpoints
#
# layout: MAGIC | uint32 LE header length | UTF-8 JSON header | float32 LE
# tensors in header order


def save_checkpoint(model, path, seed=None, epoch=None, source_vocab=None, target_vocab=None):
    header = {
        "format": 1,
        "spec": asdict(model.spec),
        "tensors": [{"name": k, "shape": list(v.shape)} for k, v in model.params.items()],
        "seed": seed,
        "epoch": epoch,
    }
    if source_vocab is not None:
        header["source_vocab"] = source_vocab.to_json()
    if target_vocab is not None:
        header["target_vocab"] = target_vocab.to_json()
    blob = json.dumps(header, ensure_ascii=False, sort_keys=True).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            for v in model.params.values():
                fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())
    except OSError as exc:
        raise CheckpointIOError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path, with_header=False):
    """Read a checkpoint; returns the model (and the raw header if asked)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointIOError(f"cannot read checkpoint {path}: {exc}") from exc
    if raw[:len(MAGIC)] != MAGIC:
        raise VersionMismatch(f"{path} is not a {MAGIC.decode()} checkpoint")
    off = len(MAGIC)
    if len(raw) < off + 4:
        raise CheckpointIOError(f"{path} is truncated")
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    try:
        header = json.loads(raw[off:off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointIOError(f"{path} has an unreadable header") from exc
    if header.get("format") != 1:
        raise VersionMismatch(f"unsupported checkpoint format {header.get('format')!r}")
    off += hlen
    try:
        spec = ModelSpec(**header["spec"])
    except (KeyError, TypeError) as exc:
        raise VersionMismatch(f"{path} has an unrecognised model spec") from exc
    expected = build_model(spec, seed=0)
    params = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) * 4
        if off + size > len(raw):
            raise CheckpointIOError(f"{path} is truncated")
        params[entry["name"]] = np.frombuffer(raw, dtype="<f4", count=size // 4, offset=off).reshape(shape).astype(np.float32)
        off += size
    if off != len(raw):
        raise CheckpointIOError(f"{path} has {len(raw) - off} trailing bytes")
    ref_shapes = {k: v.shape for k, v in expected.params.items()}
    if {k: v.shape for k, v in params.items()} != ref_shapes:
        raise ShapeMismatch("checkpoint tensors do not match the model spec")
    model = TranslationModel(spec, {k: params[k] for k in ref_shapes})
    return (model, header) if with_header else model


def vocabularies_from_header(header):
    src = header.get("source_vocab")
    tgt = header.get("target_vocab")
    return (Vocabulary.from_json(src) if src else None, Vocabulary.from_json(tgt) if tgt else None)


def make_source_ids(text, vocab, seq_len):
    """Preprocess, tokenize and pad one source sentence to ``[seq_len]``."""
    return pad(tokenize([preprocess(text)], vocab), seq_len, truncate=True)[0]

