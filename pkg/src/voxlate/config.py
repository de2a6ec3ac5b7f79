"""JSON run configuration with strict key checking."""
import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass
from pathlib import Path

from .errors import InvalidConfig

DEFAULT_SEED = 42


@dataclass
class AcousticsSection:
    frame_size: int = 2048
    hop: int = 512
    p_ref: float = 1e-4
    trim_seconds: float = 5.0


@dataclass
class SentimentSection:
    lexicon: str = None
    alpha: float = 15.0
    caps_increment: float = 0.733
    negation_scalar: float = -0.74
    exclamation_increment: float = 0.292


@dataclass
class CorpusSection:
    max_vocab_src: int = None
    max_vocab_tgt: int = None
    max_len: int = None
    pad_length: int = None
    split_ratio: float = 0.8


@dataclass
class ModelSection:
    kind: str = "embedded_gru"
    hidden: int = 64
    embed_dim: int = 64


@dataclass
class TrainSection:
    epochs: int = 10
    batch_size: int = 1024
    lr: float = 0.001
    shuffle: bool = True


@dataclass
class RunConfig:
    seed: int = DEFAULT_SEED
    acoustics: AcousticsSection = field(default_factory=AcousticsSection)
    sentiment: SentimentSection = field(default_factory=SentimentSection)
    corpus: CorpusSection = field(default_factory=CorpusSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def hash(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def _build(cls, data, where):
    if not isinstance(data, dict):
        raise InvalidConfig(f"{where or 'config'} must be an object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise InvalidConfig(f"unknown key(s) in {where or 'config'}: {', '.join(unknown)}")
    kw = {}
    for name, value in data.items():
        default = known[name].default_factory() if callable(known[name].default_factory) else None
        if is_dataclass(default):
            kw[name] = _build(type(default), value, f"{where}.{name}" if where else name)
        else:
            kw[name] = value
    return cls(**kw)


def load_config(path=None):
    if path is None:
        return RunConfig()
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    return _build(RunConfig, data, "")
