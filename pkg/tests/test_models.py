import numpy as np
import pytest

from voxlate import neural as nn
from voxlate.corpus import ParallelCorpus, build_dataset, fit_tokenizer, preprocess
from voxlate.errors import (CheckpointIOError, InvalidConfig, InvalidSpec, NonFiniteLoss, ShapeMismatch,
                            VersionMismatch)
from voxlate.models import (ModelSpec, TrainConfig, TranslationModel, accuracy, build_model, load_checkpoint,
                            logits_to_text, make_source_ids, save_checkpoint, spec_for_dataset, train,
                            vocabularies_from_header)

TOY = ParallelCorpus([
    ("new jersey is sometimes quiet during autumn .", "new jersey est parfois calme pendant l' automne ."),
    ("paris is never cold in april .", "paris est jamais froid en avril ."),
    ("it is snowy in winter .", "il est neigeux en hiver ."),
])


def test_parameter_counts_match_published_summaries():
    simple = build_model(ModelSpec("simple_gru", 21, 350))
    assert [(r.name, r.output_shape, r.params) for r in simple.summary()] == [
        ("input_1", (None, 21, 1), 0), ("gru_1", (None, 21, 64), 12672),
        ("time_distributed_1", (None, 21, 350), 22750)]
    assert nn.param_count(simple) == 35422
    emb = build_model(ModelSpec("embedded_gru", 21, 350, 350))
    assert [r.params for r in emb.summary()] == [0, 22400, 24768, 22750]
    assert nn.param_count(emb) == 69918


def test_invalid_specs():
    for spec in [ModelSpec("lstm", 21, 350), ModelSpec("simple_gru", 0, 350),
                 ModelSpec("embedded_gru", 21, 350, None), ModelSpec("simple_gru", 21, 350, hidden=0)]:
        with pytest.raises(InvalidSpec):
            build_model(spec)


def test_same_seed_same_parameters():
    a = build_model(ModelSpec("embedded_gru", 5, 9, 7, 4, 3), seed=3)
    b = build_model(ModelSpec("embedded_gru", 5, 9, 7, 4, 3), seed=3)
    c = build_model(ModelSpec("embedded_gru", 5, 9, 7, 4, 3), seed=4)
    assert all(a.params[k].tobytes() == b.params[k].tobytes() for k in a.params)
    assert any(a.params[k].tobytes() != c.params[k].tobytes() for k in a.params)


@pytest.mark.parametrize("kind", ["simple_gru", "embedded_gru"])
@pytest.mark.parametrize("seed", [0, 1])
def test_full_model_gradients(kind, seed):
    spec = ModelSpec(kind, 6, 10, 8 if kind == "embedded_gru" else None, hidden=5, embed_dim=3)
    model = build_model(spec, seed=seed, dtype=np.float64)
    rng = np.random.default_rng(seed)
    x = rng.integers(0, 8, size=(3, 6))
    y = rng.integers(0, 10, size=(3, 6))
    assert nn.grad_check(model, (x, y)) < 1e-4


def test_grad_check_catches_sign_flip():
    spec = ModelSpec("embedded_gru", 5, 7, 7, hidden=4, embed_dim=3)
    model = build_model(spec, seed=0, dtype=np.float64)
    honest = model.backward

    def broken(cache, dlogits):
        grads = honest(cache, dlogits)
        grads["gru_1/U_h"] = -grads["gru_1/U_h"]
        return grads

    model.backward = broken
    rng = np.random.default_rng(0)
    sample = (rng.integers(0, 7, size=(2, 5)), rng.integers(0, 7, size=(2, 5)))
    assert nn.grad_check(model, sample) > 0.1


def test_accuracy_cases():
    t = np.array([[5, 0, 0]])
    assert accuracy(t, t) == accuracy(t, t, masked=True) == 1.0
    assert accuracy(np.array([[5, 1, 1]]), t) == pytest.approx(1 / 3)
    assert accuracy(np.array([[5, 1, 1]]), t, masked=True) == 1.0
    half = np.array([[3, 4, 0, 0]])
    assert accuracy(np.array([[1, 1, 0, 0]]), half) == 0.5
    assert accuracy(np.array([[1, 1, 0, 0]]), half, masked=True) == 0.0
    no_pad = np.array([[1, 2, 3]])
    pred = np.array([[1, 0, 3]])
    assert accuracy(pred, no_pad) == accuracy(pred, no_pad, masked=True)
    with pytest.raises(ShapeMismatch):
        accuracy(np.zeros((1, 2)), np.zeros((1, 3)))


def test_logits_to_text():
    vocab = fit_tokenizer(["new jersey est"])
    assert logits_to_text([0, 0, 0], vocab) == ""
    onehots = np.eye(vocab.size)[[1, 2, 3, 0]]
    assert logits_to_text(onehots, vocab) == "new jersey est"
    assert logits_to_text([1, 0, vocab.unk_id], vocab, verbose=True) == "new <PAD> <UNK>"


def test_degenerate_model_predicts_bias_argmax():
    spec = ModelSpec("simple_gru", 4, 6)
    model = build_model(spec)
    model.params["time_distributed_1/W"][:] = 0
    model.params["time_distributed_1/b"][:] = 0
    model.params["time_distributed_1/b"][4] = 5.0
    assert model.predict(np.array([[1, 2, 3, 0]])).tolist() == [[4, 4, 4, 4]]
    model.params["time_distributed_1/b"][:] = 0
    assert model.predict(np.array([1, 2, 3, 0])).tolist() == [0, 0, 0, 0]  # ties go to the smaller id
    with pytest.raises(ShapeMismatch):
        model.predict(np.array([[1, 2]]))


@pytest.fixture(scope="module")
def overfit():
    ds = build_dataset(TOY, pad_length=10)
    model = build_model(spec_for_dataset("embedded_gru", ds), seed=0)
    report = train(model, ds, TrainConfig(epochs=200, seed=0))
    return ds, model, report


def test_overfit_memorises_training_pairs(overfit):
    ds, model, report = overfit
    pred = model.predict(ds.source_ids)
    np.testing.assert_array_equal(pred, ds.target_ids)
    assert np.all(pred[ds.target_ids == 0] == 0)
    assert len(report) == 200
    losses = [e.train_loss for e in report.epochs]
    assert all(b <= a + 1e-3 for a, b in zip(losses[3:], losses[4:]))
    for row, tgt in zip(pred, TOY.targets):
        assert logits_to_text(row, ds.target_vocab) == preprocess(tgt)


def test_checkpoint_round_trip(overfit, tmp_path):
    ds, model, _ = overfit
    path = tmp_path / "m.vbnn"
    save_checkpoint(model, path, seed=0, epoch=200, source_vocab=ds.source_vocab, target_vocab=ds.target_vocab)
    loaded, header = load_checkpoint(path, with_header=True)
    assert loaded.spec == model.spec
    assert nn.param_count(loaded) == nn.param_count(model)
    assert all(loaded.params[k].tobytes() == model.params[k].tobytes() for k in model.params)
    np.testing.assert_array_equal(loaded.predict(ds.source_ids), model.predict(ds.source_ids))
    assert (header["seed"], header["epoch"]) == (0, 200)
    src, tgt = vocabularies_from_header(header)
    assert src.word_to_id == ds.source_vocab.word_to_id
    ids = make_source_ids(TOY.sources[0], src, loaded.spec.seq_len)
    assert logits_to_text(loaded.predict(ids), tgt) == preprocess(TOY.targets[0])
    assert path.read_bytes()[:5] == b"VBNN1"


def test_checkpoint_corruption(overfit, tmp_path):
    _, model, _ = overfit
    path = tmp_path / "m.vbnn"
    save_checkpoint(model, path)
    raw = path.read_bytes()
    for cut in (3, 7, 40, len(raw) - 1):
        (tmp_path / "cut.vbnn").write_bytes(raw[:cut])
        with pytest.raises((VersionMismatch, CheckpointIOError)):
            load_checkpoint(tmp_path / "cut.vbnn")
    (tmp_path / "bad.vbnn").write_bytes(b"XXXXX" + raw[5:])
    with pytest.raises(VersionMismatch):
        load_checkpoint(tmp_path / "bad.vbnn")
    (tmp_path / "v2.vbnn").write_bytes(raw.replace(b'"format": 1', b'"format": 2', 1))
    with pytest.raises(VersionMismatch):
        load_checkpoint(tmp_path / "v2.vbnn")
    with pytest.raises(CheckpointIOError):
        load_checkpoint(tmp_path / "absent.vbnn")


def test_train_config_validation_and_shapes():
    ds = build_dataset(TOY, pad_length=10)
    model = build_model(spec_for_dataset("simple_gru", ds))
    with pytest.raises(InvalidConfig):
        train(model, ds, TrainConfig(epochs=0))
    with pytest.raises(InvalidConfig):
        train(model, ds, TrainConfig(batch_size=0))
    other = build_model(ModelSpec("simple_gru", 12, ds.target_vocab.size))
    with pytest.raises(ShapeMismatch):
        train(other, ds, TrainConfig(epochs=1))


def test_non_finite_loss_reports_context():
    ds = build_dataset(TOY, pad_length=10)
    model = build_model(spec_for_dataset("simple_gru", ds))
    model.params["gru_1/W_h"][:] = np.nan
    with pytest.raises(NonFiniteLoss) as exc:
        train(model, ds, TrainConfig(epochs=1, batch_size=2))
    assert (exc.value.epoch, exc.value.batch) == (1, 0)


def test_training_is_deterministic(tmp_path):
    ds = build_dataset(TOY, pad_length=10)
    texts = []
    for _ in range(2):
        model = build_model(spec_for_dataset("embedded_gru", ds), seed=5)
        report = train(model, ds, TrainConfig(epochs=5, batch_size=2, seed=5), validation=ds,
                       checkpoint_dir=tmp_path)
        texts.append(report.to_csv())
    assert texts[0] == texts[1]
    assert texts[0].splitlines()[0] == ("epoch,train_loss,train_acc_padded,train_acc_masked,"
                                        "val_loss,val_acc_padded,val_acc_masked")
    assert len(list(tmp_path.glob("epoch_*.vbnn"))) == 5


def test_predict_is_pure():
    model = build_model(ModelSpec("embedded_gru", 5, 9, 7, 4, 3))
    x = np.array([[1, 2, 3, 0, 0]])
    before = {k: v.copy() for k, v in model.params.items()}
    assert model.predict(x).tobytes() == model.predict(x).tobytes()
    assert all(np.array_equal(before[k], model.params[k]) for k in before)


def test_translation_model_backward_names():
    model = build_model(ModelSpec("embedded_gru", 5, 9, 7, 4, 3))
    _, grads, _ = model.loss_and_grads(np.zeros((1, 5), dtype=int), np.zeros((1, 5), dtype=int))
    assert list(grads) == list(model.params)
    assert isinstance(model, TranslationModel)
