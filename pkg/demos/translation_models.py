"""Train the plain GRU and the embedding GRU side by side.

Uses the generated English-French style corpus so it runs offline in
about two minutes. The embedding model should pull well ahead on
masked accuracy (non-padding tokens only).
"""
import sys

from voxlate import (TrainConfig, train, build_dataset, build_model, compare_models, evaluate_model,
                     generate_synthetic, param_count, split)
from voxlate.models import spec_for_dataset

epochs = int(sys.argv[1]) if len(sys.argv) > 1 else 20

corpus = generate_synthetic(10000, 200, 350, 21, seed=42)
print(corpus.sources[0], "|", corpus.targets[0])
ds = build_dataset(corpus)
train_set, val_set = split(ds, 0.8, seed=42)
print(f"{len(train_set)} train / {len(val_set)} val pairs, pad length {ds.pad_length}")

reports = []
for kind in ("simple_gru", "embedded_gru"):
    model = build_model(spec_for_dataset(kind, ds), seed=42)
    print(f"\n{kind}: {param_count(model)} parameters")
    for row in model.summary():
        print(f"  {row.name:<12}{str(row.output_shape):<18}{row.params}")
    rep = train(model, train_set, TrainConfig(epochs=epochs, seed=42), validation=val_set,
                log=lambda e: print(f"  epoch {e.epoch:2d} loss {e.train_loss:.4f} "
                                    f"val acc {e.val_acc_padded:.4f} masked {e.val_acc_masked:.4f}"))
    reports.append((kind, evaluate_model(model, val_set.subset(slice(0, 200)))))

table = compare_models(reports)
print("\nmean BLEU:", {k: round(v, 4) for k, v in table.mean_bleu.items()})
for row in table.rows[:3]:
    print(f"\n  ref: {row.target}")
    for name in table.names:
        print(f"  {name:<13} {row.predictions[name]}  ({row.bleu[name]:.3f})")
