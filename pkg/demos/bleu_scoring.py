"""Sentence BLEU: clipped n-gram precision with a brevity penalty."""
from voxlate import BleuConfig, sentence_bleu
from voxlate.evaluation import bleu_from_text

pairs = [
    ("new jersey est parfois calmne pendant l' automne, et il est neigeux en avril.",
     "new jersey est parfois parfois en l' et il est est en en."),
    ("il a vu un vieux camion jaune.", "il a vu une une camion jaune."),
]
for ref, hyp in pairs:
    s = bleu_from_text(ref, hyp)
    print(f"ref {ref}\nhyp {hyp}\n  precisions {[round(p, 3) for p in s.precisions]} bp {s.brevity_penalty:.3f} "
          f"bleu {s.score:.4f}\n")

# repeated words only earn credit up to their count in the reference
ref, hyp = "the cat sat on the mat".split(), "the cat the cat on the mat".split()
# no 4-gram survives, so the unsmoothed score depends on how a zero order is handled
for name, cfg in [("truncate", BleuConfig()), ("zero", BleuConfig(zero_policy="zero")),
                  ("epsilon", BleuConfig(smoothing="epsilon"))]:
    print(f"{name:<9}{sentence_bleu([ref], hyp, cfg).score:.4f}")
