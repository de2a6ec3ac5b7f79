"""Word ids by frequency, then padding to a fixed length."""
from voxlate import fit_tokenizer, pad, tokenize
from voxlate.corpus import KERAS_FILTERS

text = ["The quick brown fox jumps over the lazy dog .",
        "By Jove , my quick study of lexicography won a prize .",
        "This is a short sentence ."]

vocab = fit_tokenizer(text, filters=KERAS_FILTERS)
print("word ids:", vocab.word_to_id)
seqs = tokenize(text, vocab)
for sentence, ids in zip(text, seqs):
    print(f"  {sentence}\n    -> {ids}")
print("padded:\n", pad(seqs, 10))

# unseen words map to one shared id just past the vocabulary
print("unseen:", tokenize(["the purple fox"], vocab), "unk id", vocab.unk_id)
