"""Rule-based sentiment on short utterances.

The compound score is the normalized sum of lexicon valences after
boosters, negation, caps emphasis and punctuation have been applied.
"""
from voxlate import classify_sentiment, polarity_scores

for text in ["Hello, how are you?",
             "Hi, good to see you.",
             "The phone is super cool.",
             "The phone is not cool.",
             "The phone is SUPER COOL!!!",
             "The food was good, but the service was horrible."]:
    s = polarity_scores(text)
    print(f"{text:<52} neg {s.neg:.3f} neu {s.neu:.3f} pos {s.pos:.3f} "
          f"compound {s.compound:+.4f} -> {classify_sentiment(s.compound).name}")
