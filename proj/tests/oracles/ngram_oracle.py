"""Independent recomputation of toy n-gram statistics.

Counts n-grams straight from the corpus text, applies additive smoothing over
the predictive vocabulary (corpus words plus </s> and <unk>) at the longest
history suffix that was observed, and enumerates the whole distribution to get
log-probability, rank and entropy. Used once to freeze expected values into
the C++ tests.

usage: ngram_oracle.py CORPUS ORDER ALPHA "sentence to score"
"""
import math
import sys
from collections import Counter


def train(lines, order):
    sentences = [line.split() for line in lines if line.strip()]
    vocab = sorted(set(w for s in sentences for w in s) | {"</s>", "<unk>"})
    counts = Counter()
    for s in sentences:
        padded = ["<s>"] * (order - 1) + s + ["</s>"]
        for i in range(order - 1, len(padded)):
            for n in range(order):
                counts[tuple(padded[i - n:i + 1])] += 1
    return vocab, counts


def distribution(vocab, counts, order, alpha, history):
    padded = ["<s>"] * (order - 1) + history
    for n in range(order - 1, -1, -1):
        ctx = tuple(padded[len(padded) - n:]) if n else ()
        total = sum(counts[ctx + (w,)] for w in vocab)
        if total > 0:
            denom = total + alpha * len(vocab)
            return {w: (counts[ctx + (w,)] + alpha) / denom for w in vocab}
    raise RuntimeError("no unigram counts")


def main():
    path, order, alpha, sentence = sys.argv[1], int(sys.argv[2]), float(sys.argv[3]), sys.argv[4]
    with open(path) as f:
        vocab, counts = train(f.readlines(), order)
    words = sentence.split()
    print(f"vocab_size {len(vocab)}")
    history = []
    for w in words:
        obs = w if w in vocab else "<unk>"
        dist = distribution(vocab, counts, order, alpha, history)
        p = dist[obs]
        rank = 1 + sum(1 for q in dist.values() if q > p)
        entropy = -sum(q * math.log(q) for q in dist.values())
        print(f"{w} {math.log(p)!r} {rank} {entropy!r}")
        history.append(obs)


if __name__ == "__main__":
    main()
