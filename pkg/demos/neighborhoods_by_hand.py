"""How a word's semantic neighborhood density comes about, on ten 2-d vectors.

Four loop keywords sit close together, three io calls form a looser chain
and three words are spread out on their own. The global threshold is
derived from all pairwise distances; each word's neighbors are the words
within it, and the density is their mean cosine similarity to the word.
Note that ``write`` and ``fopen`` both reach ``read`` but not each other:
neighborhoods are not clusters.

Run with ``python3 demos/neighborhoods_by_hand.py``.
"""

from __future__ import annotations

from sndgaze.embeddings import EmbeddingTable
from sndgaze.snd import compute_all_snd

VECTORS = {
    "for": [1.00, 0.10],
    "while": [0.95, 0.20],
    "loop": [1.05, 0.00],
    "do": [0.90, 0.05],
    "read": [0.10, 1.00],
    "write": [0.25, 0.95],
    "fopen": [0.00, 0.85],
    "malloc": [-1.00, -0.60],
    "free": [-0.60, -1.00],
    "sizeof": [1.20, -1.10],
}


def main() -> None:
    table = EmbeddingTable.from_mapping(VECTORS, source_label="toy")
    # ten words give 45 pairs; enumerate them all instead of sampling
    result = compute_all_snd(list(VECTORS), table, exhaustive=True, keep_neighborhoods=True)
    th = result.threshold
    print(f"mean pair distance {th.mu_d:.3f}, sd {th.sigma_d:.3f} -> threshold {th.tau:.3f}\n")
    for word in VECTORS:
        score = result.scores[word]
        hood = ", ".join(sorted(result.neighborhoods[word])) or "-"
        arc = "none" if score.arc is None else f"{score.arc:.4f}"
        print(f"{word:>7}  neighbors: {hood:<20} density: {arc:>7}  (used in analyses: {score.effective_value:.4f})")


if __name__ == "__main__":
    main()
