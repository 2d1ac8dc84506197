"""Train walk-based node embeddings and inspect them directly.

Shows the lower-level API under the deepwalk/metapath2vecpp pipeline
methods: walk generation, skip-gram training, and per-individual features.

Run with: python3 demos/walk_embeddings.py
"""

import numpy as np

from hinmhp.hin import EdgeKind, NodeId, NodeKind
from hinmhp.ingest import Condition, build_hin
from hinmhp.synth import SignalLoadings, SynthParams, generate
from hinmhp.walks import metapath_walks, random_walks, train_skipgram, via


def main():
    params = SynthParams(
        n=80, signal=SignalLoadings(sms=0.9), intra_p=0.25, seed=3
    )
    cohort, sms = generate(params)
    hin = build_hin(cohort, sms, Condition.Depression)

    corpus = random_walks(hin, walks_per_node=5, length=40, seed=3)
    print(f"uniform walks: {len(corpus.walks)} walks of length <= {corpus.length}")

    emb = train_skipgram(corpus, d=16, epochs=3, seed=3)
    print(f"embedding: {emb.vectors.shape[0]} nodes x {emb.dim} dims, "
          f"final loss {emb.loss_curve[-1]:.4f}")

    # metapath-guided walks stay on the I-W-I rail
    mp = via(NodeKind.WellBeing)
    guided = metapath_walks(hin, mp, walks_per_node=3, repeats=5, seed=3)
    kinds = {n.kind.name for walk in guided.walks for n in walk}
    print(f"metapath {mp.label()} visits kinds: {sorted(kinds)}")

    # depressed individuals should sit closer together than random pairs
    # when the planted SMS homophily is strong
    pos = [e[0] for e in hin.edges[EdgeKind.IM] if e[1] == 0]
    vecs = emb.rows_for(
        [NodeId(NodeKind.Individual, i) for i in range(len(cohort))]
    )
    vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    sim = vecs @ vecs.T
    pos_mask = np.zeros(len(cohort), dtype=bool)
    pos_mask[pos] = True
    within = sim[np.ix_(pos_mask, pos_mask)].mean()
    across = sim[np.ix_(pos_mask, ~pos_mask)].mean()
    print(f"mean cosine: depressed-depressed {within:.3f} vs "
          f"depressed-other {across:.3f}")


if __name__ == "__main__":
    main()
