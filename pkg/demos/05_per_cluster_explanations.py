"""Each cluster is characterised by a different feature.

Four blobs, each pushed away from the others along its own coordinate, plus
one pure-noise coordinate. Per-cluster tests should single out that
coordinate, and the centroid score should broadly agree.
"""
import numpy as np

from clusterexplain import Dataset, MlpConfig, SfitParams, SplitSpec, add_intercept, split, standardize, train
from clusterexplain import difference_scores, overlap, rank_features, sfit_per_cluster, top_k_by_difference

rng = np.random.default_rng(0)
shift_along = {1: 3, 2: 1, 3: 4, 4: 2}
X, y = [], []
for c, j in shift_along.items():
    centre = np.zeros(5)
    centre[j - 1] = 4.0
    X.append(centre + rng.standard_normal((250, 5)))
    y.append(np.full(250, c))
d = Dataset(np.vstack(X), [f"X{k}" for k in range(1, 6)], labels=np.concatenate(y))

z, _ = standardize(d)
tr, va, te = split(add_intercept(z), SplitSpec((0.7, 0.15, 0.15), seed=0))
model = train(tr, va, MlpConfig(seed=0))
centroids = difference_scores(z, z.labels)

for c in shift_along:
    r = sfit_per_cluster(model, te, c, SfitParams())
    sfit_top = [r.names(e.features)[0] for e in rank_features(r, 2)]
    cent_top = top_k_by_difference(centroids, c, 4)
    print(r.to_text(3), end="")
    print(f"  centroid top-4 {cent_top}; overlap with SFIT top-2: {overlap(sfit_top, cent_top)}\n")
