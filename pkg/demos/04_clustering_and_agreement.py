"""K-means and Ward on the seven Hepta blobs, scored against the truth."""
from clusterexplain import GenSpec, adjusted_rand_index, agglomerative_ward, generate, kmeans, standardize

d = generate(GenSpec("Hepta", seed=0))
z, _ = standardize(d.with_labels(None))

ward = agglomerative_ward(z, 7)
km = kmeans(z, 7, seed=0, n_init=10)
print("Ward sizes   ", ward.sizes, " ARI", round(adjusted_rand_index(ward, d.labels), 4))
print("k-means sizes", km.sizes, " ARI", round(adjusted_rand_index(km, d.labels), 4))
print("k-means inertia by iteration:", [round(v, 2) for v in km.params["inertia_trace"]])

# The last few Ward merges are the expensive ones: that jump is the elbow.
costs = agglomerative_ward(z, 1).params["merge_costs"]
print("last eight merge costs:", [round(c, 1) for c in costs[-8:]])
