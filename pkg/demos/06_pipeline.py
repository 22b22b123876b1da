"""The whole method from one config: cluster, train, explain, compare.

Writes its reports to ./pipeline_demo_out and prints the text tables.
"""
from clusterexplain import config_from_dict, render_report, run_pipeline

config = {
    "seed": 5,
    "input": {"generate": {"shape": "Lsun", "n": 600}},
    "clustering": {"algorithm": "ward", "k": 3, "min_cluster_size": 10},
    "split": {"fractions": [0.7, 0.15, 0.15]},
    "mlp": {"hidden_sizes": [50, 25, 10], "max_epochs": 50},
    "sfit": {"alpha": 0.05, "beta": 0.05, "max_order": 2},
    "top_k": 2,
    "output_dir": "pipeline_demo_out",
}

report = run_pipeline(config_from_dict(config))
print(render_report(report.output_dir))
print("ARI of Ward vs generator labels:", report.summary["clustering"]["ari"])
