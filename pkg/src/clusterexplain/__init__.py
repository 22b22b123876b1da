"""Explainable clustering: cluster, train a classifier on the cluster labels,
and test which features it significantly relies on for each cluster."""
from .centroid import CentroidReport, centroid, difference_scores, overlap, top_k_by_difference
from .clustering import (ClusterAssignment, adjusted_rand_index, agglomerative_ward, drop_small_clusters, kmeans,
                         load_assignment, save_assignment)
from .data import (Dataset, ScalingParams, SplitSpec, add_intercept, load_csv, one_hot_encode, save_csv, split,
                   standardize)
from .errors import *  # noqa: F401,F403
from .fcps import FcpsShape, GenSpec, generate, shape_catalog
from .mlp import MlpConfig, MlpModel, accuracy, load_model, loss, losses, predict, predict_proba, save_model, train
from .pipeline import PipelineConfig, PipelineReport, config_from_dict, load_config, render_report, run_pipeline
from .sfit import (SfitEntry, SfitParams, SfitReport, binom_test_greater, mask, median_ci, rank_features, sfit,
                   sfit_first_order, sfit_higher_order, sfit_per_cluster)

__version__ = "0.1.0"
