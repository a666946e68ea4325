"""Recursive partition based K-means (RPKM) with distance-computation accounting."""

from .baselines import MBParams, kmeanspp_init, lloyd, minibatch_kmeans
from .core import (
    DegenerateErrorError,
    DistanceCounter,
    EmptyClusterError,
    UnresolvableEmptyClusterError,
    centroid_error,
    clustering_error,
    full_error,
    induce_assignment,
    induce_centroids,
    squared_distance,
    std_error,
)
from .data_io import MixtureSpec, SubsampleSpec, generate_mixture, load_csv
from .grid import bounding_box, build_sequence, cell_index
from .lloyd import WLParams, WLResult, repair_empty_clusters, weighted_lloyd
from .rpkm import InfeasibleError, RPKMParams, RPKMResult, displacement, forgy_init, rpkm

__version__ = "0.1.0"

__all__ = [
    "DegenerateErrorError", "DistanceCounter", "EmptyClusterError", "InfeasibleError",
    "MBParams", "MixtureSpec", "RPKMParams", "SubsampleSpec", "RPKMResult", "UnresolvableEmptyClusterError", "WLParams",
    "WLResult", "bounding_box", "build_sequence", "cell_index", "centroid_error",
    "clustering_error", "displacement", "forgy_init", "full_error", "generate_mixture",
    "induce_assignment",
    "induce_centroids", "kmeanspp_init", "lloyd", "load_csv", "minibatch_kmeans",
    "repair_empty_clusters", "rpkm", "squared_distance", "std_error", "weighted_lloyd",
]
