"""Age-structure similarity between countries and the World under Aitchison geometry."""
from .coda import (
    ClrVector,
    Composition,
    aitchison_distance,
    closure,
    clr,
    clr_inverse,
    euclidean_distance,
    geometric_mean,
    perturbation,
    zero_replace,
)
from .demographics import AgePyramid, Entity, PyramidSeries, parse_fixture_table, parse_wpp_csv, pyramid_to_composition
from .analysis import distance_trajectory, epitome_table, similarity_map_values
from .clustering import cluster_centroids, cut_tree, pairwise_distance_matrix, ward_linkage

__version__ = "0.1.0"
