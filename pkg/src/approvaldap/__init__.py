"""Saturation-aware agreement, diversity, and polarization analysis of
approval elections: index computation, statistical-culture generators,
real-world data ingestion, and the map-of-elections experiments."""

from .agreement import (
    av_agr,
    central_vote,
    cntr_agr,
    cntr_agr_closed_form,
    jacc_agr,
    pair_agr,
    pair_agr_naive,
    pcc_agr,
    pccplus_agr,
)
from .clustering import Partition, kmedoids_hamming, spectral_pcc, weighted_cluster_agreement
from .core import Election, ElectionStats, approval_score, reverse, stats, subsample
from .divpol import (
    OuterDiversityConfig,
    a_div,
    a_pol,
    cntr_div,
    cntr_pol,
    ham_single_to_unc,
    out_div,
    pair_pol,
    pcc_div,
    pcc_pol,
)
from .experiments import (
    INDEX_NAMES,
    Embedding,
    FeatureVector,
    complementarity,
    correlations,
    evaluate_index,
    feature_distance,
    feature_vector,
    index_table,
    map_of_elections,
    mds_embed,
    resampling_experiment,
    synthetic_map_entries,
)
from .generators import CultureSpec, sample
from .io import ParseError, parse_pabulib, read_native, threshold_scores, write_native
from .metrics import PairCounts, hamming, jaccard, pcc, pcc_from_hamming

__version__ = "0.1.0"

__all__ = [
    "Election",
    "ElectionStats",
    "approval_score",
    "stats",
    "reverse",
    "subsample",
    "PairCounts",
    "hamming",
    "jaccard",
    "pcc",
    "pcc_from_hamming",
    "av_agr",
    "central_vote",
    "cntr_agr",
    "cntr_agr_closed_form",
    "pair_agr",
    "pair_agr_naive",
    "jacc_agr",
    "pcc_agr",
    "pccplus_agr",
    "Partition",
    "kmedoids_hamming",
    "spectral_pcc",
    "weighted_cluster_agreement",
    "OuterDiversityConfig",
    "a_div",
    "a_pol",
    "cntr_div",
    "pcc_div",
    "cntr_pol",
    "pcc_pol",
    "pair_pol",
    "ham_single_to_unc",
    "out_div",
    "CultureSpec",
    "sample",
    "ParseError",
    "parse_pabulib",
    "threshold_scores",
    "write_native",
    "read_native",
    "INDEX_NAMES",
    "evaluate_index",
    "FeatureVector",
    "Embedding",
    "feature_vector",
    "feature_distance",
    "mds_embed",
    "resampling_experiment",
    "index_table",
    "map_of_elections",
    "synthetic_map_entries",
    "complementarity",
    "correlations",
    "__version__",
]
