"""Movie-script emotional arc mining.

Pipeline: subtitle ingestion and quality filtering, ternary valence
scoring, DCT low-pass arc extraction, functional k-means with archetype
labeling, and a statistical battery relating arcs to movie success.
"""

__version__ = "0.1.0"

from .archetypes import Archetype, ArchetypeLabel, label_centroid, trend_signature
from .arcs import ArcConfig, EmotionalArc, compute_arc, dct_forward, low_pass_reconstruct
from .clustering import (
    ClusterConfig,
    ClusterModel,
    QuadratureWeights,
    kmeans_cluster,
    l2_distance,
    silhouette_score,
    simpson_weight_vector,
    sweep_k,
)
from .corpus import (
    CorpusRecord,
    FilterPolicy,
    FilterReport,
    MovieRecord,
    SubtitleCue,
    SubtitleDocument,
    UploaderRank,
    apply_quality_filters,
    clean_text,
    join_metadata,
    load_metadata_csv,
    parse_srt,
)
from .sentiment import (
    Lexicon,
    RawValenceSeries,
    load_lexicon,
    score_document,
    score_sentence,
    segment_sentences,
)
from .stats import (
    BudgetBin,
    HeatCell,
    RegressionResult,
    SummaryCell,
    TestResult,
    bin_budget,
    genre_partition,
    heat_code,
    ks_two_sample,
    mann_whitney,
    ols,
    series_of_dummy_ols,
    summarize_groups,
)

__all__ = [
    "__version__",
    "Archetype", "ArchetypeLabel", "label_centroid", "trend_signature",
    "ArcConfig", "EmotionalArc", "compute_arc", "dct_forward", "low_pass_reconstruct",
    "ClusterConfig", "ClusterModel", "QuadratureWeights", "kmeans_cluster",
    "l2_distance", "silhouette_score", "simpson_weight_vector", "sweep_k",
    "CorpusRecord", "FilterPolicy", "FilterReport", "MovieRecord",
    "SubtitleCue", "SubtitleDocument", "UploaderRank", "apply_quality_filters",
    "clean_text", "join_metadata", "load_metadata_csv", "parse_srt",
    "Lexicon", "RawValenceSeries", "load_lexicon", "score_document",
    "score_sentence", "segment_sentences",
    "BudgetBin", "HeatCell", "RegressionResult", "SummaryCell", "TestResult",
    "bin_budget", "genre_partition", "heat_code", "ks_two_sample",
    "mann_whitney", "ols", "series_of_dummy_ols", "summarize_groups",
]
