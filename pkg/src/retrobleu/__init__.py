"""Retro-BLEU style route scoring for retrosynthesis planning.

Routes are trees of alternating molecule and reaction nodes.  The package
parses them from an interchange JSON format, tallies reaction or template
n-grams into persistent databases, scores routes by n-gram overlap with
known sequences, and ranks candidate routes per target with best/worst
case tie handling.
"""

from .errors import (
    AlternationViolationError,
    ArityMismatchError,
    BadMagicError,
    CorruptRecordError,
    EmptyInputError,
    EmptyRouteError,
    KindMismatchError,
    MalformedJsonError,
    MissingFieldError,
    MissingTokenError,
    MixedRadiusError,
    ProbOutOfRangeError,
    RetroBleuError,
    VersionMismatchError,
)
from .ngramdb import NgramDatabase, build_db, contains, load_db, merge, save_db
from .ranking import (
    Metric,
    OverlapStats,
    RankingResult,
    TargetCase,
    TopkEntry,
    aggregate_overlap,
    metric_score,
    mine_bigram_diff,
    rank_case,
    rank_from_scores,
    topk_table,
)
from .routes import (
    MoleculeNode,
    Ngram,
    ReactionNode,
    RouteTree,
    TokenKind,
    count_ngrams,
    extract_ngrams,
    parse_route,
    parse_routes,
    route_length,
    serialize_route,
)
from .scoring import (
    ScoreConfig,
    ScoreReport,
    badowski_cost,
    bigram_ratio_score,
    cumulative_log_prob,
    length_score,
    ngram_fraction,
    retro_bleu,
    score_route,
)

__version__ = "1.0.0"

__all__ = [
    "__version__",
    # errors
    "RetroBleuError",
    "MalformedJsonError",
    "MissingFieldError",
    "AlternationViolationError",
    "EmptyRouteError",
    "MissingTokenError",
    "MixedRadiusError",
    "ArityMismatchError",
    "KindMismatchError",
    "ProbOutOfRangeError",
    "BadMagicError",
    "VersionMismatchError",
    "CorruptRecordError",
    "EmptyInputError",
    # route model
    "TokenKind",
    "MoleculeNode",
    "ReactionNode",
    "RouteTree",
    "Ngram",
    "parse_route",
    "parse_routes",
    "serialize_route",
    "route_length",
    "extract_ngrams",
    "count_ngrams",
    # database
    "NgramDatabase",
    "build_db",
    "contains",
    "merge",
    "save_db",
    "load_db",
    # scoring
    "ScoreConfig",
    "ScoreReport",
    "ngram_fraction",
    "retro_bleu",
    "badowski_cost",
    "cumulative_log_prob",
    "length_score",
    "bigram_ratio_score",
    "score_route",
    # ranking
    "Metric",
    "TargetCase",
    "RankingResult",
    "OverlapStats",
    "TopkEntry",
    "metric_score",
    "rank_from_scores",
    "rank_case",
    "topk_table",
    "aggregate_overlap",
    "mine_bigram_diff",
]
