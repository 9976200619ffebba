"""Ranking harness: per-target route ranking, top-k tables, corpus stats.

For each target the reference route joins the candidate pool and every
route is scored under one metric.  Because several routes can share a
score, the reference's rank is reported as a best/worst pair: best assumes
the reference sorts first within its tie group, worst assumes it sorts
last.  Top-k accuracies are then computed for both scenarios.
"""

from __future__ import annotations

import enum
import math
from array import array
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ArityMismatchError, EmptyInputError, KindMismatchError, MixedRadiusError
from .ngramdb import NgramDatabase, split_key
from .routes import RouteTree
from .scoring import (
    ScoreConfig,
    badowski_cost,
    bigram_ratio_score,
    cumulative_log_prob,
    length_score,
    ngram_fraction,
    retro_bleu,
)

__all__ = [
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


class Metric(str, enum.Enum):
    RETRO_BLEU = "retro_bleu"
    BADOWSKI = "badowski"
    CUM_LOG_PROB = "cum_log_prob"
    LENGTH = "length"
    BIGRAM_RATIO = "bigram_ratio"


# Fixed per-metric ordering direction; never configurable, so a silent
# inversion cannot creep in.
HIGHER_IS_BETTER = {
    Metric.RETRO_BLEU: True,
    Metric.BADOWSKI: False,
    Metric.CUM_LOG_PROB: True,
    Metric.LENGTH: False,
    Metric.BIGRAM_RATIO: True,
}


@dataclass(frozen=True)
class TargetCase:
    """A reference route and the candidate pool it is ranked against."""

    target_id: str
    reference_route: RouteTree
    candidates: tuple[RouteTree, ...]

    def __post_init__(self) -> None:
        if not self.candidates:
            raise EmptyInputError(f"target {self.target_id}: no candidate routes")


@dataclass(frozen=True)
class RankingResult:
    """Best/worst-case rank of the reference within the pool."""

    target_id: str
    metric: Metric
    best_rank: int
    worst_rank: int
    pool_size: int

    CSV_FIELDS = ("target_id", "metric", "best_rank", "worst_rank", "pool_size")

    def to_dict(self) -> dict[str, object]:
        return {
            "target_id": self.target_id,
            "metric": self.metric.value,
            "best_rank": self.best_rank,
            "worst_rank": self.worst_rank,
            "pool_size": self.pool_size,
        }


@dataclass(frozen=True)
class OverlapStats:
    """Corpus-level overlap summary for one database order."""

    n: int
    mean_fraction: float
    coverage: float
    avg_length: float

    CSV_FIELDS = ("n", "mean_fraction", "coverage", "avg_length")

    def to_dict(self) -> dict[str, object]:
        return {name: getattr(self, name) for name in self.CSV_FIELDS}


@dataclass(frozen=True)
class TopkEntry:
    k: int
    best_accuracy: float
    worst_accuracy: float


def metric_score(
    route: RouteTree, metric: Metric, db: NgramDatabase, cfg: ScoreConfig
) -> float:
    """Score one route under one metric."""
    if metric is Metric.RETRO_BLEU:
        return retro_bleu(route, db, cfg)
    if metric is Metric.BADOWSKI:
        return badowski_cost(route, cfg)
    if metric is Metric.CUM_LOG_PROB:
        return cumulative_log_prob(route, cfg)
    if metric is Metric.LENGTH:
        return float(length_score(route))
    return bigram_ratio_score(route, db)


def rank_from_scores(
    ref_score: float, candidate_scores: Sequence[float], higher_is_better: bool
) -> tuple[int, int]:
    """Best/worst-case rank of the reference given raw scores.

    ``best_rank`` is 1 plus the number of strictly better candidates;
    ``worst_rank`` is the pool size minus the number of strictly worse
    candidates, so ties are captured by the spread between the two.  Only
    score order matters, never magnitude.
    """
    better = 0
    worse = 0
    for score in candidate_scores:
        if score == ref_score:
            continue
        if (score > ref_score) == higher_is_better:
            better += 1
        else:
            worse += 1
    pool_size = len(candidate_scores) + 1
    return 1 + better, pool_size - worse


def rank_case(
    case: TargetCase, metric: Metric, db: NgramDatabase, cfg: ScoreConfig
) -> RankingResult:
    """Rank the reference among reference plus candidates under a metric."""
    ref_score = metric_score(case.reference_route, metric, db, cfg)
    scores = [
        metric_score(candidate, metric, db, cfg) for candidate in case.candidates
    ]
    best_rank, worst_rank = rank_from_scores(ref_score, scores, HIGHER_IS_BETTER[metric])
    return RankingResult(
        target_id=case.target_id,
        metric=metric,
        best_rank=best_rank,
        worst_rank=worst_rank,
        pool_size=len(case.candidates) + 1,
    )


def topk_table(results: Sequence[RankingResult], ks: Sequence[int]) -> list[TopkEntry]:
    """Fraction of references ranked within k, best and worst case.

    :raises EmptyInputError: no results given
    """
    if not results:
        raise EmptyInputError("no ranking results to tabulate")
    metrics = {result.metric for result in results}
    if len(metrics) > 1:
        raise ValueError(f"mixed metrics in one table: {sorted(m.value for m in metrics)}")
    total = len(results)
    table = []
    for k in ks:
        best = sum(1 for result in results if result.best_rank <= k)
        worst = sum(1 for result in results if result.worst_rank <= k)
        table.append(TopkEntry(k=k, best_accuracy=best / total, worst_accuracy=worst / total))
    return table


def aggregate_overlap(
    corpus: Iterable[RouteTree], db: NgramDatabase, n: int | None = None
) -> OverlapStats:
    """Average overlap fraction, coverage and length over a corpus.

    Routes with no window of the database's order contribute a fraction of
    0 to the mean and count as uncovered, so the mean stays defined over
    the whole corpus while coverage records how many routes were affected.

    :raises ArityMismatchError: ``n`` is given and differs from ``db.n``
    :raises EmptyInputError: the corpus is empty
    """
    if n is not None and n != db.n:
        raise ArityMismatchError(f"requested n={n} against a {db.n}-gram database")
    covered = 0
    length_sum = 0
    fractions = array("d")
    for route in corpus:
        fraction, _, total = ngram_fraction(route, db)
        fractions.append(fraction)
        length_sum += route.length
        if total > 0:
            covered += 1
    route_count = len(fractions)
    if route_count == 0:
        raise EmptyInputError("empty route corpus")
    # fsum keeps the mean exactly order-invariant
    return OverlapStats(
        n=db.n,
        mean_fraction=math.fsum(fractions) / route_count,
        coverage=covered / route_count,
        avg_length=length_sum / route_count,
    )


def mine_bigram_diff(
    known_db: NgramDatabase, generated_db: NgramDatabase, k: int
) -> tuple[list[tuple[tuple[str, ...], int]], list[tuple[tuple[str, ...], int]]]:
    """Most frequent known n-grams and most frequent unknown ones.

    The positive list holds the top-k entries of the known database.  The
    negative list holds the top-k entries of the generated database whose
    keys the known database has never seen.  Ties break by token order.

    :raises KindMismatchError: token kinds differ
    :raises ArityMismatchError: orders differ
    """
    if known_db.token_kind != generated_db.token_kind:
        raise KindMismatchError(
            f"token kinds differ: {known_db.token_kind.value} vs "
            f"{generated_db.token_kind.value}"
        )
    if known_db.n != generated_db.n:
        raise ArityMismatchError(
            f"database orders differ: {known_db.n} vs {generated_db.n}"
        )
    if known_db.template_radius != generated_db.template_radius:
        raise MixedRadiusError(
            f"template radii differ: {known_db.template_radius} vs "
            f"{generated_db.template_radius}"
        )
    positive = _ranked(known_db.entries)[:k]
    novel = {
        key: count
        for key, count in generated_db.entries.items()
        if key not in known_db.entries
    }
    negative = _ranked(novel)[:k]
    return positive, negative


def _ranked(entries: dict[str, int]) -> list[tuple[tuple[str, ...], int]]:
    ranked = sorted(entries.items(), key=lambda item: (-item[1], split_key(item[0])))
    return [(split_key(key), count) for key, count in ranked]
