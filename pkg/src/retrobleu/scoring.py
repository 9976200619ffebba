"""Route scores: the n-gram overlap metric and the four baselines.

The headline score rewards short routes whose reaction windows are backed
by precedent::

    score(r) = exp(L / max(L, len(r))) + exp(f_n(r))

where ``len(r)`` is the number of reactions, ``L`` the length pivot and
``f_n`` the fraction of the route's n-gram windows found in the known
database.  Both terms saturate at ``e``, so scores live in ``(2, 2e]`` and
the maximum ``2e`` is reached exactly when ``len(r) <= L`` and ``f_n = 1``.

Baselines: a cost recursion over the tree (fixed step cost inflated by an
assumed yield), the summed log-probabilities of the single-step model, the
plain reaction count, and the bare bigram overlap ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

from . import _kernels
from .errors import ArityMismatchError, ProbOutOfRangeError
from .ngramdb import NgramDatabase
from .routes import ReactionNode, RouteTree, TokenKind, flatten_reactions

__all__ = [
    "ScoreConfig",
    "ScoreReport",
    "ngram_fraction",
    "retro_bleu",
    "badowski_cost",
    "cumulative_log_prob",
    "length_score",
    "bigram_ratio_score",
    "score_route",
]


@dataclass(frozen=True)
class ScoreConfig:
    """Metric parameters.

    :param L: length pivot; routes longer than this are penalised
    :param n: default n-gram order used when building databases
    :param token_kind: default token kind used when building databases
    :param epsilon: fixed cost of performing one reaction
    :param yield_assumed: heuristic per-reaction yield in (0, 1]
    :param prob_floor: probability substituted for reactions the single-step
        model could not predict

    Scoring operations read the extraction order, kind and radius from the
    database they are given; ``n`` and ``token_kind`` here are the
    configuration-level defaults used when a database is constructed.
    """

    L: int = 3
    n: int = 2
    token_kind: TokenKind = TokenKind.TEMPLATE
    epsilon: float = 1.0
    yield_assumed: float = 0.8
    prob_floor: float = 1e-10

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f"L must be at least 1, got {self.L}")
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 0.0 < self.yield_assumed <= 1.0:
            raise ValueError(f"yield_assumed must be in (0, 1], got {self.yield_assumed}")
        if not 0.0 < self.prob_floor < 1.0:
            raise ValueError(f"prob_floor must be in (0, 1), got {self.prob_floor}")


@dataclass(frozen=True)
class ScoreReport:
    """All five scores of one route.

    ``bigram_ratio`` is ``None`` when the report was computed against a
    database of order other than 2, where no bigram evidence is available.
    """

    route_id: str
    retro_bleu: float
    f_n: float
    n_recorded: int
    n_total: int
    badowski: float
    cum_log_prob: float
    length: int
    bigram_ratio: float | None

    CSV_FIELDS = (
        "route_id",
        "retro_bleu",
        "f_n",
        "n_recorded",
        "n_total",
        "badowski",
        "cum_log_prob",
        "length",
        "bigram_ratio",
    )

    def to_dict(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self.CSV_FIELDS}


def ngram_fraction(route: RouteTree, db: NgramDatabase) -> tuple[float, int, int]:
    """Fraction of the route's n-gram windows recorded in the database.

    Returns ``(fraction, recorded, total)``; the fraction is 0 when the
    route is too short to contain any window.

    :raises MissingTokenError: a windowed reaction lacks the database's
        token kind
    """
    tokens, child_off, child_idx = flatten_reactions(route, db.token_kind)
    recorded, total = _kernels.count_recorded_windows(
        tokens, child_off, child_idx, db.n, db.entries
    )
    fraction = recorded / total if total > 0 else 0.0
    return fraction, recorded, total


def retro_bleu(route: RouteTree, db: NgramDatabase, cfg: ScoreConfig) -> float:
    """Length-penalised overlap score; higher is better, maximum ``2e``."""
    fraction, _, _ = ngram_fraction(route, db)
    return _retro_bleu_terms(route.length, fraction, cfg)


def _retro_bleu_terms(length: int, fraction: float, cfg: ScoreConfig) -> float:
    return math.exp(cfg.L / max(cfg.L, length)) + math.exp(fraction)


def badowski_cost(route: RouteTree, cfg: ScoreConfig) -> float:
    """Cost recursion over the tree; lower is better.

    Each reaction costs ``epsilon`` plus the costs of the reactions making
    its reactants, inflated by the assumed yield.  Purchasable leaves are
    free, so convergence is rewarded over long linear sequences.
    """

    def cost(rxn: ReactionNode) -> float:
        return cfg.epsilon + sum(
            cost(child) / cfg.yield_assumed for child in rxn.child_reactions()
        )

    return cost(route.root.children[0])


def cumulative_log_prob(route: RouteTree, cfg: ScoreConfig) -> float:
    """Sum of log single-step probabilities; higher (closer to 0) is better.

    Reactions without a recorded probability contribute
    ``log(cfg.prob_floor)``.

    :raises ProbOutOfRangeError: a probability is outside (0, 1]
    """
    total = 0.0
    for rxn in route.reactions():
        p = rxn.probability if rxn.probability is not None else cfg.prob_floor
        if not 0.0 < p <= 1.0:
            raise ProbOutOfRangeError(f"probability {p} outside (0, 1]")
        total += math.log(p)
    return total


def length_score(route: RouteTree) -> int:
    """Number of reactions; lower is better."""
    return route.length


def bigram_ratio_score(route: RouteTree, db: NgramDatabase) -> float:
    """Recorded fraction of the route's bigrams; higher is better.

    :raises ArityMismatchError: the database order is not 2
    """
    if db.n != 2:
        raise ArityMismatchError(f"bigram ratio needs a 2-gram database, got n={db.n}")
    fraction, _, _ = ngram_fraction(route, db)
    return fraction


def score_route(route: RouteTree, db: NgramDatabase, cfg: ScoreConfig) -> ScoreReport:
    """Compute all five metrics of one route in a single report."""
    fraction, recorded, total = ngram_fraction(route, db)
    length = route.length
    return ScoreReport(
        route_id=route.route_id,
        retro_bleu=_retro_bleu_terms(length, fraction, cfg),
        f_n=fraction,
        n_recorded=recorded,
        n_total=total,
        badowski=badowski_cost(route, cfg),
        cum_log_prob=cumulative_log_prob(route, cfg),
        length=length,
        bigram_ratio=fraction if db.n == 2 else None,
    )
