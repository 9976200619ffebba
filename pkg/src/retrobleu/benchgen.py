"""Deterministic synthetic fixtures: random routes, corpora and benchmarks.

Everything here is seeded, so fixtures are reproducible across runs and
platforms.  The ranking benchmark plants recorded bigrams in reference
routes and hands candidates mostly novel tokens, which separates
overlap-aware scoring from the plain length baseline by construction.
"""

from __future__ import annotations

import random
from typing import Sequence

from .ngramdb import NgramDatabase
from .ranking import TargetCase
from .routes import MoleculeNode, ReactionNode, RouteTree, TokenKind

__all__ = [
    "random_route",
    "random_linear_route",
    "make_throughput_fixture",
    "make_ranking_benchmark",
]


def _partition(rng: random.Random, total: int, parts: int) -> list[int]:
    if parts == 1:
        return [total]
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    bounds = [0] + cuts + [total]
    return [bounds[i + 1] - bounds[i] for i in range(parts)]


class _StepTokens:
    """Hands out per-step tokens in reaction creation order (pre-order)."""

    def __init__(self, templates: Sequence[str] | None, prefix: str):
        self._templates = templates
        self._prefix = prefix
        self._next = 0

    def take(self) -> tuple[str, str]:
        i = self._next
        self._next += 1
        template = (
            self._templates[i] if self._templates is not None else f"{self._prefix}t{i}"
        )
        # reaction tokens stay route-unique even when templates are planted
        return f"{self._prefix}r{i}", template


def _build_reaction(
    rng: random.Random,
    budget: int,
    steps: _StepTokens,
    max_reactants: int,
    with_probabilities: bool,
    patent_id: str | None,
    mol_counter: list[int],
) -> ReactionNode:
    reaction_smiles, template = steps.take()
    n_reactants = rng.randint(1, max_reactants)
    sub_budgets = _partition(rng, budget - 1, n_reactants)
    children = []
    for sub in sub_budgets:
        mol_counter[0] += 1
        smiles = f"M{mol_counter[0]}"
        if sub == 0:
            children.append(MoleculeNode(smiles=smiles, in_stock=True))
        else:
            rxn = _build_reaction(
                rng, sub, steps, max_reactants, with_probabilities, patent_id, mol_counter
            )
            children.append(MoleculeNode(smiles=smiles, children=(rxn,)))
    return ReactionNode(
        children=tuple(children),
        reaction_smiles=reaction_smiles,
        template=template,
        template_radius=1,
        probability=rng.uniform(0.01, 1.0) if with_probabilities else None,
        patent_id=patent_id,
    )


def random_route(
    rng: random.Random,
    n_reactions: int,
    route_id: str | None = None,
    max_reactants: int = 3,
    templates: Sequence[str] | None = None,
    with_probabilities: bool = False,
    patent_id: str | None = None,
) -> RouteTree:
    """Build a random route with exactly ``n_reactions`` reactions.

    Branching is random; every reaction carries both a reaction token and a
    template token.  ``templates`` overrides the template of step i (in
    reaction pre-order) when given.
    """
    if n_reactions < 1:
        raise ValueError("a route needs at least one reaction")
    steps = _StepTokens(templates, prefix=f"{route_id or 'r'}_")
    mol_counter = [0]
    root_rxn = _build_reaction(
        rng, n_reactions, steps, max_reactants, with_probabilities, patent_id, mol_counter
    )
    root = MoleculeNode(smiles="TARGET", children=(root_rxn,))
    patents = frozenset({patent_id}) if patent_id else frozenset()
    return RouteTree(
        root=root,
        route_id=route_id or f"synthetic-{rng.getrandbits(48):012x}",
        source_patent_ids=patents,
    )


def random_linear_route(
    rng: random.Random,
    n_reactions: int,
    route_id: str | None = None,
    templates: Sequence[str] | None = None,
    with_probabilities: bool = False,
    patent_id: str | None = None,
    extra_leaves: bool = True,
) -> RouteTree:
    """Build a single-chain route: each reaction feeds exactly one parent.

    Extra purchasable reactants are attached at random when
    ``extra_leaves`` is set; they never open a second reaction branch.
    Step 0 (and ``templates[0]``) is the product-side reaction.
    """
    if n_reactions < 1:
        raise ValueError("a route needs at least one reaction")
    steps = _StepTokens(templates, prefix=f"{route_id or 'r'}_")
    mol_counter = [0]

    def build(depth: int) -> ReactionNode:
        reaction_smiles, template = steps.take()
        mol_counter[0] += 1
        smiles = f"M{mol_counter[0]}"
        if depth == n_reactions - 1:
            chain_mol = MoleculeNode(smiles=smiles, in_stock=True)
        else:
            chain_mol = MoleculeNode(smiles=smiles, children=(build(depth + 1),))
        children = [chain_mol]
        if extra_leaves:
            for _ in range(rng.randint(0, 2)):
                mol_counter[0] += 1
                children.append(MoleculeNode(smiles=f"M{mol_counter[0]}", in_stock=True))
        return ReactionNode(
            children=tuple(children),
            reaction_smiles=reaction_smiles,
            template=template,
            template_radius=1,
            probability=rng.uniform(0.01, 1.0) if with_probabilities else None,
            patent_id=patent_id,
        )

    root = MoleculeNode(smiles="TARGET", children=(build(0),))
    patents = frozenset({patent_id}) if patent_id else frozenset()
    return RouteTree(
        root=root,
        route_id=route_id or f"linear-{rng.getrandbits(48):012x}",
        source_patent_ids=patents,
    )


def make_throughput_fixture(
    n_routes: int,
    db_size: int,
    seed: int = 20240901,
    vocab_size: int = 30000,
) -> tuple[list[RouteTree], NgramDatabase]:
    """Synthetic scoring workload: many routes against a large database."""
    rng = random.Random(seed)
    entries: dict[str, int] = {}
    while len(entries) < db_size:
        a = rng.randrange(vocab_size)
        b = rng.randrange(vocab_size)
        entries[f"T{a}\tT{b}"] = rng.randint(1, 50)
    db = NgramDatabase(
        n=2,
        token_kind=TokenKind.TEMPLATE,
        entries=entries,
        source_route_count=db_size,
        template_radius=1,
    )
    routes = []
    for i in range(n_routes):
        length = rng.randint(2, 7)
        templates = [f"T{rng.randrange(vocab_size)}" for _ in range(length)]
        routes.append(
            random_route(
                rng,
                length,
                route_id=f"load-{i}",
                templates=templates,
                with_probabilities=True,
            )
        )
    return routes, db


_CANDIDATE_LENGTHS = (2, 3, 4, 5, 6, 7)
_CANDIDATE_WEIGHTS = (0.06, 0.22, 0.28, 0.22, 0.14, 0.08)


def make_ranking_benchmark(
    n_targets: int = 200,
    n_candidates: int = 20,
    seed: int = 20240902,
    n_motifs: int = 400,
    motif_length: int = 6,
    novel_insert_prob: float = 0.02,
) -> tuple[list[TargetCase], NgramDatabase]:
    """Ranking benchmark with planted evidence.

    References are subsequences of known token motifs, so all their
    bigrams are recorded.  Candidates draw novel tokens and only rarely
    (``novel_insert_prob``) pick up one recorded bigram, while their
    lengths straddle the reference lengths.
    """
    rng = random.Random(seed)
    motifs = [
        [f"k{m}_{i}" for i in range(motif_length)] for m in range(n_motifs)
    ]
    entries: dict[str, int] = {}
    for motif in motifs:
        weight = rng.randint(1, 200)
        for a, b in zip(motif, motif[1:]):
            entries[f"{a}\t{b}"] = entries.get(f"{a}\t{b}", 0) + weight
    db = NgramDatabase(
        n=2,
        token_kind=TokenKind.TEMPLATE,
        entries=entries,
        source_route_count=n_motifs,
        template_radius=1,
    )

    cases = []
    for t in range(n_targets):
        ref_length = rng.choice((3, 4))
        motif = rng.choice(motifs)
        start = rng.randint(0, motif_length - ref_length)
        reference = random_linear_route(
            rng,
            ref_length,
            route_id=f"target{t}-reference",
            templates=motif[start : start + ref_length],
            with_probabilities=True,
        )
        candidates = []
        for c in range(n_candidates):
            length = rng.choices(_CANDIDATE_LENGTHS, weights=_CANDIDATE_WEIGHTS)[0]
            templates = [f"g{t}_{c}_{i}" for i in range(length)]
            if rng.random() < novel_insert_prob:
                motif2 = rng.choice(motifs)
                j = rng.randint(0, motif_length - 2)
                pos = rng.randint(0, length - 2)
                templates[pos] = motif2[j]
                templates[pos + 1] = motif2[j + 1]
            candidates.append(
                random_linear_route(
                    rng,
                    length,
                    route_id=f"target{t}-cand{c}",
                    templates=templates,
                    with_probabilities=True,
                )
            )
        cases.append(
            TargetCase(
                target_id=f"target{t}",
                reference_route=reference,
                candidates=tuple(candidates),
            )
        )
    return cases, db
