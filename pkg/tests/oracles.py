"""Independent brute-force oracles the library implementations are checked
against.  These deliberately avoid the library's own traversal helpers:
they work directly on the node structure with explicit path enumeration.
"""

from __future__ import annotations

from collections import Counter

from retrobleu.routes import ReactionNode, RouteTree, TokenKind


def root_to_leaf_reaction_paths(route: RouteTree) -> list[list[ReactionNode]]:
    """Every maximal reaction path from a top reaction down to a leaf reaction."""
    paths: list[list[ReactionNode]] = []

    def walk(rxn: ReactionNode, acc: list[ReactionNode]) -> None:
        acc = acc + [rxn]
        child_rxns = [r for mol in rxn.children for r in mol.children]
        if not child_rxns:
            paths.append(acc)
        for child in child_rxns:
            walk(child, acc)

    for top in route.root.children:
        walk(top, [])
    return paths


def oracle_windows(route: RouteTree, n: int) -> list[tuple[ReactionNode, ...]]:
    """All sliding windows over root-to-leaf paths, deduplicated by node identity."""
    seen: set[tuple[int, ...]] = set()
    windows: list[tuple[ReactionNode, ...]] = []
    for path in root_to_leaf_reaction_paths(route):
        for i in range(len(path) - n + 1):
            window = tuple(path[i : i + n])
            key = tuple(id(node) for node in window)
            if key not in seen:
                seen.add(key)
                windows.append(window)
    return windows


def oracle_token_windows(route: RouteTree, n: int, kind: TokenKind) -> list[tuple[str, ...]]:
    token_attr = "reaction_smiles" if kind is TokenKind.REACTION else "template"
    return [
        tuple(getattr(node, token_attr) for node in window)
        for window in oracle_windows(route, n)
    ]


def oracle_tally(routes, n: int, kind: TokenKind) -> Counter:
    """Corpus-wide window tally, the reference for database builds."""
    counts: Counter = Counter()
    for route in routes:
        counts.update(oracle_token_windows(route, n, kind))
    return counts


def oracle_rank(ref_score: float, candidate_scores, higher_is_better: bool) -> tuple[int, int]:
    """Sort-and-scan rank bounds with explicit tie groups."""
    pool = [(ref_score, True)] + [(s, False) for s in candidate_scores]
    ordered = sorted(pool, key=lambda item: item[0], reverse=higher_is_better)
    values = [score for score, _ in ordered]
    ref_positions = [i for i, (_, is_ref) in enumerate(ordered) if is_ref]
    assert len(ref_positions) == 1
    pos = ref_positions[0]
    tie_start = pos
    while tie_start > 0 and values[tie_start - 1] == values[pos]:
        tie_start -= 1
    tie_end = pos
    while tie_end + 1 < len(values) and values[tie_end + 1] == values[pos]:
        tie_end += 1
    return tie_start + 1, tie_end + 1
