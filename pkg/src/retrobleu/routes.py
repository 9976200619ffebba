"""Route trees: parsing, validation, traversal and n-gram enumeration.

A route is a bipartite tree rooted at the target molecule.  Molecule nodes
and reaction nodes strictly alternate: a molecule is either a purchasable
leaf or carries exactly one reaction that produces it, and a reaction
consumes one or more reactant molecules.

The interchange format is JSON.  Every node is an object with a ``type``
key of ``"mol"`` or ``"reaction"``.  Molecule nodes carry ``smiles``
(required), ``in_stock`` (optional, default false) and ``children`` (an
array holding at most one reaction).  Reaction nodes carry ``children``
(an array of one or more molecules) and an optional ``metadata`` object
with the keys ``reaction_smiles``, ``template``, ``template_radius``,
``policy_probability`` and ``patent_id``.  Unknown metadata keys are
preserved on round-trip.  A route file holds either a single root
molecule object or an array of them.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping

from .errors import (
    AlternationViolationError,
    EmptyRouteError,
    MalformedJsonError,
    MissingFieldError,
    MissingTokenError,
)

__all__ = [
    "TokenKind",
    "MoleculeNode",
    "ReactionNode",
    "RouteTree",
    "Ngram",
    "parse_route",
    "parse_routes",
    "route_from_dict",
    "route_to_dict",
    "serialize_route",
    "route_length",
    "extract_ngrams",
    "count_ngrams",
    "iter_reaction_chains",
    "flatten_reactions",
]


class TokenKind(str, enum.Enum):
    """Which per-reaction token an n-gram is built from."""

    REACTION = "reaction"
    TEMPLATE = "template"


@dataclass(frozen=True)
class ReactionNode:
    """A reaction step consuming one or more reactant molecules.

    :param children: the reactant molecules, in file order
    :param reaction_smiles: reaction SMILES token, if known
    :param template: reaction template SMARTS token, if known
    :param template_radius: radius the template was extracted at (0 to 2)
    :param probability: single-step model confidence in (0, 1]
    :param patent_id: identifier of the patent the step was taken from
    :param extra_metadata: unrecognised metadata keys, kept for round-trip
    """

    children: tuple[MoleculeNode, ...]
    reaction_smiles: str | None = None
    template: str | None = None
    template_radius: int | None = None
    probability: float | None = None
    patent_id: str | None = None
    extra_metadata: Mapping[str, Any] = field(default_factory=dict)

    def token(self, kind: TokenKind) -> str:
        """Return the token of the requested kind, raising if absent."""
        value = self.reaction_smiles if kind is TokenKind.REACTION else self.template
        if not value:
            raise MissingTokenError(
                f"reaction node has no {kind.value} token"
            )
        return value

    def child_reactions(self) -> Iterator[ReactionNode]:
        """Yield the reactions producing this step's reactants."""
        for mol in self.children:
            yield from mol.children


@dataclass(frozen=True)
class MoleculeNode:
    """A molecule, either a starting material or an intermediate.

    :param smiles: canonical SMILES, treated as an opaque token
    :param in_stock: whether the molecule is purchasable
    :param children: at most one reaction producing this molecule
    """

    smiles: str
    in_stock: bool = False
    children: tuple[ReactionNode, ...] = ()


@dataclass(frozen=True)
class RouteTree:
    """An immutable retrosynthesis route rooted at the target molecule.

    :param root: the target molecule
    :param route_id: stable identifier; defaults to a content hash at parse
    :param source_patent_ids: patent ids attached to any reaction in the tree
    """

    root: MoleculeNode
    route_id: str
    source_patent_ids: frozenset[str] = frozenset()

    def reactions(self) -> Iterator[ReactionNode]:
        """Yield all reaction nodes in depth-first pre-order."""
        stack = list(reversed(self.root.children))
        while stack:
            rxn = stack.pop()
            yield rxn
            stack.extend(reversed(list(rxn.child_reactions())))

    def molecules(self) -> Iterator[MoleculeNode]:
        """Yield all molecule nodes in depth-first pre-order."""
        stack = [self.root]
        while stack:
            mol = stack.pop()
            yield mol
            for rxn in reversed(mol.children):
                stack.extend(reversed(rxn.children))

    @property
    def length(self) -> int:
        return sum(1 for _ in self.reactions())


@dataclass(frozen=True)
class Ngram:
    """An ordered window of reaction tokens, product side first.

    :param tokens: the n tokens, position 0 being the product-side reaction
    :param token_kind: which per-reaction token the window was built from
    """

    tokens: tuple[str, ...]
    token_kind: TokenKind

    def __post_init__(self) -> None:
        if len(self.tokens) < 2:
            raise ValueError("an n-gram needs at least two tokens")
        if any(not tok for tok in self.tokens):
            raise ValueError("n-gram tokens must be non-empty")

    @property
    def n(self) -> int:
        return len(self.tokens)


_KNOWN_METADATA = (
    "reaction_smiles",
    "template",
    "template_radius",
    "policy_probability",
    "patent_id",
)


def _fail_type(path: str, expected: str, value: Any) -> MalformedJsonError:
    return MalformedJsonError(f"{path}: expected {expected}, got {type(value).__name__}")


def _mol_from_dict(obj: Any, path: str) -> MoleculeNode:
    if not isinstance(obj, dict):
        raise _fail_type(path, "an object", obj)
    node_type = obj.get("type")
    if node_type is None:
        raise MissingFieldError(f"{path}: missing 'type'")
    if node_type == "reaction":
        raise AlternationViolationError(f"{path}: reaction node where a molecule is required")
    if node_type != "mol":
        raise MalformedJsonError(f"{path}: unknown node type {node_type!r}")

    smiles = obj.get("smiles")
    if smiles is None or smiles == "":
        raise MissingFieldError(f"{path}: molecule requires a non-empty 'smiles'")
    if not isinstance(smiles, str):
        raise _fail_type(f"{path}.smiles", "a string", smiles)

    in_stock = obj.get("in_stock", False)
    if not isinstance(in_stock, bool):
        raise _fail_type(f"{path}.in_stock", "a boolean", in_stock)

    raw_children = obj.get("children", [])
    if not isinstance(raw_children, list):
        raise _fail_type(f"{path}.children", "an array", raw_children)
    if len(raw_children) > 1:
        raise AlternationViolationError(
            f"{path}: molecule has {len(raw_children)} reaction children, at most 1 allowed"
        )
    children = tuple(
        _reaction_from_dict(child, f"{path}.children[{i}]")
        for i, child in enumerate(raw_children)
    )
    return MoleculeNode(smiles=smiles, in_stock=in_stock, children=children)


def _reaction_from_dict(obj: Any, path: str) -> ReactionNode:
    if not isinstance(obj, dict):
        raise _fail_type(path, "an object", obj)
    node_type = obj.get("type")
    if node_type is None:
        raise MissingFieldError(f"{path}: missing 'type'")
    if node_type == "mol":
        raise AlternationViolationError(f"{path}: molecule node where a reaction is required")
    if node_type != "reaction":
        raise MalformedJsonError(f"{path}: unknown node type {node_type!r}")

    raw_children = obj.get("children")
    if not raw_children:
        raise MissingFieldError(f"{path}: reaction requires at least one reactant child")
    if not isinstance(raw_children, list):
        raise _fail_type(f"{path}.children", "an array", raw_children)

    metadata = obj.get("metadata", {})
    if not isinstance(metadata, dict):
        raise _fail_type(f"{path}.metadata", "an object", metadata)

    reaction_smiles = metadata.get("reaction_smiles")
    if reaction_smiles is not None and not isinstance(reaction_smiles, str):
        raise _fail_type(f"{path}.metadata.reaction_smiles", "a string", reaction_smiles)

    template = metadata.get("template")
    if template is not None and not isinstance(template, str):
        raise _fail_type(f"{path}.metadata.template", "a string", template)

    template_radius = metadata.get("template_radius")
    if template_radius is not None:
        if not isinstance(template_radius, int) or isinstance(template_radius, bool):
            raise _fail_type(f"{path}.metadata.template_radius", "an integer", template_radius)
        if not 0 <= template_radius <= 2:
            raise MalformedJsonError(
                f"{path}.metadata.template_radius: must be between 0 and 2, got {template_radius}"
            )

    probability = metadata.get("policy_probability")
    if probability is not None:
        if not isinstance(probability, (int, float)) or isinstance(probability, bool):
            raise _fail_type(f"{path}.metadata.policy_probability", "a number", probability)
        probability = float(probability)
        if not 0.0 < probability <= 1.0:
            raise MalformedJsonError(
                f"{path}.metadata.policy_probability: must be in (0, 1], got {probability}"
            )

    patent_id = metadata.get("patent_id")
    if patent_id is not None and not isinstance(patent_id, str):
        raise _fail_type(f"{path}.metadata.patent_id", "a string", patent_id)

    extra = {k: v for k, v in metadata.items() if k not in _KNOWN_METADATA}

    children = tuple(
        _mol_from_dict(child, f"{path}.children[{i}]")
        for i, child in enumerate(raw_children)
    )
    return ReactionNode(
        children=children,
        reaction_smiles=reaction_smiles,
        template=template,
        template_radius=template_radius,
        probability=probability,
        patent_id=patent_id,
        extra_metadata=extra,
    )


def route_from_dict(obj: Any, route_id: str | None = None) -> RouteTree:
    """Build and validate a :class:`RouteTree` from a decoded JSON object.

    :param obj: the root molecule object
    :param route_id: identifier to assign; a content hash when omitted
    """
    root = _mol_from_dict(obj, "root")
    patents = frozenset(
        rxn.patent_id
        for rxn in _walk_reactions(root)
        if rxn.patent_id is not None
    )
    tree = RouteTree(root=root, route_id="", source_patent_ids=patents)
    if tree.length == 0:
        raise EmptyRouteError("route contains no reactions")
    if route_id is None:
        digest = hashlib.sha256(serialize_route(tree).encode("utf-8")).hexdigest()
        route_id = f"route-{digest[:12]}"
    return RouteTree(root=root, route_id=route_id, source_patent_ids=patents)


def _walk_reactions(root: MoleculeNode) -> Iterator[ReactionNode]:
    stack = list(root.children)
    while stack:
        rxn = stack.pop()
        yield rxn
        stack.extend(rxn.child_reactions())


def parse_route(text: str | bytes, route_id: str | None = None) -> RouteTree:
    """Parse a single route from interchange JSON.

    Accepts either a root molecule object or a one-element array of them.

    :param text: UTF-8 JSON text
    :param route_id: identifier to assign; a content hash when omitted
    """
    obj = _decode(text)
    if isinstance(obj, list):
        if len(obj) != 1:
            raise MalformedJsonError(
                f"expected a single route, got an array of {len(obj)}"
            )
        obj = obj[0]
    return route_from_dict(obj, route_id)


def parse_routes(text: str | bytes, id_prefix: str | None = None) -> list[RouteTree]:
    """Parse a route file holding one root object or an array of them.

    :param text: UTF-8 JSON text
    :param id_prefix: when given, routes are named ``<prefix>`` for a single
        route or ``<prefix>#<index>`` for an array; otherwise content hashes
        are used
    """
    obj = _decode(text)
    if isinstance(obj, dict):
        return [route_from_dict(obj, id_prefix)]
    if not isinstance(obj, list):
        raise MalformedJsonError(
            f"route file must hold an object or an array, got {type(obj).__name__}"
        )
    routes = []
    for i, entry in enumerate(obj):
        rid = f"{id_prefix}#{i}" if id_prefix is not None else None
        routes.append(route_from_dict(entry, rid))
    return routes


def _decode(text: str | bytes) -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJsonError(f"input is not UTF-8: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJsonError(f"invalid JSON: {exc}") from exc


def _mol_to_dict(mol: MoleculeNode) -> dict[str, Any]:
    out: dict[str, Any] = {"type": "mol", "smiles": mol.smiles, "in_stock": mol.in_stock}
    if mol.children:
        out["children"] = [_reaction_to_dict(rxn) for rxn in mol.children]
    return out


def _reaction_to_dict(rxn: ReactionNode) -> dict[str, Any]:
    metadata: dict[str, Any] = {}
    if rxn.reaction_smiles is not None:
        metadata["reaction_smiles"] = rxn.reaction_smiles
    if rxn.template is not None:
        metadata["template"] = rxn.template
    if rxn.template_radius is not None:
        metadata["template_radius"] = rxn.template_radius
    if rxn.probability is not None:
        metadata["policy_probability"] = rxn.probability
    if rxn.patent_id is not None:
        metadata["patent_id"] = rxn.patent_id
    metadata.update(rxn.extra_metadata)

    out: dict[str, Any] = {"type": "reaction"}
    if metadata:
        out["metadata"] = metadata
    out["children"] = [_mol_to_dict(mol) for mol in rxn.children]
    return out


def route_to_dict(route: RouteTree) -> dict[str, Any]:
    """Return the interchange representation of the route's root molecule."""
    return _mol_to_dict(route.root)


def serialize_route(route: RouteTree, indent: int | None = None) -> str:
    """Serialize a route to canonical interchange JSON.

    The output is deterministic: known keys come first in a fixed order and
    unknown metadata keys keep their original order.
    """
    return json.dumps(route_to_dict(route), indent=indent, ensure_ascii=False)


def route_length(route: RouteTree) -> int:
    """Return the number of reaction nodes in the route."""
    return route.length


def iter_reaction_chains(route: RouteTree, n: int) -> Iterator[tuple[ReactionNode, ...]]:
    """Yield every descending chain of ``n`` reaction nodes.

    A chain follows parent-to-child reaction edges only; windows never
    combine reactions from sibling branches.  Chains are emitted in
    depth-first order: outer loop over starting reactions in pre-order,
    inner extension following reactant order.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    for start in route.reactions():
        yield from _extend_chain((start,), n)


def _extend_chain(
    prefix: tuple[ReactionNode, ...], n: int
) -> Iterator[tuple[ReactionNode, ...]]:
    if len(prefix) == n:
        yield prefix
        return
    for child in prefix[-1].child_reactions():
        yield from _extend_chain(prefix + (child,), n)


def extract_ngrams(route: RouteTree, n: int, kind: TokenKind) -> list[Ngram]:
    """Enumerate all reaction n-grams of the route in retrosynthesis order.

    Windows are identified by node identity, so two chains through distinct
    nodes both appear even when their token tuples coincide.

    :param route: the route to enumerate
    :param n: window size, at least 2
    :param kind: which per-reaction token to use
    :raises MissingTokenError: a reaction inside some window lacks the token
    """
    return [
        Ngram(tokens=tuple(rxn.token(kind) for rxn in chain), token_kind=kind)
        for chain in iter_reaction_chains(route, n)
    ]


def count_ngrams(route: RouteTree, n: int) -> int:
    """Count the n-gram windows of the route without touching tokens.

    Equals ``len(extract_ngrams(route, n, kind))`` for any token kind
    present on all reactions; for a linear route of k reactions this is
    ``max(0, k - n + 1)``.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    from . import _kernels

    _, child_off, child_idx = flatten_reactions(route)
    return _kernels.count_chain_windows(child_off, child_idx, n)


def flatten_reactions(
    route: RouteTree, kind: TokenKind | None = None
) -> tuple[list[str | None], list[int], list[int]]:
    """Flatten the reaction tree into arrays for the scoring kernels.

    Returns ``(tokens, child_off, child_idx)`` where reaction ``i`` has the
    child reactions ``child_idx[child_off[i]:child_off[i + 1]]``.  Reactions
    are numbered in depth-first pre-order.  ``tokens[i]`` is the requested
    token or ``None`` when absent or no kind was requested; token presence
    is checked lazily by the kernels, only for reactions inside a window.
    """
    nodes = list(route.reactions())
    index = {id(rxn): i for i, rxn in enumerate(nodes)}
    tokens: list[str | None] = []
    child_off = [0]
    child_idx: list[int] = []
    for rxn in nodes:
        if kind is None:
            tokens.append(None)
        else:
            value = rxn.reaction_smiles if kind is TokenKind.REACTION else rxn.template
            tokens.append(value if value else None)
        for child in rxn.child_reactions():
            child_idx.append(index[id(child)])
        child_off.append(len(child_idx))
    return tokens, child_off, child_idx
