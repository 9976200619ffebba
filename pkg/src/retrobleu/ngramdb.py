"""Known n-gram databases: build, query, merge and persist.

The on-disk format is a sorted, newline-delimited UTF-8 text file.  Line 1
is the header::

    RETROBLEU-NGRAMDB v1<TAB>n=<int><TAB>kind=<reaction|template><TAB>radius=<int|-><TAB>routes=<int>

followed by one record per n-gram::

    <count><TAB><tok1><TAB>...<TAB><tokn>

Records are sorted lexicographically by the token columns and every line
ends with a single LF, so two saves of the same database are byte
identical.  Tokens never contain TAB or newline, which keeps the format
injective and diff-friendly.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    ArityMismatchError,
    BadMagicError,
    CorruptRecordError,
    KindMismatchError,
    MixedRadiusError,
    VersionMismatchError,
)
from .routes import Ngram, RouteTree, TokenKind, extract_ngrams

__all__ = [
    "NgramDatabase",
    "key_of",
    "split_key",
    "build_db",
    "contains",
    "merge",
    "save_db",
    "load_db",
    "top_entries",
]

_MAGIC = "RETROBLEU-NGRAMDB"
_VERSION = "v1"

_FORBIDDEN = ("\t", "\n", "\r")


def key_of(tokens: Sequence[str]) -> str:
    """Join tokens into a database key, validating key safety.

    :raises ValueError: a token is empty or contains TAB or newline
    """
    for tok in tokens:
        if not tok:
            raise ValueError("n-gram tokens must be non-empty")
        if any(ch in tok for ch in _FORBIDDEN):
            raise ValueError(f"token contains TAB or newline: {tok!r}")
    return "\t".join(tokens)


def split_key(key: str) -> tuple[str, ...]:
    """Invert :func:`key_of`."""
    return tuple(key.split("\t"))


@dataclass
class NgramDatabase:
    """Counted set of known n-grams for one (n, token kind, radius).

    :param n: window size of every entry
    :param token_kind: token kind of every entry
    :param entries: TAB-joined key mapped to its occurrence count
    :param source_route_count: number of corpus routes the entries came from
    :param template_radius: declared template radius; ``None`` for reaction
        tokens or when the corpus declares none
    """

    n: int
    token_kind: TokenKind
    entries: dict[str, int] = field(default_factory=dict)
    source_route_count: int = 0
    template_radius: int | None = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_count(self) -> int:
        return sum(self.entries.values())


def _check_compatible(a: NgramDatabase, b: NgramDatabase) -> None:
    if a.n != b.n:
        raise ArityMismatchError(f"database orders differ: {a.n} vs {b.n}")
    if a.token_kind != b.token_kind:
        raise KindMismatchError(
            f"token kinds differ: {a.token_kind.value} vs {b.token_kind.value}"
        )
    if a.template_radius != b.template_radius:
        raise MixedRadiusError(
            f"template radii differ: {a.template_radius} vs {b.template_radius}"
        )


def build_db(
    corpus: Iterable[RouteTree],
    n: int,
    kind: TokenKind,
    radius: int | None = None,
    excluded_patents: frozenset[str] | set[str] = frozenset(),
) -> NgramDatabase:
    """Tally the n-grams of every non-excluded route in the corpus.

    A route is excluded when any of its source patent ids appears in
    ``excluded_patents``; routes without patent ids are never excluded.
    Occurrences are counted per window, aggregated across the corpus.

    :param corpus: stream of routes, consumed once
    :param n: window size, at least 2
    :param kind: token kind to extract
    :param radius: required template radius; inferred from the corpus when
        omitted
    :raises MissingTokenError: a windowed reaction lacks the token
    :raises MixedRadiusError: declared template radii are inconsistent
    """
    counts: Counter[str] = Counter()
    route_count = 0
    for route in corpus:
        if route.source_patent_ids & excluded_patents:
            continue
        if kind is TokenKind.TEMPLATE:
            radius = _reconcile_radius(route, radius)
        for gram in extract_ngrams(route, n, kind):
            counts[key_of(gram.tokens)] += 1
        route_count += 1
    return NgramDatabase(
        n=n,
        token_kind=kind,
        entries=dict(counts),
        source_route_count=route_count,
        template_radius=radius if kind is TokenKind.TEMPLATE else None,
    )


def _reconcile_radius(route: RouteTree, radius: int | None) -> int | None:
    for rxn in route.reactions():
        declared = rxn.template_radius
        if declared is None:
            continue
        if radius is None:
            radius = declared
        elif declared != radius:
            raise MixedRadiusError(
                f"route {route.route_id}: template radius {declared} "
                f"conflicts with {radius}"
            )
    return radius


def contains(db: NgramDatabase, gram: Ngram) -> bool:
    """Membership test defining the recorded-window count.

    :raises ArityMismatchError: the n-gram order differs from the database
    :raises KindMismatchError: the token kind differs from the database
    """
    if gram.n != db.n:
        raise ArityMismatchError(f"{gram.n}-gram queried against a {db.n}-gram database")
    if gram.token_kind != db.token_kind:
        raise KindMismatchError(
            f"{gram.token_kind.value} n-gram queried against a "
            f"{db.token_kind.value} database"
        )
    return key_of(gram.tokens) in db.entries


def merge(a: NgramDatabase, b: NgramDatabase) -> NgramDatabase:
    """Combine two compatible databases; counts add pointwise."""
    _check_compatible(a, b)
    counts = Counter(a.entries)
    counts.update(b.entries)
    return NgramDatabase(
        n=a.n,
        token_kind=a.token_kind,
        entries=dict(counts),
        source_route_count=a.source_route_count + b.source_route_count,
        template_radius=a.template_radius,
    )


def save_db(db: NgramDatabase, path: str | Path) -> None:
    """Write the database in the sorted text format described above."""
    radius = "-" if db.template_radius is None else str(db.template_radius)
    header = (
        f"{_MAGIC} {_VERSION}\tn={db.n}\tkind={db.token_kind.value}"
        f"\tradius={radius}\troutes={db.source_route_count}"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(header + "\n")
        for key in sorted(db.entries, key=split_key):
            handle.write(f"{db.entries[key]}\t{key}\n")


def load_db(path: str | Path) -> NgramDatabase:
    """Read a database file, validating header and every record.

    :raises BadMagicError: the file does not start with the magic string
    :raises VersionMismatchError: the declared format version is unsupported
    :raises CorruptRecordError: a record is malformed, with its line number
    """
    with open(path, "r", encoding="utf-8", newline="\n") as handle:
        header = handle.readline().rstrip("\n")
        n, kind, radius, routes = _parse_header(header)
        entries: dict[str, int] = {}
        for line_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                raise CorruptRecordError("blank record", line_no)
            fields = line.split("\t")
            if len(fields) != n + 1:
                raise CorruptRecordError(
                    f"expected {n + 1} columns, got {len(fields)}", line_no
                )
            try:
                count = int(fields[0])
            except ValueError:
                raise CorruptRecordError(
                    f"count is not an integer: {fields[0]!r}", line_no
                ) from None
            if count < 1:
                raise CorruptRecordError(f"count must be positive: {count}", line_no)
            if any(not tok for tok in fields[1:]):
                raise CorruptRecordError("empty token", line_no)
            key = "\t".join(fields[1:])
            if key in entries:
                raise CorruptRecordError("duplicate n-gram key", line_no)
            entries[key] = count
    return NgramDatabase(
        n=n,
        token_kind=kind,
        entries=entries,
        source_route_count=routes,
        template_radius=radius,
    )


def _parse_header(header: str) -> tuple[int, TokenKind, int | None, int]:
    fields = header.split("\t")
    magic = fields[0].split(" ")
    if not header or magic[0] != _MAGIC:
        raise BadMagicError(f"not a retrobleu n-gram database: {fields[0]!r}")
    if len(magic) != 2 or magic[1] != _VERSION:
        raise VersionMismatchError(
            f"unsupported database version: {fields[0]!r} (expected {_VERSION})"
        )
    values: dict[str, str] = {}
    for part in fields[1:]:
        key, _, value = part.partition("=")
        values[key] = value
    try:
        n = int(values["n"])
        kind = TokenKind(values["kind"])
        radius = None if values["radius"] == "-" else int(values["radius"])
        routes = int(values["routes"])
    except (KeyError, ValueError) as exc:
        raise CorruptRecordError(f"malformed header: {exc}", 1) from None
    if n < 2:
        raise CorruptRecordError(f"n must be at least 2, got {n}", 1)
    return n, kind, radius, routes


def top_entries(db: NgramDatabase, k: int) -> list[tuple[tuple[str, ...], int]]:
    """Return the k most frequent entries.

    Sorted by descending count, then lexicographically by tokens so that
    ties break deterministically.
    """
    ranked = sorted(db.entries.items(), key=lambda item: (-item[1], split_key(item[0])))
    return [(split_key(key), count) for key, count in ranked[:k]]
