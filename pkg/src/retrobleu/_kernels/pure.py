"""Pure-Python reference kernels for window counting and overlap scoring.

These operate on the flattened reaction arrays produced by
:func:`retrobleu.routes.flatten_reactions` and are the fallback used when
the compiled extension is unavailable.
"""

from __future__ import annotations

from typing import Container, Iterator, Sequence

from ..errors import MissingTokenError


def count_chain_windows(child_off: Sequence[int], child_idx: Sequence[int], n: int) -> int:
    """Count descending chains of ``n`` reactions via dynamic programming.

    ``chains[v]`` holds the number of chains of the current length starting
    at node ``v``; one pass per additional window position.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    num = len(child_off) - 1
    if num < n:
        return 0
    chains = [1] * num
    for _ in range(n - 1):
        nxt = [0] * num
        # children always have higher pre-order indices than their parent
        for node in range(num - 1, -1, -1):
            total = 0
            for j in range(child_off[node], child_off[node + 1]):
                total += chains[child_idx[j]]
            nxt[node] = total
        chains = nxt
    return sum(chains)


def iter_window_indices(
    child_off: Sequence[int], child_idx: Sequence[int], n: int
) -> Iterator[tuple[int, ...]]:
    """Yield every chain window as a tuple of node indices, DFS order."""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    window = [0] * n

    def extend(node: int, depth: int) -> Iterator[tuple[int, ...]]:
        window[depth] = node
        if depth == n - 1:
            yield tuple(window)
            return
        for j in range(child_off[node], child_off[node + 1]):
            yield from extend(child_idx[j], depth + 1)

    for start in range(len(child_off) - 1):
        yield from extend(start, 0)


def count_recorded_windows(
    tokens: Sequence[str | None],
    child_off: Sequence[int],
    child_idx: Sequence[int],
    n: int,
    entries: Container[str],
) -> tuple[int, int]:
    """Return ``(recorded, total)`` window counts against a key container.

    Keys are the window tokens joined with TAB.  Token presence is checked
    only for reactions that actually sit inside a window.
    """
    recorded = 0
    total = 0
    for window in iter_window_indices(child_off, child_idx, n):
        parts = []
        for i in window:
            tok = tokens[i]
            if tok is None:
                raise MissingTokenError(f"reaction {i} lacks the requested token")
            parts.append(tok)
        total += 1
        if "\t".join(parts) in entries:
            recorded += 1
    return recorded, total
