"""Compare the compiled and pure-Python kernels on a synthetic workload.

Usage::

    python benchmarks/bench_kernels.py [--routes 20000] [--db-size 200000] [--n 2]

Times the two hot kernels (window counting and recorded-window scoring)
plus end-to-end report scoring, for every available backend.
"""

from __future__ import annotations

import argparse
import time

from retrobleu import _kernels
from retrobleu.benchgen import make_throughput_fixture
from retrobleu.routes import TokenKind, flatten_reactions
from retrobleu.scoring import ScoreConfig, score_route


def _time(label: str, fn) -> float:
    start = time.perf_counter()
    fn()
    elapsed = time.perf_counter() - start
    print(f"  {label:<28s} {elapsed:8.3f} s")
    return elapsed


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--routes", type=int, default=20_000)
    parser.add_argument("--db-size", type=int, default=200_000)
    parser.add_argument("--n", type=int, default=2)
    args = parser.parse_args()

    print(
        f"generating {args.routes} routes and a {args.db_size}-entry database ..."
    )
    routes, db = make_throughput_fixture(n_routes=args.routes, db_size=args.db_size)
    flat = [flatten_reactions(route, TokenKind.TEMPLATE) for route in routes]
    entries = db.entries
    cfg = ScoreConfig()

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)} (selected: {_kernels.BACKEND})\n")

    results: dict[str, dict[str, float]] = {}
    for name, impl in backends.items():
        print(f"[{name}]")
        timings: dict[str, float] = {}

        def run_count() -> None:
            for _, off, idx in flat:
                impl.count_chain_windows(off, idx, args.n)

        def run_recorded() -> None:
            for tokens, off, idx in flat:
                impl.count_recorded_windows(tokens, off, idx, args.n, entries)

        timings["count_chain_windows"] = _time("count_chain_windows", run_count)
        timings["count_recorded_windows"] = _time(
            "count_recorded_windows", run_recorded
        )
        results[name] = timings
        print()

    if "compiled" in results and "pure" in results:
        print("speedup (pure / compiled):")
        for kernel in ("count_chain_windows", "count_recorded_windows"):
            ratio = results["pure"][kernel] / results["compiled"][kernel]
            print(f"  {kernel:<28s} {ratio:6.2f}x")
        print()

    start = time.perf_counter()
    for route in routes:
        score_route(route, db, cfg)
    elapsed = time.perf_counter() - start
    print(
        f"end-to-end score_route ({_kernels.BACKEND}): "
        f"{args.routes / elapsed:,.0f} routes/s ({elapsed:.2f} s total)"
    )


if __name__ == "__main__":
    main()
