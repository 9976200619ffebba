"""Command-line interface for batch database builds, scoring and evaluation.

Subcommands
-----------
build-db
    Tally route n-grams into a database file, or merge existing shards.
score
    Write per-route score reports as CSV (and optionally JSON).
eval
    Rank reference routes against candidate pools and tabulate top-k
    accuracy per metric.
mine-bigrams
    List the most frequent known n-grams and the most frequent generated
    ones that are absent from the known database.
stats
    Aggregate overlap fraction and coverage of a corpus per database.

Every command writes a JSON run manifest next to its primary output,
recording the tool version, effective configuration, input paths and a
content fingerprint of the inputs, so runs can be reproduced exactly.

Configuration precedence is CLI flags, then the config file (``--config``
or the ``RETROBLEU_CONFIG`` environment variable), then built-in defaults.
The config file holds ``key = value`` lines; recognised keys are ``L``,
``n``, ``kind``, ``radius``, ``epsilon``, ``yield`` and ``prob_floor``.
Lines starting with ``#`` are ignored.

Exit codes: 0 on success, 1 on input or validation failure, 2 on I/O
failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__, _kernels
from .errors import EmptyInputError, RetroBleuError
from .ngramdb import NgramDatabase, build_db, load_db, merge, save_db
from .ranking import (
    Metric,
    OverlapStats,
    RankingResult,
    TargetCase,
    aggregate_overlap,
    mine_bigram_diff,
    rank_case,
    topk_table,
)
from .routes import RouteTree, TokenKind, parse_routes
from .scoring import ScoreConfig, ScoreReport, score_route

_CONFIG_ENV = "RETROBLEU_CONFIG"
_DEFAULT_RADIUS = 1


class _CliError(Exception):
    """Raised for CLI-level validation problems (exit code 1)."""


# ---------------------------------------------------------------------------
# configuration


def _read_config_file(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise _CliError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _resolve_config(args: argparse.Namespace) -> tuple[ScoreConfig, int | None]:
    """Merge defaults, config file and CLI flags into a ScoreConfig.

    Returns the config plus the template radius, which travels alongside
    the config because it applies to databases rather than to scores.
    """
    import os

    settings: dict[str, str] = {}
    config_path = getattr(args, "config", None) or os.environ.get(_CONFIG_ENV)
    if config_path:
        settings = _read_config_file(Path(config_path))

    def pick(flag: str, key: str) -> str | None:
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            return str(flag_value)
        return settings.get(key)

    try:
        kind_raw = pick("kind", "kind")
        kind = TokenKind(kind_raw) if kind_raw is not None else TokenKind.TEMPLATE
        cfg = ScoreConfig(
            L=int(pick("length_pivot", "L") or 3),
            n=int(pick("n", "n") or 2),
            token_kind=kind,
            epsilon=float(pick("epsilon", "epsilon") or 1.0),
            yield_assumed=float(pick("yield_assumed", "yield") or 0.8),
            prob_floor=float(pick("prob_floor", "prob_floor") or 1e-10),
        )
        radius_raw = pick("radius", "radius")
        if radius_raw in (None, ""):
            radius = _DEFAULT_RADIUS if kind is TokenKind.TEMPLATE else None
        elif radius_raw == "-":
            radius = None
        else:
            radius = int(radius_raw)
    except ValueError as exc:
        raise _CliError(f"bad configuration value: {exc}") from exc
    return cfg, radius


def _config_dict(cfg: ScoreConfig, radius: int | None) -> dict[str, Any]:
    return {
        "L": cfg.L,
        "n": cfg.n,
        "kind": cfg.token_kind.value,
        "radius": radius,
        "epsilon": cfg.epsilon,
        "yield": cfg.yield_assumed,
        "prob_floor": cfg.prob_floor,
    }


# ---------------------------------------------------------------------------
# manifests and small helpers


def _fingerprint(paths: Sequence[Path]) -> str:
    digest = hashlib.sha256()
    for path in sorted(paths):
        digest.update(hashlib.sha256(path.read_bytes()).digest())
    return digest.hexdigest()


def _write_manifest(
    manifest_path: Path,
    command: str,
    cfg: ScoreConfig,
    radius: int | None,
    inputs: Sequence[Path],
    outputs: Sequence[Path],
    db_path: Path | None = None,
) -> None:
    manifest = {
        "command": command,
        "tool_version": __version__,
        "kernel_backend": _kernels.BACKEND,
        "config": _config_dict(cfg, radius),
        "inputs": [str(p) for p in inputs],
        "db": str(db_path) if db_path else None,
        "outputs": [str(p) for p in outputs],
        "corpus_fingerprint": _fingerprint(inputs),
    }
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _warn(message: str) -> None:
    print(f"warning: {message}", file=sys.stderr)


def _load_routes_file(path: Path) -> list[RouteTree]:
    try:
        return parse_routes(path.read_text(encoding="utf-8"), id_prefix=path.stem)
    except RetroBleuError as exc:
        raise _CliError(f"{path}: {exc}") from exc


def _iter_corpus(paths: Sequence[Path]) -> Iterable[RouteTree]:
    for path in paths:
        yield from _load_routes_file(path)


def _existing_files(raw: Sequence[str]) -> list[Path]:
    paths = []
    for name in raw:
        path = Path(name)
        if not path.is_file():
            raise _CliError(f"no such file: {path}")
        paths.append(path)
    return paths


def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_cell(row[name]) for name in fieldnames])


# ---------------------------------------------------------------------------
# worker-pool plumbing

_worker_db: NgramDatabase | None = None
_worker_cfg: ScoreConfig | None = None


def _score_worker_init(db_path: str, cfg: ScoreConfig) -> None:
    global _worker_db, _worker_cfg
    _worker_db = load_db(db_path)
    _worker_cfg = cfg


def _score_file_worker(task: tuple[str, bool]) -> tuple[list[dict[str, Any]], list[str]]:
    path, strict = task
    return _score_one_file(Path(path), _worker_db, _worker_cfg, strict)


def _build_file_worker(
    task: tuple[str, int, str, int | None, frozenset[str]]
) -> NgramDatabase:
    path, n, kind_value, radius, excluded = task
    routes = _load_routes_file(Path(path))
    return build_db(routes, n, TokenKind(kind_value), radius, excluded)


def _rank_one_case(
    target_id: str,
    ref_path: Path,
    cand_paths: Sequence[Path],
    metrics: Sequence[Metric],
    db: NgramDatabase,
    cfg: ScoreConfig,
) -> list[RankingResult] | str:
    """Rank one case under every metric; returns a skip reason on failure."""
    if not ref_path.is_file():
        return f"case {target_id}: missing reference {ref_path}, skipped"
    try:
        reference = _load_routes_file(ref_path)[0]
        candidates: list[RouteTree] = []
        for cand in cand_paths:
            candidates.extend(_load_routes_file(cand))
    except _CliError as exc:
        return f"case {target_id}: {exc}, skipped"
    if not candidates:
        return f"case {target_id}: no candidates, skipped"
    case = TargetCase(
        target_id=target_id, reference_route=reference, candidates=tuple(candidates)
    )
    return [rank_case(case, metric, db, cfg) for metric in metrics]


def _eval_case_worker(
    task: tuple[str, str, list[str], list[str]]
) -> list[RankingResult] | str:
    target_id, ref_path, cand_paths, metric_values = task
    return _rank_one_case(
        target_id,
        Path(ref_path),
        [Path(c) for c in cand_paths],
        [Metric(value) for value in metric_values],
        _worker_db,
        _worker_cfg,
    )


def _stats_db_worker(task: tuple[str, list[str]]) -> OverlapStats:
    db_path, route_files = task
    db = load_db(db_path)
    return aggregate_overlap(_iter_corpus([Path(p) for p in route_files]), db)


def _score_one_file(
    path: Path,
    db: NgramDatabase,
    cfg: ScoreConfig,
    strict: bool,
) -> tuple[list[dict[str, Any]], list[str]]:
    """Score every route of one file; returns (rows, per-route warnings)."""
    rows: list[dict[str, Any]] = []
    warnings: list[str] = []
    try:
        routes = _load_routes_file(path)
    except _CliError as exc:
        if strict:
            raise
        return [], [str(exc)]
    for route in routes:
        try:
            rows.append(score_route(route, db, cfg).to_dict())
        except RetroBleuError as exc:
            if strict:
                raise _CliError(f"route {route.route_id}: {exc}") from exc
            warnings.append(f"route {route.route_id}: {exc}")
    return rows, warnings


# ---------------------------------------------------------------------------
# subcommands


def _cmd_build_db(args: argparse.Namespace) -> int:
    cfg, radius = _resolve_config(args)
    out = Path(args.out)

    if args.merge:
        shards = _existing_files(args.merge)
        db = load_db(shards[0])
        for shard in shards[1:]:
            db = merge(db, load_db(shard))
        inputs = shards
    else:
        if not args.routes:
            raise _CliError("build-db needs --routes files or --merge shards")
        inputs = _existing_files(args.routes)
        excluded: frozenset[str] = frozenset()
        if args.exclude_patents:
            excluded = frozenset(
                line.strip()
                for line in Path(args.exclude_patents).read_text(encoding="utf-8").splitlines()
                if line.strip() and not line.startswith("#")
            )
            inputs = inputs + [Path(args.exclude_patents)]
            route_inputs = inputs[:-1]
        else:
            route_inputs = inputs
        kind = cfg.token_kind
        db_radius = radius if kind is TokenKind.TEMPLATE else None
        if args.jobs > 1:
            tasks = [(str(p), cfg.n, kind.value, db_radius, excluded) for p in route_inputs]
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                shard_dbs = list(pool.map(_build_file_worker, tasks))
            db = NgramDatabase(n=cfg.n, token_kind=kind, template_radius=db_radius)
            for shard in shard_dbs:
                db = merge(db, shard)
        else:
            db = build_db(_iter_corpus(route_inputs), cfg.n, kind, db_radius, excluded)

    if len(db) == 0:
        _warn("database is empty (no n-grams survived exclusion or extraction)")
    save_db(db, out)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "build-db", cfg, db.template_radius, inputs, [out],
    )
    print(f"wrote {out}: {len(db)} n-grams from {db.source_route_count} routes")
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    cfg, radius = _resolve_config(args)
    db_path = Path(args.db)
    route_files = _existing_files(args.routes) if args.routes else []
    out = Path(args.out)

    db = load_db(db_path)
    rows: list[dict[str, Any]] = []
    if args.jobs > 1 and route_files:
        tasks = [(str(p), args.strict) for p in route_files]
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_score_worker_init,
            initargs=(str(db_path), cfg),
        ) as pool:
            for file_rows, warnings in pool.map(_score_file_worker, tasks):
                rows.extend(file_rows)
                for message in warnings:
                    _warn(message)
    else:
        for path in route_files:
            file_rows, warnings = _score_one_file(path, db, cfg, args.strict)
            rows.extend(file_rows)
            for message in warnings:
                _warn(message)

    _write_csv(out, ScoreReport.CSV_FIELDS, rows)
    outputs = [out]
    if args.json:
        json_path = Path(args.json)
        json_path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        outputs.append(json_path)
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "score", cfg, db.template_radius, route_files, outputs, db_path,
    )
    print(f"scored {len(rows)} routes against {db_path}")
    return 0


def _load_cases(case_path: Path) -> list[tuple[str, Path, list[Path]]]:
    try:
        raw = json.loads(case_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise _CliError(f"{case_path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise _CliError(f"{case_path}: case file must map target ids to case objects")
    base = case_path.parent
    cases = []
    for target_id in sorted(raw):
        spec = raw[target_id]
        if not isinstance(spec, dict) or "reference" not in spec or "candidates" not in spec:
            raise _CliError(
                f"{case_path}: case {target_id!r} needs 'reference' and 'candidates'"
            )
        reference = base / spec["reference"]
        candidates = [base / c for c in spec["candidates"]]
        cases.append((target_id, reference, candidates))
    return cases


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg, radius = _resolve_config(args)
    db_path = Path(args.db)
    case_path = Path(args.cases)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    metrics = []
    for name in args.metrics.split(","):
        name = name.strip()
        try:
            metrics.append(Metric(name))
        except ValueError:
            raise _CliError(f"unknown metric {name!r}") from None
    ks = [int(k) for k in args.ks.split(",")]

    case_specs = _load_cases(case_path)
    per_case: list[list[RankingResult] | str]
    if args.jobs > 1:
        tasks = [
            (target_id, str(ref), [str(c) for c in cands], [m.value for m in metrics])
            for target_id, ref, cands in case_specs
        ]
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_score_worker_init,
            initargs=(str(db_path), cfg),
        ) as pool:
            per_case = list(pool.map(_eval_case_worker, tasks))
        db = load_db(db_path)
    else:
        db = load_db(db_path)
        per_case = [
            _rank_one_case(target_id, ref, cands, metrics, db, cfg)
            for target_id, ref, cands in case_specs
        ]

    by_metric: dict[Metric, list[RankingResult]] = {metric: [] for metric in metrics}
    usable = 0
    for outcome in per_case:
        if isinstance(outcome, str):
            _warn(outcome)
            continue
        usable += 1
        for metric, result in zip(metrics, outcome):
            by_metric[metric].append(result)
    if usable == 0:
        raise _CliError("no usable cases")

    outputs: list[Path] = []
    for metric in metrics:
        results = by_metric[metric]
        csv_path = out_dir / f"{metric.value}_rankings.csv"
        _write_csv(csv_path, RankingResult.CSV_FIELDS, [r.to_dict() for r in results])
        table = topk_table(results, ks)
        json_path = out_dir / f"{metric.value}_topk.json"
        json_path.write_text(
            json.dumps(
                {
                    "metric": metric.value,
                    "cases": len(results),
                    "entries": [
                        {
                            "k": entry.k,
                            "best_accuracy": entry.best_accuracy,
                            "worst_accuracy": entry.worst_accuracy,
                        }
                        for entry in table
                    ],
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )
        outputs.extend([csv_path, json_path])

    _write_manifest(
        out_dir / "manifest.json", "eval", cfg, db.template_radius,
        [case_path], outputs, db_path,
    )
    print(f"evaluated {usable} cases under {len(metrics)} metrics into {out_dir}")
    return 0


def _cmd_mine_bigrams(args: argparse.Namespace) -> int:
    cfg, radius = _resolve_config(args)
    known_path, generated_path = Path(args.known), Path(args.generated)
    out = Path(args.out)
    known = load_db(known_path)
    generated = load_db(generated_path)
    positive, negative = mine_bigram_diff(known, generated, args.top)

    def entry(tokens: tuple[str, ...], count: int) -> dict[str, Any]:
        return {"tokens": list(tokens), "count": count}

    out.write_text(
        json.dumps(
            {
                "n": known.n,
                "kind": known.token_kind.value,
                "positive": [entry(t, c) for t, c in positive],
                "negative": [entry(t, c) for t, c in negative],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "mine-bigrams", cfg, known.template_radius,
        [known_path, generated_path], [out],
    )
    print(f"wrote {out}: {len(positive)} positive, {len(negative)} negative")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    cfg, radius = _resolve_config(args)
    route_files = _existing_files(args.routes)
    db_paths = [Path(p) for p in args.db]
    out = Path(args.out)

    try:
        if args.jobs > 1:
            tasks = [(str(p), [str(f) for f in route_files]) for p in db_paths]
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                stats_rows = list(pool.map(_stats_db_worker, tasks))
        else:
            stats_rows = [
                aggregate_overlap(_iter_corpus(route_files), load_db(db_path))
                for db_path in db_paths
            ]
    except EmptyInputError as exc:
        raise _CliError(str(exc)) from exc
    stats_rows.sort(key=lambda s: s.n)
    _write_csv(out, stats_rows[0].CSV_FIELDS, [s.to_dict() for s in stats_rows])
    _write_manifest(
        out.with_name(out.name + ".manifest.json"),
        "stats", cfg, radius, route_files, [out],
    )
    print(f"wrote {out}: {len(stats_rows)} database(s) over {len(route_files)} route files")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="config file path (key = value lines)")
    parser.add_argument("--length-pivot", "-L", dest="length_pivot", type=int,
                        help="length pivot L (default 3)")
    parser.add_argument("--n", type=int, help="n-gram order (default 2)")
    parser.add_argument("--kind", choices=[k.value for k in TokenKind],
                        help="token kind (default template)")
    parser.add_argument("--radius", type=int,
                        help="template extraction radius (default 1 for templates)")
    parser.add_argument("--epsilon", type=float, help="fixed reaction cost (default 1)")
    parser.add_argument("--yield", dest="yield_assumed", type=float,
                        help="assumed reaction yield (default 0.8)")
    parser.add_argument("--prob-floor", dest="prob_floor", type=float,
                        help="probability floor for unpredicted reactions (default 1e-10)")
    parser.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrobleu",
        description="Score and rank retrosynthesis routes by n-gram overlap "
        "with known reaction sequences.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-db", help="build or merge an n-gram database")
    p.add_argument("--routes", nargs="+", help="route JSON files")
    p.add_argument("--merge", nargs="+", help="database shards to merge instead")
    p.add_argument("--exclude-patents", help="file with one patent id per line")
    p.add_argument("--out", required=True, help="output database path")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_build_db)

    p = sub.add_parser("score", help="score routes against a database")
    p.add_argument("--db", required=True, help="n-gram database file")
    p.add_argument("--routes", nargs="*", default=[], help="route JSON files")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--json", help="optional JSON output path")
    p.add_argument("--strict", action="store_true",
                   help="stop at the first per-route error")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("eval", help="rank references among candidates")
    p.add_argument("--cases", required=True, help="JSON case file")
    p.add_argument("--db", required=True, help="n-gram database file")
    p.add_argument("--metrics", default="retro_bleu",
                   help="comma-separated metric list")
    p.add_argument("--ks", default="1,3,5,10", help="comma-separated top-k values")
    p.add_argument("--out-dir", required=True, help="output directory")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("mine-bigrams", help="frequent known vs novel n-grams")
    p.add_argument("--known", required=True, help="known n-gram database")
    p.add_argument("--generated", required=True, help="generated n-gram database")
    p.add_argument("--top", type=int, default=10, help="list length (default 10)")
    p.add_argument("--out", required=True, help="output JSON path")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_mine_bigrams)

    p = sub.add_parser("stats", help="corpus overlap statistics per database")
    p.add_argument("--routes", nargs="+", required=True, help="route JSON files")
    p.add_argument("--db", action="append", required=True,
                   help="database file (repeatable, e.g. one per n)")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_config_flags(p)
    p.set_defaults(func=_cmd_stats)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RetroBleuError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
