import csv
import json
import random

import pytest

from retrobleu.benchgen import random_linear_route, random_route
from retrobleu.cli import main
from retrobleu.ngramdb import build_db, load_db, save_db
from retrobleu.ranking import Metric, aggregate_overlap, rank_case, TargetCase
from retrobleu.routes import TokenKind, serialize_route
from retrobleu.scoring import ScoreConfig, score_route

from .conftest import ROUTE_FILES


def _write_routes(directory, routes, name="routes.json"):
    path = directory / name
    payload = "[" + ",".join(serialize_route(r) for r in routes) + "]"
    path.write_text(payload, encoding="utf-8")
    return path


def _read_csv(path):
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture
def corpus(tmp_path):
    rng = random.Random(100)
    routes = [random_route(rng, rng.randint(2, 6), route_id=f"r{i}") for i in range(20)]
    return _write_routes(tmp_path, routes), routes


class TestBuildDb:
    def test_build_and_header(self, tmp_path, corpus):
        routes_path, routes = corpus
        out = tmp_path / "known.ngdb"
        code = main([
            "build-db", "--routes", str(routes_path),
            "--n", "2", "--kind", "template", "--radius", "1",
            "--out", str(out),
        ])
        assert code == 0
        header = out.read_text(encoding="utf-8").splitlines()[0]
        assert header.startswith("RETROBLEU-NGRAMDB v1\tn=2\tkind=template\tradius=1")
        expected = build_db(routes, 2, TokenKind.TEMPLATE, radius=1)
        assert load_db(out).entries == expected.entries

    def test_manifest_written(self, tmp_path, corpus):
        routes_path, _ = corpus
        out = tmp_path / "known.ngdb"
        main(["build-db", "--routes", str(routes_path), "--out", str(out)])
        manifest = json.loads((tmp_path / "known.ngdb.manifest.json").read_text())
        assert manifest["command"] == "build-db"
        assert manifest["config"]["n"] == 2
        assert manifest["config"]["kind"] == "template"
        assert manifest["corpus_fingerprint"]
        assert manifest["outputs"] == [str(out)]

    def test_exclude_all_patents_warns(self, tmp_path, capsys):
        rng = random.Random(101)
        routes = [random_route(rng, 3, route_id=f"r{i}", patent_id=f"p{i}") for i in range(4)]
        routes_path = _write_routes(tmp_path, routes)
        holdout = tmp_path / "holdout.txt"
        holdout.write_text("".join(f"p{i}\n" for i in range(4)), encoding="utf-8")
        out = tmp_path / "empty.ngdb"
        code = main([
            "build-db", "--routes", str(routes_path),
            "--exclude-patents", str(holdout), "--out", str(out),
        ])
        assert code == 0
        assert "warning" in capsys.readouterr().err
        assert len(load_db(out)) == 0

    def test_shard_merge_equals_single_build(self, tmp_path):
        rng = random.Random(102)
        routes = [random_route(rng, rng.randint(1, 6), route_id=f"r{i}") for i in range(30)]
        half_a = _write_routes(tmp_path, routes[:15], "a.json")
        half_b = _write_routes(tmp_path, routes[15:], "b.json")
        shard_a, shard_b = tmp_path / "a.ngdb", tmp_path / "b.ngdb"
        merged, single = tmp_path / "merged.ngdb", tmp_path / "single.ngdb"
        assert main(["build-db", "--routes", str(half_a), "--out", str(shard_a)]) == 0
        assert main(["build-db", "--routes", str(half_b), "--out", str(shard_b)]) == 0
        assert main(["build-db", "--merge", str(shard_a), str(shard_b), "--out", str(merged)]) == 0
        assert main(["build-db", "--routes", str(half_a), str(half_b), "--out", str(single)]) == 0
        assert merged.read_bytes() == single.read_bytes()

    def test_jobs_parallel_build_is_deterministic(self, tmp_path):
        rng = random.Random(103)
        files = [
            _write_routes(
                tmp_path,
                [random_route(rng, rng.randint(1, 6), route_id=f"f{i}r{j}") for j in range(10)],
                f"part{i}.json",
            )
            for i in range(4)
        ]
        serial, parallel = tmp_path / "serial.ngdb", tmp_path / "parallel.ngdb"
        args = ["build-db", "--routes"] + [str(f) for f in files]
        assert main(args + ["--out", str(serial)]) == 0
        assert main(args + ["--out", str(parallel), "--jobs", "3"]) == 0
        assert serial.read_bytes() == parallel.read_bytes()

    def test_missing_input_exits_one(self, tmp_path, capsys):
        code = main(["build-db", "--routes", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x.ngdb")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestScore:
    def test_golden_csv(self, tmp_path, golden_db_path):
        out = tmp_path / "scores.csv"
        code = main([
            "score", "--db", str(golden_db_path),
            "--routes", str(ROUTE_FILES["patent_convergent_5step"]),
            str(ROUTE_FILES["generated_2step"]),
            "--out", str(out), "--json", str(tmp_path / "scores.json"),
        ])
        assert code == 0
        rows = _read_csv(out)
        assert [r["route_id"] for r in rows] == [
            "patent_convergent_5step", "generated_2step",
        ]
        assert float(rows[0]["retro_bleu"]) == pytest.approx(4.5404, abs=0.005)
        assert float(rows[1]["retro_bleu"]) == pytest.approx(3.7183, abs=0.005)
        payload = json.loads((tmp_path / "scores.json").read_text())
        assert payload[0]["length"] == 5

    def test_rows_match_library(self, tmp_path, corpus, golden_db_path):
        routes_path, routes = corpus
        db_path = tmp_path / "db.ngdb"
        save_db(build_db(routes[:10], 2, TokenKind.TEMPLATE, radius=1), db_path)
        out = tmp_path / "scores.csv"
        assert main(["score", "--db", str(db_path), "--routes", str(routes_path),
                     "--out", str(out)]) == 0
        rows = _read_csv(out)
        db = load_db(db_path)
        cfg = ScoreConfig()
        assert len(rows) == len(routes)
        for row, route in zip(rows, routes):
            report = score_route(route, db, cfg)
            assert row["route_id"] == f"routes#{routes.index(route)}"
            assert float(row["retro_bleu"]) == report.retro_bleu
            assert int(row["length"]) == report.length

    def test_empty_route_list(self, tmp_path, golden_db_path):
        out = tmp_path / "scores.csv"
        assert main(["score", "--db", str(golden_db_path), "--out", str(out)]) == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines == [
            "route_id,retro_bleu,f_n,n_recorded,n_total,badowski,cum_log_prob,length,bigram_ratio"
        ]

    def test_broken_file_warns_and_continues(self, tmp_path, golden_db_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken", encoding="utf-8")
        out = tmp_path / "scores.csv"
        code = main([
            "score", "--db", str(golden_db_path),
            "--routes", str(bad), str(ROUTE_FILES["generated_2step"]),
            "--out", str(out),
        ])
        assert code == 0
        assert "warning" in capsys.readouterr().err
        assert len(_read_csv(out)) == 1

    def test_strict_mode_fails_fast(self, tmp_path, golden_db_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken", encoding="utf-8")
        code = main([
            "score", "--db", str(golden_db_path), "--routes", str(bad),
            "--out", str(tmp_path / "s.csv"), "--strict",
        ])
        assert code == 1

    def test_parallel_scoring_matches_serial(self, tmp_path, corpus):
        routes_path, routes = corpus
        db_path = tmp_path / "db.ngdb"
        save_db(build_db(routes, 2, TokenKind.TEMPLATE, radius=1), db_path)
        serial, parallel = tmp_path / "serial.csv", tmp_path / "parallel.csv"
        base = ["score", "--db", str(db_path), "--routes", str(routes_path)]
        assert main(base + ["--out", str(serial)]) == 0
        assert main(base + ["--out", str(parallel), "--jobs", "2"]) == 0
        assert serial.read_bytes() == parallel.read_bytes()

    def test_io_failure_exits_two(self, tmp_path, golden_db_path):
        code = main([
            "score", "--db", str(golden_db_path),
            "--out", str(tmp_path / "missing_dir" / "scores.csv"),
        ])
        assert code == 2

    def test_ten_thousand_routes(self, tmp_path):
        from retrobleu.benchgen import make_throughput_fixture
        from retrobleu.ngramdb import save_db as _save

        routes, db = make_throughput_fixture(n_routes=10_000, db_size=20_000)
        routes_path = _write_routes(tmp_path, routes, "bulk.json")
        db_path = tmp_path / "bulk.ngdb"
        _save(db, db_path)
        out = tmp_path / "bulk.csv"
        assert main(["score", "--db", str(db_path), "--routes", str(routes_path),
                     "--out", str(out)]) == 0
        rows = _read_csv(out)
        assert len(rows) == 10_000
        cfg = ScoreConfig()
        sample = random.Random(0).sample(range(10_000), 25)
        for i in sample:
            report = score_route(routes[i], db, cfg)
            assert float(rows[i]["retro_bleu"]) == report.retro_bleu
            assert float(rows[i]["cum_log_prob"]) == report.cum_log_prob
            assert int(rows[i]["n_recorded"]) == report.n_recorded


class TestEval:
    def _make_cases(self, tmp_path, n_cases=3):
        rng = random.Random(104)
        case_map = {}
        all_routes = []
        for i in range(n_cases):
            ref = random_linear_route(rng, 2, route_id=f"ref{i}",
                                      templates=[f"a{i}", f"b{i}"])
            cands = [
                random_linear_route(rng, 4, route_id=f"cand{i}_{j}")
                for j in range(3)
            ]
            ref_path = tmp_path / f"ref{i}.json"
            ref_path.write_text(serialize_route(ref), encoding="utf-8")
            cand_path = _write_routes(tmp_path, cands, f"cands{i}.json")
            case_map[f"target{i}"] = {
                "reference": ref_path.name,
                "candidates": [cand_path.name],
            }
            all_routes.append((ref, cands))
        case_path = tmp_path / "cases.json"
        case_path.write_text(json.dumps(case_map), encoding="utf-8")
        # db records every reference bigram so references win under retro_bleu
        refs = [ref for ref, _ in all_routes]
        db_path = tmp_path / "known.ngdb"
        save_db(build_db(refs, 2, TokenKind.TEMPLATE, radius=1), db_path)
        return case_path, db_path, all_routes

    def test_reference_wins(self, tmp_path):
        case_path, db_path, _ = self._make_cases(tmp_path)
        out_dir = tmp_path / "eval"
        code = main([
            "eval", "--cases", str(case_path), "--db", str(db_path),
            "--metrics", "retro_bleu", "--ks", "1,3", "--out-dir", str(out_dir),
        ])
        assert code == 0
        table = json.loads((out_dir / "retro_bleu_topk.json").read_text())
        assert table["entries"][0] == {"k": 1, "best_accuracy": 1.0, "worst_accuracy": 1.0}
        rows = _read_csv(out_dir / "retro_bleu_rankings.csv")
        assert all(row["best_rank"] == "1" for row in rows)

    def test_two_metrics_two_result_files(self, tmp_path):
        case_path, db_path, _ = self._make_cases(tmp_path)
        out_dir = tmp_path / "eval"
        code = main([
            "eval", "--cases", str(case_path), "--db", str(db_path),
            "--metrics", "length,retro_bleu", "--out-dir", str(out_dir),
        ])
        assert code == 0
        assert (out_dir / "length_rankings.csv").is_file()
        assert (out_dir / "retro_bleu_rankings.csv").is_file()
        assert (out_dir / "length_topk.json").is_file()
        assert (out_dir / "manifest.json").is_file()

    def test_results_match_library(self, tmp_path):
        case_path, db_path, all_routes = self._make_cases(tmp_path)
        out_dir = tmp_path / "eval"
        main(["eval", "--cases", str(case_path), "--db", str(db_path),
              "--metrics", "badowski", "--out-dir", str(out_dir)])
        rows = _read_csv(out_dir / "badowski_rankings.csv")
        db = load_db(db_path)
        cfg = ScoreConfig()
        for i, (ref, cands) in enumerate(all_routes):
            case = TargetCase(
                target_id=f"target{i}", reference_route=ref, candidates=tuple(cands)
            )
            expected = rank_case(case, Metric.BADOWSKI, db, cfg)
            row = next(r for r in rows if r["target_id"] == f"target{i}")
            assert int(row["best_rank"]) == expected.best_rank
            assert int(row["worst_rank"]) == expected.worst_rank
            assert int(row["pool_size"]) == expected.pool_size

    def test_missing_reference_skips_case(self, tmp_path, capsys):
        case_path, db_path, _ = self._make_cases(tmp_path, n_cases=2)
        cases = json.loads(case_path.read_text())
        cases["target0"]["reference"] = "gone.json"
        case_path.write_text(json.dumps(cases), encoding="utf-8")
        out_dir = tmp_path / "eval"
        code = main(["eval", "--cases", str(case_path), "--db", str(db_path),
                     "--out-dir", str(out_dir)])
        assert code == 0
        assert "skipped" in capsys.readouterr().err
        rows = _read_csv(out_dir / "retro_bleu_rankings.csv")
        assert [r["target_id"] for r in rows] == ["target1"]

    def test_unknown_metric_rejected(self, tmp_path):
        case_path, db_path, _ = self._make_cases(tmp_path, n_cases=1)
        code = main(["eval", "--cases", str(case_path), "--db", str(db_path),
                     "--metrics", "vibes", "--out-dir", str(tmp_path / "e")])
        assert code == 1

    def test_fifty_case_benchmark_matches_harness(self, tmp_path):
        from retrobleu.benchgen import make_ranking_benchmark
        from retrobleu.ngramdb import save_db as _save

        cases, db = make_ranking_benchmark(n_targets=50, n_candidates=5, seed=7)
        db_path = tmp_path / "bench.ngdb"
        _save(db, db_path)
        case_map = {}
        for case in cases:
            ref_path = tmp_path / f"{case.target_id}_ref.json"
            ref_path.write_text(serialize_route(case.reference_route), encoding="utf-8")
            cand_path = _write_routes(tmp_path, list(case.candidates),
                                      f"{case.target_id}_cands.json")
            case_map[case.target_id] = {
                "reference": ref_path.name,
                "candidates": [cand_path.name],
            }
        case_path = tmp_path / "cases.json"
        case_path.write_text(json.dumps(case_map), encoding="utf-8")

        out_dir = tmp_path / "bench_eval"
        assert main(["eval", "--cases", str(case_path), "--db", str(db_path),
                     "--metrics", "retro_bleu,length", "--out-dir", str(out_dir)]) == 0

        cfg = ScoreConfig()
        for metric in (Metric.RETRO_BLEU, Metric.LENGTH):
            rows = {r["target_id"]: r for r in _read_csv(out_dir / f"{metric.value}_rankings.csv")}
            assert len(rows) == 50
            for case in cases:
                expected = rank_case(case, metric, db, cfg)
                row = rows[case.target_id]
                assert int(row["best_rank"]) == expected.best_rank
                assert int(row["worst_rank"]) == expected.worst_rank

        # worker-pool evaluation writes identical bytes
        par_dir = tmp_path / "bench_eval_jobs"
        assert main(["eval", "--cases", str(case_path), "--db", str(db_path),
                     "--metrics", "retro_bleu,length", "--out-dir", str(par_dir),
                     "--jobs", "3"]) == 0
        for name in ("retro_bleu_rankings.csv", "length_rankings.csv",
                     "retro_bleu_topk.json", "length_topk.json"):
            assert (par_dir / name).read_bytes() == (out_dir / name).read_bytes()


class TestMineBigrams:
    def test_disjoint_databases(self, tmp_path):
        rng = random.Random(105)
        known_routes = [random_linear_route(rng, 3, templates=[f"k{i}", f"k{i}x", f"k{i}y"])
                        for i in range(5)]
        gen_routes = [random_linear_route(rng, 3, templates=[f"g{i}", f"g{i}x", f"g{i}y"])
                      for i in range(5)]
        known_path, gen_path = tmp_path / "known.ngdb", tmp_path / "gen.ngdb"
        save_db(build_db(known_routes, 2, TokenKind.TEMPLATE, radius=1), known_path)
        gen_db = build_db(gen_routes, 2, TokenKind.TEMPLATE, radius=1)
        save_db(gen_db, gen_path)
        out = tmp_path / "mined.json"
        code = main(["mine-bigrams", "--known", str(known_path),
                     "--generated", str(gen_path), "--top", "3", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["negative"]) == 3
        top_gen = sorted(gen_db.entries.items(), key=lambda kv: (-kv[1], kv[0].split("\t")))
        assert payload["negative"][0]["tokens"] == top_gen[0][0].split("\t")


class TestStats:
    def test_single_step_corpus_has_zero_coverage(self, tmp_path, golden_db_path):
        rng = random.Random(106)
        routes = [random_linear_route(rng, 1, route_id=f"s{i}") for i in range(5)]
        routes_path = _write_routes(tmp_path, routes)
        out = tmp_path / "stats.csv"
        code = main(["stats", "--routes", str(routes_path),
                     "--db", str(golden_db_path), "--out", str(out)])
        assert code == 0
        rows = _read_csv(out)
        assert rows[0]["coverage"] == "0.0"
        assert rows[0]["avg_length"] == "1.0"

    def test_matches_library_aggregation(self, tmp_path, corpus):
        routes_path, routes = corpus
        dbs = {}
        for n in (2, 3, 4):
            db = build_db(routes[:10], n, TokenKind.TEMPLATE, radius=1)
            path = tmp_path / f"db{n}.ngdb"
            save_db(db, path)
            dbs[n] = (db, path)
        out = tmp_path / "stats.csv"
        args = ["stats", "--routes", str(routes_path), "--out", str(out)]
        for _, (_, path) in sorted(dbs.items()):
            args += ["--db", str(path)]
        assert main(args) == 0
        rows = _read_csv(out)
        assert [row["n"] for row in rows] == ["2", "3", "4"]
        for row in rows:
            stats = aggregate_overlap(routes, dbs[int(row["n"])][0])
            assert float(row["mean_fraction"]) == stats.mean_fraction
            assert float(row["coverage"]) == stats.coverage

        parallel = tmp_path / "stats_jobs.csv"
        par_args = ["stats", "--routes", str(routes_path), "--out", str(parallel)]
        for _, (_, path) in sorted(dbs.items()):
            par_args += ["--db", str(path)]
        assert main(par_args + ["--jobs", "3"]) == 0
        assert parallel.read_text(encoding="utf-8") == out.read_text(encoding="utf-8")


class TestConfigPrecedence:
    def test_flag_beats_config_file_beats_default(self, tmp_path, corpus, monkeypatch):
        routes_path, routes = corpus
        db_path = tmp_path / "db.ngdb"
        save_db(build_db(routes, 2, TokenKind.TEMPLATE, radius=1), db_path)
        config = tmp_path / "retrobleu.conf"
        config.write_text("L = 5\nyield = 0.5\n", encoding="utf-8")
        monkeypatch.setenv("RETROBLEU_CONFIG", str(config))

        out_env = tmp_path / "env.csv"
        assert main(["score", "--db", str(db_path), "--routes", str(routes_path),
                     "--out", str(out_env)]) == 0
        manifest = json.loads((tmp_path / "env.csv.manifest.json").read_text())
        assert manifest["config"]["L"] == 5
        assert manifest["config"]["yield"] == 0.5

        out_flag = tmp_path / "flag.csv"
        assert main(["score", "--db", str(db_path), "--routes", str(routes_path),
                     "--out", str(out_flag), "-L", "7"]) == 0
        manifest = json.loads((tmp_path / "flag.csv.manifest.json").read_text())
        assert manifest["config"]["L"] == 7
        assert manifest["config"]["yield"] == 0.5

        monkeypatch.delenv("RETROBLEU_CONFIG")
        out_default = tmp_path / "default.csv"
        assert main(["score", "--db", str(db_path), "--routes", str(routes_path),
                     "--out", str(out_default)]) == 0
        manifest = json.loads((tmp_path / "default.csv.manifest.json").read_text())
        assert manifest["config"]["L"] == 3

    def test_scores_reflect_config(self, tmp_path, golden_db_path):
        out = tmp_path / "scores.csv"
        assert main(["score", "--db", str(golden_db_path),
                     "--routes", str(ROUTE_FILES["patent_convergent_5step"]),
                     "--out", str(out), "-L", "5"]) == 0
        row = _read_csv(out)[0]
        # L = len = 5: both terms saturate
        assert float(row["retro_bleu"]) == pytest.approx(2 * 2.718281828459045, abs=1e-9)

    def test_bad_config_value(self, tmp_path, golden_db_path, capsys):
        config = tmp_path / "bad.conf"
        config.write_text("L = banana\n", encoding="utf-8")
        code = main(["score", "--db", str(golden_db_path), "--config", str(config),
                     "--out", str(tmp_path / "x.csv")])
        assert code == 1
