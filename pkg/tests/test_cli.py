import csv
import json
import shutil
import subprocess
import sys

import pytest

import lilens
from lilens import load_embeddings, load_run
from lilens.cli import main

SYNTH_ARGS = ["--n-docs", "60", "--n-queries", "5", "--vocab-size", "24",
              "--dim", "8", "--seed", "3"]


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus")
    assert main(["synth", "--out-dir", str(out)] + SYNTH_ARGS) == 0
    return out


@pytest.fixture(scope="module")
def report_dir(corpus_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("report")
    assert main(["report"] + io_args(corpus_dir, out)) == 0
    return out


def io_args(corpus_dir, out_dir, with_stats=True):
    args = [
        "--queries", str(corpus_dir / "queries.lieb"),
        "--docs", str(corpus_dir / "docs.lieb"),
        "--run", str(corpus_dir / "candidates.run"),
        "--out-dir", str(out_dir),
    ]
    if with_stats:
        args += ["--stats", str(corpus_dir / "stats.tsv")]
    return args


def first_line(path):
    return path.read_text(encoding="utf-8").splitlines()[0]


class TestSynthCommand:
    def test_writes_four_loadable_files(self, corpus_dir, capsys):
        for name in ("queries.lieb", "docs.lieb", "candidates.run", "stats.tsv"):
            assert (corpus_dir / name).exists()
        docs = load_embeddings(corpus_dir / "docs.lieb")
        assert len(docs) == 60

    def test_seed_flag_changes_output(self, tmp_path):
        a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        base = SYNTH_ARGS[:-2]  # without the seed
        assert main(["synth", "--out-dir", str(a)] + base + ["--seed", "3"]) == 0
        assert main(["synth", "--out-dir", str(b)] + base + ["--seed", "3"]) == 0
        assert main(["synth", "--out-dir", str(c)] + base + ["--seed", "4"]) == 0
        same = (a / "docs.lieb").read_bytes()
        assert same == (b / "docs.lieb").read_bytes()
        assert same != (c / "docs.lieb").read_bytes()


class TestRerank:
    def test_writes_a_run_file(self, corpus_dir, tmp_path):
        assert main(["rerank"] + io_args(corpus_dir, tmp_path, with_stats=False)) == 0
        rankings = load_run(tmp_path / "rerank.run")
        assert len(rankings) == 5
        line = first_line(tmp_path / "rerank.run").split()
        assert len(line) == 6 and line[1] == "Q0" and line[3] == "1"
        assert line[5] == "lilens"

    def test_thread_count_does_not_change_bytes(self, corpus_dir, tmp_path):
        one, many = tmp_path / "t1", tmp_path / "t8"
        args = io_args(corpus_dir, one, with_stats=False) + ["--threads", "1"]
        assert main(["rerank"] + args) == 0
        args = io_args(corpus_dir, many, with_stats=False) + ["--threads", "8"]
        assert main(["rerank"] + args) == 0
        assert (one / "rerank.run").read_bytes() == (many / "rerank.run").read_bytes()


class TestReport:
    def test_emits_every_table(self, report_dir):
        for name in ("importance.csv", "delta_es.csv", "spectral.csv",
                      "matches.csv", "report.json"):
            assert (report_dir / name).exists(), name

    def test_csv_headers_are_stable(self, report_dir):
        assert first_line(report_dir / "importance.csv") == \
            "word,query_id,tau_ap,mean_tau_ap,idf_word,n_queries"
        assert first_line(report_dir / "delta_es.csv") == \
            "term,granularity,delta_es,partial,n_pairs_used,n_pairs_skipped,idf"
        assert first_line(report_dir / "spectral.csv") == "term,m,ratio,idf_subword"
        assert first_line(report_dir / "matches.csv") == \
            "query_id,position,token,exact_match_freq,other_query_term_freq,top_matches"

    def test_report_json_shape(self, report_dir):
        blob = json.loads((report_dir / "report.json").read_text())
        assert blob["toolkit_version"] == lilens.__version__
        assert blob["config"] == {"seed": 0, "tau_ap_mode": "asym", "spectral_cap": 50000}
        for key in ("pearson_idf_tauap", "pearson_idf_deltaes", "pearson_idf_spectral"):
            entry = blob[key]
            assert ("r" in entry) or ("reason" in entry)
            if "r" in entry:
                assert entry["r"] == round(entry["r"], 4)

    def test_matches_cell_is_json(self, report_dir):
        with open(report_dir / "matches.csv", newline="", encoding="utf-8") as fh:
            row = next(csv.DictReader(fh))
        parsed = json.loads(row["top_matches"])
        assert parsed and all(
            isinstance(text, str) and 0.0 < freq <= 1.0 for text, freq in parsed
        )

    def test_reruns_are_byte_identical(self, corpus_dir, report_dir, tmp_path):
        again = tmp_path / "again"
        assert main(["report"] + io_args(corpus_dir, again)) == 0
        for name in ("importance.csv", "delta_es.csv", "spectral.csv",
                      "matches.csv", "report.json"):
            assert (again / name).read_bytes() == (report_dir / name).read_bytes()


class TestStandaloneCommands:
    def test_importance(self, corpus_dir, tmp_path):
        assert main(["importance"] + io_args(corpus_dir, tmp_path)) == 0
        assert (tmp_path / "importance.csv").exists()

    def test_delta_es(self, corpus_dir, tmp_path):
        assert main(["delta-es"] + io_args(corpus_dir, tmp_path)) == 0
        body = (tmp_path / "delta_es.csv").read_text().splitlines()[1:]
        kinds = {line.split(",")[1] for line in body}
        assert kinds == {"subword", "word"}

    def test_spectral_writes_sidecar(self, corpus_dir, tmp_path):
        args = io_args(corpus_dir, tmp_path) + ["--spectral-cap", "40", "--seed", "1"]
        assert main(["spectral"] + args) == 0
        assert (tmp_path / "spectral.csv").exists()
        values = json.loads((tmp_path / "spectral_values.json").read_text())
        assert values and all(isinstance(v, list) for v in values.values())

    def test_match_stats_needs_no_stats_file(self, corpus_dir, tmp_path):
        args = ["match-stats"] + io_args(corpus_dir, tmp_path, with_stats=False)
        assert main(args) == 0
        assert (tmp_path / "matches.csv").exists()

    def test_tau_ap_mode_flag(self, corpus_dir, tmp_path):
        args = io_args(corpus_dir, tmp_path) + ["--tau-ap-mode", "sym"]
        assert main(["importance"] + args) == 0


class TestExitCodes:
    def test_missing_input_file(self, corpus_dir, tmp_path, capsys):
        args = io_args(corpus_dir, tmp_path, with_stats=False)
        args[args.index("--docs") + 1] = str(tmp_path / "nope.lieb")
        assert main(["rerank"] + args) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_run_file(self, corpus_dir, tmp_path, capsys):
        bad = tmp_path / "bad.run"
        bad.write_text("only three fields\n")
        args = io_args(corpus_dir, tmp_path, with_stats=False)
        args[args.index("--run") + 1] = str(bad)
        assert main(["rerank"] + args) == 2

    def test_bad_flag_value_is_an_argparse_error(self, corpus_dir, tmp_path):
        args = io_args(corpus_dir, tmp_path) + ["--tau-ap-mode", "sideways"]
        with pytest.raises(SystemExit) as exc:
            main(["importance"] + args)
        assert exc.value.code == 2

    def test_nonpositive_threads(self, corpus_dir, tmp_path):
        args = io_args(corpus_dir, tmp_path, with_stats=False) + ["--threads", "0"]
        assert main(["rerank"] + args) == 2

    def test_fail_fast_leaves_no_outputs(self, corpus_dir, tmp_path):
        bad = tmp_path / "bad.run"
        bad.write_text("q00 Q0 d0000 one 1.0 tag\n")
        out = tmp_path / "out"
        out.mkdir()
        args = io_args(corpus_dir, out)
        args[args.index("--run") + 1] = str(bad)
        assert main(["report"] + args) == 2
        assert list(out.iterdir()) == []

    def test_single_candidate_queries_cannot_rank(self, corpus_dir, tmp_path, capsys):
        docs = load_embeddings(corpus_dir / "docs.lieb")
        queries = load_embeddings(corpus_dir / "queries.lieb")
        doc_id = next(iter(docs))
        run = tmp_path / "one.run"
        run.write_text(
            "".join(f"{qid} Q0 {doc_id} 1 1.0 x\n" for qid in queries)
        )
        args = io_args(corpus_dir, tmp_path)
        args[args.index("--run") + 1] = str(run)
        assert main(["importance"] + args) == 2
        assert "no rankable queries" in capsys.readouterr().err

    def test_internal_error_is_exit_3(self, corpus_dir, tmp_path, monkeypatch, capsys):
        import lilens.cli as cli_module

        def boom(cfg):
            raise RuntimeError("synthetic crash")

        monkeypatch.setattr(cli_module, "cmd_rerank", boom)
        args = io_args(corpus_dir, tmp_path, with_stats=False)
        assert main(["rerank"] + args) == 3
        assert "internal error" in capsys.readouterr().err


class TestInstalledScript:
    def test_console_script_runs(self, tmp_path):
        exe = shutil.which("lilens")
        if exe is None:
            pytest.skip("console script not on PATH")
        proc = subprocess.run(
            [exe, "synth", "--out-dir", str(tmp_path)] + SYNTH_ARGS,
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "docs.lieb").exists()

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "lilens", "synth", "--out-dir", str(tmp_path)]
            + SYNTH_ARGS,
            capture_output=True, text=True, timeout=120,
        )
        assert proc.returncode == 0, proc.stderr
