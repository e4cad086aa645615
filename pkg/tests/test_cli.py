from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest

from clonecurve.cli import main
from clonecurve.curve import format_curve, preset
from clonecurve.harness import write_labeled_pairs
from clonecurve.tokenizer import CodeBlock, TokenBag, write_blocks
from conftest import PLANT, lattice_labels

CORPUS = Path(__file__).parent / "data" / "corpus"


def _run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _java_corpus(root: Path) -> Path:
    # 30 tokens per copy
    body = (
        "int total = 0; for (int i = 0; i < n; i++) { total += values[i] * 2; }"
        " String msg = \"sum\" + total; log(msg, level); cache.put(key, total); return total;"
    )
    (root / "A.java").write_text(f"class A {{\n int f(int n) {{ {body} }}\n int g(int n) {{ {body} log(n); }}\n}}\n")
    (root / "B.java").write_text(f"class B {{\n int h(int n) {{ {body} }}\n}}\n")
    return root


class TestDetect:
    def test_preset_runs_eight_instances(self, tmp_path, capsys):
        out = tmp_path / "out"
        code, stdout, _ = _run(capsys, "detect", CORPUS, "--preset", "sourcerercc-java", "--mode", "curve-optimized", "-o", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["mode"] == "curve-optimized"
        assert len(report["per_instance"]) == 8
        assert [s["utlt"] for s in report["per_instance"]] == [30, 45, 49, 78, 98, 238, 389, None]
        assert "tokenize_time" in report and "detect_time" in report
        assert (out / "pairs.csv").exists() and (out / "scatter.csv").exists()
        assert not (out / "warnings.txt").exists()
        assert "tokenize" in stdout and "detect" in stdout

    def test_single(self, tmp_path, capsys):
        out = tmp_path / "out"
        code, _, _ = _run(capsys, "detect", _java_corpus(tmp_path), "--single", "750,19", "-o", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["mode"] == "single"
        assert len(report["per_instance"]) == 1
        # f, g and h are near copies of each other
        assert report["pair_count"] == 3
        with open(out / "pairs.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert {(r["file_a"], r["file_b"]) for r in rows} == {("A.java", "A.java"), ("A.java", "B.java")}
        assert all(r["found_by"] == "0" for r in rows)

    def test_empty_directory(self, tmp_path, capsys):
        (tmp_path / "src").mkdir()
        out = tmp_path / "out"
        code, _, _ = _run(capsys, "detect", tmp_path / "src", "--preset", "cloneworks-java", "-o", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["pair_count"] == 0 and report["total_blocks"] == 0
        assert (out / "pairs.csv").read_text().count("\n") == 1

    def test_partial_failures_exit_two(self, tmp_path, capsys):
        (tmp_path / "src").mkdir()
        src = _java_corpus(tmp_path / "src")
        (src / "Broken.java").write_text("class Broken { void f() { x(); }\n")
        out = tmp_path / "out"
        code, _, err = _run(capsys, "detect", src, "--single", "750,19", "-o", out)
        assert code == 2
        assert "Broken.java" in (out / "warnings.txt").read_text()
        assert "warnings" in err
        assert json.loads((out / "report.json").read_text())["pair_count"] == 3

    def test_missing_corpus(self, tmp_path, capsys):
        code, _, err = _run(capsys, "detect", tmp_path / "nope", "--single", "750,19", "-o", tmp_path / "out")
        assert code == 1
        assert err.startswith("clonecurve: error:") and err.count("\n") == 1

    def test_invalid_curve_file(self, tmp_path, capsys):
        (tmp_path / "bad.curve").write_text("700,40\n750,60\n")
        code, _, err = _run(capsys, "detect", CORPUS, "--curve", tmp_path / "bad.curve", "-o", tmp_path / "out")
        assert code == 1
        assert "NonMonotoneST" in err

    def test_bad_single(self, tmp_path, capsys):
        code, _, err = _run(capsys, "detect", CORPUS, "--single", "75%", "-o", tmp_path / "out")
        assert code == 1 and "--single" in err

    def test_curve_file_auto_bound(self, tmp_path, capsys):
        (tmp_path / "c.curve").write_text("750,40\n700,60\n")
        out = tmp_path / "out"
        code, _, _ = _run(capsys, "detect", CORPUS, "--curve", tmp_path / "c.curve", "--auto-bound", "--mode", "curve-optimized", "-o", out)
        assert code == 0
        assert [s["utlt"] for s in json.loads((out / "report.json").read_text())["per_instance"]] == [78, None]

    def test_parallelism_does_not_change_outputs(self, tmp_path, capsys, monkeypatch):
        _run(capsys, "gen", "--seed", 3, "--n", 150, "-o", tmp_path / "g")
        corpus = tmp_path / "g" / "corpus.txt"
        _run(capsys, "detect", corpus, "--preset", "sourcerercc-java", "--mode", "curve-raw", "-j", 1, "-o", tmp_path / "a")
        monkeypatch.setenv("CLONECURVE_JOBS", "3")
        _run(capsys, "detect", corpus, "--preset", "sourcerercc-java", "--mode", "curve-raw", "-o", tmp_path / "b")
        assert (tmp_path / "a" / "pairs.csv").read_bytes() == (tmp_path / "b" / "pairs.csv").read_bytes()
        assert (tmp_path / "a" / "pairs.csv").read_text().count("\n") > 1


class TestPlan:
    def test_worked_example(self, tmp_path, capsys):
        (tmp_path / "c.curve").write_text("750,40\n700,60\n")
        code, out, _ = _run(capsys, "plan", "--curve", tmp_path / "c.curve")
        assert code == 0
        assert out == "750,40,78\n700,60\n"

    @pytest.mark.parametrize("name", ["sourcerercc-java", "cloneworks-java"])
    def test_preset(self, capsys, name):
        code, out, _ = _run(capsys, "plan", "--preset", name)
        assert code == 0
        assert out == format_curve(preset(name))

    def test_non_monotone(self, tmp_path, capsys):
        (tmp_path / "c.curve").write_text("750,40\n750,60\n")
        code, _, err = _run(capsys, "plan", "--curve", tmp_path / "c.curve")
        assert code == 1
        assert "NonMonotoneST" in err

    def test_already_bounded_file(self, tmp_path, capsys):
        (tmp_path / "c.curve").write_text("750,40,78\n700,60\n")
        code, _, err = _run(capsys, "plan", "--curve", tmp_path / "c.curve")
        assert code == 1
        assert "AlreadyBounded" in err


class TestGen:
    def test_byte_identical(self, tmp_path, capsys):
        for name in ("a", "b"):
            assert _run(capsys, "gen", "--seed", 1, "--n", 200, "-o", tmp_path / name)[0] == 0
        for f in ("corpus.txt", "ground_truth.csv"):
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
        assert (tmp_path / "a" / "corpus.txt").read_text().count("\n") == 200


class TestCalibrate:
    def test_planted_curve(self, tmp_path, capsys):
        grid = [s for s, _ in PLANT]
        write_labeled_pairs(lattice_labels(PLANT, grid), tmp_path / "labels.csv")
        code, out, _ = _run(
            capsys, "calibrate", tmp_path / "labels.csv", "--grid", ",".join(map(str, grid)), "--target", "1.0",
            "-o", tmp_path / "c.curve",
        )
        assert code == 0
        assert out == ""
        rows = [tuple(int(x) for x in line.split(",")[:2]) for line in (tmp_path / "c.curve").read_text().splitlines()]
        assert rows == list(PLANT)

    def test_range_grid_and_skipped_thresholds(self, tmp_path, capsys):
        grid = range(800, 499, -10)
        write_labeled_pairs(lattice_labels(PLANT, list(grid)), tmp_path / "labels.csv")
        code, out, err = _run(capsys, "calibrate", tmp_path / "labels.csv", "--grid", "800:500:10", "--target", "1")
        assert code == 2
        assert [tuple(map(int, line.split(",")[:2])) for line in out.splitlines()] == list(PLANT)
        assert err.count("NoFeasibleLTLT") == 4

    def test_empty_input(self, tmp_path, capsys):
        (tmp_path / "labels.csv").write_text("min_size,similarity_permille,label\n")
        code, _, err = _run(capsys, "calibrate", tmp_path / "labels.csv")
        assert code == 1
        assert "no labeled pairs" in err


class TestBench:
    def test_two_identical_blocks(self, tmp_path, capsys):
        bag = TokenBag({f"t{i}": 1 for i in range(30)})
        write_blocks([CodeBlock(0, "a", 1, 5, bag), CodeBlock(1, "b", 1, 5, bag)], tmp_path / "corpus.txt")
        code, out, _ = _run(capsys, "bench", tmp_path / "corpus.txt", "-o", tmp_path / "bench.json")
        assert code == 0
        data = json.loads((tmp_path / "bench.json").read_text())
        assert [data[m]["pair_count"] for m in ("single", "curve-raw", "curve-optimized")] == [1, 1, 1]
        assert data["lossless"] is True
        assert "optimized vs raw detection time" in out
        assert "optimized == raw pair set: yes" in out

    def test_generated_corpus(self, tmp_path, capsys):
        _run(capsys, "gen", "--seed", 2, "--n", 300, "-o", tmp_path / "g")
        code, out, _ = _run(capsys, "bench", tmp_path / "g" / "corpus.txt", "--preset", "cloneworks-java")
        assert code == 0
        lines = {line.split()[0]: line.split() for line in out.splitlines() if line.startswith(("single", "curve-"))}
        assert int(lines["curve-raw"][2]) == int(lines["curve-optimized"][2]) >= int(lines["single"][2])
        assert int(lines["curve-optimized"][4]) <= int(lines["curve-raw"][4])
