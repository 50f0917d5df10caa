"""Command-line harness: subcommands, exit codes and golden outputs."""

import json

import numpy as np
import pytest

import levlu.cli as cli

from conftest import DATA

CONFLICT8 = str(DATA / "conflict8.mtx")
DIAG5 = str(DATA / "diag5.mtx")


def checksum_of(out):
    for line in out.splitlines():
        if line.startswith("checksum "):
            return line.split()[1]
    raise AssertionError(f"no checksum line in {out!r}")


def test_factor_default_parallel(capsys):
    assert cli.main(["factor", CONFLICT8, "--check-residual"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "n=8" in out
    assert "deps=relaxed levels=4" in out
    assert "modes: Stream=4" in out
    assert float(out.split("residual ")[1].split()[0]) <= 1e-12


def test_factor_paths_agree_bitwise(capsys):
    sums = []
    for flags in (["--sequential", "left"], ["--sequential", "right"],
                  ["--parallel", "--threads", "2"]):
        assert cli.main(["factor", CONFLICT8] + flags) == cli.EXIT_OK
        sums.append(checksum_of(capsys.readouterr().out))
    assert len(set(sums)) == 1


def test_factor_atomic(capsys):
    code = cli.main(["factor", CONFLICT8, "--parallel", "--atomic",
                     "--threads", "2", "--check-residual"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert float(out.split("residual ")[1].split()[0]) <= 1e-12


def test_factor_stats_out_json(tmp_path, capsys):
    path = tmp_path / "report.json"
    assert cli.main(["factor", CONFLICT8, "--check-residual",
                     "--stats-out", str(path)]) == cli.EXIT_OK
    capsys.readouterr()
    d = json.loads(path.read_text())
    assert d["n"] == 8
    assert d["nz"] == 19
    assert d["deps_method"] == "relaxed"
    assert d["level_count"] == 4
    assert set(d["times"]) == {"symbolic", "detection", "levelization", "numeric"}
    assert d["residual"] <= 1e-12
    assert d["mode_histogram"] == {"Stream": 4}


def test_factor_stats_out_csv(tmp_path, capsys):
    path = tmp_path / "report.csv"
    assert cli.main(["factor", CONFLICT8, "--stats-out", str(path)]) == cli.EXIT_OK
    capsys.readouterr()
    header, row = path.read_text().strip().splitlines()
    assert header.split(",")[:6] == ["matrix", "n", "nz", "nnz", "deps_method",
                                    "level_count"]
    assert row.split(",")[1:4] == ["8", "19", "19"]


def test_factor_stats_out_bad_extension(capsys):
    code = cli.main(["factor", CONFLICT8, "--stats-out", "report.txt"])
    assert code == cli.EXIT_USAGE
    capsys.readouterr()


def test_factor_precision_single(capsys):
    assert cli.main(["factor", CONFLICT8, "--precision", "single",
                     "--check-residual"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert float(out.split("residual ")[1].split()[0]) <= 1e-5


def test_factor_with_symmetric_perm(tmp_path, capsys):
    p = tmp_path / "perm.txt"
    p.write_text("".join(f"{i}\n" for i in [4, 3, 2, 1, 0]))
    assert cli.main(["factor", DIAG5, "--perm", str(p),
                     "--check-residual"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "n=5" in out
    capsys.readouterr()


def test_factor_row_col_perms(tmp_path, capsys):
    pr = tmp_path / "pr.txt"
    pc = tmp_path / "pc.txt"
    order = "".join(f"{i}\n" for i in [1, 0, 2, 3, 4])
    pr.write_text(order)
    pc.write_text(order)
    assert cli.main(["factor", DIAG5, "--row-perm", str(pr),
                     "--col-perm", str(pc)]) == cli.EXIT_OK
    capsys.readouterr()
    # --perm conflicts with the pair
    assert cli.main(["factor", DIAG5, "--perm", str(pr),
                     "--row-perm", str(pr), "--col-perm", str(pc)]) == cli.EXIT_USAGE
    capsys.readouterr()
    assert cli.main(["factor", DIAG5, "--row-perm", str(pr)]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_exit_usage_cases(tmp_path, capsys):
    assert cli.main(["factor", str(tmp_path / "missing.mtx")]) == cli.EXIT_USAGE
    capsys.readouterr()
    assert cli.main(["factor", CONFLICT8, "--sequential", "left",
                     "--parallel"]) == cli.EXIT_USAGE
    capsys.readouterr()
    bad = tmp_path / "bad.mtx"
    bad.write_text("not a matrix\n")
    assert cli.main(["factor", str(bad)]) == cli.EXIT_USAGE
    capsys.readouterr()
    with pytest.raises(SystemExit):
        # argparse rejects the unknown choice; main() maps it when called
        cli.build_parser().parse_args(["factor", CONFLICT8, "--deps", "bogus"])
    assert cli.main(["factor", CONFLICT8, "--deps", "bogus"]) == cli.EXIT_USAGE
    capsys.readouterr()


def test_exit_pivot(tmp_path, capsys):
    m = tmp_path / "singular.mtx"
    m.write_text("%%MatrixMarket matrix coordinate real general\n"
                 "2 2 4\n1 1 1.0\n2 1 1.0\n1 2 1.0\n2 2 1.0\n")
    for flags in ([], ["--sequential", "left"], ["--sequential", "right"]):
        assert cli.main(["factor", str(m)] + flags) == cli.EXIT_PIVOT
        assert "pivot" in capsys.readouterr().err


def test_upward_parallel_needs_allow_unsafe(capsys):
    assert cli.main(["factor", CONFLICT8, "--deps", "upward",
                     "--parallel"]) == cli.EXIT_USAGE
    capsys.readouterr()
    # sequential upward is fine
    assert cli.main(["factor", CONFLICT8, "--deps", "upward",
                     "--sequential", "left"]) == cli.EXIT_OK
    capsys.readouterr()


def test_exit_hazard_with_detect_races(capsys):
    code = cli.main(["factor", CONFLICT8, "--deps", "upward", "--parallel",
                     "--allow-unsafe", "--detect-races"])
    assert code == cli.EXIT_HAZARD
    assert "hazard" in capsys.readouterr().err


def test_level_stats_golden_conflict8(capsys):
    assert cli.main(["level-stats", CONFLICT8]) == cli.EXIT_OK
    expect = (DATA / "golden_conflict8_level_stats.csv").read_text()
    assert capsys.readouterr().out == expect


def test_level_stats_golden_diag5(capsys):
    assert cli.main(["level-stats", DIAG5]) == cli.EXIT_OK
    expect = (DATA / "golden_diag5_level_stats.csv").read_text()
    assert capsys.readouterr().out == expect


def test_deps_compare_golden_conflict8(tmp_path, capsys):
    out = tmp_path / "deps.csv"
    assert cli.main(["deps-compare", CONFLICT8, "--csv", str(out)]) == cli.EXIT_OK
    capsys.readouterr()
    assert out.read_bytes() == (DATA / "golden_conflict8_deps.csv").read_bytes()


def test_deps_compare_golden_diag5(tmp_path, capsys):
    out = tmp_path / "deps.csv"
    assert cli.main(["deps-compare", DIAG5, "--csv", str(out)]) == cli.EXIT_OK
    capsys.readouterr()
    assert out.read_bytes() == (DATA / "golden_diag5_deps.csv").read_bytes()


def test_deps_compare_csv_stdout(capsys):
    assert cli.main(["deps-compare", CONFLICT8, "--csv", "-"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "method,edges,levels\nupward,4,3\nexact,5,4\nrelaxed,7,4\n" in out


def test_solve_roundtrip(tmp_path, capsys):
    rhs = tmp_path / "b.txt"
    xs = tmp_path / "x.txt"
    b = np.array([2.0, 6.0, 12.0, 20.0, 30.0])
    rhs.write_text("".join(f"{v}\n" for v in b))
    assert cli.main(["solve", DIAG5, str(rhs), "--out", str(xs)]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert f"wrote {xs}" in out
    x = np.loadtxt(xs)
    assert np.allclose(x, [1.0, 2.0, 3.0, 4.0, 5.0])
    assert float(out.split("residual ")[1].split()[0]) <= 1e-12


def test_solve_rejects_bad_rhs_length(tmp_path, capsys):
    rhs = tmp_path / "b.txt"
    rhs.write_text("1.0\n2.0\n")
    assert cli.main(["solve", DIAG5, str(rhs)]) == cli.EXIT_USAGE
    capsys.readouterr()
