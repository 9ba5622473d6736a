# -*- coding: utf-8 -*-
import argparse
import json
import logging
import math
import os
from fractions import Fraction

import pytest

from kernex.geometry import Mat2, VPoint, WPoint
from kernex.global_side import GeometricSide, GeomTerm, TraceRow
from kernex.scripts.kernex import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, EXIT_REFUSED, main
from kernex.scripts.lib.commands import run
from kernex.scripts.lib.decr_action import Decrement
from kernex.scripts.lib.log import DEFAULT_LEVEL_INDEX, log_get_level, log_set_level
from kernex.scripts.lib.report import CheckResult, Report
from kernex.scripts.lib.run_config import (
    ConfigError,
    RunConfig,
    format_complex,
    parse_alpha,
    parse_complex,
    parse_ints,
)


def as_complex(value) -> complex:
    if isinstance(value, dict):
        return complex(value["re"], value["im"])
    return complex(value)


@pytest.fixture(autouse=True)
def restore_log_level():
    level = logging.getLogger().level
    yield
    logging.getLogger().setLevel(level)


def test_verify_quadric(tmp_path):
    out = tmp_path / "quadric.json"
    assert main(["verify-quadric", "--p", "3", "--out", str(out)]) == EXIT_PASS
    report = json.loads(out.read_text())
    assert report["passed"] is True
    (check,) = report["checks"]
    assert check["name"] == "quadric p=3 b=1"
    assert check["expected"] == check["computed"] == 130
    assert check["tolerance"] == 0.0
    assert report["term_counts"] == {"quadric": 729}
    assert "elapsed" not in report


def test_reports_are_reproducible(tmp_path):
    out = tmp_path / "run.json"
    argv = ["verify-twist", "--p", "2", "--t-val", "1", "--samples", "3", "--seed", "7", "--out", str(out)]
    assert main(argv) == EXIT_PASS
    first = out.read_bytes()
    assert main(argv) == EXIT_PASS
    assert out.read_bytes() == first


def test_compute_is_needs_b_and_alpha():
    assert main(["compute-is"]) == EXIT_CONFIG
    assert main(["compute-is", "--b", "1"]) == EXIT_CONFIG


def test_bad_arguments_exit_with_config_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify-twist", "--alpha", "1,2,3"])
    assert exc.value.code == EXIT_CONFIG
    assert main(["verify-quadric", "--p", "4"]) == EXIT_CONFIG
    assert main(["verify-quadric", "--p", "3", "--b", "3"]) == EXIT_CONFIG


@pytest.mark.parametrize(
    "argv",
    [
        ["verify-gauss", "--p", "2"],
        ["verify-twist", "--samples", "4"],
        ["verify-localzeta", "--p", "3", "--samples", "2"],
        ["verify-dirichlet", "--samples", "2"],
        pytest.param(["verify-poisson", "--samples", "2"], marks=pytest.mark.integration),
        pytest.param(["verify-structure", "--samples", "20"], marks=pytest.mark.integration),
    ],
)
def test_verify_commands_pass(tmp_path, argv):
    out = tmp_path / "report.json"
    assert main(argv + ["--out", str(out)]) == EXIT_PASS
    report = json.loads(out.read_text())
    assert report["passed"] is True
    assert report["checks"]


def test_verify_localzeta_ramified(tmp_path):
    out = tmp_path / "localzeta.json"
    assert main(["verify-localzeta", "--p", "2,3", "--samples", "1", "--out", str(out)]) == EXIT_PASS
    checks = {c["name"]: c for c in json.loads(out.read_text())["checks"]}
    for p in (2, 3):
        assert checks[f"ramified vanishing p={p}"]["computed"] is True
        assert checks[f"unramified control p={p}"]["computed"] is False


def test_verify_gauss_floating(tmp_path):
    out = tmp_path / "gauss.json"
    argv = ["verify-gauss", "--p", "5", "--t-val", "1", "--backend", "floating", "--out", str(out)]
    assert main(argv) == EXIT_PASS
    checks = json.loads(out.read_text())["checks"]
    assert [c["name"] for c in checks] == [f"gauss p=5 m=1 b={b}" for b in range(1, 5)]
    for check in checks:
        assert check["expected"] == pytest.approx(1 / 125)
        assert check["delta"] <= 1e-9


def test_verify_dirichlet_residue(tmp_path):
    out = tmp_path / "dirichlet.json"
    assert main(["verify-dirichlet", "--samples", "1", "--out", str(out)]) == EXIT_PASS
    checks = {c["name"]: c for c in json.loads(out.read_text())["checks"]}
    residue = checks["residue at s=-2"]
    expected = as_complex(residue["expected"])
    assert expected == pytest.approx(6 / math.pi**2, rel=1e-3)
    assert residue["delta"] <= 0.02 * abs(expected)
    assert checks["pole refused at s=-2"]["passed"] is True


def test_budget_refusal(monkeypatch):
    monkeypatch.setenv("KERNEX_EXACT_BUDGET", "100")
    assert main(["verify-gauss", "--p", "3"]) == EXIT_REFUSED


def test_env_file(monkeypatch, tmp_path):
    env_file = tmp_path / "small.env"
    env_file.write_text("# tight budget\nKERNEX_EXACT_BUDGET=100\n")
    # set then unset so the value load_env writes is removed on teardown
    monkeypatch.setenv("KERNEX_EXACT_BUDGET", "0")
    monkeypatch.delenv("KERNEX_EXACT_BUDGET")
    assert main(["verify-gauss", "--p", "3", "--env", str(env_file)]) == EXIT_REFUSED
    assert os.environ["KERNEX_EXACT_BUDGET"] == "100"
    monkeypatch.setenv("KERNEX_EXACT_BUDGET", str(2**24))
    assert main(["verify-quadric", "--p", "3", "--env", str(env_file)]) == EXIT_PASS
    assert os.environ["KERNEX_EXACT_BUDGET"] == str(2**24)
    assert main(["verify-quadric", "--p", "3", "--env", str(tmp_path / "missing.env")]) == EXIT_CONFIG


def test_failed_check_exit(mocker):
    mocker.patch("kernex.scripts.lib.commands.quadric_count", return_value=131)
    assert main(["verify-quadric", "--p", "3"]) == EXIT_FAIL


def test_dirichlet_needs_quadric_alpha():
    assert main(["verify-dirichlet", "--alpha", "1,0,0,1,1,0", "--samples", "1"]) == EXIT_CONFIG


def test_geometric_side_writes_terms(mocker, tmp_path):
    w = WPoint(Fraction(1), VPoint(Mat2.identity(Fraction(1)), Fraction(1), Fraction(1)))
    terms = (GeomTerm(1, w, True, True, 0.25 + 0j, 1e-6), GeomTerm(2, w, False, reason="indicator"))
    side = GeometricSide(
        (TraceRow(1, 1, 0.25 + 0j, 1e-6, 1, 0), TraceRow(2, 2, 0.25 + 0j, 1e-6, 1, 0)), terms
    )
    mocked = mocker.patch("kernex.scripts.lib.commands.geometric_side", return_value=side)
    out = tmp_path / "side.json"
    assert main(["geometric-side", "--height", "1", "--cmax", "1", "--out", str(out)]) == EXIT_PASS
    (window, doubled), = [call.kwargs["windows"] for call in mocked.call_args_list]
    assert (window.H, doubled.H) == (1, 2)
    assert (tmp_path / "side.terms.csv").read_text().count("\n") == 3
    data = json.loads((tmp_path / "side.terms.json").read_text())
    assert [row["H"] for row in data["config"]["windows"]] == [1, 2]
    assert len(data["terms"]) == 2
    report = json.loads(out.read_text())
    assert report["term_counts"]["included H=2 C=2"] == 1


def test_run_returns_report():
    report = run(RunConfig("verify-quadric", p=(2,)))
    assert report.passed
    assert report.elapsed > 0


def test_run_config_toml(tmp_path):
    config = RunConfig(
        "verify-localzeta",
        p=(2, 3),
        b=Fraction(-3, 2),
        alpha=tuple(Fraction(x) for x in (1, 0, "1/3", 0, 2, -1)),
        s=2 + 0.5j,
        chi=(1, -1j),
    )
    text = config.dumps()
    assert 'b = "-3/2"' in text
    assert RunConfig.loads(text) == config
    path = tmp_path / "run.toml"
    config.dump(path)
    assert RunConfig.load(path) == config


def test_run_config_precedence(monkeypatch, tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('command = "verify-gauss"\np = [2]\nseed = 5\nworkers = 3\n')
    monkeypatch.setenv("KERNEX_WORKERS", "2")
    assert RunConfig.from_sources("verify-gauss").workers == 2
    config = RunConfig.from_sources("verify-gauss", path, {"seed": 9, "p": None})
    assert (config.p, config.seed, config.workers) == ((2,), 9, 3)
    with pytest.raises(ConfigError, match="not 'verify-twist'"):
        RunConfig.from_sources("verify-twist", path)
    with pytest.raises(ConfigError, match="does not exist"):
        RunConfig.from_sources("verify-gauss", tmp_path / "missing.toml")


def test_run_config_errors():
    with pytest.raises(ConfigError, match="unknown field"):
        RunConfig.loads('command = "verify-gauss"\nprimes = [2]\n')
    with pytest.raises(ConfigError, match="invalid TOML"):
        RunConfig.loads("command = ")
    with pytest.raises(ConfigError, match="unknown command"):
        RunConfig("verify-everything")
    with pytest.raises(ConfigError, match="backend"):
        RunConfig("verify-gauss", backend="gpu")
    with pytest.raises(ConfigError, match="b must be nonzero"):
        RunConfig("verify-gauss", b=Fraction(0))
    with pytest.raises(ConfigError, match="missing required field 'alpha'"):
        RunConfig("compute-is", b=Fraction(1))


def test_with_defaults():
    config = RunConfig("verify-gauss", p=(5,)).with_defaults(p=(2, 3), samples=4)
    assert config.p == (5,)
    assert config.samples == 4


@pytest.mark.parametrize(
    "text, expected",
    [("1+2i", 1 + 2j), ("i", 1j), ("-1", -1 + 0j), (" 0.5 - 1.5i ", 0.5 - 1.5j), (3, 3 + 0j)],
)
def test_parse_complex(text, expected):
    assert parse_complex(text) == expected


def test_complex_format():
    assert parse_complex(format_complex(0.25 - 2j)) == 0.25 - 2j
    with pytest.raises(ConfigError, match="not a complex number"):
        parse_complex("one")


def test_parse_alpha_and_ints():
    assert parse_alpha("1, 0, 1/3,0 ,2,-1") == tuple(Fraction(x) for x in (1, 0, "1/3", 0, 2, -1))
    with pytest.raises(ConfigError, match="6 entries"):
        parse_alpha("1,2")
    with pytest.raises(ConfigError, match="rational"):
        parse_alpha("1,2,3,4,5,x")
    assert parse_ints("2, 3,5") == (2, 3, 5)
    assert parse_ints(7) == (7,)
    with pytest.raises(ConfigError):
        parse_ints("2,three")


def test_check_results():
    close = CheckResult.of("close", 1.0, 1.0 + 1e-10, 1e-9)
    assert close.passed and close.delta == pytest.approx(1e-10)
    assert not CheckResult.of("far", 1j, 0, 0.5).passed
    exact = CheckResult.exact("exact", Fraction(1, 27), Fraction(1, 27))
    assert exact.passed and exact.delta == 0.0
    wrong = CheckResult.exact("wrong", 130, 131)
    assert not wrong.passed and wrong.delta == 1.0
    opaque = CheckResult.exact("opaque", "a", "b")
    assert opaque.delta == math.inf
    assert CheckResult.exact("predicate", "x", "y", equal=True).passed
    assert CheckResult.bound("under", 1.0, 0.5).passed
    over = CheckResult.bound("over", 1.0, 1.25)
    assert not over.passed and over.delta == 0.25


def test_report():
    report = Report("verify-gauss", {"p": [2]})
    assert not report.passed
    report.add(CheckResult.exact("one", 1, 1))
    report.count("terms", 64)
    report.count("terms", 64)
    assert report.passed
    report.add(CheckResult.of("two", 0.5j, 0, 0.1))
    assert [c.name for c in report.failures] == ["two"]
    data = json.loads(report.to_json())
    assert data["term_counts"] == {"terms": 128}
    assert data["checks"][1]["expected"] == {"re": 0.0, "im": 0.5}
    assert data["passed"] is False


def test_decrement():
    parser = argparse.ArgumentParser()
    parser.add_argument("-v", dest="verbosity", action="count", default=3)
    parser.add_argument("-q", dest="verbosity", action=Decrement)
    assert parser.parse_args(["-q"]).verbosity == 2
    assert parser.parse_args(["-v", "-q", "-q"]).verbosity == 2
    assert parser.parse_args(["-qqqqq"]).verbosity == 0


def test_log_levels():
    assert log_set_level(4) == logging.DEBUG
    assert log_get_level() == 4
    assert log_set_level(99) == logging.DEBUG
    assert log_set_level(-3) == logging.FATAL
    assert log_get_level() == 0
    assert log_set_level() == logging.INFO
    assert log_get_level() == DEFAULT_LEVEL_INDEX
