import csv
import io
import json
import subprocess
import sys

import pytest

from ris_secrecy import cli
from ris_secrecy.analytic import ConvergenceError
from ris_secrecy.experiments import Check, ValidationReport


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_describe(capsys):
    code, out, _ = run(["describe", "--M", "40", "--N", "40"], capsys)
    assert code == 0
    assert "m_elems = 40" in out
    assert "m_sr = 16.0766164" in out
    assert "branch = both" in out


def test_describe_without_jamming_skips_asymptote(capsys):
    code, out, _ = run(["describe", "--snr-je-db", "off"], capsys)
    assert code == 0
    assert "snr_je_db = None" in out
    assert "asymptote" not in out


def test_point_quadrature_and_asymptote(capsys):
    code, out, _ = run(["point", "--methods", "quad,asym", "--snr-je-db", "20"], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].startswith("quadrature")
    assert lines[1].startswith("asymptotic")


def test_point_tiny_probability_is_reported_as_bound(capsys):
    code, out, _ = run(["point", "--snr-sr-db", "70", "--snr-rd-db", "70", "--snr-je-db", "40", "--M", "64", "--N", "64"], capsys)
    assert code == 0
    assert "<= 1e-14" in out


def test_point_mc_is_reproducible(capsys):
    argv = ["point", "--methods", "mc", "--samples", "5000", "--seed", "3", "--snr-sr-db", "10", "--snr-rd-db", "10"]
    first = run(argv, capsys)[1]
    assert first == run(argv, capsys)[1]
    assert "n=5000" in first and "seed=3" in first


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("M = 16\nN = 16\nsnr_re_db = 30  # weaker eavesdropper\n")
    code, out, _ = run(["describe", "--config", str(cfg), "--N", "24"], capsys)
    assert code == 0
    assert "m_elems = 16" in out and "n_elems = 24" in out and "snr_re_db = 30.0" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["point", "--M", "0"],
        ["point", "--setup", "third"],
        ["point", "--methods", "magic"],
        ["sweep", "--axis1", "bogus=1,2"],
        ["sweep", "--axis1", "snr_db="],
        ["sweep", "--axis1", "snr_db=10:0:5"],
        ["describe", "--config", "/nonexistent/file.cfg"],
        ["frobnicate"],
        ["figure", "fig9"],
        ["point", "--samples", "many"],
    ],
)
def test_config_and_usage_errors_exit_1(argv, capsys):
    code = None
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_sweep_range_axis_to_file(tmp_path, capsys):
    out = tmp_path / "s.csv"
    argv = ["sweep", "--axis1", "snr_db=0:20:10", "--axis2", "mn=8,16", "--methods", "quad", "--out", str(out)]
    assert run(argv, capsys)[0] == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert rows[0][:2] == ["snr_db", "mn"]
    assert [r[:2] for r in rows[1:]] == [["0.0", "8"], ["0.0", "16"], ["10.0", "8"], ["10.0", "16"], ["20.0", "8"], ["20.0", "16"]]


def test_parse_axis():
    assert cli.parse_axis("nb=1:4:1") == ("nb", (1, 2, 3, 4))
    assert cli.parse_axis("snr_db=0:10:2.5") == ("snr_db", (0.0, 2.5, 5.0, 7.5, 10.0))
    assert cli.parse_axis("setup=dual, first") == ("setup", ("dual", "first"))


def test_figure_fig7_to_stdout(capsys):
    code, out, _ = run(["figure", "fig7"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "mn,nb,diversity_order,m_sr,m_rd"


def test_figure_preset_keeps_stated_base_with_config_file(tmp_path, capsys, monkeypatch):
    seen = {}

    def fake_run_figure(name, **kwargs):
        seen.update(kwargs, name=name)
        return "ok\n"

    monkeypatch.setattr(cli, "run_figure", fake_run_figure)
    cfg = tmp_path / "f.cfg"
    cfg.write_text("M = 16\n")
    code, out, _ = run(["figure", "fig3", "--config", str(cfg), "--samples", "100"], capsys)
    assert code == 0 and out == "ok\n"
    assert seen["overrides"] == {"M": "16"}
    assert seen["n_samples"] == 100


def test_validate_exit_codes(monkeypatch, capsys, tmp_path):
    good = ValidationReport(0, [Check("a", True, "fine")])
    bad = ValidationReport(0, [Check("a", True, "fine"), Check("b", False, "broken")])
    monkeypatch.setattr(cli, "run_validation", lambda seed, n_samples: good)
    code, out, err = run(["validate"], capsys)
    assert code == 0 and json.loads(out)["passed"] is True
    assert "PASS a" in err
    monkeypatch.setattr(cli, "run_validation", lambda seed, n_samples: bad)
    report = tmp_path / "r.json"
    code, _, err = run(["validate", "--out", str(report)], capsys)
    assert code == 2
    assert json.loads(report.read_text())["passed"] is False
    assert "FAIL b: broken" in err


def test_nonconvergence_exit_code(monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise ConvergenceError("did not converge")

    monkeypatch.setattr(cli, "run_point", boom)
    code, _, err = run(["point"], capsys)
    assert code == 3
    assert "did not converge" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ris_secrecy", "point", "--methods", "quad"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("quadrature  5.063931e-04")
