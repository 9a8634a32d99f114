import numpy as np
import pytest

from colwave.cli import ValidationError, bundled_scenarios, main, parse_scenario
from colwave.solvers import load_family

ABEL_SCN = """\
id=abel_demo
problem=radial_even_abel
mollifier.family=polynomial
mollifier.n=2
scale.kind=standard
ladder.eps0=0.1
ladder.ratio=0.7
ladder.count=4
analyses=abel
"""


def test_list_names_all_bundled(capsys):
    assert main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 10
    assert "corner36" in names and "thm45_d3" in names


def test_validate_every_bundled_scenario(capsys):
    for name in bundled_scenarios():
        assert main(["validate", name]) == 0, name
        assert "OK" in capsys.readouterr().out


def test_validate_rejects_unknown_problem(tmp_path, capsys):
    bad = tmp_path / "bad.scn"
    bad.write_text("id=bad\nproblem=heat\n")
    assert main(["validate", str(bad)]) == 2
    assert "problem" in capsys.readouterr().err


def test_validate_rejects_missing_file(capsys):
    assert main(["validate", "/nonexistent/file.scn"]) == 2
    capsys.readouterr()


def test_validate_rejects_underresolved_grid(tmp_path, capsys):
    scn = tmp_path / "coarse.scn"
    scn.write_text(
        "id=coarse\nproblem=wave_x\ncoefficient.breakpoints=0.0\n"
        "coefficient.values=1.0,2.0\ncoefficient.variable=space\n"
        "grid.x_min=-2.0\ngrid.x_max=2.0\ngrid.nx=64\ngrid.t_end=1.0\n"
        "data.u1=delta:-1.0\n"
    )
    assert main(["validate", str(scn)]) == 2
    assert "resolution" in capsys.readouterr().err


def test_parse_rejects_bad_ladder_override():
    with pytest.raises(ValidationError):
        parse_scenario(
            next(iter(bundled_scenarios().values())), ladder_override="not,a,ladder"
        )


def test_parse_scenario_fields():
    scn = parse_scenario(bundled_scenarios()["prop42"])
    assert scn.problem == "wave_t"
    assert scn.coefficient.variable == "time"
    assert scn.analyses == ("detect",)
    assert len(scn.ladder.values) == 10


def test_run_corner_scenario_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["run", "corner36", "--out", str(out), "--ladder-override", "0.1,0.7,4"]) == 0
    csv1 = (out1 / "corner36" / "corner.csv").read_bytes()
    csv2 = (out2 / "corner36" / "corner.csv").read_bytes()
    assert csv1 == csv2
    lines = csv1.decode().splitlines()
    assert lines[0].startswith("eps,t,")
    assert len(lines) == 1 + 4 * 2  # four ladder values, two sample times
    assert (out1 / "corner36" / "report.txt").read_text().startswith("scenario=corner36")


def test_run_abel_scenario(tmp_path):
    scn = tmp_path / "abel_demo.scn"
    scn.write_text(ABEL_SCN)
    assert main(["run", str(scn), "--out", str(tmp_path / "out")]) == 0
    report = (tmp_path / "out" / "abel_demo" / "report.txt").read_text()
    err = float(report.split("abel_roundtrip_max_err=")[1].split()[0])
    assert err < 1e-3
    assert (tmp_path / "out" / "abel_demo" / "abel.csv").exists()


def test_run_transport_scenario_saves_family(tmp_path):
    assert (
        main(["run", "ex3_tanh", "--out", str(tmp_path), "--ladder-override", "0.1,0.7,4"]) == 0
    )
    outdir = tmp_path / "ex3_tanh"
    fam = load_family(outdir / "family")
    assert len(fam) == 4
    assert fam.eps_values[0] == pytest.approx(0.1)
    assert np.isfinite(fam.records[-1].fields["u"]).all()
    assert "associate=" in (outdir / "report.txt").read_text()


def test_run_wave_t_scenario_with_detection(tmp_path):
    assert (
        main(["run", "prop42", "--out", str(tmp_path), "--ladder-override", "0.1,0.7,4"]) == 0
    )
    outdir = tmp_path / "prop42"
    assert (outdir / "detect.csv").read_text().startswith("t,x,flagged,slope_excess")
    assert (outdir / "detect.svg").exists()
    assert "precision=" in (outdir / "detect_verdict.txt").read_text()
    assert "detect precision=" in (outdir / "report.txt").read_text()
