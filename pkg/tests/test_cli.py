import csv
import io
import subprocess
import sys

import numpy as np
import pytest

from jtcsim import cli
from jtcsim.config import dump_scenario


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    r = list(csv.reader(io.StringIO(text)))
    return r[0], np.array(r[1:], dtype=float)


@pytest.fixture
def cfg(tmp_path, scenario):
    p = tmp_path / "default.yaml"
    p.write_text(dump_scenario(scenario))
    return str(p)


def test_profile_csv_shape(capsys, cfg):
    code, out, _ = run(["profile", "--config", cfg, "--step", "1"], capsys)
    assert code == 0
    head, data = rows(out)
    assert head == ["x_f_m", "re_zf_ohm", "im_zf_ohm"]
    assert data.shape == (789, 3)
    assert np.all(data[:, 1:] > 0)


def test_profile_is_byte_identical(tmp_path, cfg):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["profile", "--config", cfg, "--out", str(a)]) == 0
    assert cli.main(["profile", "--config", cfg, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_twelve_significant_digits():
    assert cli.fmt(0.1 + 0.2) == "0.3"
    assert cli.fmt(np.pi) == "3.14159265359"
    assert cli.fmt(1) == "1"


def test_importance_csv(capsys):
    code, out, _ = run(["importance", "--step", "5"], capsys)
    assert code == 0
    head, data = rows(out)
    assert head == ["wheel_index", "p_re", "p_im"]
    assert data.shape == (32, 3)
    assert data[:, 0].tolist() == list(range(1, 33))
    assert data[:, 1].max() == 1 and data[:, 2].max() == 1


def test_validate(capsys, tmp_path):
    out_file = tmp_path / "err.csv"
    code, out, _ = run(["validate", "--out", str(out_file)], capsys)
    assert code == 0
    worst = float(out.rsplit(":", 1)[1])
    assert worst < 1e-4
    _, data = rows(out_file.read_text())
    assert data.shape == (50, 2)


def test_validate_failure_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "ORACLE_TOL", 0.0)
    code, _, _ = run(["validate"], capsys)
    assert code == 2


def test_sweeps_print_fits(capsys):
    code, out, err = run(["sweep-wheel", "--r-min", "0.05", "--r-max", "0.5", "--r-step", "0.05", "--step", "5"], capsys)
    assert code == 0
    head, data = rows(out)
    assert head[0] == "r_ws_ohm" and data.shape == (10, 3)
    assert "reciprocal fit" in err and "R-square" in err

    code, out, err = run(["sweep-rail", "--span", "0.1", "--scale-step", "0.05", "--step", "5"], capsys)
    assert code == 0
    assert rows(out)[1].shape == (5, 3)
    assert "minimum" in err

    code, out, _ = run(["sweep-ballast", "--rb-min", "2", "--rb-max", "6", "--rb-step", "2", "--step", "5"], capsys)
    assert code == 0
    head, data = rows(out)
    assert head[0] == "r_b_ohm_km" and data[:, 0].tolist() == [2, 4, 6]


def test_cap_fault(capsys):
    code, out, _ = run(["cap-fault", "--cap-index", "5", "--fault", "half", "--step", "2"], capsys)
    assert code == 0
    head, data = rows(out)
    assert head == ["x_f_m", "d_re_zf_ohm", "d_im_zf_ohm"]
    assert np.abs(data[:, 1]).max() > 0


def test_tcr_with_measured_trace(capsys, tmp_path):
    trace = tmp_path / "m.txt"
    trace.write_text("x y\n100 5\n200 7\n300 9\n")
    code, out, err = run(["tcr", "--measured", str(trace), "--step", "5"], capsys)
    assert code == 0
    assert rows(out)[0] == ["x_f_m", "a_zf_v", "a_rwh_v"]
    assert err.count("R-square") == 2


def test_bad_trace_is_config_error(capsys, tmp_path):
    trace = tmp_path / "m.txt"
    trace.write_text("1 2\n")
    code, _, err = run(["tcr", "--measured", str(trace), "--step", "50"], capsys)
    assert code == 1 and "config error" in err


def test_config_error_exit_code(capsys, tmp_path):
    p = tmp_path / "bad.yaml"
    p.write_text("length_m: 789\nbogus: 1\n")
    code, out, err = run(["profile", "--config", str(p)], capsys)
    assert code == 1
    assert out == ""
    assert "line 2" in err and "bogus" in err


def test_parameter_error_exit_code(capsys):
    code, _, err = run(["cap-fault", "--cap-index", "12"], capsys)
    assert code == 1 and "parameter error" in err


def test_numerical_failure_exit_code(capsys, monkeypatch):
    from jtcsim import jtc

    monkeypatch.setattr(jtc, "RCOND_MIN", 2.0)
    code, _, err = run(["profile", "--step", "100"], capsys)
    assert code == 2
    assert "x_f=50" in err


def test_default_config_round_trip(capsys, tmp_path, scenario):
    code, out, _ = run(["default-config"], capsys)
    assert code == 0
    assert out == dump_scenario(scenario)


def test_console_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "jtcsim.cli", "profile", "--step", "100"],
        capture_output=True, text=True, check=True,
    )
    assert out.stdout.splitlines()[0] == "x_f_m,re_zf_ohm,im_zf_ohm"
    assert len(out.stdout.splitlines()) == 9
