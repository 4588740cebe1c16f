import json
import subprocess
import sys

import pytest

from cqinet.cli import format_value, main
from cqinet.config import ConfigError, parse_config, parse_grid
from cqinet.core import DeviceParams


def run(args, capsys):
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_config_defaults():
    cfg = parse_config("")
    assert cfg.device == DeviceParams()
    assert cfg.output.format == "csv"


def test_config_parsing(tmp_path):
    cfg = parse_config(
        """
        [device]
        kappa_b_o = 0.2
        cqi_b_external_is_loss = no
        [fock]
        dim_b = 5
        [protocol]
        window = 2.5   # detection window
        [sweep]
        variable = n_th
        grid = lin:0:1:3
        workers = 2
        [output]
        format = jsonl
        """.replace("\n        ", "\n")
    )
    assert cfg.device.kappa_b_o == 0.2 and not cfg.device.cqi_b_external_is_loss
    assert cfg.fock.dim_b == 5 and cfg.protocol.window == 2.5
    assert cfg.sweep.grid == (0.0, 0.5, 1.0) and cfg.sweep.params == cfg.device
    assert cfg.output.format == "jsonl"


@pytest.mark.parametrize(
    "text",
    ["[device]\nfoo = 1\n", "[extra]\na = 1\n", "[device]\ngamma = -1\n",
     "[device]\nmu = ten\n", "[sweep]\ngrid = \n", "[output]\nformat = xml\n",
     "[fock]\ndim_a = 40\ndim_b = 40\n", "not a config"],
)
def test_config_rejects(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_grid_forms():
    assert parse_grid("1, 2,3") == (1.0, 2.0, 3.0)
    assert parse_grid("log:1:100:3") == pytest.approx((1, 10, 100))
    with pytest.raises(ConfigError):
        parse_grid("lin:0:1")


def test_format_value():
    assert format_value(0.1 + 0.2) == "0.3"
    assert format_value(-0.0) == "0"
    assert format_value(1 / 3) == "0.333333333333"
    assert format_value(float("inf")) == "inf"
    assert format_value(None) == ""


def test_response_reference_row(capsys):
    code, out, _ = run(["response", "--scheme", "cqi"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "scheme,delta,re_f_s,im_f_s,re_f_g,im_f_g,abs_f_s,abs_f_g"
    cells = lines[1].split(",")
    assert float(cells[2]) == pytest.approx(0.4872, abs=5e-5)
    assert float(cells[4]) == pytest.approx(-0.7527, abs=5e-5)


def test_response_cascade_broken_chain(tmp_path, capsys):
    cfg = tmp_path / "c.ini"
    cfg.write_text("[device]\ng_conv = 0\n")
    code, out, _ = run(["response", "--scheme", "cas", "--config", str(cfg)], capsys)
    assert code == 0
    assert out.splitlines()[1] == "cas,0,0,0,0,0,0,0"


def test_empty_grid_is_usage_error(capsys):
    code, out, _ = run(["response", "--delta", ""], capsys)
    assert code == 2 and out == ""


def test_link_reference_and_ideal(capsys):
    code, out, _ = run(["link", "--scheme", "cqi"], capsys)
    cells = out.splitlines()[1].split(",")
    assert float(cells[3]) == pytest.approx(0.9562, abs=5e-5)
    assert float(cells[4]) == pytest.approx(0.4020, abs=5e-5)
    code, out, _ = run(["link", "--ideal", "--format", "jsonl"], capsys)
    rows = [json.loads(line) for line in out.splitlines()]
    assert all(r["fidelity"] == 1 and r["success_prob"] == 1 for r in rows)


def test_network_odd_nodes(capsys):
    code, _, err = run(["network", "--nodes", "3"], capsys)
    assert code == 2 and "even" in err


def test_network_zeta_column(capsys):
    code, out, _ = run(["network", "--nodes", "4"], capsys)
    assert code == 0
    header, cqi, cas = out.splitlines()
    assert header.split(",")[6] == "zeta" and cqi.split(",")[6] != ""


def test_bad_flags(capsys):
    assert run(["link", "--scheme", "xyz"], capsys)[0] == 2
    assert run([], capsys)[0] == 2
    assert run(["link", "--nth", "-1"], capsys)[0] == 2


def test_corrupted_config(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[device\nmu=")
    assert run(["selftest", "--quick", "--config", str(cfg)], capsys)[0] == 2
    assert run(["link", "--config", str(tmp_path / "missing.ini")], capsys)[0] == 2


def test_sweep_summary_and_file_output(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[sweep]\nvariable = kappa_b_o\ngrid = 0.01, 0.1, 1\n")
    out_path = tmp_path / "out.csv"
    code, out, _ = run(["sweep", "--config", str(cfg), "--out", str(out_path)], capsys)
    assert code == 0 and out == ""
    lines = out_path.read_text().splitlines()
    assert len(lines) == 5
    assert lines[-1].startswith("summary,") and lines[-1].endswith("rows=3 errors=0")
    first = out_path.read_bytes()
    run(["sweep", "--config", str(cfg), "--out", str(out_path)], capsys)
    assert out_path.read_bytes() == first


def test_sweep_solver_error_exit(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[protocol]\nwindow = 1e6\n[sweep]\nvariable = n_th\ngrid = 0.5\n")
    code, out, _ = run(["sweep", "--config", str(cfg)], capsys)
    assert code == 3
    assert "ModelValidityError" in out.splitlines()[1]


def test_sweep_scaling_nodes(capsys):
    code, out, _ = run(["sweep", "--nodes", "4", "--format", "jsonl"], capsys)
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(rows) == 4 and rows[-1]["value"] == "summary"


def test_selftest_quick_byte_stable():
    cmd = [sys.executable, "-m", "cqinet", "selftest", "--quick"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.stdout == b.stdout and a.stdout
    assert a.returncode == b.returncode
