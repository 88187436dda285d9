import csv
import json
import math
import os

import pytest

from annulus_nev.cli import _split, main
from annulus_nev.config import (
    ConfigError,
    JobConfig,
    from_mapping,
    load_config,
    parse_level,
    parse_radii_spec,
    validate,
)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_radii_spec_forms():
    assert parse_radii_spec("2,4,8") == [2.0, 4.0, 8.0]
    r = parse_radii_spec("2:50:12")
    assert len(r) == 12 and r[0] == pytest.approx(2) and r[-1] == pytest.approx(50)
    with pytest.raises(ConfigError, match="radii.count"):
        parse_radii_spec("2:50:x")
    with pytest.raises(ConfigError, match=r"radii\[1\]"):
        parse_radii_spec("2,abc")


def test_level_parsing():
    assert parse_level("inf") == math.inf
    assert parse_level(88) == 88
    with pytest.raises(ConfigError, match="level"):
        parse_level(2.5)
    with pytest.raises(ConfigError, match="level"):
        parse_level(0)


@pytest.mark.parametrize(
    "data, path",
    [
        ({"command": "nope"}, "command"),
        ({"command": "jensen", "bogus": 1}, "bogus"),
        ({"command": "jensen", "radii": [2, 1.5]}, r"radii\[1\]"),
        ({"command": "jensen", "radii": [0.5, 2]}, r"radii\[0\]"),
        ({"command": "jensen", "r0": 1}, "r0"),
        ({"command": "jensen", "radii": {"min": 2, "max": 5}}, "radii.count"),
        ({"command": "jensen", "tolerances": {"quad": -1}}, "tolerances.quad"),
        ({"command": "jensen", "tolerances": {"speed": 1}}, "tolerances.speed"),
        ({"command": "jensen", "seed": "x"}, "seed"),
        ({}, "command"),
    ],
)
def test_config_errors_name_the_field(data, path):
    with pytest.raises(ConfigError, match=path):
        validate(from_mapping(data))


def test_finite_r0_default_radii():
    cfg = validate(from_mapping({"command": "jensen", "r0": 5}))
    assert all(1 < r < 5 for r in cfg.radii)


def test_toml_loading(tmp_path):
    p = tmp_path / "job.toml"
    p.write_text(
        'command = "jensen"\nseed = 7\n[radii]\nlist = [2, 4]\n[expressions]\nf = "z - 0.5"\n[tolerances]\nquad = 1e-10\n'
    )
    cfg = validate(from_mapping(load_config(str(p))))
    assert isinstance(cfg, JobConfig)
    assert cfg.radii == [2.0, 4.0] and cfg.seed == 7 and cfg.tolerances.quad == 1e-10
    bad = tmp_path / "bad.toml"
    bad.write_text("command = \n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(str(bad))


def test_split_respects_parentheses():
    assert _split("0, inf, exp(z), atan2(1,2)") == ["0", "inf", "exp(z)", "atan2(1,2)"]


def test_jensen_command(tmp_path):
    out = tmp_path / "j"
    code = main(["jensen", "--f", "(z-0.4)*(z-3)/(z+5)", "--radii", "2,4,8", "--out", str(out)])
    assert code == 0
    rows = _rows(out / "jensen.csv")
    assert len(rows) == 3
    assert all(float(r["residual"]) < 1e-6 for r in rows)
    m = json.loads((out / "manifest.json").read_text())
    assert m["schema_version"] == 1 and m["verdict"] != "fail"
    assert "out" not in m["config"]
    assert {o["name"] for o in m["outputs"]} == {"jensen.csv"}
    assert (out / "timings.json").exists()


def test_bound_table_command(tmp_path):
    out = tmp_path / "b"
    assert main(["bound-table", "--out", str(out)]) == 0
    rows = _rows(out / "bound_table.csv")
    assert len(rows) == 9
    assert {r["l"] for r in rows} == {"88", "100", "inf"}


def test_config_file_with_flag_override(tmp_path):
    p = tmp_path / "job.toml"
    p.write_text('command = "jensen"\nradii = "2,3"\n[expressions]\nf = "z"\n')
    out = tmp_path / "o"
    assert main(["--config", str(p), "--radii", "2,3,5", "--out", str(out)]) == 0
    assert len(_rows(out / "jensen.csv")) == 3


def test_malformed_expression_exit_1(tmp_path, capsys):
    code = main(["jensen", "--f", "(z-2", "--radii", "3", "--out", str(tmp_path / "x")])
    assert code == 1
    err = capsys.readouterr().err
    assert "expressions.f" in err and "column" in err


def test_bad_config_exit_1(tmp_path, capsys):
    assert main(["jensen", "--f", "z", "--radii", "0.5,2", "--out", str(tmp_path / "x")]) == 1
    assert "radii[0]" in capsys.readouterr().err


def test_missing_expression_exit_1(tmp_path, capsys):
    assert main(["jensen", "--radii", "2", "--out", str(tmp_path / "x")]) == 1
    assert "expressions.f" in capsys.readouterr().err


def test_smt_const_command(tmp_path):
    out = tmp_path / "s"
    code = main(["smt-const", "--f", "exp(z)", "--targets", "0,inf,1,-1", "--radii", "2:20:5", "--out", str(out)])
    assert code == 0
    m = json.loads((out / "manifest.json").read_text())
    assert m["verdict"] in ("pass", "pass_with_small_term")
    assert os.path.exists(out / "reports.csv")


def test_sharing_command(tmp_path):
    out = tmp_path / "sh"
    code = main(["sharing", "--g", "z", "--candidate", "3-z", "--set", "0,3", "--radii", "2,4", "--out", str(out)])
    assert code == 0
    rows = _rows(out / "sharing.csv")
    assert rows and all(r["shares"] == "True" for r in rows)


def _tree(d):
    return {n: (d / n).read_bytes() for n in sorted(os.listdir(d)) if n != "timings.json"}


def test_outputs_are_deterministic(tmp_path):
    args = ["smt-const", "--f", "exp(z)", "--targets", "0,inf,1,-1", "--radii", "2:10:4", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == main(args + ["--out", str(tmp_path / "b")])
    a, b = _tree(tmp_path / "a"), _tree(tmp_path / "b")
    assert a == b and "manifest.json" in a
