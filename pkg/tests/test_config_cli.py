import json

import pytest

from hmcf import cli
from hmcf.config import parse_config, scenario_from_mapping
from hmcf.errors import ConfigError


def test_minimal_sphere_config():
    sc = parse_config('kind = "sphere"\nn = 1\n')
    assert sc.parameters["n"] == 1 and sc.parameters["r0"] == 1.0
    assert sc.seed == 0


def test_int_promoted_to_float():
    sc = parse_config('kind = "sphere"\nr0 = 2\n')
    assert isinstance(sc.parameters["r0"], float)


def test_cfl_bound_rejected():
    with pytest.raises(ConfigError) as exc:
        parse_config('kind = "graph1d"\ncfl = 1.5\n')
    assert any("cfl" in e for e in exc.value.errors)


def test_convexity_bound_cited():
    with pytest.raises(ConfigError) as exc:
        scenario_from_mapping({"b_amplitude": 0.6 ** 0.5}, "graph1d")
    msg = " ".join(exc.value.errors)
    assert "b_amplitude" in msg and "0.5" in msg


def test_all_errors_collected():
    with pytest.raises(ConfigError) as exc:
        parse_config('kind = "graph1d"\ncfl = 1.5\ncells = 2\nflux_scheme = "roe"\nbogus = 1\n')
    keys = {e.split(":")[0] for e in exc.value.errors}
    assert {"cfl", "cells", "flux_scheme", "bogus"} <= keys


def test_unknown_kind_and_tables():
    with pytest.raises(ConfigError):
        parse_config('kind = "tokamak"\n')
    with pytest.raises(ConfigError):
        parse_config('kind = "sphere"\n[extra]\nx = 1\n')
    with pytest.raises(ConfigError):
        parse_config('kind = "sphere"\nn = \n')


def test_type_errors():
    with pytest.raises(ConfigError):
        parse_config('kind = "sphere"\nn = 1.5\n')
    with pytest.raises(ConfigError):
        parse_config('kind = "sphere"\nexpect_collapse = 1\n')


def test_convergence_grid_checks():
    with pytest.raises(ConfigError):
        scenario_from_mapping({"grids": [64, 100], "reference_cells": 4096}, "convergence")


def test_config_hash_stable():
    a = parse_config('kind = "sphere"\nn = 1\noutput_dir = "x"\n')
    b = parse_config('n = 1\nkind = "sphere"\noutput_dir = "y"\n')
    assert a.config_hash() == b.config_hash()
    assert a.config_hash() != parse_config('kind = "sphere"\nn = 2\n').config_hash()


def _run(tmp_path, name, *args):
    out = tmp_path / name
    code = cli.main([*args, "--output-dir", str(out)])
    return code, out


def test_sphere_exit_codes(tmp_path):
    code, out = _run(tmp_path, "a", "sphere", "--n", "2", "--dt", "1e-3")
    assert code == cli.EXIT_BLOWUP
    man = json.loads((out / "manifest.json").read_text())
    assert man["termination"] == "collapse" and man["exit_code"] == 3
    code, _ = _run(tmp_path, "b", "sphere", "--n", "2", "--dt", "1e-3", "--expect-collapse")
    assert code == cli.EXIT_OK
    code, _ = _run(tmp_path, "c", "sphere", "--dt", "1e-3", "--t-max", "0.1")
    assert code == cli.EXIT_OK


def test_determinism(tmp_path):
    args = ("graph", "--cells", "64", "--t-end", "0.2")
    _, a = _run(tmp_path, "a", *args)
    _, b = _run(tmp_path, "b", *args)
    for name in ("snapshots.csv", "diagnostics.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    assert ma["config_hash"] == mb["config_hash"]


def test_eigen_seeded(tmp_path):
    _, a = _run(tmp_path, "a", "eigen", "--samples", "20", "--seed", "3")
    _, b = _run(tmp_path, "b", "eigen", "--samples", "20", "--seed", "3")
    assert (a / "eigen.csv").read_bytes() == (b / "eigen.csv").read_bytes()


def test_bad_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('kind = "graph1d"\ncfl = 1.5\ncells = 2\n')
    code = cli.main(["graph", "--config", str(cfg), "--output-dir", str(tmp_path / "o")])
    assert code == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "cfl" in err and "cells" in err
    assert cli.main(["graph", "--config", str(tmp_path / "missing.toml")]) == cli.EXIT_CONFIG


def test_config_keys_override_flags(tmp_path):
    cfg = tmp_path / "c.toml"
    out = tmp_path / "o"
    cfg.write_text(f'kind = "graph1d"\ncells = 32\nt_end = 0.05\noutput_dir = "{out}"\n')
    assert cli.main(["graph", "--config", str(cfg), "--cells", "64"]) == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["parameters"]["cells"] == 32


def test_kind_mismatch(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('kind = "sphere"\n')
    assert cli.main(["graph", "--config", str(cfg)]) == cli.EXIT_CONFIG


def test_riemann_and_curve_commands(tmp_path):
    code, out = _run(tmp_path, "r", "riemann", "--cells", "64", "--t-end", "0.2")
    assert code == 0 and (out / "snapshots.csv").exists()
    code, out = _run(tmp_path, "c", "curve", "--m", "32", "--dt", "1e-3", "--t-end", "0.05")
    assert code == 0 and (out / "curve.csv").exists()
    code, out = _run(tmp_path, "p", "report", "--m", "32", "--dt", "1e-3", "--t-end", "0.05")
    assert code == 0 and (out / "report.csv").exists() and (out / "summary.json").exists()


def test_graph2d_command(tmp_path):
    code, out = _run(tmp_path, "g", "graph", "--dim", "2", "--cells-x", "16", "--cells-y", "16",
                     "--t-end", "0.05")
    assert code == 0
    assert json.loads((out / "manifest.json").read_text())["kind"] == "graph2d"


def test_convergence_command(tmp_path):
    code, out = _run(tmp_path, "v", "convergence", "--grids", "16", "32", "--reference-cells", "128",
                     "--t-end", "0.1")
    assert code == 0
    lines = (out / "convergence.csv").read_text().splitlines()
    assert len(lines) == 3


def test_guard_exit_code(tmp_path):
    code, out = _run(tmp_path, "g", "graph", "--b-amplitude", "0.7", "--sigma-amplitude", "0.5",
                     "--cells", "64", "--t-end", "2")
    assert code == cli.EXIT_GUARD
    assert json.loads((out / "manifest.json").read_text())["termination"] == "guard"
