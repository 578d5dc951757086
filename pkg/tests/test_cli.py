import io
import json
import subprocess
import sys

import jsonschema
import pytest

from kkdirac.cli import main
from kkdirac.config import ConfigError, RunConfig, load_reduction_config

from conftest import CONFIGS, SCHEMA


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def schema():
    return json.loads(SCHEMA.read_text())


def test_verify_clifford_passes(tmp_path, schema):
    code, text = run("verify", "clifford", "--json", str(tmp_path / "c.json"))
    assert code == 0
    assert text.count("Clif(1,5)") == 21
    jsonschema.validate(json.loads((tmp_path / "c.json").read_text()), schema)


def test_corrupted_gamma_exits_1_and_names_pair():
    code, text = run("verify", "clifford", "--inject-corrupt-gamma", "5")
    assert code == 1
    assert "[FAIL] Clif(1,5){G5,G5}=2eta" in text


def test_verify_geometry_flat_zero():
    code, text = run("verify", "geometry", "--config", str(CONFIGS / "flat_zero.toml"))
    assert code == 0 and "lambda = 1/2" in text


def test_verify_geometry_random_potential(tmp_path, schema):
    out = tmp_path / "g.json"
    code, _ = run("verify", "geometry", "--config", str(CONFIGS / "random_a42.toml"), "--json", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    jsonschema.validate(rep, schema)
    assert all(c["max_residual"] < 1e-9 for c in rep["checks"] if c["kind"] == "numeric")
    assert rep["geometry"]["lambda"]["exact"] == "1/2"


def test_singular_vielbein_is_config_error(capsys):
    code, _ = run("verify", "geometry", "--config", str(CONFIGS / "singular_vielbein.toml"))
    assert code == 2
    assert "singular vielbein" in capsys.readouterr().err


def test_malformed_and_missing_configs(tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("[spacetime\nmodel = 'flat'\n")
    assert run("verify", "geometry", "--config", str(bad))[0] == 2
    assert run("verify", "geometry", "--config", str(tmp_path / "missing.toml"))[0] == 2
    bad.write_text("[potential]\nkind = 'explicit'\nrows = [['x0']]\n")
    assert run("verify", "geometry", "--config", str(bad))[0] == 2
    bad.write_text("[potential]\nkind = 'explicit'\nrows = [['0.5', '0', '0'], ['0', '0', '0'], ['0', '0', '0']]\n")
    assert run("verify", "geometry", "--config", str(bad))[0] == 2


def test_reduction_config_validation(tmp_path):
    p = tmp_path / "r.toml"
    p.write_text('M = 0.5\n')
    with pytest.raises(ConfigError):
        load_reduction_config(p)
    p.write_text('M = "1"\n[m]\nmode = "explicit"\n')
    with pytest.raises(ConfigError):
        load_reduction_config(p)
    p.write_text('M = "3/2"\n[m]\nmode = "explicit"\nvalue = "1/2"\n[ansatz]\nseeds = [1, 2]\n')
    cfg = load_reduction_config(p)
    assert str(cfg.M) == "3/2" and cfg.seeds == (1, 2)
    with pytest.raises(ConfigError):
        RunConfig("reduce", seed=2**64)


def test_env_var_config_dir(monkeypatch):
    monkeypatch.setenv("KKDIRAC_CONFIG_DIR", str(CONFIGS))
    assert run("verify", "geometry", "--config", "flat_zero.toml")[0] == 0


def test_reduce_random_potential(tmp_path, schema):
    out = tmp_path / "r.json"
    code, text = run(
        "reduce", "--geometry", str(CONFIGS / "random_a42.toml"), "--reduction", str(CONFIGS / "reduction_seed7.toml"), "--json", str(out)
    )
    assert code == 0
    rep = json.loads(out.read_text())
    jsonschema.validate(rep, schema)
    sound = [c for c in rep["checks"] if c["name"].startswith("reduction soundness")]
    assert sound and all(c["max_residual"] < 1e-9 for c in sound)
    assert rep["reduction"]["m"]["extracted"] == "3/4*i"


def test_reduce_free_limit_prints_spectrum():
    code, text = run("reduce", "--geometry", str(CONFIGS / "flat_zero.toml"), "--reduction", str(CONFIGS / "reduction_free.toml"))
    assert code == 0
    assert "M + m = 1 + 3/4*i" in text and "M - m = 1 - 3/4*i" in text


def test_reduce_negative_branch_warns(tmp_path):
    out = tmp_path / "n.json"
    code, text = run(
        "reduce", "--geometry", str(CONFIGS / "flat_zero.toml"), "--reduction", str(CONFIGS / "reduction_negative_branch.toml"), "--json", str(out)
    )
    assert code == 0
    assert "negative mass branch" in text
    assert json.loads(out.read_text())["flags"]["negative_mass_branch"] is True


def test_strict_eigenstate_violation_exits_1(tmp_path):
    p = tmp_path / "r.toml"
    p.write_text('M = "1"\n[m]\nmode = "explicit"\nvalue = "1"\nstrict = true\n[ansatz]\nseeds = [1]\npoints = 5\n')
    code, _ = run("reduce", "--geometry", str(CONFIGS / "flat_zero.toml"), "--reduction", str(p))
    assert code == 1


def test_reports_are_deterministic(tmp_path):
    paths = []
    for k in range(2):
        p = tmp_path / f"r{k}.json"
        run("reduce", "--geometry", str(CONFIGS / "random_a42.toml"), "--reduction", str(CONFIGS / "reduction_free.toml"), "--seed", "5", "--json", str(p))
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "kkdirac", "verify", "clifford"], capture_output=True, text=True)
    assert res.returncode == 0 and "checks passed" in res.stdout
