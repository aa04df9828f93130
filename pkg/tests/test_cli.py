import csv
import math

import pytest

from spinchannel.cli import main
from spinchannel.errors import ConfigError, NumericError
from spinchannel.experiments import load_config, parse_experiment, write_csv

FIDELITY = """
[[experiment]]
name = "fid"
task = "fidelity_curve"
network = { type = "christandl", N = 5 }
model = { kind = "dissipative", gamma = 0.1 }
time = { lo = 0.0, hi = 9.42477796076938, points = 121 }

[[experiment]]
name = "gc"
task = "gamma_c"
network = { type = "christandl", N = 3 }
model = { kind = "dissipative" }
correct_phase = true
at = "t0"
"""


def read(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "exp.toml"
    p.write_text(FIDELITY)
    return p


def test_run_writes_csv(cfg_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(cfg_file), "--out", str(out)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("fid:") and lines[1].startswith("gc:")
    rows = read(out / "fid.csv")
    assert list(rows[0]) == ["gamma", "t", "f", "F"]
    for r in rows:
        t = float(r["t"])
        assert float(r["f"]) == pytest.approx(math.exp(-0.1 * t) * math.sin(t) ** 8, abs=1e-10)
    gc = read(out / "gc.csv")
    assert len(gc) == 1 and float(gc[0]["gamma_c"]) == pytest.approx(1.122, abs=1e-3)


def test_output_is_deterministic_and_thread_independent(cfg_file, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(cfg_file), "--out", str(a)]) == 0
    assert main(["--threads", "3", "run", str(cfg_file), "--out", str(b)]) == 0
    for name in ("fid.csv", "gc.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert b"\r\n" not in (a / "fid.csv").read_bytes()


def test_env_output_dir(cfg_file, tmp_path, monkeypatch):
    monkeypatch.setenv("SPINCHANNEL_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["run", str(cfg_file)]) == 0
    assert (tmp_path / "env" / "fid.csv").exists()


def test_gamma_override(cfg_file, tmp_path):
    assert main(["--gamma", "0.5", "run", str(cfg_file), "--out", str(tmp_path)]) == 0
    assert {r["gamma"] for r in read(tmp_path / "fid.csv")} == {"0.5"}


def test_gamma_list_sweep(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("""
[[experiment]]
name = "d"
task = "distribute"
network = { type = "with_ni", N = 4 }
model = { kind = "dissipative", gamma = [0.1, 0.2] }
peak_index = 1
""")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 0
    rows = read(tmp_path / "d.csv")
    assert [float(r["C"]) for r in rows] == pytest.approx([math.exp(-0.1 * math.pi / 2),
                                                          math.exp(-0.2 * math.pi / 2)], abs=1e-8)


@pytest.mark.parametrize("task,extra", [
    ("evolve", 'time = { hi = 1.0, points = 3 }'),
    ("avgF_curve", 'time = { hi = 1.0, points = 3 }'),
    ("peak", ""),
    ("fwhm", ""),
])
def test_other_tasks(tmp_path, task, extra):
    p = tmp_path / "c.toml"
    p.write_text(f"""
[[experiment]]
name = "x"
task = "{task}"
network = {{ type = "christandl", N = 3 }}
model = {{ kind = "dephasing", gamma = 0.1 }}
{extra}
""")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 0
    assert len(read(tmp_path / "x.csv")) >= 1


def test_create_w_task(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("""
[[experiment]]
name = "w"
task = "create_w"
network = { type = "multiarm", N1 = 2, N2 = 1, NA = 3 }
model = { kind = "none" }
peak_index = 1
""")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 0
    assert float(read(tmp_path / "w.csv")[0]["C"]) == pytest.approx(2 / 3, abs=1e-8)


@pytest.mark.parametrize("body,fragment", [
    ('[[experiment]]\ntask = "nope"\nnetwork = { type = "christandl", N = 3 }', "unknown task"),
    ('[[experiment]]\ntask = "peak"\nnetwork = { type = "christandl", N = 3 }\nmodel = { gamma = -1 }',
     "model.gamma"),
    ('[[experiment]]\ntask = "evolve"\nnetwork = { type = "christandl", N = 3 }', "time"),
    ('[[experiment]]\ntask = "peak"\nnetwork = { type = "ring", N = 3 }', "unknown network"),
    ('[[experiment]]\ntask = "peak"\nnetwork = { type = "christandl" }', "'N'"),
    ('[[experiment]]\ntask = "evolve"\nnetwork = { type = "christandl", N = 3 }\n'
     'time = { hi = 1.0, points = 0 }', "points"),
    ('[[experiment\n', "line"),
    ('x = 1', "no [[experiment]]"),
])
def test_config_errors(tmp_path, body, fragment, capsys):
    p = tmp_path / "bad.toml"
    p.write_text(body)
    with pytest.raises(ConfigError) as exc:
        load_config(p)
    assert fragment in str(exc.value)
    assert main(["run", str(p)]) == 1
    assert "config error" in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "absent.toml")]) == 1


def test_numeric_failure_exit_code(tmp_path, capsys):
    # strong dephasing freezes the excitation: f creeps up monotonically, no interior peak
    p = tmp_path / "c.toml"
    p.write_text("""
[[experiment]]
name = "zeno"
task = "peak"
network = { type = "christandl", N = 2 }
model = { kind = "dephasing", gamma = 50.0 }
quantity = "f"
""")
    assert main(["run", str(p), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "numeric error in zeno (peak)" in err


def test_gamma_c_needs_channel(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("""
[[experiment]]
task = "gamma_c"
network = { type = "christandl", N = 2 }
model = { kind = "none" }
""")
    assert main(["run", str(p)]) == 1


def test_write_csv_rejects_nan(tmp_path):
    with pytest.raises(NumericError):
        write_csv(tmp_path / "x.csv", ["a"], [[float("nan")]])
    path = write_csv(tmp_path / "y.csv", ["a", "b"], [[1 / 3, 2]])
    assert path.read_text() == "a,b\n0.333333333333333,2\n"


def test_parse_defaults_and_types():
    cfg = parse_experiment({"task": "peak", "network": {"type": "shi", "N": 4, "k": 1}}, "e")
    assert cfg.gammas == (0.0,) and cfg.at == "peak"
    with pytest.raises(ConfigError, match="e.theta"):
        parse_experiment({"task": "peak", "network": {"type": "christandl", "N": 3}, "theta": "x"}, "e")
    with pytest.raises(ConfigError, match="with_ni"):
        parse_experiment({"task": "distribute", "network": {"type": "christandl", "N": 3},
                          "peak_index": 1}, "e")


def test_verify_quick(capsys):
    assert main(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 7 and "FAIL" not in out


def test_figure_bundle(tmp_path, capsys):
    assert main(["figure", "fig3", "--quick", "--out", str(tmp_path)]) == 0
    gc = [float(r["gamma_c"]) for r in read(tmp_path / "fig3.csv")]
    assert all(a > b for a, b in zip(gc, gc[1:]))
    assert main(["figure", "fig1", "--quick", "--out", str(tmp_path)]) == 0
    f = [float(r["f"]) for r in read(tmp_path / "fig1a.csv") if r["k"] == "1"]
    assert max(f) - min(f) < 1e-9


def test_unknown_figure(tmp_path, capsys):
    assert main(["figure", "fig9", "--out", str(tmp_path)]) == 1
    assert "fig9" in capsys.readouterr().err


@pytest.mark.slow
@pytest.mark.parametrize("name", ["fig2", "fig4", "fig5", "fig6"])
def test_quick_figures(tmp_path, name):
    assert main(["figure", name, "--quick", "--out", str(tmp_path)]) == 0
    assert any(tmp_path.iterdir())
