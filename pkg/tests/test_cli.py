"""Configuration loading, flag precedence, artifact determinism."""

import json

import pytest

from fhnlab.cli import main, run
from fhnlab.config import CoefficientSpec, RunConfig, load_config


def write_config(tmp_path, payload):
    p = tmp_path / "config.json"
    p.write_text(json.dumps(payload))
    return p


def test_defaults_validate():
    cfg = RunConfig()
    assert cfg.hurst == 0.75
    assert cfg.system_params().alpha == 1.0


def test_load_config_full(tmp_path):
    p = write_config(
        tmp_path,
        {
            "experiment": "contraction",
            "seed": 42,
            "params": {"lambda": 0.5, "sigma": 2.0, "hurst": 0.6},
            "lattice": {"n_sites": 16, "boundary": "periodic"},
            "grid": {"dt": 0.0078125, "method": "hosking"},
            "coefficients": {"a": {"shape": "single_site", "amplitude": 2.0}},
            "knobs": {"t_final": 5.0, "scheme": "euler"},
        },
    )
    cfg = load_config(p)
    assert cfg.lam == 0.5 and cfg.sigma == 2.0 and cfg.hurst == 0.6
    assert cfg.half_width == 16 and cfg.boundary == "periodic"
    assert cfg.method == "hosking" and cfg.scheme == "euler"
    assert cfg.a.shape == "single_site" and cfg.b.shape == "power_decay"


@pytest.mark.parametrize(
    "payload,match",
    [
        ({"experiment": "simulate", "extra": 1}, "unknown config key"),
        ({"params": {"mu": 1.0}}, "unknown config key"),
        ({"params": {"hurst": 0.5}}, "hurst"),
        ({"params": {"hurst": 1.0}}, "hurst"),
        ({"params": {"lambda": -1.0}}, "positive"),
        ({"grid": {"dt": 0.0}}, "dt"),
        ({"grid": {"method": "spectral"}}, "method"),
        ({"lattice": {"boundary": "absorbing"}}, "boundary"),
        ({"coefficients": {"a": {"shape": "power_decay", "decay_q": 0.4}}}, "decay_q"),
        ({"knobs": {"horizons": [30.0, 10.0]}}, "horizons"),
        ({"experiment": "walk"}, "experiment"),
    ],
)
def test_load_config_rejections(tmp_path, payload, match):
    p = write_config(tmp_path, payload)
    with pytest.raises(ValueError, match=match):
        load_config(p)


def test_load_config_bad_json(tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    with pytest.raises(ValueError, match="parse error"):
        load_config(p)


def small_args(tmp_path, extra=()):
    return [
        "--seed", "11", "--out", str(tmp_path / "out"),
        "--n-sites", "4", "--dt", "0.0078125", *extra,
    ]


def test_fbm_subcommand_runs(tmp_path, capsys):
    code = main(["fbm", *small_args(tmp_path)])
    assert code == 0
    out = tmp_path / "out"
    assert (out / "manifest.json").exists()
    assert (out / "path.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["pass"] is True
    assert "fbm: PASS" in capsys.readouterr().out


def test_flags_override_config_file(tmp_path):
    p = write_config(tmp_path, {"seed": 1, "params": {"hurst": 0.6}})
    code = main(
        ["fbm", "--config", str(p), "--hurst", "0.9", *small_args(tmp_path)]
    )
    assert code == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["config"]["hurst"] == 0.9
    assert manifest["seed"] == 11  # flag wins over the file seed too


def test_invalid_flag_value_exits_2(tmp_path, capsys):
    code = main(["fbm", "--hurst", "0.4", *small_args(tmp_path)])
    assert code == 2
    assert "hurst" in capsys.readouterr().err


def test_simulate_outputs_deterministic(tmp_path):
    argv = lambda out: [
        "simulate", "--seed", "5", "--n-sites", "3", "--dt", "0.015625",
        "--t-final", "2.0", "--out", str(out),
    ]
    assert main(argv(tmp_path / "a")) == 0
    assert main(argv(tmp_path / "b")) == 0
    for name in ("report.json", "trajectory.csv", "manifest.json"):
        assert (tmp_path / "a" / name).read_bytes() == (
            tmp_path / "b" / name
        ).read_bytes()


def test_run_api_contraction(tmp_path):
    cfg = RunConfig(
        experiment="contraction", seed=2, half_width=3, dt=2.0**-6,
        t_final=4.0, out_dir=str(tmp_path / "c"),
    )
    report = run(cfg)
    assert report["pass"] is True
    assert (tmp_path / "c" / "distance.csv").exists()


def test_run_api_radius(tmp_path):
    cfg = RunConfig(
        experiment="radius", seed=2, half_width=2, dt=2.0**-6,
        quad_horizon=10.0, out_dir=str(tmp_path / "r"),
    )
    report = run(cfg)
    assert report["pass"] is True
    assert report["R"] >= 1.0


def test_coefficient_spec_build():
    spec = CoefficientSpec(shape="constant_window", amplitude=0.25)
    assert list(spec.build(1)) == [0.25, 0.25, 0.25]
