import json
import math
from pathlib import Path

import pytest
import yaml

from gafhole.cli import main, run

GOLDEN = Path(__file__).parent / "golden" / "schema.json"

CONFIGS = {
    "analyze": {"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [1.5, 2.0]},
    "scan": {"model": {"kind": "lacunary-gamma", "support": "2^k"},
             "scan": {"r_min": 2, "r_max": 64}},
    "estimate": {"model": {"kind": "explicit-table", "log_a": [0, 0]}, "radii": [1.0],
                 "seed": 7, "estimate": {"trials": 20_000}},
    "certify": {"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [3.0], "seed": 3,
                "certify": {"conditional_trials": 200,
                            "volume": {"N": 2, "s": 1, "t": 10, "trials": 100_000}}},
    "diagnose": {"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [14.0], "seed": 5,
                 "diagnose": {"trials": 200, "gaussian_trials": 10_000,
                              "logderiv": {"r": 1.0, "rho": 0.8, "trials": 2000}}},
}


def write_cfg(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def schema_of(text, fmt):
    if fmt == "csv":
        return text.splitlines()[0].split(",")
    keys = []
    for line in text.splitlines():
        for k in json.loads(line):
            if k not in keys:
                keys.append(k)
    return keys


@pytest.mark.parametrize("sub", list(CONFIGS))
def test_schema_matches_golden(sub):
    text, ok, fmt = run(sub, CONFIGS[sub])
    golden = json.loads(GOLDEN.read_text())
    assert schema_of(text, fmt) == golden[sub]
    assert ok


@pytest.mark.parametrize("sub", list(CONFIGS))
def test_rows_carry_key_columns(sub):
    text, _, fmt = run(sub, CONFIGS[sub])
    cols = schema_of(text, fmt)
    assert cols[:5] == ["schema_version", "subcommand", "model_id", "r", "seed"]


@pytest.mark.parametrize("sub", ["estimate", "certify", "diagnose"])
def test_byte_identical_reruns_and_workers(tmp_path, sub):
    cfg = write_cfg(tmp_path, CONFIGS[sub])
    outs = []
    for i, w in enumerate([1, 4, 8]):
        out = tmp_path / f"out{i}"
        assert main([sub, "--config", cfg, "--out", str(out), "--workers", str(w)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_analyze_values():
    text, _, _ = run("analyze", CONFIGS["analyze"])
    rows = [line.split(",") for line in text.splitlines()]
    head = rows[0]
    S = [float(r[head.index("S")]) for r in rows[1:]]
    assert S[0] == pytest.approx(2.44634168202734, rel=1e-12)
    assert S[1] == pytest.approx(13.7471293015773, rel=1e-12)


def test_estimate_covers_half():
    text, _, _ = run("estimate", {**CONFIGS["estimate"], "estimate": {"methods": ["naive"],
                                                                      "trials": 100_000}})
    head, row = [line.split(",") for line in text.splitlines()]
    lo, hi = float(row[head.index("ci_lo")]), float(row[head.index("ci_hi")])
    assert lo <= 0.5 <= hi
    assert row[head.index("seed")] == "7"


def test_certify_volume_boundary(tmp_path):
    cfg = {"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [3.0], "seed": 1,
           "certify": {"checks": ["volume"],
                       "volume": {"N": 1, "s": 1, "t": math.e, "trials": 0}}}
    out = tmp_path / "v.jsonl"
    assert main(["certify", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    rec = json.loads(out.read_text())
    assert rec["passed"] and rec["bound"] == pytest.approx(1.0)


def test_certify_failure_sets_exit_status(tmp_path):
    # C_band = 0 shrinks the omega margin band to {0}, so the check fails
    cfg = {"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [3.0], "seed": 1,
           "certify": {"checks": ["omega"], "C_band": 0.0}}
    assert main(["certify", "--config", write_cfg(tmp_path, cfg), "--out",
                 str(tmp_path / "o")]) == 1


def test_seed_required_for_stochastic(tmp_path, capsys):
    cfg = dict(CONFIGS["estimate"])
    cfg.pop("seed")
    assert main(["estimate", "--config", write_cfg(tmp_path, cfg)]) == 2
    assert "seed" in capsys.readouterr().err


def test_seed_flag_overrides(tmp_path):
    cfg = write_cfg(tmp_path, CONFIGS["estimate"])
    a, b = tmp_path / "a", tmp_path / "b"
    main(["estimate", "--config", cfg, "--out", str(a), "--seed", "8"])
    main(["estimate", "--config", cfg, "--out", str(b)])
    assert a.read_bytes() != b.read_bytes()
    assert ",8," in a.read_text().splitlines()[1]


@pytest.mark.parametrize("cfg,field", [
    ({"radii": [1.0]}, "model"),
    ({"model": {"kind": "gamma-power"}, "radii": [1.0]}, "model.alpha"),
    ({"model": {"kind": "gamma-power", "alpha": 0.5}}, "radii"),
    ({"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [2.0], "format": "xml"}, "format"),
    ({"model": {"kind": "gamma-power", "alpha": 0.5}, "radii": [2.0], "seed": 1,
      "estimate": {"trails": 10}}, "estimate.trails"),
])
def test_config_errors_name_the_field(tmp_path, capsys, cfg, field):
    sub = "estimate" if "estimate" in cfg else "analyze"
    assert main([sub, "--config", write_cfg(tmp_path, cfg)]) == 2
    assert field in capsys.readouterr().err


def test_unparseable_config(tmp_path, capsys):
    p = tmp_path / "bad.yaml"
    p.write_text("model: [unclosed")
    assert main(["analyze", "--config", str(p)]) == 2
    assert "config" in capsys.readouterr().err


def test_precondition_error_surfaces(tmp_path, capsys):
    cfg = {"model": {"kind": "constant-only"}, "radii": [2.0], "seed": 1,
           "certify": {"checks": ["omega"]}}
    assert main(["certify", "--config", write_cfg(tmp_path, cfg)]) == 2
    assert "m(r)" in capsys.readouterr().err


def test_json_config_accepted(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(CONFIGS["analyze"]))
    out = tmp_path / "o.csv"
    assert main(["analyze", "--config", str(p), "--out", str(out)]) == 0
    assert out.read_text().startswith("schema_version,subcommand")
