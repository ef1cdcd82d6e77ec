"""Command-line interface: config parsing, commands, exit codes,
serialization round trips, and bit-identical reruns."""

import json
from pathlib import Path

import numpy as np
import pytest

from dphase.cli import (build_problem, load_config, main,
                        truncation_sensitivity)
from dphase.grid import GridFunction

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def small_config(**overrides):
    cfg = json.loads((CONFIG_DIR / "reference_min.json").read_text())
    cfg["domain"]["nodes_per_axis"] = 81
    cfg["solver"]["tol"] = 1e-5
    for key, val in overrides.items():
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    return cfg


def write_config(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg, indent=2))
    return path


class TestConfigParsing:
    def test_reference_configs_build(self):
        for name in ("reference_min.json", "reference_mp.json",
                     "semilinear_mp.json"):
            cfg = load_config(CONFIG_DIR / name)
            problem = build_problem(cfg)
            assert problem.validation.overall_pass

    def test_malformed_json_exit_64(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"domain": ')
        code = main(["validate", "--config", str(path), "--out",
                     str(tmp_path / "out")])
        assert code == 64
        err = capsys.readouterr().err
        # parse errors carry a line and column
        assert ":" in err

    def test_missing_file_exit_64(self, tmp_path):
        code = main(["validate", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "out")])
        assert code == 64

    def test_exponent_kinds(self, tmp_path):
        cfg = small_config()
        cfg["exponents"]["p"] = {"kind": "sinusoidal", "value": 2.0,
                                 "amplitude": 0.1, "frequency": 1.0}
        cfg["exponents"]["q"] = {"kind": "affine", "value": 2.6,
                                 "slopes": [0.01]}
        problem = build_problem(cfg)
        assert problem.potential.p.sup_val == pytest.approx(2.1, abs=1e-3)

    def test_unknown_kind_rejected(self, tmp_path):
        from dphase.cli import ConfigError

        cfg = small_config()
        cfg["exponents"]["p"] = {"kind": "chebyshev", "value": 2.0}
        with pytest.raises(ConfigError):
            build_problem(cfg)


class TestValidateCommand:
    def test_reference_passes(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        assert main(["validate", "--config", str(cfg_path), "--out",
                     str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["overall_pass"] is True

    def test_equal_exponents_fail(self, tmp_path):
        cfg = small_config(**{"exponents.q": {"kind": "constant", "value": 2.0},
                              "exponents.s": {"kind": "constant", "value": 2.0}})
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["validate", "--config", str(cfg_path), "--out",
                     str(out)]) == 1
        report = json.loads((out / "report.json").read_text())
        failed = [c["name"] for c in report["checks"]
                  if c["gating"] and c["enabled"] and not c["passed"]]
        assert "p_strictly_below_q" in failed


class TestCheckSpacesCommand:
    def test_small_battery_run(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        code = main(["check-spaces", "--config", str(cfg_path), "--trials",
                     "40", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert all(b["failures"] == 0 for b in report["batteries"])
        assert all(c["passed"] for c in report["structural_checks"])

    def test_zero_trials_vacuous(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        code = main(["check-spaces", "--config", str(cfg_path), "--trials",
                     "0", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert "vacuous" in report["note"]


class TestSolveCommand:
    def test_min_mode_negative_energy(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        assert main(["solve", "--mode", "min", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        res = report["results"][0]
        assert res["status"] == "success"
        assert res["energy"]["total"] < 0.0
        assert (out / "solution_0.csv").exists()
        assert (out / "trace_0.csv").exists()

    def test_solution_round_trip(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        main(["solve", "--mode", "min", "--config", str(cfg_path), "--out",
              str(out)])
        u = GridFunction.from_csv((out / "solution_0.csv").read_text())
        again = GridFunction.from_csv(u.to_csv())
        assert np.array_equal(u.values, again.values)

    def test_mp_mode(self, tmp_path):
        cfg = small_config(**{"scalars.lambda": 1e-3, "scalars.mu": 1.0})
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["solve", "--mode", "mp", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["results"][0]["energy"]["total"] > 0.0

    def test_mp_geometry_error_exit_3(self, tmp_path):
        # mu = 0 is coercive: no far point exists along any ray
        cfg_path = write_config(tmp_path, small_config())
        out = tmp_path / "out"
        assert main(["solve", "--mode", "mp", "--config", str(cfg_path),
                     "--out", str(out)]) == 3

    def test_invalid_config_aborts_solve(self, tmp_path):
        cfg = small_config(**{"exponents.q": {"kind": "constant", "value": 2.0},
                              "exponents.s": {"kind": "constant", "value": 2.0}})
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["solve", "--mode", "min", "--config", str(cfg_path),
                     "--out", str(out)]) == 1

    def test_signed_mode(self, tmp_path):
        cfg = small_config(**{"scalars.lambda": 1e-3, "scalars.mu": 1.0})
        cfg_path = write_config(tmp_path, cfg)
        out = tmp_path / "out"
        assert main(["solve", "--mode", "signed", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert len(report["results"]) == 4
        kinds = {r["classification"] for r in report["results"]}
        assert kinds == {"sign_positive", "sign_negative"}


class TestEnergyCommand:
    def test_energy_of_stored_field(self, tmp_path):
        cfg_path = write_config(tmp_path, small_config())
        out1 = tmp_path / "solve"
        main(["solve", "--mode", "min", "--config", str(cfg_path), "--out",
              str(out1)])
        out2 = tmp_path / "energy"
        code = main(["energy", "--config", str(cfg_path), "--input",
                     str(out1 / "solution_0.csv"), "--out", str(out2)])
        assert code == 0
        erep = json.loads((out2 / "report.json").read_text())
        srep = json.loads((out1 / "report.json").read_text())
        assert erep["energy"]["total"] == pytest.approx(
            srep["results"][0]["energy"]["total"], rel=1e-14)


class TestDeterminism:
    @pytest.mark.parametrize("argv_tail", [
        ["validate"],
        ["check-spaces", "--trials", "25"],
        ["solve", "--mode", "min"],
    ])
    def test_bit_identical_reruns(self, tmp_path, argv_tail):
        cfg_path = write_config(tmp_path, small_config())
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            argv = argv_tail[:1] + ["--config", str(cfg_path), "--seed",
                                    "42", "--out", str(out)] + argv_tail[1:]
            main(argv)
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


class TestTruncationSensitivity:
    def test_energy_stable_under_wider_box(self):
        cfg = small_config()
        cfg["domain"]["nodes_per_axis"] = 61
        out = truncation_sensitivity(cfg)
        assert out["expanded_radius"] == pytest.approx(6.0)
        # the weights decay fast, so widening the box barely moves the energy
        assert out["relative_change"] < 0.05
