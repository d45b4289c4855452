import argparse
import json
import math

import pytest

from teleportnet.cli import _finish, build_parser, main
from teleportnet.config import (
    DEFAULT_TOLERANCES,
    ConfigError,
    RunConfig,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
)
from teleportnet.reports import (
    Check,
    build_report,
    render_json,
    render_sweep_csv,
    strip_timing,
    wilson_interval,
)


class TestConfig:
    def test_defaults(self):
        cfg = default_config()
        assert cfg.trials == 20000 and cfg.seed == 42
        assert cfg.channel.alpha == 0.3

    def test_round_trip(self):
        cfg = default_config()
        again = config_from_dict(config_to_dict(cfg))
        assert again == cfg

    def test_complex_input_pairs(self):
        cfg = config_from_dict({"input": [[0.5, 0.0], [0.0, 0.5], [0.5, 0.0], [0.0, -0.5]]})
        assert cfg.input.b == 0.5j and cfg.input.d == -0.5j

    def test_partial_override_keeps_defaults(self):
        cfg = config_from_dict({"trials": 5})
        assert cfg.trials == 5 and cfg.seed == 42

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"qubits": 9})

    def test_bad_shapes_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"input": [1, 0, 0]})
        with pytest.raises(ConfigError):
            config_from_dict({"channel": [0.3, 0.4, 0.5]})
        with pytest.raises(ConfigError):
            config_from_dict({"input": ["a", 0, 0, 0]})
        with pytest.raises(ConfigError):
            config_from_dict({"trials": True})
        with pytest.raises(ConfigError):
            config_from_dict({"seed": -1})
        with pytest.raises(ConfigError):
            config_from_dict({"seed": 2**64})
        with pytest.raises(ConfigError):
            config_from_dict([1, 2, 3])

    def test_unnormalized_rejected_without_flag(self):
        with pytest.raises(ConfigError):
            config_from_dict({"input": [0.5, 0.5, 0.5, 0.6]})

    def test_renormalize_rescales(self):
        cfg = config_from_dict({"input": [1, 1, 1, 1], "channel": [1, 1, 1, 1]},
                               renormalize=True)
        assert abs(cfg.input.a - 0.5) < 1e-15
        assert cfg.channel.alpha == pytest.approx(0.5)

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.json")

    def test_load_config_bad_json(self, tmp_path):
        f = tmp_path / "broken.json"
        f.write_text("{not json")
        with pytest.raises(ConfigError):
            load_config(f)

    def test_load_config_good_file(self, tmp_path):
        f = tmp_path / "ok.json"
        f.write_text(json.dumps({"trials": 9, "seed": 1}))
        cfg = load_config(f)
        assert cfg.trials == 9 and cfg.seed == 1

    def test_runconfig_validation(self):
        with pytest.raises(ConfigError):
            RunConfig(default_config().input, default_config().channel, trials=0)

    def test_tolerance_overrides_accepted(self):
        cfg = config_from_dict({"tolerances": {"unitarity": 1e-10, "flatten": 1e-6}})
        assert cfg.tolerance("unitarity") == 1e-10
        assert cfg.tolerance("flatten") == 1e-6
        # anything not overridden resolves to the package default
        assert cfg.tolerance("branch") == DEFAULT_TOLERANCES["branch"]

    def test_tolerance_round_trip(self):
        cfg = config_from_dict({"tolerances": {"deferred": 1e-8}})
        again = config_from_dict(config_to_dict(cfg))
        assert again == cfg
        # defaults are left implicit rather than echoed
        assert "tolerances" not in config_to_dict(default_config())

    def test_tolerance_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            config_from_dict({"tolerances": {"warp": 1e-9}})
        with pytest.raises(ConfigError):
            config_from_dict({"tolerances": {"unitarity": 0.0}})
        with pytest.raises(ConfigError):
            config_from_dict({"tolerances": {"unitarity": -1e-9}})
        with pytest.raises(ConfigError):
            config_from_dict({"tolerances": {"unitarity": True}})
        with pytest.raises(ConfigError):
            config_from_dict({"tolerances": ["unitarity"]})

    def test_tolerance_unknown_name_raises_keyerror(self):
        with pytest.raises(KeyError):
            default_config().tolerance("warp")


class TestReports:
    def test_render_json_sorted_and_newline_terminated(self):
        text = render_json({"b": 1, "a": 2})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')

    def test_strip_timing(self):
        rep = build_report("x", [Check("c", True)], elapsed=1.5)
        assert "timing" in rep
        assert "timing" not in strip_timing(rep)

    def test_status_aggregation(self):
        good = build_report("x", [Check("a", True), Check("b", True)])
        bad = build_report("x", [Check("a", True), Check("b", False)])
        assert good["status"] == "pass" and bad["status"] == "fail"

    def test_wilson_interval_basics(self):
        lo, hi = wilson_interval(50, 100, z=3.0)
        assert 0.0 <= lo < 0.5 < hi <= 1.0
        assert hi - 0.5 == pytest.approx(0.5 - lo, abs=1e-12)
        lo0, hi0 = wilson_interval(0, 100, z=3.0)
        assert lo0 == 0.0 and hi0 > 0.0
        with pytest.raises(ValueError):
            wilson_interval(5, 0)
        with pytest.raises(ValueError):
            wilson_interval(11, 10)

    def test_wilson_interval_tightens_with_trials(self):
        narrow = wilson_interval(3600, 10000)
        wide = wilson_interval(36, 100)
        assert narrow[1] - narrow[0] < wide[1] - wide[0]

    def test_sweep_csv_layout(self):
        rows = [{"alpha": 0.1, "analytic": 0.04, "empirical": 0.05, "trials": 10, "seed": 1}]
        text = render_sweep_csv(rows)
        lines = text.splitlines()
        assert lines[0] == "alpha,analytic,empirical,trials,seed"
        assert lines[1].startswith("0.1,")


class TestCommandLine:
    def test_parser_knows_all_subcommands(self):
        parser = build_parser()
        for cmd in ("verify-u0", "verify-eq36", "verify-barenco", "verify-outcomes",
                    "run", "sweep"):
            args = parser.parse_args([cmd] if cmd != "sweep" else [cmd])
            assert args.command == cmd

    def test_verify_u0_writes_report(self, tmp_path, capsys):
        out = tmp_path / "u0.json"
        assert main(["verify-u0", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["status"] == "pass"
        assert len(rep["data"]["u0"]) == 8
        assert "pass" in capsys.readouterr().out

    def test_verify_eq36_archives_deviations(self, tmp_path):
        out = tmp_path / "eq36.json"
        assert main(["verify-eq36", "--out", str(out), "--strict-eq36"]) == 0
        rep = json.loads(out.read_text())
        assert len(rep["data"]["deviations"]) == 21
        assert all(r["deviation"] < 1e-9 for r in rep["data"]["deviations"])

    def test_verify_barenco_reports_circuit(self, tmp_path):
        out = tmp_path / "flat.json"
        assert main(["verify-barenco", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["data"]["gate_counts"]["cnot"] > 0
        assert rep["data"]["circuit"].startswith(("CNOT", "U1Q"))

    def test_verify_outcomes_passes(self):
        assert main(["verify-outcomes"]) == 0

    def test_run_report_contents(self, tmp_path):
        out = tmp_path / "run.json"
        assert main(["run", "--trials", "400", "--seed", "5", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        data = rep["data"]
        assert data["trials"] == 400
        assert data["successes"] == round(data["empirical_rate"] * 400)
        assert data["analytic_rate"] == pytest.approx(0.36)
        lo, hi = data["wilson_interval"]
        assert lo <= data["analytic_rate"] <= hi
        assert sum(data["outcome_counts"].values()) == 400
        chi = data["chi_square"]
        assert chi["degrees_of_freedom"] == 15
        assert 0.0 <= chi["statistic"] < 60.0

    def test_run_equal_channel_always_succeeds(self, tmp_path):
        f = tmp_path / "equal.json"
        f.write_text(json.dumps({"channel": [0.5, 0.5, 0.5, 0.5], "trials": 200}))
        out = tmp_path / "run.json"
        assert main(["run", "--config", str(f), "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert rep["data"]["empirical_rate"] == 1.0
        assert rep["data"]["analytic_rate"] == 1.0

    def test_verify_u0_detects_tampered_matrix(self, monkeypatch):
        import teleportnet.cli as cli_mod
        from teleportnet.gates import purification_unitary as real_u0

        def tampered(p):
            u = real_u0(p).copy()
            u[0, 0] += 1e-6
            return u

        monkeypatch.setattr(cli_mod, "purification_unitary", tampered)
        assert main(["verify-u0"]) == 1

    def test_tightened_tolerance_flips_verdict(self, tmp_path):
        f = tmp_path / "strict.json"
        f.write_text(json.dumps({"tolerances": {"unitarity": 1e-30}}))
        out = tmp_path / "u0.json"
        assert main(["verify-u0", "--config", str(f), "--out", str(out)]) == 1
        rep = json.loads(out.read_text())
        assert rep["status"] == "fail"
        assert rep["config"]["tolerances"] == {"unitarity": 1e-30}
        assert all(c["threshold"] == 1e-30 for c in rep["checks"])

    def test_verify_barenco_checks_each_factor(self, tmp_path):
        out = tmp_path / "flat.json"
        assert main(["verify-barenco", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        names = [c["name"] for c in rep["checks"]]
        assert "factor_reconstruction" in names

    def test_verify_outcomes_covers_post_states(self, tmp_path):
        out = tmp_path / "outcomes.json"
        assert main(["verify-outcomes", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        names = [c["name"] for c in rep["checks"]]
        assert "post_purification_states" in names

    def test_run_deterministic_modulo_timing(self, tmp_path):
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        main(["run", "--trials", "300", "--seed", "9", "--out", str(out1)])
        main(["run", "--trials", "300", "--seed", "9", "--out", str(out2)])
        rep1 = strip_timing(json.loads(out1.read_text()))
        rep2 = strip_timing(json.loads(out2.read_text()))
        assert json.dumps(rep1, sort_keys=True) == json.dumps(rep2, sort_keys=True)

    def test_sweep_csv_output(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["sweep", "--trials", "60", "--alpha-steps", "3",
                     "--alpha-min", "0.1", "--alpha-max", "0.5",
                     "--format", "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "alpha,analytic,empirical,trials,seed"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 0.1
        assert float(first[1]) == pytest.approx(0.04)

    def test_sweep_json_output(self, tmp_path):
        out = tmp_path / "sweep.json"
        assert main(["sweep", "--trials", "40", "--alpha-steps", "2", "--out", str(out)]) == 0
        rep = json.loads(out.read_text())
        assert len(rep["data"]["rows"]) == 2

    def test_sweep_rejects_alpha_beyond_half(self, capsys):
        assert main(["sweep", "--alpha-min", "0.2", "--alpha-max", "0.7"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_sweep_rejects_zero_steps(self):
        assert main(["sweep", "--alpha-steps", "0"]) == 2

    def test_bad_config_file_exits_two(self, tmp_path, capsys):
        f = tmp_path / "cfg.json"
        f.write_text(json.dumps({"channel": [0.9, 0.1, 0.1, 0.1]}))
        assert main(["run", "--config", str(f)]) == 2
        assert "error:" in capsys.readouterr().err

    def test_renormalize_flag_allows_loose_vectors(self, tmp_path):
        f = tmp_path / "cfg.json"
        f.write_text(json.dumps({"input": [1, 1, 1, 1], "trials": 50}))
        assert main(["run", "--config", str(f)]) == 2
        assert main(["run", "--config", str(f), "--renormalize"]) == 0

    def test_config_overrides_from_flags(self, tmp_path):
        out = tmp_path / "r.json"
        main(["run", "--trials", "77", "--seed", "123", "--out", str(out)])
        rep = json.loads(out.read_text())
        assert rep["config"]["trials"] == 77 and rep["config"]["seed"] == 123

    def test_failing_check_exits_one_unless_forced(self, capsys):
        args = argparse.Namespace(out=None)
        failing = [Check("broken", False, 1.0, 0.5)]
        assert _finish("demo", failing, args) == 1
        assert _finish("demo", failing, args, force_exit_zero=True) == 0
        passing = [Check("fine", True)]
        assert _finish("demo", passing, args) == 0
        capsys.readouterr()
