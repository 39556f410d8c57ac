import json

import pytest

from brkpyapi.brk_cli.brk_main import build_parser, main
from brkpyapi.brk_cli.brk_runner import run
from brkpyapi.brk_cli.cli_exception import ParseError, ValidationError
from brkpyapi.brk_cli.problem_kind import ProblemKind, RunStatus
from brkpyapi.brk_cli.run_config import OUTPUT_ENV, SuiteConfig, apply_overrides, parse_config, parse_value

RIEMANN_TOML = """
problem = "riemann"
system = "burgers"

[data]
u_minus = [1.0]
u_plus = [-1.0]
"""


def config_in(tmp_path, text: str, *overrides: str):
    return parse_config(text, list(overrides) + [f"output.directory={tmp_path.as_posix()}"])


class TestParseConfig:
    def test_minimal(self):
        config = parse_config(RIEMANN_TOML)
        assert config.problem is ProblemKind.RIEMANN
        assert config.system().name == "burgers"
        assert config.state("u_minus").tolist() == [1.0]
        assert config.formats == ("csv", "json")
        assert config.numerics.tol_rh == 1e-10

    def test_missing_system(self):
        with pytest.raises(ValidationError, match="missing key system"):
            parse_config('problem = "riemann"\n')

    def test_nonpositive_tolerance(self):
        with pytest.raises(ValidationError, match=r"numerics\.tol_rh must be > 0"):
            parse_config(RIEMANN_TOML + "\n[numerics]\ntol_rh = -1.0\n")

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match=r"unknown key numerics\.tol_foo"):
            parse_config(RIEMANN_TOML + "\n[numerics]\ntol_foo = 1.0\n")

    def test_dimension_mismatch(self):
        text = 'problem = "boundary-riemann"\nsystem = "linear2"\n[data]\nu0 = [1.0]\nud = [3.0, 4.0]\n'
        with pytest.raises(ValidationError, match="dimension mismatch"):
            parse_config(text)

    def test_missing_data(self):
        with pytest.raises(ValidationError, match=r"data\.epsilon"):
            parse_config('problem = "classical-sim"\nsystem = "burgers"\n[data]\nu0 = [0.0]\nud = [1.0]\n')

    def test_epsilons_must_decrease(self):
        text = ('problem = "compare-limits"\nsystem = "burgers"\n'
                '[data]\nu0 = [0.0]\nud = [1.0]\nepsilons = [0.01, 0.02]\n')
        with pytest.raises(ValidationError, match="strictly decreasing"):
            parse_config(text)

    def test_malformed_toml_reports_position(self):
        with pytest.raises(ParseError) as info:
            parse_config('problem = "riemann"\nsystem = \n')
        assert info.value.line == 2
        assert info.value.column is not None

    def test_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("problem: riemann\nsystem:\n  name: p-system\n  params:\n    drift: 0.5\n"
                        "data:\n  u_minus: [1.0, 0.0]\n  u_plus: [1.1, 0.0]\n")
        config = parse_config(path)
        assert config.system_params == {"drift": 0.5}
        assert config.source == str(path)

    def test_json_error_position(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"problem": "riemann",\n "system": }\n')
        with pytest.raises(ParseError) as info:
            parse_config(path)
        assert info.value.line == 2

    def test_output_directory_from_environment(self, monkeypatch, tmp_path):
        monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
        assert parse_config(RIEMANN_TOML).output_dir == tmp_path


class TestSuiteConfig:
    def test_defaults_match_acceptance_sizes(self):
        sizes = SuiteConfig()
        assert (sizes.envelope_functions, sizes.boundary_problems, sizes.signature_draws) == (200, 50, 1000)

    def test_workers_must_be_integer(self):
        with pytest.raises(ValidationError, match=r"simulation\.workers"):
            parse_config(RIEMANN_TOML + "\n[simulation]\nworkers = 1.5\n")

    def test_workers_parsed(self):
        assert parse_config(RIEMANN_TOML + "\n[simulation]\nworkers = 4\n").simulation.workers == 4


class TestOverrides:
    def test_values_are_typed(self):
        assert parse_value("1e-9") == 1e-9
        assert parse_value("[1.0, 2.0]") == [1.0, 2.0]
        assert parse_value("true") is True
        assert parse_value("burgers") == "burgers"

    def test_nested_keys_created(self):
        document = apply_overrides({}, ["numerics.tol_rh=1e-9", "data.u0=[0.5]"])
        assert document == {"numerics": {"tol_rh": 1e-9}, "data": {"u0": [0.5]}}

    def test_override_wins(self):
        config = parse_config(RIEMANN_TOML + "\n[numerics]\ntol_rh = 1e-8\n", ["numerics.tol_rh=1e-9"])
        assert config.numerics.tol_rh == 1e-9

    def test_not_key_value(self):
        with pytest.raises(ParseError):
            apply_overrides({}, ["numerics.tol_rh"])


class TestRun:
    def test_riemann(self, tmp_path):
        outcome = run(config_in(tmp_path, RIEMANN_TOML))
        assert outcome.status is RunStatus.PASSED
        assert outcome.exit_code == 0
        waves = outcome.summary["results"]["waves"]
        assert [w["kind"] for w in waves] == ["shock"]
        assert waves[0]["speed"] == pytest.approx(0.0, abs=1e-8)
        summary = json.loads((outcome.directory / "summary.json").read_text())
        assert summary["status"] == "passed"
        assert {"wave_fan.csv", "wave_fan.json", "effective_config.json"} <= set(summary["artifacts"])

    def test_json_only(self, tmp_path):
        outcome = run(config_in(tmp_path, RIEMANN_TOML, 'output.formats=["json"]'))
        assert not (outcome.directory / "wave_fan.csv").exists()
        assert (outcome.directory / "wave_fan.json").exists()

    def test_boundary_without_layer_is_solver_error(self, tmp_path):
        text = 'problem = "boundary-riemann"\nsystem = "burgers"\n[data]\nu0 = [-1.0]\nud = [1.5]\n'
        outcome = run(config_in(tmp_path, text))
        assert outcome.status is RunStatus.SOLVER_ERROR
        assert outcome.exit_code == 2
        assert outcome.summary["error"]["type"] == "NoConnectionException"

    def test_linear_boundary_writes_layer(self, tmp_path):
        text = 'problem = "boundary-riemann"\nsystem = "linear2"\n[data]\nu0 = [1.0, 2.0]\nud = [3.0, 4.0]\n'
        outcome = run(config_in(tmp_path, text))
        assert outcome.status is RunStatus.PASSED
        assert outcome.summary["results"]["trace"] == pytest.approx([1.0, 4.0], abs=1e-8)
        assert (outcome.directory / "layer.csv").exists()

    def test_validate_hypotheses(self, tmp_path):
        outcome = run(config_in(tmp_path, 'problem = "validate"\nsystem = "p-system"\n'))
        assert outcome.status is RunStatus.PASSED
        assert outcome.summary["results"]["regime"]["kind"] == "non_characteristic"

    def test_validate_saved_fan(self, tmp_path):
        first = run(config_in(tmp_path, RIEMANN_TOML))
        fan_file = (first.directory / "wave_fan.json").as_posix()
        text = f'problem = "validate"\nsystem = "burgers"\n[data]\nfan_file = "{fan_file}"\n'
        outcome = run(config_in(tmp_path, text))
        assert outcome.summary["validations"]["fan"]["passed"]

    def test_validate_missing_fan_file(self, tmp_path):
        missing = (tmp_path / "absent" / "fan.json").as_posix()
        text = f'problem = "validate"\nsystem = "burgers"\n[data]\nfan_file = "{missing}"\n'
        outcome = run(config_in(tmp_path, text))
        assert outcome.status is RunStatus.CONFIG_ERROR
        assert outcome.exit_code == 3
        summary = json.loads((outcome.directory / "summary.json").read_text())
        assert summary["error"]["type"] == "ValidationError"
        assert "fan_file" in summary["error"]["message"]

    def test_validate_corrupt_fan_file(self, tmp_path):
        broken = tmp_path / "fan.json"
        broken.write_text("{not json")
        text = f'problem = "validate"\nsystem = "burgers"\n[data]\nfan_file = "{broken.as_posix()}"\n'
        outcome = run(config_in(tmp_path, text))
        assert outcome.status is RunStatus.CONFIG_ERROR
        assert (outcome.directory / "summary.json").exists()


class TestMain:
    def test_parser_lists_problems(self):
        args = build_parser().parse_args(["riemann", "-c", "run.toml", "-s", "a=1", "-s", "b=2"])
        assert args.overrides == ["a=1", "b=2"]

    def test_missing_config(self, capsys):
        assert main(["riemann"]) == RunStatus.CONFIG_ERROR.value
        assert "needs --config" in capsys.readouterr().err

    def test_bad_config(self, tmp_path, capsys):
        path = tmp_path / "bad.toml"
        path.write_text(RIEMANN_TOML + "\n[numerics]\ntol_rh = 0\n")
        assert main(["riemann", "-c", str(path), "-o", str(tmp_path)]) == 3
        assert "tol_rh must be > 0" in capsys.readouterr().err

    def test_missing_fan_file_exit_code(self, tmp_path):
        path = tmp_path / "run.toml"
        path.write_text(f'problem = "validate"\nsystem = "burgers"\n[data]\n'
                        f'fan_file = "{(tmp_path / "none.json").as_posix()}"\n')
        assert main(["validate", "-c", str(path), "-o", str(tmp_path)]) == 3
        assert (tmp_path / "validate-burgers" / "summary.json").exists()

    def test_subcommand_replaces_problem(self, tmp_path, capsys):
        path = tmp_path / "run.toml"
        path.write_text(RIEMANN_TOML.replace('"riemann"', '"validate"'))
        assert main(["riemann", "-c", str(path), "-o", str(tmp_path)]) == 0
        assert (tmp_path / "riemann-burgers" / "summary.json").exists()
        assert capsys.readouterr().out.startswith("passed: ")

    @pytest.mark.slow
    def test_suite(self, tmp_path):
        code = main(["suite", "-o", str(tmp_path), "-s", "suite.envelope_functions=10",
                     "-s", "suite.boundary_problems=2", "-s", "suite.signature_draws=20",
                     "-s", "suite.viscous=false"])
        summary = json.loads((tmp_path / "suite-burgers" / "summary.json").read_text())
        assert summary["validations"]["burgers_oracles"]["passed"]
        assert summary["validations"]["linear_closed_form"]["passed"]
        assert code == 0, [name for name, v in summary["validations"].items() if not v["passed"]]

    @pytest.mark.slow
    def test_suite_acceptance_sizes(self, tmp_path):
        assert main(["suite", "-o", str(tmp_path), "-s", "suite.viscous=false"]) == 0
        summary = json.loads((tmp_path / "suite-burgers" / "summary.json").read_text())
        sizes = json.loads((tmp_path / "suite-burgers" / "effective_config.json").read_text())["suite"]
        assert (sizes["envelope_functions"], sizes["boundary_problems"], sizes["signature_draws"]) == (200, 50, 1000)
        assert all(v["passed"] for v in summary["validations"].values())

    @pytest.mark.slow
    def test_suite_viscosity_dependence(self, tmp_path):
        main(["suite", "-o", str(tmp_path), "-s", "suite.envelope_functions=2", "-s", "suite.boundary_problems=1",
              "-s", "suite.signature_draws=5", "-s", "suite.viscous=true"])
        summary = json.loads((tmp_path / "suite-burgers" / "summary.json").read_text())
        dependence = summary["validations"]["viscosity_dependence"]
        assert dependence["passed"]
        assert dependence["fan_gap"] == pytest.approx(1.0, abs=1e-8)
        assert min(dependence["gaps"]) >= 0.5
