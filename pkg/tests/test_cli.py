"""CLI contract tests: exit codes, determinism, config handling, CSV
emitters, file output, and schema validation of every subcommand's JSON
output against the versioned schemas shipped in /schemas."""

import json
import pathlib

import pytest
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from taubench.cli import CONFIG_ENV, run

SCHEMA_DIR = pathlib.Path(__file__).resolve().parents[1] / "schemas"


def _registry():
    resources = []
    for path in SCHEMA_DIR.glob("*.json"):
        contents = json.loads(path.read_text())
        resources.append((contents["$id"], Resource.from_contents(contents)))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(schema_name, payload):
    schema = json.loads((SCHEMA_DIR / f"{schema_name}.json").read_text())
    Draft202012Validator(schema, registry=REGISTRY).validate(payload)


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestExitCodes:
    def test_help_exits_zero(self, capsys):
        code, _, _ = invoke(capsys, "--help")
        assert code == 0

    def test_pass_is_zero(self, capsys):
        code, out, _ = invoke(capsys, "intersect", "-g", "0", "-n", "3")
        assert code == 0
        assert out == '{"genus":0,"n":3,"numbers":{"(0,0,0)":"1"}}\n'

    def test_usage_error_is_two(self, capsys):
        code, _, err = invoke(capsys, "intersect", "-g", "-1", "-n", "3")
        assert code == 2
        validate("error-v1", json.loads(err))

    def test_unknown_suite_level_is_two(self, capsys):
        code, _, _ = invoke(capsys, "suite", "bogus")
        assert code == 2

    def test_missing_subcommand_is_two(self, capsys):
        assert invoke(capsys, "matrix")[0] == 2

    def test_budget_error_is_three(self, capsys):
        code, _, err = invoke(
            capsys,
            "--max-matchings", "5",
            "matrix", "moment", "--N", "1", "--word", "tr12",
        )
        assert code == 3
        assert json.loads(err)["error"] == "budget"

    def test_missing_file_is_two(self, capsys):
        code, _, err = invoke(capsys, "torsion", "--complex", "/nonexistent.json")
        assert code == 2
        validate("error-v1", json.loads(err))


class TestDeterminism:
    def test_byte_identical_reruns(self, capsys):
        argv = ("matrix", "hciz", "--x", "0.5,2", "--y", "1,3",
                "--samples", "20000", "--seed", "3")
        first = invoke(capsys, *argv)
        second = invoke(capsys, *argv)
        assert first == second
        assert first[0] == 0

    def test_intersect_stable(self, capsys):
        a = invoke(capsys, "intersect", "-g", "1", "-n", "2")
        b = invoke(capsys, "intersect", "-g", "1", "-n", "2")
        assert a == b


class TestConfig:
    def test_config_file_sets_seed(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9}))
        _, out, _ = invoke(
            capsys, "--config", str(cfg),
            "matrix", "hciz", "--x", "1,-1", "--y", "1,-1", "--samples", "5000",
        )
        assert json.loads(out)["seed"] == 9

    def test_flag_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 9}))
        _, out, _ = invoke(
            capsys, "--config", str(cfg),
            "matrix", "hciz", "--x", "1,-1", "--y", "1,-1",
            "--samples", "5000", "--seed", "4",
        )
        assert json.loads(out)["seed"] == 4

    def test_env_var_config(self, capsys, tmp_path, monkeypatch):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 7}))
        monkeypatch.setenv(CONFIG_ENV, str(cfg))
        _, out, _ = invoke(
            capsys, "matrix", "hciz", "--x", "1,-1", "--y", "1,-1",
            "--samples", "5000",
        )
        assert json.loads(out)["seed"] == 7

    def test_unknown_config_key_rejected(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"sneaky": 1}))
        code, _, err = invoke(capsys, "--config", str(cfg), "verify", "kdv")
        assert code == 2
        assert "sneaky" in json.loads(err)["message"]


class TestOutputs:
    def test_csv_intersect(self, capsys):
        code, out, _ = invoke(capsys, "--format", "csv", "intersect", "-g", "1", "-n", "1")
        assert code == 0
        assert out == "genus,indices,value\n1,1,1/24\n"

    def test_csv_genus(self, capsys):
        _, out, _ = invoke(capsys, "--format", "csv", "matrix", "genus", "--word", "tr6")
        assert out == "genus,coefficient\n0,5\n1,10\n"

    def test_csv_unsupported_elsewhere(self, capsys):
        code, _, _ = invoke(capsys, "--format", "csv", "verify", "kdv")
        assert code == 2

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "out.json"
        code, out, _ = invoke(
            capsys, "--output", str(target), "intersect", "-g", "0", "-n", "3"
        )
        assert code == 0 and out == ""
        assert target.read_text() == '{"genus":0,"n":3,"numbers":{"(0,0,0)":"1"}}\n'


class TestSchemas:
    """Every JSON-emitting subcommand validates against its shipped schema."""

    def payload(self, capsys, *argv, expect=0):
        code, out, _ = invoke(capsys, *argv)
        assert code == expect
        return json.loads(out)

    def test_graphs(self, capsys):
        validate("graphs-v1", self.payload(
            capsys, "graphs", "enumerate", "--genus", "0", "--faces", "3"))

    def test_intersect(self, capsys):
        validate("intersect-v1", self.payload(capsys, "intersect", "-g", "1", "-n", "1"))

    def test_verify(self, capsys):
        validate("verify-v1", self.payload(capsys, "verify", "kdv"))
        validate("verify-v1", self.payload(capsys, "verify", "string"))

    def test_schur(self, capsys):
        validate("schur-v1", self.payload(
            capsys, "schur", "--partition", "2,1", "--check-kp", "--check-hirota"))

    def test_virasoro_oscillator(self, capsys):
        validate("virasoro-oscillator-v1", self.payload(
            capsys, "virasoro", "oscillator", "--max-mode", "1", "--lambda", "1"))

    def test_virasoro_target(self, capsys):
        validate("virasoro-target-v1", self.payload(capsys, "virasoro", "target"))

    def test_matrix_moment(self, capsys):
        validate("matrix-moment-v1", self.payload(
            capsys, "matrix", "moment", "--N", "3", "--word", "tr3^2",
            "--lambda", "3,4,5"))
        validate("matrix-moment-v1", self.payload(
            capsys, "matrix", "moment", "--N", "2", "--word", "tr4"))

    def test_matrix_genus(self, capsys):
        validate("matrix-genus-v1", self.payload(
            capsys, "matrix", "genus", "--word", "tr6"))

    def test_matrix_match(self, capsys):
        validate("matrix-match-v1", self.payload(
            capsys, "matrix", "match", "--lambda", "3,4"))

    def test_matrix_hciz(self, capsys):
        validate("matrix-hciz-v1", self.payload(
            capsys, "matrix", "hciz", "--x", "0.5,2", "--y", "1,3",
            "--samples", "20000", "--seed", "0"))

    def test_matrix_normalization(self, capsys):
        validate("matrix-normalization-v1", self.payload(
            capsys, "matrix", "normalization", "--N", "1", "--lambda", "2"))

    def test_torsion(self, capsys, tmp_path):
        path = tmp_path / "c5.json"
        path.write_text(json.dumps({"ranks": [1, 1], "boundaries": [[["5"]]]}))
        validate("torsion-v1", self.payload(capsys, "torsion", "--complex", str(path)))
        validate("torsion-v1", self.payload(
            capsys, "torsion", "--complex", str(path), "--order-check"))

    def test_suite_quick(self, capsys):
        validate("suite-v1", self.payload(capsys, "suite", "quick"))
