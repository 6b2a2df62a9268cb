import json

import pytest
from click.testing import CliRunner

from archipelago.cli.commands import cli
from archipelago.core.config import get_settings


C3C2 = '{"prefix": [{"cyclic": 3}, {"cyclic": 2}]}'


@pytest.fixture
def runner():
    return CliRunner()


def lines(result):
    return result.stdout.strip().splitlines()


class TestWordCommands:
    def test_reduce(self, runner):
        result = runner.invoke(cli, ["reduce", "g1:2 g1:-2 g2:5"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "g2:5"

    def test_reduce_as_json(self, runner):
        result = runner.invoke(cli, ["--format", "json", "reduce", "g1:2 g1:-2 g2:5"])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["command"] == "reduce"
        assert payload["word"] == "g2:5"
        assert payload["letters"] == [[2, "5"]]
        assert payload["length"] == 1

    def test_project(self, runner):
        result = runner.invoke(cli, ["project", "-n", "3", "nest()"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "g1:1·g2:1·g3:3·g2:1·g3:3"

    def test_tau_schema_and_projection(self, runner):
        schema = runner.invoke(cli, ["tau", "-j", "1", "nest()"])
        assert schema.exit_code == 0
        assert schema.stdout.strip() == "tau[1](nest(k=1.., base=g{k}:1, exp=k+1))"
        projected = runner.invoke(cli, ["tau", "-j", "1", "-n", "3", "nest()"])
        assert projected.stdout.strip() == "g2:1·g3:3·g2:1·g3:3"

    def test_tau_schema_as_json(self, runner):
        result = runner.invoke(cli, ["--format", "json", "tau", "-j", "2", "nest()"])
        payload = json.loads(result.stdout)
        assert payload["schema"].startswith("tau[2](")
        assert payload["level"] == 2


class TestVerdictCommands:
    def test_eq_structural(self, runner):
        result = runner.invoke(cli, ["eq", "nest() inv(nest())", "1"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "EqualCertified(structural)"

    def test_eq_distinct(self, runner):
        result = runner.invoke(cli, ["eq", "g1:1", "1", "-N", "5"])
        assert result.stdout.strip() == "DistinctWitness(n=1)"

    def test_eqa_kills_finite_words(self, runner):
        result = runner.invoke(cli, ["eqa", "g1:1", "1", "-J", "3", "-N", "5"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "EqualCertified(j=1, structural)"

    def test_eqa_as_json(self, runner):
        result = runner.invoke(cli, ["--format", "json", "eqa", "g1:1", "1", "-J", "3", "-N", "5"])
        payload = json.loads(result.stdout)
        assert payload["command"] == "eqa"
        assert payload["verdict"]["status"] == "EqualCertified"
        assert payload["text"] == "EqualCertified(j=1, structural)"


class TestFiniteFamilies:
    def test_torsion(self, runner):
        result = runner.invoke(cli, ["--family-inline", C3C2, "torsion", "g1:1 g2:1 g1:2"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "g1:1·g2:1·g1:2: order 2, conjugator g1:1, core g2:1"

    def test_no_torsion(self, runner):
        result = runner.invoke(cli, ["--family-inline", C3C2, "torsion", "g1:1 g2:1"])
        assert result.stdout.strip() == "g1:1·g2:1: no torsion"

    def test_family_file(self, runner, tmp_path):
        path = tmp_path / "family.json"
        path.write_text(C3C2, encoding="utf-8")
        result = runner.invoke(cli, ["--family", str(path), "reduce", "g1:2 g1:2"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "g1:1"

    def test_census(self, runner):
        result = runner.invoke(cli, ["--family-inline", C3C2, "census", "-L", "3"])
        assert result.exit_code == 0
        assert lines(result) == [
            "14 words, 3 involutions, 10 non-involutions",
            "  g2:1",
            "  g1:1·g2:1·g1:2",
            "  g1:2·g2:1·g1:1",
        ]

    def test_census_over_an_infinite_factor(self, runner):
        result = runner.invoke(cli, ["census", "-L", "2"])
        assert result.exit_code == 3


class TestClassifyAndPhi:
    def test_classify_involution_tail(self, runner):
        result = runner.invoke(cli, ["--family-inline", '{"tail": [{"cyclic": 2}]}', "classify"])
        assert result.exit_code == 0
        assert result.stdout.strip() == "A_Z2 (lambda=countable)"

    def test_classify_as_json(self, runner):
        result = runner.invoke(cli, ["--format", "json", "--family-inline", '{"tail": ["Q"]}', "classify"])
        payload = json.loads(result.stdout)
        assert payload["prototype"] == "A_Z"
        assert payload["lambda"] == 0

    def test_phi_identity_map(self, runner, tmp_path):
        path = tmp_path / "map.json"
        path.write_text('{"tail": ["identity"]}', encoding="utf-8")
        result = runner.invoke(cli, ["phi", "--map", str(path), "-n", "3", "nest()"])
        assert result.exit_code == 0
        assert lines(result) == [
            "n=1: g1:1",
            "n=2: g1:1·g2:2",
            "n=3: g1:1·g2:1·g3:3·g2:1·g3:3",
            "compatible",
        ]


class TestWitnessCommands:
    def test_divisible(self, runner):
        result = runner.invoke(cli, ["witness", "divisible", "--nmax", "3"])
        assert result.exit_code == 0
        output = lines(result)
        assert output[0] == "divisible: w ~ w_n^(n!) for 2 <= n <= 3"
        assert len(output) == 6

    def test_epsilon_pair(self, runner):
        result = runner.invoke(
            cli,
            ["witness", "epsilon", "--seq", "1", "--seq", "0", "--tail", "last", "--levels", "4"],
        )
        assert result.exit_code == 0
        assert "DistinctWitness(j<=4, n<=7)" in result.stdout

    def test_lemma20(self, runner):
        result = runner.invoke(cli, ["--family-inline", C3C2, "witness", "lemma20", "-N", "5"])
        assert result.exit_code == 0
        assert lines(result)[0] == (
            "lemma20: (gh)^1 = g1:1·g2:1, a^(gh) = g2:1·g1:2·g2:1·g1:1·g2:1"
        )


class TestExitCodes:
    def test_parse_error(self, runner):
        result = runner.invoke(cli, ["reduce", "g1:1 ("])
        assert result.exit_code == 2

    def test_bad_family_json(self, runner):
        result = runner.invoke(cli, ["--family-inline", "{", "reduce", "1"])
        assert result.exit_code == 2

    def test_contract_violation(self, runner):
        result = runner.invoke(cli, ["tau", "-j", "-1", "nest()"])
        assert result.exit_code == 3

    def test_infinite_word_cannot_be_reduced(self, runner):
        result = runner.invoke(cli, ["reduce", "nest()"])
        assert result.exit_code == 3

    def test_resource_budget(self, runner, monkeypatch):
        monkeypatch.setenv("ARCHIPELAGO_WORD_SIZE_BUDGET", "10")
        get_settings.cache_clear()
        result = runner.invoke(cli, ["project", "-n", "6", "nest()"])
        assert result.exit_code == 4

    def test_invalid_witness_parameters(self, runner):
        result = runner.invoke(cli, ["witness", "epsilon", "--length", "0"])
        assert result.exit_code == 2

    def test_phi_depth_zero_is_not_replaced_by_the_default(self, runner, tmp_path):
        path = tmp_path / "map.json"
        path.write_text('{"tail": ["identity"]}', encoding="utf-8")
        result = runner.invoke(cli, ["phi", "--map", str(path), "-n", "0", "nest()"])
        assert result.exit_code == 3
