"""End-to-end runs of the `pbecfr` command through `main`."""
from __future__ import annotations

import json

from pbecfr import __version__
from pbecfr.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAILED, main
from pbecfr.game import load_assessment, load_game
from pbecfr.games import FIXTURES
from pbecfr.games.bargain import STANDARD_POOLS
from pbecfr.psro import read_epochs


class TestUsage:
    def test_no_arguments(self) -> None:
        assert main([]) == EXIT_USAGE

    def test_version(self, capsys) -> None:
        assert main(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_missing_required_option(self) -> None:
        assert main(["solve"]) == EXIT_USAGE

    def test_bad_iteration_list(self) -> None:
        assert main(["bench", "--iters", "a,b"]) == EXIT_USAGE

    def test_missing_game_file(self, tmp_path) -> None:
        code = main(["verify", "--game", str(tmp_path / "nope.json"), "--assessment", str(tmp_path / "a.json")])
        assert code == EXIT_USAGE

    def test_unknown_fixture(self) -> None:
        assert main(["gen", "fixture", "--name", "figure9"]) == EXIT_USAGE


class TestGenAndVerify:
    def _gen_fixture(self, tmp_path, name):
        game_path, assessment_path = tmp_path / f"{name}.json", tmp_path / f"{name}.assessment.json"
        code = main(["gen", "fixture", "--name", name, "--out", str(game_path),
                     "--assessment-out", str(assessment_path)])
        assert code == EXIT_OK
        return game_path, assessment_path

    def test_figure1_is_pbe(self, tmp_path) -> None:
        game_path, assessment_path = self._gen_fixture(tmp_path, "figure1")
        assert load_game(game_path).num_nodes == FIXTURES["figure1"]().num_nodes
        report_path = tmp_path / "report.json"
        code = main(["verify", "--game", str(game_path), "--assessment", str(assessment_path),
                     "--out", str(report_path)])
        assert code == EXIT_OK
        report = json.loads(report_path.read_text())
        assert all(report[k]["pass"] for k in ("sequential_rationality", "bayes", "agm"))

    def test_figure3_fails_with_certificate(self, tmp_path) -> None:
        game_path, assessment_path = self._gen_fixture(tmp_path, "figure3")
        report_path = tmp_path / "report.json"
        code = main(["verify", "--game", str(game_path), "--assessment", str(assessment_path),
                     "--out", str(report_path)])
        assert code == EXIT_VERIFY_FAILED
        report = json.loads(report_path.read_text())
        assert report["agm"]["pass"] is False
        assert report["agm"]["certificate"] is not None

    def test_verify_report_to_stdout(self, tmp_path, capsys) -> None:
        _, assessment_path = self._gen_fixture(tmp_path, "figure1")
        capsys.readouterr()
        code = main(["verify", "--game", "fixture:figure1", "--assessment", str(assessment_path)])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["agm"]["pass"] is True

    def test_gengoof(self, tmp_path) -> None:
        path = tmp_path / "g.json"
        assert main(["gen", "gengoof", "--k", "2", "--out", str(path)]) == EXIT_OK
        assert load_game(path).num_nodes == 15

    def test_bargain_parameters(self, tmp_path) -> None:
        path = tmp_path / "bargain.json"
        assert main(["gen", "bargain", "--preset", "tiny", "--out", str(path)]) == EXIT_OK
        data = json.loads(path.read_text())["bargain"]
        assert data["valuation_pairs"] == 12

    def test_paper_preset_matches_standard(self, tmp_path) -> None:
        paths = {name: tmp_path / f"{name}.json" for name in ("paper", "standard")}
        for name, path in paths.items():
            assert main(["gen", "bargain", "--preset", name, "--seed", "2", "--out", str(path)]) == EXIT_OK
        paper = json.loads(paths["paper"].read_text())["bargain"]
        assert paper == json.loads(paths["standard"].read_text())["bargain"]
        assert paper["valuation_pairs"] > 0
        assert tuple(paper["pool"]) in STANDARD_POOLS
        assert paper["rounds"] == 5

    def test_verify_rejects_malformed_assessment(self, tmp_path) -> None:
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"strategy": {"0": {"a": "one"}}, "beliefs": {}}))
        assert main(["verify", "--game", "fixture:figure1", "--assessment", str(path)]) == EXIT_USAGE
        path.write_text(json.dumps({
            "strategy": {"0": {"a": 1.0}, "1": {"e": 1.0}},
            "beliefs": {"0": {"0": 1.0}, "1": {"x": 1.0}},
        }))
        assert main(["verify", "--game", "fixture:figure1", "--assessment", str(path)]) == EXIT_USAGE


class TestSolve:
    def test_writes_assessment_and_log(self, tmp_path) -> None:
        out, log_path = tmp_path / "a.json", tmp_path / "log.csv"
        code = main(["solve", "--game", "fixture:matching_pennies", "--iters", "20",
                     "--out", str(out), "--log", str(log_path)])
        assert code == EXIT_OK
        assessment = load_assessment(FIXTURES["matching_pennies"](), out)
        assert abs(assessment.strategy.row(0).sum() - 1.0) < 1e-9
        lines = log_path.read_text().splitlines()
        assert lines[0].startswith("t,")
        assert len(lines) > 1


class TestPsroAndBench:
    def test_psro_summary(self, tmp_path, capsys) -> None:
        log_path = tmp_path / "epochs.csv"
        code = main(["psro", "--true-game", "fixture:matching_pennies", "--epochs", "1", "--iters", "20",
                     "--log", str(log_path)])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert [e["epoch"] for e in summary["epochs"]] == [0, 1]
        assert len(read_epochs(log_path)) == 2

    def test_bench_summary(self, tmp_path, capsys) -> None:
        csv_path = tmp_path / "rows.csv"
        code = main(["bench", "--generator", "random", "--instances", "1", "--iters", "5,10",
                     "--nodes", "30", "--csv", str(csv_path)])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert summary["failures"] == 0
        assert set(summary["summary"]["pbe-cfr"]) == {"5", "10"}
        assert len(csv_path.read_text().splitlines()) == 5
