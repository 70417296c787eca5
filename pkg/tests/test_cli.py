"""Subcommand behaviour, exit codes and file round trips."""

import json
import subprocess
import sys

import pytest

from conftest import make_fig1
from decreach import cli
from decreach.game import load, save
from decreach.hypergame import load_export
from decreach.inference import InferenceMechanism, load_inference, save_inference


@pytest.fixture
def fig1_files(tmp_path):
    game = make_fig1()
    game_path = tmp_path / "fig1.json"
    save(game, game_path)
    inference_path = tmp_path / "deceived.json"
    save_inference(InferenceMechanism.union(game.a1), [1], game, inference_path)
    return game, game_path, inference_path


def read_json(path):
    return json.loads(path.read_text())


class TestAsw:
    def test_solves_and_writes(self, fig1_files, tmp_path, capsys):
        game, game_path, _ = fig1_files
        code = cli.main(["asw", str(game_path), "--output", str(tmp_path)])
        assert code == 0
        doc = read_json(tmp_path / "fig1.asw.json")
        assert doc["win1"] == [0, 1]
        assert doc["strategy"] == [{"state": 1, "action": 0}]
        out = capsys.readouterr().out
        assert "win1 (2): s0 s1" in out

    def test_restrict_flag(self, fig1_files, tmp_path, capsys):
        game, game_path, _ = fig1_files
        code = cli.main(
            ["asw", str(game_path), "--restrict", "a2", "--output", str(tmp_path)]
        )
        assert code == 0
        doc = read_json(tmp_path / "fig1.asw.json")
        assert doc["win1"] == [0]
        assert doc["restricted_to"] == ["a2"]

    def test_unknown_restrict_token(self, fig1_files, tmp_path):
        _, game_path, _ = fig1_files
        assert cli.main(["asw", str(game_path), "--restrict", "zz"]) == 1

    def test_json_format(self, fig1_files, tmp_path, capsys):
        _, game_path, _ = fig1_files
        code = cli.main(
            ["asw", str(game_path), "--output", str(tmp_path), "--format", "json"]
        )
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["win1"] == [0, 1]


class TestDasw:
    def test_full_pipeline(self, fig1_files, tmp_path, capsys):
        _, game_path, inference_path = fig1_files
        code = cli.main(
            ["dasw", str(game_path), str(inference_path), "--output", str(tmp_path)]
        )
        assert code == 0
        doc = read_json(tmp_path / "fig1.dasw.json")
        assert len(doc["region"]) == 5
        assert doc["oracle_agrees"] is True
        assert doc["outer_iterations"] == 2
        assert doc["safe2_iterations"][0] == 3
        assert doc["safe1_iterations"][0] == 2
        assert "oracle agrees: True" in capsys.readouterr().out

    def test_full_knowledge_collapses_to_classical(self, fig1_files, tmp_path):
        game, game_path, _ = fig1_files
        trivial = tmp_path / "trivial.json"
        save_inference(InferenceMechanism.union(game.a1), game.a1, game, trivial)
        code = cli.main(
            ["dasw", str(game_path), str(trivial), "--output", str(tmp_path)]
        )
        assert code == 0
        doc = read_json(tmp_path / "fig1.dasw.json")
        # projection of the region is exactly the classical region {s0, s1}
        hdoc_code = cli.main(
            ["hypergame", str(game_path), str(trivial), "--output", str(tmp_path)]
        )
        assert hdoc_code == 0
        hdoc = read_json(tmp_path / "fig1.hypergame.json")
        states = {hdoc["vertices"][v]["state"] for v in doc["region"]}
        assert states == {0, 1}

    def test_empty_x0_runs(self, fig1_files, tmp_path):
        game, game_path, _ = fig1_files
        empty = tmp_path / "empty.json"
        save_inference(InferenceMechanism.union(game.a1), [], game, empty)
        assert cli.main(["dasw", str(game_path), str(empty), "--output", str(tmp_path)]) == 0

    def test_oracle_disagreement_exits_internal(self, fig1_files, tmp_path, monkeypatch, capsys):
        _, game_path, inference_path = fig1_files
        monkeypatch.setattr(cli, "mdp_oracle", lambda h, perm: frozenset())
        code = cli.main(
            ["dasw", str(game_path), str(inference_path), "--output", str(tmp_path)]
        )
        assert code == 3
        assert "oracle mismatch" in capsys.readouterr().err

    def test_perceived_quantifier_flag(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        code = cli.main(
            [
                "dasw", str(game_path), str(inference_path),
                "--safe2-p1-quantifier", "perceived", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        assert read_json(tmp_path / "fig1.dasw.json")["safe2_p1_quantifier"] == "perceived"


class TestHypergameExport:
    def test_export_round_trips(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        code = cli.main(
            ["hypergame", str(game_path), str(inference_path), "--output", str(tmp_path)]
        )
        assert code == 0
        out = tmp_path / "fig1.hypergame.json"
        doc = load_export(out)
        assert len(doc["vertices"]) == 7
        assert json.dumps(doc, indent=2) + "\n" == out.read_text()


class TestSimulate:
    def test_region_starts(self, fig1_files, tmp_path, capsys):
        _, game_path, inference_path = fig1_files
        code = cli.main(
            [
                "simulate", str(game_path), str(inference_path),
                "--episodes", "200", "--seed", "3", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        doc = read_json(tmp_path / "fig1.sim.json")
        assert doc["all_reached"] is True
        assert doc["counterexample"] is None
        assert all(s["reach_rate"] == 1.0 for s in doc["starts"])

    def test_explicit_starts_and_counterexample(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        # vertex ids: the revealed trap (s2, full belief) is not in the region
        code = cli.main(
            [
                "simulate", str(game_path), str(inference_path),
                "--episodes", "20", "--cap", "30", "--starts", "4",
                "--policy", "random", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        doc = read_json(tmp_path / "fig1.sim.json")
        assert doc["starts"][0]["reach_rate"] < 1.0
        counter = read_json(tmp_path / "fig1.counterexample.json")
        assert counter["outcome"] == "STEP_CAP"
        assert len(counter["vertices"]) == counter["steps"] + 1

    def test_bad_starts_spec(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        assert (
            cli.main(
                ["simulate", str(game_path), str(inference_path), "--starts", "x,y"]
            )
            == 2
        )

    def test_seed_env_default(self, fig1_files, tmp_path, monkeypatch):
        _, game_path, inference_path = fig1_files
        monkeypatch.setenv("DECREACH_SEED", "77")
        code = cli.main(
            [
                "simulate", str(game_path), str(inference_path),
                "--episodes", "5", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        assert read_json(tmp_path / "fig1.sim.json")["base_seed"] == 77


class TestGridworld:
    def test_emits_loadable_pair(self, tmp_path):
        code = cli.main(["gridworld", "--output", str(tmp_path)])
        assert code == 0
        game = load(tmp_path / "gridworld.game.json")
        assert game.n_states == 2048
        mech, x0 = load_inference(tmp_path / "gridworld.inference.json", game)
        assert mech.kind == "closure"
        assert {game.action_name(a) for a in x0} == {"N", "E", "S", "W"}

    def test_custom_layout_and_solve(self, tmp_path, capsys):
        code = cli.main(
            [
                "gridworld", "--size", "3x3", "--flags", "2,0;2,2",
                "--obstacles", "1,1", "--p1-start", "0,0", "--p2-start", "2,1",
                "--x0", "N,E,S,W", "--solve", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "states winnable only by deception" in out
        game = load(tmp_path / "gridworld.game.json")
        assert game.n_states == 9 * 9 * 2 * 4

    def test_bad_layout_is_a_validation_error(self, tmp_path, capsys):
        code = cli.main(
            ["gridworld", "--obstacles", "0,0", "--output", str(tmp_path)]
        )
        assert code == 2
        assert "obstacle" in capsys.readouterr().err

    def test_emitted_game_save_is_canonical(self, tmp_path):
        assert cli.main(["gridworld", "--output", str(tmp_path)]) == 0
        path = tmp_path / "gridworld.game.json"
        from decreach.game import dumps

        assert dumps(load(path)) == path.read_text()


class TestDeterminism:
    def test_identical_inputs_produce_identical_files(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            assert cli.main(
                ["dasw", str(game_path), str(inference_path), "--output", str(out)]
            ) == 0
            assert cli.main(
                [
                    "simulate", str(game_path), str(inference_path),
                    "--episodes", "100", "--policy", "random", "--seed", "5",
                    "--output", str(out),
                ]
            ) == 0
        for name in ("fig1.dasw.json", "fig1.sim.json"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


class TestEmittedFilesRoundTrip:
    def test_every_result_file_is_canonical_json(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        assert cli.main(["asw", str(game_path), "--output", str(tmp_path)]) == 0
        assert cli.main(
            ["dasw", str(game_path), str(inference_path), "--output", str(tmp_path)]
        ) == 0
        assert cli.main(
            [
                "simulate", str(game_path), str(inference_path),
                "--episodes", "30", "--cap", "25", "--starts", "4",
                "--output", str(tmp_path),
            ]
        ) == 0
        emitted = sorted(tmp_path.glob("fig1.*.json"))
        assert len(emitted) >= 4  # asw, dasw, sim, counterexample
        for path in emitted:
            doc = json.loads(path.read_text())
            assert json.dumps(doc, indent=2) + "\n" == path.read_text()


class TestExitCodes:
    def test_malformed_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{nope")
        assert cli.main(["asw", str(bad)]) == 1

    def test_validation_failure(self, tmp_path):
        invalid = tmp_path / "invalid.json"
        invalid.write_text(
            json.dumps(
                {
                    "states": [
                        {"id": 0, "owner": "P1", "final": False},
                        {"id": 1, "owner": "P2", "final": True},
                    ],
                    "actions": [
                        {"id": 0, "owner": "P1", "label": "a"},
                        {"id": 1, "owner": "P2", "label": "b"},
                    ],
                    "transitions": [{"from": 0, "action": 1, "to": 1}],
                }
            )
        )
        assert cli.main(["asw", str(invalid)]) == 2

    def test_usage_error(self, capsys):
        assert cli.main(["no-such-command"]) == 1
        assert cli.main([]) == 1

    def test_missing_file(self, tmp_path):
        assert cli.main(["asw", str(tmp_path / "ghost.json")]) == 1

    def test_internal_error_maps_to_three(self, fig1_files, tmp_path, monkeypatch):
        from decreach.errors import DecreachError

        def boom(*args, **kwargs):
            raise DecreachError("solver invariant broken")

        _, game_path, inference_path = fig1_files
        monkeypatch.setattr(cli, "dasw", boom)
        assert cli.main(
            ["dasw", str(game_path), str(inference_path), "--output", str(tmp_path)]
        ) == 3

    def test_garbage_seed_env_falls_back(self, fig1_files, tmp_path, monkeypatch):
        _, game_path, inference_path = fig1_files
        monkeypatch.setenv("DECREACH_SEED", "not-a-number")
        code = cli.main(
            [
                "simulate", str(game_path), str(inference_path),
                "--episodes", "5", "--output", str(tmp_path),
            ]
        )
        assert code == 0
        assert read_json(tmp_path / "fig1.sim.json")["base_seed"] == 0


class TestPlay:
    def test_scripted_win(self, fig1_files, tmp_path):
        game, game_path, inference_path = fig1_files
        from decreach.asw import asw
        from decreach.dasw import dasw, extract_strategy, permissive
        from decreach.hypergame import build

        mech, x0 = load_inference(inference_path, game)
        h = build(game, x0, mech)
        perm = permissive(h)
        base = asw(game)
        result = dasw(h, perm=perm, base_regions=base)
        strat = extract_strategy(h, result, perm=perm, base_regions=base)

        lines = []
        feed = iter(["b1"])
        episode = cli.play_session(
            h, perm, result, strat,
            read=lambda prompt: next(feed),
            write=lines.append,
            seed=0,
        )
        assert episode.outcome == "REACHED_F"
        assert episode.steps == 2
        text = "\n".join(lines)
        assert "believed safe" in text
        assert "goal achieved" in text

    def test_invalid_input_reprompts_and_quit(self, fig1_files):
        game, game_path, inference_path = fig1_files
        from decreach.asw import asw
        from decreach.dasw import dasw, extract_strategy, permissive
        from decreach.hypergame import build

        mech, x0 = load_inference(inference_path, game)
        h = build(game, x0, mech)
        perm = permissive(h)
        base = asw(game)
        result = dasw(h, perm=perm, base_regions=base)
        strat = extract_strategy(h, result, perm=perm, base_regions=base)

        lines = []
        feed = iter(["zz", "q"])
        episode = cli.play_session(
            h, perm, result, strat,
            read=lambda prompt: next(feed),
            write=lines.append,
        )
        assert episode.outcome == "QUIT"
        assert any("unknown move" in line for line in lines)

    def test_eof_quits_cleanly(self, fig1_files):
        game, game_path, inference_path = fig1_files
        from decreach.asw import asw
        from decreach.dasw import dasw, extract_strategy, permissive
        from decreach.hypergame import build

        mech, x0 = load_inference(inference_path, game)
        h = build(game, x0, mech)
        perm = permissive(h)
        base = asw(game)
        result = dasw(h, perm=perm, base_regions=base)
        strat = extract_strategy(h, result, perm=perm, base_regions=base)

        def read(prompt):
            raise EOFError

        episode = cli.play_session(
            h, perm, result, strat, read=read, write=lambda line: None
        )
        assert episode.outcome == "QUIT"

    def test_stubborn_adversary_hits_the_cap(self, fig1_files):
        # refusing to ever play b1 keeps the play cycling s2, s3; the deceiver
        # never reveals a1, so the session ends at the cap
        game, game_path, inference_path = fig1_files
        from decreach.asw import asw
        from decreach.dasw import dasw, extract_strategy, permissive
        from decreach.hypergame import build

        mech, x0 = load_inference(inference_path, game)
        h = build(game, x0, mech)
        perm = permissive(h)
        base = asw(game)
        result = dasw(h, perm=perm, base_regions=base)
        strat = extract_strategy(h, result, perm=perm, base_regions=base)

        lines = []
        episode = cli.play_session(
            h, perm, result, strat,
            read=lambda prompt: "b2",
            write=lines.append,
            cap=8,
        )
        assert episode.outcome == "STEP_CAP"
        assert episode.steps == 8
        states = {h.state_of(v) for v in episode.vertices}
        assert states == {2, 3}  # confined, no reveal
        assert all(h.perception(v) == frozenset({1}) for v in episode.vertices)

    def test_subprocess_session(self, fig1_files, tmp_path):
        _, game_path, inference_path = fig1_files
        proc = subprocess.run(
            [
                sys.executable, "-m", "decreach.cli", "play",
                str(game_path), str(inference_path), "--output", str(tmp_path),
            ],
            input="b1\n",
            capture_output=True,
            text=True,
            timeout=60,
        )
        assert proc.returncode == 0
        transcript = read_json(tmp_path / "fig1.play.json")
        assert transcript["outcome"] == "REACHED_F"
        assert transcript["vertices"][-1]["state_label"] == "s0"
