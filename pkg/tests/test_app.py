import json

import pytest

from app import EXIT_INPUT, EXIT_OK, run


@pytest.fixture
def game_file(tmp_path):
    def write(spec, name="game.json"):
        path = tmp_path / name
        path.write_text(json.dumps(spec))
        return str(path)

    return write


def run_json(capsys, argv):
    code = run(argv)
    out = capsys.readouterr().out
    assert code == EXIT_OK
    return json.loads(out)


class TestPriceCommand:
    def test_two_point(self, capsys, game_file):
        doc = run_json(capsys, ["price", "--game", game_file({"type": "two_point", "a": 19, "b": 1}), "--r", "0.05"])
        assert doc["u"] == pytest.approx(7.22364, abs=1e-5)
        assert doc["t"] == pytest.approx(0.27364, abs=1e-5)
        assert doc["regime"] == "Interior"
        assert set(doc["residuals"]) == {"growth", "marginal"}

    def test_output_is_deterministic(self, capsys, game_file):
        argv = ["price", "--game", game_file({"type": "two_point", "a": 10, "b": 4}), "--r", "0.05"]
        run(argv)
        first = capsys.readouterr().out
        run(argv)
        assert capsys.readouterr().out == first

    def test_empty_spec_names_missing_field(self, capsys, game_file):
        code = run(["price", "--game", game_file({}), "--r", "0.05"])
        assert code == EXIT_INPUT
        assert "'type'" in capsys.readouterr().err

    def test_missing_file(self, capsys, tmp_path):
        code = run(["price", "--game", str(tmp_path / "absent.json"), "--r", "0.05"])
        assert code == EXIT_INPUT
        assert "absent.json" in capsys.readouterr().err

    def test_nonpositive_rate(self, capsys, game_file):
        code = run(["price", "--game", game_file({"type": "two_point", "a": 2, "b": 1}), "--r", "0"])
        assert code == EXIT_INPUT

    def test_csv_only_for_mixture(self, capsys, game_file):
        spec = game_file({"type": "two_point", "a": 2, "b": 1})
        assert run(["price", "--game", spec, "--r", "0.05", "--format", "csv"]) == EXIT_INPUT
        assert "mixture" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        assert run(["appraise"]) == EXIT_INPUT

    def test_writes_out_file(self, capsys, game_file, tmp_path):
        target = tmp_path / "price.json"
        spec = game_file({"type": "two_point", "a": 19, "b": 1})
        assert run(["price", "--game", spec, "--r", "0.05", "--out", str(target)]) == EXIT_OK
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())["regime"] == "Interior"


# ============================================================
# Other subcommands
# ============================================================

class TestOtherCommands:
    def test_option_demo(self, capsys):
        doc = run_json(
            capsys, ["option-demo", "--S", "90", "--K", "120", "--T", "2", "--sigma", "0.1", "--r", "0.04"]
        )
        assert doc["E"] == pytest.approx(22.9848, abs=2e-3)
        assert doc["growth_optimal"]["u"] == pytest.approx(17.8157, abs=2e-3)
        assert doc["black_scholes"]["u"] == pytest.approx(21.2176, abs=1e-3)
        assert doc["black_scholes"]["growth"] == pytest.approx(1.0096, abs=1e-3)
        assert doc["ordering"] == {"growth_optimal_cheaper": True, "growth_optimal_faster": True}

    def test_mixture_csv(self, capsys, game_file):
        a = game_file({"type": "two_point", "a": 19, "b": 1}, "a.json")
        b = game_file({"type": "two_point", "a": 4, "b": 3}, "b.json")
        assert run(["mixture", "--game-a", a, "--game-b", b, "--r", "0.05", "--grid", "11"]) == EXIT_OK
        captured = capsys.readouterr()
        lines = captured.out.splitlines()
        assert lines[0] == "p,f,g,h,u,regime"
        assert len(lines) >= 12
        assert "concavity u" in captured.err

    def test_mixture_json(self, capsys, game_file):
        a = game_file({"type": "two_point", "a": 19, "b": 1}, "a.json")
        b = game_file({"type": "two_point", "a": 4, "b": 3}, "b.json")
        doc = run_json(
            capsys, ["mixture", "--game-a", a, "--game-b", b, "--r", "0.05", "--grid", "11", "--format", "json"]
        )
        assert set(doc) == {"curves", "concavity", "equivalence_points"}
        assert len(doc["equivalence_points"]) >= 1

    def test_simulate(self, capsys, game_file):
        spec = game_file({"type": "two_point", "a": 19, "b": 1})
        doc = run_json(
            capsys,
            ["simulate", "--game", spec, "--u", "7.22364", "--t", "0.27364", "--steps", "50000", "--r", "0.05"],
        )
        assert doc["steps"] == 50_000
        assert abs(doc["z_vs"]) <= 4

    def test_verify(self, capsys, game_file):
        spec = game_file({"type": "two_point", "a": 19, "b": 1})
        doc = run_json(capsys, ["verify", "--game", spec, "--r", "0.05", "--steps", "50000", "--streams", "2"])
        assert doc["regime"] == "Interior"
        assert abs(doc["z"]) <= 4

    def test_least_squares(self, capsys, game_file):
        portfolio = game_file(
            {
                "rate": 0.05,
                "games": [{"type": "two_point", "a": 19, "b": 1}, {"type": "two_point", "a": 10, "b": 4}],
            },
            "portfolio.json",
        )
        doc = run_json(capsys, ["least-squares", "--portfolio", portfolio])
        assert len(doc["x"]) == 2
        assert doc["L"] == pytest.approx(1.0, abs=1e-4)
        assert len(doc["per_game"]) == 2
