import csv
import json
import time

import pytest

from powerforge import (
    DependentVariableMeta,
    Direction,
    IndependentVariable,
    apply_update,
    create_session,
    save_session,
)
from powerforge.cli import main


@pytest.fixture
def session_file(tmp_path):
    dv = DependentVariableMeta("READINGTIME", "min", 0.0, 60.0, Direction.LOWER_IS_BETTER, 5.0)
    ivs = (
        IndependentVariable("MEDIUM", ("P", "S")),
        IndependentVariable("LAYOUT", ("1", "2")),
    )
    session = create_session(dv, ivs)
    apply_update(
        session,
        {"op": "set_mean", "node": {"kind": "condition", "levels": ["S", "1"]}, "value": 33.0},
    )
    apply_update(session, {"op": "set_settings", "seed": 11})
    path = tmp_path / "session.json"
    save_session(session, str(path))
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestPowerCurveCommand:
    def test_full_range_emits_45_rows(self, session_file, tmp_path):
        out = tmp_path / "curve.csv"
        code = main(
            ["power-curve", "--session", session_file, "--n", "6..50",
             "--tier", "analytic", "--pair", "MEDIUM:S-P", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["x", "power", "mc_stderr", "tier"]
        assert len(rows) - 1 == 45

    def test_analytic_tier_is_fast(self, session_file, tmp_path):
        out = tmp_path / "curve.csv"
        main(["power-curve", "--session", session_file, "--tier", "analytic",
              "--out", str(out)])  # warm imports and caches
        start = time.perf_counter()
        code = main(
            ["power-curve", "--session", session_file, "--tier", "analytic", "--out", str(out)]
        )
        elapsed = time.perf_counter() - start
        assert code == 0
        assert elapsed < 0.2

    def test_simulated_curve_deterministic_bytes(self, session_file, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["power-curve", "--session", session_file, "--n", "6..9", "--k", "200",
                "--pair", "MEDIUM:S-P", "--seed", "7"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_min_power_flag(self, tmp_path):
        # MEDIUM carries a main effect, LAYOUT none: LAYOUT is the minimum
        dv = DependentVariableMeta("DV", "min", 0.0, 60.0, Direction.LOWER_IS_BETTER, 5.0)
        ivs = (
            IndependentVariable("MEDIUM", ("P", "S")),
            IndependentVariable("LAYOUT", ("1", "2")),
        )
        session = create_session(dv, ivs)
        apply_update(
            session,
            {"op": "toggle_lock", "node": {"kind": "group", "level": "P"}},
        )
        apply_update(
            session,
            {"op": "set_mean", "node": {"kind": "group", "level": "S"}, "value": 34.0},
        )
        path = tmp_path / "main_effect.json"
        save_session(session, str(path))
        out = tmp_path / "curve.json"
        code = main(
            ["power-curve", "--session", str(path), "--tier", "analytic",
             "--min-power", "--format", "json", "--out", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["pair"] == "LAYOUT:1-2"

    def test_replications_axis(self, session_file, tmp_path):
        out = tmp_path / "curve.csv"
        code = main(
            ["power-curve", "--session", session_file, "--tier", "analytic",
             "--axis", "replications", "--n", "2..4", "--pair", "MEDIUM:S-P",
             "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert [r[0] for r in rows[1:]] == ["2", "3", "4"]
        powers = [float(r[1]) for r in rows[1:]]
        assert powers[0] < powers[1] < powers[2]


class TestPairwiseCommand:
    def test_frames_csv(self, session_file, tmp_path):
        out = tmp_path / "frames.csv"
        code = main(
            ["pairwise", "--session", session_file, "--frames", "4", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["frame", "pair", "mean_diff", "ci_lo", "ci_hi", "cohens_d"]
        assert len(rows) - 1 == 4 * 2  # four frames, two selected pairs

    def test_explicit_pair_selection(self, session_file, tmp_path):
        out = tmp_path / "frames.csv"
        code = main(
            ["pairwise", "--session", session_file, "--frames", "3",
             "--pair", "MEDIUM:S-P", "--out", str(out)]
        )
        assert code == 0
        rows = read_csv(out)
        assert len(rows) - 1 == 3
        assert {r[1] for r in rows[1:]} == {"MEDIUM:S-P"}

    def test_deterministic_bytes(self, session_file, tmp_path):
        out1, out2 = tmp_path / "f1.csv", tmp_path / "f2.csv"
        args = ["pairwise", "--session", session_file, "--frames", "5", "--seed", "3"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestTrialTableCommand:
    def test_columns_and_rows(self, session_file, tmp_path):
        out = tmp_path / "table.csv"
        code = main(["trial-table", "--session", session_file, "--out", str(out)])
        assert code == 0
        rows = read_csv(out)
        assert rows[0] == ["participant", "trial_index", "MEDIUM", "LAYOUT"]
        assert len(rows) - 1 == 12 * 4  # n=12 participants, k=4, r=1

    def test_deterministic(self, session_file, tmp_path):
        out1, out2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        assert main(["trial-table", "--session", session_file, "--out", str(out1)]) == 0
        assert main(["trial-table", "--session", session_file, "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestErrorHandling:
    def test_malformed_session_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code = main(["power-curve", "--session", str(bad)])
        assert code == 2
        err = capsys.readouterr().err.strip()
        payload = json.loads(err)  # single machine-parsable line
        assert payload["error"] == "INVALID_METADATA"

    def test_missing_file_exits_2(self, tmp_path):
        assert main(["trial-table", "--session", str(tmp_path / "none.json")]) == 2

    def test_bad_pair_exits_2(self, session_file, capsys):
        code = main(
            ["power-curve", "--session", session_file, "--tier", "analytic",
             "--pair", "MEDIUM:S-X"]
        )
        assert code == 2
        assert json.loads(capsys.readouterr().err.strip())["error"] == "INVALID_UPDATE"

    def test_bad_range_exits_2(self, session_file):
        assert main(["power-curve", "--session", session_file, "--n", "50..6"]) == 2
