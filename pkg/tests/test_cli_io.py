import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planpred import taskio
from planpred.analysis import ParticipantRecord
from planpred.cli import main
from planpred.errors import TaskFormatError
from planpred.inference import ModelConfig, infer
from planpred.simulate import complexity_signature, random_task

from conftest import SQ, TR, make_task, part


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def usage_code(*argv):
    with pytest.raises(SystemExit) as e:
        main([str(a) for a in argv])
    return e.value.code


@pytest.fixture
def task_file(tmp_path, two_goal_task):
    path = tmp_path / "task.json"
    taskio.write_task(path, two_goal_task)
    return path


# -- task file format -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_task_round_trip(seed):
    task = random_task(np.random.default_rng(seed))
    text = taskio.dumps_task(task)
    back = taskio.loads_task(text)
    assert back == task
    assert taskio.dumps_task(back) == text


def test_task_parse_errors(two_goal_task):
    d = taskio.task_to_dict(two_goal_task)
    d["candidates"][0]["required"][1]["type"] = "hexagon"
    with pytest.raises(TaskFormatError, match=r"candidates\[0\]\.required\[1\]\.type"):
        taskio.task_from_dict(d)
    with pytest.raises(TaskFormatError, match="line"):
        taskio.loads_task('{"schema_version": 1,\n "grid": }')
    d = taskio.task_to_dict(two_goal_task)
    del d["grid"]["width"]
    with pytest.raises(TaskFormatError, match="width"):
        taskio.task_from_dict(d)


def test_participant_csv_round_trip_and_errors():
    recs = [ParticipantRecord("s01", "t1", {"A": 7, "B": 2, "C": 1, "D": 3}, "A"),
            ParticipantRecord("s02", "t1", {"A": 5, "B": 5, "C": 1, "D": 1}, "B")]
    text = taskio.dumps_participants(recs)
    assert text.splitlines()[0] == "participant_id,task_id,candidate_id,score,selected"
    assert taskio.loads_participants(text) == recs
    two_selected = text.replace("s01,t1,B,2,0", "s01,t1,B,2,1")
    with pytest.raises(TaskFormatError, match="exactly one selected"):
        taskio.loads_participants(two_selected)
    with pytest.raises(TaskFormatError, match="outside 1-7"):
        taskio.loads_participants(text.replace("s01,t1,A,7,1", "s01,t1,A,9,1"))
    with pytest.raises(TaskFormatError, match="header"):
        taskio.loads_participants("a,b\n1,2\n")


# -- validate -------------------------------------------------------------------


def test_validate_ok(capsys, task_file):
    code, out, _ = run(capsys, "validate", task_file)
    assert code == 0 and out.strip().endswith("ok")


def test_validate_duplicate_cell(capsys, tmp_path):
    t = make_task(5, 5, (0, 0), [part("a", SQ, "red", 1, 1), part("b", TR, "red", 1, 1)],
                  [("A", [(SQ, "red"), (TR, "red")])])
    path = tmp_path / "dup.json"
    taskio.write_task(path, t)
    code, out, _ = run(capsys, "validate", path)
    assert code == 1 and "(1,1)" in out


def test_validate_unknown_type(capsys, tmp_path, two_goal_task):
    d = taskio.task_to_dict(two_goal_task)
    d["grid"]["parts"][0]["type"] = "hexagon"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(d))
    code, _, err = run(capsys, "validate", path)
    assert code == 2 and "parse error" in err and "unknown part type" in err


# -- infer ------------------------------------------------------------------------


def test_infer_defaults_echoed(capsys, task_file):
    code, out, _ = run(capsys, "infer", task_file)
    assert code == 0
    assert "beta1=0.3 beta2=0.3 beta3=0.5" in out and "model=full" in out
    assert "0.255498" in out


def test_infer_csv_is_lossless(capsys, task_file, two_goal_task):
    code, out, _ = run(capsys, "infer", task_file, "--model", "ppo", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(out.splitlines()))
    got = {r["candidate_id"]: float(r["probability"]) for r in rows}
    assert got == infer(two_goal_task, ModelConfig(model="ppo")).probs
    assert rows[0]["beta3"] == "0.5" and rows[0]["model"] == "ppo"


def test_infer_single_candidate(capsys, tmp_path):
    t = make_task(5, 5, (0, 0), [part("a", SQ, "red", 1, 1), part("b", TR, "red", 2, 2)],
                  [("A", [(SQ, "red"), (TR, "red")])])
    path = tmp_path / "one.json"
    taskio.write_task(path, t)
    code, out, _ = run(capsys, "infer", path, "--format", "csv")
    assert code == 0 and out.splitlines()[1].split(",")[2] == "1.0"


def test_infer_infeasible_names_goals(capsys, tmp_path):
    t = make_task(5, 5, (0, 0), [part("s", SQ, "red", 1, 0), part("t", TR, "red", 2, 0),
                                  part("u", SQ, "blue", 3, 3)],
                  [("Q", [(SQ, "blue"), (TR, "red")])], [(0, 0), (1, 0)])
    path = tmp_path / "inf.json"
    taskio.write_task(path, t)
    code, _, err = run(capsys, "infer", path)
    assert code == 1 and "Q" in err


def test_infer_bad_beta(capsys, task_file):
    code, _, _ = run(capsys, "infer", task_file, "--beta1", "-1")
    assert code == 2


# -- gen / simulate / analyze -------------------------------------------------------


def test_gen_signature_and_determinism(capsys, tmp_path):
    for d in ("a", "b"):
        code, out, _ = run(capsys, "gen", "--k", 4, "--n", 2, "--c", 2, "--seed", 5,
                           "--require-disagreement", "--out", tmp_path / d)
        assert code == 0 and "attempts" in out
    files = sorted((tmp_path / "a").glob("*.json"))
    assert len(files) == 1
    assert complexity_signature(taskio.load_task(files[0])) == (4, 2, 2)
    assert files[0].read_bytes() == (tmp_path / "b" / files[0].name).read_bytes()


def test_gen_usage_errors(tmp_path):
    assert usage_code("gen", "--k", 1, "--n", 0, "--c", 2, "--out", tmp_path) == 2
    assert usage_code("gen", "--k", 3, "--n", 3, "--c", 2, "--out", tmp_path) == 2
    assert usage_code("gen", "--out", tmp_path) == 2


def test_gen_exhausted_is_domain_error(capsys, tmp_path):
    code, _, err = run(capsys, "gen", "--k", 4, "--n", 3, "--c", 3, "--width", 2, "--height", 2,
                       "--max-attempts", 3, "--out", tmp_path)
    assert code == 1 and "no task found" in err


def test_simulate_usage_and_seed(capsys, tmp_path, monkeypatch):
    assert usage_code("simulate", "--gen", "standard", "--participants", 0, "--out", tmp_path / "x.csv") == 2
    monkeypatch.setenv("PLANPRED_SEED", "4")
    run(capsys, "simulate", "--gen", "standard", "--participants", 3, "--out", tmp_path / "env.csv")
    run(capsys, "simulate", "--gen", "standard", "--participants", 3, "--seed", 4, "--out", tmp_path / "flag.csv")
    assert (tmp_path / "env.csv").read_bytes() == (tmp_path / "flag.csv").read_bytes()
    recs = taskio.load_participants(tmp_path / "env.csv")
    assert len({r.participant_id for r in recs}) == 3


def test_simulate_noise_free_keeps_everyone(capsys, tmp_path):
    run(capsys, "simulate", "--gen", "standard", "--save-tasks", tmp_path / "tasks",
        "--participants", 5, "--noise", 0, "--out", tmp_path / "p.csv")
    code, out, _ = run(capsys, "analyze", "--tasks", tmp_path / "tasks",
                       "--participants", tmp_path / "p.csv", "--out", tmp_path / "rep")
    assert code == 0 and "excluded: 0" in out


def test_analyze_all_excluded(capsys, tmp_path):
    run(capsys, "simulate", "--gen", "standard", "--save-tasks", tmp_path / "tasks",
        "--participants", 2, "--out", tmp_path / "p.csv")
    recs = taskio.load_participants(tmp_path / "p.csv")
    flat = [ParticipantRecord(r.participant_id, r.task_id, {c: 4 for c in r.scores}, r.selected)
            for r in recs]
    taskio.write_participants(tmp_path / "flat.csv", flat)
    code, _, err = run(capsys, "analyze", "--tasks", tmp_path / "tasks",
                       "--participants", tmp_path / "flat.csv", "--out", tmp_path / "rep")
    assert code == 1 and "no valid participants" in err and "same score" in err


def test_analyze_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, "analyze", "--tasks", tmp_path, "--participants", tmp_path / "none.csv",
                     "--out", tmp_path / "rep")
    assert code == 2
