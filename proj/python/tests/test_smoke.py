import json
import os
from fractions import Fraction

import pytest

import ergkit


def test_measure_counts():
    m = ergkit.measure("**Hi**, you!\n\n- one\n- two", ["you"])
    assert m["bold_spans"] == ["Hi"]
    assert m["unordered_list_items"] == ["one", "two"]
    assert m["paragraph_count"] == 2
    assert m["keyword_counts"] == {"you": 1}


def test_rewards_are_exact():
    assert ergkit.constraint_reward([True, True, True, False]) == Fraction(3, 4)
    assert ergkit.task_reward({"constraints": [True, False], "rubrics": [True, True]}) == Fraction(3, 4)
    assert ergkit.thinking_reward(1, 1) == Fraction(1, 5)
    assert ergkit.partial_reward(Fraction(4, 5), Fraction(1, 2)) == Fraction(3, 10)
    total = ergkit.total_reward(Fraction(3, 4), Fraction(9, 20), Fraction(1, 5))
    assert total["r_total"] == Fraction(5, 4)
    assert ergkit.csr_isr([[True] * 4, [True, True, True, False]]) == (Fraction(7, 8), Fraction(1, 2))


def test_errors_map_to_exceptions():
    with pytest.raises(ergkit.UndefinedInputError):
        ergkit.constraint_reward([])
    with pytest.raises(ergkit.ProtocolError):
        ergkit.parse_judge_checklist("not json")
    assert issubclass(ergkit.ConfigError, ergkit.Error)


def test_grpo():
    adv = ergkit.group_advantages([0.2, 0.4, 0.6, 0.8])
    assert abs(sum(adv)) < 1e-9
    assert adv[0] == pytest.approx(-1.342, abs=1e-3)
    assert ergkit.grpo_surrogate([[1.5]], [1.0], [0.0], beta=0.0) == pytest.approx(1.2, abs=1e-12)


def test_synthesis_and_verification_offline():
    lines = ergkit.synthesize(levels=[2], count=2, seed=3, workers=1)
    assert lines == ergkit.synthesize(levels=[2], count=2, seed=3, workers=2)
    for line in lines:
        record = json.loads(line)
        assert all(ergkit.verify_record(line, record["canonical_response"]))
        verdicts = ergkit.verify_record(line, record["mutated_response"]["text"])
        assert verdicts.count(False) == 1
    assert ergkit.network_connection_count() == 0


def test_cli_in_process():
    code, out, _ = ergkit.run_cli(["report", "--help"])
    assert code == 0
    assert "--reports" in out
    code, _, err = ergkit.run_cli(["synth", "--levels"])
    assert code == 2
    assert "usage" in err


def test_module_location():
    build = os.environ.get("ERGKIT_MODULE_DIR")
    if build:
        assert ergkit._ergkit.__file__.startswith(build)
