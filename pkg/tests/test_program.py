"""Generic branch/solve/merge controller."""

import pytest

from bsm.errors import BranchEmpty, SolveFailure
from bsm.program import CallLog, ProgramTrace, RecordingBackend, run_program
from helpers import make_sample, mock_backend, branch_rule, pair_rule


def test_toy_composition():
    output, trace = run_program(
        "ab-cdef",
        branch_fn=lambda x: x.split("-"),
        solve_fn=len,
        merge_fn=sum,
    )
    assert output == 6
    assert len(trace.solve_records) == 2
    assert [r.solution for r in trace.solve_records] == [2, 4]
    assert trace.subproblems == ["ab", "cdef"]
    assert trace.merge_output == 6


def test_branch_empty():
    with pytest.raises(BranchEmpty):
        run_program("x", lambda x: [], len, sum)


def test_max_branches_cap():
    output, trace = run_program(
        list(range(10)), lambda x: x, lambda i: i, sum, max_branches=3
    )
    assert trace.subproblems == [0, 1, 2]
    assert output == 3


def test_solve_failure_tagged_with_branch_index():
    def solve(item):
        if item == "b":
            raise ValueError("boom")
        return item.upper()

    with pytest.raises(SolveFailure) as info:
        run_program("a-b-c", lambda x: x.split("-"), solve, "".join)
    assert info.value.branch_index == 1
    assert isinstance(info.value.__cause__, ValueError)
    trace: ProgramTrace = info.value.trace
    assert trace.solve_records[0].solution == "A"
    assert trace.solve_records[2].solution == "C"
    assert "boom" in trace.solve_records[1].error


def test_lowest_failing_branch_wins():
    def solve(item):
        raise RuntimeError(f"fail {item}")

    with pytest.raises(SolveFailure) as info:
        run_program("x-y", lambda s: s.split("-"), solve, "".join, parallelism=4)
    assert info.value.branch_index == 0


@pytest.mark.parametrize("parallelism", [1, 4])
def test_order_independence_of_commutative_merge(parallelism):
    output, trace = run_program(
        list(range(8)),
        lambda x: x,
        lambda i: i * i,
        sum,
        parallelism=parallelism,
    )
    assert output == sum(i * i for i in range(8))
    # merge consumes solutions strictly in branch-index order either way
    assert [r.solution for r in trace.solve_records] == [i * i for i in range(8)]


def test_ordered_merge_sees_branch_index_order():
    output, _ = run_program(
        "fu-si-on",
        lambda x: x.split("-"),
        lambda part: part,
        "".join,
        parallelism=3,
    )
    assert output == "fusion"


def test_trace_records_every_backend_call_once():
    from bsm.judge.pipeline import JudgeConfig, judge_pair

    backend = mock_backend(
        branch_rule(),
        pair_rule("alphatrain", "betabus", "Assistant A: 4/5. Assistant B: 3/5."),
        pair_rule("betabus", "alphatrain", "Assistant A: 2/5. Assistant B: 5/5."),
    )
    log = CallLog()
    recorder = RecordingBackend(backend, log)
    result = judge_pair(make_sample(), JudgeConfig(), recorder)
    # 2 runs x (1 branch + 2 solves) with the default 2-criterion plan
    assert len(log) == 6
    run1, run2 = result.traces
    assert len(run1.calls) == 3
    assert len(run2.calls) == 3
