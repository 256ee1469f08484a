"""Generic controller wiring branch -> parallel solve -> merge, with a full trace."""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

from bsm.backends.base import Backend, CompletionRequest, CompletionResult
from bsm.errors import BranchEmpty, BsmError, SolveFailure


@dataclass
class CallRecord:
    """One backend exchange observed during a program run."""

    request: CompletionRequest
    result: CompletionResult
    label: Optional[str] = None


class CallLog:
    """Thread-safe accumulator of backend call records."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: list[CallRecord] = []

    def record(self, request: CompletionRequest, result: CompletionResult, label=None) -> None:
        with self._lock:
            self._entries.append(CallRecord(request, result, label))

    def entries(self) -> list[CallRecord]:
        with self._lock:
            return list(self._entries)

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)


class RecordingBackend:
    """Backend wrapper that records every exchange into a CallLog."""

    def __init__(self, inner: Backend, log: CallLog, label: Optional[str] = None):
        self._inner = inner
        self._log = log
        self._label = label
        self.backend_id = inner.backend_id

    def complete(self, request: CompletionRequest) -> CompletionResult:
        result = self._inner.complete(request)
        self._log.record(request, result, self._label)
        return result


@dataclass
class SolveRecord:
    branch_index: int
    subproblem: Any
    solution: Any = None
    error: Optional[str] = None
    started: float = 0.0
    finished: float = 0.0


@dataclass
class ProgramTrace:
    """Complete record of one branch/solve/merge execution."""

    program_input: Any
    subproblems: list = field(default_factory=list)
    solve_records: list[SolveRecord] = field(default_factory=list)
    merge_output: Any = None
    calls: list[CallRecord] = field(default_factory=list)
    started: float = 0.0
    finished: float = 0.0


def run_program(
    program_input: Any,
    branch_fn: Callable[[Any], Sequence[Any]],
    solve_fn: Callable[[Any], Any],
    merge_fn: Callable[[list], Any],
    *,
    max_branches: Optional[int] = None,
    parallelism: int = 1,
    call_log: Optional[CallLog] = None,
) -> tuple[Any, ProgramTrace]:
    """Run one branch -> solve -> merge pass.

    Sub-problems are solved independently (fanned out across threads when
    parallelism > 1) and merged strictly in branch-index order, so the
    output never depends on completion order. Module errors propagate
    annotated with the branch index; results of the other branches are
    preserved in the trace, which rides along on the raised error.
    """
    trace = ProgramTrace(program_input=program_input, started=time.time())
    try:
        subproblems = list(branch_fn(program_input))
        if max_branches is not None:
            subproblems = subproblems[:max_branches]
        trace.subproblems = subproblems
        if not subproblems:
            raise BranchEmpty("branch produced zero sub-problems")

        records = [
            SolveRecord(branch_index=i, subproblem=sub) for i, sub in enumerate(subproblems)
        ]
        trace.solve_records = records

        def solve_one(index: int) -> Any:
            record = records[index]
            record.started = time.time()
            try:
                record.solution = solve_fn(subproblems[index])
                return record.solution
            except BaseException as exc:
                record.error = f"{type(exc).__name__}: {exc}"
                raise
            finally:
                record.finished = time.time()

        failures: list[tuple[int, BaseException]] = []
        solutions: list[Any] = [None] * len(subproblems)
        if parallelism > 1 and len(subproblems) > 1:
            with ThreadPoolExecutor(max_workers=min(parallelism, len(subproblems))) as pool:
                futures = {i: pool.submit(solve_one, i) for i in range(len(subproblems))}
                for i, future in futures.items():
                    try:
                        solutions[i] = future.result()
                    except BaseException as exc:
                        failures.append((i, exc))
        else:
            for i in range(len(subproblems)):
                try:
                    solutions[i] = solve_one(i)
                except BaseException as exc:
                    failures.append((i, exc))

        if failures:
            index, cause = min(failures, key=lambda pair: pair[0])
            raise SolveFailure(index, cause) from cause

        merged = merge_fn(solutions)
        trace.merge_output = merged
        return merged, trace
    except BsmError as exc:
        if getattr(exc, "trace", None) is None:
            exc.trace = trace  # type: ignore[attr-defined]
        raise
    finally:
        trace.finished = time.time()
        if call_log is not None:
            trace.calls = call_log.entries()
