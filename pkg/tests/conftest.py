from __future__ import annotations

import pytest

from memfabric import RunResult, parse_scenario, run_scenario


def run_text(text: str, **kwargs) -> RunResult:
    return run_scenario(parse_scenario(text), **kwargs)


def records_of(result: RunResult, ev: str):
    return [rec for rec in result.records if rec.ev == ev]


@pytest.fixture
def worked_example_text() -> str:
    return (
        "fabric words=3 delay1=5 delay2=1 threshold=10\n"
        "dur * 4\n"
        "rehearse 1 3 2 reps=10 gap=2 rest=20 start=0\n"
        "at 500 probe 1\n"
        "maxticks 2000\n"
    )
