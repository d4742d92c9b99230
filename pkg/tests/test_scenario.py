"""Scenario DSL parsing, canonical printing, trace and report output."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from memfabric import (
    OverrideDirective,
    ParseError,
    Probe,
    RehearsalPlan,
    Scenario,
    ValidationError,
    canonical_scenario,
    format_report,
    format_trace,
    parse_scenario,
    parse_trace,
)
from memfabric.fabric import FabricConfig
from conftest import run_text


def test_worked_example_parses(worked_example_text):
    scenario = parse_scenario(worked_example_text)
    cfg = scenario.config
    assert (cfg.word_count, cfg.delay1, cfg.delay2, cfg.threshold) == (3, 5, 1, 10)
    assert cfg.filter_mode == "done_enable"
    assert cfg.durations == {1: 4, 2: 4, 3: 4}
    assert scenario.plans == (
        RehearsalPlan(sequence=(1, 3, 2), reps=10, gap=2, rest=20, start=0),
    )
    assert scenario.probes == (Probe(tick=500, word=1),)
    assert scenario.max_tick == 2000
    assert scenario.warnings == ()


def test_comments_and_blank_lines_are_skipped():
    text = (
        "# a fabric\n"
        "fabric words=2 delay1=5 delay2=1 threshold=1\n"
        "\n"
        "dur * 4  # all words\n"
        "maxticks 100\n"
    )
    scenario = parse_scenario(text)
    assert scenario.config.word_count == 2


@pytest.mark.parametrize(
    "line,error,fragment",
    [
        ("frobnicate 1 2", ParseError, "unknown directive"),
        ("fabric words=2 delay1=5 delay2=1 threshold=1 bogus=7", ParseError, "unknown argument"),
        ("fabric words=2 delay1=5 delay2=1", ParseError, "missing argument"),
        ("at 5 poke 1", ParseError, "unknown action"),
        ("dur two 4", ParseError, "not an integer"),
        ("at 5 override 1 2 ajar", ParseError, "open or closed"),
    ],
)
def test_syntax_errors_name_the_line(line, error, fragment):
    text = f"fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n{line}\nmaxticks 100\n"
    if line.startswith("fabric"):
        text = f"{line}\ndur * 4\nmaxticks 100\n"
    with pytest.raises(error) as info:
        parse_scenario(text)
    assert fragment in str(info.value)
    assert "line" in str(info.value)


def test_duplicate_fabric_directive_is_an_error():
    text = (
        "fabric words=2 delay1=5 delay2=1 threshold=1\n"
        "fabric words=3 delay1=5 delay2=1 threshold=1\n"
        "dur * 4\nmaxticks 100\n"
    )
    with pytest.raises(ParseError, match="line 2"):
        parse_scenario(text)


@pytest.mark.parametrize(
    "text,fragment",
    [
        ("dur * 4\nmaxticks 10\n", "missing fabric"),
        ("fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n", "missing maxticks"),
        (
            "fabric words=1 delay1=5 delay2=1 threshold=1\ndur * 4\nmaxticks 10\n",
            "at least 2 words",
        ),
        (
            "fabric words=2 delay1=5 delay2=6 threshold=1\ndur * 4\nmaxticks 10\n",
            "must not exceed delay1",
        ),
        ("fabric words=2 delay1=5 delay2=1 threshold=1\nmaxticks 10\n", "no duration"),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur 1 4\nmaxticks 10\n",
            "no duration for word 2",
        ),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n"
            "rehearse 1 3 1 2 reps=1 gap=0 rest=0 start=0\nmaxticks 10\n",
            "word 1 repeats",
        ),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n"
            "rehearse 1 5 reps=1 gap=0 rest=0 start=0\nmaxticks 10\n",
            "outside 1..2",
        ),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n"
            "at 5 probe 9\nmaxticks 10\n",
            "outside 1..2",
        ),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\n"
            "at 5 override 1 1 open\nmaxticks 10\n",
            "self pair",
        ),
        (
            "fabric words=2 delay1=5 delay2=1 threshold=1\ndur * 4\nmaxticks 0\n",
            "maxticks must be >= 1",
        ),
    ],
)
def test_semantic_errors_are_rejected(text, fragment):
    with pytest.raises(ValidationError) as info:
        parse_scenario(text)
    assert fragment in str(info.value)


def test_gap_beyond_delay1_warns_but_parses():
    text = (
        "fabric words=2 delay1=5 delay2=1 threshold=3\n"
        "dur * 4\n"
        "rehearse 1 2 reps=5 gap=6 rest=6 start=0\n"
        "maxticks 1000\n"
    )
    scenario = parse_scenario(text)
    assert len(scenario.warnings) == 1
    assert "gap=6 exceeds delay1=5" in scenario.warnings[0]


def test_per_word_duration_overrides_the_default():
    text = (
        "fabric words=3 delay1=5 delay2=1 threshold=1\n"
        "dur * 4\n"
        "dur 2 9\n"
        "maxticks 10\n"
    )
    scenario = parse_scenario(text)
    assert scenario.config.durations == {1: 4, 2: 9, 3: 4}


def test_canonical_round_trip_on_worked_example(worked_example_text):
    first = parse_scenario(worked_example_text)
    echoed = canonical_scenario(first)
    second = parse_scenario(echoed)
    assert first == second
    assert canonical_scenario(second) == echoed


@st.composite
def scenarios(draw):
    word_count = draw(st.integers(min_value=2, max_value=6))
    delay1 = draw(st.integers(min_value=1, max_value=9))
    config = FabricConfig(
        word_count=word_count,
        delay1=delay1,
        delay2=draw(st.integers(min_value=1, max_value=delay1)),
        threshold=draw(st.integers(min_value=1, max_value=6)),
        durations={
            w: draw(st.integers(min_value=1, max_value=7)) for w in range(1, word_count + 1)
        },
        filter_mode=draw(st.sampled_from(["done_enable", "done_done"])),
    )
    words = list(range(1, word_count + 1))
    plans = []
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        length = draw(st.integers(min_value=2, max_value=word_count))
        sequence = tuple(draw(st.permutations(words))[:length])
        plans.append(
            RehearsalPlan(
                sequence=sequence,
                reps=draw(st.integers(min_value=1, max_value=8)),
                gap=draw(st.integers(min_value=0, max_value=12)),
                rest=draw(st.integers(min_value=0, max_value=12)),
                start=draw(st.integers(min_value=0, max_value=50)),
            )
        )
    probes = tuple(
        Probe(tick=draw(st.integers(min_value=0, max_value=400)), word=draw(st.sampled_from(words)))
        for _ in range(draw(st.integers(min_value=0, max_value=3)))
    )
    overrides = []
    for _ in range(draw(st.integers(min_value=0, max_value=3))):
        i = draw(st.sampled_from(words))
        j = draw(st.sampled_from([w for w in words if w != i]))
        overrides.append(
            OverrideDirective(
                tick=draw(st.integers(min_value=0, max_value=400)),
                i=i,
                j=j,
                is_open=draw(st.booleans()),
            )
        )
    return Scenario(
        config=config,
        plans=tuple(plans),
        probes=probes,
        overrides=tuple(overrides),
        max_tick=draw(st.integers(min_value=1, max_value=5000)),
    )


@given(scenarios())
def test_canonical_round_trip_for_generated_scenarios(scenario):
    echoed = canonical_scenario(scenario)
    reparsed = parse_scenario(echoed)
    assert reparsed == scenario
    assert canonical_scenario(reparsed) == echoed


def test_trace_lines_use_the_fixed_key_order(worked_example_text):
    result = run_text(worked_example_text)
    text = format_trace(result.records)
    first = text.splitlines()[0]
    assert first == '{"t":0,"ev":"enable","word":1,"src":"cpu","episode":1}'
    for line in text.splitlines():
        keys = list(json.loads(line).keys())
        order = [k for k in ("t", "ev", "word", "pair", "src", "episode", "stage") if k in keys]
        assert keys == order


def test_trace_round_trips_through_the_parser(worked_example_text):
    result = run_text(worked_example_text)
    text = format_trace(result.records)
    assert parse_trace(text) == result.records


def test_empty_run_has_an_empty_trace_body():
    assert format_trace([]) == ""
    assert parse_trace("") == []


def test_probe_on_empty_fabric_traces_exactly_two_records():
    text = (
        "fabric words=2 delay1=5 delay2=1 threshold=5\n"
        "dur * 3\n"
        "at 7 probe 1\n"
        "maxticks 100\n"
    )
    result = run_text(text)
    assert [r.ev for r in result.records] == ["enable", "done"]


def test_report_lists_learned_pairs_sorted_with_ticks(worked_example_text):
    result = run_text(worked_example_text)
    report = result.report
    assert [pair for pair, _ in report.learned] == [(1, 3), (3, 2)]
    learned_ticks = result.simulation.fabric.learned_ticks()
    assert dict(report.learned) == learned_ticks
    assert dict(report.detections) == {(1, 3): 11, (3, 2): 11}
    assert report.outcome == "quiescent"


def test_report_for_unlearned_run_still_counts(worked_example_text):
    result = run_text(worked_example_text.replace("reps=10", "reps=9"))
    assert result.report.learned == ()
    assert dict(result.report.detections) == {(1, 3): 9, (3, 2): 9}


def test_probe_episode_reports_zero_cpu_enables_after_trigger(worked_example_text):
    result = run_text(worked_example_text)
    probe_episode = next(e for e in result.report.episodes if e.start == 500)
    assert probe_episode.trigger_word == 1
    assert probe_episode.cpu_enables_after_trigger == 0
    assert probe_episode.fired_words == (1, 2, 3)
    rehearsal = result.report.episodes[0]
    assert rehearsal.cpu_enables_after_trigger == 2


def test_report_episodes_sorted_by_start_tick(worked_example_text):
    # the probe is scheduled first (episode 0) but starts last
    result = run_text(worked_example_text)
    starts = [e.start for e in result.report.episodes]
    assert starts == sorted(starts)
    assert result.report.episodes[-1].episode == 0


def test_report_json_shape(worked_example_text):
    result = run_text(worked_example_text)
    obj = json.loads(format_report(result.report))
    assert list(obj.keys()) == ["outcome", "final_tick", "learned", "detections", "episodes"]
    assert obj["learned"][0] == {"pair": [1, 3], "tick": result.report.learned[0][1]}
    assert obj["episodes"][-1]["cpu_enables_after_trigger"] == 0


def test_identical_runs_yield_identical_report_bytes(worked_example_text):
    a = run_text(worked_example_text)
    b = run_text(worked_example_text)
    assert format_report(a.report) == format_report(b.report)
