"""Scenario text format, canonical printing, and the end-of-run report.

A scenario is a line-oriented directive file (``#`` starts a comment,
blank lines are skipped)::

    fabric words=K delay1=D1 delay2=D2 threshold=N [mode=done_enable|done_done]
    dur * T                 # default duration for every word
    dur <id> T              # per-word override
    rehearse <id...> reps=R gap=G rest=S start=T
    at T probe <id>
    at T override <i> <j> open|closed
    maxticks T

``fabric`` and ``maxticks`` are required and may appear once. Unknown
directives and unknown arguments are errors. A ``gap`` larger than
``delay1`` parses with a warning: it is a legitimate negative control
(the rehearsed pairs fall outside every coincidence window).

At setup, directives are scheduled in a fixed order: overrides first
(file order), then probes (file order), then plans (file order). An
override at tick T therefore always takes effect before any same-tick
activity.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from memfabric.driver import InvalidPlanError, Probe, RehearsalPlan
from memfabric.fabric import DONE_ENABLE, DONE_DONE, FabricConfig, InvalidConfigError
from memfabric.trace import (
    EV_ENABLE,
    EV_IGNORED_ENABLE,
    EV_LATCH_SHIFT,
    EV_LEARNED,
    SRC_CPU,
    TraceRecord,
)


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParseError(ScenarioError):
    """Syntax problem: unknown directive, bad token, malformed argument."""


class ValidationError(ScenarioError):
    """Semantic problem: out-of-range value, repeated word, bad config."""


@dataclass(frozen=True)
class OverrideDirective:
    tick: int
    i: int
    j: int
    is_open: bool


@dataclass(frozen=True)
class Scenario:
    config: FabricConfig
    plans: tuple[RehearsalPlan, ...]
    probes: tuple[Probe, ...]
    overrides: tuple[OverrideDirective, ...]
    max_tick: int
    warnings: tuple[str, ...] = field(default=(), compare=False)


_MODE_NAMES = {DONE_ENABLE: DONE_ENABLE, DONE_DONE: DONE_DONE}


def _parse_int(token: str, what: str, line: int) -> int:
    try:
        return int(token, 10)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {token!r}", line) from None


def _parse_kv(tokens: list[str], allowed: dict[str, bool], what: str, line: int) -> dict[str, str]:
    """Parse key=value tokens; ``allowed`` maps key -> required."""
    out: dict[str, str] = {}
    for token in tokens:
        if "=" not in token:
            raise ParseError(f"expected key=value argument in {what}, got {token!r}", line)
        key, value = token.split("=", 1)
        if key not in allowed:
            raise ParseError(f"unknown argument {key!r} in {what}", line)
        if key in out:
            raise ParseError(f"duplicate argument {key!r} in {what}", line)
        if not value:
            raise ParseError(f"empty value for {key!r} in {what}", line)
        out[key] = value
    for key, required in allowed.items():
        if required and key not in out:
            raise ParseError(f"{what} is missing argument {key!r}", line)
    return out


def parse_scenario(text: str) -> Scenario:
    fabric_args: dict[str, str] | None = None
    fabric_line = 0
    default_dur: tuple[int, int] | None = None  # (value, line)
    dur_overrides: dict[int, tuple[int, int]] = {}  # word -> (value, line)
    raw_plans: list[tuple[dict[str, str], list[int], int]] = []
    raw_probes: list[tuple[int, int, int]] = []  # (tick, word, line)
    raw_overrides: list[tuple[OverrideDirective, int]] = []
    max_tick: tuple[int, int] | None = None  # (value, line)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "fabric":
            if fabric_args is not None:
                raise ParseError("duplicate fabric directive", lineno)
            fabric_args = _parse_kv(
                tokens[1:],
                {"words": True, "delay1": True, "delay2": True, "threshold": True, "mode": False},
                "fabric",
                lineno,
            )
            fabric_line = lineno
        elif head == "dur":
            if len(tokens) != 3:
                raise ParseError("dur takes exactly two arguments: '*' or a word id, and ticks", lineno)
            value = _parse_int(tokens[2], "duration", lineno)
            if tokens[1] == "*":
                if default_dur is not None:
                    raise ParseError("duplicate default duration", lineno)
                default_dur = (value, lineno)
            else:
                word = _parse_int(tokens[1], "word id", lineno)
                if word in dur_overrides:
                    raise ParseError(f"duplicate duration for word {word}", lineno)
                dur_overrides[word] = (value, lineno)
        elif head == "rehearse":
            words: list[int] = []
            rest_tokens: list[str] = []
            for idx, token in enumerate(tokens[1:], start=1):
                if "=" in token:
                    rest_tokens = tokens[idx:]
                    break
                words.append(_parse_int(token, "word id", lineno))
            args = _parse_kv(
                rest_tokens,
                {"reps": True, "gap": True, "rest": True, "start": True},
                "rehearse",
                lineno,
            )
            raw_plans.append((args, words, lineno))
        elif head == "at":
            if len(tokens) < 3:
                raise ParseError("at directive needs a tick and an action", lineno)
            tick = _parse_int(tokens[1], "tick", lineno)
            action = tokens[2]
            if action == "probe":
                if len(tokens) != 4:
                    raise ParseError("probe takes exactly one word id", lineno)
                word = _parse_int(tokens[3], "word id", lineno)
                raw_probes.append((tick, word, lineno))
            elif action == "override":
                if len(tokens) != 6:
                    raise ParseError("override takes two word ids and open|closed", lineno)
                i = _parse_int(tokens[3], "word id", lineno)
                j = _parse_int(tokens[4], "word id", lineno)
                if tokens[5] not in ("open", "closed"):
                    raise ParseError(f"override state must be open or closed, got {tokens[5]!r}", lineno)
                raw_overrides.append(
                    (OverrideDirective(tick, i, j, tokens[5] == "open"), lineno)
                )
            else:
                raise ParseError(f"unknown action {action!r} after 'at'", lineno)
        elif head == "maxticks":
            if max_tick is not None:
                raise ParseError("duplicate maxticks directive", lineno)
            if len(tokens) != 2:
                raise ParseError("maxticks takes exactly one value", lineno)
            max_tick = (_parse_int(tokens[1], "maxticks", lineno), lineno)
        else:
            raise ParseError(f"unknown directive {head!r}", lineno)

    if fabric_args is None:
        raise ValidationError("missing fabric directive")
    if max_tick is None:
        raise ValidationError("missing maxticks directive")
    if max_tick[0] < 1:
        raise ValidationError(f"maxticks must be >= 1, got {max_tick[0]}", max_tick[1])

    word_count = _parse_int(fabric_args["words"], "words", fabric_line)
    mode = fabric_args.get("mode", DONE_ENABLE)
    if mode not in _MODE_NAMES:
        raise ValidationError(f"mode must be done_enable or done_done, got {mode!r}", fabric_line)

    durations: dict[int, int] = {}
    for word in range(1, max(word_count, 1) + 1):
        if word in dur_overrides:
            durations[word] = dur_overrides[word][0]
        elif default_dur is not None:
            durations[word] = default_dur[0]
    for word, (_, line) in dur_overrides.items():
        if not 1 <= word <= word_count:
            raise ValidationError(f"duration for word {word} outside 1..{word_count}", line)
    try:
        config = FabricConfig(
            word_count=word_count,
            delay1=_parse_int(fabric_args["delay1"], "delay1", fabric_line),
            delay2=_parse_int(fabric_args["delay2"], "delay2", fabric_line),
            threshold=_parse_int(fabric_args["threshold"], "threshold", fabric_line),
            durations=durations,
            filter_mode=mode,
        )
    except InvalidConfigError as exc:
        raise ValidationError(str(exc), fabric_line) from exc

    warnings: list[str] = []
    plans: list[RehearsalPlan] = []
    for args, words, line in raw_plans:
        try:
            plan = RehearsalPlan(
                sequence=tuple(words),
                reps=_parse_int(args["reps"], "reps", line),
                gap=_parse_int(args["gap"], "gap", line),
                rest=_parse_int(args["rest"], "rest", line),
                start=_parse_int(args["start"], "start", line),
            )
            plan.check_against(config)
        except InvalidPlanError as exc:
            raise ValidationError(str(exc), line) from exc
        if plan.gap > config.delay1:
            warnings.append(
                f"line {line}: gap={plan.gap} exceeds delay1={config.delay1}; "
                "rehearsed pairs will fall outside every coincidence window"
            )
        plans.append(plan)

    probes: list[Probe] = []
    for tick, word, line in raw_probes:
        if not 1 <= word <= word_count:
            raise ValidationError(f"word {word} outside 1..{word_count}", line)
        if tick < 0:
            raise ValidationError(f"probe tick must be >= 0, got {tick}", line)
        probes.append(Probe(tick, word))

    overrides: list[OverrideDirective] = []
    for directive, line in raw_overrides:
        for word in (directive.i, directive.j):
            if not 1 <= word <= word_count:
                raise ValidationError(f"word {word} outside 1..{word_count}", line)
        if directive.i == directive.j:
            raise ValidationError(f"override pair ({directive.i}, {directive.j}) is a self pair", line)
        if directive.tick < 0:
            raise ValidationError(f"override tick must be >= 0, got {directive.tick}", line)
        overrides.append(directive)

    return Scenario(
        config=config,
        plans=tuple(plans),
        probes=tuple(probes),
        overrides=tuple(overrides),
        max_tick=max_tick[0],
        warnings=tuple(warnings),
    )


def canonical_scenario(scenario: Scenario) -> str:
    """Normalized scenario text; parsing it reproduces the scenario.

    Directive order is fixed (fabric, durations, plans, overrides,
    probes, maxticks). Plan, override, and probe order is preserved:
    it determines episode numbering and same-tick dispatch order.
    """
    cfg = scenario.config
    lines = [
        f"fabric words={cfg.word_count} delay1={cfg.delay1} delay2={cfg.delay2} "
        f"threshold={cfg.threshold} mode={cfg.filter_mode}"
    ]
    counts = Counter(cfg.durations[w] for w in cfg.word_ids())
    default = counts.most_common(1)[0][0]
    lines.append(f"dur * {default}")
    for word in cfg.word_ids():
        if cfg.durations[word] != default:
            lines.append(f"dur {word} {cfg.durations[word]}")
    for plan in scenario.plans:
        seq = " ".join(str(w) for w in plan.sequence)
        lines.append(
            f"rehearse {seq} reps={plan.reps} gap={plan.gap} rest={plan.rest} start={plan.start}"
        )
    for d in scenario.overrides:
        state = "open" if d.is_open else "closed"
        lines.append(f"at {d.tick} override {d.i} {d.j} {state}")
    for probe in scenario.probes:
        lines.append(f"at {probe.tick} probe {probe.word}")
    lines.append(f"maxticks {scenario.max_tick}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EpisodeSummary:
    episode: int
    trigger_word: int
    start: int
    end: int
    fired_words: tuple[int, ...]
    cpu_enables_after_trigger: int


@dataclass(frozen=True)
class Report:
    outcome: str
    final_tick: int
    learned: tuple[tuple[tuple[int, int], int], ...]  # ((i, j), learned tick)
    detections: tuple[tuple[tuple[int, int], int], ...]  # ((i, j), count)
    episodes: tuple[EpisodeSummary, ...]


def build_report(records: list[TraceRecord], *, outcome: str, final_tick: int) -> Report:
    """Summarize a run purely from its trace."""
    learned = sorted(
        ((rec.pair, rec.t) for rec in records if rec.ev == EV_LEARNED),
        key=lambda item: item[0],
    )
    counts = Counter(rec.pair for rec in records if rec.ev == EV_LATCH_SHIFT)
    detections = tuple(sorted(counts.items()))

    by_episode: dict[int, list[TraceRecord]] = {}
    for rec in records:
        if rec.episode is not None:
            by_episode.setdefault(rec.episode, []).append(rec)
    episodes = []
    for episode_id, recs in by_episode.items():
        cpu = [r for r in recs if r.src == SRC_CPU and r.ev in (EV_ENABLE, EV_IGNORED_ENABLE)]
        if not cpu:
            continue
        fired = sorted({r.word for r in recs if r.ev == EV_ENABLE})
        episodes.append(
            EpisodeSummary(
                episode=episode_id,
                trigger_word=cpu[0].word,
                start=cpu[0].t,
                end=max(r.t for r in recs),
                fired_words=tuple(fired),
                cpu_enables_after_trigger=len(cpu) - 1,
            )
        )
    episodes.sort(key=lambda e: (e.start, e.episode))
    return Report(
        outcome=outcome,
        final_tick=final_tick,
        learned=tuple(learned),
        detections=detections,
        episodes=tuple(episodes),
    )


def format_report(report: Report) -> str:
    obj = {
        "outcome": report.outcome,
        "final_tick": report.final_tick,
        "learned": [{"pair": list(pair), "tick": tick} for pair, tick in report.learned],
        "detections": [{"pair": list(pair), "count": n} for pair, n in report.detections],
        "episodes": [
            {
                "episode": e.episode,
                "trigger_word": e.trigger_word,
                "start": e.start,
                "end": e.end,
                "fired_words": list(e.fired_words),
                "cpu_enables_after_trigger": e.cpu_enables_after_trigger,
            }
            for e in report.episodes
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def write_report(report: Report, path: str | Path) -> None:
    Path(path).write_text(format_report(report), encoding="utf-8")


def read_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text(encoding="utf-8"))
