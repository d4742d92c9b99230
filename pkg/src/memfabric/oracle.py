"""Independent brute-force verification of runs.

Everything here recomputes fabric behavior from first principles,
sharing no logic with the event-driven implementation:

* :func:`count_detections` rescans a raw trace and counts, per ordered
  pair, the trigger signals that land inside a predecessor's hold
  window, applying the spike-width refractory by literal subtraction.
  It consumes only enable/done records; the fabric's own filter and
  latch records are ignored entirely.
* :func:`predict_learned` applies the rehearsal threshold to counts.
* :func:`predict_timeline` expands the full autonomous episode that a
  single enable of ``start`` would produce on a given learned set, as
  a naive worklist walk (scan-for-minimum, no priority queue).

Timelines and episode sub-traces are compared in a canonical order:
sorted by tick, then a fixed kind rank, then word, then pair.

:func:`verify_run` cross-checks a scenario's trace against these
recomputations plus the structural trace contracts, returning a list
of divergence descriptions (empty means full agreement).
"""

from __future__ import annotations

from dataclasses import dataclass

from memfabric.fabric import DONE_ENABLE, FabricConfig
from memfabric.scenario import Scenario
from memfabric.trace import (
    EV_AUTO_ENABLE_SCHEDULED,
    EV_DONE,
    EV_ENABLE,
    EV_FILTER_FIRE,
    EV_IGNORED_ENABLE,
    EV_LATCH_SHIFT,
    EV_LEARNED,
    EV_LOOP_SUPPRESSED,
    EV_OVERRIDE_BLOCKED,
    EV_OVERRIDE_SET,
    MalformedTraceError,
    SRC_AUTO,
    SRC_CPU,
    TraceRecord,
)

Pair = tuple[int, int]

KIND_ORDER = {
    EV_ENABLE: 0,
    EV_DONE: 1,
    EV_IGNORED_ENABLE: 2,
    EV_LOOP_SUPPRESSED: 3,
    EV_OVERRIDE_BLOCKED: 4,
}


def _check_order(records: list[TraceRecord]) -> None:
    last = 0
    for rec in records:
        if rec.t < last:
            raise MalformedTraceError(f"out-of-order tick {rec.t} after {last}")
        last = rec.t


def detection_ticks(records: list[TraceRecord], config: FabricConfig) -> dict[Pair, list[int]]:
    """Ticks of the qualifying detections per ordered pair.

    A detection for (i, j) is a trigger record of j (an accepted enable
    in done_enable mode, a done in done_done mode) whose tick lies in
    the closed window [t, t + delay1] of the latest preceding done of
    i, and at least delay2 after the previous counted detection of the
    same pair. Windows retrigger: a newer done of i replaces the older
    window. Same-tick cases resolve by record order, matching dispatch
    order.
    """
    _check_order(records)
    trigger_kind = EV_ENABLE if config.filter_mode == DONE_ENABLE else EV_DONE
    window_until: dict[int, int] = {}
    last_counted: dict[Pair, int] = {}
    ticks: dict[Pair, list[int]] = {}
    for rec in records:
        if rec.ev == trigger_kind:
            for src, until in window_until.items():
                if src == rec.word or rec.t > until:
                    continue
                pair = (src, rec.word)
                prev = last_counted.get(pair)
                if prev is not None and rec.t - prev < config.delay2:
                    continue
                last_counted[pair] = rec.t
                ticks.setdefault(pair, []).append(rec.t)
        if rec.ev == EV_DONE:
            window_until[rec.word] = rec.t + config.delay1
    return ticks


def count_detections(records: list[TraceRecord], config: FabricConfig) -> dict[Pair, int]:
    return {pair: len(t) for pair, t in detection_ticks(records, config).items()}


def predict_learned(counts: dict[Pair, int], threshold: int) -> set[Pair]:
    return {pair for pair, count in counts.items() if count >= threshold}


@dataclass(frozen=True)
class TimelineEntry:
    tick: int
    kind: str
    word: int
    pair: Pair | None = None


def entry_sort_key(entry: TimelineEntry):
    return (entry.tick, KIND_ORDER[entry.kind], entry.word, entry.pair or (0, 0))


def shift_entries(entries: list[TimelineEntry], delta: int) -> list[TimelineEntry]:
    return [TimelineEntry(e.tick + delta, e.kind, e.word, e.pair) for e in entries]


def episode_subtrace(records: list[TraceRecord], episode_id: int) -> list[TimelineEntry]:
    """The comparable view of one episode, canonically ordered."""
    entries = [
        TimelineEntry(rec.t, rec.ev, rec.word, rec.pair)
        for rec in records
        if rec.episode == episode_id and rec.ev in KIND_ORDER
    ]
    return sorted(entries, key=entry_sort_key)


def predict_timeline(
    learned: set[Pair],
    overrides: set[Pair],
    start: int,
    config: FabricConfig,
) -> list[TimelineEntry]:
    """Expected episode from one enable of ``start`` at tick 0.

    Walks a plain worklist of pending arrivals and completions,
    repeatedly scanning for the least (tick, seq) item. A word arrival
    is ignored if the word is mid-run or has already fired in the
    episode; otherwise it runs for its duration, and its completion
    feeds every learned, non-overridden, not-yet-fired successor an
    arrival exactly delay1 later (successors in ascending word order).
    The result is sorted by (tick, kind rank, word, pair).
    """
    config.check_word(start)
    out: list[TimelineEntry] = []
    # worklist items: (tick, seq, action, word, pair)
    worklist: list[tuple[int, int, str, int, Pair | None]] = [(0, 0, "arrive", start, None)]
    next_seq = 1
    busy_until: dict[int, int] = {}
    fired: set[int] = set()
    while worklist:
        item = min(worklist, key=lambda it: (it[0], it[1]))
        worklist.remove(item)
        tick, _, action, word, pair = item
        if action == "arrive":
            if busy_until.get(word, 0) > tick or word in fired:
                out.append(TimelineEntry(tick, EV_IGNORED_ENABLE, word, pair))
                continue
            fired.add(word)
            busy_until[word] = tick + config.durations[word]
            out.append(TimelineEntry(tick, EV_ENABLE, word, pair))
            worklist.append((busy_until[word], next_seq, "finish", word, None))
            next_seq += 1
        else:
            out.append(TimelineEntry(tick, EV_DONE, word, None))
            for successor in config.word_ids():
                link = (word, successor)
                if link not in learned:
                    continue
                if link in overrides:
                    out.append(TimelineEntry(tick, EV_OVERRIDE_BLOCKED, successor, link))
                elif successor in fired:
                    out.append(TimelineEntry(tick, EV_LOOP_SUPPRESSED, successor, link))
                else:
                    worklist.append((tick + config.delay1, next_seq, "arrive", successor, link))
                    next_seq += 1
    return sorted(out, key=entry_sort_key)


# -- whole-run verification ---------------------------------------------


def _override_state_at(scenario: Scenario, tick: int) -> set[Pair]:
    """Open override pairs in effect at ``tick`` (directives apply at their tick)."""
    state: set[Pair] = set()
    for d in scenario.overrides:
        if d.tick <= tick:
            if d.is_open:
                state.add((d.i, d.j))
            else:
                state.discard((d.i, d.j))
    return state


def verify_run(scenario: Scenario, records: list[TraceRecord]) -> list[str]:
    """Cross-check a trace against definition-level recomputation.

    Returns divergence descriptions in check order; an empty list means
    the trace agrees with the oracle on learning, replay timing, and
    the structural trace contracts. Raises MalformedTraceError for a
    trace that is not even well-formed.
    """
    _check_order(records)
    config = scenario.config
    problems: list[str] = []
    last_tick = records[-1].t if records else 0

    # Learning agreement: learned records vs recounted detections.
    ticks = detection_ticks(records, config)
    counts = {pair: len(t) for pair, t in ticks.items()}
    predicted = predict_learned(counts, config.threshold)
    traced_learned: dict[Pair, int] = {}
    for rec in records:
        if rec.ev == EV_LEARNED:
            if rec.pair in traced_learned:
                problems.append(f"pair {rec.pair} has a duplicate learned record at t={rec.t}")
            else:
                traced_learned[rec.pair] = rec.t
    for pair in sorted(predicted - set(traced_learned)):
        problems.append(
            f"pair {pair} reaches {counts[pair]} detections (threshold "
            f"{config.threshold}) but the trace has no learned record for it"
        )
    for pair in sorted(set(traced_learned) - predicted):
        problems.append(
            f"trace says pair {pair} was learned but the recount finds only "
            f"{counts.get(pair, 0)} detections (threshold {config.threshold})"
        )
    for pair in sorted(predicted & set(traced_learned)):
        expected_tick = ticks[pair][config.threshold - 1]
        if traced_learned[pair] != expected_tick:
            problems.append(
                f"pair {pair} learned at t={traced_learned[pair]} in the trace "
                f"but the {config.threshold}th detection is at t={expected_tick}"
            )

    # Replay scheduling: every scheduled autonomous enable is justified
    # and pairs up with its arrival exactly delay1 later (arrivals past
    # the end of a truncated trace are legitimately pending).
    dones: set[tuple[int, int, int]] = set()  # (t, word, episode)
    arrivals: dict[tuple[int, int, Pair, int], int] = {}
    scheduled: dict[tuple[int, int, Pair, int], int] = {}
    for rec in records:
        if rec.ev == EV_DONE:
            dones.add((rec.t, rec.word, rec.episode))
        elif rec.ev in (EV_ENABLE, EV_IGNORED_ENABLE) and rec.src == SRC_AUTO:
            key = (rec.t, rec.word, rec.pair, rec.episode)
            arrivals[key] = arrivals.get(key, 0) + 1
        elif rec.ev == EV_AUTO_ENABLE_SCHEDULED:
            key = (rec.t, rec.word, rec.pair, rec.episode)
            scheduled[key] = scheduled.get(key, 0) + 1

    def learned_by(pair: Pair, tick: int) -> bool:
        t = ticks.get(pair, [])
        return len(t) >= config.threshold and t[config.threshold - 1] <= tick

    for (t, word, pair, episode), n in sorted(scheduled.items()):
        if (t, pair[0], episode) not in dones:
            problems.append(
                f"auto enable of word {word} scheduled at t={t} (pair {pair}) has "
                f"no matching done of word {pair[0]} in episode {episode}"
            )
        if not learned_by(pair, t):
            problems.append(
                f"auto enable scheduled at t={t} for pair {pair} but the pair is "
                f"not learned by then per the recount"
            )
        if pair in _override_state_at(scenario, t):
            problems.append(
                f"auto enable scheduled at t={t} for pair {pair} while its override is open"
            )
        arrival_t = t + config.delay1
        have = arrivals.get((arrival_t, word, pair, episode), 0)
        if have < n and arrival_t <= last_tick:
            problems.append(
                f"auto enable of word {word} (pair {pair}, episode {episode}) was "
                f"scheduled at t={t} but never arrived at t={arrival_t}"
            )
    for (t, word, pair, episode), n in sorted(arrivals.items()):
        if scheduled.get((t - config.delay1, word, pair, episode), 0) < n:
            problems.append(
                f"auto enable of word {word} at t={t} (pair {pair}, episode {episode}) "
                f"was never scheduled at t={t - config.delay1}"
            )

    # Latch activity: shift counts, stage progression, refractory spacing.
    shifts: dict[Pair, list[TraceRecord]] = {}
    fire_ticks: dict[Pair, set[int]] = {}
    for rec in records:
        if rec.ev == EV_LATCH_SHIFT:
            shifts.setdefault(rec.pair, []).append(rec)
        elif rec.ev == EV_FILTER_FIRE:
            fire_ticks.setdefault(rec.pair, set()).add(rec.t)
    for pair in sorted(set(shifts) | set(counts)):
        recs = shifts.get(pair, [])
        if len(recs) != counts.get(pair, 0):
            problems.append(
                f"pair {pair} has {len(recs)} latch shifts in the trace but the "
                f"recount finds {counts.get(pair, 0)} detections"
            )
            continue
        for index, rec in enumerate(recs):
            expected_stage = min(index + 1, config.threshold)
            if rec.stage != expected_stage:
                problems.append(
                    f"latch shift {index + 1} of pair {pair} at t={rec.t} reports "
                    f"stage {rec.stage}, expected {expected_stage}"
                )
            if index > 0 and rec.t - recs[index - 1].t < config.delay2:
                problems.append(
                    f"latch shifts of pair {pair} at t={recs[index - 1].t} and "
                    f"t={rec.t} are closer than delay2={config.delay2}"
                )
            if rec.t not in fire_ticks.get(pair, set()):
                problems.append(
                    f"latch shift of pair {pair} at t={rec.t} has no filter_fire record"
                )

    # Suppression and override-block records must each sit on a done of
    # the pair's predecessor, with the pair learned by then.
    fired_at: dict[tuple[int, int], int] = {}
    for rec in records:
        if rec.ev == EV_ENABLE:
            fired_at.setdefault((rec.episode, rec.word), rec.t)
    for rec in records:
        if rec.ev not in (EV_LOOP_SUPPRESSED, EV_OVERRIDE_BLOCKED):
            continue
        where = f"at t={rec.t} (pair {rec.pair}, episode {rec.episode})"
        if (rec.t, rec.pair[0], rec.episode) not in dones:
            problems.append(f"{rec.ev} record {where} has no matching done of word {rec.pair[0]}")
        if not learned_by(rec.pair, rec.t):
            problems.append(f"{rec.ev} record {where} for a pair not learned by then")
        if rec.ev == EV_LOOP_SUPPRESSED:
            enabled = fired_at.get((rec.episode, rec.word))
            if enabled is None or enabled > rec.t:
                problems.append(
                    f"loop_suppressed record {where} but word {rec.word} had not "
                    f"fired in that episode"
                )
        else:
            if rec.pair not in _override_state_at(scenario, rec.t):
                problems.append(
                    f"override_blocked record {where} but the override was not open"
                )

    # Episode no-repeat: at most one accepted enable per word per episode.
    seen: set[tuple[int, int]] = set()
    for rec in records:
        if rec.ev == EV_ENABLE:
            key = (rec.episode, rec.word)
            if key in seen:
                problems.append(
                    f"word {rec.word} has a second enable in episode {rec.episode} at t={rec.t}"
                )
            seen.add(key)

    # Every episode originates from a cpu enable: the first record carrying
    # an episode id must be that episode's cpu trigger.
    first_of_episode: dict[int, TraceRecord] = {}
    for rec in records:
        if rec.episode is not None and rec.episode not in first_of_episode:
            first_of_episode[rec.episode] = rec
    for episode, rec in sorted(first_of_episode.items()):
        if rec.src != SRC_CPU or rec.ev not in (EV_ENABLE, EV_IGNORED_ENABLE):
            problems.append(
                f"episode {episode} starts with a {rec.ev} record at t={rec.t} "
                f"instead of a cpu enable"
            )

    # Override switch records must mirror the scenario directives that
    # fall within the traced horizon.
    expected_overrides = sorted(
        ((d.tick, (d.i, d.j), 1 if d.is_open else 0) for d in scenario.overrides if d.tick <= last_tick)
    )
    actual_overrides = sorted(
        (rec.t, rec.pair, rec.stage) for rec in records if rec.ev == EV_OVERRIDE_SET
    )
    if expected_overrides != actual_overrides:
        problems.append(
            f"override_set records {actual_overrides} do not match the scenario "
            f"directives {expected_overrides}"
        )

    # CPU enables must never carry a source pair.
    for rec in records:
        if rec.ev in (EV_ENABLE, EV_IGNORED_ENABLE) and rec.src == SRC_CPU and rec.pair is not None:
            problems.append(f"cpu enable at t={rec.t} carries a source pair {rec.pair}")

    return problems
