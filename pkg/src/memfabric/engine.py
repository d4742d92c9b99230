"""Deterministic discrete-event core and the composed simulation.

Events are totally ordered by ``(tick, seq)`` where ``seq`` is the
insertion sequence number, so same-tick events dispatch in the order
they were scheduled. Time is integer ticks and the clock only moves
forward; scheduling behind the clock is an internal logic error and
aborts the run. A run ends either quiescent (the queue drained) or at
the tick limit (the next event lies beyond ``max_tick``), which is how
runaway autonomous activity is surfaced rather than looping forever.

A :class:`Simulation` is a self-contained value (engine + fabric +
scripted CPU driver + trace). It offers no internal parallelism, but
independent simulations share no state and may run on separate threads.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from memfabric.driver import Driver, Probe, RehearsalPlan
from memfabric.fabric import Episode, Fabric, FabricConfig
from memfabric.scenario import Report, Scenario, build_report
from memfabric.trace import SRC_AUTO, SRC_CPU, TraceRecord


class SchedulingInPastError(RuntimeError):
    """An event was scheduled behind the clock (internal logic bug)."""


@dataclass(frozen=True)
class CpuEnable:
    word: int
    episode: Episode


@dataclass(frozen=True)
class AutoEnable:
    word: int
    pair: tuple[int, int]
    episode: Episode


@dataclass(frozen=True)
class WordDone:
    word: int
    episode: Episode


@dataclass(frozen=True)
class OverrideSet:
    pair: tuple[int, int]
    is_open: bool


@dataclass(frozen=True)
class Event:
    tick: int
    seq: int
    payload: object


class EventQueue:
    """Pending events, dispatched in ascending (tick, seq) order."""

    def __init__(self):
        self._heap: list[tuple[int, int, object]] = []
        self._next_seq = 0
        self.scheduled_total = 0

    def __len__(self) -> int:
        return len(self._heap)

    def schedule(self, tick: int, payload: object, *, clock: int) -> Event:
        if tick < clock:
            raise SchedulingInPastError(f"event at tick {tick} is behind the clock ({clock})")
        event = Event(tick, self._next_seq, payload)
        self._next_seq += 1
        self.scheduled_total += 1
        heapq.heappush(self._heap, (event.tick, event.seq, event.payload))
        return event

    def peek_tick(self) -> int | None:
        return self._heap[0][0] if self._heap else None

    def pop(self) -> Event | None:
        if not self._heap:
            return None
        tick, seq, payload = heapq.heappop(self._heap)
        return Event(tick, seq, payload)


QUIESCENT = "quiescent"
TICK_LIMIT = "tick_limit"


@dataclass(frozen=True)
class RunOutcome:
    outcome: str
    final_tick: int

    @property
    def quiescent(self) -> bool:
        return self.outcome == QUIESCENT


class Simulation:
    """One complete run: fabric, driver, queue, clock, and trace."""

    def __init__(self, config: FabricConfig, *, loop_suppression: bool = True):
        self.config = config
        self.clock = 0
        self.queue = EventQueue()
        self.fabric = Fabric(config, loop_suppression=loop_suppression)
        self.driver = Driver(self)
        self.records: list[TraceRecord] = []
        self.dispatched_total = 0
        self._next_episode = 0

    # -- setup and scheduling -------------------------------------------

    def new_episode(self) -> Episode:
        episode = Episode(self._next_episode)
        self._next_episode += 1
        return episode

    def emit(self, record: TraceRecord) -> None:
        self.records.append(record)

    def schedule_cpu_enable(self, tick: int, word: int, episode: Episode) -> None:
        self.queue.schedule(tick, CpuEnable(word, episode), clock=self.clock)

    def schedule_auto_enable(
        self, tick: int, word: int, pair: tuple[int, int], episode: Episode
    ) -> None:
        self.queue.schedule(tick, AutoEnable(word, pair, episode), clock=self.clock)

    def schedule_done(self, tick: int, word: int, episode: Episode) -> None:
        self.queue.schedule(tick, WordDone(word, episode), clock=self.clock)

    def schedule_override(self, tick: int, pair: tuple[int, int], is_open: bool) -> None:
        self.queue.schedule(tick, OverrideSet(pair, is_open), clock=self.clock)

    def add_plan(self, plan: RehearsalPlan) -> None:
        self.driver.add_plan(plan)

    def add_probe(self, probe: Probe) -> None:
        self.driver.probe(probe)

    # -- dispatch --------------------------------------------------------

    def step(self) -> Event | None:
        """Dispatch the least pending event, advancing the clock to it."""
        event = self.queue.pop()
        if event is None:
            return None
        self.clock = event.tick
        self.dispatched_total += 1
        self._dispatch(event)
        return event

    def run_to_quiescence(self, max_tick: int) -> RunOutcome:
        """Dispatch until the queue drains or an event would pass max_tick."""
        if max_tick <= 0:
            raise ValueError(f"max_tick must be positive, got {max_tick}")
        while True:
            next_tick = self.queue.peek_tick()
            if next_tick is None:
                return RunOutcome(QUIESCENT, self.clock)
            if next_tick > max_tick:
                return RunOutcome(TICK_LIMIT, self.clock)
            self.step()

    def _dispatch(self, event: Event) -> None:
        payload = event.payload
        if isinstance(payload, CpuEnable):
            self.fabric.on_enable(
                self, payload.word, event.tick, source=SRC_CPU, pair=None, episode=payload.episode
            )
        elif isinstance(payload, AutoEnable):
            self.fabric.on_enable(
                self,
                payload.word,
                event.tick,
                source=SRC_AUTO,
                pair=payload.pair,
                episode=payload.episode,
            )
        elif isinstance(payload, WordDone):
            # Fabric reacts before the CPU observes the done.
            self.fabric.on_done(self, payload.word, event.tick, payload.episode)
            self.driver.on_done(payload.word, event.tick)
        elif isinstance(payload, OverrideSet):
            self.fabric.set_override(
                self, payload.pair[0], payload.pair[1], payload.is_open, event.tick
            )
        else:
            raise TypeError(f"unknown event payload: {payload!r}")


@dataclass
class RunResult:
    scenario: Scenario
    outcome: RunOutcome
    records: list[TraceRecord]
    report: Report
    simulation: Simulation


def build_simulation(scenario: Scenario, *, loop_suppression: bool = True) -> Simulation:
    sim = Simulation(scenario.config, loop_suppression=loop_suppression)
    for d in scenario.overrides:
        sim.schedule_override(d.tick, (d.i, d.j), d.is_open)
    for probe in scenario.probes:
        sim.add_probe(probe)
    for plan in scenario.plans:
        sim.add_plan(plan)
    return sim


def run_scenario(
    scenario: Scenario, *, max_tick: int | None = None, loop_suppression: bool = True
) -> RunResult:
    """Build, run, and summarize one scenario."""
    sim = build_simulation(scenario, loop_suppression=loop_suppression)
    outcome = sim.run_to_quiescence(max_tick if max_tick is not None else scenario.max_tick)
    report = build_report(sim.records, outcome=outcome.outcome, final_tick=outcome.final_tick)
    return RunResult(
        scenario=scenario, outcome=outcome, records=sim.records, report=report, simulation=sim
    )
