"""The scripted CPU (working-memory) model.

The driver is the only creator of episodes. It executes rehearsal
plans reactively: it issues a CPU enable, waits for the enabled word's
done signal, and issues the next enable ``gap`` ticks after that done.
Each repetition of a plan is a fresh episode; repetitions are spaced
by ``rest`` ticks from the previous repetition's last done. One-shot
probes issue a single CPU enable in an episode of their own, which is
what triggers autonomous replay on a trained fabric.

Advancement keys on the word id, not on the episode: if the awaited
word was started autonomously before the CPU got there (so the plan's
own enable was ignored as busy), the plan still advances on that
word's done. A plan only starts waiting once its own enable's tick is
reached; dones of the awaited word from before that (another plan's
traffic, say) do not advance it.
"""

from __future__ import annotations

from dataclasses import dataclass

from memfabric.fabric import Episode, FabricConfig, UnknownWordError


class InvalidPlanError(ValueError):
    """A rehearsal plan violates its structural constraints."""


@dataclass(frozen=True)
class RehearsalPlan:
    sequence: tuple[int, ...]
    reps: int
    gap: int
    rest: int
    start: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "sequence", tuple(self.sequence))
        if len(self.sequence) < 2:
            raise InvalidPlanError("a plan needs at least 2 words")
        if len(set(self.sequence)) != len(self.sequence):
            dup = next(w for i, w in enumerate(self.sequence) if w in self.sequence[:i])
            raise InvalidPlanError(f"word {dup} repeats in the sequence; states must be distinct")
        if any(w < 1 for w in self.sequence):
            raise InvalidPlanError("word ids start at 1")
        if self.reps < 1:
            raise InvalidPlanError(f"reps must be >= 1, got {self.reps}")
        if self.gap < 0:
            raise InvalidPlanError(f"gap must be >= 0, got {self.gap}")
        if self.rest < 0:
            raise InvalidPlanError(f"rest must be >= 0, got {self.rest}")
        if self.start < 0:
            raise InvalidPlanError(f"start must be >= 0, got {self.start}")

    def check_against(self, config: FabricConfig) -> None:
        for word in self.sequence:
            if not 1 <= word <= config.word_count:
                raise InvalidPlanError(
                    f"word {word} outside 1..{config.word_count}"
                )


@dataclass(frozen=True)
class Probe:
    tick: int
    word: int

    def __post_init__(self) -> None:
        if self.tick < 0:
            raise ValueError(f"probe tick must be >= 0, got {self.tick}")
        if self.word < 1:
            raise ValueError("word ids start at 1")


class _PlanRun:
    def __init__(self, plan: RehearsalPlan, episode: Episode):
        self.plan = plan
        self.episode = episode
        self.pos = 0  # index of the word whose done we are waiting on
        self.enable_tick = plan.start  # tick of the current cpu enable
        self.rep = 0
        self.finished = False


class Driver:
    def __init__(self, sim):
        self._sim = sim
        self._runs: list[_PlanRun] = []

    def add_plan(self, plan: RehearsalPlan) -> None:
        plan.check_against(self._sim.config)
        run = _PlanRun(plan, self._sim.new_episode())
        self._runs.append(run)
        self._sim.schedule_cpu_enable(plan.start, plan.sequence[0], run.episode)

    def probe(self, probe: Probe) -> None:
        if not 1 <= probe.word <= self._sim.config.word_count:
            raise UnknownWordError(
                f"word {probe.word} outside 1..{self._sim.config.word_count}"
            )
        self._sim.schedule_cpu_enable(probe.tick, probe.word, self._sim.new_episode())

    def unfinished_plans(self) -> int:
        return sum(1 for run in self._runs if not run.finished)

    def on_done(self, word: int, tick: int) -> None:
        for run in self._runs:
            if (
                not run.finished
                and run.plan.sequence[run.pos] == word
                and tick >= run.enable_tick
            ):
                self._advance(run, tick)

    def _advance(self, run: _PlanRun, tick: int) -> None:
        plan = run.plan
        run.pos += 1
        if run.pos < len(plan.sequence):
            run.enable_tick = tick + plan.gap
            self._sim.schedule_cpu_enable(run.enable_tick, plan.sequence[run.pos], run.episode)
            return
        run.rep += 1
        if run.rep < plan.reps:
            run.pos = 0
            run.episode = self._sim.new_episode()
            run.enable_tick = tick + plan.rest
            self._sim.schedule_cpu_enable(run.enable_tick, plan.sequence[0], run.episode)
        else:
            run.finished = True
