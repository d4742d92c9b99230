"""The learning memory fabric.

A fabric holds a block of memory words (ids ``1..word_count``), one
timing filter per ordered word pair, and a switch matrix of learned
connections. Words are started by an enable signal and emit a done
signal after their fixed duration. Every done of word ``i`` holds a
coincidence window of ``delay1`` ticks open on all filters ``(i, *)``;
when the paired trigger signal of word ``j`` (an enable, or a done,
depending on the filter mode) lands inside the window, the filter
fires and advances an n-stage shift register of set-once latches.
A register that fills closes the switch for its pair: from then on,
every done of ``i`` autonomously schedules an enable of ``j`` exactly
``delay1`` ticks later, with no CPU involvement.

Learning is never erased. A per-pair override acts as a series switch
that masks a learned connection without clearing it. Within a single
episode (the activation chain rooted at one CPU enable) each word may
fire at most once; repeat attempts are suppressed, so learned cycles
cannot loop on their own.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

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
    TraceRecord,
)

DONE_ENABLE = "done_enable"
DONE_DONE = "done_done"
FILTER_MODES = (DONE_ENABLE, DONE_DONE)


class InvalidConfigError(ValueError):
    """Fabric configuration violates a structural constraint."""


class UnknownWordError(ValueError):
    """A word id outside ``1..word_count`` was referenced."""


class SelfPairError(ValueError):
    """An ordered pair (i, i); the fabric has no self connections."""


@dataclass(frozen=True)
class FabricConfig:
    """Structural parameters of one fabric.

    ``delay1`` is the hold time of a done signal: both the filter
    coincidence window length and the replay latency between chained
    words. ``delay2`` is the learning-spike width, realized as the
    minimum spacing between two register shifts of the same filter;
    it may not exceed ``delay1``. ``threshold`` is the register depth:
    the number of qualifying repetitions after which a pair is learned.
    """

    word_count: int
    delay1: int
    delay2: int
    threshold: int
    durations: Mapping[int, int]
    filter_mode: str = DONE_ENABLE

    def __post_init__(self) -> None:
        if self.word_count < 2:
            raise InvalidConfigError(f"need at least 2 words, got {self.word_count}")
        if self.delay1 < 1:
            raise InvalidConfigError(f"delay1 must be >= 1, got {self.delay1}")
        if self.delay2 < 1:
            raise InvalidConfigError(f"delay2 must be >= 1, got {self.delay2}")
        if self.delay2 > self.delay1:
            raise InvalidConfigError(
                f"delay2 ({self.delay2}) must not exceed delay1 ({self.delay1})"
            )
        if self.threshold < 1:
            raise InvalidConfigError(f"threshold must be >= 1, got {self.threshold}")
        if self.filter_mode not in FILTER_MODES:
            raise InvalidConfigError(f"unknown filter mode: {self.filter_mode!r}")
        for word in self.word_ids():
            dur = self.durations.get(word)
            if dur is None:
                raise InvalidConfigError(f"no duration for word {word}")
            if dur < 1:
                raise InvalidConfigError(f"duration of word {word} must be >= 1, got {dur}")

    @classmethod
    def uniform(
        cls,
        word_count: int,
        *,
        delay1: int,
        delay2: int,
        threshold: int,
        duration: int,
        filter_mode: str = DONE_ENABLE,
    ) -> "FabricConfig":
        """Config with the same duration for every word."""
        durations = {w: duration for w in range(1, word_count + 1)}
        return cls(word_count, delay1, delay2, threshold, durations, filter_mode)

    def word_ids(self) -> range:
        return range(1, self.word_count + 1)

    def ordered_pairs(self):
        for i in self.word_ids():
            for j in self.word_ids():
                if i != j:
                    yield (i, j)

    def check_word(self, word: int) -> None:
        if not 1 <= word <= self.word_count:
            raise UnknownWordError(f"word {word} outside 1..{self.word_count}")


@dataclass
class Episode:
    """One activation chain rooted at a single CPU enable.

    ``fired_words`` collects the words that accepted an enable within
    the episode; each word may appear at most once.
    """

    episode_id: int
    fired_words: set[int] = field(default_factory=set)


@dataclass
class WordState:
    word: int
    busy_until: int | None = None


class LearnRegister:
    """Shift register of set-once latches.

    Stages only ever transition false -> true; each shift moves the
    true prefix one stage further, so the set stages always form a
    prefix. Once full, further shifts change nothing.
    """

    def __init__(self, depth: int):
        self.stages = [False] * depth

    @property
    def set_count(self) -> int:
        return sum(self.stages)

    @property
    def full(self) -> bool:
        return self.stages[-1]

    def shift(self) -> bool:
        """Advance once; return True iff the last stage newly latched."""
        was_full = self.stages[-1]
        for k in range(len(self.stages) - 1, 0, -1):
            self.stages[k] = self.stages[k] or self.stages[k - 1]
        self.stages[0] = True
        return self.stages[-1] and not was_full


class TimingFilter:
    """Coincidence detector plus learn register for one ordered pair."""

    def __init__(self, src: int, dst: int, depth: int):
        self.src = src
        self.dst = dst
        self.register = LearnRegister(depth)
        self.window_open_until: int | None = None
        self.last_shift_tick: int | None = None
        self.shift_count = 0

    @property
    def pair(self) -> tuple[int, int]:
        return (self.src, self.dst)

    def window_contains(self, tick: int) -> bool:
        # Closed interval: a trigger exactly delay1 after the done still counts.
        return self.window_open_until is not None and tick <= self.window_open_until


class Fabric:
    """Word block, K(K-1) timing filters, and the learned switch matrix.

    All mutation happens through the single-threaded dispatch loop of
    the owning simulation, which is passed in so the fabric can emit
    trace records and schedule its own done/replay events.

    ``loop_suppression`` is a test hook: disabling it removes the
    episode no-repeat rule so that learned cycles replay unboundedly
    (surfacing as a tick-limit outcome).
    """

    def __init__(self, config: FabricConfig, *, loop_suppression: bool = True):
        self.config = config
        self.loop_suppression = loop_suppression
        self.words = {w: WordState(w) for w in config.word_ids()}
        self.filters = {
            pair: TimingFilter(pair[0], pair[1], config.threshold)
            for pair in config.ordered_pairs()
        }
        self._learned: dict[tuple[int, int], int] = {}
        self._override_open: set[tuple[int, int]] = set()

    @property
    def filter_count(self) -> int:
        return len(self.filters)

    def learned_set(self) -> set[tuple[int, int]]:
        return set(self._learned)

    def learned_ticks(self) -> dict[tuple[int, int], int]:
        return dict(self._learned)

    def is_learned(self, pair: tuple[int, int]) -> bool:
        return pair in self._learned

    def override_is_open(self, pair: tuple[int, int]) -> bool:
        return pair in self._override_open

    def detection_counts(self) -> dict[tuple[int, int], int]:
        """Per-pair count of register shifts (refractory-respecting detections)."""
        return {f.pair: f.shift_count for f in self.filters.values() if f.shift_count}

    def on_enable(self, sim, word: int, tick: int, *, source: str, pair, episode: Episode) -> None:
        """Apply an enable signal to a word.

        A busy word ignores the enable, as does a word that already
        fired within the episode (the no-repeat rule; replay races can
        reach an idle word a second time, which the scheduling-time
        check alone cannot catch). An accepted enable runs the word
        for its duration and, in done_enable mode, feeds the filters
        watching for this word as a sequence successor.
        """
        self.config.check_word(word)
        state = self.words[word]
        busy = state.busy_until is not None and state.busy_until > tick
        repeat = self.loop_suppression and word in episode.fired_words
        if busy or repeat:
            sim.emit(
                TraceRecord(
                    t=tick,
                    ev=EV_IGNORED_ENABLE,
                    word=word,
                    pair=pair,
                    src=source,
                    episode=episode.episode_id,
                )
            )
            return
        state.busy_until = tick + self.config.durations[word]
        sim.schedule_done(state.busy_until, word, episode)
        episode.fired_words.add(word)
        sim.emit(
            TraceRecord(
                t=tick,
                ev=EV_ENABLE,
                word=word,
                pair=pair,
                src=source,
                episode=episode.episode_id,
            )
        )
        if self.config.filter_mode == DONE_ENABLE:
            self._detect_into(sim, word, tick)

    def on_done(self, sim, word: int, tick: int, episode: Episode) -> None:
        """Handle a word's done signal.

        Opens (retriggers) the coincidence windows of all filters with
        this word as the sequence predecessor, feeds done-done filters,
        and walks the learned successors: overridden pairs are blocked,
        already-fired successors suppressed, and every remaining one
        gets an autonomous enable scheduled delay1 ticks out, carrying
        the same episode.
        """
        state = self.words[word]
        if state.busy_until == tick:
            # A stale done (the word was re-enabled at its exact completion
            # tick) must not clear the newer activation's busy period.
            state.busy_until = None
        sim.emit(TraceRecord(t=tick, ev=EV_DONE, word=word, episode=episode.episode_id))
        for dst in self.config.word_ids():
            if dst != word:
                self.filters[(word, dst)].window_open_until = tick + self.config.delay1
        if self.config.filter_mode == DONE_DONE:
            self._detect_into(sim, word, tick)
        for dst in self.config.word_ids():
            link = (word, dst)
            if link not in self._learned:
                continue
            if link in self._override_open:
                sim.emit(
                    TraceRecord(
                        t=tick,
                        ev=EV_OVERRIDE_BLOCKED,
                        word=dst,
                        pair=link,
                        episode=episode.episode_id,
                    )
                )
            elif self.loop_suppression and dst in episode.fired_words:
                sim.emit(
                    TraceRecord(
                        t=tick,
                        ev=EV_LOOP_SUPPRESSED,
                        word=dst,
                        pair=link,
                        episode=episode.episode_id,
                    )
                )
            else:
                sim.schedule_auto_enable(tick + self.config.delay1, dst, link, episode)
                sim.emit(
                    TraceRecord(
                        t=tick,
                        ev=EV_AUTO_ENABLE_SCHEDULED,
                        word=dst,
                        pair=link,
                        episode=episode.episode_id,
                    )
                )

    def set_override(self, sim, i: int, j: int, is_open: bool, tick: int) -> None:
        """Open or close the series switch masking pair (i, j).

        Purely a mask: independent of whether the pair is learned, and
        it never touches the learn register.
        """
        self.config.check_word(i)
        self.config.check_word(j)
        if i == j:
            raise SelfPairError(f"override pair ({i}, {j}) is a self pair")
        if is_open:
            self._override_open.add((i, j))
        else:
            self._override_open.discard((i, j))
        sim.emit(
            TraceRecord(t=tick, ev=EV_OVERRIDE_SET, pair=(i, j), stage=1 if is_open else 0)
        )

    def _detect_into(self, sim, dst: int, tick: int) -> None:
        # Trigger signal for word dst observed: fire every filter (src, dst)
        # whose window is holding.
        for src in self.config.word_ids():
            if src == dst:
                continue
            flt = self.filters[(src, dst)]
            if flt.window_contains(tick):
                self._fire_filter(sim, flt, tick)

    def _fire_filter(self, sim, flt: TimingFilter, tick: int) -> None:
        sim.emit(TraceRecord(t=tick, ev=EV_FILTER_FIRE, pair=flt.pair))
        if flt.last_shift_tick is not None and tick - flt.last_shift_tick < self.config.delay2:
            # Still inside the previous learning spike: one spike cannot
            # double-shift the register. The refractory does not restart.
            return
        flt.last_shift_tick = tick
        newly_full = flt.register.shift()
        flt.shift_count += 1
        sim.emit(
            TraceRecord(t=tick, ev=EV_LATCH_SHIFT, pair=flt.pair, stage=flt.register.set_count)
        )
        if newly_full:
            self._learned[flt.pair] = tick
            sim.emit(TraceRecord(t=tick, ev=EV_LEARNED, pair=flt.pair))
