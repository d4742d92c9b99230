#!/usr/bin/env python3
"""What the timing parameters gate: threshold sharpness and window misses.

Three back-to-back experiments:
  1. nine rehearsals with a threshold of ten teach nothing;
  2. the tenth rehearsal tips the registers and replay appears;
  3. a gap wider than the hold window never detects, however often
     the sequence is rehearsed (the negative control).
"""

from memfabric import count_detections, parse_scenario, run_scenario

BASE = """
fabric words=3 delay1=5 delay2=1 threshold=10
dur * 4
rehearse 1 3 2 reps={reps} gap={gap} rest=20 start=0
at {probe_tick} probe 1
maxticks 9000
"""


def experiment(title: str, reps: int, gap: int, probe_tick: int) -> None:
    scenario = parse_scenario(BASE.format(reps=reps, gap=gap, probe_tick=probe_tick))
    result = run_scenario(scenario)
    counts = count_detections(result.records, scenario.config)
    # probes are scheduled first, so the probe owns episode 0
    probe_words = [
        rec.word for rec in result.records if rec.episode == 0 and rec.ev == "enable"
    ]
    print(f"-- {title}")
    print(f"   detections: {dict(sorted(counts.items()))}")
    print(f"   learned:    {sorted(pair for pair, _ in result.report.learned)}")
    print(f"   probe ran:  {probe_words}\n")


def main() -> None:
    experiment("9 rehearsals, threshold 10: one short", reps=9, gap=2, probe_tick=900)
    experiment("10 rehearsals: the chain latches", reps=10, gap=2, probe_tick=900)
    experiment(
        "50 rehearsals with gap > delay1: windows never catch",
        reps=50,
        gap=6,
        probe_tick=4000,
    )


if __name__ == "__main__":
    main()
