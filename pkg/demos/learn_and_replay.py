#!/usr/bin/env python3
"""Rehearse a three-word sequence until it is learned, then replay it.

The CPU rehearses 1-3-2 ten times. Each adjacent pair's timing filter
advances its ten-stage register once per repetition; on the tenth, the
pairs (1,3) and (3,2) latch into the switch matrix. A single probe of
word 1 at t=500 then runs the whole chain with no further CPU events.
"""

from memfabric import parse_scenario, run_scenario

SCENARIO = """
fabric words=3 delay1=5 delay2=1 threshold=10
dur * 4
rehearse 1 3 2 reps=10 gap=2 rest=20 start=0
at 500 probe 1
maxticks 2000
"""


def main() -> None:
    scenario = parse_scenario(SCENARIO)
    result = run_scenario(scenario)

    print("== rehearsal ==")
    for pair, tick in result.report.learned:
        print(f"pair {pair[0]}->{pair[1]} learned at t={tick}")
    for pair, count in result.report.detections:
        print(f"pair {pair[0]}->{pair[1]}: {count} qualifying detections")

    print("\n== the probe episode, CPU-free after the trigger ==")
    probe = next(e for e in result.report.episodes if e.start == 500)
    print(
        f"trigger word {probe.trigger_word} at t={probe.start}; "
        f"words fired: {probe.fired_words}; "
        f"cpu enables after trigger: {probe.cpu_enables_after_trigger}"
    )
    for rec in result.records:
        if rec.t >= 500 and rec.ev in ("enable", "done"):
            source = f" [{rec.src}]" if rec.src else ""
            print(f"t={rec.t:4d}  {rec.ev:<6} word {rec.word}{source}")
    print(f"\nrun ended {result.outcome.outcome} at t={result.outcome.final_tick}")


if __name__ == "__main__":
    main()
