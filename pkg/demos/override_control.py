#!/usr/bin/env python3
"""Mask a learned connection with its override switch, then restore it.

Learning cannot be erased, but every switch has a series override: open
it and the done signal stops reaching the successor, returning control
to the CPU. The first probe stops after word 1 with an override_blocked
record; after closing the override the second probe replays fully.
"""

from memfabric import parse_scenario, run_scenario

SCENARIO = """
fabric words=3 delay1=5 delay2=1 threshold=10
dur * 4
rehearse 1 3 2 reps=10 gap=2 rest=20 start=0
at 400 override 1 3 open
at 500 probe 1
at 600 override 1 3 closed
at 700 probe 1
maxticks 2000
"""


def main() -> None:
    result = run_scenario(parse_scenario(SCENARIO))
    print(f"learned pairs: {[pair for pair, _ in result.report.learned]}")
    print("(the override never unlearns anything; it only masks the path)\n")
    for rec in result.records:
        if rec.t >= 400 and rec.ev in ("enable", "done", "override_set", "override_blocked"):
            detail = f"word {rec.word}" if rec.word else f"pair {rec.pair}"
            if rec.ev == "override_set":
                detail = f"pair {rec.pair} -> {'open' if rec.stage else 'closed'}"
            print(f"t={rec.t:4d}  {rec.ev:<17} {detail}")
    print(f"\nrun ended {result.outcome.outcome} at t={result.outcome.final_tick}")


if __name__ == "__main__":
    main()
