#!/usr/bin/env python3
"""Two independent learned chains triggered at the same tick.

Words 1-2 and 3-4 are trained separately. Probing words 1 and 3 at the
same instant starts two episodes that interleave in the trace but never
touch each other's words: each chain's internal timing is identical to
what it would be running alone.
"""

from memfabric import parse_scenario, run_scenario

SCENARIO = """
fabric words=4 delay1=5 delay2=1 threshold=3
dur * 4
rehearse 1 2 reps=3 gap=2 rest=20 start=0
rehearse 3 4 reps=3 gap=2 rest=20 start=200
at 400 probe 1
at 400 probe 3
maxticks 2000
"""


def main() -> None:
    result = run_scenario(parse_scenario(SCENARIO))
    print(f"learned pairs: {[pair for pair, _ in result.report.learned]}\n")
    print("interleaved trace of both probe episodes:")
    for rec in result.records:
        if rec.t >= 400 and rec.ev in ("enable", "done"):
            print(f"t={rec.t:4d}  episode {rec.episode}  {rec.ev:<6} word {rec.word}")
    print()
    for summary in result.report.episodes:
        if summary.start >= 400:
            print(
                f"episode {summary.episode}: trigger {summary.trigger_word}, "
                f"span [{summary.start}, {summary.end}], fired {summary.fired_words}, "
                f"cpu enables after trigger: {summary.cpu_enables_after_trigger}"
            )


if __name__ == "__main__":
    main()
