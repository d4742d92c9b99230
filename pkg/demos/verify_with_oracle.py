#!/usr/bin/env python3
"""Cross-check a run with the brute-force oracle, then tamper with it.

The oracle never reuses fabric code: it rescans the raw enable/done
records to recount window coincidences, applies the threshold to
predict the learned set, and expands the expected replay episode word
by word. Deleting a single learned record from the trace is enough for
verification to name the missing pair.
"""

from memfabric import (
    count_detections,
    episode_subtrace,
    parse_scenario,
    predict_learned,
    predict_timeline,
    run_scenario,
    shift_entries,
    verify_run,
)

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

    counts = count_detections(result.records, scenario.config)
    predicted = predict_learned(counts, scenario.config.threshold)
    actual = result.simulation.fabric.learned_set()
    print(f"recounted detections:   {dict(sorted(counts.items()))}")
    print(f"oracle predicts learned: {sorted(predicted)}")
    print(f"fabric reports learned:  {sorted(actual)}")
    assert predicted == actual

    timeline = shift_entries(predict_timeline(actual, set(), 1, scenario.config), 500)
    observed = episode_subtrace(result.records, 0)
    print(f"\npredicted probe episode matches the trace: {observed == timeline}")
    for entry in timeline:
        print(f"  t={entry.tick:4d}  {entry.kind:<6} word {entry.word}")

    print(f"\nfull verification problems: {verify_run(scenario, result.records)}")

    tampered = [rec for rec in result.records if not (rec.ev == "learned" and rec.pair == (1, 3))]
    problems = verify_run(scenario, tampered)
    print(f"after deleting one learned record: {problems[0]}")


if __name__ == "__main__":
    main()
