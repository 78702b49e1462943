import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.diagnostics.fixtures import FIXTURES, run_fixture


def print_verdict_table() -> bool:
    print("\n" + "=" * 60)
    print("  REFERENCE VERDICT TABLE")
    print("=" * 60 + "\n")

    names = list(FIXTURES)
    all_match = True
    for k, name in enumerate(names, start=1):
        print(f"[{k}/{len(names)}] {name}: {FIXTURES[name].description}")
        try:
            outcomes = run_fixture(name)
        except Exception as e:
            print(f"✗ Fixture failed to run: {e}\n")
            all_match = False
            continue

        for o in outcomes:
            mark = "✓" if o.matches else "✗"
            delta = "" if o.delta is None else f" (δ={o.delta:g})"
            print(f"  {mark} {o.condition_id.value}{delta}: expected {o.expected.value}, observed {o.observed.value}")
            all_match = all_match and o.matches
        print()

    print("=" * 60)
    print("  ALL VERDICTS MATCH" if all_match else "  VERDICT MISMATCHES FOUND")
    print("=" * 60 + "\n")
    return all_match


if __name__ == "__main__":
    success = print_verdict_table()
    sys.exit(0 if success else 1)
