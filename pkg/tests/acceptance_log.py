"""Collects one PASS/FAIL line per acceptance criterion for the summary."""

LINES: list[str] = []


def report(name: str, passed: bool, detail: str = "") -> bool:
    line = f"{'PASS' if passed else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    LINES.append(line)
    print(line)
    return passed
