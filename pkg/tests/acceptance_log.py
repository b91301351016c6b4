"""Collects one PASS/FAIL line per acceptance criterion."""

LINES: list[str] = []


def record(label: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'}  {label:<34} {detail}"
    LINES.append(line)
    print(line)
    return ok
