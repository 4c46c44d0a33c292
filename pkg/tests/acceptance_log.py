"""Collects one summary line per acceptance criterion for the terminal report."""

LINES: list[str] = []


def record(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    LINES.append(line)
    print(line)
