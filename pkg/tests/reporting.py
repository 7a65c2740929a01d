"""Collects one pass/fail line per acceptance criterion."""

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, passed: bool, detail: str) -> None:
    """Print one acceptance line and keep it for the terminal summary."""
    line = f"ACCEPTANCE {'PASS' if passed else 'FAIL'} | {name} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
