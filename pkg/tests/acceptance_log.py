"""Collects one status line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(ac: str, correct: bool, seconds: float, limit: float, detail: str) -> None:
    status = "PASS" if correct and seconds < limit else "FAIL"
    line = (f"{ac} {status}  result={'exact' if correct else 'WRONG'}  "
            f"time={seconds:.2f}s (limit {limit:g}s)  {detail}")
    LINES.append(line)
    print(line)
    assert correct, line
    assert seconds < limit, line
