"""Collects one summary line per acceptance criterion for the terminal report."""
RESULTS = []


def record(number, title, ok, detail, seconds):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail} | {seconds:.1f}s"
    RESULTS.append(line)
    print(line)
    return ok
