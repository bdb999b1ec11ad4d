from __future__ import annotations

# filled by tests/test_acceptance.py: id -> (passed, seconds, note)
ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, (passed, secs, note) in sorted(ACCEPTANCE_RESULTS.items(), key=lambda kv: int(kv[0].split("-")[0])):
        line = f"criterion {cid}: {'PASS' if passed else 'FAIL'} ({secs:.1f} s)"
        if note:
            line += f"  {note}"
        terminalreporter.write_line(line)
