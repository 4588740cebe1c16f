ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        res = ACCEPTANCE_RESULTS[number]
        status = "PASS" if res.passed else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {number:2d} {status}: {res.title} ({res.elapsed:.2f} s)")
