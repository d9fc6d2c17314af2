# criterion -> (title, passed, seconds, results); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, seconds, results = ACCEPTANCE[number]
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title}  ({seconds:.1f} s)")
        for r in results:
            if not r.passed:
                tr.write_line(f"        failing check: {r.name}  residual={r.residual:.3e} tol={r.tolerance:.1e}"
                              + (f"  ({r.detail})" if r.detail else ""))
