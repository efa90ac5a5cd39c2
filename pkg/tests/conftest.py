ACCEPTANCE_MODULE = "test_acceptance"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    rows = []
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if ACCEPTANCE_MODULE in nodeid and getattr(rep, "when", "call") == "call":
                rows.append((nodeid.split("::")[-1], label))
    if not rows:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, label in sorted(rows):
        terminalreporter.write_line(f"{label}  {name}")
