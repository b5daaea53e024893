_criterion_results = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if name.startswith("test_criterion_") and report.when == "call":
        _criterion_results[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_criterion_results):
        number = int(name.split("_")[2])
        label = name.split("_", 3)[-1].replace("_", " ")
        terminalreporter.write_line(f"criterion {number:2d} [{label}]: {_criterion_results[name]}")
