from contextlib import contextmanager

ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@contextmanager
def criterion(name: str):
    """Record one acceptance criterion's outcome for the terminal summary."""
    try:
        yield
    except BaseException:
        ACCEPTANCE_RESULTS.append((name, False))
        raise
    else:
        ACCEPTANCE_RESULTS.append((name, True))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {name}")


def pytest_configure(config):
    # stochastic suite: keep the property-based examples reproducible run to run
    try:
        from hypothesis import settings
        settings.register_profile("deterministic", derandomize=True)
        settings.load_profile("deterministic")
    except ImportError:
        pass
