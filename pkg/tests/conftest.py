import pytest

_KEY = pytest.StashKey[dict]()


@pytest.fixture
def record(request):
    """Store an acceptance verdict for the end-of-run summary."""
    store = request.config.stash.setdefault(_KEY, {})

    def _record(k, ok, detail):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        store[k] = line
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_KEY, {})
    if store:
        terminalreporter.section("acceptance criteria")
        for k in sorted(store):
            terminalreporter.write_line(store[k])
