import pytest

ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record one acceptance outcome; the summary prints them in order."""
    store = request.config.stash.setdefault(ACCEPTANCE, {})

    def record(key, title, passed, detail):
        store[key] = (title, bool(passed), detail)
        print(f"[{'PASS' if passed else 'FAIL'}] {key}. {title}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(ACCEPTANCE, None)
    if not store:
        return
    terminalreporter.section("acceptance criteria")

    def order(key):
        num = "".join(ch for ch in key if ch.isdigit())
        return int(num), key

    for key in sorted(store, key=order):
        title, passed, detail = store[key]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {key:>4}. {title}: {detail}")
