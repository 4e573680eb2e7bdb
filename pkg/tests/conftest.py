import os
import sys
from collections import defaultdict

import pytest

sys.path.insert(0, os.path.dirname(__file__))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            item.user_properties.append(("criterion", (m.args[0], m.args[1])))


def pytest_terminal_summary(terminalreporter):
    results: dict[tuple[int, str], list[tuple[str, str]]] = defaultdict(list)
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            for key, value in getattr(rep, "user_properties", ()):
                if key == "criterion" and (rep.when == "call" or rep.outcome != "passed"):
                    results[value].append((rep.nodeid.split("::")[-1], rep.outcome))
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), runs in sorted(results.items()):
        failed = [name for name, o in runs if o != "passed"]
        status = "FAIL" if failed else "PASS"
        extra = f"  (failing: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {n}: {status}  {title}{extra}")


@pytest.fixture(scope="session")
def compiled():
    """Memoized compile_program over bundled benchmarks."""
    from revc import bench
    from revc.evaluator import SizeLimitExceeded, compile_program

    cache = {}

    def get(label: str, mode: str = "default", cleanup: str = "lazy"):
        key = (label, mode, cleanup)
        if key not in cache:
            try:
                cache[key] = compile_program(bench.get(label).term(), mode=mode, cleanup=cleanup)
            except SizeLimitExceeded:
                cache[key] = None
        return cache[key]

    return get
