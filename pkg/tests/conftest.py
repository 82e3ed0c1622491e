import pytest


@pytest.fixture
def report(capfd):
    """Print one ACCEPTANCE line per criterion, bypassing output capture so
    the line is visible in any pytest run mode, then assert the outcome."""

    def _report(n, ok, detail):
        line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} — {detail}"
        with capfd.disabled():
            print(line, flush=True)
        assert ok, f"acceptance criterion {n} failed: {detail}"

    return _report
