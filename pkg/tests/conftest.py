import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

ACCEPTANCE = {}


class Criterion:
    def __init__(self):
        self.failed = []

    def check(self, cid, ok, detail=""):
        ok = bool(ok)
        ACCEPTANCE.setdefault(cid, []).append((ok, detail))
        if not ok:
            self.failed.append(f"{cid}: {detail}")
        return ok

    def verify(self):
        assert not self.failed, "; ".join(self.failed)


@pytest.fixture
def criterion():
    return Criterion()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=int):
        checks = ACCEPTANCE[cid]
        status = "PASS" if all(ok for ok, _ in checks) else "FAIL"
        bad = [d for ok, d in checks if not ok]
        note = f" ({len(bad)}/{len(checks)} checks failed: {'; '.join(bad)})" if bad else f" ({len(checks)} checks)"
        terminalreporter.write_line(f"[{status}] criterion {cid}{note}")
