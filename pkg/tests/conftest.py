import dataclasses

import pytest
from hypothesis import settings

from densimean import numtheory as nt
from densimean.cache import ENV_VAR

settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    """Keep every test away from the user's factor cache."""
    path = tmp_path / "factors.jsonl"
    monkeypatch.setenv(ENV_VAR, str(path))
    return path


@pytest.fixture
def restore_limits():
    saved = dataclasses.replace(nt.limits)
    yield nt.limits
    nt.configure(**dataclasses.asdict(saved))


_VERDICTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_VERDICTS] = []


@pytest.fixture
def verdict(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[_VERDICTS]

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"C{number:02d} {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
