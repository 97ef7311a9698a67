from __future__ import annotations

from collections import defaultdict

import pytest

# criterion number -> [(part, passed, detail)]
_RESULTS: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)
_TITLES: dict[int, str] = {}


class CriterionRecorder:
    def __init__(self, number: int, title: str) -> None:
        self.number = number
        _TITLES[number] = title

    def part(self, name: str, ok: bool, detail: str = "") -> bool:
        _RESULTS[self.number].append((name, bool(ok), detail))
        print(f"criterion {self.number} [{name}] {'ok' if ok else 'failed'} {detail}".rstrip())
        return bool(ok)


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not _TITLES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_TITLES):
        parts = _RESULTS.get(n, [])
        ok = bool(parts) and all(p[1] for p in parts)
        failed = [f"{name} ({detail})" if detail else name for name, good, detail in parts if not good]
        tail = _TITLES[n] if ok else f"{_TITLES[n]}; failed: {'; '.join(failed) or 'not run'}"
        terminalreporter.write_line(f"CRITERION {n} {'PASS' if ok else 'FAIL'}: {tail}")
