import bisect

import pytest

from gsat import available_backends

BACKENDS = available_backends()

_acceptance_lines = []


def record_acceptance(number, title, passed, detail=""):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title}" + (f" -- {detail}" if detail else "")
    _acceptance_lines.append((number, line))
    print(line, flush=True)
    return passed


@pytest.fixture
def acceptance():
    return record_acceptance


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines, key=lambda x: x[0]):
        terminalreporter.write_line(line)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


class SortedMapOracle:
    """Reference ordered map: tombstoned keys read as absent."""

    def __init__(self, keys=(), values=None):
        keys = list(keys)
        values = list(values) if values is not None else keys
        self.d = dict(zip(keys, values))
        self.keys = sorted(self.d)

    def get(self, k):
        return self.d.get(k)

    def insert(self, k, v):
        if k not in self.d:
            self.d[k] = v
            bisect.insort(self.keys, k)

    def delete(self, k):
        if k in self.d:
            del self.d[k]
            self.keys.pop(bisect.bisect_left(self.keys, k))

    def items(self):
        return [(k, self.d[k]) for k in self.keys]

    def __len__(self):
        return len(self.d)


@pytest.fixture
def oracle_cls():
    return SortedMapOracle
