import shutil
from pathlib import Path

import pytest

from luxdbg import Debugger

REPO_ROOT = Path(__file__).resolve().parent.parent
IMAGES = REPO_ROOT / "images"
LIB = REPO_ROOT / "lib"
GOLDEN = REPO_ROOT / "golden"
TESTS = REPO_ROOT / "tests"


class Harness:
    """A kernel plus captured stdout/event-log for assertions."""

    def __init__(self):
        self.stdout: list[str] = []
        self.events: list[dict] = []
        self.log_lines: list[str] = []

        class _Log:
            def write(_self, line):
                self.log_lines.append(line)

        self.kernel = Debugger(stdout_write=self.stdout.append, log_sink=_Log())
        self.kernel.event_listeners.append(self.events.append)

    def eval(self, text: str) -> str:
        return self.kernel.eval_command(text)

    def text(self) -> str:
        return "".join(self.stdout)

    def core(self, name: str):
        return self.kernel.cores[name]


@pytest.fixture
def dbg():
    return Harness()


@pytest.fixture
def image_path():
    def lookup(name: str) -> str:
        return str(IMAGES / f"{name}.img.json")

    return lookup


@pytest.fixture
def lib_path():
    def lookup(name: str) -> str:
        return str(LIB / f"{name}.lx")

    return lookup


@pytest.fixture
def script_tree(tmp_path):
    """Copy of the shipped script tree (lib/tests/images/golden) for harness runs."""
    for sub in ("lib", "images", "golden"):
        shutil.copytree(REPO_ROOT / sub, tmp_path / sub)
    (tmp_path / "tests").mkdir()
    for f in TESTS.glob("*.lx"):
        shutil.copy(f, tmp_path / "tests" / f.name)
    return tmp_path