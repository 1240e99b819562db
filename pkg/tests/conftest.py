import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coherent_oga import gen_identity_hadamard  # noqa: E402


@pytest.fixture(scope="session")
def union10():
    return gen_identity_hadamard(10)


@pytest.fixture(scope="session")
def union6():
    return gen_identity_hadamard(6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
