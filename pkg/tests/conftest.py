import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from relseq.model import load_schema

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

SIR = "(Any(Tested(Sensitive,Resistant,Intermediate),Not-tested))"
BUGS = "(Bacteria(Gram-neg(Gammaproteobacteria(E-coli,Klebsiella)),Gram-pos(Staph)))"
DRUGS = "(Drug(J01(J01C,J01D),L01))"
ID = "(Any(=,≠))"

CLINIC_SCHEMA = """\
# bugs, treatments and susceptibility outcomes
taxonomy SIR sir.tax
taxonomy NewB bugs.tax
taxonomy NewT drugs.tax
taxonomy ID id.tax
eventtype B NewB
eventtype T NewT
reltype B T SIR
reltype T T ID
"""

CLINIC_TAXONOMIES = {"sir.tax": SIR, "bugs.tax": BUGS, "drugs.tax": DRUGS, "id.tax": ID}


@pytest.fixture
def clinic():
    return load_schema(CLINIC_SCHEMA, taxonomy_texts=CLINIC_TAXONOMIES)


@pytest.fixture
def plain():
    """Types a, b, c with no taxonomies at all."""
    return load_schema("eventtype a\neventtype b\neventtype c\n")


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(criterion: int, ok: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
