from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

_ACCEPTANCE = []


class AcceptanceRecorder:
    def __init__(self):
        self.lines = _ACCEPTANCE

    def record(self, cid, title, passed, detail, seconds):
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] criterion {cid:>2}: {title} | {detail} | {seconds:.2f}s"
        self.lines.append(line)
        print(line)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceRecorder()


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIOS


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
        terminalreporter.write_line(line)


@pytest.fixture
def run_cli(tmp_path, capsys):
    from mildflow.cli import main

    def run(*argv):
        code = main([str(a) for a in argv])
        out = capsys.readouterr()
        return code, out.out, out.err

    return run

