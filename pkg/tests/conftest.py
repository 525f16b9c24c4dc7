import configparser
from importlib import resources

import pytest


@pytest.fixture
def make_config(tmp_path):
    """Write a shipped scenario with overrides to an INI file; returns its path."""

    def make(scenario, overrides=None, name="cfg.ini"):
        p = configparser.ConfigParser(inline_comment_prefixes=("#", ";;"))
        p.read_string(resources.files("rydress").joinpath("configs", f"{scenario}.ini").read_text())
        for (section, key), val in (overrides or {}).items():
            if not p.has_section(section):
                p.add_section(section)
            if val is None:
                p.remove_option(section, key)
            else:
                p.set(section, key, str(val))
        path = tmp_path / name
        with open(path, "w") as fh:
            p.write(fh)
        return str(path)

    return make


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the summary prints all of them after the run."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def record(number, title, ok, detail=""):
        line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
