"""Acceptance criteria A1-A13 at their stated tolerances.

Each test prints a single ``PASS``/``FAIL`` line (also visible without ``-s``).
Run directly with ``python tests/test_acceptance.py`` for the bare table.
"""
import sys

import pytest

from rmtlab import checks

SLOW = {"A4", "A9"}


def _param(name):
    marks = [pytest.mark.slow] if name in SLOW else []
    return pytest.param(name, marks=marks, id=name)


@pytest.mark.parametrize("name", [_param(n) for n in checks.ACCEPTANCE])
def test_acceptance(name, capsys):
    res = checks.run_checks([name], seed=7)[0]
    with capsys.disabled():
        sys.stdout.write(f"\n{res.line()}\n")
    assert res.passed, res.detail


if __name__ == "__main__":
    results = checks.run_checks(["acceptance"], seed=7)
    print(checks.format_table(results))
    sys.exit(0 if all(r.passed for r in results) else 1)
