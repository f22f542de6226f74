"""Runs every acceptance criterion at its stated tolerance and prints one line each."""

import pytest

from supcusp.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number, seed=0)
    print(res.line())
    assert res.passed, res.detail


def test_summary(capsys):
    lines = []
    for number in sorted(CRITERIA):
        lines.append(run_criterion(number, seed=1).line())
    with capsys.disabled():
        print()
        print("\n".join(lines))
    assert all(line.startswith("[PASS]") for line in lines)
