"""Runs all ten acceptance criteria; one pass/fail line is printed per criterion."""

import pytest

from cubulate import acceptance


@pytest.fixture(scope="module", autouse=True)
def summary():
    lines = []
    yield lines
    print("\nacceptance summary")
    for line in lines:
        print(line)


@pytest.mark.parametrize("number", range(1, len(acceptance.CRITERIA) + 1))
def test_criterion(number, summary, capsys):
    res = acceptance.run_one(number, seed=0, radius=8)
    summary.append(res.line())
    with capsys.disabled():
        print("\n" + res.line(), res.details)
    assert res.ok, res.details
