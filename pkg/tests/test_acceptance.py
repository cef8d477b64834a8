"""The fourteen acceptance criteria, one test each, at their stated tolerances.

Each test prints a PASS/FAIL line. Criteria 10 and 11 cannot hold for the
stated setups: the Lind coefficient at n has magnitude 0.8^(2^popcount(n))
and the rank is 2^popcount(n), so both statistics reduce to binary digit
counts (see the decisions ledger). They are strict xfails, so a future
pass would be flagged.
"""

import pytest

from lcahaar.acceptance import CRITERIA, run_criterion

UNATTAINABLE = {
    10: "fraction of n <= 1024 with five or more binary ones is 638/1024 = 0.623 < 0.9; "
        "Cesaro average is 0.0505 > 0.05",
    11: "fraction of n <= 4096 with rank > 8 is at most 3797/4096 = 0.927 < 0.95 for 1+s",
}


def _params():
    for number, name, _, _ in CRITERIA:
        marks = [pytest.mark.xfail(strict=True, reason=UNATTAINABLE[number])] if number in UNATTAINABLE else []
        yield pytest.param(number, id=f"{number:02d}-{name.replace(' ', '_')}", marks=marks)


@pytest.mark.parametrize("number", list(_params()))
def test_criterion(number, capsys):
    res = run_criterion(number)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
