"""The twelve acceptance criteria at their stated tolerances.

The full battery runs once per module; each criterion prints one
``[PASS]``/``[FAIL]`` line and asserts its own flag.
"""

import pytest

from cdgarch.validation import _NAMES, Battery

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def battery():
    bat = Battery(suite="full")
    bat.warm_up()
    return bat


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(number, battery, capsys):
    res = getattr(battery, _NAMES[number])()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.summary
