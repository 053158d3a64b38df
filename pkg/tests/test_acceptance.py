"""Acceptance gate: one test per shipped criterion.

Each test runs the corresponding check from qmcs.validate, prints a single
PASS/FAIL line with the measured details, and asserts the result.  The
checks are deterministic (fixed seeds), so failures are reproducible.
"""

import time

import pytest

from qmcs.validate import CRITERIA

_BY_ID = {cid: (name, fn) for cid, name, fn in CRITERIA}


@pytest.mark.parametrize("cid", sorted(_BY_ID), ids=[
    f"criterion_{cid:02d}" for cid in sorted(_BY_ID)])
def test_criterion(cid, capsys):
    name, fn = _BY_ID[cid]
    start = time.time()
    passed, details = fn()
    verdict = "PASS" if passed else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {cid:2d} [{verdict}] {name} "
              f"({time.time() - start:.1f}s): {details}")
    assert passed, f"criterion {cid} ({name}) failed: {details}"
