"""Every acceptance criterion at its stated limit; one PASS/FAIL line each."""

from __future__ import annotations

import json

import pytest

from groupwl.acceptance import CRITERIA, run_criterion

RESULTS: list[str] = []


@pytest.mark.parametrize("tag", list(CRITERIA), ids=[f"{CRITERIA[t][0]}-{t}" for t in CRITERIA])
def test_criterion(tag):
    res = run_criterion(tag, threads=None)
    line = res.line()
    RESULTS.append(line)
    print(line)
    print(json.dumps(res.details, default=str, sort_keys=True)[:2000])
    assert res.ok, res.details
    assert res.seconds <= res.limit, f"{res.seconds:.1f}s exceeds {res.limit}s"
