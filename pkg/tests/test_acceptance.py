"""Acceptance criteria 1-10, one verification suite each.

Each test prints a single line `criterion N: PASS|FAIL <suite> (...)` and asserts
on the suite outcome, listing failing assertions with their observed values.
"""

import os

import pytest

from emdenfowler.verification import run_suite

CRITERIA = [
    (1, "exact", "exact-solution regression"),
    (2, "regimes", "regime-boundary matrix"),
    (3, "blowup", "finite-time blow-up"),
    (4, "energy", "energy monotonicity"),
    (5, "pohozaev", "Pohozaev identity"),
    (6, "shooting", "nodal shooting"),
    (7, "gluing", "gluing of entire profiles"),
    (8, "geometry", "isoparametric identities"),
    (9, "tables", "level-set table equivalence"),
    (10, "hypotheses", "hypothesis checker"),
]


def _kwargs(suite):
    if suite == "regimes":
        return {"jobs": os.cpu_count() or 1}
    if suite == "geometry":
        return {"seed": 0, "n": 1000}
    return {}


@pytest.mark.parametrize("number,suite,title", CRITERIA, ids=[f"criterion_{c[0]}_{c[1]}" for c in CRITERIA])
def test_criterion(number, suite, title, capsys):
    res = run_suite(suite, **_kwargs(suite))
    failing = [a for a in res.assertions if not a.passed]
    status = "PASS" if res.passed else "FAIL"
    with capsys.disabled():
        print(f"\ncriterion {number}: {status} {suite} ({title}; "
              f"{len(res.assertions) - len(failing)}/{len(res.assertions)} assertions, {res.seconds:.2f} s)")
    assert res.assertions, f"suite {suite} produced no assertions"
    assert not failing, "; ".join(f"{a.name}: {a.observed}" for a in failing)
