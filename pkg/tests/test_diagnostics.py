import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenfowler.coefficients import PowerLaw, PurePower
from emdenfowler.diagnostics import (PohozaevNotApplicable, classify, energy, pohozaev_residual,
                                     predict_class)
from emdenfowler.singular_ivp import SingularIVP, integrate


def test_predict_class_boundary():
    assert predict_class(1.0, 1.0, 3.0) != predict_class(3.0, 1.0, 3.0)


def test_classify_exact_solution_is_monotone():
    tr = integrate(SingularIVP(PowerLaw(2.0), PurePower(1.0, 5.0), "minus", 1.0, 200.0))
    rep = classify(tr)
    assert rep.zero_count == 0 and rep.agreement


def test_classify_oscillatory():
    tr = integrate(SingularIVP(PowerLaw(1.0), PurePower(1.0, 3.0), "minus", 1.0, 200.0))
    rep = classify(tr)
    assert rep.zero_count >= 3 and rep.agreement


def test_pohozaev_small():
    tr = integrate(SingularIVP(PowerLaw(1.0), PurePower(1.0, 3.0), "minus", 1.0, 50.0), rtol=1e-12, atol=1e-14)
    rep = pohozaev_residual(tr, 1.0, 1.0, 3.0)
    assert rep.max_residual < 1e-6


def test_pohozaev_not_applicable_for_plus_sign():
    tr = integrate(SingularIVP(PowerLaw(1.0), PurePower(1.0, 3.0), "plus", 0.5, 1.0))
    with pytest.raises(PohozaevNotApplicable):
        pohozaev_residual(tr, 1.0, 1.0, 3.0)


@settings(max_examples=8, deadline=None)
@given(a=st.floats(0.3, 2.0), th=st.sampled_from([0.5, 1.0, 2.0, 4.0]), p=st.sampled_from([2.0, 3.0, 5.0]))
def test_energy_nonincreasing(a, th, p):
    nl = PurePower(1.0, p)
    tr = integrate(SingularIVP(PowerLaw(th), nl, "minus", a, 60.0))
    rep = energy(tr, nl, "minus")
    assert rep.drift_per_unit_r <= 1e-9
    assert np.all(np.isfinite(rep.E))
