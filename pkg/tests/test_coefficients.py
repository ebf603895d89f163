import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenfowler.coefficients import (DomainError, PowerDifference, PowerLaw, PowerMinusLinear, PurePower,
                                      SinhRatio, SinRatio, check_hypotheses, gamma_limit, rho_eval)


def test_power_law_gamma_equals_theta():
    for th in (0.5, 1.0, 2.0, 3.5):
        assert gamma_limit(PowerLaw(th)) == pytest.approx(th, rel=1e-9)


def test_rho_is_power():
    fam = PowerLaw(2.0)
    assert rho_eval(fam, 3.0) == pytest.approx(9.0, rel=1e-12)


def test_sin_ratio_domain():
    lo, hi = SinRatio(2.0, 0.0).domain
    assert lo == 0.0 and hi == pytest.approx(math.pi)


def test_pure_power_rejects_linear():
    with pytest.raises(ValueError):
        PurePower(1.0, 1.0)
    with pytest.raises(ValueError):
        PurePower(0.0, 3.0)


def test_power_minus_linear_zero_at_one():
    nl = PowerMinusLinear(2.0, 3.0)
    assert nl.f(1.0) == pytest.approx(0.0, abs=1e-15)
    assert nl.f(-1.0) == pytest.approx(0.0, abs=1e-15)


def test_hypotheses_power_law():
    rep = check_hypotheses(PowerLaw(2.0), PurePower(1.0, 3.0))
    assert rep.all_pass
    assert rep.N == pytest.approx(1 / 3, abs=1e-9)


def test_theta_zero_fails_only_q1():
    rep = check_hypotheses(PowerLaw(0.0), PurePower(1.0, 3.0))
    assert rep.failing(["q1", "q2", "q3", "q4", "rho1"]) == ["q1"]


def test_sinh_family_passes():
    rep = check_hypotheses(SinhRatio(1.5, 0.5), PowerMinusLinear(1.0, 3.0))
    assert rep.all_pass


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-50, 50, allow_nan=False), lam=st.floats(0.1, 10), p=st.floats(1.1, 7))
def test_pure_power_odd(t, lam, p):
    nl = PurePower(lam, p)
    assert nl.f(-t) == -nl.f(t)


@settings(max_examples=30, deadline=None)
@given(t=st.floats(-5, 5, allow_nan=False), lam=st.floats(0.1, 10), p=st.floats(1.5, 5))
def test_primitive_derivative(t, lam, p):
    nl = PowerMinusLinear(lam, p)
    h = 1e-6
    num = (float(nl.F(t + h)) - float(nl.F(t - h))) / (2 * h)
    assert num == pytest.approx(nl.f(t), rel=1e-5, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-4, 4, allow_nan=False))
def test_power_difference_primitive(t):
    nl = PowerDifference(2.0, 0.5, 3.0, 1.5)
    h = 1e-6
    num = (float(nl.F(t + h)) - float(nl.F(t - h))) / (2 * h)
    assert num == pytest.approx(nl.f(t), rel=1e-5, abs=1e-6)


def test_domain_error_is_value_error():
    assert issubclass(DomainError, ValueError)
