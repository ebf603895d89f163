import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenfowler.coefficients import PowerLaw, PowerMinusLinear, PurePower, SinhRatio
from emdenfowler.singular_ivp import HypothesisViolation, SingularIVP, integrate


def test_exact_solution():
    tr = integrate(SingularIVP(PowerLaw(2.0), PurePower(1.0, 5.0), "minus", 1.0, 10.0))
    r = np.linspace(0, 10, 501)
    assert np.max(np.abs(tr(r)[0] - (1 + r * r / 3) ** -0.5)) < 1e-6


def test_scaling_of_exact_solution():
    # w_a(r) = a w_1(a^2 r) for the critical power
    a = 0.5
    tr = integrate(SingularIVP(PowerLaw(2.0), PurePower(1.0, 5.0), "minus", a, 10.0))
    r = np.linspace(0, 10, 201)
    assert np.max(np.abs(tr(r)[0] - a * (1 + (a * a * r) ** 2 / 3) ** -0.5)) < 1e-6


def test_second_derivative_at_origin():
    th, a = 2.0, 0.7
    tr = integrate(SingularIVP(PowerLaw(th), PurePower(1.0, 3.0), "minus", a, 5.0))
    wpp = tr(np.array([1e-6]), derivative=1)[1][0]
    assert wpp == pytest.approx(-a ** 3 / (1 + th), rel=1e-5)


def test_negative_lambda_blows_up():
    tr = integrate(SingularIVP(PowerLaw(1.0), PurePower(-1.0, 3.0), "minus", 0.5, 200.0))
    assert tr.termination.kind == "BlowUp"
    assert tr.termination.R_est == pytest.approx(tr.termination.r_stop, rel=1e-6)


def test_stationary_start():
    tr = integrate(SingularIVP(SinhRatio(1.5, 0.5), PowerMinusLinear(1.0, 3.0), "plus", 1.0, 10.0))
    assert np.all(tr.w == 1.0) and tr.termination.kind == "ReachedEnd"


def test_theta_zero_is_regular_and_runs():
    # q = 0 is not singular, so the singular-start hypotheses on q are not required
    tr = integrate(SingularIVP(PowerLaw(0.0), PurePower(1.0, 3.0), "minus", 1.0, 10.0))
    assert tr.termination.kind == "ReachedEnd"


def test_hypothesis_violation(monkeypatch):
    import emdenfowler.singular_ivp as mod
    from emdenfowler.coefficients import check_hypotheses
    bad = check_hypotheses(PowerLaw(0.0), PurePower(1.0, 3.0))
    monkeypatch.setattr(mod, "cached_hypotheses", lambda fam, nl: bad)
    with pytest.raises(HypothesisViolation) as exc:
        integrate(SingularIVP(PowerLaw(2.0), PurePower(1.0, 3.0), "minus", 1.0, 10.0))
    assert exc.value.names == ["q1"]


def test_negative_lambda_is_canonicalized():
    prob = SingularIVP(PowerLaw(2.0), PurePower(-1.0, 3.0), "plus", 1.0, 10.0)
    assert prob.canonical().sign == "minus" and prob.canonical().nl.Lambda == 1.0


def test_bad_sign():
    with pytest.raises(ValueError):
        SingularIVP(PowerLaw(1.0), PurePower(1.0, 3.0), "up", 1.0)


@settings(max_examples=10, deadline=None)
@given(a=st.floats(0.2, 3.0), th=st.sampled_from([1.0, 2.0, 3.0]))
def test_dense_output_matches_nodes(a, th):
    tr = integrate(SingularIVP(PowerLaw(th), PurePower(1.0, 3.0), "minus", a, 20.0))
    w, wp = tr(tr.r[1:])
    assert np.allclose(w, tr.w[1:], rtol=0, atol=1e-12)
    assert np.allclose(wp, tr.wp[1:], rtol=0, atol=1e-12)


@settings(max_examples=10, deadline=None)
@given(a=st.floats(0.2, 3.0))
def test_odd_symmetry(a):
    prob = lambda x: SingularIVP(PowerLaw(2.0), PurePower(1.0, 3.0), "minus", x, 20.0)
    r = np.linspace(0, 20, 101)
    assert np.allclose(integrate(prob(-a))(r)[0], -integrate(prob(a))(r)[0], atol=1e-8)
