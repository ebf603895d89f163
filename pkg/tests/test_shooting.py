import math

import numpy as np
import pytest

from emdenfowler.shooting import (CompactProblem, NotFoundInRange, ShootingError, assemble, constant_solution,
                                  integrate_compact_half, reflection_defect, shoot_k_nodal)


@pytest.fixture(scope="module")
def problem():
    return CompactProblem(1, 4, 0, 0, 40.0, 2.0)


@pytest.fixture(scope="module")
def one_nodal(problem):
    return shoot_k_nodal(problem, 1)


def test_problem_validation():
    with pytest.raises(ValueError):
        CompactProblem(5, 4, 0, 0, 1.0, 2.0)
    with pytest.raises(ValueError):
        CompactProblem(1, 4, 0, 0, -1.0, 2.0)
    with pytest.raises(ValueError):
        CompactProblem(2, 5, 1, 1, 1.0, 2.0)


def test_derived_quantities():
    pr = CompactProblem(2, 5, 1, 3, 10.0, 1.5)
    assert pr.alpha == pytest.approx(2.0)
    assert pr.beta == pytest.approx(1.0)
    assert pr.Lambda == pytest.approx(2.5)


def test_bounds(problem):
    assert problem.nodal_bound == pytest.approx(3.0)
    assert problem.kzero_bound == pytest.approx(5 / 3)
    assert problem.subcritical_nodal and not problem.subcritical_kzero


def test_constant_half():
    pr = CompactProblem(1, 4, 0, 0, 40.0, 2.0)
    h = integrate_compact_half(pr, "zero", 1.0)
    assert h.w == pytest.approx(1.0) and h.wp == pytest.approx(0.0, abs=1e-14)
    sol = constant_solution(pr)
    assert sol.zero_count == 0


def test_one_nodal(one_nodal):
    s = one_nodal
    assert s.zero_count == 1 and s.d > 1 and s.e < -1
    assert max(abs(x) for x in s.defect) < 1e-8
    assert s.min_abs_at_critical > 1e-8
    assert len(s.zeros()) == 1 and 0 < s.zeros()[0] < math.pi
    assert "warning" in s.flags


def test_reassembly_matches(one_nodal, problem):
    again = assemble(problem, one_nodal.d, one_nodal.e)
    r = np.linspace(0.1, math.pi - 0.1, 50)
    assert np.allclose(again(r)[0], one_nodal(r)[0], atol=1e-9)


def test_reflection_symmetry(one_nodal):
    # f is odd and beta = 0, so -w is also a solution
    assert reflection_defect(one_nodal) < 1e-8


def test_supercritical_gate():
    with pytest.raises(ShootingError):
        shoot_k_nodal(CompactProblem(1, 4, 0, 0, 40.0, 3.5), 1)


def test_not_found_reports_bracket(problem):
    with pytest.raises(NotFoundInRange) as exc:
        shoot_k_nodal(problem, 3, d_range=(1.0, 2.0), n_lattice=20)
    assert tuple(exc.value.bracket) == (1.0, 2.0)


def test_as_dict_is_plain(one_nodal):
    d = one_nodal.as_dict()
    assert d["k"] == 1 and d["d"] == one_nodal.d
