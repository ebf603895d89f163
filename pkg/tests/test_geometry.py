import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emdenfowler import geometry as G
from emdenfowler.tables import fixture_rows


def test_metric_signs():
    assert list(G.metric_signs(5, 2)) == [-1, -1, 1, 1, 1]


def test_laplacian_sign_calibration():
    assert G.calibrate_sign() == 1.0


def test_pseudosphere_samples(rng):
    spec = G.PSQuadratic(m=5, s=1, k1=3, k2=3)
    z = G.sample_points(spec, 200, rng)
    assert np.allclose(G.inner(z, z, 1), 1.0, atol=1e-12)


@pytest.mark.parametrize("spec", G.default_specs(), ids=lambda s: s.label())
def test_gradient_norm_identity(spec, rng):
    z = G.sample_points(spec, 200, rng)
    for zi in z:
        t = float(spec.phi(zi))
        g = G.tangential_grad(spec, zi)
        gg = float(G.inner(g, g, spec.s))
        assert abs(gg - float(spec.b(t))) <= 1e-12 * max(1.0, float(np.sum(g * g)), abs(float(spec.b(t))))


@pytest.mark.parametrize("spec", [s for s in G.default_specs() if s.polynomial_degree], ids=lambda s: s.label())
def test_euler_identity(spec, rng):
    z = G.sample_points(spec, 200, rng)
    assert np.max(G.euler_check(spec, z)) <= 1e-12


def test_laplacian_identity_converges(rng):
    spec = G.PSQuadratic(m=5, s=1, k1=3, k2=3)
    z = G.sample_points(spec, 1, rng)[0]
    hs = [1e-2, 5e-3, 2.5e-3]
    errs = [G.identity_residuals(spec, z, h).laplacian_residual for h in hs]
    orders = [o for o in G.convergence_orders(hs, errs) if o is not None]
    assert all(o >= 1.8 for o in orders)


def test_convergence_orders_floor():
    assert G.convergence_orders([1, 0.5], [1e-12, 1e-13]) == [None]
    assert G.convergence_orders([1, 0.5], [4e-2, 1e-2])[0] == pytest.approx(2.0)


def test_clifford_data_unsupported():
    spec = G.PSCliffordData(m=7, s=1, k=4, n_c=2)
    with pytest.raises(G.UnsupportedVariant):
        spec.phi(np.zeros(spec.dim))


def test_image_types():
    assert G.image_type(G.PSQuadratic(m=5, s=1, k1=3, k2=3)) == "P2"
    lo, hi = G.image(G.PSQuadratic(m=5, s=1, k1=3, k2=3))
    assert lo == -1.0 and math.isinf(hi)


@pytest.mark.parametrize("row", fixture_rows(), ids=lambda r: None)
def test_table_row(row):
    spec, c, expected, tag = row
    got = G.classify_level_set(spec, c)
    assert str(got) == expected and got.tag == tag


@settings(max_examples=40, deadline=None)
@given(c=st.floats(-0.99, 0.99), t0=st.floats(-3, 3), seed=st.integers(0, 2 ** 16))
def test_ps_quadratic_membership(c, t0, seed):
    spec = G.PSQuadratic(m=5, s=1, k1=3, k2=3)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(2)
    x *= math.sqrt((1 - c) / 2 + t0 * t0) / np.linalg.norm(x)
    v = rng.standard_normal(3)
    v *= math.sqrt((1 + c) / 2) / np.linalg.norm(v)
    z = np.concatenate([[t0], x, v])
    assert float(G.inner(z, z, 1)) == pytest.approx(1.0, abs=1e-12)
    assert float(spec.phi(z)) == pytest.approx(c, abs=1e-12)
    assert G.level_set_membership(spec, c, z) < 1e-11
