"""Isoparametric functions on R^m_s and S^m_s: identities, level sets and PDE composition.

Coordinates follow one convention throughout: the first s coordinates carry
metric sign -1 and the rest +1. Pseudosphere variants live in R^(m+1)_s on
the quadric <z, z> = 1. Radii of level-set factors are stored squared.

The Laplacian is evaluated as sigma * sum_i eps_i d^2/dz_i^2, with sigma
calibrated once so that a flat quadratic satisfies box phi = 2 tr A; the
same sigma is used on the pseudosphere, where the restriction of phi is
extended to the cone <z, z> > 0 as a degree-0 homogeneous function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np


class UnsupportedVariant(ValueError):
    pass


class NearBlowUp(ValueError):
    def __init__(self, level, msg):
        super().__init__(msg)
        self.level = level


def metric_signs(dim: int, s: int) -> np.ndarray:
    eps = np.ones(dim)
    eps[:s] = -1.0
    return eps


def inner(x, y, s: int):
    """<x, y> in R^N_s along the last axis."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.sum(metric_signs(x.shape[-1], s) * x * y, axis=-1)


@dataclass(frozen=True)
class AmbientPoint:
    coords: tuple
    s: int

    @property
    def z(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    @property
    def norm2(self) -> float:
        return float(inner(self.z, self.z, self.s))

    def on_pseudosphere(self, tol: float = 1e-12) -> bool:
        return abs(self.norm2 - 1.0) <= tol * max(1.0, float(np.sum(self.z ** 2)))


# ---------------------------------------------------------------------------
# variants


@dataclass(frozen=True)
class IsoparametricSpec:
    m: int
    s: int

    pseudo = False
    polynomial_degree: int | None = None
    critical_values: tuple = ()

    @property
    def dim(self) -> int:
        return self.m + 1 if self.pseudo else self.m

    @property
    def eps(self) -> np.ndarray:
        return metric_signs(self.dim, self.s)

    def phi(self, z) -> np.ndarray:
        raise NotImplementedError

    def partials(self, z) -> np.ndarray:
        raise NotImplementedError

    def grad(self, z) -> np.ndarray:
        """Metric gradient eps * dphi of the ambient (flat) function."""
        return self.eps * self.partials(z)

    def a(self, t):
        raise NotImplementedError

    def b(self, t):
        raise NotImplementedError

    def label(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class FlatLinear(IsoparametricSpec):
    """phi = 2 <a, z>; A = 0."""
    a_vec: tuple = ()
    polynomial_degree: int | None = 1

    def __post_init__(self):
        if len(self.a_vec) != self.m or not any(self.a_vec):
            raise ValueError("a_vec must be a nonzero vector of length m")

    @property
    def aa(self) -> float:
        return float(inner(self.a_vec, self.a_vec, self.s))

    def phi(self, z):
        return 2.0 * inner(z, self.a_vec, self.s)

    def partials(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(2.0 * self.eps * np.asarray(self.a_vec, dtype=float), z.shape)

    def a(self, t):
        return 0.0 * np.asarray(t, dtype=float)

    def b(self, t):
        return 4.0 * self.aa + 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class FlatQuadratic(IsoparametricSpec):
    """phi = alpha (-sum_{i<k} t_i^2 + sum_{j<n} x_j^2)."""
    alpha: float = 1.0
    k: int = 0
    n: int = 1
    polynomial_degree: int | None = 2
    critical_values: tuple = (0.0,)

    def __post_init__(self):
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")
        if not (0 <= self.k <= self.s and 0 <= self.n <= self.m - self.s and self.k + self.n >= 1):
            raise ValueError("need 0 <= k <= s, 0 <= n <= m - s, k + n >= 1")

    @property
    def diag(self) -> np.ndarray:
        d = np.zeros(self.m)
        d[:self.k] = self.alpha
        d[self.s:self.s + self.n] = self.alpha
        return d

    @property
    def trace(self) -> float:
        return self.alpha * (self.k + self.n)

    def phi(self, z):
        z = np.asarray(z, dtype=float)
        return np.sum(self.eps * self.diag * z * z, axis=-1)

    def partials(self, z):
        return 2.0 * self.eps * self.diag * np.asarray(z, dtype=float)

    def a(self, t):
        return 2.0 * self.trace + 0.0 * np.asarray(t, dtype=float)

    def b(self, t):
        return 4.0 * self.alpha * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class FlatParabolic(IsoparametricSpec):
    """phi = sum_i (t_i - eps_i x_i)^2 + 2 sum_{j<omega} x'_j.

    t_i = z[i] and x_i = z[s + i] for i < s; x'_j = z[2s + j].
    """
    epsilons: tuple = ()
    omega: int = 1

    def __post_init__(self):
        if len(self.epsilons) != self.s or any(e not in (-1, 1) for e in self.epsilons):
            raise ValueError("epsilons must be s values in {-1, +1}")
        if not 1 <= self.omega <= self.m - 2 * self.s:
            raise ValueError("need 1 <= omega <= m - 2s")

    @property
    def a_vec(self) -> np.ndarray:
        a = np.zeros(self.m)
        a[2 * self.s:2 * self.s + self.omega] = 1.0
        return a

    def _u(self, z):
        z = np.asarray(z, dtype=float)
        e = np.asarray(self.epsilons, dtype=float)
        return z[..., :self.s] - e * z[..., self.s:2 * self.s]

    def phi(self, z):
        z = np.asarray(z, dtype=float)
        return np.sum(self._u(z) ** 2, axis=-1) + 2.0 * np.sum(z[..., 2 * self.s:2 * self.s + self.omega], axis=-1)

    def partials(self, z):
        z = np.asarray(z, dtype=float)
        u = self._u(z)
        e = np.asarray(self.epsilons, dtype=float)
        out = np.zeros_like(z)
        out[..., :self.s] = 2 * u
        out[..., self.s:2 * self.s] = -2 * e * u
        out[..., 2 * self.s:2 * self.s + self.omega] = 2.0
        return out

    def a(self, t):
        return 0.0 * np.asarray(t, dtype=float)

    def b(self, t):
        return 4.0 * self.omega + 0.0 * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class _Pseudo(IsoparametricSpec):
    pseudo = True
    critical_values: tuple = (-1.0, 1.0)

    @property
    def ell(self) -> int:
        raise NotImplementedError

    @property
    def beta(self) -> float:
        raise NotImplementedError

    def a(self, t):
        t = np.asarray(t, dtype=float)
        return self.ell ** 2 * self.beta - self.ell * (self.m + self.ell - 1) * t

    def b(self, t):
        t = np.asarray(t, dtype=float)
        return self.ell ** 2 * (1.0 - t * t)


@dataclass(frozen=True)
class PSLinear(_Pseudo):
    """phi = <Q, z> restricted to S^m_s, with <Q, Q> = 1."""
    Q: tuple = ()
    polynomial_degree: int | None = 1

    def __post_init__(self):
        if len(self.Q) != self.m + 1:
            raise ValueError("Q must have m + 1 coordinates")
        if abs(float(inner(self.Q, self.Q, self.s)) - 1.0) > 1e-12:
            raise ValueError("Q must lie on the pseudosphere")

    ell = 1
    beta = 0.0

    def phi(self, z):
        return inner(z, self.Q, self.s)

    def partials(self, z):
        z = np.asarray(z, dtype=float)
        return np.broadcast_to(self.eps * np.asarray(self.Q, dtype=float), z.shape)

    def box_polynomial(self, z):
        return 0.0 * inner(z, z, self.s)


@dataclass(frozen=True)
class PSQuadratic(_Pseudo):
    """phi = <A z, z> with A = diag(-1 (k1 times), +1 (k2 times)), k1 + k2 = m + 1."""
    k1: int = 3
    k2: int = 3
    polynomial_degree: int | None = 2

    def __post_init__(self):
        if self.k1 + self.k2 != self.m + 1:
            raise ValueError("need k1 + k2 = m + 1")
        if not (self.k1 > max(self.s, 2) and self.k2 > 2):
            raise ValueError("need k1 > max(s, 2) and k2 > 2")

    ell = 2

    @property
    def beta(self) -> float:
        return (self.k2 - self.k1) / 2

    @property
    def diag(self) -> np.ndarray:
        return np.concatenate([-np.ones(self.k1), np.ones(self.k2)])

    def phi(self, z):
        z = np.asarray(z, dtype=float)
        return np.sum(self.eps * self.diag * z * z, axis=-1)

    def partials(self, z):
        return 2.0 * self.eps * self.diag * np.asarray(z, dtype=float)

    def box_polynomial(self, z):
        return 2.0 * float(np.sum(self.diag)) + 0.0 * inner(z, z, self.s)


@dataclass(frozen=True)
class PSCliffordData(IsoparametricSpec):
    """Data-only Clifford variant: l = 4, m = 2k - 1, multiplicities m1 = n_c - 1, m2 = k - n_c."""
    k: int = 2
    n_c: int = 1
    pseudo = True
    critical_values: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if self.m != 2 * self.k - 1:
            raise ValueError("need m = 2k - 1")
        if not 1 <= self.n_c <= self.k:
            raise ValueError("need 1 <= n_c <= k")

    ell = 4

    @property
    def beta(self) -> float:
        return (self.k + 1 - 2 * self.n_c) / 2

    @property
    def m1(self) -> int:
        return self.n_c - 1

    @property
    def m2(self) -> int:
        return self.k - self.n_c

    def phi(self, z):
        raise UnsupportedVariant("the Clifford variant carries data only; no pointwise evaluator")

    partials = phi

    def a(self, t):
        t = np.asarray(t, dtype=float)
        return 16 * self.beta - 4 * (self.m + 3) * t

    def b(self, t):
        t = np.asarray(t, dtype=float)
        return 16 * (1.0 - t * t)


def phi_eval(spec: IsoparametricSpec, z) -> float:
    pt = z if isinstance(z, AmbientPoint) else AmbientPoint(tuple(np.asarray(z, dtype=float)), spec.s)
    if len(pt.coords) != spec.dim:
        raise ValueError(f"expected {spec.dim} coordinates")
    return float(spec.phi(pt.z))


def image_type(spec: IsoparametricSpec) -> str | None:
    if isinstance(spec, (FlatLinear, FlatParabolic)):
        return "M1"
    if isinstance(spec, FlatQuadratic):
        return "M2" if spec.k == 0 or spec.n == 0 else "M3"
    if isinstance(spec, PSLinear):
        return "P1"
    if isinstance(spec, PSQuadratic):
        return "P2"
    return None


def image(spec: IsoparametricSpec) -> tuple[float, float]:
    inf = math.inf
    if isinstance(spec, FlatQuadratic):
        if spec.k and spec.n:
            return (-inf, inf)
        up = (spec.k == 0) == (spec.alpha > 0)
        return (0.0, inf) if up else (-inf, 0.0)
    if isinstance(spec, PSQuadratic):
        return (-1.0, inf)
    if isinstance(spec, PSCliffordData):
        raise UnsupportedVariant("the image of a Clifford example depends on the Clifford system")
    return (-inf, inf)


# ---------------------------------------------------------------------------
# sampling and finite differences


def sample_points(spec: IsoparametricSpec, n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random points of R^m_s, or of S^m_s for pseudosphere variants."""
    if not spec.pseudo:
        return scale * rng.standard_normal((n, spec.dim))
    u = scale * rng.standard_normal((n, spec.s))
    v = rng.standard_normal((n, spec.dim - spec.s))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v *= np.sqrt(1.0 + np.sum(u * u, axis=1, keepdims=True))
    return np.concatenate([u, v], axis=1)


def _normalize(z, s):
    return z / np.sqrt(inner(z, z, s))[..., None]


def restricted(spec: IsoparametricSpec, fun):
    """Degree-0 homogeneous extension of a function on the pseudosphere."""
    if not spec.pseudo:
        return fun
    return lambda z: fun(_normalize(np.asarray(z, dtype=float), spec.s))


def fd_laplacian(fun, z, s: int, h: float, sigma: float = 1.0) -> float:
    """sigma * sum_i eps_i (f(z + h e_i) - 2 f(z) + f(z - h e_i)) / h^2, h scaled by |z|."""
    z = np.asarray(z, dtype=float)
    N = len(z)
    hh = h * max(1.0, float(np.max(np.abs(z))))
    E = np.eye(N) * hh
    pts = np.concatenate([z[None, :] + E, z[None, :] - E, z[None, :]])
    vals = np.asarray(fun(pts), dtype=float)
    f0 = vals[-1]
    d2 = (vals[:N] - 2 * f0 + vals[N:2 * N]) / (hh * hh)
    return float(sigma * np.sum(metric_signs(N, s) * d2))


@lru_cache(maxsize=1)
def calibrate_sign() -> float:
    """sigma in {+1, -1} such that box phi = 2 tr A for a flat quadratic."""
    spec = FlatQuadratic(m=3, s=1, alpha=1.0, k=1, n=1)
    z = np.array([0.3, -0.7, 1.1])
    raw = fd_laplacian(spec.phi, z, spec.s, 1e-3, 1.0)
    return 1.0 if abs(raw - 2 * spec.trace) < abs(raw + 2 * spec.trace) else -1.0


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class IdentityResiduals:
    phi: float
    grad_residual: float
    laplacian_residual: float
    sigma: float
    near_focal: bool


def tangential_grad(spec: IsoparametricSpec, z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    g = spec.grad(z)
    if not spec.pseudo:
        return g
    return g - inner(g, z, spec.s)[..., None] * z


def identity_residuals(spec: IsoparametricSpec, z, h: float) -> IdentityResiduals:
    """Gradient-norm identity (closed form, relative) and Laplacian identity (finite differences)."""
    z = np.asarray(z.z if isinstance(z, AmbientPoint) else z, dtype=float)
    sigma = calibrate_sign()
    t = float(spec.phi(z))
    g = tangential_grad(spec, z)
    gg = float(inner(g, g, spec.s))
    bt = float(spec.b(t))
    scale = max(1.0, float(np.sum(g * g)), abs(bt))
    lap = fd_laplacian(restricted(spec, spec.phi), z, spec.s, h, sigma)
    near = any(abs(t - c) <= h * max(1.0, float(np.max(np.abs(z)))) for c in spec.critical_values)
    return IdentityResiduals(t, abs(gg - bt) / scale, abs(lap - float(spec.a(t))), sigma, near)


def euler_check(spec: IsoparametricSpec, z) -> float:
    """|<grad Phi, z> - l Phi| / max(1, |l Phi|) for homogeneous polynomial variants."""
    if spec.polynomial_degree is None:
        raise UnsupportedVariant(f"{spec.label()} is not a homogeneous polynomial")
    z = np.asarray(z, dtype=float)
    lhs = inner(spec.grad(z), z, spec.s)
    rhs = spec.polynomial_degree * spec.phi(z)
    return np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))


def cartan_muenzner_residuals(spec: _Pseudo, z) -> tuple[np.ndarray, np.ndarray]:
    """<grad Phi, grad Phi> - l^2 <z,z>^(l-1) and box Phi - l^2 beta <z,z>^((l-2)/2), relative."""
    z = np.asarray(z, dtype=float)
    g = spec.grad(z)
    zz = inner(z, z, spec.s)
    l = spec.ell
    r1 = inner(g, g, spec.s) - l * l * zz ** (l - 1)
    r1 = np.abs(r1) / np.maximum(1.0, np.sum(g * g, axis=-1))
    r2 = np.abs(spec.box_polynomial(z) - l * l * spec.beta * np.abs(zz) ** ((l - 2) / 2))
    return r1, r2


def restriction_residual(spec: IsoparametricSpec, z, h: float) -> float:
    """Fourth-order central-difference gradient of the restricted function against b(phi), relative.

    The degree-0 extension has no radial derivative, so its flat gradient is
    already tangent to the pseudosphere.
    """
    z = np.asarray(z, dtype=float)
    fun = restricted(spec, spec.phi)
    hh = h * max(1.0, float(np.max(np.abs(z))))
    E = np.eye(len(z)) * hh
    f = lambda k: np.asarray(fun(z[None, :] + k * E))  # noqa: E731
    d = (8 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12 * hh)
    g = spec.eps * d
    bt = float(spec.b(float(spec.phi(z))))
    return abs(float(inner(g, g, spec.s)) - bt) / max(1.0, float(np.sum(g * g)), abs(bt))


def convergence_orders(hs, errors, floor: float = 1e-8) -> list:
    """Observed orders log(e_i/e_{i+1})/log(h_i/h_{i+1}); None where both errors sit at the noise floor."""
    out = []
    for i in range(len(hs) - 1):
        e0, e1 = errors[i], errors[i + 1]
        if e0 <= floor and e1 <= floor:
            out.append(None)
        else:
            out.append(math.log(max(e0, 1e-300) / max(e1, 1e-300)) / math.log(hs[i] / hs[i + 1]))
    return out


# ---------------------------------------------------------------------------
# level sets


def _num(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Factor:
    kind: str                 # hyperplane, flat, sphere, pseudohyperbolic, nullcone, parabolic, point
    dim: int
    sig: int = 0
    r2: float | None = None
    eps: tuple = ()
    omega: int = 0
    value: float = 0.0

    def __str__(self) -> str:
        sub = f"_{self.sig}" if self.sig else ""
        if self.kind == "hyperplane":
            return "L(hyperplane)"
        if self.kind == "flat":
            return f"R^{self.dim}{sub}"
        if self.kind == "sphere":
            return f"S^{self.dim}{sub}(r2={_num(self.r2)})"
        if self.kind == "pseudohyperbolic":
            return f"H^{self.dim}{sub}(r2={_num(self.r2)})"
        if self.kind == "nullcone":
            return f"C^{self.dim}{sub}"
        if self.kind == "parabolic":
            es = "".join("+" if e > 0 else "-" for e in self.eps)
            return f"P^{self.dim}(eps={es},omega={self.omega})"
        if self.kind == "point":
            return f"{{{_num(self.value)}}}"
        raise ValueError(self.kind)


def Hyperplane(dim):
    return Factor("hyperplane", dim)


def Flat(dim, sig=0):
    return Factor("flat", dim, sig)


def Sphere(dim, r2, sig=0):
    return Factor("sphere", dim, sig, float(r2))


def PseudoHyperbolic(dim, sig, r2):
    return Factor("pseudohyperbolic", dim, sig, float(r2))


def NullCone(dim, sig):
    return Factor("nullcone", dim, sig)


def Parabolic(dim, eps, omega):
    return Factor("parabolic", dim, eps=tuple(eps), omega=omega)


def Point(value=0.0):
    return Factor("point", 0, value=float(value))


@dataclass(frozen=True)
class LevelSetDescriptor:
    factors: tuple = ()
    tag: str = "regular_hypersurface"     # or focal_variety
    kind: str = "product"                 # product, empty, whole_space

    @property
    def empty(self) -> bool:
        return self.kind == "empty"

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def __str__(self) -> str:
        if self.kind == "empty":
            return "EMPTY"
        if self.kind == "whole_space":
            return "ALL"
        return " x ".join(str(f) for f in self.factors if not (f.kind == "flat" and f.dim == 0))


EMPTY = LevelSetDescriptor((), "regular_hypersurface", "empty")
WHOLE_SPACE = LevelSetDescriptor((), "focal_variety", "whole_space")


def _product(*factors, focal=False) -> LevelSetDescriptor:
    keep = tuple(f for f in factors if not (f.kind == "flat" and f.dim == 0))
    return LevelSetDescriptor(keep, "focal_variety" if focal else "regular_hypersurface")


def classify_level_set(spec: IsoparametricSpec, c: float) -> LevelSetDescriptor:
    m, s = spec.m, spec.s
    if isinstance(spec, FlatLinear):
        return _product(Hyperplane(m - 1))
    if isinstance(spec, FlatParabolic):
        d = 2 * s + spec.omega
        return _product(Parabolic(d - 1, spec.epsilons, spec.omega), Flat(m - d))
    if isinstance(spec, FlatQuadratic):
        k, n = spec.k, spec.n
        q = c / spec.alpha
        if k == 0:
            if q < 0:
                return EMPTY
            if c == 0:
                return _product(Point(), Flat(m - n, s), focal=True)
            return _product(Sphere(n - 1, q), Flat(m - n, s))
        if n == 0:
            if q > 0:
                return EMPTY
            if c == 0:
                return _product(Flat(m - k, s - k), Point(), focal=True)
            return _product(Sphere(k - 1, -q), Flat(m - k, s - k))
        rest = Flat(m - (k + n), s - k)
        if c == 0:
            return _product(NullCone(k + n - 1, k), rest, focal=True)
        if q > 0:
            return _product(Sphere(k + n - 1, q, k), rest)
        return _product(PseudoHyperbolic(k + n - 1, k - 1, -q), rest)
    if isinstance(spec, PSLinear):
        if abs(c) == 1:
            return _product(NullCone(m - 1, s), Point(c), focal=True)
        if abs(c) < 1:
            return _product(Sphere(m - 1, 1 - c * c, s))
        return _product(PseudoHyperbolic(m - 1, s - 1, c * c - 1))
    if isinstance(spec, PSQuadratic):
        k1, k2 = spec.k1, spec.k2
        if c < -1:
            return EMPTY
        if c == -1:
            return _product(Sphere(k1 - 1, 1.0, s), Point(), focal=True)
        if c == 1:
            return _product(NullCone(k1 - 1, s), Sphere(k2 - 1, 1.0), focal=True)
        if c < 1:
            return _product(Sphere(k1 - 1, (1 - c) / 2, s), Sphere(k2 - 1, (1 + c) / 2))
        return _product(PseudoHyperbolic(k1 - 1, s - 1, (c - 1) / 2), Sphere(k2 - 1, (1 + c) / 2))
    raise UnsupportedVariant(f"no level-set table for {spec.label()}")


def level_set_membership(spec: IsoparametricSpec, c: float, z) -> float:
    """Residual of the factor equations of classify_level_set at a point z with phi(z) = c."""
    z = np.asarray(z, dtype=float)
    desc = classify_level_set(spec, c)
    if isinstance(spec, PSQuadratic) and not desc.empty:
        k1 = spec.k1
        first = float(inner(z[:k1], z[:k1], spec.s))
        second = float(np.sum(z[k1:] ** 2))
        fa, fb = desc.factors
        r_first = 0.0 if fa.kind == "nullcone" else (fa.r2 if fa.kind == "sphere" else -fa.r2)
        r_second = 0.0 if fb.kind == "point" else fb.r2
        return abs(first - r_first) + abs(second - r_second)
    if isinstance(spec, FlatQuadratic) and not desc.empty:
        k, n, s = spec.k, spec.n, spec.s
        q = -float(np.sum(z[:k] ** 2)) + float(np.sum(z[s:s + n] ** 2))
        return abs(q - c / spec.alpha)
    raise UnsupportedVariant("membership check implemented for quadratic variants")


# ---------------------------------------------------------------------------
# composition with ODE profiles


@dataclass(frozen=True)
class CompositionResiduals:
    u: float
    phi: float
    reduction_residual: float
    equation_residual: float | None
    sigma: float


def pde_compose_and_residual(spec: IsoparametricSpec, profile, z, h: float, psi=None,
                             blowup_levels=(), margin: float = 0.05) -> CompositionResiduals:
    """u = v(phi(z)); compare the finite-difference box u with v'' b + v' a and with -psi(u).

    ``profile`` maps t (array) to (v, v', v''); ``psi`` is the nonlinearity
    of the PDE box u + psi(u) = 0.
    """
    z = np.asarray(z.z if isinstance(z, AmbientPoint) else z, dtype=float)
    t = float(spec.phi(z))
    for R in blowup_levels:
        if abs(t - R) <= margin * max(1.0, abs(R)):
            raise NearBlowUp(R, f"phi(z) = {t:.6g} is within {margin:g} of the blow-up level {R:.6g}")
    sigma = calibrate_sign()
    u_of = restricted(spec, lambda pts: profile(spec.phi(pts))[0])
    lap = fd_laplacian(u_of, z, spec.s, h, sigma)
    v, v1, v2 = (float(np.atleast_1d(x)[0]) for x in profile(np.array([t])))
    red = abs(lap - (v2 * float(spec.b(t)) + v1 * float(spec.a(t))))
    eq = None if psi is None else abs(lap + float(psi(v)))
    return CompositionResiduals(v, t, red, eq, sigma)


def solution_level_descriptors(spec: IsoparametricSpec, profile, c: float, *, critical: bool = False) -> list:
    """Descriptors of u^{-1}(c) = phi^{-1}(v^{-1}(c)); with ``critical`` the critical set instead.

    ``profile`` is a PiecewiseProfile. A constant profile equal to c gives
    the whole-space marker.
    """
    pieces = profile.pieces
    const = all(len(p.traj.r) == 2 and np.all(p.traj.w == p.traj.w[0]) and np.all(p.traj.wp == 0)
                for p in pieces)
    if const:
        v0 = pieces[0].sign * pieces[0].traj.w[0]
        return [WHOLE_SPACE] if (critical or v0 == c) else []
    if critical:
        ts = profile.critical_levels() + [cv for cv in spec.critical_values
                                          if profile.domain[0] <= cv <= profile.domain[1]]
        ts = sorted(set(ts))
    else:
        ts = profile.roots(c)
    return [classify_level_set(spec, t) for t in ts]


# ---------------------------------------------------------------------------
# reduced problems


def minkowski_params(spec: IsoparametricSpec, mu: float, p: float, d: float):
    """Parameters of (gamma t + delta) v'' + beta v' = -mu |v|^(p-1) v for a flat variant."""
    from .minkowski import MinkowskiParams
    if isinstance(spec, FlatQuadratic):
        return MinkowskiParams(4 * spec.alpha, 0.0, 2 * spec.trace, mu, spec.k, spec.n, p, d)
    if isinstance(spec, FlatLinear):
        return MinkowskiParams(0.0, 4 * spec.aa, 0.0, mu, 0, 0, p, d, A_zero=True)
    if isinstance(spec, FlatParabolic):
        return MinkowskiParams(0.0, 4.0 * spec.omega, 0.0, mu, 0, 0, p, d, A_zero=True)
    raise UnsupportedVariant("not a flat variant")


def compact_problem(spec: IsoparametricSpec, lam: float, p: float):
    """The compact problem carried by a pseudosphere variant (n_i = (m-1) - m_i)."""
    from .shooting import CompactProblem
    if isinstance(spec, PSLinear):
        return CompactProblem(1, spec.m, 0, 0, lam, p)
    if isinstance(spec, PSQuadratic):
        return CompactProblem(2, spec.m, spec.k1 - 1, spec.k2 - 1, lam, p)
    if isinstance(spec, PSCliffordData):
        n1, n2 = spec.m - 1 - spec.m1, spec.m - 1 - spec.m2
        return CompactProblem(4, spec.m, n1, n2, lam, p)
    raise UnsupportedVariant("not a pseudosphere variant")


def default_specs() -> list:
    """One instance of every variant with a pointwise evaluator."""
    return [
        FlatLinear(m=4, s=1, a_vec=(-1.0, 0.0, 0.5, 0.0)),
        FlatQuadratic(m=5, s=2, alpha=1.0, k=2, n=2),
        FlatQuadratic(m=4, s=1, alpha=-2.0, k=0, n=3),
        FlatQuadratic(m=4, s=2, alpha=0.5, k=2, n=0),
        FlatParabolic(m=6, s=2, epsilons=(1, -1), omega=2),
        PSLinear(m=4, s=1, Q=(0.0, 0.0, 0.0, 0.0, 1.0)),
        PSQuadratic(m=6, s=1, k1=3, k2=4),
        PSQuadratic(m=6, s=2, k1=4, k2=3),
    ]
