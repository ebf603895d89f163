"""Singular coefficients q, integrating factors rho and odd nonlinearities f.

Every coefficient family provides q, q', log(rho) in closed form with the
normalisation rho(1) = 1, and the limit Gamma = lim -q^2/q' at each singular
endpoint. Every nonlinearity provides f, f', the primitive F and the
thresholds t0 (last zero of f before it increases) and t1 (beyond which
F >= 0).

``check_hypotheses`` returns a verdict for each structural hypothesis the
solvers rely on. Closed-form reasoning decides the verdict where available;
numeric probes are always attached as evidence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy import integrate, special

Branch = Literal["plus", "minus"]
Status = Literal["pass", "fail", "not_applicable", "inconclusive"]

PROBE_RADII = tuple(10.0 ** -k for k in range(3, 10))
PROBE_RTOL = 1e-6


class DomainError(ValueError):
    """Raised when a coefficient is evaluated at or beyond a singular endpoint."""


def _logsinh(x):
    # log(sinh x) for x > 0, accepting complex arguments with small imaginary part
    x = np.asarray(x)
    small = np.real(x) < 1.0
    xs = np.where(small, x, 1.0)
    xl = np.where(small, 1.0, x)
    return np.where(small, np.log(np.sinh(xs)), xl + np.log1p(-np.exp(-2 * xl)) - math.log(2.0))


def _logcosh(x):
    x = np.asarray(x)
    return x + np.log1p(np.exp(-2 * x)) - math.log(2.0)


# ---------------------------------------------------------------------------
# coefficient families


@dataclass(frozen=True)
class CoefficientFamily:
    """Base class; subclasses implement q, q', log rho and Gamma."""

    @property
    def domain(self) -> tuple[float, float]:
        return (0.0, math.inf)

    @property
    def singular_endpoints(self) -> tuple[float, ...]:
        return (0.0,)

    @property
    def regular(self) -> bool:
        return not self.singular_endpoints

    def q(self, r: float) -> float:
        raise NotImplementedError

    def q_prime(self, r: float) -> float:
        raise NotImplementedError

    def log_rho(self, r):
        raise NotImplementedError

    def rho(self, r):
        return np.exp(self.log_rho(r))

    def gamma(self, endpoint: float = 0.0) -> float:
        raise NotImplementedError

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(CoefficientFamily):
    """q(r) = theta / r. theta = 0 is the regular (unweighted) equation."""

    theta: float

    def __post_init__(self):
        if not self.theta >= 0:
            raise ValueError(f"PowerLaw needs theta >= 0, got {self.theta}")

    @property
    def singular_endpoints(self):
        return () if self.theta == 0 else (0.0,)

    def q(self, r):
        return self.theta / r if self.theta else 0.0

    def q_prime(self, r):
        return -self.theta / (r * r)

    def log_rho(self, r):
        if self.theta == 0:
            return np.zeros_like(np.asarray(r, dtype=complex if np.iscomplexobj(r) else float))
        return self.theta * np.log(r)

    def gamma(self, endpoint=0.0):
        if self.theta == 0:
            raise DomainError("PowerLaw with theta = 0 has no singular endpoint")
        return float(self.theta)

    def label(self):
        return f"power:{self.theta:g}"


@dataclass(frozen=True)
class SinhRatio(CoefficientFamily):
    """q(r) = (alpha cosh r + beta) / sinh r on the plus branch, - beta on minus."""

    alpha: float
    beta: float
    branch: Branch = "plus"

    def __post_init__(self):
        if self.branch not in ("plus", "minus"):
            raise ValueError(f"unknown branch {self.branch!r}")
        if not (self.alpha + self.beta > 0 and self.alpha - self.beta > 0):
            raise ValueError("SinhRatio needs alpha + beta > 0 and alpha - beta > 0")

    @property
    def b(self) -> float:
        return self.beta if self.branch == "plus" else -self.beta

    def q(self, r):
        if r > 700.0:
            return self.alpha + 2.0 * self.b * math.exp(-r)
        return self.alpha / math.tanh(r) + self.b / math.sinh(r)

    def q_prime(self, r):
        if r > 350.0:
            return -2.0 * self.b * math.exp(-r)
        s = math.sinh(r)
        return -(self.alpha + self.b * math.cosh(r)) / (s * s)

    def log_rho(self, r):
        r = np.asarray(r)
        a, b = self.alpha, self.b
        return ((a + b) * (_logsinh(r / 2) - _logsinh(0.5))
                + (a - b) * (_logcosh(r / 2) - _logcosh(0.5)))

    def gamma(self, endpoint=0.0):
        return self.alpha + self.b

    def label(self):
        return f"sinh:{self.alpha:g},{self.beta:g},{self.branch}"


@dataclass(frozen=True)
class SinRatio(CoefficientFamily):
    """q(r) = (alpha cos r - beta) / sin r on (0, pi), singular at both ends."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha - self.beta > 0 and self.alpha + self.beta > 0):
            raise ValueError("SinRatio needs alpha - beta > 0 and alpha + beta > 0")

    @property
    def domain(self):
        return (0.0, math.pi)

    @property
    def singular_endpoints(self):
        return (0.0, math.pi)

    def q(self, r):
        return (self.alpha * math.cos(r) - self.beta) / math.sin(r)

    def q_prime(self, r):
        s = math.sin(r)
        return (-self.alpha + self.beta * math.cos(r)) / (s * s)

    def log_rho(self, r):
        r = np.asarray(r)
        a, b = self.alpha, self.beta
        return ((a - b) * (np.log(np.sin(r / 2)) - math.log(math.sin(0.5)))
                + (a + b) * (np.log(np.cos(r / 2)) - math.log(math.cos(0.5))))

    def gamma(self, endpoint=0.0):
        if endpoint == 0.0:
            return self.alpha - self.beta
        if endpoint == math.pi:
            return self.alpha + self.beta
        raise DomainError(f"{endpoint} is not a singular endpoint of SinRatio")

    def label(self):
        return f"sin:{self.alpha:g},{self.beta:g}"


def q_eval(family: CoefficientFamily, r: float) -> float:
    lo, hi = family.domain
    if not lo < r < hi:
        raise DomainError(f"r = {r} outside the open domain ({lo}, {hi})")
    return family.q(r)


def rho_eval(family: CoefficientFamily, r: float) -> float:
    lo, hi = family.domain
    if not lo <= r <= hi:
        raise DomainError(f"r = {r} outside [{lo}, {hi}]")
    if r in family.singular_endpoints:
        return 0.0
    if family.regular:
        return 1.0
    return float(family.rho(r))


def gamma_limit(family: CoefficientFamily, endpoint: float = 0.0) -> float:
    if endpoint not in family.singular_endpoints:
        raise DomainError(f"{endpoint} is not a singular endpoint of {family.label()}")
    return family.gamma(endpoint)


# ---------------------------------------------------------------------------
# nonlinearities


@dataclass(frozen=True)
class Nonlinearity:
    def f(self, t: float) -> float:
        raise NotImplementedError

    def f_array(self, t):
        raise NotImplementedError

    def f_prime(self, t: float) -> float:
        raise NotImplementedError

    def F(self, t):
        raise NotImplementedError

    @property
    def t0(self) -> float:
        raise NotImplementedError

    @property
    def t1(self) -> float:
        raise NotImplementedError

    @property
    def leading(self) -> tuple[float, float]:
        """(Lambda, p) of the dominant term Lambda |t|^(p-1) t."""
        return (self.Lambda, self.p)  # type: ignore[attr-defined]

    def label(self) -> str:
        raise NotImplementedError


def _spow(t, p):
    return np.sign(t) * np.abs(t) ** p


@dataclass(frozen=True)
class PurePower(Nonlinearity):
    Lambda: float
    p: float

    def __post_init__(self):
        if self.Lambda == 0 or not self.p > 1:
            raise ValueError("PurePower needs Lambda != 0 and p > 1")

    def f(self, t):
        return self.Lambda * math.copysign(abs(t) ** self.p, t)

    def f_array(self, t):
        return self.Lambda * _spow(np.asarray(t, dtype=float), self.p)

    def f_prime(self, t):
        return self.Lambda * self.p * abs(t) ** (self.p - 1)

    def F(self, t):
        return self.Lambda * np.abs(t) ** (self.p + 1) / (self.p + 1)

    @property
    def t0(self):
        return 0.0

    @property
    def t1(self):
        return 0.0

    def label(self):
        return f"power:{self.Lambda:g},{self.p:g}"


@dataclass(frozen=True)
class PowerMinusLinear(Nonlinearity):
    Lambda: float
    p: float

    def __post_init__(self):
        if not (self.Lambda > 0 and self.p > 1):
            raise ValueError("PowerMinusLinear needs Lambda > 0 and p > 1")

    def f(self, t):
        return self.Lambda * (math.copysign(abs(t) ** self.p, t) - t)

    def f_array(self, t):
        t = np.asarray(t, dtype=float)
        return self.Lambda * (_spow(t, self.p) - t)

    def f_prime(self, t):
        return self.Lambda * (self.p * abs(t) ** (self.p - 1) - 1.0)

    def F(self, t):
        t = np.asarray(t, dtype=float)
        return self.Lambda * (np.abs(t) ** (self.p + 1) / (self.p + 1) - t * t / 2)

    @property
    def t0(self):
        return 1.0

    @property
    def t1(self):
        return ((self.p + 1) / 2) ** (1 / (self.p - 1))

    def label(self):
        return f"pml:{self.Lambda:g},{self.p:g}"


@dataclass(frozen=True)
class PowerDifference(Nonlinearity):
    Lambda: float
    delta: float
    p: float
    s: float

    def __post_init__(self):
        if not (self.Lambda > 0 and self.delta > 0 and 1 <= self.s < self.p):
            raise ValueError("PowerDifference needs Lambda, delta > 0 and 1 <= s < p")

    def f(self, t):
        a = abs(t)
        return math.copysign(1.0, t) * (self.Lambda * a ** self.p - self.delta * a ** self.s)

    def f_array(self, t):
        t = np.asarray(t, dtype=float)
        return self.Lambda * _spow(t, self.p) - self.delta * _spow(t, self.s)

    def f_prime(self, t):
        a = abs(t)
        return self.Lambda * self.p * a ** (self.p - 1) - self.delta * self.s * a ** (self.s - 1)

    def F(self, t):
        a = np.abs(np.asarray(t, dtype=float))
        return self.Lambda * a ** (self.p + 1) / (self.p + 1) - self.delta * a ** (self.s + 1) / (self.s + 1)

    @property
    def t0(self):
        return (self.delta / self.Lambda) ** (1 / (self.p - self.s))

    @property
    def t1(self):
        z = (self.delta * (self.p + 1) / (self.Lambda * (self.s + 1))) ** (1 / (self.p - self.s))
        return max(self.t0, z)

    def label(self):
        return f"pdiff:{self.Lambda:g},{self.delta:g},{self.p:g},{self.s:g}"


# ---------------------------------------------------------------------------
# hypotheses


@dataclass(frozen=True)
class Verdict:
    status: Status
    method: str
    evidence: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HypothesisReport:
    verdicts: dict

    def __getitem__(self, key) -> Verdict:
        return self.verdicts[key]

    def failing(self, keys=None) -> list[str]:
        keys = self.verdicts.keys() if keys is None else keys
        return [k for k in keys if self.verdicts[k].status in ("fail", "inconclusive")]

    @property
    def all_pass(self) -> bool:
        return all(v.status == "pass" for v in self.verdicts.values())

    @property
    def N(self) -> float:
        return self.verdicts["rho1"].evidence.get("N", math.nan)

    @property
    def Gamma(self) -> float:
        return self.verdicts["q4"].evidence.get("Gamma", math.nan)

    def as_dict(self) -> dict:
        return {k: {"status": v.status, "method": v.method, **v.evidence}
                for k, v in self.verdicts.items()}


def _converged(values) -> tuple[bool, float]:
    """Richardson-style acceptance: the last two probes agree to PROBE_RTOL."""
    a, b = values[-2], values[-1]
    ok = math.isfinite(a) and math.isfinite(b) and abs(a - b) <= PROBE_RTOL * max(abs(a), abs(b), 1e-300)
    return ok, b


def ratio_bound(family: CoefficientFamily, t, n_nodes: int = 40):
    """(1/rho(t)) * int_0^t rho for t in (0, 1], via Gauss-Jacobi with weight u^Gamma."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if family.regular:
        return t.copy()
    g = family.gamma(0.0)
    x, w = special.roots_jacobi(n_nodes, 0.0, g)
    u = (1 + x) / 2
    w = w / 2 ** (g + 1)
    su = np.outer(t, u)
    smooth = np.exp(family.log_rho(su) - family.log_rho(t)[:, None] - g * np.log(u)[None, :])
    return t * (smooth @ w)


def _check_f(nl: Nonlinearity) -> dict:
    out = {}
    Lam, p = nl.leading
    probes = [10.0 ** k for k in (2, 4, 6)]
    ratios = [nl.f(t) / t for t in probes]
    if Lam > 0:
        out["f1"] = Verdict("pass", "closed form: f(t)/t ~ Lambda t^(p-1) with p > 1, Lambda > 0",
                            {"f_over_t": ratios})
    else:
        out["f1"] = Verdict("fail", "closed form: Lambda < 0 gives f(t)/t -> -inf",
                            {"f_over_t": ratios})

    t0 = nl.t0
    grid = t0 + np.geomspace(1e-6, 1e6, 200)
    fp = np.array([nl.f_prime(t) for t in grid])
    ok = Lam > 0 and abs(nl.f(t0)) <= 1e-12 * max(1.0, abs(t0))
    out["f2"] = Verdict("pass" if ok and fp.min() > 0 else "fail",
                        "closed form: f(t0) = 0 and f' > 0 beyond t0",
                        {"t0": t0, "f_at_t0": nl.f(t0), "min_fprime_above_t0": float(fp.min())})

    if Lam <= 0:
        out["f3"] = Verdict("fail", "closed form: F < 0 for all t > 0", {})
        return out
    t1 = nl.t1
    T = 1e6
    # substitute s = e^x so the integrand decays smoothly on a short interval
    val, err = integrate.quad(lambda x: math.exp(x) / math.sqrt(float(nl.F(math.exp(x)))),
                              math.log(t1 + 1), math.log(T), limit=200)
    # F(s)/s^(p+1) is nondecreasing for all built-in families, so F(s) >= c s^(p+1) beyond T
    c = float(nl.F(T)) / T ** (p + 1)
    tail = 2.0 / ((p - 1) * math.sqrt(c)) * T ** (-(p - 1) / 2)
    out["f3"] = Verdict("pass", "closed form: 1/sqrt(F) ~ t^(-(p+1)/2) integrable; quad on [t1+1, 1e6] + tail bound",
                        {"t1": t1, "integral_to_1e6": val, "quad_error": err, "tail_bound": tail})
    return out


def _check_q(family: CoefficientFamily) -> dict:
    out = {}
    if isinstance(family, PowerLaw) and family.theta == 0:
        out["q1"] = Verdict("fail", "closed form: q = 0 so int_r^1 q = 0", {"q_probes": [0.0] * len(PROBE_RADII)})
        out["q2"] = Verdict("pass", "closed form: q = 0 has limit 0", {"limit": 0.0})
        out["q3"] = Verdict("not_applicable", "regular equation: no growth of rho needed", {})
        out["q4"] = Verdict("not_applicable", "regular equation: no singular endpoint", {})
        out["rho1"] = Verdict("pass", "closed form: rho = 1", {"N": 1.0})
        return out

    qs = [family.q(r) for r in PROBE_RADII]
    ints = [float(-family.log_rho(r)) for r in PROBE_RADII]
    grows = all(b > a for a, b in zip(qs, qs[1:])) and all(b > a for a, b in zip(ints, ints[1:]))
    out["q1"] = Verdict("pass" if grows and family.gamma(0.0) > 0 else "fail",
                        "closed form: q ~ Gamma/r at 0 with Gamma > 0",
                        {"q_probes": qs, "int_r_to_1_probes": ints})

    g_probes = [-family.q(r) ** 2 / family.q_prime(r) for r in PROBE_RADII]
    ok, g = _converged(g_probes)
    if not ok:
        out["q4"] = Verdict("inconclusive", "numeric limit probes did not converge", {"probes": g_probes})
    else:
        out["q4"] = Verdict("pass" if g > 0 else "fail", "numeric limit at r = 1e-3..1e-9",
                            {"Gamma": g, "Gamma_closed_form": family.gamma(0.0), "probes": g_probes})

    if isinstance(family, SinRatio):
        out["q2"] = Verdict("not_applicable", "bounded domain (0, pi)", {})
        out["q3"] = Verdict("not_applicable", "bounded domain (0, pi)", {})
    else:
        big = (1e2, 1e3, 1e4)
        vals = [family.q(r) for r in big]
        if isinstance(family, PowerLaw):
            out["q2"] = Verdict("pass", "closed form: q -> 0", {"probes": vals, "limit": 0.0})
            scaled = [family.q(r) * r for r in big]
            out["q3"] = Verdict("pass", "closed form: r q(r) = theta > 0 (exponent -1)",
                                {"exponent": -1.0, "probes": scaled})
        else:
            lim = family.alpha
            out["q2"] = Verdict("pass", "closed form: q -> alpha", {"probes": vals, "limit": lim})
            out["q3"] = Verdict("pass" if lim > 0 else "fail", "closed form: q -> alpha > 0 (exponent 0)",
                                {"exponent": 0.0, "probes": vals})

    t = np.linspace(0.0, 1.0, 201)[1:]
    ratios = ratio_bound(family, t)
    N = float(ratios.max())
    out["rho1"] = Verdict("pass" if math.isfinite(N) and N > 0 else "fail",
                          "Gauss-Jacobi quadrature, supremum over 200 points of (0, 1]",
                          {"N": N, "argmax": float(t[int(ratios.argmax())])})
    return out


def check_hypotheses(family: CoefficientFamily, nl: Nonlinearity) -> HypothesisReport:
    v = {}
    v.update(_check_f(nl))
    v.update(_check_q(family))
    order = ("f1", "f2", "f3", "q1", "q2", "q3", "q4", "rho1")
    return HypothesisReport({k: v[k] for k in order})
