"""Singular initial value problems w'' + q(r) w' = +-f(w), w(0) = a, w'(0) = 0.

The solution is started at the singular endpoint by Picard iteration of the
integrated divergence form

    w(r) = a +- int_0^r P(s) ds,   P(s) = s int_0^1 rho(su)/rho(s) f(w(su)) du,

and handed off at a small radius h0 to an adaptive Dormand-Prince
integrator with dense output, event location and blow-up detection.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

from ._dopri import dense_arrays, integrate_dopri, poly_deriv, poly_eval
from .coefficients import (
    CoefficientFamily,
    HypothesisReport,
    Nonlinearity,
    PowerLaw,
    PurePower,
    check_hypotheses,
)

Sign = Literal["plus", "minus"]

BLOWUP_CAP = 1e8
COLLAPSE_RATIO = 1e-13
PICARD_TOL = 1e-14


class StepRejected(ValueError):
    """Picard handoff radius exceeds the contraction radius delta."""

    def __init__(self, h, delta):
        super().__init__(f"handoff radius {h:.6g} exceeds contraction radius {delta:.6g}")
        self.h = h
        self.delta = delta


class NonContraction(RuntimeError):
    """Successive Picard differences stopped decreasing."""


class HypothesisViolation(ValueError):
    def __init__(self, names, report):
        super().__init__("hypotheses not satisfied: " + ", ".join(names))
        self.names = names
        self.report = report


class NotBlowUp(ValueError):
    pass


@dataclass(frozen=True)
class SingularIVP:
    family: CoefficientFamily
    nl: Nonlinearity
    sign: Sign
    a: float
    r_max: float = 200.0

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise ValueError(f"sign must be 'plus' or 'minus', got {self.sign!r}")
        lo, hi = self.family.domain
        if not lo < self.r_max <= hi:
            raise ValueError(f"r_max = {self.r_max} outside ({lo}, {hi}]")

    @property
    def s(self) -> float:
        return 1.0 if self.sign == "plus" else -1.0

    def canonical(self) -> "SingularIVP":
        """Fold a negative PurePower coefficient into the sign: -(-|L|) = +|L|."""
        if isinstance(self.nl, PurePower) and self.nl.Lambda < 0:
            flipped = "plus" if self.sign == "minus" else "minus"
            return replace(self, nl=PurePower(-self.nl.Lambda, self.nl.p), sign=flipped)
        return self

    @property
    def gamma(self) -> float:
        return 0.0 if self.family.regular else self.family.gamma(0.0)

    def acceleration(self):
        """w'' as a function of (r, w, w'), with scalar fast paths."""
        s, fam, nl = self.s, self.family, self.nl
        f = nl.f
        if isinstance(fam, PowerLaw):
            th = fam.theta
            if isinstance(nl, PurePower):
                c, p = s * nl.Lambda, nl.p
                if th == 0:
                    return lambda r, w, wp: c * math.copysign(abs(w) ** p, w)
                return lambda r, w, wp: c * math.copysign(abs(w) ** p, w) - th * wp / r
            if th == 0:
                return lambda r, w, wp: s * f(w)
            return lambda r, w, wp: s * f(w) - th * wp / r
        q = fam.q
        return lambda r, w, wp: s * f(w) - q(r) * wp


@functools.lru_cache(maxsize=256)
def cached_hypotheses(family, nl) -> HypothesisReport:
    return check_hypotheses(family, nl)


# ---------------------------------------------------------------------------
# Picard starter


@dataclass(frozen=True)
class PicardStart:
    h: float
    w: float
    wp: float
    delta: float
    iterations: int
    w_cheb: np.ndarray  # Chebyshev coefficients of w on [0, h]
    wp_cheb: np.ndarray

    def __call__(self, r):
        x = 2.0 * np.asarray(r, dtype=float) / self.h - 1.0
        return C.chebval(x, self.w_cheb), C.chebval(x, self.wp_cheb)


def contraction_radius(problem: SingularIVP, N: float | None = None, T: float = 1.0) -> float:
    """delta = min(delta0 / (2 M N), 1 / (4 C N), T) around the initial value a."""
    a = problem.a
    d0 = 0.5 * max(1.0, abs(a))
    grid = np.linspace(a - d0, a + d0, 401)
    M = float(np.max(np.abs(problem.nl.f_array(grid))))
    Cl = max(abs(problem.nl.f_prime(t)) for t in grid)
    if N is None:
        N = cached_hypotheses(problem.family, problem.nl).N
    cands = [T]
    if M > 0:
        cands.append(d0 / (2 * M * N))
    if Cl > 0:
        cands.append(1.0 / (4 * Cl * N))
    return float(min(cands))


@functools.lru_cache(maxsize=64)
def _picard_weights(family, h, n_nodes, n_outer, n_inner):
    g = family.gamma(0.0)
    r = 0.5 * h * (1.0 - np.cos(np.pi * np.arange(n_nodes) / (n_nodes - 1)))  # Lobatto, ascending
    xo, wo = special.roots_legendre(n_outer)
    xi, wi = special.roots_jacobi(n_inner, 0.0, g)
    u = (1 + xi) / 2
    wi = wi / 2 ** (g + 1)
    # outer points s = r_j (1 + x)/2 for each node (node 0 has r = 0)
    s = np.outer(r, (1 + xo) / 2)                      # (n, no)
    ws = np.outer(r / 2, wo)                            # (n, no)
    su = s[:, :, None] * u[None, None, :]               # (n, no, ni)
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = np.exp(family.log_rho(su) - family.log_rho(s)[:, :, None] - g * np.log(u))
    smooth = np.where(np.isfinite(smooth), smooth, 0.0)
    kernel = ws[:, :, None] * s[:, :, None] * smooth * wi   # weight of f(v(su))
    # derivative at the nodes: P(r_j) = r_j sum_k wi_k smooth(r_j, u_k) f(v(r_j u_k))
    ru = np.outer(r, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        sm_r = np.exp(family.log_rho(ru) - family.log_rho(r)[:, None] - g * np.log(u))
    sm_r = np.where(np.isfinite(sm_r), sm_r, 0.0)
    dkernel = r[:, None] * sm_r * wi
    return r, su, kernel, ru, dkernel


def picard_start(problem: SingularIVP, h: float, *, n_nodes: int = 17, max_iter: int = 200,
                 check_radius: bool = True) -> PicardStart:
    """Fixed point of the integrated operator on [0, h]; returns w(h), w'(h)."""
    fam, nl, a, s = problem.family, problem.nl, problem.a, problem.s
    delta = contraction_radius(problem) if check_radius else math.inf
    if h > delta:
        raise StepRejected(h, delta)
    if nl.f(a) == 0.0:
        cw = np.zeros(n_nodes)
        cw[0] = a
        return PicardStart(h, a, 0.0, delta, 0, cw, np.zeros(n_nodes))
    r, su, kernel, ru, dkernel = _picard_weights(fam, h, n_nodes, 24, 24)
    x_nodes = 2 * r / h - 1
    xsu = 2 * su / h - 1
    v = np.full(n_nodes, a)
    tol = PICARD_TOL * max(1.0, abs(a))
    prev = math.inf
    stalls = 0
    for it in range(1, max_iter + 1):
        cheb = C.chebfit(x_nodes, v, n_nodes - 1)
        fv = nl.f_array(C.chebval(xsu, cheb))
        v_new = a + s * np.einsum("ijk,ijk->i", kernel, fv)
        diff = float(np.max(np.abs(v_new - v)))
        v = v_new
        if diff <= tol:
            break
        stalls = stalls + 1 if diff >= prev else 0
        if stalls >= 3:
            raise NonContraction(f"Picard differences stalled at {diff:.3e} after {it} iterations")
        prev = diff
    else:
        raise NonContraction(f"no convergence in {max_iter} iterations (last difference {diff:.3e})")
    cheb = C.chebfit(x_nodes, v, n_nodes - 1)
    fv = nl.f_array(C.chebval(2 * ru / h - 1, cheb))
    wp = s * np.einsum("ij,ij->i", dkernel, fv)
    cheb_p = C.chebfit(x_nodes, wp, n_nodes - 1)
    return PicardStart(h, float(v[-1]), float(wp[-1]), delta, it, cheb, cheb_p)


def taylor_start(problem: SingularIVP, h: float) -> tuple[float, float]:
    """Leading-order series w = a +- f(a) h^2 / (2 (1 + Gamma))."""
    c = problem.s * problem.nl.f(problem.a) / (1.0 + problem.gamma)
    return problem.a + 0.5 * c * h * h, c * h


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Event:
    kind: str
    r: float


@dataclass(frozen=True)
class Termination:
    kind: Literal["ReachedEnd", "BlowUp", "StepCollapse"]
    r_stop: float
    reason: str = ""
    R_est: float | None = None
    fit_exponent: float | None = None
    low_confidence: bool = False


@dataclass(frozen=True, eq=False)
class Trajectory:
    problem: SingularIVP
    r: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    events: tuple
    termination: Termination
    stats: dict
    starter: PicardStart | None = None
    _starts: np.ndarray = field(default=None, repr=False)
    _widths: np.ndarray = field(default=None, repr=False)
    _coeffs: np.ndarray = field(default=None, repr=False)

    @property
    def zeros(self) -> np.ndarray:
        return np.array([e.r for e in self.events if e.kind == "zero"])

    @property
    def critical_points(self) -> np.ndarray:
        return np.array([e.r for e in self.events if e.kind == "critical_point"])

    @property
    def zero_count(self) -> int:
        return sum(1 for e in self.events if e.kind == "zero")

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @property
    def error_estimate(self) -> float:
        return self.stats.get("error_estimate", 0.0)

    def __call__(self, r, derivative: int = 0):
        """Dense output: returns (w, w') at r, or (w', w'') with derivative=1."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w = np.empty_like(r)
        wp = np.empty_like(r)
        h0 = self.r[1] if self.starter is not None else 0.0
        first = r < h0
        if first.any():
            if derivative:
                x = 2.0 * r[first] / self.starter.h - 1.0
                w[first] = C.chebval(x, self.starter.wp_cheb)
                wp[first] = C.chebval(x, C.chebder(self.starter.wp_cheb)) * 2.0 / self.starter.h
            else:
                w[first], wp[first] = self.starter(r[first])
        rest = ~first
        if rest.any():
            if self._starts is None or len(self._starts) == 0:
                w[rest], wp[rest] = self.w[-1], self.wp[-1]
                if derivative:
                    w[rest], wp[rest] = self.wp[-1], 0.0
            else:
                rr = r[rest]
                idx = np.clip(np.searchsorted(self._starts, rr, side="right") - 1, 0, len(self._starts) - 1)
                hh = self._widths[idx]
                th = (rr - self._starts[idx]) / hh
                cw = self._coeffs[idx, 0]
                cp = self._coeffs[idx, 1]
                if derivative:
                    w[rest] = (cp[:, 0] + th * (cp[:, 1] + th * (cp[:, 2] + th * (cp[:, 3] + th * cp[:, 4]))))
                    wp[rest] = (cp[:, 1] + th * (2 * cp[:, 2] + th * (3 * cp[:, 3] + th * 4 * cp[:, 4]))) / hh
                else:
                    w[rest] = cw[:, 0] + th * (cw[:, 1] + th * (cw[:, 2] + th * (cw[:, 3] + th * cw[:, 4])))
                    wp[rest] = cp[:, 0] + th * (cp[:, 1] + th * (cp[:, 2] + th * (cp[:, 3] + th * cp[:, 4])))
        return w, wp

    def step_polynomials(self):
        return self._starts, self._widths, self._coeffs


def _constant_trajectory(problem: SingularIVP, reason: str) -> Trajectory:
    a = problem.a
    r = np.array([0.0, problem.r_max])
    return Trajectory(problem, r, np.array([a, a]), np.zeros(2), (),
                      Termination("ReachedEnd", problem.r_max, reason),
                      {"n_accepted": 0, "n_rejected": 0, "nfev": 0, "error_estimate": 0.0},
                      None, np.array([0.0]), np.array([problem.r_max]),
                      np.array([[[a, 0, 0, 0, 0], [0, 0, 0, 0, 0]]], dtype=float))


def handoff_radius(problem: SingularIVP) -> tuple[float, float]:
    delta = contraction_radius(problem)
    scale = min(1.0, problem.r_max)
    return min(delta, 1e-3 * scale), delta


def integrate(problem: SingularIVP, *, rtol: float = 1e-10, atol: float = 1e-12,
              check: bool = True, max_steps: int = 2_000_000, max_step: float = math.inf) -> Trajectory:
    """Integrate from the singular start to r_max, blow-up or step collapse."""
    prob = problem.canonical()
    if check:
        rep = cached_hypotheses(prob.family, prob.nl)
        keys = ["f1", "f2", "f3"]
        if not prob.family.regular:
            keys += ["q1", "q2", "q3", "q4", "rho1"]
        bad = rep.failing(keys)
        if bad:
            raise HypothesisViolation(bad, rep)
    if prob.nl.f(prob.a) == 0.0:
        return _constant_trajectory(problem, "stationary initial value")

    if prob.family.regular:
        starter = None
        r0, w0, wp0 = 0.0, prob.a, 0.0
    else:
        h0, _ = handoff_radius(prob)
        starter = picard_start(prob, h0)
        r0, w0, wp0 = h0, starter.w, starter.wp

    raw = integrate_dopri(prob.acceleration(), r0, w0, wp0, prob.r_max, rtol=rtol, atol=atol,
                          blowup_cap=BLOWUP_CAP, collapse_ratio=COLLAPSE_RATIO, span=prob.r_max,
                          max_steps=max_steps, max_step=max_step)
    r = np.array(raw.r)
    w = np.array(raw.w)
    wp = np.array(raw.wp)
    if starter is not None:
        r = np.concatenate(([0.0], r))
        w = np.concatenate(([prob.a], w))
        wp = np.concatenate(([0.0], wp))
    events = tuple(Event(e.kind, e.r) for e in raw.events)
    stats = {"n_accepted": raw.n_accepted, "n_rejected": raw.n_rejected, "nfev": raw.nfev,
             "error_estimate": raw.err_sum, "rtol": rtol, "atol": atol,
             "handoff": r0, "picard_iterations": starter.iterations if starter else 0,
             "contraction_radius": starter.delta if starter else math.inf}
    term = Termination(raw.status, float(r[-1]), raw.reason)
    starts, widths, coeffs = dense_arrays(raw)
    traj = Trajectory(problem, r, w, wp, events, term, stats, starter, starts, widths, coeffs)
    if term.kind == "BlowUp":
        R, k, low = _fit_blowup(traj)
        traj = replace(traj, termination=replace(term, R_est=R, fit_exponent=k, low_confidence=low))
    return traj


# ---------------------------------------------------------------------------
# blow-up rate


def _tail_samples(traj: Trajectory, lo=1e3, hi=1e6, min_nodes=20):
    aw = np.abs(traj.w)
    mask = (aw >= lo) & (aw <= hi)
    r, w = traj.r[mask], aw[mask]
    if len(r) >= min_nodes or len(r) < 2:
        return r, w, len(r) >= min_nodes
    # densify with the interpolant between the first and last tail nodes
    rr = np.linspace(r[0], r[-1], 4 * min_nodes)
    ww = np.abs(traj(rr)[0])
    return rr, ww, False


def _fit_blowup(traj: Trajectory, lo=1e3, hi=1e6):
    r, w, enough = _tail_samples(traj, lo, hi)
    if len(r) < 3:
        return float(traj.r[-1]), math.nan, True
    y = np.log(w)
    r_last = float(traj.r[-1])
    width = max(r_last - r[0], 1e-300)

    def resid(R):
        x = np.log(R - r)
        A = np.vstack([x, np.ones_like(x)]).T
        coef, res, *_ = np.linalg.lstsq(A, y, rcond=None)
        return float(np.sum((A @ coef - y) ** 2)), -coef[0]

    # golden-section search for R on (r_last, r_last + width]
    g = (math.sqrt(5) - 1) / 2
    a, b = r_last + 1e-12 * width, r_last + width
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = resid(c)[0], resid(d)[0]
    for _ in range(200):
        if b - a <= 1e-14 * max(1.0, abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = resid(c)[0]
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = resid(d)[0]
    R = 0.5 * (a + b)
    return R, resid(R)[1], not enough


def estimate_blowup(traj: Trajectory, nl: Nonlinearity | None = None) -> tuple[float, float]:
    """(R_est, kappa) from a log-log fit w ~ K (R - r)^(-kappa) of the tail."""
    if traj.termination.kind != "BlowUp":
        raise NotBlowUp(f"trajectory terminated with {traj.termination.kind}")
    R, k, _ = _fit_blowup(traj)
    return R, k
