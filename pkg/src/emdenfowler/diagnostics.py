"""Energies, the Pohozaev identity and qualitative classification of trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy import special

from .coefficients import Nonlinearity, PowerLaw, PurePower
from .singular_ivp import SingularIVP, Trajectory, integrate

CLASSES = (
    "oscillatory_stable",
    "oscillatory_not_stable",
    "positive_monotone_decreasing_stable",
    "positive_increasing_blowup",
    "constant",
)

DRIFT_BOUND = 1e-9
STABLE_FRACTION = 1e-3


@dataclass(frozen=True)
class EnergyReport:
    r: np.ndarray
    E: np.ndarray
    kind: str                 # "E" (minus sign) or "E_hat" (plus sign)
    drift_per_unit_r: float   # total upward movement divided by the span
    spread: float             # max E - min E
    nonincreasing: bool


def energy(traj: Trajectory, nl: Nonlinearity, sign: str) -> EnergyReport:
    """E = w'^2/2 + F(w) for the minus sign, E_hat = w'^2/2 - F(w) for plus."""
    F = np.asarray(nl.F(traj.w), dtype=float)
    kin = 0.5 * traj.wp ** 2
    E = kin + F if sign == "minus" else kin - F
    inc = np.diff(E)
    span = max(float(traj.r[-1] - traj.r[0]), 1e-300)
    drift = float(np.sum(inc[inc > 0])) / span if len(inc) else 0.0
    return EnergyReport(traj.r, E, "E" if sign == "minus" else "E_hat", drift,
                        float(np.ptp(E)) if len(E) else 0.0, drift <= DRIFT_BOUND)


# ---------------------------------------------------------------------------
# Pohozaev identity


class PohozaevNotApplicable(ValueError):
    pass


@dataclass(frozen=True)
class PohozaevReport:
    max_residual: float
    coefficient: float        # (theta-1)/2 - (theta+1)/(p+1)
    r: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def max_abs_lhs(self) -> float:
        return float(np.max(np.abs(self.lhs)))


def _weighted_power_integral(traj: Trajectory, theta: float, p: float) -> np.ndarray:
    """Cumulative int_0^r s^theta |w|^(p+1) ds at every node.

    Simpson per accepted step using the dense-output midpoint; the starter
    segment [0, h0] uses Gauss-Jacobi with weight u^theta on the Picard
    interpolant.
    """
    r = traj.r
    out = np.zeros_like(r)
    i0 = 0
    if traj.starter is not None:
        h0 = traj.r[1]
        x, wj = special.roots_jacobi(20, 0.0, theta)
        u = (1 + x) / 2
        wv = C.chebval(2 * u - 1, traj.starter.w_cheb) if traj.starter.h == h0 else traj(u * h0)[0]
        out[1] = h0 ** (theta + 1) * float(np.sum(wj / 2 ** (theta + 1) * np.abs(wv) ** (p + 1)))
        i0 = 1
    if len(r) - 1 > i0:
        a, b = r[i0:-1], r[i0 + 1:]
        m = 0.5 * (a + b)
        wa, wb = traj.w[i0:-1], traj.w[i0 + 1:]
        wm = traj(m)[0]
        g = lambda s, w: s ** theta * np.abs(w) ** (p + 1)  # noqa: E731
        seg = (b - a) / 6 * (g(a, wa) + 4 * g(m, wm) + g(b, wb))
        out[i0 + 1:] = out[i0] + np.cumsum(seg)
    return out


def pohozaev_residual(traj: Trajectory, theta: float, Lambda: float, p: float) -> PohozaevReport:
    prob = traj.problem
    if not (isinstance(prob.family, PowerLaw) and isinstance(prob.nl, PurePower)
            and prob.sign == "minus" and Lambda > 0):
        raise PohozaevNotApplicable("identity holds for (A-) with q = theta/r and f = Lambda |w|^(p-1) w, Lambda > 0")
    r, w, wp = traj.r, traj.w, traj.wp
    E = 0.5 * wp ** 2 + Lambda * np.abs(w) ** (p + 1) / (p + 1)
    lhs = -r ** (theta + 1) * E - 0.5 * (theta - 1) * r ** theta * w * wp
    coef = 0.5 * (theta - 1) - (theta + 1) / (p + 1)
    rhs = Lambda * coef * _weighted_power_integral(traj, theta, p)
    res = np.abs(lhs - rhs) / (1 + np.abs(lhs))
    return PohozaevReport(float(res.max()), coef, r, lhs, rhs)


# ---------------------------------------------------------------------------
# classification


def predict_class(theta: float, Lambda: float, p: float) -> str:
    if not p > 1:
        raise ValueError("p must exceed 1")
    if Lambda < 0:
        return "positive_increasing_blowup"
    if theta == 0:
        return "oscillatory_not_stable"
    if theta < (p + 3) / (p - 1):
        return "oscillatory_stable"
    return "positive_monotone_decreasing_stable"


@dataclass(frozen=True)
class Envelope:
    r: np.ndarray
    amplitude: np.ndarray
    slope: float              # d log A / d log r
    relative_change: float    # (A_last - A_first) / A_first
    trend: str                # decaying, constant, growing
    crossing_radius: float    # where the fit reaches STABLE_FRACTION * |a| (inf if never)
    below_within_horizon: bool


def envelope(traj: Trajectory) -> Envelope:
    """|w| at successive critical points (or at the nodes for monotone runs)."""
    cps = traj.critical_points
    cps = cps[cps > 0]
    if len(cps) >= 2:
        rr = cps
        amp = np.abs(traj(cps)[0])
    else:
        sel = traj.r > 0.05 * traj.r[-1]
        rr, amp = traj.r[sel], np.abs(traj.w[sel])
    a = abs(traj.problem.a)
    target = STABLE_FRACTION * a
    if len(rr) < 2 or np.any(amp <= 0):
        return Envelope(rr, amp, math.nan, 0.0, "constant", math.inf, bool(np.any(amp <= target)))
    half = rr >= rr[len(rr) // 2]
    if half.sum() < 2:
        half[:] = True
    x, y = np.log(rr[half]), np.log(amp[half])
    slope, icpt = np.polyfit(x, y, 1) if np.ptp(x) > 0 else (0.0, y[0])
    rel = float((amp[-1] - amp[0]) / amp[0])
    if abs(rel) <= 1e-3:
        trend = "constant"
    elif slope < -1e-2 and rel < 0:
        trend = "decaying"
    elif slope > 1e-2 and rel > 0:
        trend = "growing"
    else:
        trend = "constant"
    if slope < 0:
        e = (math.log(target) - icpt) / slope
        cross = math.exp(e) if e < 700 else math.inf
    else:
        cross = math.inf
    return Envelope(rr, amp, float(slope), rel, trend, cross, bool(amp[-1] <= target))


@dataclass(frozen=True)
class QualitativeReport:
    observed_class: str
    predicted_class: str | None
    zero_count: int
    amplitude_trend: str
    agreement: bool | None
    envelope: Envelope | None = None
    horizon: float = math.nan
    recommended_horizon: float | None = None
    notes: tuple = field(default_factory=tuple)

    def as_dict(self) -> dict:
        env = self.envelope
        return {
            "observed_class": self.observed_class,
            "predicted_class": self.predicted_class,
            "agreement": self.agreement,
            "zero_count": self.zero_count,
            "amplitude_trend": self.amplitude_trend,
            "horizon": self.horizon,
            "recommended_horizon": self.recommended_horizon,
            "envelope_slope": None if env is None else env.slope,
            "envelope_relative_change": None if env is None else env.relative_change,
            "stable_threshold_crossing_radius": None if env is None else env.crossing_radius,
            "below_threshold_within_horizon": None if env is None else env.below_within_horizon,
            "notes": list(self.notes),
        }


def _observe(traj: Trajectory) -> tuple[str, Envelope | None, list]:
    notes = []
    term = traj.termination
    if len(traj.r) == 2 and np.all(traj.w == traj.w[0]) and np.all(traj.wp == 0):
        return "constant", None, notes
    if term.kind == "BlowUp":
        w = traj.w
        if np.all(np.diff(w) > 0) and w[0] > 0:
            return "positive_increasing_blowup", None, notes
        notes.append("blow-up without monotone positive growth")
        return "inconclusive", None, notes
    if term.kind == "StepCollapse":
        notes.append(f"step collapse at r = {term.r_stop:.6g}: {term.reason}")
        return "inconclusive", None, notes
    env = envelope(traj)
    zc = traj.zero_count
    if zc >= 3:
        if env.trend == "decaying":
            return "oscillatory_stable", env, notes
        return "oscillatory_not_stable", env, notes
    if zc == 0:
        if np.all(traj.w > 0) and np.all(traj.wp[1:] <= 0) and env.trend == "decaying":
            return "positive_monotone_decreasing_stable", env, notes
    return "inconclusive", env, notes


def classify(traj: Trajectory, params: dict | None = None) -> QualitativeReport:
    """Observed class of a trajectory, compared with the predicted regime.

    ``params`` may carry theta, Lambda, p; by default they are read from the
    problem when it is a PowerLaw/PurePower pair.
    """
    prob = traj.problem
    params = dict(params or {})
    if not params and isinstance(prob.family, PowerLaw) and isinstance(prob.nl, PurePower):
        lam = prob.nl.Lambda if prob.sign == "minus" else -prob.nl.Lambda
        params = {"theta": prob.family.theta, "Lambda": lam, "p": prob.nl.p}
    predicted = predict_class(params["theta"], params["Lambda"], params["p"]) if params else None
    observed, env, notes = _observe(traj)
    rec = None
    if observed == "inconclusive":
        rec = 2 * traj.r_end
        notes.append(f"fewer than 3 zeros without decay; retry with horizon {rec:g}")
    agree = None if predicted is None or observed == "inconclusive" else observed == predicted
    return QualitativeReport(observed, predicted, traj.zero_count,
                             "growing" if observed == "positive_increasing_blowup" else (env.trend if env else "constant"),
                             agree, env, traj.r_end, rec, tuple(notes))


def classify_with_doubling(problem: SingularIVP, max_doublings: int = 3, **kw) -> tuple[Trajectory, QualitativeReport]:
    """Integrate and classify, doubling the horizon while the verdict is inconclusive."""
    prob = problem
    for _ in range(max_doublings + 1):
        traj = integrate(prob, **kw)
        rep = classify(traj)
        if rep.observed_class != "inconclusive" or traj.termination.kind != "ReachedEnd":
            return traj, rep
        prob = SingularIVP(prob.family, prob.nl, prob.sign, prob.a, 2 * prob.r_max)
    return traj, rep
