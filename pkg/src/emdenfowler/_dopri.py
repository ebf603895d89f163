"""Dormand-Prince 5(4) stepper for scalar second-order ODEs w'' = acc(r, w, w').

The state is kept as two Python floats rather than numpy arrays: for a
two-dimensional system the per-step overhead of small arrays dominates.
Step size control is the PI controller of Hairer, Norsett & Wanner
(Solving ODEs I, sec. II.4) with Lund stabilisation beta = 0.04.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
# b - b_hat (error of the embedded 4th order solution)
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                          -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension (Hairer's contd5)
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFE = 0.9
FAC_MIN = 0.2
FAC_MAX = 10.0
BETA = 0.04
EXPO1 = 0.2 - 0.75 * BETA

Acceleration = Callable[[float, float, float], float]


@dataclass
class EventHit:
    kind: str  # "zero" or "critical_point"
    r: float
    step: int


@dataclass
class RawRun:
    r: list = field(default_factory=list)
    w: list = field(default_factory=list)
    wp: list = field(default_factory=list)
    # per-step polynomial coefficients in theta in [0, 1]: (a0..a4) for w and w'
    poly: list = field(default_factory=list)
    events: list = field(default_factory=list)
    status: str = "ReachedEnd"
    reason: str = ""
    n_accepted: int = 0
    n_rejected: int = 0
    nfev: int = 0
    err_sum: float = 0.0
    h_last: float = float("nan")


def _poly(c1, c2, c3, c4, c5):
    # y(theta) = c1 + theta(c2 + (1-theta)(c3 + theta(c4 + (1-theta) c5))), expanded
    return (c1, c2 + c3, c4 + c5 - c3, -(c4 + 2.0 * c5), c5)


def poly_eval(p, th):
    return p[0] + th * (p[1] + th * (p[2] + th * (p[3] + th * p[4])))


def poly_deriv(p, th):
    return p[1] + th * (2.0 * p[2] + th * (3.0 * p[3] + th * 4.0 * p[4]))


def _refine(p, a, b, fa, fb, tol, maxiter=60):
    """Bracketed root of the step polynomial on [a, b] (theta units).

    Illinois-modified regula falsi, falling back to bisection whenever the
    secant point leaves the middle of the bracket.
    """
    side = 0
    for _ in range(maxiter):
        if b - a <= tol:
            break
        m = b - fb * (b - a) / (fb - fa) if fb != fa else 0.5 * (a + b)
        if not (a + 0.01 * (b - a) < m < b - 0.01 * (b - a)):
            m = 0.5 * (a + b)
        fm = poly_eval(p, m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
            if side == -1:
                fb *= 0.5
            side = -1
        else:
            b, fb = m, fm
            if side == 1:
                fa *= 0.5
            side = 1
    return 0.5 * (a + b) if fa != fb else a


def _scan_events(out: RawRun, step_idx, r0, h, pw, pwp, event_tol):
    for kind, p in (("zero", pw), ("critical_point", pwp)):
        vals = (poly_eval(p, 0.0), poly_eval(p, 0.5), poly_eval(p, 1.0))
        for (ta, fa), (tb, fb) in (((0.0, vals[0]), (0.5, vals[1])),
                                   ((0.5, vals[1]), (1.0, vals[2]))):
            # a root exactly at a node belongs to the step that ends there
            if fa == 0.0:
                continue
            if fb == 0.0 or (fa > 0) != (fb > 0):
                th = tb if fb == 0.0 else _refine(p, ta, tb, fa, fb, event_tol / h)
                out.events.append(EventHit(kind, r0 + th * h, step_idx))


def initial_step(acc, r0, w0, wp0, rtol, atol, direction_span):
    """Hairer's starting step heuristic, specialised to two components."""
    a0 = acc(r0, w0, wp0)
    sc_w = atol + rtol * abs(w0)
    sc_p = atol + rtol * abs(wp0)
    d0 = math.sqrt(0.5 * ((w0 / sc_w) ** 2 + (wp0 / sc_p) ** 2))
    d1 = math.sqrt(0.5 * ((wp0 / sc_w) ** 2 + (a0 / sc_p) ** 2))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, direction_span)
    w1, wp1 = w0 + h0 * wp0, wp0 + h0 * a0
    a1 = acc(r0 + h0, w1, wp1)
    d2 = math.sqrt(0.5 * (((wp1 - wp0) / sc_w) ** 2 + ((a1 - a0) / sc_p) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, direction_span)


def integrate_dopri(
    acc: Acceleration,
    r0: float,
    w0: float,
    wp0: float,
    r_end: float,
    *,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    h0: float | None = None,
    max_step: float = math.inf,
    blowup_cap: float = 1e8,
    collapse_ratio: float = 1e-13,
    span: float | None = None,
    event_tol: float = 1e-12,
    max_steps: int = 2_000_000,
    detect_events: bool = True,
) -> RawRun:
    """Integrate from r0 to r_end (r_end > r0).

    Termination: ``ReachedEnd``; ``BlowUp`` when |w| >= blowup_cap *and* the
    controller asks for a step below ``collapse_ratio * span``;
    ``StepCollapse`` when the step collapses without the cap (or the state
    stops being finite, or ``max_steps`` is exhausted).
    """
    out = RawRun()
    out.r.append(r0)
    out.w.append(w0)
    out.wp.append(wp0)
    if span is None:
        span = r_end - r0
    h_min = collapse_ratio * span
    r, w, wp = r0, w0, wp0
    try:
        k1w, k1p = wp, acc(r, w, wp)
    except (OverflowError, ZeroDivisionError):
        out.status, out.reason = "StepCollapse", "non-finite right-hand side at start"
        return out
    out.nfev += 1
    if h0 is None:
        h = initial_step(acc, r, w, wp, rtol, atol, r_end - r0)
        out.nfev += 1
    else:
        h = h0
    h = min(h, max_step)
    facold = 1e-4
    reject = False
    step_idx = 0

    while True:
        if r_end - r <= 1e-15 * max(1.0, abs(r_end)):
            break
        if out.n_accepted + out.n_rejected >= max_steps:
            out.status, out.reason = "StepCollapse", "max_steps exhausted"
            break
        last = False
        if r + h >= r_end:
            h = r_end - r
            last = True
        if h < h_min:
            out.status = "BlowUp" if abs(w) >= blowup_cap else "StepCollapse"
            out.reason = f"step {h:.3e} below {h_min:.3e}"
            break
        try:
            y2w = w + h * A21 * k1w
            y2p = wp + h * A21 * k1p
            k2w, k2p = y2p, acc(r + C2 * h, y2w, y2p)
            y3w = w + h * (A31 * k1w + A32 * k2w)
            y3p = wp + h * (A31 * k1p + A32 * k2p)
            k3w, k3p = y3p, acc(r + C3 * h, y3w, y3p)
            y4w = w + h * (A41 * k1w + A42 * k2w + A43 * k3w)
            y4p = wp + h * (A41 * k1p + A42 * k2p + A43 * k3p)
            k4w, k4p = y4p, acc(r + C4 * h, y4w, y4p)
            y5w = w + h * (A51 * k1w + A52 * k2w + A53 * k3w + A54 * k4w)
            y5p = wp + h * (A51 * k1p + A52 * k2p + A53 * k3p + A54 * k4p)
            k5w, k5p = y5p, acc(r + C5 * h, y5w, y5p)
            y6w = w + h * (A61 * k1w + A62 * k2w + A63 * k3w + A64 * k4w + A65 * k5w)
            y6p = wp + h * (A61 * k1p + A62 * k2p + A63 * k3p + A64 * k4p + A65 * k5p)
            r_new = r + h
            k6w, k6p = y6p, acc(r_new, y6w, y6p)
            wn = w + h * (B1 * k1w + B3 * k3w + B4 * k4w + B5 * k5w + B6 * k6w)
            wpn = wp + h * (B1 * k1p + B3 * k3p + B4 * k4p + B5 * k5p + B6 * k6p)
            k7w, k7p = wpn, acc(r_new, wn, wpn)
            out.nfev += 6
            ew = h * (E1 * k1w + E3 * k3w + E4 * k4w + E5 * k5w + E6 * k6w + E7 * k7w)
            ep = h * (E1 * k1p + E3 * k3p + E4 * k4p + E5 * k5p + E6 * k6p + E7 * k7p)
            sw = atol + rtol * max(abs(w), abs(wn))
            sp = atol + rtol * max(abs(wp), abs(wpn))
            err = math.sqrt(0.5 * ((ew / sw) ** 2 + (ep / sp) ** 2))
            if not math.isfinite(err):
                raise OverflowError
        except (OverflowError, ZeroDivisionError):
            out.n_rejected += 1
            h *= 0.1
            reject = True
            continue

        fac11 = err ** EXPO1 if err > 0 else 0.0
        if err <= 1.0:
            fac = fac11 / facold ** BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            h_new = h / fac
            facold = max(err, 1e-4)
            # dense output on [r, r_new]
            dw = wn - w
            dp = wpn - wp
            bw = h * k1w - dw
            bp = h * k1p - dp
            c5w = h * (D1 * k1w + D3 * k3w + D4 * k4w + D5 * k5w + D6 * k6w + D7 * k7w)
            c5p = h * (D1 * k1p + D3 * k3p + D4 * k4p + D5 * k5p + D6 * k6p + D7 * k7p)
            pw = _poly(w, dw, bw, dw - h * k7w - bw, c5w)
            pp = _poly(wp, dp, bp, dp - h * k7p - bp, c5p)
            out.poly.append((r, h, pw, pp))
            if detect_events:
                _scan_events(out, step_idx, r, h, pw, pp, event_tol)
            out.err_sum += abs(ew)
            out.n_accepted += 1
            step_idx += 1
            r, w, wp = (r_end if last else r_new), wn, wpn
            k1w, k1p = k7w, k7p
            out.r.append(r)
            out.w.append(w)
            out.wp.append(wp)
            if reject:
                h_new = min(h_new, h)
            reject = False
            h = min(h_new, max_step)
            out.h_last = h
            if last:
                break
        else:
            out.n_rejected += 1
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            reject = True
    return out


def dense_arrays(raw: RawRun):
    """Pack the per-step polynomials into numpy arrays (starts, widths, coeffs)."""
    n = len(raw.poly)
    starts = np.empty(n)
    widths = np.empty(n)
    coeffs = np.empty((n, 2, 5))
    for i, (r0, h, pw, pp) in enumerate(raw.poly):
        starts[i] = r0
        widths[i] = h
        coeffs[i, 0] = pw
        coeffs[i, 1] = pp
    return starts, widths, coeffs
