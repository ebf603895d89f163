"""Double shooting for the compact problem on [0, pi] and gluing with hyperbolic pieces.

The compact equation

    w'' + [((m-1)/l) cos r - beta] / sin r * w' + (lambda/l^2) (|w|^(p-1) w - w) = 0

is singular at both ends. A forward half starts at r = 0 with w(0) = d and a
backward half starts at r = pi with w(pi) = e (integrated in s = pi - r with
the reflected coefficient); the halves are matched at r = pi/2.

Candidates come from intersecting the two midpoint curves in the phase plane
(w, w') traced over log lattices of d and |e|; each candidate is polished
by damped Newton on the 2x2 matching map and certified by counting sign
changes of the assembled solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import PowerMinusLinear, SinhRatio, SinRatio
from .profiles import PiecewiseProfile, ProfilePiece
from .singular_ivp import SingularIVP, Trajectory, integrate

HALF = math.pi / 2
MATCH_TOL = 1e-9
TANGENCY_FLOOR = 1e-8


class ShootingError(RuntimeError):
    pass


class NotFoundInRange(ShootingError):
    def __init__(self, k, bracket):
        super().__init__(f"no solution with {k} zeros found for initial values in {bracket}")
        self.k = k
        self.bracket = bracket


class GluingRejected(ShootingError):
    pass


@dataclass(frozen=True)
class CompactProblem:
    ell: int
    m: int
    n1: int
    n2: int
    lam: float
    p: float

    def __post_init__(self):
        if self.ell not in (1, 2, 3, 4, 6):
            raise ValueError("ell must be one of 1, 2, 3, 4, 6")
        if self.m < 3:
            raise ValueError("m must be at least 3")
        for n in (self.n1, self.n2):
            if not 0 <= n <= self.m - 2:
                raise ValueError("n1, n2 must lie in 0..m-2")
        if abs((self.m - 1) * (self.ell - 1) / self.ell - (self.n1 + self.n2) / 2) > 1e-12:
            raise ValueError("need (m-1)(l-1)/l = (n1+n2)/2")
        if not (self.lam > 0 and self.p > 1):
            raise ValueError("need lambda > 0 and p > 1")
        if not (self.alpha + self.beta > 0 and self.alpha - self.beta > 0):
            raise ValueError("need (m-1)/l +- beta > 0")

    @property
    def beta(self) -> float:
        # (m1 - m2)/2 with m_i = (m-1) - n_i
        return (self.n2 - self.n1) / 2

    @property
    def alpha(self) -> float:
        return (self.m - 1) / self.ell

    @property
    def kappa(self) -> int:
        return min(self.n1, self.n2)

    @property
    def Lambda(self) -> float:
        return self.lam / self.ell ** 2

    @property
    def nl(self) -> PowerMinusLinear:
        return PowerMinusLinear(self.Lambda, self.p)

    @property
    def kzero_bound(self) -> float:
        mk = self.m - self.kappa
        return (mk + 1) / (mk - 1)

    @property
    def nodal_bound(self) -> float:
        mk = self.m - self.kappa
        return (mk + 2) / (mk - 2) if mk > 2 else math.inf

    @property
    def subcritical_kzero(self) -> bool:
        return self.p < self.kzero_bound

    @property
    def subcritical_nodal(self) -> bool:
        return self.p < self.nodal_bound

    def family(self, side: str) -> SinRatio:
        return SinRatio(self.alpha, self.beta if side == "zero" else -self.beta)

    def flags(self) -> dict:
        return {"kzero_bound": self.kzero_bound, "subcritical_kzero": self.subcritical_kzero,
                "nodal_bound": self.nodal_bound, "subcritical_nodal": self.subcritical_nodal}


# ---------------------------------------------------------------------------
# halves


@dataclass(frozen=True)
class HalfResult:
    value: float
    side: str
    w: float                  # w at pi/2
    wp: float                 # dw/dr at pi/2 in the original variable r
    zeros: int
    ok: bool
    traj: Trajectory | None


def integrate_compact_half(problem: CompactProblem, side: str, value: float, *,
                           rtol: float = 1e-11, atol: float = 1e-13) -> HalfResult:
    """Singular start at r = 0 (side 'zero') or r = pi (side 'pi'), integrated to pi/2."""
    if side not in ("zero", "pi"):
        raise ValueError("side must be 'zero' or 'pi'")
    if not math.isfinite(value):
        raise ValueError("initial value must be finite")
    prob = SingularIVP(problem.family(side), problem.nl, "minus", float(value), HALF)
    tr = integrate(prob, rtol=rtol, atol=atol, check=False)
    ok = tr.termination.kind == "ReachedEnd"
    w, wp = float(tr.w[-1]), float(tr.wp[-1])
    if side == "pi":
        wp = -wp
    return HalfResult(float(value), side, w, wp, tr.zero_count, ok, tr)


def _half_cached(problem, side, value, cache, **kw):
    fam = problem.family(side)
    key = (fam, float(value))
    if key not in cache:
        cache[key] = integrate_compact_half(problem, side, value, **kw)
    res = cache[key]
    if res.side != side:
        # reflected families coincide when beta = 0; only the derivative sign differs
        res = HalfResult(res.value, side, res.w, -res.wp, res.zeros, res.ok, res.traj)
    return res


# ---------------------------------------------------------------------------
# solutions


@dataclass(frozen=True)
class CompactSolution:
    problem: CompactProblem
    d: float
    e: float
    forward: Trajectory
    backward: Trajectory
    zero_count: int
    defect: tuple             # (value, derivative) mismatch at pi/2
    min_abs_at_critical: float
    newton_iterations: int = 0
    flags: dict = field(default_factory=dict)

    @property
    def constant(self) -> bool:
        return self.forward.stats.get("nfev", 1) == 0 and self.backward.stats.get("nfev", 1) == 0

    def __call__(self, r):
        """(w, w') on [0, pi] from the two halves."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        w = np.empty_like(r)
        wp = np.empty_like(r)
        lo = r <= HALF
        if lo.any():
            w[lo], wp[lo] = self.forward(r[lo])
        if (~lo).any():
            a, b = self.backward(math.pi - r[~lo])
            w[~lo], wp[~lo] = a, -b
        return w, wp

    def zeros(self) -> np.ndarray:
        zs = sorted([z for z in self.forward.zeros] + [math.pi - z for z in self.backward.zeros])
        out = []
        for z in zs:
            if not out or z - out[-1] > 1e-9:
                out.append(z)
        return np.array(out)

    def as_dict(self) -> dict:
        return {"d": self.d, "e": self.e, "k": self.zero_count, "zeros": self.zeros().tolist(),
                "matching_defect": list(self.defect), "min_abs_w_at_critical_points": self.min_abs_at_critical,
                "newton_iterations": self.newton_iterations, **self.flags}


def _count_sign_changes(fwd: Trajectory, bwd: Trajectory) -> tuple[int, float]:
    wf = fwd.w
    wb = bwd.w[::-1]
    w = np.concatenate([wf, wb[1:]])
    nz = w[np.abs(w) > 0]
    changes = int(np.sum(np.sign(nz[1:]) != np.sign(nz[:-1])))
    # tangential zeros: |w| at interior critical points must stay off zero
    cps = [fwd(c)[0][0] for c in fwd.critical_points] + [bwd(c)[0][0] for c in bwd.critical_points]
    floor = float(min((abs(x) for x in cps), default=math.inf))
    return changes, floor


def assemble(problem: CompactProblem, d: float, e: float, *, rtol=1e-11, atol=1e-13,
             iterations: int = 0) -> CompactSolution:
    f = integrate_compact_half(problem, "zero", d, rtol=rtol, atol=atol)
    b = integrate_compact_half(problem, "pi", e, rtol=rtol, atol=atol)
    if not (f.ok and b.ok):
        raise ShootingError("a half trajectory failed to reach pi/2")
    k, floor = _count_sign_changes(f.traj, b.traj)
    return CompactSolution(problem, float(d), float(e), f.traj, b.traj, k,
                           (f.w - b.w, f.wp - b.wp), floor, iterations, problem.flags())


def _matching(problem, d, e, cache, **kw):
    f = _half_cached(problem, "zero", d, cache, **kw)
    b = _half_cached(problem, "pi", e, cache, **kw)
    if not (f.ok and b.ok):
        return None
    return np.array([f.w - b.w, f.wp - b.wp])


def newton_match(problem: CompactProblem, d0: float, e0: float, *, tol: float = MATCH_TOL,
                 max_iter: int = 40, cache=None, **kw):
    """Damped Newton on M(d, e) with a forward-difference Jacobian."""
    cache = {} if cache is None else cache
    x = np.array([d0, e0], dtype=float)
    F = _matching(problem, x[0], x[1], cache, **kw)
    if F is None:
        return None
    for it in range(1, max_iter + 1):
        nrm = float(np.max(np.abs(F)))
        if nrm <= tol:
            return x, F, it - 1
        J = np.empty((2, 2))
        for j in range(2):
            h = 1e-7 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            Fp = _matching(problem, xp[0], xp[1], cache, **kw)
            if Fp is None:
                return None
            J[:, j] = (Fp - F) / h
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-4:
            xn = x + lam * step
            if abs(xn[0]) > 0 and abs(xn[1]) > 0:
                Fn = _matching(problem, xn[0], xn[1], cache, **kw)
                if Fn is not None and np.max(np.abs(Fn)) < nrm:
                    x, F = xn, Fn
                    break
            lam *= 0.5
        else:
            return None
    if float(np.max(np.abs(F))) <= tol:
        return x, F, max_iter
    return None


# ---------------------------------------------------------------------------
# scan


@dataclass(frozen=True)
class ScanCurve:
    values: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    zeros: np.ndarray
    ok: np.ndarray


def scan_curve(problem: CompactProblem, side: str, values, cache=None, **kw) -> ScanCurve:
    cache = {} if cache is None else cache
    res = [_half_cached(problem, side, v, cache, **kw) for v in values]
    return ScanCurve(np.asarray(values, dtype=float), np.array([r.w for r in res]),
                     np.array([r.wp for r in res]), np.array([r.zeros for r in res]),
                     np.array([r.ok for r in res]))


def _segment_intersections(A: ScanCurve, B: ScanCurve):
    """Parameter-space seeds where the two phase-plane polylines cross."""
    P = np.stack([A.w, A.wp], axis=1)
    Q = np.stack([B.w, B.wp], axis=1)
    p0, p1 = P[:-1], P[1:]
    q0, q1 = Q[:-1], Q[1:]
    okA = A.ok[:-1] & A.ok[1:]
    okB = B.ok[:-1] & B.ok[1:]
    r = (p1 - p0)[:, None, :]
    s = (q1 - q0)[None, :, :]
    qp = q0[None, :, :] - p0[:, None, :]
    den = r[..., 0] * s[..., 1] - r[..., 1] * s[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[..., 0] * s[..., 1] - qp[..., 1] * s[..., 0]) / den
        u = (qp[..., 0] * r[..., 1] - qp[..., 1] * r[..., 0]) / den
    hit = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1) & okA[:, None] & okB[None, :]
    seeds = []
    for i, j in zip(*np.nonzero(hit)):
        d = A.values[i] + t[i, j] * (A.values[i + 1] - A.values[i])
        e = B.values[j] + u[i, j] * (B.values[j + 1] - B.values[j])
        zc = (A.zeros[i], A.zeros[i + 1], B.zeros[j], B.zeros[j + 1])
        seeds.append((float(d), float(e), zc))
    return seeds


@dataclass(frozen=True)
class ScanResult:
    solutions: dict           # k -> list of CompactSolution sorted by d
    curves: tuple
    seeds: int


def scan_solutions(problem: CompactProblem, ks, *, d_range=(1.0, 100.0), n_lattice: int = 240,
                   positive_range=(1e-2, 100.0), rtol=1e-11, atol=1e-13,
                   first_only: bool = False) -> ScanResult:
    """Certified solutions with k zeros (for each k in ks) seeded by the phase-plane scan.

    Seeds are polished in order of increasing d; with ``first_only`` the
    scan stops once every requested k has a solution with d > 1.
    """
    ks = sorted(set(int(k) for k in ks))
    cache = {}
    kw = {"rtol": rtol, "atol": atol}
    found: dict = {k: [] for k in ks}
    curves = []
    n_seeds = 0
    for parity in sorted({(-1) ** k for k in ks}):
        if 0 in ks and parity == 1:
            lo, hi = positive_range
        else:
            lo, hi = d_range
        grid = np.geomspace(lo, hi, n_lattice + 1)[1:] if lo == 1.0 else np.geomspace(lo, hi, n_lattice)
        A = scan_curve(problem, "zero", grid, cache, **kw)
        B = scan_curve(problem, "pi", parity * grid, cache, **kw)
        curves.append((parity, A, B))
        seeds = _segment_intersections(A, B)
        n_seeds += len(seeds)
        for d0, e0, zc in sorted(seeds):
            if first_only and all(any(x.d > 1 for x in found[k]) for k in ks if (-1) ** k == parity):
                break
            rough = {zc[0] + zc[2], zc[1] + zc[3], zc[0] + zc[3], zc[1] + zc[2]}
            if not any(abs(k - x) <= 1 for k in ks for x in rough):
                continue
            res = newton_match(problem, d0, e0, cache=cache, **kw)
            if res is None:
                continue
            (d, e), F, its = res
            sol = assemble(problem, d, e, rtol=rtol, atol=atol, iterations=its)
            if sol.zero_count not in found or sol.min_abs_at_critical <= TANGENCY_FLOOR:
                continue
            if abs(d - 1) < 1e-6 and abs(e - 1) < 1e-6:
                continue  # the constant solution w = 1
            bucket = found[sol.zero_count]
            if all(abs(s.d - d) > 1e-6 * max(1, abs(d)) or abs(s.e - e) > 1e-6 * max(1, abs(e)) for s in bucket):
                bucket.append(sol)
    for k in found:
        found[k].sort(key=lambda s: s.d)
    return ScanResult(found, tuple(curves), n_seeds)


def constant_solution(problem: CompactProblem, value: float = 1.0) -> CompactSolution:
    f = integrate_compact_half(problem, "zero", value)
    b = integrate_compact_half(problem, "pi", value)
    return CompactSolution(problem, value, value, f.traj, b.traj, 0, (0.0, 0.0), math.inf, 0, problem.flags())


def shoot_k_nodal(problem: CompactProblem, k: int, *, d_range=(1.0, 100.0), n_lattice: int = 240,
                  enforce_gate: bool = True, scan: ScanResult | None = None) -> CompactSolution:
    """Smallest-d certified solution with exactly k zeros and d > 1."""
    if k == 0 and scan is None:
        return constant_solution(problem)
    if enforce_gate and not problem.subcritical_nodal:
        raise ShootingError(f"p = {problem.p} is not below the subcritical bound {problem.nodal_bound:g}")
    if scan is None:
        scan = scan_solutions(problem, [k], d_range=d_range, n_lattice=n_lattice, first_only=True)
    sols = [s for s in scan.solutions.get(k, []) if s.d > 1]
    if not sols:
        raise NotFoundInRange(k, d_range)
    sol = sols[0]
    flags = dict(sol.flags)
    if not problem.subcritical_kzero:
        flags["warning"] = (f"p = {problem.p} exceeds the k-zeroes bound {problem.kzero_bound:g}; "
                            f"shooting gated on the bound {problem.nodal_bound:g}")
    return CompactSolution(problem, sol.d, sol.e, sol.forward, sol.backward, sol.zero_count, sol.defect,
                           sol.min_abs_at_critical, sol.newton_iterations, flags)


def positive_solutions(problem: CompactProblem, *, value_range=(1e-2, 100.0), n_lattice: int = 240):
    """Nonconstant positive solutions found by the scan (constant w = 1 excluded)."""
    scan = scan_solutions(problem, [0], positive_range=value_range, n_lattice=n_lattice)
    return [s for s in scan.solutions[0] if s.e > 0 and s.d > 0]


# ---------------------------------------------------------------------------
# gluing


@dataclass(frozen=True)
class GluedSolution:
    problem: CompactProblem
    k: int
    case_tag: str
    middle: CompactSolution | None
    right: Trajectory
    left: Trajectory | None
    left_sign: float
    R_plus: float
    R_minus: float | None
    derivative_checks: dict
    profile: PiecewiseProfile

    def far_ends(self) -> dict:
        """Direction of v at each outer end: '+inf', '-inf', or the terminal value when no blow-up."""
        def end(traj, sign):
            if traj is None:
                return None
            last = sign * float(traj.w[-1])
            if traj.termination.kind == "BlowUp":
                return "+inf" if last > 0 else "-inf"
            return last
        return {"plus": end(self.right, 1.0), "minus": end(self.left, self.left_sign)}

    def as_dict(self) -> dict:
        return {"k": self.k, "case_tag": self.case_tag,
                "d": None if self.middle is None else self.middle.d,
                "e": None if self.middle is None else self.middle.e,
                "R_plus": self.R_plus, "R_minus": self.R_minus, "left_sign": self.left_sign,
                "far_ends": self.far_ends(),
                "derivative_checks": self.derivative_checks,
                "middle": None if self.middle is None else self.middle.as_dict()}


def natural_derivative(problem: CompactProblem, v: float, end: int) -> float:
    """v'(+-1) = -lambda (|v|^(p-1) v - v) / (l^2 (-+(m-1+l)/l + beta))."""
    num = problem.lam * (math.copysign(abs(v) ** problem.p, v) - v)
    den = problem.ell ** 2 * (-end * (problem.m - 1 + problem.ell) / problem.ell + problem.beta)
    return -num / den


def _limit_ratio(traj: Trajectory, denom, h: float) -> float:
    """lim_{r->0} w'(r)/denom(r) by Richardson extrapolation (error ~ r^2)."""
    hs = [h, h / 2, h / 4]
    vals = [traj(x)[1][0] / denom(x) for x in hs]
    r1 = (4 * vals[1] - vals[0]) / 3
    r2 = (4 * vals[2] - vals[1]) / 3
    return float((16 * r2 - r1) / 15)


def _check(natural: float, got: float, name: str) -> dict:
    return {"natural": float(natural), name: float(got),
            "error": abs(got - natural) / max(1.0, abs(natural))}


def hyperbolic_piece(problem: CompactProblem, value: float, side: str, r_max: float = 50.0,
                     rtol: float = 1e-11, atol: float = 1e-13) -> Trajectory:
    """(A+) with q = (alpha cosh r -+ beta)/sinh r; side 'right' uses the minus branch."""
    fam = SinhRatio(problem.alpha, problem.beta, "minus" if side == "right" else "plus")
    prob = SingularIVP(fam, problem.nl, "plus", float(value), r_max)
    return integrate(prob, rtol=rtol, atol=atol, check=True)


# image type of the isoparametric function -> solution type it carries
SOLUTION_TYPE = {"P1": "P2", "P2": "P1", "P3": "P3"}


def glue_entire(problem: CompactProblem, k: int, d: float | None = None, *, image: str = "P1",
                solution: CompactSolution | None = None, tol: float = 1e-6) -> GluedSolution:
    """Assemble v from the compact solution and the hyperbolic pieces.

    ``image`` is the image type of the isoparametric function: P1 (image R)
    gives the three-piece profile on (-R_-, R_+) tagged P2.k, P2 (image
    [-1, inf)) drops the left piece and is tagged P1.k, P3 (image [1, inf))
    keeps only the right piece and is tagged P3.1.
    """
    if image not in ("P1", "P2", "P3"):
        raise ValueError("image must be P1, P2 or P3")
    if solution is None and image != "P3":
        solution = constant_solution(problem) if k == 0 else shoot_k_nodal(problem, k)
    if solution is not None:
        d = solution.d
    if d is None:
        raise ValueError("an initial value d is required for a P3 profile")
    tag = "P3.1" if image == "P3" else f"{SOLUTION_TYPE[image]}.{k}"

    if d == 1.0 and (solution is None or solution.e == 1.0):
        right = _stationary_piece(problem, "right")
    else:
        right = hyperbolic_piece(problem, d, "right")
    checks = {}
    h = min(1e-3, 0.5 * right.r[1]) if right.starter is not None else 1e-3
    nat_p = natural_derivative(problem, d, +1)
    got = _limit_ratio(right, math.sinh, h) if right.starter is not None else 0.0
    checks["right_at_+1"] = _check(nat_p, got, "hyperbolic")
    pieces = [ProfilePiece(right, "cosh")]
    left = None
    sign = 1.0
    if solution is not None:
        fw = solution.forward
        got_m = _limit_ratio(fw, lambda r: -math.sin(r), h) if fw.starter is not None else 0.0
        checks["middle_at_+1"] = _check(nat_p, got_m, "compact")
        pieces.append(ProfilePiece(fw, "cos"))
        bw = solution.backward
        e = solution.e
        nat_m = natural_derivative(problem, e, -1)
        # backward half is y(s) = w(pi - s); t = cos(pi - s) = -cos s, v' = y'(s)/sin(s)
        got_b = _limit_ratio(bw, math.sin, h) if bw.starter is not None else 0.0
        checks["middle_at_-1"] = _check(nat_m, got_b, "compact")
        pieces.append(ProfilePiece(bw, "neg-cos"))
        if image == "P1":
            sign = 1.0 if e > 0 else -1.0
            if abs(e) == 1.0:
                left = _stationary_piece(problem, "left")
            else:
                left = hyperbolic_piece(problem, abs(e), "left")
            got_l = sign * _limit_ratio(left, lambda r: -math.sinh(r), h) if left.starter is not None else 0.0
            checks["left_at_-1"] = _check(nat_m, got_l, "hyperbolic")
            pieces.append(ProfilePiece(left, "neg-cosh", sign))
    worst = max(c["error"] for c in checks.values())
    if worst > tol:
        raise GluingRejected(f"natural-condition mismatch {worst:.3e} exceeds {tol:g}: {checks}")
    outer = [right] + ([left] if left is not None else [])
    if any(tr.zero_count for tr in outer):
        raise GluingRejected("a hyperbolic piece has a zero")
    R_plus = _abscissa(right)
    R_minus = _abscissa(left) if left is not None else None
    return GluedSolution(problem, k, tag, solution, right, left, sign, R_plus, R_minus, checks,
                         PiecewiseProfile(tuple(pieces)))


def _abscissa(traj: Trajectory) -> float:
    term = traj.termination
    if term.kind == "BlowUp" and term.R_est is not None:
        return float(math.cosh(term.R_est))
    return math.inf


def _stationary_piece(problem: CompactProblem, side: str) -> Trajectory:
    fam = SinhRatio(problem.alpha, problem.beta, "minus" if side == "right" else "plus")
    return integrate(SingularIVP(fam, problem.nl, "plus", 1.0, 50.0), check=False)


def t_equation_residual(glued: GluedSolution, n: int = 100, blowup_margin: float = 0.95) -> dict:
    """Relative residual of (1-t^2) v'' + (-(m+l-1)/l t + beta) v' + (lambda/l^2)(|v|^(p-1)v - v).

    v'' is taken from differentiating the dense interpolant of w', so the
    check is independent of the right-hand side used by the integrator.
    """
    pr = glued.problem
    c1 = -(pr.m + pr.ell - 1) / pr.ell
    out = {}
    for pc in glued.profile.pieces:
        top = pc.r_top
        if pc.traj.termination.kind == "BlowUp":
            top = blowup_margin * pc.traj.termination.r_stop
        if pc.map in ("cos", "neg-cos"):
            top = HALF
        r = np.linspace(0, top, n + 2)[1:-1]
        t, v, v1, v2 = pc.eval_r(r, second="dense")
        terms = np.stack([(1 - t * t) * v2, (c1 * t + pr.beta) * v1, pr.nl.f_array(v)])
        tot = terms.sum(axis=0)
        scale = np.maximum(1.0, np.abs(terms).max(axis=0))
        out[pc.map] = float(np.max(np.abs(tot) / scale))
    return out


def reflection_defect(sol: CompactSolution, rtol=1e-11, atol=1e-13) -> float:
    """Matching defect of (-d, -e); vanishes when w -> -w maps solutions to solutions."""
    F = _matching(sol.problem, -sol.d, -sol.e, {}, rtol=rtol, atol=atol)
    return math.inf if F is None else float(np.max(np.abs(F)))
