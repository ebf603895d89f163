"""Profiles of the reduced flat-space equation (gamma t + delta) v'' + beta v' = -mu |v|^(p-1) v.

With t = +-r^2 the equation becomes w'' + (theta/r) w' = -Lambda |w|^(p-1) w
with theta = 2 beta/gamma - 1 = k + n - 1 and Lambda = +-4 mu/gamma; with
gamma = 0 it is the autonomous equation v'' = -(mu/delta) |v|^(p-1) v on
both half-lines. The case taxonomy is decided from the parameters before
any integration, and each integrated piece is then checked against the
behaviour the case predicts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .coefficients import PowerLaw, PurePower
from .diagnostics import QualitativeReport, classify_with_doubling, predict_class
from .profiles import PiecewiseProfile, ProfilePiece
from .singular_ivp import SingularIVP

CASE_TAGS = ("M1.1", "M1.2", "M2.1", "M2.2", "M2.3", "M2.4", "M3.1", "M3.2")


@dataclass(frozen=True)
class MinkowskiParams:
    gamma: float
    delta: float
    beta: float
    mu: float
    k: int
    n: int
    p: float
    d: float
    A_zero: bool = False

    @property
    def threshold(self) -> float:
        """(beta + gamma)/(beta - gamma) = (k+n+2)/(k+n-2); infinite when k + n <= 2."""
        kn = self.k + self.n
        return (kn + 2) / (kn - 2) if kn > 2 else float("inf")


@dataclass(frozen=True)
class CaseDecision:
    tag: str
    image: str                  # "R", "[0,inf)" or "(-inf,0]"
    theta: float
    sides: tuple                # (map, Lambda) for each integrated side
    mirrored: bool = False
    boundary: bool = False


@dataclass(frozen=True)
class MinkowskiProfile:
    case_tag: str
    params: MinkowskiParams
    decision: CaseDecision
    profile: PiecewiseProfile
    reports: tuple              # QualitativeReport per piece
    mismatches: tuple = field(default_factory=tuple)

    @property
    def pieces(self):
        return self.profile.pieces

    @property
    def domain(self):
        return self.profile.domain

    @property
    def blowup_abscissae(self) -> list[float]:
        """|t| at which a piece blows up (R_r^2 for squared maps, R_r otherwise)."""
        out = []
        for pc in self.pieces:
            term = pc.traj.termination
            if term.kind == "BlowUp" and term.R_est is not None:
                R = float(term.R_est)
                out.append(R * R if "square" in pc.map else R)
        return out


def classify_case(par: MinkowskiParams) -> CaseDecision:
    """Pick the case of the flat-space taxonomy from the parameters alone."""
    if par.A_zero or par.gamma == 0:
        if par.delta == 0:
            raise ValueError("gamma = delta = 0 leaves no second-order equation")
        lam = par.mu / par.delta
        tag = "M1.1" if lam > 0 else "M1.2"
        return CaseDecision(tag, "R", 0.0, (("identity", lam), ("neg-identity", lam)))
    if par.delta != 0:
        raise ValueError("with gamma != 0 the linear term is translated away: delta must be 0")
    k, n = par.k, par.n
    if k + n < 1:
        raise ValueError("need k + n >= 1")
    theta = float(k + n - 1)
    lam_pos = 4 * par.mu / par.gamma      # side t = r^2
    lam_neg = -4 * par.mu / par.gamma     # side t = -r^2
    alpha = par.gamma / 4
    thr = par.threshold
    boundary = par.p == thr
    if k == 0 or n == 0:
        upper = (k == 0 and alpha > 0) or (n == 0 and alpha < 0)
        side = ("square", lam_pos) if upper else ("neg-square", lam_neg)
        lam = side[1]
        if lam < 0:
            tag = "M2.4"
        elif theta == 0:
            tag = "M2.1"
        elif par.p >= thr:
            tag = "M2.3"
        else:
            tag = "M2.2"
        return CaseDecision(tag, "[0,inf)" if upper else "(-inf,0]", theta, (side,),
                            mirrored=not upper, boundary=boundary)
    # both signs present: image is R, one side blows up and the other is global
    mirrored = par.mu * par.gamma > 0
    tag = "M3.2" if par.p >= thr else "M3.1"
    return CaseDecision(tag, "R", theta, (("square", lam_pos), ("neg-square", lam_neg)),
                        mirrored=mirrored, boundary=boundary)


def build_minkowski_profile(par: MinkowskiParams, *, r_max: float = 200.0, rtol: float = 1e-10,
                            atol: float = 1e-12) -> MinkowskiProfile:
    if not par.d > 0:
        raise ValueError("initial value d must be positive")
    dec = classify_case(par)
    pieces, reports, mism = [], [], []
    cache = {}
    for mp, lam in dec.sides:
        key = (lam,)
        if key not in cache:
            prob = SingularIVP(PowerLaw(dec.theta), PurePower(lam, par.p), "minus", par.d, r_max)
            cache[key] = classify_with_doubling(prob, rtol=rtol, atol=atol)
        traj, rep = cache[key]
        pieces.append(ProfilePiece(traj, mp))
        reports.append(rep)
        expected = predict_class(dec.theta, lam, par.p)
        if rep.observed_class != expected:
            mism.append(f"{mp} side: expected {expected}, observed {rep.observed_class}")
    prof = PiecewiseProfile(tuple(pieces))
    return MinkowskiProfile(dec.tag, par, dec, prof, tuple(reports), tuple(mism))
