"""Piecewise profiles v(t) assembled from radial trajectories under variable maps.

A piece stores a trajectory w(r) and a map t = T(r) together with an outer
sign, so that v(T(r)) = sign * w(r). Derivatives follow from the chain rule

    v'  = sign * w' / T'
    v'' = sign * (w'' - w' T'' / T') / T'^2

where w'' is taken from the differential equation itself by default, or
from differentiating the dense interpolant of w' when an independent value
is wanted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .singular_ivp import Trajectory

# name -> (T, T', T'', inverse on the piece's r range)
_MAPS = {
    "identity": (lambda r: r, lambda r: np.ones_like(r), lambda r: np.zeros_like(r), lambda t: t),
    "neg-identity": (lambda r: -r, lambda r: -np.ones_like(r), lambda r: np.zeros_like(r), lambda t: -t),
    "square": (lambda r: r * r, lambda r: 2 * r, lambda r: 2 * np.ones_like(r), lambda t: np.sqrt(t)),
    "neg-square": (lambda r: -r * r, lambda r: -2 * r, lambda r: -2 * np.ones_like(r), lambda t: np.sqrt(-t)),
    "cos": (np.cos, lambda r: -np.sin(r), lambda r: -np.cos(r), np.arccos),
    "neg-cos": (lambda r: -np.cos(r), np.sin, np.cos, lambda t: np.arccos(-t)),
    "cosh": (np.cosh, np.sinh, np.cosh, np.arccosh),
    "neg-cosh": (lambda r: -np.cosh(r), lambda r: -np.sinh(r), lambda r: -np.cosh(r), lambda t: np.arccosh(-t)),
}


class OutsideProfile(ValueError):
    pass


@dataclass(frozen=True)
class ProfilePiece:
    traj: Trajectory
    map: str
    sign: float = 1.0
    r_lo: float = 0.0
    r_hi: float | None = None

    def __post_init__(self):
        if self.map not in _MAPS:
            raise ValueError(f"unknown variable map {self.map!r}")

    @property
    def r_top(self) -> float:
        return self.traj.r_end if self.r_hi is None else self.r_hi

    @property
    def t_range(self) -> tuple[float, float]:
        T = _MAPS[self.map][0]
        a, b = float(T(np.float64(self.r_lo))), float(T(np.float64(self.r_top)))
        return (min(a, b), max(a, b))

    def to_r(self, t):
        return _MAPS[self.map][3](np.asarray(t, dtype=float))

    def w_second(self, r, w, wp):
        acc = self.traj.problem.canonical().acceleration()
        return np.array([acc(float(ri), float(wi), float(pi)) for ri, wi, pi in zip(r, w, wp)])

    def eval_r(self, r, second: str = "ode"):
        """(t, v, v', v'') at radial points r of this piece."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        T, dT, d2T, _ = _MAPS[self.map]
        w, wp = self.traj(r)
        if second == "dense":
            wpp = self.traj(r, derivative=1)[1]
        else:
            wpp = self.w_second(r, w, wp)
        d1, d2 = dT(r), d2T(r)
        s = self.sign
        with np.errstate(divide="ignore", invalid="ignore"):
            v1 = s * wp / d1
            v2 = s * (wpp - wp * d2 / d1) / (d1 * d1)
        return T(r), s * w, v1, v2

    def eval_t(self, t):
        return self.eval_r(self.to_r(t))


@dataclass(frozen=True)
class PiecewiseProfile:
    pieces: tuple

    @property
    def domain(self) -> tuple[float, float]:
        lo = min(p.t_range[0] for p in self.pieces)
        hi = max(p.t_range[1] for p in self.pieces)
        return lo, hi

    def piece_for(self, t: float) -> ProfilePiece:
        for p in self.pieces:
            lo, hi = p.t_range
            if lo <= t <= hi:
                return p
        raise OutsideProfile(f"t = {t} outside the profile domain {self.domain}")

    def __call__(self, t):
        """(v, v', v'') at t (scalar or array)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        v = np.empty_like(t)
        v1 = np.empty_like(t)
        v2 = np.empty_like(t)
        for i, ti in enumerate(t):
            _, a, b, c = self.piece_for(float(ti)).eval_t(ti)
            v[i], v1[i], v2[i] = a[0], b[0], c[0]
        return v, v1, v2

    def samples(self, n_per_piece: int = 400):
        """(t, v) polyline through every piece, ordered by t."""
        ts, vs = [], []
        for p in self.pieces:
            rr = np.linspace(p.r_lo, p.r_top, n_per_piece)
            t, v, _, _ = p.eval_r(rr)
            ts.append(t)
            vs.append(v)
        t = np.concatenate(ts)
        v = np.concatenate(vs)
        order = np.argsort(t, kind="stable")
        return t[order], v[order]

    def roots(self, c: float) -> list[float]:
        """All t with v(t) = c, located on each piece's trajectory nodes and polished."""
        out = []
        for p in self.pieces:
            tr = p.traj
            r = tr.r[(tr.r >= p.r_lo) & (tr.r <= p.r_top)]
            g = p.sign * tr.w[(tr.r >= p.r_lo) & (tr.r <= p.r_top)] - c
            for i in range(len(r) - 1):
                if g[i] == 0.0:
                    out.append(float(p.eval_r(r[i])[0][0]))
                elif g[i] * g[i + 1] < 0:
                    out.append(float(p.eval_r(_bisect(p, c, r[i], r[i + 1]))[0][0]))
            if len(g) and g[-1] == 0.0:
                out.append(float(p.eval_r(r[-1])[0][0]))
        out = sorted(set(round(x, 14) for x in out))
        return out

    def critical_levels(self) -> list[float]:
        """t values where v' = 0, including the shared endpoints of the pieces."""
        out = []
        for p in self.pieces:
            for rc in p.traj.critical_points:
                if p.r_lo <= rc <= p.r_top:
                    out.append(float(p.eval_r(rc)[0][0]))
        return sorted(set(out))


def _bisect(piece: ProfilePiece, c, a, b, tol=1e-13):
    fa = piece.sign * piece.traj(a)[0][0] - c
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = piece.sign * piece.traj(m)[0][0] - c
        if fm == 0 or b - a < tol * max(1.0, abs(m)):
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)

