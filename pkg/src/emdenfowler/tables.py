"""Hand-encoded level-set tables, transcribed row by row as text templates.

Each template is filled by plain string formatting and then normalized
(a zero-dimensional flat factor and a zero signature subscript are
dropped), so the fixtures do not share code with the classifier.
"""

from __future__ import annotations

import re

from .geometry import FlatLinear, FlatParabolic, FlatQuadratic, PSLinear, PSQuadratic

REG, FOC = "regular_hypersurface", "focal_variety"

# flat quadratic phi = alpha(-sum t_i^2 + sum x_j^2), keyed by (case, sign of c/alpha)
FLAT_QUADRATIC = {
    ("k=0", "neg"): ("EMPTY", REG),
    ("k=0", "zero"): ("{{0}} x R^{m_n}_{s}", FOC),
    ("k=0", "pos"): ("S^{n_1}(r2={q}) x R^{m_n}_{s}", REG),
    ("n=0", "pos"): ("EMPTY", REG),
    ("n=0", "zero"): ("R^{m_k}_{s_k} x {{0}}", FOC),
    ("n=0", "neg"): ("S^{k_1}(r2={mq}) x R^{m_k}_{s_k}", REG),
    ("mixed", "pos"): ("S^{kn_1}_{k}(r2={q}) x R^{m_kn}_{s_k}", REG),
    ("mixed", "zero"): ("C^{kn_1}_{k} x R^{m_kn}_{s_k}", FOC),
    ("mixed", "neg"): ("H^{kn_1}_{k_1}(r2={mq}) x R^{m_kn}_{s_k}", REG),
    ("full", "pos"): ("S^{m_1}_{s}(r2={q})", REG),
    ("full", "zero"): ("C^{m_1}_{s}", FOC),
    ("full", "neg"): ("H^{m_1}_{s_1}(r2={mq})", REG),
}

PS_LINEAR = {
    "inside": ("S^{m_1}_{s}(r2={one_c2})", REG),
    "outside": ("H^{m_1}_{s_1}(r2={c2_one})", REG),
    "edge": ("C^{m_1}_{s} x {{{c}}}", FOC),
}

PS_QUADRATIC = {
    "below": ("EMPTY", REG),
    "minus": ("S^{k1_1}_{s}(r2=1) x {{0}}", FOC),
    "inside": ("S^{k1_1}_{s}(r2={lo}) x S^{k2_1}(r2={hi})", REG),
    "plus": ("C^{k1_1}_{s} x S^{k2_1}(r2=1)", FOC),
    "above": ("H^{k1_1}_{s_1}(r2={lo_h}) x S^{k2_1}(r2={hi})", REG),
}


def _g(x: float) -> str:
    return format(float(x), ".17g")


def _normalize(text: str) -> str:
    text = re.sub(r"_0(?=\(| |$)", "", text)
    text = re.sub(r" x R\^0(_\d+)?(?= |$)", "", text)
    return text


def _sign(x: float) -> str:
    return "zero" if x == 0 else ("pos" if x > 0 else "neg")


def flat_quadratic_rows(m: int = 6, s: int = 3, levels=(-2.0, 0.0, 1.5)):
    rows = []
    for alpha in (1.0, -0.5):
        for k in range(0, s + 1):
            for n in range(0, m - s + 1):
                if k + n == 0:
                    continue
                case = "k=0" if k == 0 else "n=0" if n == 0 else "full" if k + n == m else "mixed"
                for c in levels:
                    q = c / alpha
                    tpl, tag = FLAT_QUADRATIC[(case, _sign(q))]
                    text = tpl.format(m_n=m - n, s=s, n_1=n - 1, q=_g(q), m_k=m - k, s_k=s - k, k_1=k - 1,
                                      mq=_g(-q), kn_1=k + n - 1, k=k, m_kn=m - k - n, m_1=m - 1, s_1=s - 1)
                    rows.append((FlatQuadratic(m=m, s=s, alpha=alpha, k=k, n=n), c, _normalize(text), tag))
    return rows


def hyperplane_rows():
    spec = FlatLinear(m=4, s=1, a_vec=(1.0, 2.0, 0.0, 0.0))
    return [(spec, c, "L(hyperplane)", REG) for c in (-3.0, 0.0, 2.5)]


def parabolic_rows():
    rows = []
    for m, s, eps, omega in ((6, 2, (1, -1), 1), (6, 2, (1, 1), 2), (5, 1, (-1,), 3), (7, 1, (1,), 2)):
        d = 2 * s + omega
        es = "".join("+" if e > 0 else "-" for e in eps)
        text = f"P^{d - 1}(eps={es},omega={omega})" + ("" if omega == m - 2 * s else f" x R^{m - d}")
        spec = FlatParabolic(m=m, s=s, epsilons=eps, omega=omega)
        rows += [(spec, c, text, REG) for c in (-1.0, 0.0, 4.0)]
    return rows


def ps_linear_rows(m: int = 4, s: int = 1):
    spec = PSLinear(m=m, s=s, Q=tuple([0.0] * m + [1.0]))
    rows = []
    for c in (-3.0, -1.0, -0.25, 0.0, 0.5, 1.0, 2.0):
        key = "edge" if abs(c) == 1 else "inside" if abs(c) < 1 else "outside"
        tpl, tag = PS_LINEAR[key]
        text = tpl.format(m_1=m - 1, s=s, s_1=s - 1, one_c2=_g(1 - c * c), c2_one=_g(c * c - 1), c=_g(c))
        rows.append((spec, c, _normalize(text), tag))
    return rows


def ps_quadratic_rows():
    rows = []
    for m, s, k1, k2 in ((6, 1, 3, 4), (7, 2, 5, 3)):
        spec = PSQuadratic(m=m, s=s, k1=k1, k2=k2)
        for c in (-2.0, -1.0, -0.5, 0.0, 1.0, 3.0):
            key = ("below" if c < -1 else "minus" if c == -1 else "plus" if c == 1
                   else "inside" if c < 1 else "above")
            tpl, tag = PS_QUADRATIC[key]
            text = tpl.format(k1_1=k1 - 1, k2_1=k2 - 1, s=s, s_1=s - 1, lo=_g((1 - c) / 2),
                              hi=_g((1 + c) / 2), lo_h=_g((c - 1) / 2))
            rows.append((spec, c, _normalize(text), tag))
    return rows


def fixture_rows():
    return flat_quadratic_rows() + hyperplane_rows() + parabolic_rows() + ps_linear_rows() + ps_quadratic_rows()
