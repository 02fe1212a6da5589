"""Published BSSC(1/2) distributions and values, and the table comparing them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .auxdist import AuxPair, AuxTriple
from .channel import BroadcastChannel, bssc
from .regions import (RatePoint, cvdm_rts_constraints, km_oy_constraints, km_oz_constraints,
                      ne_outer_constraints, point_in_constraints)

ALPHA = 0.5 - math.sqrt(105.0) / 30.0
ALPHA_PRINTED = 0.1584

# printed rate values, with the number of digits they were printed to
CVDM_R1 = 0.2411
CVDM_R2 = 0.1204
CVDM_SUM = 0.3616
NE_SINGLE = 0.2280
NE_SLOPE = 0.1431
NE_SUM = 0.3711
KM_IUY = 0.18616
KM_IXZU = 0.18614
KM_POINT = (0.1861, 0.1861)
KM_POINT_SUM = 0.3722

KM_PU0 = 0.6372
KM_PX1_U0 = 0.2465

TOL = 5e-4
TOL_FINE = 5e-5

# a symmetric triple whose sum bounds exceed the printed optimum
SYMMETRIC_TRIPLE_Q = {(0, 1, 1): 3 / 8, (1, 0, 0): 3 / 8, (1, 1, 0): 1 / 8, (1, 1, 1): 1 / 8}


def cvdm_law(alpha: float = ALPHA):
    """P(W=0) = 1/2, P(X=0|W=0) = alpha, P(X=1|W=1) = alpha."""
    return np.array([0.5, 0.5]), np.array([[alpha, 1 - alpha], [1 - alpha, alpha]])


def maximizing_pairs(alpha: float = ALPHA) -> tuple[AuxPair, AuxPair]:
    """The (U,X) and (V,X) laws stated to maximize the two sum terms at P(X=1) = 1/2."""
    pu = np.array([0.5, 0.5 - alpha]) / (1 - alpha)
    u = AuxPair(pu, np.array([[1 - alpha, alpha], [0.0, 1.0]]))
    v = AuxPair(pu, np.array([[alpha, 1 - alpha], [1.0, 0.0]]))
    return u, v


def explicit_triple(alpha: float = ALPHA) -> AuxTriple:
    """The explicit (U,V,X); cell (1,1) has zero mass."""
    off = (0.5 - alpha) / (1 - alpha)
    puv = np.array([[alpha / (1 - alpha), off], [off, 0.0]])
    px = np.array([[[0.5, 0.5], [1.0, 0.0]], [[0.0, 1.0], [1.0, 0.0]]])
    return AuxTriple(puv, px)


def km_pair() -> AuxPair:
    """The (U,X) law of the strictness witness, entered at its printed precision."""
    return AuxPair(np.array([KM_PU0, 1 - KM_PU0]), np.array([[1 - KM_PX1_U0, KM_PX1_U0], [0.0, 1.0]]))


def km_pair_mirror() -> AuxPair:
    """The same law for the other receiver (X relabelled 1 - X)."""
    p = km_pair()
    return AuxPair(p.pu, p.px_given_u[:, ::-1])


def symmetric_triple() -> AuxTriple:
    q = np.zeros((2, 2, 2))
    for idx, mass in SYMMETRIC_TRIPLE_Q.items():
        q[idx] = mass
    return AuxTriple.from_joint(q)


@dataclass(frozen=True)
class Row:
    label: str
    computed: float
    printed: float | None
    tol: float | None
    status: str  # PASS, FAIL, N/A, INFO

    def format(self) -> str:
        printed = "" if self.printed is None else f"{self.printed:.6f}"
        tol = "" if self.tol is None else f"{self.tol:.0e}"
        return f"{self.label:<40} {self.computed:>10.6f} {printed:>10} {tol:>7}  {self.status}"


def _row(label, computed, printed, tol, compare: bool) -> Row:
    if not compare:
        return Row(label, computed, printed, tol, "N/A")
    return Row(label, computed, printed, tol, "PASS" if abs(computed - printed) <= tol else "FAIL")


def _check(label, ok: bool, value: float, compare: bool) -> Row:
    if not compare:
        return Row(label, value, None, None, "N/A")
    return Row(label, value, None, None, "PASS" if ok else "FAIL")


def bssc_table(p: float = 0.5) -> tuple[list[Row], BroadcastChannel]:
    """Evaluate every published distribution on bssc(p).

    Published numbers refer to p = 1/2; at any other p the comparison rows are N/A.
    """
    c = bssc(p)
    compare = p == 0.5
    rows = [_row("alpha = 0.5 - sqrt(105)/30", ALPHA, ALPHA_PRINTED, 5e-5, True)]

    pw, pxw = cvdm_law()
    s = cvdm_rts_constraints(pw, pxw, c)
    far = s.corners()[1]  # end of the dominant face with the larger R1
    rows += [
        _row("CvdM corner R1", far.r1, CVDM_R1, TOL, compare),
        _row("CvdM corner R2", far.r2, CVDM_R2, TOL, compare),
        _row("CvdM sum rate", s.sum_max, CVDM_SUM, TOL, compare),
    ]

    pu, pv = maximizing_pairs()
    ju = km_oz_constraints(pu, c)  # (I(U;Y), I(X;Z), I(U;Y) + I(X;Z|U), .)
    jv = km_oy_constraints(pv, c)  # (I(X;Y), I(V;Z), ., I(V;Z) + I(X;Y|V))
    rows += [
        _row("pair (U,X): I(U;Y)", ju.r1_max, NE_SINGLE, TOL, compare),
        _row("pair (U,X): I(X;Z|U)", ju.sum_max_a - ju.r1_max, NE_SLOPE, TOL, compare),
        _row("pair (U,X): I(U;Y) + I(X;Z|U)", ju.sum_max_a, NE_SUM, TOL, compare),
        _row("pair (V,X): I(V;Z)", jv.r2_max, NE_SINGLE, TOL, compare),
        _row("pair (V,X): I(X;Y|V)", jv.sum_max_b - jv.r2_max, NE_SLOPE, TOL, compare),
        _row("pair (V,X): I(V;Z) + I(X;Y|V)", jv.sum_max_b, NE_SUM, TOL, compare),
    ]

    t = ne_outer_constraints(explicit_triple(), c)
    rows += [
        _row("triple: I(U;Y)", t.r1_max, NE_SINGLE, TOL, compare),
        _row("triple: I(V;Z)", t.r2_max, NE_SINGLE, TOL, compare),
        _row("triple: I(U;Y) + I(X;Z|U)", t.sum_max_a, NE_SUM, TOL, compare),
        _row("triple: I(V;Z) + I(X;Y|V)", t.sum_max_b, NE_SUM, TOL, compare),
    ]

    kz = km_oz_constraints(km_pair(), c)
    ky = km_oy_constraints(km_pair_mirror(), c)
    point = RatePoint(*KM_POINT)
    rows += [
        _row("KM pair: I(U;Y)", kz.r1_max, KM_IUY, TOL_FINE, compare),
        _row("KM pair: I(X;Z|U)", kz.sum_max_a - kz.r1_max, KM_IXZU, TOL_FINE, compare),
        _row("KM point: R1 + R2", point.r1 + point.r2, KM_POINT_SUM, TOL, compare),
        _check("KM point inside both KM halves",
               point_in_constraints(point, kz) and point_in_constraints(point, ky), 0.0, compare),
        _check("KM point violates triple sum bound", not point_in_constraints(point, t, tol=0.0),
               t.sum_max, compare),
    ]

    sym = ne_outer_constraints(symmetric_triple(), c)
    rows.append(Row("symmetric triple NE sum bound (info)", sym.sum_max, None, None, "INFO"))
    return rows, c


def format_table(rows: list[Row]) -> str:
    head = f"{'quantity':<40} {'computed':>10} {'printed':>10} {'tol':>7}  status"
    return "\n".join([head, "-" * len(head)] + [r.format() for r in rows])
