"""Rate-constraint sets produced by a single auxiliary law, and traced regions.

Every bound here reduces, at a fixed auxiliary law, to a pentagon

    R1 <= r1_max,  R2 <= r2_max,  R1 + R2 <= min(sum_max_a, sum_max_b)

in the non-negative quadrant (bits per channel use). The bound's region is the
union of these pentagons over all admissible laws; :class:`PolygonRegion`
holds a finite outer description of that union's convex hull.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .auxdist import AuxPair, AuxTriple, CommonInfoAux, induced_joint
from .channel import BroadcastChannel
from .probcore import Dist, JointDist

DEFAULT_TOL = 1e-9

NE = "ne"
NE_AUX = "ne-aux"
KM_Y = "km-y"
KM_Z = "km-z"
KM = "km"
CVDM = "cvdm"


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float
    r0: float | None = None

    def __post_init__(self):
        coords = (self.r1, self.r2) + (() if self.r0 is None else (self.r0,))
        if any(c < 0 for c in coords):
            raise ValueError(f"rates must be non-negative, got {coords}")


def pentagon_support(r1_max, r2_max, sum_max, lam):
    """max lam*R1 + (1-lam)*R2 over the pentagon; broadcasts over arrays."""
    a = np.maximum(r1_max, 0.0)
    b = np.maximum(r2_max, 0.0)
    s = np.maximum(sum_max, 0.0)
    if lam >= 0.5:
        r1 = np.minimum(a, s)
        r2 = np.minimum(b, s - r1)
    else:
        r2 = np.minimum(b, s)
        r1 = np.minimum(a, s - r2)
    return lam * r1 + (1.0 - lam) * r2


@dataclass(frozen=True)
class RateConstraintSet2:
    r1_max: float
    r2_max: float
    sum_max_a: float
    sum_max_b: float
    provenance: str = ""
    # slots that come from the bound itself rather than padding
    structural: tuple[str, ...] = ("r1_max", "r2_max", "sum_max_a", "sum_max_b")

    def __post_init__(self):
        for name in ("r1_max", "r2_max", "sum_max_a", "sum_max_b"):
            v = float(getattr(self, name))
            if v < -1e-12:
                raise ValueError(f"{name} = {v} is negative")
            object.__setattr__(self, name, max(v, 0.0))

    @property
    def sum_max(self) -> float:
        return min(self.sum_max_a, self.sum_max_b)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.r1_max, self.r2_max, self.sum_max_a, self.sum_max_b)

    def support(self, lam: float) -> float:
        return float(pentagon_support(self.r1_max, self.r2_max, self.sum_max, lam))

    def corners(self) -> list[RatePoint]:
        """Upper-right boundary vertices, by decreasing R1."""
        s = self.sum_max
        r1 = min(self.r1_max, s)
        r2 = min(self.r2_max, s)
        pts = [(r1, 0.0), (r1, min(self.r2_max, s - r1)), (min(self.r1_max, s - r2), r2), (0.0, r2)]
        out = []
        for p in pts:
            if not out or (abs(p[0] - out[-1][0]) > 1e-15 or abs(p[1] - out[-1][1]) > 1e-15):
                out.append(p)
        return [RatePoint(max(a, 0.0), max(b, 0.0)) for a, b in out]


@dataclass(frozen=True)
class RateConstraintSet3:
    r0_max: float
    r01_max: float
    r02_max: float
    sum_max_a: float
    sum_max_b: float
    provenance: str = ""

    def __post_init__(self):
        for name in ("r0_max", "r01_max", "r02_max", "sum_max_a", "sum_max_b"):
            v = float(getattr(self, name))
            if v < -1e-12:
                raise ValueError(f"{name} = {v} is negative")
            object.__setattr__(self, name, max(v, 0.0))

    def as_tuple(self) -> tuple[float, ...]:
        return (self.r0_max, self.r01_max, self.r02_max, self.sum_max_a, self.sum_max_b)


def ne_outer_constraints(a: AuxTriple, c: BroadcastChannel) -> RateConstraintSet2:
    """I(U;Y), I(V;Z), I(U;Y) + I(X;Z|U), I(V;Z) + I(X;Y|V)."""
    j = induced_joint(a, c)
    iuy, ivz = j.mi("U", "Y"), j.mi("V", "Z")
    return RateConstraintSet2(iuy, ivz, iuy + j.mi("X", "Z", "U"), ivz + j.mi("X", "Y", "V"), provenance=NE)


def ne_outer_constraints_aux_form(a: AuxTriple, c: BroadcastChannel) -> RateConstraintSet2:
    """As :func:`ne_outer_constraints` but with I(V;Z|U) and I(U;Y|V) in the sums.

    The two forms agree when X is a function of (U, V).
    """
    j = induced_joint(a, c)
    iuy, ivz = j.mi("U", "Y"), j.mi("V", "Z")
    return RateConstraintSet2(iuy, ivz, iuy + j.mi("V", "Z", "U"), ivz + j.mi("U", "Y", "V"), provenance=NE_AUX)


def ne_outer_constraints_3d(g, c: BroadcastChannel) -> RateConstraintSet3:
    """Right-hand sides of the common-message bound at a fixed p(u)p(v)p(w|u,v)p(x|u,v,w).

    ``g`` is a :class:`CommonInfoAux` or a joint array q[u,v,w,x]; the latter is
    rejected if U and V are dependent.
    """
    if not isinstance(g, CommonInfoAux):
        g = CommonInfoAux.from_joint(g)
    if g.nx != c.nx:
        raise ValueError(f"auxiliary law has |X|={g.nx}, channel has |X|={c.nx}")
    j = JointDist(g.q[..., None, None] * c.w, ("U", "V", "W", "X", "Y", "Z"))
    iwy, iwz = j.mi("W", "Y"), j.mi("W", "Z")
    iuwy = j.mi(("U", "W"), "Y")
    ivwz = j.mi(("V", "W"), "Z")
    return RateConstraintSet3(
        min(iwy, iwz),
        iuwy,
        ivwz,
        iuwy + j.mi("V", "Z", ("U", "W")),
        ivwz + j.mi("U", "Y", ("V", "W")),
        provenance="ne-3d",
    )


def _pair_joint(p: AuxPair, c: BroadcastChannel) -> JointDist:
    if p.nx != c.nx:
        raise ValueError(f"auxiliary law has |X|={p.nx}, channel has |X|={c.nx}")
    return JointDist(p.q[:, :, None, None] * c.w[None], ("A", "X", "Y", "Z"))


def km_oy_constraints(av: AuxPair, c: BroadcastChannel) -> RateConstraintSet2:
    """Half of the Korner-Marton bound built on (V, X): R1 <= I(X;Y), R2 <= I(V;Z),
    R1 + R2 <= I(V;Z) + I(X;Y|V). The first sum slot is padding (singles sum)."""
    j = _pair_joint(av, c)
    ixy, ivz = j.mi("X", "Y"), j.mi("A", "Z")
    return RateConstraintSet2(ixy, ivz, ixy + ivz, ivz + j.mi("X", "Y", "A"),
                              provenance=KM_Y, structural=("r1_max", "r2_max", "sum_max_b"))


def km_oz_constraints(au: AuxPair, c: BroadcastChannel) -> RateConstraintSet2:
    """Mirror half on (U, X): R2 <= I(X;Z), R1 <= I(U;Y), R1 + R2 <= I(U;Y) + I(X;Z|U)."""
    j = _pair_joint(au, c)
    iuy, ixz = j.mi("A", "Y"), j.mi("X", "Z")
    return RateConstraintSet2(iuy, ixz, iuy + j.mi("X", "Z", "A"), iuy + ixz,
                              provenance=KM_Z, structural=("r1_max", "r2_max", "sum_max_a"))


def cvdm_rts_constraints(pw, px_given_w, c: BroadcastChannel) -> RateConstraintSet2:
    """Randomized time-sharing region for a binary common variable W.

    With m = min{I(W;Y), I(W;Z)}, A = P(W=0) I(X;Y|W=0), B = P(W=1) I(X;Z|W=1):
    R1 <= m + A, R2 <= m + B, R1 + R2 <= m + A + B (both sum slots).
    """
    pw = pw if isinstance(pw, Dist) else Dist(pw)
    px = np.asarray(px_given_w, dtype=float)
    if len(pw) != 2:
        raise ValueError(f"randomized time-sharing needs binary W, got |W|={len(pw)}")
    if px.shape != (2, c.nx):
        raise ValueError(f"p(x|w) must have shape (2, {c.nx}), got {px.shape}")
    j = JointDist(pw.probs[:, None, None, None] * px[:, :, None, None] * c.w[None], ("W", "X", "Y", "Z"))
    common = min(j.mi("W", "Y"), j.mi("W", "Z"))
    a = pw[0] * float(JointDist(px[0][:, None] * c.wy, ("X", "Y")).mi("X", "Y"))
    b = pw[1] * float(JointDist(px[1][:, None] * c.wz, ("X", "Z")).mi("X", "Z"))
    return RateConstraintSet2(common + a, common + b, common + a + b, common + a + b, provenance=CVDM)


def point_in_constraints(p: RatePoint, s: RateConstraintSet2, tol: float = DEFAULT_TOL) -> bool:
    return (p.r1 <= s.r1_max + tol and p.r2 <= s.r2_max + tol
            and p.r1 + p.r2 <= s.sum_max + tol)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _upper_right_chain(points: np.ndarray) -> np.ndarray:
    """Vertices of the down-closed convex hull of ``points`` (plus the origin),
    listed by decreasing R1 from the R1 axis to the R2 axis."""
    pts = np.vstack([points, [[0.0, 0.0]]])
    pts = np.where(pts > 1e-15, pts, 0.0)
    pts = pts[np.lexsort((-pts[:, 1], pts[:, 0]))]  # r1 ascending, ties by r2 descending
    # Pareto-maximal points, r1 increasing and r2 strictly decreasing
    front = []
    for p in pts[::-1]:
        if not front or p[1] > front[-1][1]:
            front.append(p)
    front = front[::-1]
    chain: list[np.ndarray] = [np.array([0.0, front[0][1]])]
    for p in front + [np.array([front[-1][0], 0.0])]:
        if np.allclose(p, chain[-1], rtol=0.0, atol=1e-15):
            continue
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) >= -1e-14:
            chain.pop()
        chain.append(p)
    return np.array(chain)[::-1]


@dataclass(frozen=True)
class PolygonRegion:
    """Down-closed convex polygon given by its upper-right boundary vertices."""

    vertices: np.ndarray
    lambdas: np.ndarray = field(default_factory=lambda: np.empty(0))
    values: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float).reshape(-1, 2)
        if v.shape[0] == 0:
            raise ValueError("empty polygon")
        if np.any(np.diff(v[:, 0]) > 1e-12) or np.any(np.diff(v[:, 1]) < -1e-12):
            raise ValueError("vertices must run by decreasing r1 with non-decreasing r2")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "lambdas", np.asarray(self.lambdas, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @classmethod
    def from_points(cls, points) -> "PolygonRegion":
        return cls(_upper_right_chain(np.asarray(points, dtype=float).reshape(-1, 2)))

    @classmethod
    def from_halfplanes(cls, lambdas: Sequence[float], values: Sequence[float]) -> "PolygonRegion":
        """{R >= 0 : lam_i R1 + (1 - lam_i) R2 <= value_i for all i}; needs lam = 0 and 1."""
        lam = np.asarray(lambdas, dtype=float)
        h = np.asarray(values, dtype=float)
        if lam.shape != h.shape or lam.size < 2:
            raise ValueError("need matching lambda/value arrays with at least two angles")
        if not (np.any(lam == 0.0) and np.any(lam == 1.0)):
            raise ValueError("angle grid must include lambda = 0 and lambda = 1")
        if np.any(h < -1e-12):
            raise ValueError("negative support value: region is empty")
        h = np.maximum(h, 0.0)
        normals = np.vstack([np.column_stack([lam, 1.0 - lam]), [[-1.0, 0.0], [0.0, -1.0]]])
        rhs = np.concatenate([h, [0.0, 0.0]])
        i, j = np.triu_indices(len(rhs), k=1)
        a1, a2 = normals[i], normals[j]
        det = a1[:, 0] * a2[:, 1] - a1[:, 1] * a2[:, 0]
        ok = np.abs(det) > 1e-14
        i, j, det, a1, a2 = i[ok], j[ok], det[ok], a1[ok], a2[ok]
        x = (rhs[i] * a2[:, 1] - a1[:, 1] * rhs[j]) / det
        y = (a1[:, 0] * rhs[j] - rhs[i] * a2[:, 0]) / det
        cand = np.column_stack([x, y])
        slack = cand @ normals.T - rhs
        feas = cand[np.all(slack <= 1e-11 * (1.0 + np.abs(rhs)), axis=1)]
        poly = cls(_upper_right_chain(feas), lam, h)
        return poly

    def support(self, lam: float) -> float:
        v = self.vertices
        return float(max(0.0, np.max(lam * v[:, 0] + (1.0 - lam) * v[:, 1])))

    def contains(self, p: RatePoint, tol: float = DEFAULT_TOL) -> bool:
        v = self.vertices
        if p.r1 > v[0, 0] + tol or p.r2 > v[-1, 1] + tol:
            return False
        q = np.array([p.r1, p.r2])
        for k in range(len(v) - 1):
            d = v[k + 1] - v[k]
            n = np.array([d[1], -d[0]])  # outward (up-right) for decreasing-r1 order
            norm = np.hypot(*n)
            if norm == 0.0:
                continue
            if n @ (q - v[k]) / norm > tol:
                return False
        return True

    @property
    def sum_rate(self) -> float:
        return 2.0 * self.support(0.5)

    def to_csv(self, path) -> None:
        lines = ["r1,r2"] + [f"{format(a, '.12g')},{format(b, '.12g')}" for a, b in self.vertices]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def from_csv(cls, path) -> "PolygonRegion":
        rows = Path(path).read_text(encoding="utf-8").strip().splitlines()
        if not rows or rows[0].strip() != "r1,r2":
            raise ValueError(f"{path}: expected header 'r1,r2'")
        pts = [tuple(float(t) for t in r.split(",")) for r in rows[1:]]
        return cls(np.array(pts))

    def intersect(self, other: "PolygonRegion") -> "PolygonRegion":
        """Intersection of two traced regions sharing the same angle grid."""
        if self.lambdas.shape != other.lambdas.shape or not np.allclose(self.lambdas, other.lambdas):
            raise ValueError("intersection needs both regions traced on the same angle grid")
        return PolygonRegion.from_halfplanes(self.lambdas, np.minimum(self.values, other.values))


def polygon_contains(outer: PolygonRegion, p: RatePoint, tol: float = DEFAULT_TOL) -> bool:
    return outer.contains(p, tol)
