"""Auxiliary-variable laws and the constructions that transform them.

An :class:`AuxTriple` is p(u,v) p(x|u,v). The constructions here are the
deterministic splitting (every cell of U and V is split into |X| copies so
that X becomes a function of the pair), the canonical coupling of two
single-auxiliary laws through X, and the receiver-swap / time-sharing
symmetrization used for skew-symmetric binary channels.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channel import BroadcastChannel
from .probcore import MASS_TOL, Dist, JointDist, _check_probs

UVX = ("U", "V", "X")
UVXYZ = ("U", "V", "X", "Y", "Z")


class InconsistentMarginalsError(ValueError):
    def __init__(self, x: int, discrepancy: float):
        self.x = x
        self.discrepancy = discrepancy
        super().__init__(f"p(x) disagrees between the two pairs: max discrepancy {discrepancy:.3g} at x={x}")


def _check_rows(rows: np.ndarray, what: str) -> None:
    flat = rows.reshape(-1, rows.shape[-1])
    for i, r in enumerate(flat):
        try:
            _check_probs(r)
        except ValueError as e:
            idx = np.unravel_index(i, rows.shape[:-1])
            raise ValueError(f"{what} row {tuple(int(k) for k in idx)}: {e}") from None


@dataclass(frozen=True)
class AuxTriple:
    """Joint law of (U, V, X) stored as p(u,v) and p(x|u,v)."""

    puv: np.ndarray
    px_given_uv: np.ndarray

    def __post_init__(self):
        puv = np.array(self.puv, dtype=float)
        px = np.array(self.px_given_uv, dtype=float)
        if puv.ndim != 2 or px.ndim != 3 or px.shape[:2] != puv.shape:
            raise ValueError(f"shape mismatch: puv {puv.shape}, px_given_uv {px.shape}")
        _check_probs(puv)
        _check_rows(px, "p(x|u,v)")
        puv.setflags(write=False)
        px.setflags(write=False)
        object.__setattr__(self, "puv", puv)
        object.__setattr__(self, "px_given_uv", px)

    @property
    def nu(self) -> int:
        return self.puv.shape[0]

    @property
    def nv(self) -> int:
        return self.puv.shape[1]

    @property
    def nx(self) -> int:
        return self.px_given_uv.shape[2]

    @property
    def deterministic(self) -> bool:
        px = self.px_given_uv
        return bool(np.all((px == 0.0) | (px == 1.0)))

    @property
    def q(self) -> np.ndarray:
        """The joint array q[u, v, x]."""
        return self.puv[:, :, None] * self.px_given_uv

    def joint(self) -> JointDist:
        return JointDist(self.q, UVX)

    @classmethod
    def from_joint(cls, q) -> "AuxTriple":
        """Factor a joint q[u,v,x]; zero-mass cells get the point mass on x=0."""
        q = np.asarray(q, dtype=float)
        q = np.where(q < 0, 0.0, q) if q.min() > -MASS_TOL else q
        puv = q.sum(axis=2)
        px = np.zeros_like(q)
        px[..., 0] = 1.0
        live = puv > 0
        px[live] = q[live] / puv[live][:, None]
        return cls(puv, px)

    def pair_u(self) -> "AuxPair":
        return AuxPair.from_joint(self.q.sum(axis=1))

    def pair_v(self) -> "AuxPair":
        return AuxPair.from_joint(self.q.sum(axis=0))

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "nv": self.nv,
            "nx": self.nx,
            "puv": self.puv.tolist(),
            "px_given_uv": self.px_given_uv.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "AuxTriple":
        a = cls(obj["puv"], obj["px_given_uv"])
        for key, got in (("nu", a.nu), ("nv", a.nv), ("nx", a.nx)):
            if key in obj and obj[key] != got:
                raise ValueError(f"'{key}' says {obj[key]} but the arrays have {got}")
        return a


@dataclass(frozen=True)
class AuxPair:
    """Joint law of (A, X) for a single auxiliary A, stored as p(a) and p(x|a)."""

    pu: np.ndarray
    px_given_u: np.ndarray

    def __post_init__(self):
        pu = np.array(self.pu, dtype=float).reshape(-1)
        px = np.array(self.px_given_u, dtype=float)
        if px.ndim != 2 or px.shape[0] != pu.size:
            raise ValueError(f"shape mismatch: pu {pu.shape}, px_given_u {px.shape}")
        _check_probs(pu)
        _check_rows(px, "p(x|u)")
        pu.setflags(write=False)
        px.setflags(write=False)
        object.__setattr__(self, "pu", pu)
        object.__setattr__(self, "px_given_u", px)

    @property
    def nu(self) -> int:
        return self.pu.size

    @property
    def nx(self) -> int:
        return self.px_given_u.shape[1]

    @property
    def q(self) -> np.ndarray:
        return self.pu[:, None] * self.px_given_u

    @property
    def px(self) -> np.ndarray:
        return self.q.sum(axis=0)

    @classmethod
    def from_joint(cls, q) -> "AuxPair":
        q = np.asarray(q, dtype=float)
        pu = q.sum(axis=1)
        px = np.zeros_like(q)
        px[:, 0] = 1.0
        live = pu > 0
        px[live] = q[live] / pu[live][:, None]
        return cls(pu, px)

    def to_dict(self) -> dict:
        return {"nu": self.nu, "nx": self.nx, "pu": self.pu.tolist(), "px_given_u": self.px_given_u.tolist()}


@dataclass(frozen=True)
class CommonInfoAux:
    """p(u) p(v) p(w|u,v) p(x|u,v,w): U and V are independent by construction."""

    pu: np.ndarray
    pv: np.ndarray
    pw_given_uv: np.ndarray
    px_given_uvw: np.ndarray

    def __post_init__(self):
        pu = Dist(self.pu).probs
        pv = Dist(self.pv).probs
        pw = np.array(self.pw_given_uv, dtype=float)
        px = np.array(self.px_given_uvw, dtype=float)
        if pw.shape[:2] != (pu.size, pv.size) or px.shape[:3] != pw.shape:
            raise ValueError(f"shape mismatch: pu {pu.shape}, pv {pv.shape}, pw {pw.shape}, px {px.shape}")
        _check_rows(pw, "p(w|u,v)")
        _check_rows(px, "p(x|u,v,w)")
        for a in (pw, px):
            a.setflags(write=False)
        for name, val in (("pu", pu), ("pv", pv), ("pw_given_uv", pw), ("px_given_uvw", px)):
            object.__setattr__(self, name, val)

    @property
    def nw(self) -> int:
        return self.pw_given_uv.shape[2]

    @property
    def nx(self) -> int:
        return self.px_given_uvw.shape[3]

    @property
    def q(self) -> np.ndarray:
        """Joint array q[u, v, w, x]."""
        return (self.pu[:, None, None, None] * self.pv[None, :, None, None]
                * self.pw_given_uv[..., None] * self.px_given_uvw)

    @classmethod
    def from_joint(cls, q, tol: float = 1e-9) -> "CommonInfoAux":
        """Factor q[u,v,w,x]; raises if U and V are dependent."""
        q = np.asarray(q, dtype=float)
        _check_probs(q)
        puv = q.sum(axis=(2, 3))
        pu, pv = puv.sum(axis=1), puv.sum(axis=0)
        gap = np.abs(puv - np.outer(pu, pv)).max()
        if gap > tol:
            raise ValueError(f"U and V are dependent (max |p(u,v) - p(u)p(v)| = {gap:.3g})")
        quvw = q.sum(axis=3)
        pw = np.full(quvw.shape, 1.0 / quvw.shape[2])
        live = puv > 0
        pw[live] = quvw[live] / puv[live][:, None]
        px = np.zeros_like(q)
        px[..., 0] = 1.0
        live3 = quvw > 0
        px[live3] = q[live3] / quvw[live3][:, None]
        return cls(pu, pv, pw, px)

    def to_dict(self) -> dict:
        return {
            "nu": self.pu.size, "nv": self.pv.size, "nw": self.nw, "nx": self.nx,
            "pu": self.pu.tolist(), "pv": self.pv.tolist(),
            "pw_given_uv": self.pw_given_uv.tolist(), "px_given_uvw": self.px_given_uvw.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "CommonInfoAux":
        return cls(obj["pu"], obj["pv"], obj["pw_given_uv"], obj["px_given_uvw"])


@dataclass(frozen=True)
class TimeShareLaw:
    """p(w) p(x|w): the common variable W of randomized time-sharing."""

    pw: np.ndarray
    px_given_w: np.ndarray

    def __post_init__(self):
        pw = Dist(self.pw).probs
        px = np.array(self.px_given_w, dtype=float)
        if px.ndim != 2 or px.shape[0] != pw.size:
            raise ValueError(f"p(x|w) must have one row per w ({pw.size}), got shape {px.shape}")
        _check_rows(px, "p(x|w)")
        px.setflags(write=False)
        object.__setattr__(self, "pw", pw)
        object.__setattr__(self, "px_given_w", px)

    @property
    def nx(self) -> int:
        return self.px_given_w.shape[1]

    def to_dict(self) -> dict:
        return {"nw": self.pw.size, "nx": self.nx, "pw": self.pw.tolist(), "px_given_w": self.px_given_w.tolist()}


def load_aux(path):
    """Read an auxiliary law from JSON; the keys present pick the type."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if "puv" in obj:
        return AuxTriple.from_dict(obj)
    if "pw_given_uv" in obj:
        return CommonInfoAux.from_dict(obj)
    if "px_given_u" in obj:
        return AuxPair(obj["pu"], obj["px_given_u"])
    if "px_given_w" in obj:
        return TimeShareLaw(obj["pw"], obj["px_given_w"])
    raise ValueError(f"{path}: unrecognized auxiliary file (keys {sorted(obj)})")


def save_aux(a, path) -> None:
    """Write any auxiliary law with a ``to_dict`` method as JSON."""
    Path(path).write_text(json.dumps(a.to_dict()) + "\n", encoding="utf-8")


def induced_joint(a: AuxTriple, c: BroadcastChannel) -> JointDist:
    """p(u,v,x,y,z) = p(u,v) p(x|u,v) p(y,z|x)."""
    if a.nx != c.nx:
        raise ValueError(f"auxiliary law has |X|={a.nx}, channel has |X|={c.nx}")
    return JointDist(a.q[:, :, :, None, None] * c.w[None, None], UVXYZ)


def split_construction(a: AuxTriple) -> AuxTriple:
    """Make X a deterministic function of the auxiliaries.

    Each u becomes u_0..u_{m-1} and each v becomes v_0..v_{m-1} (m = |X|) with
    P(U*=u_i, V*=v_j) = P(U=u, V=v, X=(i-j) mod m) / m and X* = (i-j) mod m.
    Index u_i is stored at u*m + i.
    """
    m = a.nx
    q = a.q
    puv = np.zeros((a.nu * m, a.nv * m))
    px = np.zeros((a.nu * m, a.nv * m, m))
    i = np.arange(m)
    k = (i[:, None] - i[None, :]) % m  # k[i, j]
    for u in range(a.nu):
        for v in range(a.nv):
            puv[u * m:(u + 1) * m, v * m:(v + 1) * m] = q[u, v][k] / m
            px[u * m:(u + 1) * m, v * m:(v + 1) * m] = np.eye(m)[k]
    return AuxTriple(puv, px)


@dataclass(frozen=True)
class Relation:
    """One checked relation ``lhs op rhs`` with ``op`` in {"=", "<="}."""

    group: str
    name: str
    lhs: float
    rhs: float
    op: str = "="

    @property
    def residual(self) -> float:
        """|lhs - rhs| for equalities, the violation max(lhs - rhs, 0) otherwise."""
        if self.op == "=":
            return abs(self.lhs - self.rhs)
        return max(self.lhs - self.rhs, 0.0)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    def holds(self, tol: float) -> bool:
        return self.residual <= tol


def split_relations(a: AuxTriple, c: BroadcastChannel) -> list[Relation]:
    """Relations between a triple and its split version under channel ``c``.

    Groups: "marginal" (per-cell deviations of the split marginals and
    conditionals), "entropy" (the seven entropy-level relations, items (vi) and
    (vii) each contribute an equality and an inequality) and "information"
    (the six mutual-information consequences).
    """
    m = a.nx
    s = split_construction(a)
    j = induced_joint(a, c)
    js = induced_joint(s, c)
    pu, pv = a.puv.sum(1), a.puv.sum(0)
    pus, pvs = s.puv.sum(1), s.puv.sum(0)
    qux, qvx = a.q.sum(1), a.q.sum(0)
    qux_s, qvx_s = s.q.sum(1), s.q.sum(0)

    def cond(q, p):
        safe = np.where(p > 0, p, 1.0)[:, None]
        return np.where(p[:, None] > 0, q / safe, 0.0)

    cx_u, cx_v = cond(qux, pu), cond(qvx, pv)
    cx_us, cx_vs = cond(qux_s, pus), cond(qvx_s, pvs)
    dev_u = dev_v = dev_xu = dev_xv = 0.0
    for i in range(m):
        dev_u = max(dev_u, float(np.abs(pus[i::m] - pu / m).max()))
        dev_v = max(dev_v, float(np.abs(pvs[i::m] - pv / m).max()))
        live_u, live_v = pu > 0, pv > 0
        if live_u.any():
            dev_xu = max(dev_xu, float(np.abs(cx_us[i::m][live_u] - cx_u[live_u]).max()))
        if live_v.any():
            dev_xv = max(dev_xv, float(np.abs(cx_vs[i::m][live_v] - cx_v[live_v]).max()))
    out = [
        Relation("marginal", "(i) P(U*=u_i) = P(U=u)/m", dev_u, 0.0),
        Relation("marginal", "(ii) P(V*=v_i) = P(V=v)/m", dev_v, 0.0),
        Relation("marginal", "(iii) P(X*=k|U*=u_i) = P(X=k|U=u)", dev_xu, 0.0),
        Relation("marginal", "(iv) P(X*=k|V*=v_i) = P(X=k|V=v)", dev_xv, 0.0),
    ]

    def h_cond(jd, a_, b_):
        return jd.entropy(*a_, *b_) - jd.entropy(*b_)

    px_dev = float(np.abs(js.marginal("X").probs - j.marginal("X").probs).max())
    out += [
        Relation("entropy", "(i) P(X*=x) = P(X=x)", px_dev, 0.0),
        Relation("entropy", "(ii) H(Y*|U*) = H(Y|U)", h_cond(js, "Y", "U"), h_cond(j, "Y", "U")),
        Relation("entropy", "(iii) H(Z*|U*) = H(Z|U)", h_cond(js, "Z", "U"), h_cond(j, "Z", "U")),
        Relation("entropy", "(iv) H(Y*|V*) = H(Y|V)", h_cond(js, "Y", "V"), h_cond(j, "Y", "V")),
        Relation("entropy", "(v) H(Z*|V*) = H(Z|V)", h_cond(js, "Z", "V"), h_cond(j, "Z", "V")),
        Relation("entropy", "(vi) H(Y*|U*,V*) = H(Y|X)", h_cond(js, "Y", "UV"), h_cond(j, "Y", "X")),
        Relation("entropy", "(vi) H(Y|X) <= H(Y|U,V)", h_cond(j, "Y", "X"), h_cond(j, "Y", "UV"), "<="),
        Relation("entropy", "(vii) H(Z*|U*,V*) = H(Z|X)", h_cond(js, "Z", "UV"), h_cond(j, "Z", "X")),
        Relation("entropy", "(vii) H(Z|X) <= H(Z|U,V)", h_cond(j, "Z", "X"), h_cond(j, "Z", "UV"), "<="),
    ]
    out += [
        Relation("information", "I(U;Y) = I(U*;Y*)", j.mi("U", "Y"), js.mi("U", "Y")),
        Relation("information", "I(V;Z) = I(V*;Z*)", j.mi("V", "Z"), js.mi("V", "Z")),
        Relation("information", "I(U;Y|V) <= I(U*;Y*|V*)", j.mi("U", "Y", "V"), js.mi("U", "Y", "V"), "<="),
        Relation("information", "I(V;Z|U) <= I(V*;Z*|U*)", j.mi("V", "Z", "U"), js.mi("V", "Z", "U"), "<="),
        Relation("information", "I(X;Y|V) = I(X*;Y*|V*)", j.mi("X", "Y", "V"), js.mi("X", "Y", "V")),
        Relation("information", "I(X;Z|U) = I(X*;Z*|U*)", j.mi("X", "Z", "U"), js.mi("X", "Z", "U")),
    ]
    return out


def canonical_coupling(ay: AuxPair, az: AuxPair, c: BroadcastChannel | None = None, tol: float = MASS_TOL) -> AuxTriple:
    """Couple (U,X) from ``ay`` and (V,X) from ``az`` with U, V independent given X."""
    if ay.nx != az.nx:
        raise ValueError(f"pairs disagree on |X|: {ay.nx} vs {az.nx}")
    if c is not None and c.nx != ay.nx:
        raise ValueError(f"pairs have |X|={ay.nx}, channel has |X|={c.nx}")
    px_u, px_v = ay.px, az.px
    diff = np.abs(px_u - px_v)
    if diff.max() > tol:
        x = int(np.argmax(diff))
        raise InconsistentMarginalsError(x, float(diff[x]))
    px = 0.5 * (px_u + px_v)
    qux, qvx = ay.q, az.q
    safe = np.where(px > 0, px, 1.0)
    # p(u,v,x) = p(u,x) p(v,x) / p(x)
    q = np.where(px > 0, qux[:, None, :] * qvx[None, :, :] / safe, 0.0)
    q = q / q.sum()
    return AuxTriple.from_joint(q)


def skew_symmetry_swap(a: AuxTriple) -> AuxTriple:
    """Exchange the receivers' roles: U' <- V, V' <- U, X' <- 1 - X."""
    if a.nx != 2:
        raise ValueError(f"receiver swap needs binary X, got |X|={a.nx}")
    puv = a.puv.T
    px = np.transpose(a.px_given_uv, (1, 0, 2))[:, :, ::-1]
    return AuxTriple(puv, px)


def _pad(a: AuxTriple, n: int) -> tuple[np.ndarray, np.ndarray]:
    puv = np.zeros((n, n))
    px = np.zeros((n, n, a.nx))
    px[..., 0] = 1.0
    puv[:a.nu, :a.nv] = a.puv
    px[:a.nu, :a.nv] = a.px_given_uv
    return puv, px


def symmetrize_timeshare(a: AuxTriple) -> AuxTriple:
    """Equal mixture of ``a`` and its receiver swap, the mixing bit folded into U and V.

    With n = max(|U|, |V|), U* = (u, q) is stored at u + n*q, likewise V*.
    """
    if a.nx != 2:
        raise ValueError(f"time-share symmetrization needs binary X, got |X|={a.nx}")
    n = max(a.nu, a.nv)
    parts = [_pad(a, n), _pad(skew_symmetry_swap(a), n)]
    puv = np.zeros((2 * n, 2 * n))
    px = np.zeros((2 * n, 2 * n, 2))
    px[..., 0] = 1.0
    for t, (p, c) in enumerate(parts):
        s = slice(t * n, (t + 1) * n)
        puv[s, s] = 0.5 * p
        px[s, s] = c
    return AuxTriple(puv, px)


def random_aux_triple(rng: np.random.Generator, nu: int, nv: int, nx: int, deterministic: bool = False) -> AuxTriple:
    """Flat-simplex p(u,v); p(x|u,v) flat-simplex rows or uniformly random maps."""
    puv = rng.dirichlet(np.ones(nu * nv)).reshape(nu, nv)
    if deterministic:
        px = np.eye(nx)[rng.integers(0, nx, size=(nu, nv))]
    else:
        px = rng.dirichlet(np.ones(nx), size=(nu, nv))
    return AuxTriple(puv, px)


def random_common_info_aux(rng: np.random.Generator, nu: int, nv: int, nw: int, nx: int) -> CommonInfoAux:
    return CommonInfoAux(
        rng.dirichlet(np.ones(nu)),
        rng.dirichlet(np.ones(nv)),
        rng.dirichlet(np.ones(nw), size=(nu, nv)),
        rng.dirichlet(np.ones(nx), size=(nu, nv, nw)),
    )
