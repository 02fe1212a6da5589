"""Weighted sum-rate maximization over auxiliary laws and region tracing.

The search variable is the joint q[u, v, x]. For a weight lam the objective is
the support value

    h(q) = max { lam R1 + (1 - lam) R2 : (R1, R2) in pentagon(q) },

which by LP duality is the minimum of five linear combinations of the four
constraint values. ``h`` is therefore a pointwise minimum of smooth functions;
the ascent takes the minimum-norm element of the near-active gradients
(projected onto the feasible set), which is an ascent direction for every
near-active piece, and backtracks until ``h`` strictly increases.
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .auxdist import AuxPair, AuxTriple, TimeShareLaw
from .channel import BroadcastChannel
from .probcore import ZERO_FLOOR
from .regions import (CVDM, KM, KM_Y, KM_Z, NE, NE_AUX, PolygonRegion, RateConstraintSet2,
                      cvdm_rts_constraints, km_oy_constraints, km_oz_constraints,
                      ne_outer_constraints, ne_outer_constraints_aux_form, pentagon_support)

KINDS = (NE, KM_Y, KM_Z, CVDM)
GRID_LIMIT = 100_000_000
ENUMERATION_LIMIT = 4096
CONTINUOUS = "continuous-ascent"
DETERMINISTIC = "deterministic-enumeration"
_INV_LN2 = 1.0 / math.log(2.0)


class GridTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    max_iters: int = 10_000
    conv_tol: float = 1e-9
    seed: int = 0
    u_card: int | None = None  # None -> |X| + 2
    v_card: int | None = None
    mode: str | None = None  # None: enumerate maps when |X|^(|U||V|) <= ENUMERATION_LIMIT
    fixed_px: tuple[float, ...] | None = None
    warm_start: bool = True
    cvdm_step: float = 1.0 / 256

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be positive")
        if self.conv_tol <= 0:
            raise ValueError("conv_tol must be positive")
        for card in (self.u_card, self.v_card):
            if card is not None and card < 1:
                raise ValueError("auxiliary cardinalities must be >= 1")
        if self.mode not in (None, CONTINUOUS, DETERMINISTIC):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.fixed_px is not None:
            object.__setattr__(self, "fixed_px", tuple(float(v) for v in self.fixed_px))

    def cards(self, nx: int) -> tuple[int, int]:
        return (self.u_card or nx + 2, self.v_card or nx + 2)

    def resolved_mode(self, shape, kind: str = NE) -> str:
        """Explicit mode, else enumerate maps for small NE problems.

        Deterministic maps lose nothing for the NE pair (U, V) once the
        alphabets are large enough, but they do for a single KM auxiliary.
        """
        if self.mode is not None:
            return self.mode
        nu, nv, nx = shape
        small = nx ** (nu * nv) <= ENUMERATION_LIMIT
        return DETERMINISTIC if kind == NE and small else CONTINUOUS


# ---------------------------------------------------------------------------
# constraint values and gradients from the joint q[u, v, x]


def _h(m: np.ndarray, axes) -> np.ndarray:
    safe = np.where(m > ZERO_FLOOR, m, 1.0)
    return -(np.where(m > ZERO_FLOOR, m * np.log2(safe), 0.0)).sum(axis=axes)


def _dh(m: np.ndarray) -> np.ndarray:
    return -(np.log2(np.maximum(m, ZERO_FLOOR)) + _INV_LN2)


class _PairTerms:
    """I(A;B), I(X;B|A), I(X;B) for a pair law r[a, x] sent through rows ``wb``."""

    def __init__(self, wb: np.ndarray):
        self.wb = wb
        self.hb = _h(wb, -1)  # H(B | X = x)

    def values(self, r: np.ndarray):
        """Batched over leading axes of r (..., na, nx)."""
        pa = r.sum(-1)
        px = r.sum(-2)
        pab = r @ self.wb
        pb = pab.sum(-2)
        ha, hb, hab = _h(pa, -1), _h(pb, -1), _h(pab, (-2, -1))
        noise = px @ self.hb
        return ha + hb - hab, hab - ha - noise, hb - noise

    def grads(self, r: np.ndarray):
        pa = r.sum(-1)
        pab = r @ self.wb
        pb = pab.sum(-2)
        g_a = _dh(pa)[:, None]
        g_b = (self.wb @ _dh(pb))[None, :]
        g_ab = _dh(pab) @ self.wb.T
        g_noise = self.hb[None, :]
        ones = np.ones_like(r)
        # d/dr of I(A;B), I(X;B|A), I(X;B)
        return g_a + g_b - g_ab, g_ab - g_a - g_noise * ones, g_b - g_noise * ones


class _Evaluator:
    """(r1_max, r2_max, sum_a, sum_b) of one bound kind as a function of q[u, v, x]."""

    def __init__(self, c: BroadcastChannel, kind: str):
        if kind not in (NE, KM_Y, KM_Z):
            raise ValueError(f"no continuous evaluator for bound {kind!r}")
        self.kind = kind
        self.ty = _PairTerms(c.wy)
        self.tz = _PairTerms(c.wz)

    def values(self, q: np.ndarray) -> np.ndarray:
        qux = q.sum(-2)
        qvx = q.sum(-3)
        if self.kind == NE:
            iuy, ixy_u, _ = self.ty.values(qux)
            ivz, ixz_v, _ = self.tz.values(qvx)
            _, ixz_u, _ = self.tz.values(qux)
            _, ixy_v, _ = self.ty.values(qvx)
            return np.stack([iuy, ivz, iuy + ixz_u, ivz + ixy_v])
        if self.kind == KM_Y:
            ivz, _, _ = self.tz.values(qvx)
            _, ixy_v, ixy = self.ty.values(qvx)
            return np.stack([ixy, ivz, ixy + ivz, ivz + ixy_v])
        iuy, _, _ = self.ty.values(qux)
        _, ixz_u, ixz = self.tz.values(qux)
        return np.stack([iuy, ixz, iuy + ixz_u, iuy + ixz])

    def values_and_grads(self, q: np.ndarray):
        vals = self.values(q)
        qux = q.sum(1)
        qvx = q.sum(0)
        shape = q.shape
        up = lambda g: np.broadcast_to(g[:, None, :], shape)  # d/dq of a function of q[u,.,x]
        vp = lambda g: np.broadcast_to(g[None, :, :], shape)
        if self.kind == NE:
            giuy, _, _ = self.ty.grads(qux)
            _, gixz_u, _ = self.tz.grads(qux)
            givz, _, _ = self.tz.grads(qvx)
            _, gixy_v, _ = self.ty.grads(qvx)
            grads = [up(giuy), vp(givz), up(giuy + gixz_u), vp(givz + gixy_v)]
        elif self.kind == KM_Y:
            givz, _, _ = self.tz.grads(qvx)
            _, gixy_v, gixy = self.ty.grads(qvx)
            grads = [vp(gixy), vp(givz), vp(gixy + givz), vp(givz + gixy_v)]
        else:
            giuy, _, _ = self.ty.grads(qux)
            _, gixz_u, gixz = self.tz.grads(qux)
            grads = [up(giuy), up(gixz), up(giuy + gixz_u), up(giuy + gixz)]
        return vals, np.stack(grads)


def support_pieces(lam: float) -> np.ndarray:
    """Rows c with support(lam) = min_k c_k . (r1_max, r2_max, sum_a, sum_b)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"weight {lam} outside [0, 1]")
    if lam >= 0.5:
        rows = [[lam, 1 - lam, 0, 0], [2 * lam - 1, 0, 1 - lam, 0], [2 * lam - 1, 0, 0, 1 - lam],
                [0, 0, lam, 0], [0, 0, 0, lam]]
    else:
        rows = [[lam, 1 - lam, 0, 0], [0, 1 - 2 * lam, lam, 0], [0, 1 - 2 * lam, 0, lam],
                [0, 0, 1 - lam, 0], [0, 0, 0, 1 - lam]]
    return np.unique(np.array(rows, dtype=float), axis=0)


# ---------------------------------------------------------------------------
# feasible sets


def _simplex_project(y: np.ndarray, mass: float = 1.0) -> np.ndarray:
    if mass <= 0.0:
        return np.zeros_like(y)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - mass
    k = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(y - theta, 0.0)


class _Feasible:
    """Simplex over the masked entries of q, optionally with a fixed marginal p(x)."""

    def __init__(self, shape, mask: np.ndarray | None = None, px: Sequence[float] | None = None):
        self.shape = tuple(shape)
        self.mask = np.ones(shape, bool) if mask is None else np.asarray(mask, bool)
        self.fixed_px = px is not None
        flat = self.mask.reshape(-1)
        self.free = np.flatnonzero(flat)
        if px is None:
            self.groups = [(self.free, 1.0)]
        else:
            px = np.asarray(px, dtype=float)
            if px.shape != (shape[-1],) or abs(px.sum() - 1.0) > 1e-9 or np.any(px < 0):
                raise ValueError(f"fixed p(x) must be a distribution over {shape[-1]} symbols")
            xs = np.broadcast_to(np.arange(shape[-1]), shape).reshape(-1)
            self.groups = [(np.flatnonzero(flat & (xs == x)), float(px[x])) for x in range(shape[-1])]
        for idx, mass in self.groups:
            if mass > 0 and idx.size == 0:
                raise ValueError("fixed p(x) puts mass on a symbol no cell can produce")

    def project(self, q: np.ndarray) -> np.ndarray:
        flat = q.reshape(-1)
        out = np.zeros_like(flat)
        for idx, mass in self.groups:
            if idx.size:
                out[idx] = _simplex_project(flat[idx], mass)
        return out.reshape(self.shape)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        out = np.zeros(int(np.prod(self.shape)))
        for idx, mass in self.groups:
            if idx.size:
                out[idx] = mass * rng.dirichlet(np.ones(idx.size))
        return out.reshape(self.shape)


def _min_norm_combination(P: np.ndarray) -> np.ndarray:
    """Weights theta on the simplex minimizing ||theta @ P||."""
    k = P.shape[0]
    if k == 1:
        return np.ones(1)
    G = P @ P.T
    best, best_val = np.full(k, 1.0 / k), np.inf
    for r in range(1, k + 1):
        for sub in itertools.combinations(range(k), r):
            s = list(sub)
            kkt = np.zeros((r + 1, r + 1))
            kkt[:r, :r] = 2 * G[np.ix_(s, s)]
            kkt[:r, r] = 1.0
            kkt[r, :r] = 1.0
            rhs = np.zeros(r + 1)
            rhs[r] = 1.0
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:r]
            if np.any(sol < -1e-12) or abs(sol.sum() - 1.0) > 1e-9:
                continue
            theta = np.zeros(k)
            theta[s] = np.maximum(sol, 0.0)
            theta /= theta.sum()
            val = theta @ G @ theta
            if val < best_val - 1e-18:
                best, best_val = theta, val
    return best


# ---------------------------------------------------------------------------
# one ascent run


@dataclass
class AscentRun:
    q: np.ndarray
    value: float
    history: list[float]
    iterations: int


def _support_value(q, ev: _Evaluator, pieces: np.ndarray) -> float:
    return float((pieces @ ev.values(q)).min())


def _sqp_step(q, ev: _Evaluator, pieces: np.ndarray, feas: _Feasible, maxiter: int):
    """Local solve of max t s.t. piece_k(q) >= t over the feasible set (SLSQP)."""
    free = feas.free
    n = free.size
    size = int(np.prod(feas.shape))

    def full(z):
        out = np.zeros(size)
        out[free] = np.maximum(z[:-1], 0.0)
        return out.reshape(feas.shape)

    cache: dict = {}

    def evaluate(z):
        key = z.tobytes()
        if cache.get("key") != key:
            vals, g = ev.values_and_grads(full(z))
            cache.update(key=key, vals=vals, grads=g)
        return cache["vals"], cache["grads"]

    def cons(z):
        return pieces @ evaluate(z)[0] - z[-1]

    def cons_jac(z):
        g = evaluate(z)[1]
        jac = np.tensordot(pieces, g, axes=1).reshape(len(pieces), -1)[:, free]
        return np.hstack([jac, -np.ones((len(pieces), 1))])

    A = np.zeros((len(feas.groups), n + 1))
    b = np.zeros(len(feas.groups))
    for gi, (idx, mass) in enumerate(feas.groups):
        A[gi, np.searchsorted(free, idx)] = 1.0
        b[gi] = mass
    objective_grad = np.zeros(n + 1)
    objective_grad[-1] = -1.0
    z0 = np.append(q.reshape(-1)[free], _support_value(q, ev, pieces))
    with warnings.catch_warnings(), np.errstate(all="ignore"):
        warnings.simplefilter("ignore")
        res = minimize(lambda z: -z[-1], z0, jac=lambda z: objective_grad, method="SLSQP",
                       bounds=[(0.0, None)] * n + [(None, None)],
                       constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac},
                                    {"type": "eq", "fun": lambda z: A @ z - b, "jac": lambda z: A}],
                       options={"maxiter": maxiter, "ftol": 1e-13})
    if not np.all(np.isfinite(res.x)):
        return q, max(int(res.nit), 1)
    return feas.project(full(res.x)), max(int(res.nit), 1)


def _arc_search(x, h, direction, proj, value_of, t0):
    """Backtrack along the projection arc proj(x + t d); accept strict improvement only."""
    t = t0
    for _ in range(40):
        xn = proj(x + t * direction)
        hn = value_of(xn)
        if hn > h:
            return xn, hn, t
        t *= 0.5
    return x, h, t0 * 0.25


def _block_direction(grads: np.ndarray, pvals: np.ndarray, h: float) -> np.ndarray:
    active = np.flatnonzero(pvals <= h + 1e-6 * (1.0 + abs(h)))
    g = grads[active].reshape(len(active), -1)
    return (_min_norm_combination(g) @ g).reshape(grads.shape[1:])


def _block_pass(q, h, ev, pieces, feas: _Feasible, step: float):
    """One sweep of projected line searches: p(u,v) block, then every p(.|u,v) row.

    With a fixed input marginal the joint q is a single block instead.
    """
    accepted = []
    value_q = lambda qq: _support_value(qq, ev, pieces)

    def pieces_grads(qq):
        vals, g = ev.values_and_grads(qq)
        return pieces @ vals, np.tensordot(pieces, g, axes=1)

    if feas.fixed_px:
        pv, gq = pieces_grads(q)
        d = _block_direction(gq, pv, h)
        qn, hn, step = _arc_search(q, h, d, feas.project, value_q, step)
        if hn > h:
            accepted.append(hn)
        return qn, hn, accepted, step

    mask = feas.mask
    puv = q.sum(-1)
    cond = np.where(puv[..., None] > 0, q / np.where(puv > 0, puv, 1.0)[..., None], 0.0)
    empty = puv <= 0
    cond[empty] = mask[empty] / mask[empty].sum(-1, keepdims=True)

    pv, gq = pieces_grads(q)
    d = _block_direction((gq * cond).sum(-1), pv, h)
    value_puv = lambda p: value_q(p[..., None] * cond)
    puv_n, hn, step = _arc_search(puv, h, d, lambda p: _simplex_project(p.reshape(-1)).reshape(p.shape),
                                  value_puv, step)
    if hn > h:
        puv, h = puv_n, hn
        accepted.append(h)
    for cell in itertools.product(*map(range, puv.shape)):
        allowed = mask[cell]
        if puv[cell] <= 0 or allowed.sum() < 2:
            continue
        q = puv[..., None] * cond
        pv, gq = pieces_grads(q)
        d = _block_direction(puv[cell] * gq[(slice(None),) + cell], pv, h)

        def proj_row(r, allowed=allowed):
            out = np.zeros_like(r)
            out[allowed] = _simplex_project(r[allowed])
            return out

        def value_row(r, cell=cell):
            c2 = cond.copy()
            c2[cell] = r
            return value_q(puv[..., None] * c2)

        row, hn, _ = _arc_search(cond[cell], h, d, proj_row, value_row, step)
        if hn > h:
            cond[cell] = row
            h = hn
            accepted.append(h)
    return puv[..., None] * cond, h, accepted, step


def ascend(q0: np.ndarray, evaluator: _Evaluator, lam: float, feasible: _Feasible,
           max_iters: int = 10_000, conv_tol: float = 1e-9) -> AscentRun:
    """Monotone ascent of the support value from ``q0``.

    Alternates SQP refinement of the whole joint with a block sweep; a candidate
    replaces the iterate only if it strictly improves the objective, so the
    recorded history is non-decreasing.
    """
    pieces = support_pieces(lam)
    q = feasible.project(np.asarray(q0, dtype=float))
    h = _support_value(q, evaluator, pieces)
    history = [h]
    iters = 0
    step = 0.1
    while iters < max_iters:
        start = h
        qn, nit = _sqp_step(q, evaluator, pieces, feasible, min(100, max_iters - iters))
        iters += nit
        hn = _support_value(qn, evaluator, pieces)
        if hn > h:
            q, h = qn, hn
            history.append(h)
        q, h, accepted, step = _block_pass(q, h, evaluator, pieces, feasible, step)
        iters += 1
        history.extend(accepted)
        if h - start < conv_tol:
            break
    return AscentRun(q, h, history, iters)

# ---------------------------------------------------------------------------
# public optimization entry points


def weighted_objective(a, c: BroadcastChannel, lam: float, kind: str = NE) -> float:
    """max of lam R1 + (1 - lam) R2 over the constraint set of one auxiliary law.

    ``a`` is an AuxTriple for NE bounds, an AuxPair for a KM half and a
    TimeShareLaw for the randomized time-sharing region.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"weight {lam} outside [0, 1]")
    if kind == NE:
        s = ne_outer_constraints(a, c)
    elif kind == NE_AUX:
        s = ne_outer_constraints_aux_form(a, c)
    elif kind == KM_Y:
        s = km_oy_constraints(a, c)
    elif kind == KM_Z:
        s = km_oz_constraints(a, c)
    elif kind == CVDM:
        s = cvdm_rts_constraints(a.pw, a.px_given_w, c)
    else:
        raise ValueError(f"unknown bound id {kind!r}")
    return s.support(lam)


@dataclass
class MaxResult:
    value: float
    aux: object
    constraints: RateConstraintSet2 | None
    iterations: int
    restart_values: list[float] = field(default_factory=list)
    q: np.ndarray | None = None

    @property
    def sum_rate(self) -> float:
        """Sum rate implied at lam = 1/2 (twice the support value)."""
        return 2.0 * self.value


def _shape_for(kind: str, c: BroadcastChannel, cfg: OptimizerConfig) -> tuple[int, int, int]:
    nu, nv = cfg.cards(c.nx)
    if kind == KM_Y:
        nu = 1
    elif kind == KM_Z:
        nv = 1
    return (nu, nv, c.nx)


def _restart_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def _serialize(q: np.ndarray) -> str:
    return json.dumps(np.round(q, 12).tolist())


def _constraints_from(vals: np.ndarray, kind: str) -> RateConstraintSet2:
    v = np.maximum(vals, 0.0)
    return RateConstraintSet2(*map(float, v), provenance=kind)


def _embed(q, shape) -> np.ndarray:
    """Zero-pad a joint q[u, v, x] with smaller auxiliary alphabets into ``shape``."""
    q = np.asarray(q, dtype=float)
    if q.ndim != 3 or q.shape[2] != shape[2] or q.shape[0] > shape[0] or q.shape[1] > shape[1]:
        raise ValueError(f"starting joint of shape {q.shape} does not fit {shape}")
    out = np.zeros(shape)
    out[:q.shape[0], :q.shape[1]] = q
    return out


def _deterministic_masks(shape) -> list[np.ndarray]:
    nu, nv, nx = shape
    masks = []
    for xs in itertools.product(range(nx), repeat=nu * nv):
        m = np.zeros(shape, bool)
        m.reshape(nu * nv, nx)[np.arange(nu * nv), xs] = True
        masks.append(m)
    return masks


def max_weighted_sum(c: BroadcastChannel, lam: float, kind: str = NE,
                     cfg: OptimizerConfig | None = None, starts: Sequence[np.ndarray] = (),
                     stream: int = 0) -> MaxResult:
    """Best support value found for ``kind`` at weight ``lam``.

    Nonconvex: the result is a lower estimate of the true support value.
    ``starts`` are extra initial joints q[u, v, x] (warm starts, grid points).
    """
    cfg = cfg or OptimizerConfig()
    if kind == CVDM:
        return cvdm_max_weighted_sum(c, lam, cfg.cvdm_step)
    if kind not in (NE, KM_Y, KM_Z):
        raise ValueError(f"unknown bound id {kind!r}; expected one of {KINDS}")
    shape = _shape_for(kind, c, cfg)
    ev = _Evaluator(c, kind)
    mode = cfg.resolved_mode(shape, kind)
    masks = _deterministic_masks(shape) if mode == DETERMINISTIC else [None]
    starts = [_embed(s, shape) for s in starts]
    candidates = []
    total_iters = 0
    for mi, mask in enumerate(masks):
        try:
            feas = _Feasible(shape, mask, cfg.fixed_px)
        except ValueError:
            continue
        inits = [feas.sample(_restart_rng(cfg.seed, stream, mi, r)) for r in range(cfg.restarts)]
        inits += [s for s in starts if mask is None or not np.any(s[~mask] > 0)]
        for q0 in inits:
            run = ascend(q0, ev, lam, feas, cfg.max_iters, cfg.conv_tol)
            total_iters += run.iterations
            candidates.append((run.value, run.q))
    if not candidates:
        raise ValueError("no feasible starting point under the given constraints")
    best_val = max(max(v for v, _ in candidates), 0.0)
    tied = [q for v, q in candidates if v >= best_val - 1e-12]
    best_q = min(tied, key=_serialize)
    if kind == KM_Y:
        aux = AuxPair.from_joint(best_q[0])
    elif kind == KM_Z:
        aux = AuxPair.from_joint(best_q[:, 0])
    else:
        aux = AuxTriple.from_joint(best_q)
    vals = ev.values(best_q)
    return MaxResult(best_val, aux, _constraints_from(vals, kind), total_iters,
                     [v for v, _ in candidates], best_q)


# ---------------------------------------------------------------------------
# randomized time-sharing inner region (binary W, grid search)


def _simplex_grid(n: int, k: int) -> np.ndarray:
    """All points of the k-simplex with coordinates in multiples of 1/n."""
    pts = []
    for comb in itertools.combinations(range(n + k - 1), k - 1):
        bars = (-1,) + comb + (n + k - 1,)
        pts.append([bars[i + 1] - bars[i] - 1 for i in range(k)])
    return np.array(pts, dtype=float) / n


def _grid_points(step: float) -> int:
    n = round(1.0 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ValueError(f"grid step {step} must be 1/n for an integer n")
    return n


def cvdm_corner_points(c: BroadcastChannel, step: float = 1.0 / 256):
    """Yield (points, laws) chunks: the two pentagon corners of every grid law.

    For each P(W=0) on the grid, every pair of p(x|w) rows on the grid.
    """
    n = _grid_points(step)
    rows = _simplex_grid(n, c.nx)
    total = (n + 1) * len(rows) ** 2
    if total > GRID_LIMIT:
        raise GridTooLargeError(f"randomized time-sharing grid has {total} points (limit {GRID_LIMIT})")
    ty, tz = _PairTerms(c.wy), _PairTerms(c.wz)
    ay = rows @ c.wy
    az = rows @ c.wz
    hy_rows, hz_rows = _h(ay, -1), _h(az, -1)
    ixy = hy_rows - rows @ ty.hb  # I(X;Y) for X ~ row
    ixz = hz_rows - rows @ tz.hb
    for w0 in np.arange(n + 1) / n:
        w1 = 1.0 - w0
        my = w0 * ay[:, None, :] + w1 * ay[None, :, :]
        mz = w0 * az[:, None, :] + w1 * az[None, :, :]
        iwy = _h(my, -1) - w0 * hy_rows[:, None] - w1 * hy_rows[None, :]
        iwz = _h(mz, -1) - w0 * hz_rows[:, None] - w1 * hz_rows[None, :]
        common = np.maximum(np.minimum(iwy, iwz), 0.0)
        a = np.broadcast_to(w0 * ixy[:, None], common.shape)
        b = np.broadcast_to(w1 * ixz[None, :], common.shape)
        pts = np.concatenate([np.stack([common + a, b], -1).reshape(-1, 2),
                              np.stack([a, common + b], -1).reshape(-1, 2)])
        yield w0, rows, pts


def _cvdm_scan(c: BroadcastChannel, lambdas: Sequence[float], step: float):
    lambdas = np.asarray(lambdas, dtype=float)
    best = np.full(lambdas.size, -np.inf)
    laws: list[TimeShareLaw | None] = [None] * lambdas.size
    weights = np.column_stack([lambdas, 1.0 - lambdas])
    for w0, rows, pts in cvdm_corner_points(c, step):
        scores = pts @ weights.T  # (npts, nlam)
        idx = scores.argmax(axis=0)
        top = scores[idx, np.arange(lambdas.size)]
        better = top > best + 1e-15
        for li in np.flatnonzero(better):
            best[li] = top[li]
            k = idx[li] % (len(rows) ** 2)
            i, j = divmod(int(k), len(rows))
            laws[li] = TimeShareLaw(np.array([w0, 1.0 - w0]), np.stack([rows[i], rows[j]]))
    return np.maximum(best, 0.0), laws


def cvdm_max_weighted_sum(c: BroadcastChannel, lam: float, step: float = 1.0 / 256) -> MaxResult:
    vals, laws = _cvdm_scan(c, [lam], step)
    law = laws[0]
    cons = cvdm_rts_constraints(law.pw, law.px_given_w, c)
    return MaxResult(float(vals[0]), law, cons, 0, [float(vals[0])])


# ---------------------------------------------------------------------------
# exhaustive grid oracle


def brute_force_oracle(c: BroadcastChannel, lam: float, kind: str = NE, grid_step: float = 1.0 / 64,
                       nu: int = 2, nv: int = 2, deterministic: bool = True,
                       limit: int = GRID_LIMIT, return_argmax: bool = False):
    """Exhaustive scan of p(u,v) (and p(x|u,v) or all maps x(u,v)) on a grid.

    Returns the best support value on the grid, a certified lower bound on the
    true support value.
    """
    if kind == CVDM:
        vals, _ = _cvdm_scan(c, [lam], grid_step)
        return float(vals[0])
    if kind not in (NE, KM_Y, KM_Z):
        raise ValueError(f"unknown bound id {kind!r}")
    if kind == KM_Y:
        nu = 1
    elif kind == KM_Z:
        nv = 1
    n = _grid_points(grid_step)
    nx = c.nx
    cells = nu * nv
    puv = _simplex_grid(n, cells)
    if deterministic:
        conds = np.eye(nx)[np.array(list(itertools.product(range(nx), repeat=cells)))]
    else:
        rows = _simplex_grid(n, nx)
        n_conds = len(rows) ** cells
        if len(puv) * n_conds > limit:
            raise GridTooLargeError(
                f"grid has {len(puv) * n_conds} points over {cells - 1 + cells * (nx - 1)} parameters (limit {limit})")
        conds = rows[np.array(list(itertools.product(range(len(rows)), repeat=cells)))]
    total = len(puv) * len(conds)
    if total > limit:
        raise GridTooLargeError(f"grid has {total} points over {cells - 1} parameters (limit {limit})")
    ev = _Evaluator(c, kind)
    best, arg = -np.inf, None
    chunk = max(1, 2_000_000 // (len(puv) * cells * nx))
    for s in range(0, len(conds), chunk):
        cond = conds[s:s + chunk]  # (k, cells, nx)
        q = (puv[None, :, :, None] * cond[:, None, :, :]).reshape(len(cond), len(puv), nu, nv, nx)
        a, b, sa, sb = ev.values(q)
        h = pentagon_support(a, b, np.minimum(sa, sb), lam)
        i = np.unravel_index(int(np.argmax(h)), h.shape)
        if h[i] > best:
            best, arg = float(h[i]), q[i]
    return (best, arg) if return_argmax else best


# ---------------------------------------------------------------------------
# tracing


@dataclass
class TraceResult:
    kind: str
    polygon: PolygonRegion
    lambdas: np.ndarray
    values: np.ndarray
    best: list
    iterations: list[int]
    halves: dict[str, "TraceResult"] = field(default_factory=dict)

    def write(self, csv_path, json_path=None) -> None:
        self.polygon.to_csv(csv_path)
        if json_path is None:
            json_path = Path(csv_path).with_suffix(".json")
        Path(json_path).write_text(json.dumps(self.sidecar(), indent=1) + "\n", encoding="utf-8")

    def sidecar(self) -> dict:
        def law(a):
            return a.to_dict() if hasattr(a, "to_dict") else None

        out = {
            "bound": self.kind,
            "lambdas": self.lambdas.tolist(),
            "values": self.values.tolist(),
            "iterations": list(self.iterations),
            "best": [law(a) for a in self.best],
        }
        if self.halves:
            out["halves"] = {k: v.sidecar() for k, v in self.halves.items()}
        return out


def angle_grid(num_angles: int) -> np.ndarray:
    if num_angles < 2:
        raise ValueError("need at least two angles")
    return np.linspace(0.0, 1.0, num_angles)


def trace_region(c: BroadcastChannel, kind: str = NE, num_angles: int = 65,
                 cfg: OptimizerConfig | None = None,
                 progress: Callable[[int, float, float], None] | None = None) -> TraceResult:
    """Sample the support function on a uniform angle grid and intersect the half-planes."""
    cfg = cfg or OptimizerConfig()
    lambdas = angle_grid(num_angles)
    if kind == KM:
        y = trace_region(c, KM_Y, num_angles, cfg, progress)
        z = trace_region(c, KM_Z, num_angles, cfg, progress)
        poly = y.polygon.intersect(z.polygon)
        values = np.array([poly.support(l) for l in lambdas])
        poly = replace(poly, values=values)
        return TraceResult(KM, poly, lambdas, values, [None] * len(lambdas), [0] * len(lambdas),
                           {KM_Y: y, KM_Z: z})
    if kind == CVDM:
        values, laws = _cvdm_scan(c, lambdas, cfg.cvdm_step)
        poly = PolygonRegion.from_halfplanes(lambdas, values)
        return TraceResult(CVDM, poly, lambdas, values, laws, [0] * len(lambdas))
    if kind not in (NE, KM_Y, KM_Z):
        raise ValueError(f"unknown bound id {kind!r}")
    values, best, iters = [], [], []
    prev: list[np.ndarray] = []
    for i, lam in enumerate(lambdas):
        res = max_weighted_sum(c, float(lam), kind, cfg, starts=prev, stream=i)
        values.append(res.value)
        best.append(res.aux)
        iters.append(res.iterations)
        if cfg.warm_start:
            prev = [res.q]
        if progress:
            progress(i, float(lam), res.value)
    values = np.array(values)
    poly = PolygonRegion.from_halfplanes(lambdas, values)
    return TraceResult(kind, poly, lambdas, values, best, iters)


# ---------------------------------------------------------------------------
# comparing the three bounds


@dataclass
class CompareReport:
    lambdas: np.ndarray
    values: dict[str, np.ndarray]
    sum_rates: dict[str, float]
    violations: list[str]
    max_gaps: dict[str, float]
    asymmetry: dict[str, float]
    traces: dict[str, TraceResult] = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas.tolist(),
            "values": {k: v.tolist() for k, v in self.values.items()},
            "sum_rates": self.sum_rates,
            "violations": self.violations,
            "max_gaps": self.max_gaps,
            "asymmetry": self.asymmetry,
        }


def compare_bounds(c: BroadcastChannel, cfg: OptimizerConfig | None = None, num_angles: int = 65,
                   tol: float = 1e-3, progress=None) -> CompareReport:
    """Trace the inner region and both outer bounds and check CvdM <= NE <= KM per angle.

    Outer-bound values are lower estimates, so a violation beyond ``tol`` flags
    either an optimizer miss or a genuine error.
    """
    traces = {kind: trace_region(c, kind, num_angles, cfg, progress) for kind in (CVDM, NE, KM)}
    lambdas = traces[NE].lambdas
    values = {k: tr.values for k, tr in traces.items()}
    violations = []
    for inner, outer in ((CVDM, NE), (NE, KM), (CVDM, KM)):
        excess = values[inner] - values[outer]
        for i in np.flatnonzero(excess > tol):
            violations.append(f"{inner} exceeds {outer} at lambda={lambdas[i]:.6g} by {excess[i]:.3g}")
    gaps = {f"{o}-{i}": float(np.max(values[o] - values[i])) for i, o in ((CVDM, NE), (NE, KM))}
    asym = {k: float(np.max(np.abs(v - v[::-1]))) for k, v in values.items()}
    sums = {k: tr.polygon.sum_rate for k, tr in traces.items()}
    return CompareReport(lambdas, values, sums, violations, gaps, asym, traces)
