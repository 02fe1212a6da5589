"""Two-receiver broadcast channels p(y,z|x) and their JSON file format."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .probcore import MASS_TOL, Dist, JointDist


class ChannelParseError(ValueError):
    pass


class ChannelValidationError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass(frozen=True)
class BroadcastChannel:
    """Transition tensor ``w[x, y, z] = p(y, z | x)``.

    Construction does not validate; call :func:`validate` (the loaders do).
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float)
        if w.ndim != 3:
            raise ValueError(f"channel tensor must be 3-D (x, y, z), got shape {w.shape}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def nx(self) -> int:
        return self.w.shape[0]

    @property
    def ny(self) -> int:
        return self.w.shape[1]

    @property
    def nz(self) -> int:
        return self.w.shape[2]

    @property
    def wy(self) -> np.ndarray:
        return self.w.sum(axis=2)

    @property
    def wz(self) -> np.ndarray:
        return self.w.sum(axis=1)


@dataclass(frozen=True)
class MarginalChannel:
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        for r in rows:
            Dist(r)
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def nin(self) -> int:
        return self.rows.shape[0]

    @property
    def nout(self) -> int:
        return self.rows.shape[1]


def validate(c: BroadcastChannel, tol: float = MASS_TOL) -> list[str]:
    """All invariant violations of ``c``; empty iff the channel is valid."""
    problems = []
    if not np.all(np.isfinite(c.w)):
        problems.append("non-finite entries")
    for x in range(c.nx):
        row = c.w[x]
        neg = np.argwhere(row < -tol)
        for y, z in neg:
            problems.append(f"negative entry w[{x}][{y}][{z}] = {row[y, z]:.6g}")
        mass = row.sum()
        if abs(mass - 1.0) > tol:
            problems.append(f"row x={x} has mass {mass:.12g}, expected 1")
    return problems


def _require_valid(c: BroadcastChannel) -> None:
    problems = validate(c)
    if problems:
        raise ChannelValidationError(problems)


def marginal_y(c: BroadcastChannel) -> MarginalChannel:
    return MarginalChannel(c.wy)


def marginal_z(c: BroadcastChannel) -> MarginalChannel:
    return MarginalChannel(c.wz)


def push_forward(px, c: BroadcastChannel) -> JointDist:
    """Joint law of (X, Y, Z) when X ~ px is sent through ``c``."""
    px = px if isinstance(px, Dist) else Dist(px)
    if len(px) != c.nx:
        raise ValueError(f"input law has {len(px)} symbols, channel expects {c.nx}")
    return JointDist(px.probs[:, None, None] * c.w, ("X", "Y", "Z"))


def from_marginals(wy, wz) -> BroadcastChannel:
    """Channel with Y and Z conditionally independent given X."""
    wy = np.asarray(wy, dtype=float)
    wz = np.asarray(wz, dtype=float)
    if wy.shape[0] != wz.shape[0]:
        raise ValueError("marginals disagree on the input alphabet size")
    return BroadcastChannel(wy[:, :, None] * wz[:, None, :])


def bssc(p: float = 0.5) -> BroadcastChannel:
    """Binary skew-symmetric channel.

    X=1 reaches Y intact and X=0 reaches Z intact; the other symbol goes through
    a binary branch: p(y=0|x=0) = p, p(z=1|x=1) = p. At p = 1/2 those branches
    are pure noise.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"bssc parameter {p} outside [0, 1]")
    wy = np.array([[p, 1.0 - p], [0.0, 1.0]])
    wz = np.array([[1.0, 0.0], [1.0 - p, p]])
    return from_marginals(wy, wz)


def noiseless(n: int = 2) -> BroadcastChannel:
    """Y = Z = X over an ``n``-letter alphabet."""
    w = np.zeros((n, n, n))
    for x in range(n):
        w[x, x, x] = 1.0
    return BroadcastChannel(w)


def random_channel(rng: np.random.Generator, nx: int = 2, ny: int = 2, nz: int = 2) -> BroadcastChannel:
    """Channel with every p(.,.|x) drawn uniformly from the simplex."""
    w = rng.dirichlet(np.ones(ny * nz), size=nx).reshape(nx, ny, nz)
    return BroadcastChannel(w)


def channel_to_json(c: BroadcastChannel) -> str:
    fmt = lambda v: format(float(v), ".17g")
    xs = []
    for x in range(c.nx):
        ys = ["[" + ", ".join(fmt(v) for v in c.w[x, y]) + "]" for y in range(c.ny)]
        xs.append("    [" + ", ".join(ys) + "]")
    return (
        f'{{"nx": {c.nx}, "ny": {c.ny}, "nz": {c.nz},\n "w": [\n'
        + ",\n".join(xs)
        + "\n ]}\n"
    )


def channel_from_json(text: str, check: bool = True) -> BroadcastChannel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelParseError(f"malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(obj, dict):
        raise ChannelParseError("top level must be an object")
    sizes = {}
    for key in ("nx", "ny", "nz"):
        v = obj.get(key)
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise ChannelParseError(f"field '{key}' must be a positive integer, got {v!r}")
        sizes[key] = v
    w = obj.get("w")
    if not isinstance(w, list):
        raise ChannelParseError("field 'w' must be a nested list w[x][y][z]")
    nx, ny, nz = sizes["nx"], sizes["ny"], sizes["nz"]
    if len(w) != nx:
        if len(w) < nx:
            raise ChannelParseError(f"field 'w' has {len(w)} rows, expected nx={nx}: row x={len(w)} missing")
        raise ChannelParseError(f"field 'w' has {len(w)} rows, expected nx={nx}: unexpected row x={nx}")
    out = np.empty((nx, ny, nz))
    for x, block in enumerate(w):
        if not isinstance(block, list) or len(block) != ny:
            raise ChannelParseError(f"w[{x}] must be a list of ny={ny} rows")
        for y, row in enumerate(block):
            if not isinstance(row, list) or len(row) != nz:
                raise ChannelParseError(f"w[{x}][{y}] must be a list of nz={nz} numbers")
            for z, v in enumerate(row):
                if not isinstance(v, (int, float)) or isinstance(v, bool):
                    raise ChannelParseError(f"w[{x}][{y}][{z}] is not a number: {v!r}")
                out[x, y, z] = v
    c = BroadcastChannel(out)
    if check:
        _require_valid(c)
    return c


def save_channel(c: BroadcastChannel, path) -> None:
    Path(path).write_text(channel_to_json(c), encoding="utf-8")


def load_channel(path, check: bool = True) -> BroadcastChannel:
    return channel_from_json(Path(path).read_text(encoding="utf-8"), check=check)
