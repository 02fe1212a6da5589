"""Finite-alphabet distributions and information measures (in bits)."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MASS_TOL = 1e-9
# entries below this are treated as exact zeros inside entropy sums
ZERO_FLOOR = 1e-12


class InvalidDistributionError(ValueError):
    pass


def _check_probs(p: np.ndarray, tol: float = MASS_TOL) -> None:
    if p.size == 0:
        raise InvalidDistributionError("empty distribution")
    if not np.all(np.isfinite(p)):
        raise InvalidDistributionError("non-finite probability")
    low = p.min()
    if low < -tol:
        idx = np.unravel_index(int(np.argmin(p)), p.shape)
        raise InvalidDistributionError(f"negative mass {low:.3g} at index {tuple(int(i) for i in idx)}")
    total = p.sum()
    if abs(total - 1.0) > tol:
        raise InvalidDistributionError(f"total mass {total!r} differs from 1 by more than {tol:g}")


def entropy_bits(p: np.ndarray, axis=None) -> np.ndarray | float:
    """Shannon entropy of (possibly unnormalized) mass ``p`` in bits, summed over ``axis``.

    No validation; ``0 log 0 = 0``.
    """
    p = np.asarray(p, dtype=float)
    safe = np.where(p > ZERO_FLOOR, p, 1.0)
    terms = np.where(p > ZERO_FLOOR, -p * np.log2(safe), 0.0)
    return terms.sum(axis=axis)


def marginal_array(p: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    keep = tuple(sorted(set(keep)))
    drop = tuple(i for i in range(p.ndim) if i not in keep)
    return p.sum(axis=drop) if drop else p


def info_array(p: np.ndarray, a: Sequence[int], b: Sequence[int], given: Sequence[int] = ()) -> float:
    """I(A;B|C) for axis groups of a dense joint array."""
    a, b, c = tuple(a), tuple(b), tuple(given)
    h = lambda axes: float(entropy_bits(marginal_array(p, axes))) if axes else 0.0
    return h(a + c) + h(b + c) - h(a + b + c) - h(c)


@dataclass(frozen=True)
class Dist:
    """A probability vector over ``len(probs)`` symbols."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        _check_probs(p)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights) -> "Dist":
        w = np.asarray(weights, dtype=float).reshape(-1)
        if np.any(w < 0) or w.sum() <= 0:
            raise InvalidDistributionError("weights must be non-negative with positive total")
        return cls(w / w.sum())

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, i):
        return self.probs[i]


@dataclass(frozen=True)
class JointDist:
    """Dense joint law; one axis per random variable, named by ``labels``."""

    probs: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        labels = tuple(self.labels) if self.labels else tuple(f"A{i}" for i in range(p.ndim))
        if len(labels) != p.ndim:
            raise ValueError(f"{len(labels)} labels for a {p.ndim}-dimensional tensor")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate axis labels {labels}")
        _check_probs(p)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "labels", labels)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.probs.shape

    def axes(self, names) -> tuple[int, ...]:
        if isinstance(names, str):
            names = (names,)
        try:
            return tuple(self.labels.index(n) for n in names)
        except ValueError:
            raise KeyError(f"unknown axis in {names!r}; have {self.labels}") from None

    def marginal(self, *names: str) -> "JointDist":
        idx = self.axes(names)
        m = marginal_array(self.probs, idx)
        # marginal_array keeps axes in sorted order; permute to the requested order
        order = np.argsort(np.argsort(idx))
        return JointDist(np.transpose(m, order) if m.ndim > 1 else m, tuple(names))

    def entropy(self, *names: str) -> float:
        names = names or self.labels
        return float(entropy_bits(marginal_array(self.probs, self.axes(names))))

    def mi(self, a, b, given=()) -> float:
        """I(a;b|given); each argument is a label or a sequence of labels."""
        return info_array(self.probs, self.axes(a), self.axes(b), self.axes(given) if given else ())


def _as_array(d) -> np.ndarray:
    return d.probs if isinstance(d, (Dist, JointDist)) else np.asarray(d, dtype=float)


def entropy(d) -> float:
    """Entropy in bits of a :class:`Dist` (or any valid probability array)."""
    if not isinstance(d, (Dist, JointDist)):
        d = Dist(d)
    return float(entropy_bits(d.probs))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument {x} outside [0, 1]")
    return float(entropy_bits(np.array([x, 1.0 - x])))


def mutual_information(j) -> float:
    """I(A;B) for a two-dimensional joint law."""
    p = _as_array(j)
    if p.ndim != 2:
        raise ValueError(f"mutual_information needs a 2-D joint, got {p.ndim}-D")
    if not isinstance(j, JointDist):
        _check_probs(p)
    return info_array(p, (0,), (1,))


def conditional_mutual_information(j, given: int | str = -1) -> float:
    """I(A;B|C) for a three-dimensional joint law; ``given`` names the conditioning axis."""
    p = _as_array(j)
    if p.ndim != 3:
        raise ValueError(f"conditional_mutual_information needs a 3-D joint, got {p.ndim}-D")
    if isinstance(given, str):
        if not isinstance(j, JointDist):
            raise ValueError("axis names need a JointDist")
        c = j.axes(given)[0]
    else:
        c = given % 3
    if not isinstance(j, JointDist):
        _check_probs(p)
    a, b = (i for i in range(3) if i != c)
    return info_array(p, (a,), (b,), (c,))


def csiszar_identity_residual(j) -> float:
    """|sum_i I(Y^{i-1}; Z_i | Z_{i+1}^n) - sum_i I(Z_{i+1}^n; Y_i | Y^{i-1})|.

    ``j`` is a joint over (Y_1..Y_n, Z_1..Z_n) in that axis order.
    """
    p = _as_array(j)
    if p.ndim % 2:
        raise ValueError(f"need 2n axes (Y_1..Y_n, Z_1..Z_n), got {p.ndim}")
    if not isinstance(j, JointDist):
        _check_probs(p)
    n = p.ndim // 2
    ys = list(range(n))
    zs = list(range(n, 2 * n))
    left = right = 0.0
    for i in range(n):
        past_y = ys[:i]
        future_z = zs[i + 1:]
        if past_y:
            left += info_array(p, past_y, (zs[i],), future_z)
        if future_z:
            right += info_array(p, future_z, (ys[i],), past_y)
    return abs(left - right)
