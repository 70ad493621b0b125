"""Discrete paths on a uniform grid and the exponential-functional transforms.

Every path carries its :class:`TimeGrid`; values may be a single path of shape
``(n + 1,)`` or a batch of shape ``(..., n + 1)``. All transforms act on the
last axis and accept a per-path shift parameter, so anticipative transforms
(whose argument depends on the path itself) vectorize over an ensemble.

The running functional ``A_s(phi) = int_0^s exp(2 phi_u) du`` is computed once
by the trapezoidal rule and every transform consumes that same profile, so the
algebraic identities between transforms degrade only through one quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

# |2 phi| beyond this overflows exp() in double precision
EXP_LIMIT = 700.0


class GridError(ValueError):
    pass


class RangeError(OverflowError):
    """A path value is too large for ``exp(2 phi)`` to be represented."""


@dataclass(frozen=True)
class TimeGrid:
    horizon: float
    steps: int

    def __post_init__(self):
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise GridError(f"horizon must be positive and finite, got {self.horizon}")
        steps = int(self.steps)
        if steps != self.steps or steps < 1 or steps & (steps - 1):
            raise GridError(f"steps must be a positive power of two, got {self.steps}")

    @property
    def spacing(self) -> float:
        return self.horizon / self.steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.spacing

    def index_of(self, s: float) -> int:
        """Grid index of time ``s``; ``s`` must sit on the grid."""
        k = s / self.spacing
        ik = int(round(k))
        if not (0 <= ik <= self.steps) or abs(k - ik) > 1e-9 * max(1.0, abs(k)):
            raise GridError(f"time {s} is not a grid point of {self}")
        return ik

    def refine(self) -> "TimeGrid":
        return TimeGrid(self.horizon, 2 * self.steps)


@dataclass(frozen=True)
class Path:
    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim == 0 or values.shape[-1] != self.grid.steps + 1:
            raise GridError(
                f"expected {self.grid.steps + 1} values on the last axis, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("path values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: TimeGrid, fn) -> "Path":
        return cls(grid, fn(grid.times))

    @property
    def batch_shape(self) -> tuple:
        return self.values.shape[:-1]

    @property
    def endpoint(self) -> np.ndarray:
        # a copy: a view would keep the whole value matrix alive
        return self.values[..., -1].copy()

    def at(self, s: float) -> np.ndarray:
        return self.values[..., self.grid.index_of(s)]


@dataclass(frozen=True)
class CumulativeProfile:
    """``A(s_k)`` on the grid, together with the complementary tail sums.

    ``tail[k] = A(t) - A(s_k)`` is accumulated from the right, which keeps
    ``A(t) - A(s)`` accurate near ``s = t`` where a subtraction would cancel.
    """

    grid: TimeGrid
    values: np.ndarray
    tail: np.ndarray

    @property
    def final(self) -> np.ndarray:
        return self.values[..., -1].copy()


def _check_range(values: np.ndarray) -> None:
    bad = np.abs(2.0 * values) > EXP_LIMIT
    if bad.any():
        where = np.argwhere(bad)[0]
        index = int(where[-1])
        batch = tuple(int(i) for i in where[:-1])
        loc = f"grid index {index}" + (f" of path {batch}" if batch else "")
        raise RangeError(f"|2*phi| exceeds {EXP_LIMIT:g} at {loc}")


def cumulative_exp(path: Path) -> CumulativeProfile:
    """Trapezoidal cumulative integral of ``exp(2 phi)`` over the grid."""
    phi = path.values
    _check_range(phi)
    e = np.exp(2.0 * phi)
    inc = 0.5 * path.grid.spacing * (e[..., 1:] + e[..., :-1])
    zeros = np.zeros(phi.shape[:-1] + (1,))
    values = np.concatenate([zeros, np.cumsum(inc, axis=-1)], axis=-1)
    tail = np.concatenate([np.cumsum(inc[..., ::-1], axis=-1)[..., ::-1], zeros], axis=-1)
    return CumulativeProfile(path.grid, values, tail)


def z_profile(path: Path) -> np.ndarray:
    """``exp(-phi_s) A_s(phi)`` at grid points ``s_1 .. s_n`` (``s_0`` omitted)."""
    a = cumulative_exp(path).values
    return np.exp(-path.values[..., 1:]) * a[..., 1:]


def _shift(z) -> np.ndarray:
    return np.asarray(z, dtype=float)[..., None]


def _anticipative_log(ratio, tail_ratio, z) -> np.ndarray:
    """``log(1 + ratio * (e^z - 1))`` with ``tail_ratio = 1 - ratio``.

    For ``z >= 0`` the argument is ``1 + positive``; for ``z < 0`` it is formed
    as ``tail_ratio + ratio * e^z`` to avoid cancellation when ``e^z`` is tiny.
    """
    z = np.broadcast_to(z, np.broadcast_shapes(np.shape(z), np.shape(ratio)))
    out = np.empty(z.shape)
    pos = z >= 0
    out[pos] = np.log1p(ratio[pos] * np.expm1(z[pos]))
    neg = ~pos
    out[neg] = np.log(tail_ratio[neg] + ratio[neg] * np.exp(z[neg]))
    # no tail left means ratio == 1: the log is z itself, not log(exp(z))
    done = tail_ratio == 0
    out[done] = z[done]
    return out


def _transform_total(path: Path, z, total=None) -> Path:
    prof = cumulative_exp(path)
    a, tail = prof.values, prof.tail
    if total is None:
        total = a[..., -1:]
    else:
        total = np.asarray(total, dtype=float)[..., None]
        if np.any(total < a[..., -1:]):
            raise ValueError("A_inf proxy must be at least A on the grid horizon")
        tail = tail + (total - a[..., -1:])
    z = _shift(z)
    ratio = np.broadcast_to(a / total, np.broadcast_shapes(a.shape, z.shape))
    tail_ratio = np.broadcast_to(tail / total, ratio.shape)
    values = path.values - _anticipative_log(ratio, tail_ratio, z)
    return Path(path.grid, values)


def transform_tz(path: Path, z) -> Path:
    """``phi_s - log{1 + (A_s/A_t)(e^z - 1)}`` on ``[0, t]``.

    ``z`` may be a scalar or an array matching the batch shape of ``path``.
    At ``s = t`` the result is exactly ``phi_t - z``.
    """
    return _transform_total(path, z)


def transform_tstar(path: Path, z, a_inf=None) -> Path:
    """Same map with ``A_t`` replaced by an ``A_inf`` proxy.

    The proxy defaults to ``A`` at the grid horizon; pass ``a_inf`` (per path)
    when the functional has been continued past the horizon.
    """
    return _transform_total(path, z, a_inf)


def transform_talpha(path: Path, alpha) -> Path:
    """``phi_s - log{1 + alpha A_s(phi)}`` (adapted; no terminal information used)."""
    alpha = _shift(alpha)
    if np.any(alpha <= 0):
        raise ValueError("alpha must be positive")
    a = cumulative_exp(path).values
    return Path(path.grid, path.values - np.log1p(alpha * a))


def reverse(path: Path) -> Path:
    """Time reversal ``phi_{t-s} - phi_t``."""
    v = path.values
    return Path(path.grid, v[..., ::-1] - v[..., -1:])


# Transform specifications -----------------------------------------------------

@dataclass(frozen=True)
class Tz:
    z: float


@dataclass(frozen=True)
class Tstar:
    z: float
    a_inf: float | None = None


@dataclass(frozen=True)
class Talpha:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("Talpha requires alpha > 0")


@dataclass(frozen=True)
class Reverse:
    pass


@dataclass(frozen=True)
class Identity:
    pass


Step = Union[Tz, Tstar, Talpha, Reverse, Identity]
TransformSpec = Union[Step, Sequence[Step]]


def apply(spec: TransformSpec, path: Path) -> Path:
    """Apply one transform, or a sequence of them left to right."""
    if isinstance(spec, (list, tuple)):
        steps = list(spec)
        i = 0
        while i < len(steps):
            if isinstance(steps[i], Reverse) and i + 1 < len(steps) and isinstance(steps[i + 1], Reverse):
                # R(R(phi)) = phi - phi_0, without the two roundings of reversing twice
                v = path.values
                path = Path(path.grid, v - v[..., :1])
                i += 2
                continue
            path = apply(steps[i], path)
            i += 1
        return path
    if isinstance(spec, Identity):
        return path
    if isinstance(spec, Tz):
        return transform_tz(path, spec.z)
    if isinstance(spec, Tstar):
        return transform_tstar(path, spec.z, spec.a_inf)
    if isinstance(spec, Talpha):
        return transform_talpha(path, spec.alpha)
    if isinstance(spec, Reverse):
        return reverse(path)
    raise TypeError(f"unknown transform step {spec!r}")
