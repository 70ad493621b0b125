"""Seeded samplers for Brownian paths, bridges and the auxiliary laws.

Randomness is addressed by :class:`StreamKey`. A key maps deterministically to
a counter-based Philox generator, so the draws for a batch depend only on
(master seed, scenario id, batch index) and never on scheduling.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate

from .paths import Path, TimeGrid, cumulative_exp

# ---------------------------------------------------------------------------
# streams


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    scenario_id: str = ""
    batch_index: int = 0
    draw_counter: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.batch_index < 0 or self.draw_counter < 0:
            raise ValueError("batch_index and draw_counter must be nonnegative")

    def child(self, name: str) -> "StreamKey":
        return replace(self, scenario_id=f"{self.scenario_id}/{name}")

    def batch(self, index: int) -> "StreamKey":
        return replace(self, batch_index=index)

    def _spawn_key(self) -> tuple:
        digest = hashlib.blake2b(self.scenario_id.encode(), digest_size=16).digest()
        words = tuple(int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4))
        return words + (int(self.batch_index),)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.master_seed), spawn_key=self._spawn_key())
        bitgen = np.random.Philox(seq)
        if self.draw_counter:
            bitgen.advance(int(self.draw_counter))
        return np.random.Generator(bitgen)


Stream = Union[StreamKey, np.random.Generator]


def as_generator(stream: Stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    if isinstance(stream, StreamKey):
        return stream.generator()
    raise TypeError(f"expected StreamKey or numpy Generator, got {type(stream).__name__}")


@dataclass(frozen=True)
class SamplerConfig:
    grid: TimeGrid
    drift: float = 0.0
    tail_tol: float = 1e-6
    max_extensions: int = 4


def default_horizon(mu: float) -> float:
    """Truncation horizon used as a stand-in for ``[0, inf)`` at drift ``-mu``."""
    return max(30.0 / mu, 10.0)


# ---------------------------------------------------------------------------
# Brownian objects


def _walk(grid: TimeGrid, drift, rng: np.random.Generator, size) -> np.ndarray:
    shape = (() if size is None else tuple(np.atleast_1d(size))) + (grid.steps,)
    h = grid.spacing
    inc = rng.standard_normal(shape) * np.sqrt(h)
    inc += np.asarray(drift, dtype=float)[..., None] * h
    out = np.zeros(shape[:-1] + (grid.steps + 1,))
    np.cumsum(inc, axis=-1, out=out[..., 1:])
    return out


def sample_bm(grid: TimeGrid, drift, stream: Stream, size=None) -> Path:
    """Brownian motion with drift started at 0, sampled exactly at grid points.

    ``drift`` may be an array broadcasting against ``size`` (e.g. a random
    sign per path).
    """
    return Path(grid, _walk(grid, drift, as_generator(stream), size))


def sample_bridge(grid: TimeGrid, endpoint, stream: Stream, size=None) -> Path:
    """Brownian bridge from 0 to ``endpoint`` over the grid horizon."""
    w = _walk(grid, 0.0, as_generator(stream), size)
    frac = grid.times / grid.horizon
    b = w - frac * w[..., -1:] + np.asarray(endpoint, dtype=float)[..., None] * frac
    b[..., -1] = endpoint
    b[..., 0] = 0.0
    return Path(grid, b)


def sample_gaussian(variance, stream: Stream, size=None):
    """Centered Gaussian with the given variance (elementwise for arrays)."""
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < 0):
        raise ValueError("variance must be nonnegative")
    rng = as_generator(stream)
    shape = variance.shape if size is None else size
    draw = np.sqrt(variance) * rng.standard_normal(shape)
    return float(draw) if np.ndim(draw) == 0 else draw


def sample_gamma(shape: float, stream: Stream, size=None):
    if not shape > 0:
        raise ValueError("gamma shape must be positive")
    return as_generator(stream).standard_gamma(shape, size)


def sample_rademacher(stream: Stream, size=None):
    rng = as_generator(stream)
    return 2.0 * rng.integers(0, 2, size=size) - 1.0


def sample_first_passage(level, drift, stream: Stream, size=None):
    """First hitting time of ``level > 0`` by a Brownian motion with drift ``>= 0``.

    Positive drift gives the inverse Gaussian law with mean ``level/drift`` and
    shape ``level**2``, drawn by the Michael-Schucany-Haas transformation.
    Zero drift gives the one-sided stable law ``level**2 / g**2``. Arrays of
    levels and drifts are sampled elementwise.
    """
    level = np.asarray(level, dtype=float)
    drift = np.asarray(drift, dtype=float)
    if np.any(level <= 0):
        raise ValueError("level must be positive")
    if np.any(drift < 0):
        raise ValueError("drift must be nonnegative")
    rng = as_generator(stream)
    shape = np.broadcast_shapes(level.shape, drift.shape) if size is None else size
    level = np.broadcast_to(level, shape)
    drift = np.broadcast_to(drift, shape)
    g = rng.standard_normal(shape)
    u = rng.random(shape)

    out = np.empty(shape)
    still = drift == 0
    out[still] = (level[still] / g[still]) ** 2

    m = drift > 0
    mean = level[m] / drift[m]
    lam = level[m] ** 2
    y = g[m] ** 2
    # larger root is cancellation-free; the smaller one is mean**2 / larger
    big = mean + mean * mean * y / (2 * lam) + mean / (2 * lam) * np.sqrt(4 * mean * lam * y + (mean * y) ** 2)
    small = mean * mean / big
    out[m] = np.where(u[m] <= mean / (mean + small), small, big)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Macdonald function and the conditional endpoint law

K0_RANGE = (1e-3, 100.0)


def _k0_scaled(u: float) -> float:
    """``exp(u) K0(u)`` as ``int_0^inf exp(-u (cosh s - 1)) ds``."""
    upper = np.arccosh(1.0 + 745.0 / u)
    # integrand is flat up to s ~ log(2/u) and then falls off double-exponentially
    knee = min(max(np.log(2.0 / u), 1.0), upper)
    f = lambda s: np.exp(-u * (np.cosh(s) - 1.0))
    a, _ = integrate.quad(f, 0.0, knee, epsabs=0.0, epsrel=1e-13, limit=200)
    b, _ = integrate.quad(f, knee, upper, epsabs=0.0, epsrel=1e-13, limit=200)
    return a + b


def macdonald_k0(u):
    """Modified Bessel function of the second kind, order 0, for ``u > 0``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0):
        raise ValueError("K0 requires u > 0")
    vals = np.array([np.exp(-x) * _k0_scaled(x) for x in u_arr.ravel()]).reshape(u_arr.shape)
    return float(vals) if vals.ndim == 0 else vals


def clamp_bessel_arg(u):
    """Clamp to the range where :func:`macdonald_k0` is validated; report whether clamping occurred."""
    lo, hi = K0_RANGE
    clamped = np.clip(u, lo, hi)
    return clamped, bool(np.any(clamped != u))


REJECTION_MIN_U = 0.1


@lru_cache(maxsize=64)
def _endpoint_table(u: float, points: int = 1 << 15):
    xmax = np.arccosh(1.0 + 40.0 / u)
    x = np.linspace(0.0, xmax, points)
    dens = np.exp(-u * (np.cosh(x) - 1.0))
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(x))])
    cdf /= cdf[-1]
    return x, cdf


def sample_conditional_endpoint(u: float, stream: Stream, size=None, return_acceptance: bool = False):
    """Draw from the density ``exp(-u cosh x) / (2 K0(u))`` on the real line.

    For ``u >= 0.1`` this is exact rejection from ``N(0, 1/u)`` with acceptance
    probability ``exp(-u (cosh x - 1 - x**2/2))``. Below that the Gaussian
    envelope is too loose and a tabulated inverse CDF on a clipped range
    (mass outside ``u cosh x > u + 40`` dropped) is used instead.
    """
    if not u > 0:
        raise ValueError("u must be positive")
    rng = as_generator(stream)
    n = 1 if size is None else int(np.prod(size))
    if u < REJECTION_MIN_U:
        x, cdf = _endpoint_table(float(u))
        mag = np.interp(rng.random(n), cdf, x)
        out = np.where(rng.random(n) < 0.5, -mag, mag)
        accept_rate = 1.0
    else:
        out = np.empty(n)
        filled = proposed = 0
        sd = 1.0 / np.sqrt(u)
        while filled < n:
            want = int((n - filled) * 1.3) + 64
            cand = rng.standard_normal(want) * sd
            keep = rng.random(want) < np.exp(-u * (np.cosh(cand) - 1.0 - 0.5 * cand * cand))
            acc = cand[keep][: n - filled]
            proposed += want
            out[filled:filled + acc.size] = acc
            filled += acc.size
        accept_rate = n / proposed
    out = out[0] if size is None else out.reshape(size)
    return (out, accept_rate) if return_acceptance else out


# ---------------------------------------------------------------------------
# drifted paths with an A_inf proxy


@dataclass
class TailDiagnostics:
    horizon: float
    max_last_tenth_share: float
    fraction_extended: float
    extensions: int
    converged: bool
    tolerance: float = field(default=1e-6)

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "max_last_tenth_share": self.max_last_tenth_share,
            "fraction_extended": self.fraction_extended,
            "extensions": self.extensions,
            "converged": self.converged,
            "tolerance": self.tolerance,
        }


def _last_tenth_share(a: np.ndarray, steps: int) -> np.ndarray:
    k = int(np.floor(0.9 * steps))
    return (a[..., -1] - a[..., k]) / a[..., -1]


def sample_transient_bm(grid: TimeGrid, drift: float, stream: Stream, size: int,
                        tail_tol: float = 1e-6, max_extensions: int = 4):
    """Paths of ``B_s + drift*s`` (``drift < 0``) with a per-path ``A_inf`` proxy.

    ``A`` is accumulated on ``[0, H]``. A path whose final tenth of the horizon
    still contributes more than ``tail_tol`` of ``A(H)`` is continued with fresh
    increments over further windows of length ``H`` (up to ``max_extensions``),
    and the continuation is added to its proxy. Returns
    ``(path, a_inf, TailDiagnostics)``.
    """
    if not drift < 0:
        raise ValueError("A_inf is finite only for negative drift")
    rng = as_generator(stream)
    path = sample_bm(grid, drift, rng, size)
    a = cumulative_exp(path).values
    a_inf = a[..., -1].copy()
    share = _last_tenth_share(a, grid.steps)
    max_share = float(share.max())
    flagged = np.flatnonzero(share > tail_tol)
    extended = flagged.size
    level = path.values[flagged, -1]
    rounds = 0
    while flagged.size and rounds < max_extensions:
        rounds += 1
        seg = _walk(grid, drift, rng, flagged.size) + level[:, None]
        seg_a = cumulative_exp(Path(grid, seg)).values
        a_inf[flagged] += seg_a[:, -1]
        share = (seg_a[:, -1] - seg_a[:, int(np.floor(0.9 * grid.steps))]) / a_inf[flagged]
        keep = share > tail_tol
        flagged, level = flagged[keep], seg[keep, -1]
    diag = TailDiagnostics(
        horizon=grid.horizon,
        max_last_tenth_share=max_share,
        fraction_extended=extended / size,
        extensions=rounds,
        converged=flagged.size == 0,
        tolerance=tail_tol,
    )
    return path, a_inf, diag
