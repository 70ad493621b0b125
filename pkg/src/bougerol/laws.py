"""Closed-form densities and moments used as deterministic oracles."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .stochastic import macdonald_k0


class QuadratureError(ArithmeticError):
    def __init__(self, what: str, nodes: int, residual: float):
        super().__init__(f"{what}: quadrature did not converge with {nodes} nodes (residual {residual:.3g})")
        self.nodes = nodes
        self.residual = residual


@dataclass
class DensityCurve:
    abscissae: np.ndarray
    values: np.ndarray
    law: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.abscissae = np.asarray(self.abscissae, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.abscissae.shape != self.values.shape:
            raise ValueError("abscissae and values must have the same length")
        if np.any(np.diff(self.abscissae) <= 0):
            raise ValueError("abscissae must be increasing")
        if np.any(self.values < 0):
            raise ValueError("density values must be nonnegative")

    def mass(self) -> float:
        return float(integrate.trapezoid(self.values, self.abscissae))

    def params_text(self) -> str:
        return ";".join(f"{k}={v:g}" for k, v in self.params.items())

    def to_csv(self, header_comment: str | None = None) -> str:
        buf = io.StringIO()
        if header_comment:
            for line in header_comment.splitlines():
                buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "density", "law", "params"])
        p = self.params_text()
        for x, d in zip(self.abscissae, self.values):
            w.writerow([repr(float(x)), repr(float(d)), self.law, p])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# density of A_t


A_T_SUPPORTED = (0.25, 4.0)
_GL_NODES = 32
_GL = np.polynomial.legendre.leggauss(_GL_NODES)
_GL2 = np.polynomial.legendre.leggauss(2 * _GL_NODES)


def _panel_rule(edges: np.ndarray, rule) -> tuple[np.ndarray, np.ndarray]:
    x0, w0 = rule
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + hi) / 2 + half * x0
    weights = half * w0
    return nodes.ravel(), weights.ravel()


def _a_t_cutoff(v: np.ndarray, t: float) -> float:
    # beyond L the Gaussian factor alone is below exp(-60) of its peak,
    # or the cosh^2 factor has dropped by exp(-60) relative to x = 0
    gauss = t + math.sqrt(t * t + 120.0 * t)
    vmax = float(np.max(v))
    cosh_cut = math.acosh(math.sqrt(1.0 + 2.0 * vmax * 60.0 + 2.0 * vmax * gauss))
    return min(gauss, cosh_cut) + 1.0


def _a_t_integral(v: np.ndarray, t: float, rule, edges) -> np.ndarray:
    x, w = _panel_rule(edges, rule)
    gauss = np.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t)
    ch = np.cosh(x)
    osc = np.cos(math.pi * x / (2 * t))
    base = w * gauss * ch * osc
    expo = np.exp(-np.outer(1.0 / (2 * v), ch * ch))
    # even integrand: twice the half line
    return 2.0 * expo @ base


def a_t_density(v, t: float):
    """Density of ``A_t = int_0^t exp(2 B_s) ds`` at ``v > 0``.

    Evaluates ``exp(pi^2/8t) E[cosh B_t (2 pi v^3)^{-1/2} exp(-cosh^2 B_t / 2v)
    cos(pi B_t / 2t)]`` by composite Gauss-Legendre on panels of width
    ``min(t, 1/2)`` (at most a quarter period of the cosine factor). The
    result is checked against the same sum with doubled nodes per panel.
    Accurate for ``t`` in ``[0.25, 4]``; outside it the cancellation in the
    oscillatory integral grows like ``exp(pi^2/8t)``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(v_arr <= 0):
        raise ValueError("v must be positive")
    width = min(t, 0.5)
    cutoff = _a_t_cutoff(v_arr, t)
    edges = np.arange(0.0, cutoff + width, width)
    coarse = _a_t_integral(v_arr, t, _GL, edges)
    fine = _a_t_integral(v_arr, t, _GL2, edges)
    scale = math.exp(math.pi ** 2 / (8 * t)) / np.sqrt(2 * math.pi * v_arr ** 3)
    residual = np.abs(fine - coarse) * scale
    # cancellation floor: the integrand magnitude times machine precision
    floor = 1e-13 * scale * math.exp(t / 2) + 1e-300
    bad = residual > np.maximum(floor, 1e-9 * np.abs(fine * scale))
    if np.any(bad):
        raise QuadratureError("a_t_density", 2 * _GL_NODES * (edges.size - 1), float(residual[bad].max()))
    dens = np.maximum(fine * scale, 0.0)
    return float(dens[0]) if np.ndim(v) == 0 else dens


def a_t_mean(t: float) -> float:
    return math.expm1(2 * t) / 2


# ---------------------------------------------------------------------------
# first passage, conditional endpoint, moments, Dufresne


def first_passage_density(u, level: float, drift: float = 0.0):
    """Density of the first time ``B_s + drift*s`` hits ``level``."""
    if not level > 0:
        raise ValueError("level must be positive")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0):
        raise ValueError("u must be positive")
    out = level / np.sqrt(2 * np.pi * u ** 3) * np.exp(-((level - drift * u) ** 2) / (2 * u))
    return float(out) if out.ndim == 0 else out


def conditional_endpoint_density(x, u: float):
    """Density ``exp(-u cosh x) / (2 K0(u))``."""
    if not u > 0:
        raise ValueError("u must be positive")
    x = np.asarray(x, dtype=float)
    # exp(-u (cosh x - 1)) / (2 exp(u) K0(u)) avoids underflow of both factors
    k0_scaled = macdonald_k0(u) * math.exp(u)
    with np.errstate(over="ignore"):  # cosh -> inf gives density 0, as it should
        out = np.exp(-u * (np.cosh(x) - 1.0)) / (2.0 * k0_scaled)
    return float(out) if out.ndim == 0 else out


_GH = np.polynomial.hermite.hermgauss(200)


def a_t_moment(nu: float, t: float) -> float:
    """``E[A_t^nu]`` through ``sqrt(pi) / (2^nu Gamma(nu + 1/2)) E|sinh B_t|^{2 nu}``.

    Gauss-Hermite when ``2 nu`` is an even integer (smooth integrand);
    otherwise adaptive quadrature on the half line, since ``|sinh x|^{2 nu}``
    is not smooth at the origin.
    """
    if not nu > -0.5:
        raise ValueError("nu must exceed -1/2")
    if not t > 0:
        raise ValueError("t must be positive")
    if nu == 0:
        return 1.0
    const = math.sqrt(math.pi) / (2.0 ** nu * special.gamma(nu + 0.5))
    if float(nu).is_integer() and nu > 0:
        x, w = _GH
        vals = np.sinh(math.sqrt(2 * t) * x) ** (2 * int(nu))
        return const * float(w @ vals) / math.sqrt(math.pi)

    def f(x):
        return 2.0 * math.exp(-x * x / (2 * t)) / math.sqrt(2 * math.pi * t) * math.sinh(x) ** (2 * nu)

    upper = 2 * nu * t + math.sqrt(t) * 40 + 5
    val, err = integrate.quad(f, 0.0, upper, epsabs=0.0, epsrel=1e-12, limit=400)
    if err > 1e-8 * abs(val):
        raise QuadratureError("a_t_moment", 400, err)
    return const * val


def dufresne_laplace(alpha: float, mu: float) -> float:
    """``E[exp(-alpha / (2 A_inf))]`` for drift ``-mu``, i.e. ``(1 + alpha)^(-mu)``."""
    if not alpha > -1:
        raise ValueError("alpha must exceed -1")
    if not mu > 0:
        raise ValueError("mu must be positive")
    return (1.0 + alpha) ** (-mu)


# ---------------------------------------------------------------------------
# tabulation

LAWS = ("a_t", "first_passage", "conditional_endpoint")


def tabulate(law: str, x, **params) -> DensityCurve:
    x = np.asarray(x, dtype=float)
    if law == "a_t":
        t = params.get("t", 1.0)
        return DensityCurve(x, a_t_density(x, t), law, {"t": t})
    if law == "first_passage":
        level, mu = params.get("level", 1.0), params.get("mu", 0.0)
        return DensityCurve(x, first_passage_density(x, level, mu), law, {"level": level, "mu": mu})
    if law == "conditional_endpoint":
        u = params.get("u", 1.0)
        return DensityCurve(x, conditional_endpoint_density(x, u), law, {"u": u})
    raise ValueError(f"unsupported law {law!r}; expected one of {', '.join(LAWS)}")


def tail_mass(law: str, lo: float, hi: float, **params) -> float:
    """Probability outside ``[lo, hi]``, by adaptive quadrature of the density."""
    if law == "a_t":
        t = params.get("t", 1.0)
        f = lambda v: float(a_t_density(v, t))
        left = integrate.quad(f, 0.0, lo, limit=200)[0] if lo > 0 else 0.0
        # integrate the right tail in log v
        right = integrate.quad(lambda y: f(math.exp(y)) * math.exp(y), math.log(hi), math.log(hi) + 40, limit=400)[0]
        return left + right
    if law == "first_passage":
        level, mu = params.get("level", 1.0), params.get("mu", 0.0)
        f = lambda u: float(first_passage_density(u, level, mu))
        left = integrate.quad(f, 0.0, lo)[0] if lo > 0 else 0.0
        if mu > 0:
            right = integrate.quad(f, hi, np.inf)[0]
        else:
            # P(tau > hi) for zero drift
            right = math.erf(level / math.sqrt(2 * hi))
        return left + right
    if law == "conditional_endpoint":
        u = params.get("u", 1.0)
        f = lambda x: float(conditional_endpoint_density(x, u))
        return integrate.quad(f, -np.inf, lo)[0] + integrate.quad(f, hi, np.inf)[0]
    raise ValueError(f"unsupported law {law!r}")
