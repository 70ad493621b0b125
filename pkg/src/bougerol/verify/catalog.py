"""The scenario catalog: each identity in law as a two-ensemble experiment.

Every ensemble generator is a module-level function ``gen_*(rng, size, ...)``
returning a dict of per-sample arrays. Process-level identities are compared
through finite-dimensional projections (see :func:`finite_projection` and
:func:`horizon_projection`), which is a necessary condition for equality of
the path laws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..laws import a_t_mean, dufresne_laplace
from ..paths import (
    Path,
    TimeGrid,
    cumulative_exp,
    transform_talpha,
    transform_tstar,
    transform_tz,
    z_profile,
)
from ..stochastic import (
    default_horizon,
    sample_bm,
    sample_bridge,
    sample_first_passage,
    sample_gamma,
    sample_gaussian,
    sample_rademacher,
    sample_transient_bm,
)

# ---------------------------------------------------------------------------
# projections


def dyadic_indices(grid: TimeGrid) -> np.ndarray:
    """Indices of the eight interior dyadic times ``t (2k-1)/16``, ``k = 1..8``."""
    if grid.steps < 16:
        raise ValueError("projections need at least 16 grid steps")
    return (np.arange(1, 17, 2) * grid.steps) // 16


def finite_projection(path: Path, a_t=None) -> np.ndarray:
    """Path at the eight interior dyadic times, the endpoint, and ``log A_t``: 10 columns."""
    if a_t is None:
        a_t = cumulative_exp(path).final
    v = path.values
    return np.column_stack([v[:, dyadic_indices(path.grid)], v[:, -1], np.log(a_t)])


def horizon_indices(grid: TimeGrid) -> np.ndarray:
    """Indices of ``H 2^-j`` for ``j = 8..0``."""
    if grid.steps < 256:
        raise ValueError("horizon projections need at least 256 grid steps")
    return grid.steps // (2 ** np.arange(8, -1, -1))


def horizon_projection(path: Path, log_a) -> np.ndarray:
    """Path at ``H/256, H/128, ..., H`` plus one log-functional column: 10 columns."""
    return np.column_stack([path.values[:, horizon_indices(path.grid)], log_a])


def log_z_profile(path: Path) -> np.ndarray:
    """``log Z`` at the eight interior dyadic times and the endpoint."""
    z = z_profile(path)
    idx = np.append(dyadic_indices(path.grid), path.grid.steps) - 1
    return np.log(z[:, idx])


def girsanov_weight(b_t, z_t, z) -> np.ndarray:
    """``exp{(cosh B_t - cosh(z + B_t)) / Z_t}``."""
    return np.exp((np.cosh(b_t) - np.cosh(z + b_t)) / z_t)


# ---------------------------------------------------------------------------
# functional panels


def finite_panel(path: Path) -> dict:
    v = path.values
    t = path.grid.horizon
    return {
        "one": np.ones(v.shape[0]),
        "endpoint": v[:, -1],
        "running_max": v.max(axis=1),
        "a_t": cumulative_exp(path).final,
        "cylinder": np.sin(path.at(t / 2)) * np.cos(path.at(t)),
    }


def horizon_panel(path: Path) -> dict:
    v = path.values
    n = path.grid.steps
    return {
        "one": np.ones(v.shape[0]),
        "value_h8": v[:, n // 8],
        "running_max": v.max(axis=1),
        "cylinder": np.sin(v[:, n // 16]) * np.cos(v[:, n // 8]),
    }


def _prefixed(prefix: str, panel: dict) -> dict:
    return {f"{prefix}:{k}": v for k, v in panel.items()}


# ---------------------------------------------------------------------------
# generators


def _bm_beta(rng, size, grid, drift=0.0):
    b = sample_bm(grid, drift, rng, size)
    a_t = cumulative_exp(b).final
    beta = sample_gaussian(a_t, rng)
    return b, a_t, beta


def gen_beta_of_a(rng, size, grid, drift=0.0):
    b, a_t, beta = _bm_beta(rng, size, grid, drift)
    return {"beta": beta, "b_t": b.endpoint, "a_t": a_t}


def gen_endpoint(rng, size, t, drift=0.0):
    """``B_t`` (with constant or Rademacher drift) without a path."""
    if drift == "rademacher":
        drift = sample_rademacher(rng, size)
    return {"b_t": np.sqrt(t) * rng.standard_normal(size) + np.asarray(drift) * t}


def gen_tmain1(rng, size, grid, x):
    """One path ``B`` and one ``beta(A_t)``; the transform argument is built from that same path."""
    b, a_t, beta = _bm_beta(rng, size, grid)
    b_t = b.endpoint
    z = x + b_t - np.arcsinh(np.exp(b_t) * np.sinh(x) + beta)
    out = transform_tz(b, z)
    return {"proj": finite_projection(out), "z": z}


def gen_bm_projection(rng, size, grid, drift=0.0):
    b = sample_bm(grid, drift, rng, size)
    return {"proj": finite_projection(b)}


def _hitting_time_t(rng, b: Path, a_t, x):
    """``tau_{cosh(x + B_t)}`` of a Brownian motion with drift ``cosh x / Z_t``."""
    b_t = b.endpoint
    z_t = np.exp(-b_t) * a_t
    return sample_first_passage(np.cosh(x + b_t), np.cosh(x) / z_t, rng)


def gen_id1_zeta(rng, size, grid, x):
    b, a_t, beta = _bm_beta(rng, size, grid)
    b_t = b.endpoint
    zeta = np.arcsinh(np.exp(b_t) * np.sinh(x) + beta) - (x + b_t)
    return {"joint": np.column_stack([finite_projection(b, a_t), zeta])}


def gen_id1_transformed(rng, size, grid, x):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    shift = np.log(a_t / _hitting_time_t(rng, b, a_t, x))
    return {"joint": np.column_stack([finite_projection(transform_tz(b, shift)), shift])}


def gen_id2_negzeta(rng, size, grid, x):
    b, a_t, beta = _bm_beta(rng, size, grid)
    b_t = b.endpoint
    zeta = np.arcsinh(np.exp(b_t) * np.sinh(x) + beta) - (x + b_t)
    return {"joint": np.column_stack([finite_projection(transform_tz(b, -zeta)), np.log(a_t)])}


def gen_id2_plain(rng, size, grid, x):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    tau = _hitting_time_t(rng, b, a_t, x)
    return {"joint": np.column_stack([finite_projection(b, a_t), np.log(tau)])}


def gen_tmain2_plain(rng, size, grid, zs):
    b = sample_bm(grid, 0.0, rng, size)
    out = _prefixed("F(B)", finite_panel(b))
    for z in zs:
        out.update(_prefixed(f"F(T_z B)|z={z:g}", finite_panel(transform_tz(b, z))))
    return out


def gen_tmain2_weighted(rng, size, grid, zs):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    b_t = b.endpoint
    z_t = np.exp(-b_t) * a_t
    out = _prefixed("F(B)", finite_panel(b))
    for z in zs:
        out[f"w|z={z:g}"] = girsanov_weight(b_t, z_t, z)
        out.update(_prefixed(f"F(T_-z B)|z={z:g}", finite_panel(transform_tz(b, -z))))
    return out


def _tail_summary(diag, size) -> dict:
    # per-batch scalars; the runner stacks them into one array per key
    return {"tail:max_last_tenth_share": diag.max_last_tenth_share, "tail:extensions": diag.extensions,
            "tail:converged": diag.converged, "tail:n_extended": diag.fraction_extended * size}


def gen_cor13_plain(rng, size, hgrid, mu, z):
    b, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    out = _prefixed("F(B)", horizon_panel(b))
    out.update(_prefixed("F(T*_z B)", horizon_panel(transform_tstar(b, z, a_inf))))
    out.update(_tail_summary(diag, size))
    return out


def gen_cor13_weighted(rng, size, hgrid, mu, z):
    b, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    out = _prefixed("F(B)", horizon_panel(b))
    out.update(_prefixed("F(T*_-z B)", horizon_panel(transform_tstar(b, -z, a_inf))))
    out["exp_term"] = np.exp((1 - np.exp(-z)) / (2 * a_inf))
    out["w"] = np.exp(-mu * z) * out["exp_term"]
    out.update(_tail_summary(diag, size))
    return out


def gen_a_inf(rng, size, hgrid, mu):
    _, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    out = {"a_inf": a_inf}
    out.update(_tail_summary(diag, size))
    return out


def gen_inverse_gamma(rng, size, mu):
    return {"value": 1.0 / (2.0 * sample_gamma(mu, rng, size))}


def gen_invariance_lhs(rng, size, hgrid, mu):
    b, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    gamma = sample_gamma(mu, rng, size)
    z = np.log(2 * gamma * a_inf)
    out = transform_tstar(b, z, a_inf)
    # A_inf of the transformed path is exp(-z) A_inf = 1/(2 gamma)
    out_d = {"proj": horizon_projection(out, np.log(np.exp(-z) * a_inf))}
    out_d.update(_tail_summary(diag, size))
    return out_d


def gen_invariance_rhs(rng, size, hgrid, mu):
    b, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    out = {"proj": horizon_projection(b, np.log(a_inf))}
    out.update(_tail_summary(diag, size))
    return out


def gen_myopp_lhs(rng, size, grid, mu):
    b = sample_bm(grid, mu, rng, size)
    alpha = 2.0 * sample_gamma(mu, rng, size)
    return {"proj": finite_projection(transform_talpha(b, alpha))}


def gen_rec1_lhs(rng, size, hgrid, mu, z):
    b, a_inf, diag = sample_transient_bm(hgrid, -mu, rng, size)
    out = transform_tstar(b, z, a_inf)
    d = {"proj": horizon_projection(out, np.log(cumulative_exp(out).final))}
    d.update(_tail_summary(diag, size))
    return d


def gen_rec1_rhs(rng, size, hgrid, mu, z):
    b = sample_bm(hgrid, mu, rng, size)
    alpha = 2.0 * np.exp(z) * sample_gamma(mu, rng, size)
    out = transform_talpha(b, alpha)
    return {"proj": horizon_projection(out, np.log(cumulative_exp(out).final))}


def gen_tmain3_lhs(rng, size, grid):
    b, a_t, beta = _bm_beta(rng, size, grid, drift=1.0)
    b_t = b.endpoint
    z = b_t - np.arcsinh(beta)
    out = transform_tz(b, z)
    last = np.log(np.exp(-2 * b_t) * a_t)
    return {"joint": np.column_stack([finite_projection(out), last]), "beta": beta}


def gen_tmain3_rhs(rng, size, grid):
    eps = sample_rademacher(rng, size)
    b = sample_bm(grid, eps, rng, size)
    a_t = cumulative_exp(b).final
    b_t = b.endpoint
    z_t = np.exp(-b_t) * a_t
    tau = sample_first_passage(1.0, np.cosh(b_t) / z_t, rng)
    return {"joint": np.column_stack([finite_projection(b, a_t), np.log(tau)]), "sinh_b_t": np.sinh(b_t)}


def gen_log_z(rng, size, grid, drift):
    b = sample_bm(grid, drift, rng, size)
    return {"log_z": log_z_profile(b)}


def gen_lext_lhs(rng, size, grid, x):
    b, a_t, beta = _bm_beta(rng, size, grid)
    first = np.arcsinh(np.exp(b.endpoint) * np.sinh(x) + beta)
    return {"joint": np.column_stack([first, np.log(a_t), log_z_profile(b)])}


def gen_lext_rhs(rng, size, grid, x):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    tau = _hitting_time_t(rng, b, a_t, x)
    return {"joint": np.column_stack([x + b.endpoint, np.log(tau), log_z_profile(b)])}


PINNED_PANEL = {
    "one": (lambda p: np.ones(p.values.shape[0]), lambda a: np.ones_like(a)),
    "mid_decay": (lambda p: 1.0 / (1.0 + p.at(p.grid.horizon / 2) ** 2), lambda a: np.exp(-a)),
    "max_decay": (lambda p: np.exp(-p.values.max(axis=1)), lambda a: 1.0 / (1.0 + a)),
}


def gen_pinned_lhs(rng, size, grid, x, z):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    b_t = b.endpoint
    out = transform_tz(b, b_t - z)
    psi = np.cosh(x + z) / np.sqrt(2 * np.pi * a_t) * np.exp(
        -((np.sinh(x + z) - np.exp(b_t) * np.sinh(x)) ** 2) / (2 * a_t))
    return {name: psi * F(out) * f(a_t) for name, (F, f) in PINNED_PANEL.items()}


def gen_pinned_rhs(rng, size, grid, x, z):
    t = grid.horizon
    bridge = sample_bridge(grid, z, rng, size)
    z_t = np.exp(-z) * cumulative_exp(bridge).final
    tau = sample_first_passage(np.cosh(x + z), np.cosh(x) / z_t, rng)
    dens = np.exp(-z * z / (2 * t)) / np.sqrt(2 * np.pi * t)
    return {name: dens * F(bridge) * f(tau) for name, (F, f) in PINNED_PANEL.items()}


def gen_ibp_lhs(rng, size, grid, z):
    b = sample_bm(grid, 0.0, rng, size)
    a = cumulative_exp(b).values
    t = grid.horizon
    mid = grid.index_of(t / 2)
    x1, x2 = b.values[:, mid], b.endpoint
    a_t = a[:, -1]
    # <DF, A_. / A_t>_H = sum_i d_i f * A_{t_i} / A_t
    pairing = np.cos(x1) * np.cos(x2) * a[:, mid] / a_t - np.sin(x1) * np.sin(x2)
    return {"pairing": pairing, "w": girsanov_weight(x2, np.exp(-x2) * a_t, z)}


def gen_ibp_rhs(rng, size, grid, z):
    b = sample_bm(grid, 0.0, rng, size)
    a_t = cumulative_exp(b).final
    t = grid.horizon
    x1, x2 = b.at(t / 2), b.endpoint
    f = np.sin(x1) * np.cos(x2)
    z_t = np.exp(-x2) * a_t
    return {
        "skorokhod": np.sinh(x2) / z_t * f,
        "skorokhod_z": np.sinh(z + x2) / z_t * f,
        "w": girsanov_weight(x2, z_t, z),
    }


# ---------------------------------------------------------------------------
# scenario bodies


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


MIN_TRANSIENT_MU = 0.5


def _horizon_grid(ctx, mu) -> TimeGrid:
    # below this drift the truncation bias of A_inf dominates at desk scale
    if mu < MIN_TRANSIENT_MU:
        raise ValueError(f"A_inf scenarios need mu >= {MIN_TRANSIENT_MU}, got {mu:g}")
    return TimeGrid(default_horizon(mu), ctx.settings.grid)


def _collect_tail(ctx, *ensembles, mu=None):
    n = sum(e["tail:n_extended"].sum() for e in ensembles)
    ctx.tail = {
        "horizon": default_horizon(mu),
        "tolerance": 1e-6,
        "max_last_tenth_share": float(max(e["tail:max_last_tenth_share"].max() for e in ensembles)),
        "paths_extended": int(round(n)),
        "max_extensions": int(max(e["tail:extensions"].max() for e in ensembles)),
        "converged": bool(all(e["tail:converged"].all() for e in ensembles)),
    }


def run_bougerol(ctx):
    t = ctx.params["t"]
    lhs = ctx.ensemble("beta_of_A", gen_beta_of_a, grid=ctx.grid)
    rhs = ctx.ensemble("sinh_B", gen_endpoint, t=t)
    ctx.ks("beta(A_t) vs sinh(B_t)", lhs["beta"], np.sinh(rhs["b_t"]))
    ctx.weighted("Var beta(A_t) = E A_t", lhs["beta"] ** 2, target=a_t_mean(t))


def run_bougerol_general(ctx):
    t = ctx.params["t"]
    lhs = ctx.ensemble("beta_of_A", gen_beta_of_a, grid=ctx.grid)
    rhs = ctx.ensemble("sinh_B", gen_endpoint, t=t)
    for x in _as_list(ctx.params["x"]):
        left = np.exp(lhs["b_t"]) * np.sinh(x) + lhs["beta"]
        ctx.ks(f"x={x:g}", left, np.sinh(x + rhs["b_t"]))


def run_tmain1(ctx):
    for x in _as_list(ctx.params["x"]):
        lhs = ctx.ensemble(f"transformed|x={x:g}", gen_tmain1, grid=ctx.grid, x=x)
        rhs = ctx.ensemble(f"fresh|x={x:g}", gen_bm_projection, grid=ctx.grid)
        ctx.energy(f"x={x:g}", lhs["proj"], rhs["proj"])


def run_tmain1d_id1(ctx):
    for x in _as_list(ctx.params["x"]):
        a = ctx.ensemble(f"B_zeta|x={x:g}", gen_id1_zeta, grid=ctx.grid, x=x)
        b = ctx.ensemble(f"transformed_logA/T|x={x:g}", gen_id1_transformed, grid=ctx.grid, x=x)
        ctx.energy(f"x={x:g}", a["joint"], b["joint"])


def run_tmain1d_id2(ctx):
    for x in _as_list(ctx.params["x"]):
        a = ctx.ensemble(f"T_-zeta_A|x={x:g}", gen_id2_negzeta, grid=ctx.grid, x=x)
        b = ctx.ensemble(f"B_T|x={x:g}", gen_id2_plain, grid=ctx.grid, x=x)
        ctx.energy(f"x={x:g}", a["joint"], b["joint"])


def run_tmain2_weighted(ctx):
    zs = _as_list(ctx.params["z"])
    plain = ctx.ensemble("plain", gen_tmain2_plain, grid=ctx.grid, zs=zs)
    wtd = ctx.ensemble("weighted", gen_tmain2_weighted, grid=ctx.grid, zs=zs)
    names = list(finite_panel(Path(ctx.grid, np.zeros((1, ctx.grid.steps + 1)))))
    for z in zs:
        w = wtd[f"w|z={z:g}"]
        for f in names:
            ctx.weighted(f"forward z={z:g} F={f}", plain[f"F(T_z B)|z={z:g}:{f}"],
                         target=wtd[f"F(B):{f}"], target_weights=w)
        for f in names:
            ctx.weighted(f"inverse z={z:g} F={f}", wtd[f"F(T_-z B)|z={z:g}:{f}"], w,
                         target=plain[f"F(B):{f}"])


def run_cor13_weighted(ctx):
    mu, z = ctx.params["mu"], ctx.params["z"]
    hgrid = _horizon_grid(ctx, mu)
    plain = ctx.ensemble("plain", gen_cor13_plain, hgrid=hgrid, mu=mu, z=z)
    wtd = ctx.ensemble("weighted", gen_cor13_weighted, hgrid=hgrid, mu=mu, z=z)
    _collect_tail(ctx, plain, wtd, mu=mu)
    ctx.weighted("normalization E exp((1-e^-z)/2A_inf) = e^{mu z}", wtd["exp_term"], target=np.exp(mu * z))
    w = wtd["w"]
    for f in horizon_panel(Path(hgrid, np.zeros((1, hgrid.steps + 1)))):
        ctx.weighted(f"forward F={f}", plain[f"F(T*_z B):{f}"], target=wtd[f"F(B):{f}"], target_weights=w)
        ctx.weighted(f"inverse F={f}", wtd[f"F(T*_-z B):{f}"], w, target=plain[f"F(B):{f}"])


def run_dufresne(ctx):
    mu = ctx.params["mu"]
    hgrid = _horizon_grid(ctx, mu)
    lhs = ctx.ensemble("A_inf", gen_a_inf, hgrid=hgrid, mu=mu)
    rhs = ctx.ensemble("inverse_gamma", gen_inverse_gamma, mu=mu)
    _collect_tail(ctx, lhs, mu=mu)
    a_inf = lhs["a_inf"]
    ctx.ks("A_inf vs 1/(2 gamma)", a_inf, rhs["value"])
    for alpha in _as_list(ctx.params["alpha"]):
        ctx.weighted(f"Laplace alpha={alpha:g}", np.exp(-alpha / (2 * a_inf)), target=dufresne_laplace(alpha, mu))
    if mu > 1:
        ctx.weighted("mean A_inf = 1/(2(mu-1))", a_inf, target=1.0 / (2 * (mu - 1)))


def run_invariance_111(ctx):
    mu = ctx.params["mu"]
    hgrid = _horizon_grid(ctx, mu)
    lhs = ctx.ensemble("transformed", gen_invariance_lhs, hgrid=hgrid, mu=mu)
    rhs = ctx.ensemble("fresh", gen_invariance_rhs, hgrid=hgrid, mu=mu)
    _collect_tail(ctx, lhs, rhs, mu=mu)
    ctx.energy(f"mu={mu:g}", lhs["proj"], rhs["proj"])


def run_myopp(ctx):
    mu = ctx.params["mu"]
    lhs = ctx.ensemble("T_2gamma", gen_myopp_lhs, grid=ctx.grid, mu=mu)
    rhs = ctx.ensemble("negative_drift", gen_bm_projection, grid=ctx.grid, drift=-mu)
    ctx.energy(f"mu={mu:g}", lhs["proj"], rhs["proj"])


def run_rec1(ctx):
    mu, z = ctx.params["mu"], ctx.params["z"]
    hgrid = _horizon_grid(ctx, mu)
    lhs = ctx.ensemble("T*_z", gen_rec1_lhs, hgrid=hgrid, mu=mu, z=z)
    rhs = ctx.ensemble("T_alpha", gen_rec1_rhs, hgrid=hgrid, mu=mu, z=z)
    _collect_tail(ctx, lhs, mu=mu)
    ctx.energy(f"mu={mu:g} z={z:g}", lhs["proj"], rhs["proj"])


def run_boug_variant(ctx):
    t = ctx.params["t"]
    lhs = ctx.ensemble("beta_of_A1", gen_beta_of_a, grid=ctx.grid, drift=1.0)
    rhs = ctx.ensemble("sinh_B_eps", gen_endpoint, t=t, drift="rademacher")
    ctx.ks("beta(A^(1)_t) vs sinh(B^(eps)_t)", lhs["beta"], np.sinh(rhs["b_t"]))


def run_tmain3(ctx):
    lhs = ctx.ensemble("transformed_drift1", gen_tmain3_lhs, grid=ctx.grid)
    rhs = ctx.ensemble("rademacher_drift", gen_tmain3_rhs, grid=ctx.grid)
    ctx.energy("joint", lhs["joint"], rhs["joint"])
    ctx.ks("marginal beta(A^(1)_t) vs sinh(B^(eps)_t)", lhs["beta"], rhs["sinh_b_t"])


def run_zproc_symmetry(ctx):
    mu = ctx.params["mu"]
    lhs = ctx.ensemble("Z_plus", gen_log_z, grid=ctx.grid, drift=mu)
    rhs = ctx.ensemble("Z_minus", gen_log_z, grid=ctx.grid, drift=-mu)
    ctx.energy(f"mu={mu:g}", lhs["log_z"], rhs["log_z"])


def run_lext_joint(ctx):
    for x in _as_list(ctx.params["x"]):
        lhs = ctx.ensemble(f"beta|x={x:g}", gen_lext_lhs, grid=ctx.grid, x=x)
        rhs = ctx.ensemble(f"tau|x={x:g}", gen_lext_rhs, grid=ctx.grid, x=x)
        ctx.energy(f"x={x:g}", lhs["joint"], rhs["joint"])


def run_pinned_lemma(ctx):
    x, z = ctx.params["x"], ctx.params["z"]
    lhs = ctx.ensemble("transformed", gen_pinned_lhs, grid=ctx.grid, x=x, z=z)
    rhs = ctx.ensemble("bridge", gen_pinned_rhs, grid=ctx.grid, x=x, z=z)
    for name in PINNED_PANEL:
        ctx.weighted(f"F,f={name}", lhs[name], target=rhs[name])


def run_malliavin_ibp(ctx):
    z = ctx.params["z"]
    lhs = ctx.ensemble("pairing", gen_ibp_lhs, grid=ctx.grid, z=z)
    rhs = ctx.ensemble("skorokhod", gen_ibp_rhs, grid=ctx.grid, z=z)
    ctx.weighted("z=0", lhs["pairing"], target=rhs["skorokhod"])
    ctx.weighted(f"weighted z={z:g}", lhs["pairing"], lhs["w"], target=rhs["skorokhod_z"], target_weights=rhs["w"])


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class Scenario:
    id: str
    identity: str
    body: Callable
    defaults: dict = field(default_factory=dict)
    default_samples: int = 100_000

    def resolve(self, overrides: dict | None = None) -> dict:
        params = {"t": 1.0}
        params.update(self.defaults)
        for k, v in (overrides or {}).items():
            if v is None:
                continue
            if k != "t" and k not in self.defaults:
                continue
            params[k] = [v] if isinstance(self.defaults.get(k), list) and not isinstance(v, list) else v
        if not params["t"] > 0:
            raise ValueError("t must be positive")
        if "mu" in params and not params["mu"] > 0:
            raise ValueError("mu must be positive")
        return params


ENERGY_SAMPLES = 20_000

_SCENARIOS = [
    Scenario("bougerol", "beta(A_t) =d sinh(B_t)", run_bougerol),
    Scenario("bougerol_general", "e^{B_t} sinh x + beta(A_t) =d sinh(x + B_t)", run_bougerol_general,
             {"x": [0.5, -1.0]}),
    Scenario("tmain1", "T_{x+B_t-argsh(e^{B_t} sinh x + beta(A_t))}(B) =d B on [0,t]", run_tmain1,
             {"x": [0.0, 0.7]}, ENERGY_SAMPLES),
    Scenario("tmain1d_id1", "(B, zeta) =d (T_{log(A_t/T)}(B), log(A_t/T))", run_tmain1d_id1,
             {"x": [0.5]}, ENERGY_SAMPLES),
    Scenario("tmain1d_id2", "(T_{-zeta}(B), A_t) =d (B, T)", run_tmain1d_id2, {"x": [0.5]}, ENERGY_SAMPLES),
    Scenario("tmain2_weighted", "E F(T_z B) = E[exp{(cosh B_t - cosh(z+B_t))/Z_t} F(B)]", run_tmain2_weighted,
             {"z": [-1.0, 0.5, 2.0]}),
    Scenario("cor13_weighted", "E F(T*_z B^(-mu)) = e^{-mu z} E[exp((1-e^{-z})/(2 A^(-mu)_inf)) F(B^(-mu))]",
             run_cor13_weighted, {"mu": 1.5, "z": 0.7}),
    Scenario("dufresne", "A^(-mu)_inf =d 1/(2 gamma_mu)", run_dufresne, {"mu": 2.0, "alpha": [0.5, 1.0, 3.0]}),
    Scenario("invariance_111", "T*_{log(2 gamma_mu A^(-mu)_inf)}(B^(-mu)) =d B^(-mu)", run_invariance_111,
             {"mu": 1.5}, ENERGY_SAMPLES),
    Scenario("myopp", "T_{2 gamma_mu}(B^(mu)) =d B^(-mu)", run_myopp, {"mu": 1.5}, ENERGY_SAMPLES),
    Scenario("rec1", "T*_z(B^(-mu)) =d T_{2 e^z gamma_mu}(B^(mu))", run_rec1, {"mu": 1.5, "z": 0.5},
             ENERGY_SAMPLES),
    Scenario("boug_variant", "beta(A^(1)_t) =d sinh(B^(eps)_t)", run_boug_variant),
    Scenario("tmain3", "(T_{B^(1)_t - argsh beta(A^(1)_t)}(B^(1)), e^{-2B^(1)_t} A^(1)_t) =d "
             "(B^(eps), tau_1(W^(cosh B^(eps)_t / Z^(eps)_t)))", run_tmain3, {}, ENERGY_SAMPLES),
    Scenario("zproc_symmetry", "Z^(mu) =d Z^(-mu)", run_zproc_symmetry, {"mu": 1.0}, ENERGY_SAMPLES),
    Scenario("lext_joint", "(e^{B_t} sinh x + beta(A_t), A_t, Z) =d (sinh(x+B_t), T, Z)", run_lext_joint,
             {"x": [0.5]}, ENERGY_SAMPLES),
    Scenario("pinned_lemma", "E[F(T_{B_t-z}B) f(A_t) psi] = E[F(b^z) f(tau)] phi_t(z)", run_pinned_lemma,
             {"x": 0.5, "z": 0.3}),
    Scenario("malliavin_ibp", "E<DF(B), A_. / A_t>_H = E[(sinh B_t / Z_t) F(B)]", run_malliavin_ibp,
             {"z": 0.5}),
]

CATALOG: dict[str, Scenario] = {s.id: s for s in _SCENARIOS}
