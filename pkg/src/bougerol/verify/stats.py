"""Two-ensemble comparison statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

MIN_KS_SIZE = 100
MIN_PERMUTATIONS = 200
ENERGY_CAP = 4000
_PERM_CHUNK = 200


class ComparisonError(ValueError):
    pass


def ks_two_sample(xs, ys) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    if xs.size < MIN_KS_SIZE or ys.size < MIN_KS_SIZE:
        raise ComparisonError(f"KS needs at least {MIN_KS_SIZE} points per sample, got {xs.size} and {ys.size}")
    res = stats.ks_2samp(xs, ys, method="asymp")
    return float(res.statistic), float(res.pvalue)


def _as_points(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _block_statistics(xs, ys, permutations, rng):
    """Observed energy statistic of one block and its label-permutation replicates."""
    n, m = xs.shape[0], ys.shape[0]
    pooled = np.vstack([xs, ys])
    d = cdist(pooled, pooled)
    total = d.sum()
    rows = d.sum(axis=1)

    def stat_from(s_xx, s_xr):
        # s_xx = l'Dl, s_xr = l'D1 for a label vector l marking the x-sample
        s_xy = s_xr - s_xx
        s_yy = total - 2 * s_xr + s_xx
        e = 2 * s_xy / (n * m) - s_xx / n ** 2 - s_yy / m ** 2
        return e * n * m / (n + m)

    lab = np.zeros(n + m)
    lab[:n] = 1.0
    observed = stat_from(lab @ d @ lab, lab @ rows)
    perms = np.empty(permutations)
    done = 0
    while done < permutations:
        k = min(_PERM_CHUNK, permutations - done)
        labels = np.zeros((n + m, k))
        for j in range(k):
            labels[rng.permutation(n + m)[:n], j] = 1.0
        s_xx = np.einsum("ij,ij->j", labels, d @ labels)
        perms[done:done + k] = stat_from(s_xx, rows @ labels)
        done += k
    return float(observed), perms


def energy_distance(xs, ys, permutations: int = 1999, rng=None, cap: int = ENERGY_CAP) -> tuple[float, float]:
    """Energy statistic ``n m/(n+m) (2 E|X-Y| - E|X-X'| - E|Y-Y'|)`` with a permutation p-value.

    Ensembles larger than ``cap`` are shuffled and split into the same number
    of disjoint blocks of at most ``cap`` points each; the statistic is the
    mean of the block statistics, and each permutation relabels every block
    independently. With one block this is the plain two-sample test.
    The p-value is ``(1 + #{perm >= observed}) / (permutations + 1)``.
    """
    xs, ys = _as_points(xs), _as_points(ys)
    if xs.shape[1] != ys.shape[1]:
        raise ComparisonError(f"dimension mismatch: {xs.shape[1]} vs {ys.shape[1]}")
    if permutations < MIN_PERMUTATIONS:
        raise ComparisonError(f"need at least {MIN_PERMUTATIONS} permutations")
    rng = np.random.default_rng(rng)
    blocks = max(-(-xs.shape[0] // cap), -(-ys.shape[0] // cap))
    if blocks > 1:
        xs = xs[rng.permutation(xs.shape[0])]
        ys = ys[rng.permutation(ys.shape[0])]
    observed, perms = 0.0, np.zeros(permutations)
    for bx, by in zip(np.array_split(xs, blocks), np.array_split(ys, blocks)):
        o, p = _block_statistics(bx, by, permutations, rng)
        observed += o / blocks
        perms += p / blocks
    # relative slack so that exact ties (identical ensembles) count as exceedances
    exceed = int(np.sum(perms >= observed - 1e-12 * abs(observed) - 1e-15))
    return float(observed), (1 + exceed) / (permutations + 1)


@dataclass
class WeightedMeanEntry:
    estimate: float
    se: float
    self_normalized: float
    self_normalized_se: float
    target: float
    target_se: float
    difference: float
    combined_se: float
    z_score: float
    p_value: float
    n: int
    n_eff: float
    low_power: bool
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def weighted_moments(samples, weights=None) -> tuple[float, float, float, float, float]:
    """Unnormalized mean of ``w*f`` and self-normalized mean, both with standard errors, plus N_eff."""
    f = np.asarray(samples, dtype=float).ravel()
    n = f.size
    if weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(weights, dtype=float).ravel()
        if w.size != n:
            raise ComparisonError("samples and weights must have equal length")
        if np.any(~(w > 0)):
            raise ComparisonError("weights must be positive")
    wf = w * f
    mean = wf.mean()
    se = wf.std(ddof=1) / math.sqrt(n) if n > 1 else math.inf
    sn = wf.sum() / w.sum()
    # delta method for the ratio estimator
    resid = w * (f - sn)
    sn_se = math.sqrt(np.sum(resid ** 2)) / w.sum()
    n_eff = w.sum() ** 2 / np.sum(w * w)
    return float(mean), float(se), float(sn), float(sn_se), float(n_eff)


def weighted_mean_compare(samples, weights=None, target=None, target_weights=None,
                          low_power_fraction: float = 0.01, n_se: float = 3.0) -> WeightedMeanEntry:
    """Compare the unnormalized weighted mean ``E[w f]`` with a target.

    ``target`` is either a number (an analytic value) or a second sample; a
    sample target may carry its own weights and contributes its standard
    error. The verdict is ``|difference| <= n_se * combined SE``; it is
    demoted to low power when ``N_eff < low_power_fraction * N`` for either
    weighted ensemble.
    """
    mean, se, sn, sn_se, n_eff = weighted_moments(samples, weights)
    n = np.size(samples)
    low = n_eff < low_power_fraction * n
    if target is None:
        raise ComparisonError("a target value or sample is required")
    if np.ndim(target) == 0:
        t_mean, t_se = float(target), 0.0
    else:
        t_mean, t_se, _, _, t_eff = weighted_moments(target, target_weights)
        low = low or t_eff < low_power_fraction * np.size(target)
    diff = mean - t_mean
    comb = math.hypot(se, t_se)
    z = diff / comb if comb > 0 else (0.0 if diff == 0 else math.inf)
    p = float(2 * stats.norm.sf(abs(z)))
    return WeightedMeanEntry(
        estimate=mean, se=se, self_normalized=sn, self_normalized_se=sn_se,
        target=t_mean, target_se=t_se, difference=diff, combined_se=comb,
        z_score=z, p_value=p, n=int(n), n_eff=n_eff, low_power=bool(low),
        passed=bool(abs(diff) <= n_se * comb),
    )


def holm(p_values, level: float) -> list[bool]:
    """Holm step-down: returns ``True`` where the hypothesis is NOT rejected."""
    p = np.asarray(p_values, dtype=float)
    order = np.argsort(p, kind="stable")
    keep = np.ones(p.size, dtype=bool)
    m = p.size
    for rank, idx in enumerate(order):
        if p[idx] < level / (m - rank):
            keep[idx] = False
        else:
            break
    return keep.tolist()
