"""Scenario execution: batched ensembles, statistics, and reports."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np

from ..paths import TimeGrid
from ..stochastic import StreamKey
from . import stats

SCHEMA_VERSION = 1
DEFAULT_BATCH = 512


class UnknownScenario(KeyError):
    pass


@dataclass
class RunSettings:
    seed: int
    samples: int | None = None
    grid: int = 1024
    workers: int = 1
    level: float = 1e-3
    permutations: int = 1999
    batch_size: int = DEFAULT_BATCH
    overrides: dict = field(default_factory=dict)


@dataclass
class StatEntry:
    name: str
    method: str
    statistic: float
    p_value: float
    verdict: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _clean(asdict(self))


@dataclass
class TestReport:
    scenario: str
    identity: str
    parameters: dict
    samples: dict
    grid_steps: int
    seed: int
    statistics: list
    verdict: str
    tail: dict | None = None
    wall_ms: float = 0.0
    schema_version: int = SCHEMA_VERSION
    # raw one-dimensional ensembles kept for ECDF dumps; never serialized
    ecdf_data: dict = field(default_factory=dict, repr=False)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "scenario": self.scenario,
            "identity": self.identity,
            "parameters": _clean(self.parameters),
            "samples": dict(self.samples),
            "grid_steps": self.grid_steps,
            "seed": self.seed,
            "statistics": [s.to_dict() for s in self.statistics],
            "verdict": self.verdict,
            "tail": _clean(self.tail),
            "wall_ms": self.wall_ms,
        }

    def to_json(self, mask_wall_time: bool = False) -> str:
        d = self.to_dict()
        if mask_wall_time:
            d["wall_ms"] = None
        return json.dumps(d, indent=2)

    def entry(self, name: str) -> StatEntry:
        for s in self.statistics:
            if s.name == name:
                return s
        raise KeyError(name)


def _clean(obj):
    """Make a structure JSON-safe: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


@dataclass
class Context:
    """What a scenario body sees: parameters, grid, seeded ensembles, and a statistics sink."""

    scenario_id: str
    params: dict
    settings: RunSettings
    n: int
    grid: TimeGrid
    entries: list = field(default_factory=list)
    sizes: dict = field(default_factory=dict)
    tail: dict | None = None
    ecdf_data: dict = field(default_factory=dict)

    @property
    def key(self) -> StreamKey:
        return StreamKey(self.settings.seed, self.scenario_id)

    def ensemble(self, name: str, fn: Callable, n: int | None = None, **kwargs) -> dict:
        """Draw ``n`` samples of ``fn(rng, size, **kwargs)`` in independent keyed batches.

        ``fn`` returns a dict of arrays whose first axis is the batch; batches
        are concatenated in index order, so the result does not depend on the
        number of workers.
        """
        n = self.n if n is None else n
        bs = self.settings.batch_size
        sizes = [min(bs, n - i) for i in range(0, n, bs)]
        base = self.key.child(name)

        def one(i):
            # copy so that views into batch-sized path matrices do not keep them alive
            return {k: np.array(v) for k, v in fn(base.batch(i).generator(), sizes[i], **kwargs).items()}

        if self.settings.workers > 1 and len(sizes) > 1:
            with ThreadPoolExecutor(self.settings.workers) as pool:
                parts = list(pool.map(one, range(len(sizes))))
        else:
            parts = [one(i) for i in range(len(sizes))]
        self.sizes[name] = n
        out = {}
        for k in parts[0]:
            vals = [p[k] for p in parts]
            out[k] = np.concatenate(vals) if np.ndim(vals[0]) else np.array(vals)
        return out

    def aux_rng(self, name: str) -> np.random.Generator:
        return self.key.child(name).generator()

    # statistics --------------------------------------------------------

    def ks(self, name: str, xs, ys, labels=("lhs", "rhs")):
        d, p = stats.ks_two_sample(xs, ys)
        self.ecdf_data[name] = {labels[0]: np.asarray(xs), labels[1]: np.asarray(ys)}
        self.entries.append(StatEntry(name, "ks", d, p, _pv_verdict(p, self.settings.level),
                                      {"n_lhs": int(np.size(xs)), "n_rhs": int(np.size(ys))}))

    def energy(self, name: str, xs, ys):
        xs, ys = np.asarray(xs, float), np.asarray(ys, float)
        # pooled standardization is label-free, so the permutation test stays exact
        pooled = np.vstack([xs, ys])
        mu, sd = pooled.mean(axis=0), pooled.std(axis=0)
        sd[sd == 0] = 1.0
        e, p = stats.energy_distance((xs - mu) / sd, (ys - mu) / sd,
                                     permutations=self.settings.permutations,
                                     rng=self.aux_rng(f"perm/{name}"))
        self.entries.append(StatEntry(name, "energy", e, p, _pv_verdict(p, self.settings.level), {
            "dimension": int(xs.shape[1]), "n_lhs": int(xs.shape[0]), "n_rhs": int(ys.shape[0]),
            "block_cap": stats.ENERGY_CAP, "blocks": -(-max(xs.shape[0], ys.shape[0]) // stats.ENERGY_CAP),
            "permutations": self.settings.permutations,
        }))

    def weighted(self, name: str, samples, weights=None, target=None, target_weights=None):
        r = stats.weighted_mean_compare(samples, weights, target, target_weights)
        verdict = "low-power" if r.low_power else ("pass" if r.passed else "fail")
        self.entries.append(StatEntry(name, "weighted_mean", r.difference, r.p_value, verdict, r.to_dict()))


def _pv_verdict(p: float, level: float) -> str:
    return "pass" if p >= level else "fail"


def overall_verdict(entries) -> str:
    vs = {e.verdict for e in entries}
    if "fail" in vs:
        return "fail"
    if "low-power" in vs:
        return "low-power"
    return "pass"


def apply_holm(reports, level: float) -> None:
    """Re-derive hypothesis-test verdicts with Holm's adjustment across all reports."""
    tests = [(r, e) for r in reports for e in r.statistics if e.method in ("ks", "energy")]
    if not tests:
        return
    keep = stats.holm([e.p_value for _, e in tests], level)
    for (r, e), ok in zip(tests, keep):
        e.details["holm_tests"] = len(tests)
        e.details["unadjusted_verdict"] = _pv_verdict(e.p_value, level)
        e.verdict = "pass" if ok else "fail"
    for r in reports:
        r.verdict = overall_verdict(r.statistics)


def run_scenario(scenario_id: str, settings: RunSettings, holm: bool = True) -> TestReport:
    from .catalog import CATALOG

    if scenario_id not in CATALOG:
        raise UnknownScenario(scenario_id)
    sc = CATALOG[scenario_id]
    params = sc.resolve(settings.overrides)
    n = settings.samples or sc.default_samples
    ctx = Context(scenario_id, params, settings, n, TimeGrid(params["t"], settings.grid))
    start = time.perf_counter()
    sc.body(ctx)
    wall = (time.perf_counter() - start) * 1000.0
    report = TestReport(
        scenario=scenario_id, identity=sc.identity, parameters=params, samples=dict(ctx.sizes),
        grid_steps=settings.grid, seed=settings.seed, statistics=ctx.entries,
        verdict=overall_verdict(ctx.entries), tail=ctx.tail, wall_ms=round(wall, 3),
        ecdf_data=ctx.ecdf_data,
    )
    if holm:
        apply_holm([report], settings.level)
    return report


def run_suite(ids, settings: RunSettings) -> list[TestReport]:
    reports = [run_scenario(i, settings, holm=False) for i in ids]
    apply_holm(reports, settings.level)
    return reports
