"""Monte Carlo drivers for the grid, random-layout and scheduling experiments.

Each driver returns an :class:`ExperimentResult` whose rows follow the CSV
contract ``n, statistic, value, stderr, trials``. Trial seeds are derived as::

    SeedSequence(entropy=base_seed, spawn_key=(crc32(tag), n, trial))

feeding a Philox generator, so results do not depend on execution order or
thread count.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import __version__
from . import bounds
from .coding import MAX_EXACT_NODES, max_coding_number
from .scheduler import schedule_instance, throw_pairs
from .topology import (
    GridSpec,
    RandomSpec,
    gen_square_grid,
    gen_uniform,
    make_rng,
    separation_for_count,
)

EXPERIMENTS = ("grid-sweep", "random-mean", "existence-prob", "realistic", "bounds-table")
SEED_RULE = "SeedSequence(entropy=base_seed, spawn_key=(crc32(tag), n, trial)) -> Philox"
CSV_COLUMNS = ("n", "statistic", "value", "stderr", "trials")


class ConfigError(ValueError):
    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class ExperimentConfig:
    experiment: str
    n_values: list[int]
    trials: int = 1000
    radius: float = 1.0
    m_values: list = field(default_factory=lambda: [1, 2, 4, None])
    base_seed: int = 0
    # grid-sweep: pitches probed per N; N counts lattice sites including the relay's
    d_probes: int = 5
    # bounds-table extras
    epsilon: float = 0.0
    d_values: list[float] = field(default_factory=list)
    ring_indices: list[int] = field(default_factory=lambda: [1, 2, 3])
    # random layouts above MAX_EXACT_NODES need a search-call budget (0 = unlimited)
    search_budget: int | None = None
    partition_mode: str = "exact"
    fit_min_n: int = 10

    def validate(self) -> "ExperimentConfig":
        problems = []
        if self.experiment not in EXPERIMENTS:
            problems.append(f"experiment: {self.experiment!r} is not one of {', '.join(EXPERIMENTS)}")
        if not isinstance(self.n_values, list) or not self.n_values:
            problems.append("n_values: must be a non-empty list of integers")
        elif any(not isinstance(n, int) or isinstance(n, bool) or n < 0 for n in self.n_values):
            problems.append("n_values: every entry must be a non-negative integer")
        if not isinstance(self.trials, int) or isinstance(self.trials, bool) or self.trials < 1:
            problems.append("trials: must be an integer >= 1")
        if not isinstance(self.radius, (int, float)) or not self.radius > 0:
            problems.append("radius: must be a positive number")
        if not isinstance(self.m_values, list) or not self.m_values:
            problems.append("m_values: must be a non-empty list")
        elif any(m is not None and (not isinstance(m, int) or isinstance(m, bool) or m < 1) for m in self.m_values):
            problems.append("m_values: entries must be integers >= 1 or null (unbounded)")
        if not isinstance(self.base_seed, int) or isinstance(self.base_seed, bool) or not 0 <= self.base_seed < 2**64:
            problems.append("base_seed: must be a 64-bit unsigned integer")
        if not isinstance(self.d_probes, int) or self.d_probes < 1:
            problems.append("d_probes: must be an integer >= 1")
        if not isinstance(self.epsilon, (int, float)) or self.epsilon < 0:
            problems.append("epsilon: must be >= 0")
        if any(not isinstance(d, (int, float)) or d <= 0 for d in self.d_values):
            problems.append("d_values: entries must be positive numbers")
        if any(not isinstance(i, int) or i < 1 for i in self.ring_indices):
            problems.append("ring_indices: entries must be integers >= 1")
        if self.search_budget is not None and (not isinstance(self.search_budget, int) or self.search_budget < 0):
            problems.append("search_budget: must be null or an integer >= 0")
        if self.partition_mode not in ("exact", "greedy"):
            problems.append("partition_mode: must be 'exact' or 'greedy'")
        if problems:
            raise ConfigError(problems)
        self.radius = float(self.radius)
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError(["config: must be a JSON object"])
        known = set(cls.__dataclass_fields__)
        problems = [f"{k}: unknown field" for k in data if k not in known]
        for required in ("experiment", "n_values"):
            if required not in data:
                problems.append(f"{required}: required field missing")
        if problems:
            raise ConfigError(problems)
        data = dict(data)
        if "m_values" in data and isinstance(data["m_values"], list):
            data["m_values"] = [None if m in (None, "inf", "unbounded") else m for m in data["m_values"]]
        return cls(**data).validate()

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ExperimentResult:
    rows: list[dict]
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in CSV_COLUMNS])
        return buf.getvalue()

    def metadata_json(self) -> str:
        return json.dumps(self.metadata, indent=2, sort_keys=True)

    def write(self, directory: str, stem: str | None = None) -> tuple[str, str]:
        stem = stem or self.metadata["config"]["experiment"]
        os.makedirs(directory, exist_ok=True)
        csv_path = os.path.join(directory, f"{stem}.csv")
        meta_path = os.path.join(directory, f"{stem}.json")
        with open(csv_path, "w", newline="") as fh:
            fh.write(self.to_csv())
        with open(meta_path, "w") as fh:
            fh.write(self.metadata_json() + "\n")
        return csv_path, meta_path

    def value(self, statistic: str, n: int | None = None) -> float:
        for row in self.rows:
            if row["statistic"] == statistic and row["n"] == n:
                return row["value"]
        raise KeyError((statistic, n))

    def select(self, statistic: str) -> dict:
        return {row["n"]: row["value"] for row in self.rows if row["statistic"] == statistic}

    def select_n(self, n: int | None) -> dict:
        return {row["statistic"]: row["value"] for row in self.rows if row["n"] == n}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def trial_seed(base_seed: int, tag: str, n: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(zlib.crc32(tag.encode()), n, trial))


def _workers() -> int:
    env = os.environ.get("NC_GEOM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _map_trials(fn: Callable[[int], object], trials: int) -> list:
    """Run ``fn(trial)`` for every trial; results come back in trial order."""
    workers = min(_workers(), trials)
    if workers <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _row(n, statistic, value, stderr=None, trials=None) -> dict:
    return {"n": n, "statistic": statistic, "value": value, "stderr": stderr, "trials": trials}


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    if len(arr) < 2:
        return float(arr.mean()), 0.0
    return float(arr.mean()), float(arr.std(ddof=1) / math.sqrt(len(arr)))


def _metadata(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"config": cfg.to_dict(), "code_version": __version__, "seed_rule": SEED_RULE}
    meta.update(extra)
    return meta


def _random_cmax(cfg: ExperimentConfig, tag: str, n: int) -> list[tuple[int, bool, float]]:
    if n > MAX_EXACT_NODES and cfg.search_budget is None:
        raise ValueError(
            f"N={n} exceeds the exact-search limit of {MAX_EXACT_NODES}; set search_budget to proceed"
        )

    def one(trial: int):
        rng = make_rng(trial_seed(cfg.base_seed, tag, n, trial))
        cell = gen_uniform(RandomSpec("uniform-count", count=n), cfg.radius, rng=rng)
        res = max_coding_number(cell, budget=cfg.search_budget if n > MAX_EXACT_NODES else None)
        radii = [math.hypot(*cell.position(v)) for v in res.witness_nodes]
        return res.max_number, res.exact, float(np.mean(radii)) if radii else math.nan

    return _map_trials(one, cfg.trials)


def fit_power_law(ns: Sequence[float], means: Sequence[float]) -> tuple[float, float]:
    """Least-squares fit of log(mean) = log(a) + b log(n); returns ``(b, a)``."""
    b, log_a = np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(means, float)), 1)
    return float(b), float(math.exp(log_a))


def run_grid_sweep(cfg: ExperimentConfig) -> ExperimentResult:
    """C_max of the square grid for each N (lattice sites in the disk, relay site included)."""
    rows = []
    r = cfg.radius
    for n in cfg.n_values:
        ds = separation_for_count(n - 1, r, cfg.d_probes) if n >= 1 else []
        values = [max_coding_number(gen_square_grid(GridSpec(d), r)).max_number for d in ds]
        cmax = values[0]
        d = ds[0]
        rows.append(_row(n, "cmax", cmax, None, len(ds)))
        rows.append(_row(n, "cmax_spread", max(values) - min(values), None, len(ds)))
        rows.append(_row(n, "d", d))
        rows.append(_row(n, "ub_square_grid", bounds.ub_square_grid(n)))
        rows.append(_row(n, "ub_fixed_separation", min(bounds.ub_fixed_separation(r, x) for x in ds)))
        if d < r:
            rows.append(_row(n, "lb_square_count", bounds.lb_square_grid(r, d).count))
    return ExperimentResult(rows, _metadata(cfg, n_convention="lattice sites inside the disk, relay site included"))


def run_random_mean(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    means = {}
    for n in cfg.n_values:
        out = _random_cmax(cfg, "random-mean", n)
        cm = [c for c, _, _ in out]
        mean, se = _mean_se(cm)
        means[n] = mean
        rows.append(_row(n, "mean_cmax", mean, se, cfg.trials))
        inexact = sum(1 for _, ok, _ in out if not ok)
        if inexact:
            # those trials report a lower bound, not C_max
            rows.append(_row(n, "lower_bound_trials", inexact, None, cfg.trials))
        radii = [x for _, _, x in out if not math.isnan(x)]
        if radii:
            rows.append(_row(n, "witness_mean_radius", *_mean_se(radii), len(radii)))
    window = [n for n in cfg.n_values if n >= cfg.fit_min_n and means[n] > 0]
    extra = {"fit_window": window}
    if len(window) >= 2:
        slope, pref = fit_power_law(window, [means[n] for n in window])
        rows.append(_row(None, "loglog_slope", slope, None, cfg.trials))
        rows.append(_row(None, "prefactor", pref, None, cfg.trials))
    return ExperimentResult(rows, _metadata(cfg, **extra))


def run_existence_prob(cfg: ExperimentConfig) -> ExperimentResult:
    rows = []
    for n in cfg.n_values:
        cm = np.array([c for c, _, _ in _random_cmax(cfg, "existence-prob", n)])
        top = int(cm.max()) if len(cm) else 0
        for c in range(0, top + 3, 2):
            p = float(np.mean(cm >= c))
            rows.append(_row(n, f"p_ge_{c}", p, math.sqrt(p * (1 - p) / cfg.trials), cfg.trials))
        for c in range(0, top + 1, 2):
            p = float(np.mean(cm == c))
            rows.append(_row(n, f"p_eq_{c}", p, math.sqrt(p * (1 - p) / cfg.trials), cfg.trials))
        p = float(np.mean((cm == 4) | (cm == 6)))
        rows.append(_row(n, "p_in_4_6", p, math.sqrt(p * (1 - p) / cfg.trials), cfg.trials))
    return ExperimentResult(rows, _metadata(cfg))


def _m_label(m) -> str:
    return "inf" if m is None else str(m)


def run_realistic(cfg: ExperimentConfig) -> ExperimentResult:
    """Gain of one frame of N/2 symmetric pairs for each cap in ``m_values``."""
    rows = []
    ms = sorted(cfg.m_values, key=lambda m: math.inf if m is None else m)
    for n in cfg.n_values:
        pairs = max(1, n // 2)

        def one(trial: int):
            rng = make_rng(trial_seed(cfg.base_seed, "realistic", n, trial))
            cell = throw_pairs(pairs, cfg.radius, rng)
            return [schedule_instance(cell, m, cfg.partition_mode).gain for m in ms]

        gains = np.array(_map_trials(one, cfg.trials))
        for k, m in enumerate(ms):
            rows.append(_row(n, f"gain_m={_m_label(m)}", *_mean_se(gains[:, k]), cfg.trials))
        violations = int(np.sum(np.any(np.diff(gains, axis=1) < -1e-12, axis=1)))
        rows.append(_row(n, "monotone_violations", violations, None, cfg.trials))
    return ExperimentResult(rows, _metadata(cfg, m_order=[_m_label(m) for m in ms]))


def _guarded(fn, *args):
    try:
        return fn(*args), None
    except bounds.DomainError as exc:
        return math.nan, str(exc)


def run_bounds_table(cfg: ExperimentConfig) -> ExperimentResult:
    """Every closed-form bound for the configured N, d, lambda and ring indices.

    Domain errors are recorded as a NaN value plus a ``domain_error:<name>``
    row instead of aborting the table.
    """
    rows = []
    r = cfg.radius

    def emit(n, name, fn, *args):
        value, err = _guarded(fn, *args)
        if err is None:
            rows.append(_row(n, name, value))
        else:
            rows.append(_row(n, name, math.nan))
            rows.append(_row(n, f"domain_error:{name}", 1))

    def per_d(n, d, suffix=""):
        rows.append(_row(n, f"d{suffix}", d))
        emit(n, f"ub_fixed_separation{suffix}", bounds.ub_fixed_separation, r, d)
        value, err = _guarded(bounds.lb_square_grid, r, d)
        if err is None:
            for key in ("delta", "phi", "omega", "count"):
                rows.append(_row(n, f"lb_square_{key}{suffix}", getattr(value, key)))
        else:
            rows.append(_row(n, f"domain_error:lb_square{suffix}", 1))
        emit(n, f"lb_cyclic_case1{suffix}", bounds.lb_cyclic_case1, r, d)
        emit(n, f"lb_cyclic_case2{suffix}", bounds.lb_cyclic_case2, r, d)

    for n in cfg.n_values:
        if n < 1:
            continue
        try:
            per_d(n, separation_for_count(n - 1, r)[0] if n > 1 else r)
        except ValueError:
            # no square-grid pitch gives exactly n lattice sites
            rows.append(_row(n, "domain_error:d", 1))
        rows.append(_row(n, "ub_square_grid", bounds.ub_square_grid(n)))
        lam = n / (math.pi * r * r)
        rows.append(_row(n, "lambda", lam))
        emit(n, "stochastic_ub_curve", bounds.stochastic_ub_curve, lam, cfg.epsilon)
    for d in cfg.d_values:
        per_d(None, float(d), f"[d={d!r}]")
        rows.append(_row(None, f"cyclic_total[d={d!r}]", bounds.cyclic_total(r, float(d))))
    for i in cfg.ring_indices:
        rows.append(_row(None, f"cyclic_ring_count[i={i}]", bounds.cyclic_ring_count(i)))
    return ExperimentResult(rows, _metadata(cfg))


RUNNERS = {
    "grid-sweep": run_grid_sweep,
    "random-mean": run_random_mean,
    "existence-prob": run_existence_prob,
    "realistic": run_realistic,
    "bounds-table": run_bounds_table,
}


def run(cfg: ExperimentConfig) -> ExperimentResult:
    return RUNNERS[cfg.validate().experiment](cfg)
