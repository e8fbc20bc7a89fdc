"""Scenario runner: analytic, Monte Carlo and published-data key-rate reports."""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from hdqkd.bases import (
    Flavor,
    SubspacePartition,
    computational_basis,
    conjugate_basis,
    default_flavor,
    subspace_test_basis,
)
from hdqkd.coincidence import (
    DEFAULT_WINDOW,
    NoiseInjection,
    SourceModel,
    added_coincidences,
    entropy_variance,
    estimate_from_counts,
    simulate_run,
    singles_rate_for_accidentals,
)
from hdqkd.errors import ConfigError
from hdqkd.keyrate import KeyRateReport, SubspaceRate, aggregate, keyrate_subspace
from hdqkd.paper_data import _entropies, load_paper_rows
from hdqkd.states import isotropic_state, max_entangled_state
from hdqkd.stats import joint_probabilities, shannon_entropy

MODES = ("analytic", "montecarlo", "paper-data")


@dataclass
class Scenario:
    d: int
    k: int
    p_list: list = field(default_factory=lambda: [0.0])
    flavor: Optional[str] = None
    mode: str = "analytic"
    pair_rate: float = 3000.0
    duration: float = 25.0
    seed: int = 0
    window: float = DEFAULT_WINDOW
    shards: int = 1
    table: Optional[str] = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(field_name, msg):
            raise ConfigError(f"field {field_name!r}: {msg}")

        if not isinstance(self.d, int) or self.d < 2:
            bad("d", f"must be an integer >= 2, got {self.d!r}")
        if not isinstance(self.k, int) or self.k < 2 or self.d % self.k:
            bad("k", f"must be an integer >= 2 dividing d={self.d}, got {self.k!r}")
        if self.mode not in MODES:
            bad("mode", f"must be one of {MODES}, got {self.mode!r}")
        for p in self.p_list:
            if not isinstance(p, (int, float)) or not 0.0 <= p < 1.0:
                bad("p_list", f"noise fractions must lie in [0, 1), got {p!r}")
        if self.flavor is not None:
            try:
                flavor = Flavor.parse(self.flavor)
            except ValueError as exc:
                bad("flavor", str(exc))
            if flavor is Flavor.HADAMARD and self.k not in (2, 4):
                bad("flavor", f"hadamard needs k in (2, 4), got k={self.k}")
        if self.pair_rate < 0:
            bad("pair_rate", "must be nonnegative")
        if self.mode == "montecarlo" and self.duration <= 0:
            bad("duration", "must be positive in montecarlo mode")
        if self.window <= 0:
            bad("window", "must be positive")

    @property
    def flavor_enum(self) -> Flavor:
        return default_flavor(self.k) if self.flavor is None else Flavor.parse(self.flavor)

    @classmethod
    def from_mapping(cls, data: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario field(s) {sorted(unknown)}")
        for name in ("d", "k"):
            if name not in data:
                raise ConfigError(f"field {name!r}: required")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "Scenario":
        text = Path(path).read_text(encoding="utf-8")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: line 1: scenario must be a JSON object")
        try:
            return cls.from_mapping(data)
        except ConfigError as exc:
            raise ConfigError(f"{path}: {exc}") from None

    def to_dict(self) -> dict:
        return asdict(self)


def analytic_report(s: Scenario, p: float) -> KeyRateReport:
    """Isotropic-noise report. TSCS assumes ``pair_rate`` clean pairs plus the
    accidentals that make up a fraction p of all coincidences."""
    report = keyrate_subspace(isotropic_state(s.d, p), s.d, s.k, s.flavor_enum)
    report.p = p
    report.noise = added_coincidences(p, s.pair_rate) / s.d if s.pair_rate > 0 else 0.0
    report.source = "analytic"
    total = s.pair_rate / (1.0 - p)
    return report.with_rate(total * report.kept_fraction)


def _seed(base: int, *path: int) -> int:
    return int(np.random.SeedSequence([base, *path]).generate_state(1, dtype=np.uint64)[0])


def montecarlo_report(s: Scenario, p: float, index: int = 0) -> KeyRateReport:
    """Simulate key- and test-basis runs of ``duration`` seconds each.

    Signal pairs come from the ideal state; white noise enters as accidental
    coincidences from per-channel background tuned so that they make up a
    fraction p of all coincidences. Standard errors are first-order (delta
    method) propagations of the multinomial count noise.
    """
    part = SubspacePartition.contiguous(s.d, s.k)
    comp = computational_basis(s.d)
    test = subspace_test_basis(s.d, part, s.flavor_enum)
    ideal = max_entangled_state(s.d)
    source = SourceModel(s.pair_rate, window=s.window)
    extra = added_coincidences(p, s.pair_rate) if s.pair_rate > 0 else 0.0
    noise = NoiseInjection(singles_rate_for_accidentals(s.d, extra, s.window))
    tables = {}
    for b, (label, ba, bb) in enumerate((("key", comp, comp), ("test", test, conjugate_basis(test)))):
        dist = joint_probabilities(ideal, ba, bb)
        tables[label] = simulate_run(dist, source, noise, s.duration, _seed(s.seed, index, b),
                                     basis_label=label, shards=s.shards)
    key = estimate_from_counts(tables["key"], part)
    tst = estimate_from_counts(tables["test"], part)
    rates, variances = [], []
    for m in range(part.n_blocks):
        e_k, e_t = key.error_vectors[m], tst.error_vectors[m]
        h_k, h_t = shannon_entropy(e_k), shannon_entropy(e_t)
        rates.append(SubspaceRate(m, e_t, e_k, h_t, h_k, math.log2(s.k) - h_k - h_t))
        variances.append(entropy_variance(e_k, key.block_counts[m]) + entropy_variance(e_t, tst.block_counts[m]))
    report = aggregate(s.d, s.k, rates, key.weights, p=p, noise=extra / s.d, source="montecarlo",
                       kept_fraction=key.tscs / key.tcs)
    w = np.array(key.weights)
    bpc = np.array([r.bpc for r in rates])
    n_key = sum(key.block_counts)
    var = float((w ** 2 * np.array(variances)).sum() + ((w * bpc ** 2).sum() - report.bpsc ** 2) / n_key)
    report.bpsc_stderr = math.sqrt(max(var, 0.0))
    return report.with_rate(key.tscs)


def paper_reports(s: Scenario, data_dir=None) -> list[KeyRateReport]:
    """Rebuild reports from published vectors and entropies of matching rows."""
    out = []
    for row in load_paper_rows(data_dir):
        if (row.d, row.k) != (s.d, s.k) or (s.table and row.table != s.table):
            continue
        if s.p_list and not any(abs(row.p - p) < 1e-12 for p in s.p_list):
            continue
        rates, weights = [], []
        for sub in row.subspaces:
            h_t, h_k = _entropies(sub)
            rates.append(SubspaceRate(sub.index - 1, sub.e_t or [], sub.e_k or [], h_t, h_k,
                                      math.log2(row.k) - h_k - h_t))
            weights.append(sub.pr if sub.pr is not None else 1.0 / len(row.subspaces))
        rep = aggregate(row.d, row.k, rates, weights, p=row.p, noise=row.noise, f_plus=row.f_plus,
                        source=f"paper:{row.table}")
        if row.tcs:
            rep.kept_fraction = row.tscs / row.tcs
        out.append(rep.with_rate(row.tscs))
    return out


def run_scenario(s: Scenario, workers: int = 1, data_dir=None) -> list[KeyRateReport]:
    """One report per noise fraction, in ``p_list`` order."""
    if s.mode == "paper-data":
        return paper_reports(s, data_dir)
    if s.mode == "analytic":
        job = lambda ip: analytic_report(s, ip[1])
    else:
        job = lambda ip: montecarlo_report(s, ip[1], ip[0])
    items = list(enumerate(s.p_list))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, items))
    return [job(item) for item in items]


def analytic_bpsc(d: int, k: int, p: float, flavor=None) -> float:
    return keyrate_subspace(isotropic_state(d, p), d, k, flavor).bpsc


def zero_rate_crossover(d: int, k: int, flavor=None, tol: float = 1e-4) -> Optional[float]:
    """Smallest noise fraction where the analytic rate reaches zero (bisection)."""
    lo, hi = 0.0, 1.0
    if analytic_bpsc(d, k, lo, flavor) <= 0:
        return 0.0
    if analytic_bpsc(d, k, hi, flavor) > 0:
        return None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if analytic_bpsc(d, k, mid, flavor) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class CurveData:
    d: int
    k: int
    rows: list
    crossover_p: Optional[float]

    COLUMNS = ("d", "k", "p", "noise", "bpsc", "bps", "crossover_p")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        cross = "" if self.crossover_p is None else repr(self.crossover_p)
        for r in self.rows:
            w.writerow([self.d, self.k, repr(r["p"]), repr(r["noise"]), repr(r["bpsc"]), repr(r["bps"]), cross])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "k": self.k, "crossover_p": self.crossover_p, "rows": self.rows})


def p_grid(step: float, p_max: float = 0.99) -> list[float]:
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(math.floor(p_max / step + 1e-9))
    return [round(i * step, 12) for i in range(n + 1)]


def emit_curves(s: Scenario, grid) -> CurveData:
    """Analytic rate curve over ``grid`` (a list of p, or a step size)."""
    ps = p_grid(grid) if isinstance(grid, (int, float)) else list(grid)
    probe = Scenario(s.d, s.k, ps, s.flavor, "analytic", s.pair_rate, s.duration, s.seed, s.window)
    rows = [{"p": r.p, "noise": r.noise, "bpsc": r.bpsc, "bps": r.bps} for r in run_scenario(probe)]
    cross = zero_rate_crossover(s.d, s.k, s.flavor_enum) if ps else None
    return CurveData(s.d, s.k, rows, cross)
