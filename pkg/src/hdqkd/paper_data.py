"""Published per-run quantities and their internal consistency checks.

The CSV files under ``hdqkd/data`` are a one-off transcription of the
experimental tables: ``paper_rows.csv`` holds one line per (table, noise
level) and ``paper_subspaces.csv`` one line per subspace. Values are kept
exactly as printed, including evident typos; checks report them instead of
silently fixing them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

from hdqkd.errors import ConfigError
from hdqkd.keyrate import entropy_bound_from_fidelity
from hdqkd.stats import shannon_entropy

ROWS_FILE = "paper_rows.csv"
SUBSPACES_FILE = "paper_subspaces.csv"

ENTROPY_TOL = 0.02
BPC_TOL = 0.02
BPSC_TOL = 0.01
NOISE_TOL = 0.2
FIDELITY_TOL = 0.003
NORM_TOL = 0.01


@dataclass
class PaperSubspace:
    index: int
    e_t: Optional[list]
    e_k: Optional[list]
    h_t: Optional[float]
    h_k: Optional[float]
    bpc: Optional[float]
    pr: Optional[float]


@dataclass
class PaperDataRow:
    table: str
    d: int
    k: int
    p: float
    noise: float
    bpsc: float
    bpsc_err: float
    tscs: float
    bps: float
    bps_err: float
    tcs: Optional[float] = None
    f_plus: Optional[float] = None
    subspaces: list = field(default_factory=list)


@dataclass
class Check:
    table: str
    p: float
    subspace: Optional[int]
    quantity: str
    paper: float
    recomputed: float
    tolerance: float
    passed: bool

    @property
    def delta(self) -> float:
        return self.recomputed - self.paper


@dataclass
class ConsistencyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]

    def select(self, table=None, quantity=None, p=None) -> list:
        return [c for c in self.checks
                if (table is None or c.table == table)
                and (quantity is None or c.quantity == quantity)
                and (p is None or c.p == p)]

    def to_json(self) -> str:
        return json.dumps([{**asdict(c), "delta": c.delta} for c in self.checks], indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["table", "p", "subspace", "quantity", "paper", "recomputed", "delta", "tolerance", "pass"])
        for c in self.checks:
            w.writerow([c.table, c.p, "" if c.subspace is None else c.subspace, c.quantity,
                        c.paper, round(c.recomputed, 6), round(c.delta, 6), c.tolerance, c.passed])
        return buf.getvalue()


def _read(data_dir, name: str) -> tuple[str, str]:
    if data_dir is None:
        return resources.files("hdqkd").joinpath("data").joinpath(name).read_text(encoding="utf-8"), name
    path = Path(data_dir) / name
    if not path.exists():
        raise ConfigError(f"missing data file {path}")
    return path.read_text(encoding="utf-8"), str(path)


def _opt(value: str, cast=float):
    return None if value is None or value.strip() == "" else cast(value)


def _vector(value: str, where: str):
    if not value:
        return None
    vec = [float(x) for x in value.split(";")]
    if any(x < 0 or x > 1 for x in vec):
        raise ConfigError(f"{where}: probability entries must lie in [0, 1]")
    return vec


def load_paper_rows(data_dir=None) -> list[PaperDataRow]:
    """Parse the two CSV files into rows with their subspaces attached."""
    text, name = _read(data_dir, ROWS_FILE)
    rows = {}
    for line, rec in enumerate(csv.DictReader(io.StringIO(text)), start=2):
        try:
            row = PaperDataRow(
                table=rec["table"], d=int(rec["d"]), k=int(rec["k"]), p=float(rec["p"]),
                noise=float(rec["noise"]), bpsc=float(rec["bpsc"]), bpsc_err=float(rec["bpsc_err"]),
                tscs=float(rec["tscs"]), bps=float(rec["bps"]), bps_err=float(rec["bps_err"]),
                tcs=_opt(rec["tcs"]), f_plus=_opt(rec["f_plus"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{name}: line {line}: {exc}") from None
        rows[(row.table, row.p)] = row
    text, name = _read(data_dir, SUBSPACES_FILE)
    for line, rec in enumerate(csv.DictReader(io.StringIO(text)), start=2):
        where = f"{name}: line {line}"
        try:
            key = (rec["table"], float(rec["p"]))
            sub = PaperSubspace(
                index=int(rec["subspace"]),
                e_t=_vector(rec["e_t"], where), e_k=_vector(rec["e_k"], where),
                h_t=_opt(rec["h_t"]), h_k=_opt(rec["h_k"]), bpc=_opt(rec["bpc"]), pr=_opt(rec["pr"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from None
        if key not in rows:
            raise ConfigError(f"{where}: no table row for {key}")
        rows[key].subspaces.append(sub)
    for row in rows.values():
        row.subspaces.sort(key=lambda s: s.index)
    return list(rows.values())


def _entropies(sub: PaperSubspace) -> tuple[float, float]:
    """Listed entropies where printed, else recomputed from the vectors."""
    h_t = sub.h_t if sub.h_t is not None else shannon_entropy(sub.e_t)
    h_k = sub.h_k if sub.h_k is not None else shannon_entropy(sub.e_k)
    return h_t, h_k


def recompute_bpsc(row: PaperDataRow) -> float:
    """Weighted key rate from the listed per-subspace entropies and weights."""
    total = 0.0
    for sub in row.subspaces:
        h_t, h_k = _entropies(sub)
        weight = sub.pr if sub.pr is not None else 1.0 / len(row.subspaces)
        total += weight * (math.log2(row.k) - h_k - h_t)
    return total


def reproduce_tables(data_dir=None) -> ConsistencyReport:
    """Recompute derived quantities of every published row and compare.

    Check names: ``norm_e_t``/``norm_e_k`` (vector sums), ``H_e_t``/``H_e_k``
    (entropy of listed vector vs listed entropy), ``bpc`` (rate per subspace),
    ``bpsc`` (rate formula or weighted aggregate vs BPSC column),
    ``bpsc_fidelity`` and ``H_e_t_fidelity`` (fidelity-bound route),
    ``bps`` (BPSC x TSCS vs BPS within its error bar) and ``noise``
    ((TCS - TCS at p=0) / d vs NOISE).
    """
    rows = load_paper_rows(data_dir)
    clean = {r.table: r for r in rows if r.p == 0}
    checks = []

    def add(row, sub, quantity, paper, value, tol):
        checks.append(Check(row.table, row.p, sub, quantity, paper, value, tol, abs(value - paper) <= tol + 1e-12))

    for row in rows:
        log_k = math.log2(row.k)
        for sub in row.subspaces:
            for name, vec, listed in (("e_t", sub.e_t, sub.h_t), ("e_k", sub.e_k, sub.h_k)):
                if vec is None:
                    continue
                add(row, sub.index, f"norm_{name}", 1.0, sum(vec), NORM_TOL)
                if listed is not None:
                    add(row, sub.index, f"H_{name}", listed, shannon_entropy(vec), ENTROPY_TOL)
            if sub.bpc is not None:
                h_t, h_k = _entropies(sub)
                add(row, sub.index, "bpc", sub.bpc, log_k - h_k - h_t, BPC_TOL)
        if row.d == row.k:
            add(row, None, "bpsc", row.bpsc, recompute_bpsc(row), ENTROPY_TOL)
        else:
            add(row, None, "bpsc", row.bpsc, sum(s.pr * s.bpc for s in row.subspaces), BPSC_TOL)
        if row.f_plus is not None:
            bound = entropy_bound_from_fidelity(row.f_plus, row.d).h_t_bound
            sub = row.subspaces[0]
            add(row, None, "H_e_t_fidelity", sub.h_t, bound, FIDELITY_TOL)
            if sub.e_k is not None:
                add(row, None, "bpsc_fidelity", row.bpsc, log_k - shannon_entropy(sub.e_k) - bound, ENTROPY_TOL)
        add(row, None, "bps", row.bps, row.bpsc * row.tscs, row.bps_err)
        base = clean.get(row.table)
        if base is not None:
            # for d == k nothing is post-selected and TSCS is the total rate
            now = row.tcs if row.tcs is not None else row.tscs
            then = base.tcs if base.tcs is not None else base.tscs
            add(row, None, "noise", row.noise, (now - then) / row.d, NOISE_TOL)
    return ConsistencyReport(checks)
