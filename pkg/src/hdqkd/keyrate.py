"""Asymptotic key rates from error vectors, with subspace aggregation.

Rates are in bits per post-selected coincidence (BPSC) and bits per second
(BPS = BPSC * TSCS, TSCS being post-selected coincidences per second).
Negative rates are kept as-is; :attr:`KeyRateReport.no_key` flags them.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Optional

import numpy as np

from hdqkd.bases import (
    Flavor,
    SubspacePartition,
    computational_basis,
    conjugate_basis,
    default_flavor,
    subspace_test_basis,
)
from hdqkd.errors import DimensionError
from hdqkd.states import BipartiteState
from hdqkd.stats import error_vector, joint_probabilities, shannon_entropy, subspace_postselect


@dataclass
class SubspaceRate:
    block: int
    e_t: list
    e_k: list
    h_t: float
    h_k: float
    bpc: float


@dataclass
class KeyRateReport:
    d: int
    k: int
    per_subspace: list
    weights: list
    bpsc: float
    tscs: Optional[float] = None
    bps: Optional[float] = None
    p: Optional[float] = None
    noise: Optional[float] = None
    f_plus: Optional[float] = None
    bpsc_stderr: Optional[float] = None
    bps_stderr: Optional[float] = None
    kept_fraction: Optional[float] = None
    source: str = "analytic"

    @property
    def no_key(self) -> bool:
        return self.bpsc <= 0.0

    def with_rate(self, tscs: float) -> "KeyRateReport":
        """Attach a post-selected coincidence rate and derive bits per second."""
        self.tscs = float(tscs)
        # raw product: a negative bpsc gives a negative bps rather than an error
        self.bps = self.bpsc * self.tscs
        if self.bpsc_stderr is not None:
            self.bps_stderr = self.bpsc_stderr * self.tscs
        return self

    def to_dict(self) -> dict:
        out = asdict(self)
        out["no_key"] = self.no_key
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "KeyRateReport":
        data = {k: v for k, v in data.items() if k != "no_key"}
        data["per_subspace"] = [SubspaceRate(**s) for s in data["per_subspace"]]
        return cls(**data)


@dataclass(frozen=True)
class FidelityBound:
    f_plus: float
    d: int
    h_t_bound: float
    vacuous: bool = False


def keyrate_simple(k: int, e_k, e_t) -> float:
    """log2(k) - H(e_k) - H(e_t)."""
    e_k = np.asarray(e_k, dtype=float)
    e_t = np.asarray(e_t, dtype=float)
    if len(e_k) != k or len(e_t) != k:
        raise DimensionError(f"error vectors must have length k={k}, got {len(e_k)} and {len(e_t)}")
    return math.log2(k) - shannon_entropy(e_k) - shannon_entropy(e_t)


def bps(bpsc: float, tscs: float) -> float:
    if bpsc < 0 or tscs < 0:
        raise ValueError("bits per coincidence and coincidence rate must be nonnegative")
    return bpsc * tscs


def aggregate(d: int, k: int, rates: list[SubspaceRate], weights, **extra) -> KeyRateReport:
    """Weight per-block rates by block probability into one report."""
    weights = [float(w) for w in weights]
    bpsc = float(sum(w * r.bpc for w, r in zip(weights, rates)))
    return KeyRateReport(d, k, rates, weights, bpsc, **extra)


def keyrate_subspace(
    state: BipartiteState,
    d: int,
    k: int,
    flavor: "Flavor | str | None" = None,
    part: SubspacePartition | None = None,
) -> KeyRateReport:
    """Full analytic pipeline for one state.

    The key basis is computational for both parties; Alice's test basis is the
    block Fourier/Hadamard basis and Bob's is its complex conjugate. Block
    weights come from the key-basis post-selection.
    """
    if state.dim != d:
        raise DimensionError(f"state has d={state.dim}, requested d={d}")
    part = part or SubspacePartition.contiguous(d, k)
    flavor = default_flavor(k) if flavor is None else Flavor.parse(flavor)
    comp = computational_basis(d)
    test_a = subspace_test_basis(d, part, flavor)
    key_blocks, kept = subspace_postselect(joint_probabilities(state, comp, comp), part)
    test_blocks, _ = subspace_postselect(
        joint_probabilities(state, test_a, conjugate_basis(test_a)), part
    )
    rates = []
    for kb, tb in zip(key_blocks, test_blocks):
        e_k = error_vector(kb.conditional)
        e_t = error_vector(tb.conditional)
        h_k, h_t = shannon_entropy(e_k), shannon_entropy(e_t)
        rates.append(SubspaceRate(kb.block, e_t.tolist(), e_k.tolist(), h_t, h_k, math.log2(k) - h_k - h_t))
    return aggregate(d, k, rates, [kb.weight for kb in key_blocks], kept_fraction=kept)


def entropy_bound_from_fidelity(f_plus: float, d: int) -> FidelityBound:
    """Largest entropy of a length-d error vector whose zero-shift entry is >= f_plus.

    The maximiser puts f_plus on the zero shift and spreads the rest evenly
    over the d - 1 other shifts. Below f_plus = 1/d the constraint is inactive
    and the bound is the trivial log2(d).
    """
    if not 0.0 <= f_plus <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {f_plus}")
    if f_plus < 1.0 / d:
        return FidelityBound(f_plus, d, math.log2(d), vacuous=True)
    rest = 1.0 - f_plus
    h = shannon_entropy([f_plus, rest]) + (rest * math.log2(d - 1) if rest > 0 else 0.0)
    return FidelityBound(f_plus, d, h)


def keyrate_fidelity_method(f_plus: float, e_k, d: int) -> float:
    """Key rate when the test-basis entropy is bounded through the fidelity."""
    e_k = np.asarray(e_k, dtype=float)
    if len(e_k) != d:
        raise DimensionError(f"key error vector must have length d={d}")
    return math.log2(d) - shannon_entropy(e_k) - entropy_bound_from_fidelity(f_plus, d).h_t_bound


# --- serialisation -----------------------------------------------------------

_SCALARS = ["d", "k", "p", "noise", "bpsc", "bpsc_stderr", "tscs", "bps", "bps_stderr",
            "f_plus", "kept_fraction", "source"]
_BLOCK_FIELDS = ["e_t", "e_k", "h_t", "h_k", "bpc", "pr"]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return ";".join(repr(float(v)) for v in x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def reports_to_json(reports: Iterable[KeyRateReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2)


def reports_from_json(text: str) -> list[KeyRateReport]:
    return [KeyRateReport.from_dict(r) for r in json.loads(text)]


def reports_to_csv(reports: Iterable[KeyRateReport]) -> str:
    """One row per report; per-subspace columns are ``S<m>_<field>`` (m from 1)."""
    reports = list(reports)
    n_blocks = max((len(r.per_subspace) for r in reports), default=1)
    header = _SCALARS + [f"S{m + 1}_{f}" for m in range(n_blocks) for f in _BLOCK_FIELDS]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in reports:
        row = [_fmt(getattr(r, name)) for name in _SCALARS]
        for m in range(n_blocks):
            if m < len(r.per_subspace):
                s = r.per_subspace[m]
                row += [_fmt(s.e_t), _fmt(s.e_k), _fmt(s.h_t), _fmt(s.h_k), _fmt(s.bpc), _fmt(r.weights[m])]
            else:
                row += [""] * len(_BLOCK_FIELDS)
        writer.writerow(row)
    return buf.getvalue()


def reports_from_csv(text: str) -> list[KeyRateReport]:
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        def num(name, cast=float):
            return cast(row[name]) if row.get(name) not in (None, "") else None

        rates, weights = [], []
        m = 1
        while row.get(f"S{m}_bpc"):
            vec = lambda f: [float(v) for v in row[f"S{m}_{f}"].split(";") if v]
            rates.append(SubspaceRate(m - 1, vec("e_t"), vec("e_k"), float(row[f"S{m}_h_t"]),
                                      float(row[f"S{m}_h_k"]), float(row[f"S{m}_bpc"])))
            weights.append(float(row[f"S{m}_pr"]))
            m += 1
        out.append(KeyRateReport(
            d=num("d", int), k=num("k", int), per_subspace=rates, weights=weights,
            bpsc=num("bpsc"), tscs=num("tscs"), bps=num("bps"), p=num("p"), noise=num("noise"),
            f_plus=num("f_plus"), bpsc_stderr=num("bpsc_stderr"), bps_stderr=num("bps_stderr"),
            kept_fraction=num("kept_fraction"), source=row["source"],
        ))
    return out
