"""Acceptance suite: one test per criterion, summarised at the end of the run."""
import math
import time

import numpy as np
import pytest

from hdqkd.bases import SubspacePartition, computational_basis, conjugate_basis, subspace_test_basis
from hdqkd.coincidence import (
    NoiseInjection,
    SourceModel,
    accidental_coincidence_rate,
    estimate_from_counts,
    simulate_run,
    singles_rate_for_accidentals,
)
from hdqkd.keyrate import entropy_bound_from_fidelity, keyrate_subspace
from hdqkd.optics import detector_projectors, is_complete_measurement, load_golden_tables, load_network, verify_table
from hdqkd.paper_data import reproduce_tables
from hdqkd.scenario import analytic_bpsc, zero_rate_crossover
from hdqkd.states import isotropic_state, max_entangled_state
from hdqkd.stats import joint_probabilities

from oracles import block_basis_vectors, brute_block_error_vectors, brute_joint, closed_form_isotropic_error, isotropic_rho

criterion = pytest.mark.criterion


def _cells(report, tables, quantity):
    return [c for c in report.checks if c.table in tables and c.quantity == quantity]


def _describe(cells):
    return "; ".join(f"{c.table} p={c.p}: {c.recomputed:.4f} vs {c.paper}" for c in cells)


@criterion(1, "rate formula reproduces BPSC of the d=k tables within 0.02")
def test_rate_formula_tables():
    start = time.perf_counter()
    report = reproduce_tables()
    cells = _cells(report, {"S6", "S9", "S11"}, "bpsc")
    assert len(cells) >= 12
    s6 = report.select(table="S6", quantity="bpsc", p=0.0)[0]
    assert s6.recomputed == pytest.approx(3 - 0.153 - 0.323, abs=1e-9)
    bad = [c for c in cells if abs(c.delta) > 0.02]
    assert not bad, _describe(bad)
    assert time.perf_counter() - start < 1.0


@criterion(2, "fidelity bound matches S6 test-basis entropies within 0.003")
def test_fidelity_bound():
    start = time.perf_counter()
    for f, h in zip((0.964, 0.943, 0.894, 0.824), (0.323, 0.474, 0.787, 1.166)):
        bound = entropy_bound_from_fidelity(f, 8)
        assert not bound.vacuous
        assert bound.h_t_bound == pytest.approx(h, abs=0.003), f
    assert time.perf_counter() - start < 1.0


@criterion(3, "subspace aggregation and BPS = BPSC x TSCS agree with the tables")
def test_aggregation():
    start = time.perf_counter()
    assert 0.503 * 1.441 + 0.497 * 1.434 == pytest.approx(1.437, abs=0.01)
    report = reproduce_tables()
    agg = _cells(report, {"S7", "S8", "S10"}, "bpsc")
    assert {c.table for c in agg} == {"S7", "S8", "S10"}
    bad = [c for c in agg if abs(c.delta) > 0.01]
    assert not bad, _describe(bad)
    bps = _cells(report, {"S6", "S7", "S8", "S9", "S10", "S11"}, "bps")
    assert len({c.table for c in bps}) == 6
    bad = [c for c in bps if not c.passed]
    assert not bad, _describe(bad)
    assert time.perf_counter() - start < 1.0


@criterion(4, "(TCS_noisy - TCS_clean)/d matches NOISE within 0.2 for S6-S8")
def test_noise_identity():
    start = time.perf_counter()
    report = reproduce_tables()
    cells = [c for c in _cells(report, {"S6", "S7", "S8"}, "noise") if c.p > 0]
    assert len(cells) == 11
    s7 = report.select(table="S7", quantity="noise", p=0.025)[0]
    assert s7.recomputed == pytest.approx((3342.6 - 3250.92) / 8, abs=1e-9)
    bad = [c for c in cells if abs(c.delta) > 0.2]
    assert time.perf_counter() - start < 1.0
    assert not bad, _describe(bad)


DK = [(2, 2), (4, 2), (4, 4), (8, 2), (8, 4), (8, 8)]
PS = [0.0, 0.025, 0.075, 0.15, 0.3]


@criterion(5, "pipeline error vectors equal the closed-form isotropic values within 1e-12")
def test_closed_form_equivalence():
    for d, k in DK:
        for p in PS:
            expected = closed_form_isotropic_error(d, k, p)
            rho = isotropic_rho(d, p)
            eye = np.eye(d)
            four = block_basis_vectors(d, k, "fourier")
            brute_k, _ = brute_block_error_vectors(brute_joint(rho, eye, eye), d, k)
            brute_t, _ = brute_block_error_vectors(brute_joint(rho, four, [v.conj() for v in four]), d, k)
            for vec in (*brute_t, *brute_k):
                np.testing.assert_allclose(vec, expected, atol=1e-12)
            report = keyrate_subspace(isotropic_state(d, p), d, k)
            for rate in report.per_subspace:
                np.testing.assert_allclose(rate.e_k, expected, atol=1e-12)
                np.testing.assert_allclose(rate.e_t, expected, atol=1e-12)


def _within_3sigma(estimate, analytic):
    for vec, n, ref in zip(estimate.error_vectors, estimate.block_counts, analytic):
        ref = np.asarray(ref)
        sigma = np.sqrt(ref * (1 - ref) / n)
        if np.any(np.abs(np.asarray(vec) - ref) > 3 * sigma + 1e-15):
            return False
    return True


@pytest.mark.slow
@criterion(6, "Monte Carlo error vectors within 3 sigma in >= 95% of 100 trials; accidental totals")
def test_montecarlo_convergence():
    start = time.perf_counter()
    d, k, p, n, duration = 8, 4, 0.15, 1_000_000, 1.0
    part = SubspacePartition.contiguous(d, k)
    analytic = keyrate_subspace(isotropic_state(d, p), d, k)
    comp = computational_basis(d)
    test = subspace_test_basis(d, part)
    ideal = max_entangled_state(d)
    settings = {
        "key": (joint_probabilities(ideal, comp, comp), [r.e_k for r in analytic.per_subspace]),
        "test": (joint_probabilities(ideal, test, conjugate_basis(test)), [r.e_t for r in analytic.per_subspace]),
    }
    # accidentals at a rate making up the fraction p of 1e6 coincidences
    source = SourceModel((1 - p) * n / duration)
    noise = NoiseInjection(singles_rate_for_accidentals(d, p * n / duration, source.window))
    expected_acc = accidental_coincidence_rate(d, noise.singles_rate, source.window) * duration
    assert expected_acc == pytest.approx(p * n, rel=1e-9)
    background_only = SourceModel(0.0)

    hits = {label: 0 for label in settings}
    acc_ok = 0
    trials = 100
    for seed in range(trials):
        for b, (label, (dist, ref)) in enumerate(settings.items()):
            table = simulate_run(dist, source, noise, duration, seed=1000 * seed + b)
            hits[label] += _within_3sigma(estimate_from_counts(table, part), ref)
        acc = simulate_run(settings["key"][0], background_only, noise, duration, seed=10**6 + seed).total
        acc_ok += abs(acc - expected_acc) <= 3 * math.sqrt(expected_acc)
    elapsed = time.perf_counter() - start
    assert all(h >= 0.95 * trials for h in hits.values()), hits
    assert acc_ok >= 0.95 * trials, acc_ok
    assert elapsed < 60.0


@criterion(7, "cascade golden rows verify within 1e-10; projector sets complete")
def test_cascade_golden():
    start = time.perf_counter()
    tables = load_golden_tables()
    assert {t["table"] for t in tables} == {"S1", "S2", "S3", "S4", "S5"}
    dk = set()
    for spec in tables:
        net = load_network(spec["network"])
        dk.add((net.d_in, spec["k"]))
        for row in spec["rows"]:
            result = verify_table(net, row["angles"], row["detectors"], atol=1e-10)
            assert all(r["pass"] and r["deviation"] <= 1e-10 for r in result.values()), (spec["table"], row["basis"])
            proj = detector_projectors(net.with_angles(row["angles"]))
            assert is_complete_measurement(proj, net.d_in, atol=1e-10)
    assert dk == {(2, 2), (4, 4), (4, 2), (8, 4), (8, 2)}
    assert time.perf_counter() - start < 1.0


@criterion(8, "isotropic curves: k ordering at p=0, decreasing in p, crossover ordering")
def test_curve_structure():
    start = time.perf_counter()
    clean = {k: analytic_bpsc(8, k, 0.0) for k in (2, 4, 8)}
    assert clean[8] > clean[4] > clean[2]
    grid = np.linspace(0, 0.99, 34)
    for d, k in DK:
        values = [analytic_bpsc(d, k, p) for p in grid]
        assert np.all(np.diff(values) < 0), (d, k)
    cross = {k: zero_rate_crossover(8, k) for k in (2, 4, 8)}
    assert cross[2] > cross[4] > cross[8]
    assert time.perf_counter() - start < 5.0
