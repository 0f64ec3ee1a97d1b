"""Acceptance suite: one check per criterion, each printed as a PASS/FAIL line.

Run standalone with ``python3 -m tests.test_acceptance`` or through pytest, which
prints the same lines in its terminal summary.
"""

import json
import math
import os
import random
import subprocess
import sys
import tempfile
import time

import numpy as np
import pytest

from hetcast.baselines import baseline_report
from hetcast.chunked import ChunkConfig, expected_delivery_chunked
from hetcast.cli import main as cli_main, sweep_rows
from hetcast.degree_model import (DegreeDistribution, Scenario, expected_ripple, lt_analysis, lt_delivery_time,
                                  lt_recoverable_fraction, side_info_transform)
from hetcast.galois import GF2Eliminator
from hetcast.lt_codec import EncoderConfig, BpDecoderState, lt_encode_next
from hetcast.optimizer import optimize_scenario
from hetcast.sim import SchemeParams, average_runs

TWO_USER = Scenario(1024, ((15 / 16, 0.1), (9 / 16, 0.5)), 32)
RESULTS = {}


def record(num, title, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    RESULTS[num] = f"[{'PASS' if ok else 'FAIL'}] {num:>2}. {title}: {detail} ({elapsed:.1f}s / {budget:.0f}s)"
    return ok


def check_lp_nonsystematic():
    t = time.perf_counter()
    r = optimize_scenario(TWO_USER)
    el = time.perf_counter() - t
    ref = np.array([0.0195, 0.7814, 0.1991])
    p = np.array([r.dist.p(j) for j in (1, 2, 3)])
    linf = float(np.max(np.abs(p - ref)))
    tail = 1.0 - float(p.sum())
    ok = abs(r.t0 - 1.5178) <= 0.01 and linf <= 0.02 and tail < 0.02
    return record(1, "LP nonsystematic", ok, f"t0={r.t0:.4f} (1.5178+-0.01), Linf={linf:.4f}, tail={tail:.4f}",
                  el, 5)


def check_lp_systematic():
    t = time.perf_counter()
    r = optimize_scenario(TWO_USER, systematic=True)
    el = time.perf_counter() - t
    p = {j: r.dist.p(j) for j in range(1, r.dist.dmax + 1)}
    ref = {2: 0.7061, 3: 0.2939}
    linf = max(abs(p.get(j, 0.0) - ref.get(j, 0.0)) for j in set(p) | set(ref))
    ok = abs(r.t0 - 1.2488) <= 0.01 and linf <= 0.02
    return record(2, "LP systematic", ok, f"t0={r.t0:.4f} (1.2488+-0.01), Linf={linf:.4f}", el, 5)


def check_baselines():
    t = time.perf_counter()
    rep = baseline_report(TWO_USER)
    lp = optimize_scenario(TWO_USER).t0
    el = time.perf_counter() - t
    exact = (abs(rep.lower_bound - 1.125) <= 1e-4 and abs(rep.unicast_total - 2.1667) <= 1e-4
             and abs(rep.timeshare - 1.5417) <= 1e-4)
    gap = abs(rep.timeshare - lp)
    return record(3, "baselines", exact and gap <= 0.05,
                  f"{rep.lower_bound:.4f}/{rep.unicast_total:.4f}/{rep.timeshare:.4f}, |timeshare-LP|={gap:.4f}",
                  el, 5)


def check_chunked_analytics():
    t = time.perf_counter()
    single = max(abs(expected_delivery_chunked(1, 1, h, 0.0) - h) for h in (1, 8, 64))
    cc = expected_delivery_chunked(16, 16, 1, 0.0)
    scale = max(abs(expected_delivery_chunked(n, k, h, e) * (1 - e) - expected_delivery_chunked(n, k, h, 0.0))
                / expected_delivery_chunked(n, k, h, 0.0)
                for n, k, h in ((4, 2, 4), (16, 9, 64)) for e in (0.1, 0.5, 0.9))
    el = time.perf_counter() - t
    ok = single <= 1e-6 and abs(cc - 54.0917) <= 0.01 and scale <= 1e-14
    return record(4, "chunked analytics", ok, f"max|E(1,1,h)-h|={single:.1e}, E(16,16,1)={cc:.4f}, "
                  f"scaling err={scale:.1e}", el, 1)


def check_chunked_monte_carlo(runs=1000):
    t = time.perf_counter()
    worst, parts = 0.0, []
    for n, k, h in ((4, 2, 4), (8, 8, 8), (16, 9, 64)):
        for eps in (0.0, 0.5):
            s = Scenario(n * h, ((k / n, eps),), payload_bytes=0)
            r = average_runs("chunked", s, SchemeParams(chunks=ChunkConfig(n, h, 256)), runs, 2024,
                             keep_trajectories=False)
            ana = expected_delivery_chunked(n, k, h, eps)
            err = abs(r.user_mean[0] * n * h / ana - 1) if r.incomplete_runs == 0 else math.inf
            worst = max(worst, err)
            parts.append(f"({n},{k},{h},{eps}):{100 * err:.2f}%")
    el = time.perf_counter() - t
    return record(5, "chunked Monte-Carlo", worst <= 0.03, f"worst {100 * worst:.2f}% <= 3%; " + " ".join(parts),
                  el, 60)


def check_bp_ge_oracle(min_prefixes=10_000):
    t = time.perf_counter()
    rng = random.Random(17)
    prefixes = violations = wrong = 0
    session = 0
    while prefixes < min_prefixes:
        n = rng.randrange(2, 17)
        w = [rng.random() for _ in range(min(n, 5))]
        dist = DegreeDistribution(np.array(w) / sum(w))
        data = [bytes(rng.randrange(256) for _ in range(4)) for _ in range(n)]
        cfg = EncoderConfig(n, dist, master_seed=session, systematic=rng.random() < 0.3)
        bp, ge = BpDecoderState(n, 4), GF2Eliminator(n, 4)
        for step in range(3 * n):
            pkt = lt_encode_next(cfg, data, step)
            bp.ingest(pkt)
            ge.add_row(sum(1 << i for i in pkt.neighbours(n)), pkt.payload)
            dec = bp.decoded_set()
            gset = {j for j in range(n) if ge.is_decodable(j)}
            violations += not dec <= gset
            wrong += sum(bp.payload(j) != data[j] for j in dec)
            wrong += sum(ge.payload(j) != data[j] for j in gset)
            prefixes += 1
        session += 1
    el = time.perf_counter() - t
    return record(6, "BP subset of GE", violations == 0 and wrong == 0,
                  f"{prefixes} prefixes over {session} sessions, {violations} subset violations, "
                  f"{wrong} wrong payloads", el, 30)


def check_lt_simulation(runs=100):
    t = time.perf_counter()
    worst, parts = 0.0, []
    for scheme, systematic in (("lt", False), ("lt-sys", True)):
        dist = optimize_scenario(TWO_USER, systematic).dist
        ana = lt_analysis(dist, TWO_USER, systematic).t
        r = average_runs(scheme, TWO_USER, SchemeParams(dist=dist), runs, 7, keep_trajectories=False)
        for i in range(2):
            err = abs(r.user_mean[i] / ana[i] - 1) if r.incomplete_runs == 0 else math.inf
            worst = max(worst, err)
            parts.append(f"{scheme} u{i}: {r.user_mean[i]:.4f} vs {ana[i]:.4f}")
    el = time.perf_counter() - t
    return record(7, "LT simulation vs analysis", worst <= 0.05, f"worst {100 * worst:.2f}% <= 5%; "
                  + "; ".join(parts), el, 120)


def sweep_table():
    values = [k / 16 for k in range(1, 16)]
    rows = sweep_rows(TWO_USER, 1, values, ("lt", "lt-sys", "growth", "chunked"), jobs=os.cpu_count() or 1)
    table = {}
    for _, z, scheme, tval, _ in rows:
        table.setdefault(float(z), {})[scheme] = float(tval)
    return table


def check_sweep(table=None):
    t = time.perf_counter()
    table = table or sweep_table()
    el = time.perf_counter() - t
    zs = sorted(table)
    fails = []
    low = [z for z in zs if z <= 0.5 + 1e-12]
    if any(table[z]["lt-sys"] > table[z]["lt"] + 1e-9 for z in low):
        fails.append("a: sys > nonsys below z2=0.5")
    margin = table[zs[0]]["lt"] - table[zs[0]]["lt-sys"]
    if margin < 0.05:
        fails.append(f"a: margin {margin:.4f} < 0.05 at z2=1/16")
    if any(min(table[z]["lt"], table[z]["lt-sys"]) < table[z]["lower_bound"] - 1e-9 for z in zs):
        fails.append("b")
    if any(min(table[z]["growth"], table[z]["chunked"]) < table[z]["lt"] - 1e-9 for z in zs):
        fails.append("c")
    gap_end = abs(table[zs[-1]]["lt"] - table[zs[-1]]["lt-sys"])
    if gap_end > 0.03:
        fails.append(f"d: |sys-nonsys|={gap_end:.4f} > 0.03 at z2=15/16")
    detail = "all of (a)-(d) hold" if not fails else "; ".join(fails)
    return record(8, "sweep properties", not fails, detail, el, 600)


def check_invariants():
    t = time.perf_counter()
    rng = np.random.default_rng(5)
    bad = []
    for _ in range(300):
        w = rng.random(rng.integers(1, 9))
        d = DegreeDistribution(w / w.sum())
        z, eps, v = rng.uniform(0.05, 0.95), rng.uniform(0, 0.9), rng.uniform(0, 20)
        td = lt_delivery_time(d, z, eps)
        if math.isfinite(td):
            if lt_recoverable_fraction(d, td, eps) < z - 1e-3:
                bad.append("round-trip")
            if abs(td * (1 - eps) - lt_delivery_time(d, z, 0.0)) > 1e-12 * td:
                bad.append("(1-eps)t invariance")
        if expected_ripple(d, v, 1.0) != v * d.p(1):
            bad.append("ripple u=1")
        e = rng.uniform(0.01, 0.99)
        tt, y = rng.uniform(1, 5), 1 - e + e * rng.uniform(0.001, 0.999)
        x = (y - 1 + e) / e
        lhs = (1 - e) * ((tt - 1) / e) * side_info_transform(d, e).derivative(x) + math.log1p(-x)
        rhs = -math.log(e) + (1 - e) * (tt - 1) * d.derivative(y) + math.log1p(-y)
        if abs(lhs - rhs) > 1e-12 * max(1.0, abs(rhs)):
            bad.append("transform identity")
    for systematic in (False, True):
        base = optimize_scenario(TWO_USER, systematic).t0
        if base - optimize_scenario(TWO_USER, systematic, dmax_override=30).t0 >= 1e-3:
            bad.append("dmax sufficiency")
        if abs(base - optimize_scenario(TWO_USER, systematic, grid_step=1e-4).t0) >= 1e-3:
            bad.append("grid refinement")
    el = time.perf_counter() - t
    detail = "round-trip, scaling, ripple, transform, dmax, grid all hold" if not bad else ", ".join(sorted(set(bad)))
    return record(9, "invariant suites", not bad, detail, el, 60)


def check_determinism():
    t = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        scen = os.path.join(tmp, "s.json")
        with open(scen, "w") as fh:
            json.dump({"N": 256, "users": [{"z": "15/16", "eps": 0.1}, {"z": "9/16", "eps": 0.5}]}, fh)
        blobs = []
        for k in range(2):
            out = os.path.join(tmp, f"o{k}.csv")
            cli_main(["simulate", "--scenario", scen, "--scheme", "lt", "--runs", "10", "--seed", "42",
                      "--out", out])
            blobs.append(open(out, "rb").read())
        out = os.path.join(tmp, "o2.csv")
        subprocess.run([sys.executable, "-m", "hetcast", "simulate", "--scenario", scen, "--scheme", "lt",
                        "--runs", "10", "--seed", "42", "--out", out], check=True)
        blobs.append(open(out, "rb").read())
    el = time.perf_counter() - t
    return record(10, "CLI determinism", len(set(blobs)) == 1 and len(blobs[0]) > 0,
                  f"{len(blobs)} invocations, {len(set(blobs))} distinct outputs", el, 60)


CHECKS = [check_lp_nonsystematic, check_lp_systematic, check_baselines, check_chunked_analytics,
          check_chunked_monte_carlo, check_bp_ge_oracle, check_lt_simulation, check_sweep, check_invariants,
          check_determinism]


def test_criterion_01_lp_nonsystematic():
    assert check_lp_nonsystematic(), RESULTS[1]


def test_criterion_02_lp_systematic():
    assert check_lp_systematic(), RESULTS[2]


def test_criterion_03_baselines():
    assert check_baselines(), RESULTS[3]


def test_criterion_04_chunked_analytics():
    assert check_chunked_analytics(), RESULTS[4]


@pytest.mark.slow
def test_criterion_05_chunked_monte_carlo():
    assert check_chunked_monte_carlo(), RESULTS[5]


def test_criterion_06_bp_ge_oracle():
    assert check_bp_ge_oracle(), RESULTS[6]


@pytest.mark.slow
def test_criterion_07_lt_simulation():
    assert check_lt_simulation(), RESULTS[7]


@pytest.mark.slow
def test_criterion_08_sweep():
    assert check_sweep(), RESULTS[8]


def test_criterion_09_invariants():
    assert check_invariants(), RESULTS[9]


def test_criterion_10_determinism():
    assert check_determinism(), RESULTS[10]


if __name__ == "__main__":
    passed = sum(bool(check()) for check in CHECKS)
    for k in sorted(RESULTS):
        print(RESULTS[k])
    print(f"{passed}/{len(CHECKS)} criteria pass")
    sys.exit(0 if passed == len(CHECKS) else 1)
