"""Acceptance gate: eleven end-to-end criteria with pinned tolerances.

Each test prints a single ``ACCEPTANCE <n>: PASS|FAIL`` line so the gate
can be scanned from the captured output. Criteria 2, 3, 5 and 6 share one
bank of 1000 seeded tie-free populations.
"""

import json
import math
import time

import numpy as np
import pytest

from qvkit import attacks, metrics, transform, utility as util
from qvkit.cli import main as cli_main
from qvkit.schemes import BallotProfile, SchemeSpec
from qvkit.stake import canonicalize
from tests.conftest import seeded_population

import io

SLACK = 1e-12
GAMMAS = (0.1, 0.3, 0.5, 0.7, 0.9)

_POPULATIONS = None


def populations():
    global _POPULATIONS
    if _POPULATIONS is None:
        _POPULATIONS = [seeded_population(seed) for seed in range(1000)]
    return _POPULATIONS


def report(num, ok, detail=""):
    print(f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"acceptance criterion {num} failed {detail}"


def test_acceptance_01_collusion_example():
    honest = [BallotProfile(f"v{i}", tuple(1.0 if j == i else 0.0
                                           for j in range(3)))
              for i in range(3)]
    colluding = [BallotProfile(f"v{i}", (1 / 3, 1 / 3, 1 / 3))
                 for i in range(3)]
    attacks.collusion_gain([1.0] * 3, 3, honest, colluding)  # warm caches
    start = time.perf_counter()
    rep = attacks.collusion_gain([1.0] * 3, 3, honest, colluding)
    elapsed = time.perf_counter() - start
    ok = (
        all(abs(v - 1.0) <= SLACK for v in rep.baseline)
        and all(abs(v - math.sqrt(3)) <= SLACK for v in rep.attacked)
        and abs(rep.gain - math.sqrt(3)) <= SLACK
        and elapsed < 1e-3
    )
    report(1, ok, f"(gain={rep.gain}, elapsed={elapsed:.6f}s)")


def test_acceptance_02_split_ratio_suite():
    start = time.perf_counter()
    violations = 0
    for dist in populations():
        stakes = dist.stakes()
        roots = np.sqrt(stakes)
        t = metrics.eta_threshold(dist)
        for gamma in GAMMAS:
            r = metrics.rvr_split(dist, gamma)
            e = metrics.eta(dist, gamma)
            # stmt 1: strictly increasing ratios
            if not np.all(np.diff(r) > -SLACK):
                violations += 1
            # stmt 2: endpoints
            if not (e[0] > 1 - SLACK and e[-1] < 1 + SLACK):
                violations += 1
            # stmts 3-4: gainers form a prefix
            if not np.all(np.diff((e > 1).astype(int)) <= 0):
                violations += 1
            # stmt 5: eta strictly decreasing
            if not np.all(np.diff(e) < SLACK):
                violations += 1
            # stmt 6: threshold criterion at gamma = 0.5
            if gamma == 0.5:
                decided = np.abs(e - 1) > SLACK
                if not np.all((e[decided] > 1) == (roots[decided] < t)):
                    violations += 1
        if not np.all(np.diff(metrics.rvr_split(dist, 1.0)) > -SLACK):
            violations += 1
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 10.0
    report(2, ok, f"(violations={violations}, elapsed={elapsed:.2f}s)")


def test_acceptance_03_unsplit_ratio_suite():
    violations = 0
    for seed, dist in enumerate(populations()):
        counts = np.random.Generator(np.random.PCG64(10_000 + seed)) \
            .integers(1, 11, dist.n)
        ul = metrics.rvr_unsplit(dist, counts, 1.0)
        for gamma in GAMMAS:
            u = metrics.rvr_unsplit(dist, counts, gamma)
            # stmt 1: order preserved within equal vote counts
            for c in np.unique(counts):
                if not np.all(np.diff(u[counts == c]) > -SLACK):
                    violations += 1
            # stmt 2: endpoints against linear
            if not (u[0] > ul[0] - SLACK and u[-1] < ul[-1] + SLACK):
                violations += 1
            # stmts 3-4: gainers form a prefix
            if not np.all(np.diff((u > ul).astype(int)) <= 0):
                violations += 1
    report(3, violations == 0, f"(violations={violations})")


def test_acceptance_04_gini_oracle_equivalence():
    rng = np.random.Generator(np.random.PCG64(404))
    worst = 0.0
    for trial in range(1000):
        n = int(rng.integers(1, 120))
        credits = rng.uniform(0, 100, n)
        if trial % 3 == 0 and n > 2:          # inject ties
            credits[: n // 2] = credits[0]
        if trial % 5 == 0:                    # inject zeros
            credits[: max(1, n // 4)] = 0.0
        if credits.sum() == 0:
            credits[-1] = 1.0
        credits = np.sort(credits)
        g1 = metrics.gini(credits)
        g2 = metrics.gini_from_lorenz(credits)
        worst = max(worst, abs(g1 - g2) / max(1e-15, abs(g1)))
        if not math.isclose(g1, g2, rel_tol=1e-12, abs_tol=1e-15):
            report(4, False, f"(trial={trial}, g1={g1}, g2={g2})")
    report(4, True, f"(worst rel dev={worst:.2e})")


def test_acceptance_05_gini_strict_improvement():
    violations = 0
    for dist in populations():
        stakes = dist.stakes()
        g_lin = metrics.gini(stakes)
        for gamma in GAMMAS:
            if not metrics.gini(stakes ** gamma) < g_lin:
                violations += 1
    equal = np.full(7, 3.0)
    equality_ok = all(metrics.gini(equal ** gamma) == metrics.gini(equal) == 0.0
                      for gamma in GAMMAS)
    ok = violations == 0 and equality_ok
    report(5, ok, f"(violations={violations}, equal-stakes ok={equality_ok})")


def test_acceptance_06_nakamoto_never_degrades():
    violations = 0
    thresholds = (0.33, 0.51, 0.67, 0.9)
    for dist in populations():
        stakes = dist.stakes()
        base = {a: metrics.nakamoto(stakes, a) for a in thresholds}
        for gamma in GAMMAS:
            credits = stakes ** gamma
            for a in thresholds:
                if metrics.nakamoto(credits, a) < base[a]:
                    violations += 1
    # documented equality case: one dominant voter stays dominant
    pair = np.array([1.0, 100.0])
    tie = (metrics.nakamoto(pair ** 0.5, 0.9) == 1
           and metrics.nakamoto(pair, 0.9) == 1)
    ok = violations == 0 and tie
    report(6, ok, f"(violations={violations}, equality case={tie})")


def test_acceptance_07_gamma_search():
    rng = np.random.Generator(np.random.PCG64(707))
    ok = True
    detail = ""
    for trial in range(200):
        dist = seeded_population(5000 + trial)
        k = int(rng.integers(1, min(6, dist.n)))  # keep k < n so floor < 1
        floor = k / dist.n
        current = transform.top_share(dist, k, 1.0)
        alpha = floor + float(rng.uniform(0.1, 0.9)) * (current - floor)
        result = transform.gamma_search(dist, k, alpha)
        if not (result.converged and result.iterations <= 200
                and abs(result.achieved_share - alpha) <= 1e-9):
            ok, detail = False, f"(trial={trial} did not converge cleanly)"
            break
        if trial % 10 == 0:
            other = transform.gamma_search(dist, k, alpha,
                                           bracket=(1e-7, 0.999))
            if abs(other.gamma - result.gamma) >= 1e-8:
                ok, detail = False, f"(trial={trial} bracket-sensitive)"
                break
    closed = transform.gamma_search(canonicalize([("a", 1), ("b", 99)]),
                                    1, 0.6)
    if abs(closed.gamma - math.log(1.5) / math.log(99)) > 1e-6:
        ok, detail = False, f"(closed-form case gamma={closed.gamma})"
    report(7, ok, detail)


def _random_problem(rng, scheme, m):
    b = rng.uniform(0.1, 10.0, m)
    a = b * rng.uniform(0.0, 0.95, m)
    return util.UtilityProblem(profits=tuple(rng.uniform(0.1, 10.0, m)),
                               aligned=tuple(a), total=tuple(b),
                               stake=float(rng.uniform(0.5, 50.0)),
                               scheme=scheme)


def test_acceptance_08_solver_vs_oracle():
    rng = np.random.Generator(np.random.PCG64(808))
    start = time.perf_counter()
    ok = True
    detail = ""
    for scheme in ("qv1", "qv2"):
        for trial in range(200):
            m = 2 if trial % 2 == 0 else 3
            problem = _random_problem(rng, scheme, m)
            sol = util.maximize(problem)
            oracle = util.brute_force_oracle(problem, resolution=120)
            if sol.utility < oracle.utility - 1e-6 * (1 + abs(oracle.utility)):
                ok, detail = False, f"({scheme} trial {trial}: below oracle)"
                break
            if not sol.degenerate and sol.kkt_residual > 1e-8:
                ok, detail = False, f"({scheme} trial {trial}: kkt residual)"
                break
        # symmetric instance: all coordinates must agree
        sym = util.UtilityProblem((4.0,) * 3, (1.0,) * 3, (3.0,) * 3,
                                  7.0, scheme)
        x = np.array(util.maximize(sym).allocation)
        if np.ptp(x) > 1e-9:
            ok, detail = False, f"({scheme}: symmetric spread {np.ptp(x)})"
        # m = 1: the forced point, exactly
        single = util.UtilityProblem((2.0,), (0.0,), (1.0,), 9.0, scheme)
        if util.maximize(single).allocation[0] != 3.0:
            ok, detail = False, f"({scheme}: m=1 not exact)"
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    report(8, ok, detail or f"(elapsed={elapsed:.1f}s)")


def test_acceptance_09_gradient_check():
    rng = np.random.Generator(np.random.PCG64(909))
    ok = True
    h = 1e-6
    for scheme in ("qv1", "qv2"):
        for _ in range(20):
            problem = _random_problem(rng, scheme, 3)
            x = rng.uniform(0.05, 3.0, 3)
            grad = util.gradient(problem, x)
            for r in range(3):
                xp, xm = x.copy(), x.copy()
                xp[r] += h
                xm[r] -= h
                fd = (util.utility(problem, xp)
                      - util.utility(problem, xm)) / (2 * h)
                if abs(fd - grad[r]) > 1e-5 * max(1.0, abs(grad[r])):
                    ok = False
    report(9, ok)


def test_acceptance_10_sybil_closed_form():
    ok = True
    schemes = [SchemeSpec(f) for f in ("qv1", "qv2", "qv3")]
    for k in range(1, 101):
        for s in (0.5, 1.0, 9.0, 1e6):
            for scheme in schemes:
                gain = attacks.sybil_gain(scheme, s, k)
                if abs(gain - math.sqrt(k)) > 1e-12 * math.sqrt(k):
                    ok = False
            if attacks.sybil_gain(SchemeSpec("linear"), s, k) != 1.0:
                ok = False
    report(10, ok)


def test_acceptance_11_cli_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("QVKIT_SEED", raising=False)
    stakes = tmp_path / "stakes.csv"
    stakes.write_text("voter_id,stake\na,1\nb,4\nc,9\n")
    ballots = tmp_path / "ballots.json"
    ballots.write_text(json.dumps([
        {"voter_id": "a", "allocations": [1, 0]},
        {"voter_id": "b", "allocations": [0, 2]},
        {"voter_id": "c", "allocations": [2, 1]},
    ]))
    problem = tmp_path / "problem.json"
    problem.write_text(json.dumps({"profits": [10, 1], "aligned": [0, 0],
                                   "total": [1, 1], "stake": 1.0}))
    scenario = tmp_path / "sybil.json"
    scenario.write_text(json.dumps({"scheme": "qv2", "stake": 9.0, "k": 9}))
    goldens = [
        ["generate", "--kind", "pareto", "--n", "50", "--seed", "11"],
        ["metrics", "--stakes", str(stakes), "--gamma", "0.5",
         "--nakamoto", "0.33", "0.51"],
        ["lorenz", "--stakes", str(stakes), "--gamma", "0.5",
         "--format", "json"],
        ["gamma-search", "--stakes", str(stakes), "--k", "1",
         "--alpha", "0.5"],
        ["tally", "--scheme", "qv2", "--stakes", str(stakes),
         "--ballots", str(ballots), "--proposals", "2"],
        ["optimize", "--scheme", "qv1", "--problem", str(problem),
         "--oracle-check"],
        ["attack", "sybil", "--scenario", str(scenario)],
    ]
    ok = True
    for argv in goldens:
        runs = []
        for _ in range(2):
            out = io.StringIO()
            code = cli_main(argv, stdout=out, stderr=io.StringIO())
            runs.append((code, out.getvalue()))
        if runs[0] != runs[1] or runs[0][0] != 0:
            ok = False
    report(11, ok)
