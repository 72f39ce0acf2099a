"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
go by.  Timed criteria measure warm-kernel runtime: the compiled kernels
are exercised once by a module fixture first, mirroring how the library
behaves in any process that has already issued a solve.
"""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from _oracles import hoeffding_scan

import pbextremal as pbx
from pbextremal import cli
from pbextremal.moments import coeff_rows_via_derivative
from pbextremal.oracle import OracleConfig, oracle_optimize


def check(num, desc, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num}: {desc}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num} failed: {desc} {detail}"


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    # first calls trigger JIT compilation / cache loads; timing below is warm
    pbx.bc_pmf([0.3, 0.6])
    req = pbx.SolveRequest(n=3, g=pbx.Payoff([0, 1, 0, 1]),
                           spec=pbx.CumulantSpec(r=2, c=(1.4, 0.5)), direction="max")
    pbx.solve_extremal(req)
    oracle_optimize(3, [0, 1, 0, 1], [1.4, 1.0], "max", OracleConfig(n_starts=4, seed=0))


def solve(n, g, r, c, direction="max", **kw):
    req = pbx.SolveRequest(
        n=n, g=pbx.Payoff(g), spec=pbx.CumulantSpec(r=r, c=tuple(c)),
        direction=direction, **kw,
    )
    return pbx.solve_extremal(req)


def test_c01_hypergeometric_fixture():
    eps = 1.0 / (2.0 * math.sqrt(3.0))
    p = [0.5 + eps, 0.5 - eps]
    expected = [
        float(Fraction(math.comb(2, k) * math.comb(2, 2 - k), math.comb(4, 2)))
        for k in range(3)
    ]
    pmf = pbx.bc_pmf(p)
    err = float(np.max(np.abs(pmf.weights - expected)))
    elapsed = min(
        (lambda t0: (pbx.bc_pmf(p), time.perf_counter() - t0))(time.perf_counter())[1]
        for _ in range(5)
    )
    check(1, "hypergeometric two-factor pmf equals counting oracle",
          err <= 1e-12 and elapsed < 1e-3,
          f"max err {err:.2e}, runtime {elapsed * 1e3:.3f} ms")


def test_c02_bernoulli_cumulant_closed_forms():
    closed = (
        lambda p: p,
        lambda p: p * (1 - p),
        lambda p: p * (1 - p) * (1 - 2 * p),
        lambda p: p * (1 - p) * (1 - 6 * p * (1 - p)),
    )
    worst = 0.0
    for p in np.linspace(0.0, 1.0, 11):
        got = pbx.bernoulli_cumulants(p, 4)
        want = np.array([f(p) for f in closed])
        worst = max(worst, float(np.max(np.abs(got - want))))
    rows_ok = pbx.bernoulli_cumulant_coeffs(4).rows == (
        (1,), (1, -1), (1, -3, 2), (1, -7, 12, -6),
    )
    check(2, "first four Bernoulli cumulants match closed forms, rows exact",
          worst <= 1e-13 and rows_ok, f"max err {worst:.2e}")


def test_c03_transform_roundtrips():
    # The Thiele roundtrip is checked in the direction its contract states
    # (recovering cumulants fed through the moment map): starting instead
    # from arbitrary moment vectors in [-5,5] produces cumulants of
    # magnitude ~1e6 whose float64 storage alone exceeds the tolerance,
    # for every implementation.
    rng = np.random.default_rng(12)
    worst_thiele = worst_ks = worst_newton = 0.0
    for _ in range(100):
        r = int(rng.integers(1, 7))
        v = rng.uniform(-5, 5, r)
        back = pbx.cumulants_from_moments(pbx.moments_from_cumulants(v))
        worst_thiele = max(worst_thiele, float(np.max(np.abs(back - v))))
        back = pbx.cumulants_to_power_sums(pbx.power_sums_to_cumulants(v))
        worst_ks = max(worst_ks, float(np.max(np.abs(back - v))))
        back = pbx.power_sums_to_cumulants(pbx.cumulants_to_power_sums(v))
        worst_ks = max(worst_ks, float(np.max(np.abs(back - v))))
    for _ in range(100):
        n = int(rng.integers(1, 11))
        x = rng.uniform(-2, 2, n)
        via_newton = pbx.newton_E_from_S(pbx.power_sums(x, n), n)
        direct = pbx.elementary_symmetric(x)[1:]
        scale = np.maximum(np.abs(direct), 1e-2)
        worst_newton = max(worst_newton, float(np.max(np.abs(via_newton - direct) / scale)))
    check(3, "Thiele and cumulant<->power-sum maps invert; Newton identities match",
          worst_thiele <= 1e-11 and worst_ks <= 1e-11 and worst_newton <= 1e-10,
          f"thiele {worst_thiele:.2e}, K/S {worst_ks:.2e}, newton rel {worst_newton:.2e}")


def test_c04_two_route_cumulants_and_additivity():
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        r = int(rng.integers(1, 6))
        p = rng.random(n)
        via_table = pbx.power_sums_to_cumulants(pbx.power_sums(p, r))
        via_pmf = pbx.cumulants_from_moments(pbx.bc_pmf(p).raw_moments(r))
        worst = max(worst, float(np.max(np.abs(via_table - via_pmf))))
    worst_add = 0.0
    for _ in range(50):
        p = rng.random(int(rng.integers(1, 5)))
        q = rng.random(int(rng.integers(1, 5)))
        joint = pbx.cumulants_from_moments(pbx.bc_pmf(np.concatenate([p, q])).raw_moments(5))
        split = (pbx.cumulants_from_moments(pbx.bc_pmf(p).raw_moments(5))
                 + pbx.cumulants_from_moments(pbx.bc_pmf(q).raw_moments(5)))
        worst_add = max(worst_add, float(np.max(np.abs(joint - split))))
    check(4, "power-sum route equals pmf-moment route; cumulants add",
          worst <= 1e-9 and worst_add <= 1e-10,
          f"two-route {worst:.2e}, additivity {worst_add:.2e}")


def test_c05_fubini_identity():
    rng = np.random.default_rng(13)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        p = rng.random(n)
        g = rng.uniform(-2, 2, n + 1)
        lhs = pbx.expectation_via_elementary(p, pbx.payoff_newton_coeffs(g))
        rhs = pbx.expectation(pbx.bc_pmf(p), g)
        worst = max(worst, abs(lhs - rhs))
    check(5, "binomial-basis expectation equals pmf expectation",
          worst <= 1e-10, f"max err {worst:.2e}")


def test_c06_one_cumulant_tail_bounds():
    n = 4
    t0 = time.perf_counter()
    worst_scan = worst_oracle = 0.0
    blocks_ok = True
    runs = 0
    for m in (1, 2, 3, 4):
        g = [1.0 if x >= m else 0.0 for x in range(n + 1)]
        for c1 in (0.5, 1.0, 2.0, 3.5):
            res = solve(n, g, 1, [c1], "max")
            blocks_ok &= res.candidate.interior_count <= 1
            scan = hoeffding_scan(n, g, c1, "max")
            worst_scan = max(worst_scan, abs(res.value - scan))
            ores = oracle_optimize(n, g, [c1], "max", OracleConfig(n_starts=60, seed=4000 + runs))
            worst_oracle = max(worst_oracle, abs(res.value - ores.value))
            runs += 1
    elapsed = time.perf_counter() - t0
    check(6, "one prescribed mean: tail bounds match dense scan and oracle",
          worst_scan <= 1e-8 and worst_oracle <= 1e-5 and blocks_ok and elapsed < 1.0,
          f"scan {worst_scan:.2e}, oracle {worst_oracle:.2e}, {elapsed:.2f}s for {runs} runs")


def test_c07_two_cumulants_random_instances():
    rng = np.random.default_rng(14)
    t0 = time.perf_counter()
    worst_oracle = 0.0
    worst_dom = -np.inf
    blocks_ok = True
    for i in range(50):
        n = int(rng.choice([3, 4, 5]))
        g = rng.uniform(-1, 1, n + 1)
        p_star = rng.random(n)
        s = pbx.power_sums(p_star, 2)
        kap = pbx.power_sums_to_cumulants(s)
        res = solve(n, g, 2, kap, "max")
        blocks_ok &= res.candidate.interior_count <= 2
        val_star = pbx.expectation(pbx.bc_pmf(p_star), g)
        worst_dom = max(worst_dom, val_star - res.value)
        ores = oracle_optimize(n, g, s, "max", OracleConfig(n_starts=300, seed=7000 + i))
        worst_oracle = max(worst_oracle, abs(res.value - ores.value))
    elapsed = time.perf_counter() - t0
    check(7, "two prescribed cumulants: dominance, oracle agreement, block bound",
          worst_dom <= 1e-8 and worst_oracle <= 1e-5 and blocks_ok and elapsed < 30.0,
          f"dom {worst_dom:.2e}, oracle {worst_oracle:.2e}, {elapsed:.1f}s for 50 instances")


def test_c08_unconstrained_degenerates_to_vertex():
    rng = np.random.default_rng(15)
    ok = True
    for _ in range(20):
        n = int(rng.integers(1, 8))
        g = rng.uniform(-3, 3, n + 1)
        hi = solve(n, g, 0, [], "max")
        lo = solve(n, g, 0, [], "min")
        ok &= hi.value == float(np.max(g)) and lo.value == float(np.min(g))
        ok &= hi.candidate.blocks == () and lo.candidate.blocks == ()
        ok &= hi.candidate.n0 == int(np.argmax(g)) and lo.candidate.n0 == int(np.argmin(g))
    check(8, "no constraints: optimum is exactly the best vertex shift", ok)


def test_c09_box_wrapper():
    # f = x1 x2 on [-1,1]^2 with S_1(x) = 0, encoded by its vertex table
    g = pbx.Payoff([1.0, -1.0, 1.0])
    lo = pbx.solve_box(pbx.BoxRequest(n=2, a=-1, b=1, g=g, s_targets=(0.0,), direction="min"))
    hi = pbx.solve_box(pbx.BoxRequest(n=2, a=-1, b=1, g=g, s_targets=(0.0,), direction="max"))
    examples_ok = (
        abs(lo.value + 1.0) < 1e-12
        and lo.candidate.at_a == 1 and lo.candidate.at_b == 1 and not lo.candidate.blocks
        and abs(hi.value) < 1e-12
        and len(hi.candidate.blocks) == 1
        and hi.candidate.blocks[0][0] == 2
        and abs(hi.candidate.blocks[0][1]) < 1e-12
    )
    rng = np.random.default_rng(16)
    worst = 0.0
    for _ in range(20):
        n = int(rng.integers(2, 6))
        r = int(rng.integers(0, 3))
        p = rng.random(n)
        gt = rng.uniform(-1, 1, n + 1)
        s = pbx.power_sums(p, r)
        kap = pbx.power_sums_to_cumulants(s)
        direction = "max" if rng.random() < 0.5 else "min"
        via_box = pbx.solve_box(pbx.BoxRequest(
            n=n, a=0.0, b=1.0, g=pbx.Payoff(gt), s_targets=tuple(s), direction=direction,
        ))
        direct = solve(n, gt, r, kap, direction)
        worst = max(worst, abs(via_box.value - direct.value))
    check(9, "box wrapper: product example and unit-box consistency",
          examples_ok and worst <= 1e-13, f"identity-transform gap {worst:.2e}")


def test_c10_infeasibility_exit_codes(capsys):
    codes = []
    # mean above n
    codes.append(cli.run(["solve", "--n", "3", "--g", "tail:1", "--r", "1", "--c", "4.0"]))
    # variance above n/4 (+ margin)
    codes.append(cli.run(["solve", "--n", "4", "--g", "tail:2", "--r", "2", "--c", "2.0,1.1"]))
    out = capsys.readouterr().out
    reports = [json.loads(line) for line in out.strip().splitlines() if line.startswith("{")]
    no_numbers = all(r["status"] == "infeasible" and "value" not in r for r in reports)
    check(10, "unattainable targets exit 2 with no numeric answer",
          codes == [2, 2] and no_numbers, f"exit codes {codes}")


def test_c11_determinism_across_thread_counts(capsys, monkeypatch):
    argvs = [
        ["solve", "--n", "4", "--g", "tail:2", "--r", "1", "--c", "2.0"],
        ["solve", "--n", "4", "--g", "0.1,-0.4,0.9,0.2,-0.8", "--r", "2", "--c", "1.9,0.6"],
        ["solve", "--n", "5", "--g", "identity", "--r", "2", "--c", "2.4,0.9", "--dir", "min"],
    ]
    ok = True
    for argv in argvs:
        renders = []
        for threads in ("1", "4", "1", "4"):
            monkeypatch.setenv("PB_EXTREMAL_THREADS", threads)
            code = cli.run(argv)
            report = json.loads(capsys.readouterr().out)
            assert code == 0
            # wall time is the one legitimately run-dependent field
            report["diagnostics"].pop("wall_time_ms")
            renders.append(cli.render_json(report))
        ok &= len(set(renders)) == 1
    check(11, "identical reports for repeated runs across thread counts", ok)
