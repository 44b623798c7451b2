"""Acceptance gate: twelve pre-registered criteria, one test each.

Each criterion pins its experiment, sample sizes, tolerance, and wall
budget.  Experiments shared by several criteria run once per module
(E2 serves A2+A4, E6 serves A7+A8, E7 serves A8+A9+A10).  A one-line
verdict per criterion is echoed into the terminal summary.
"""
import random
import time

import pytest

from tests.conftest import (brute_aux, brute_height, brute_paths,
                            field_from_marks, g_flat, g_seed, g_stairs,
                            random_instance)
from osbd.cli import golden_report
from osbd.config import ExperimentConfig
from osbd.deposition import InitialCondition
from osbd.experiments import run_experiment
from osbd.lpp import (TiePolicy, auxiliary_lpp, evaluate_path, is_valid_upath,
                      lpp_height, lpp_point_to_point)

SEED = 5

VERDICTS = []


def _verdict(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, line


def _run(name, tmp_path_factory, **overrides):
    cfg = ExperimentConfig(experiment=name, preset="desk", seed=SEED,
                           out_dir=str(tmp_path_factory.mktemp(name.lower())),
                           **overrides)
    return run_experiment(cfg)


@pytest.fixture(scope="module")
def e1(tmp_path_factory):
    return _run("E1", tmp_path_factory)


@pytest.fixture(scope="module")
def e2(tmp_path_factory):
    return _run("E2", tmp_path_factory)


@pytest.fixture(scope="module")
def e4(tmp_path_factory):
    return _run("E4", tmp_path_factory)


@pytest.fixture(scope="module")
def e5(tmp_path_factory):
    return _run("E5", tmp_path_factory)


@pytest.fixture(scope="module")
def e6(tmp_path_factory):
    return _run("E6", tmp_path_factory)


@pytest.fixture(scope="module")
def e7(tmp_path_factory):
    return _run("E7", tmp_path_factory)


@pytest.fixture(scope="module")
def e8(tmp_path_factory):
    return _run("E8", tmp_path_factory)


def test_a01_reversal_identity_exact(e1):
    rec = e1.checks["exact_match"]
    ok = (rec["passed"] and rec["mismatches"] == 0
          and rec["comparisons"] == 30000 and e1.wall_clock_s < 10.0)
    _verdict("A1", ok,
             f"reversal identity {rec['comparisons'] - rec['mismatches']}"
             f"/{rec['comparisons']} exact, wall {e1.wall_clock_s:.1f}s")


def test_a02_k1_gaussian_limit(e2):
    rec = e2.checks["gaussian_k1"]
    ok = (rec["passed"] and rec["n1"] == 100000
          and e2.wall_clock_s < 60.0)
    _verdict("A2", ok,
             f"k=1 KS {rec['statistic']:.5f} < {rec['threshold']:.5f} "
             f"(sig 1e-3, N={rec['n1']}), wall {e2.wall_clock_s:.1f}s")


def test_a03_brownian_gue_identity(e8):
    rec = e8.checks["gue_limit"]
    ok = (rec["passed"] and rec["statistic"] < 0.02
          and rec["n1"] == 20000 and rec["n2"] == 20000
          and e8.wall_clock_s < 300.0)
    _verdict("A3", ok,
             f"Brownian k=3 vs eigenvalue KS {rec['statistic']:.5f} < 0.02, "
             f"wall {e8.wall_clock_s:.1f}s")


def test_a04_k2_corner_law(e2):
    rec = e2.checks["gue_k2"]
    ok = (rec["passed"] and rec["statistic"] < 0.03
          and rec["n1"] == 20000 and e2.wall_clock_s < 120.0)
    _verdict("A4", ok,
             f"k=2 height vs eigenvalue KS {rec['statistic']:.5f} < 0.03, "
             f"wall {e2.wall_clock_s:.1f}s")


def test_a05_mean_expansion_window(e4):
    rec = e4.checks["mean_window"]
    ok = (rec["passed"] and rec["abs_difference"] <= 0.35
          and e4.wall_clock_s < 300.0)
    _verdict("A5", ok,
             f"rescaled mean off reference by {rec['abs_difference']:.4f} "
             f"<= 0.35, wall {e4.wall_clock_s:.1f}s")


def test_a06_upper_tail_deficit(e5):
    r20 = e5.checks["tail_skew_x=2"]
    r25 = e5.checks["tail_skew_x=2.5"]
    ok = (r20["passed"] and r25["passed"]
          and e5.metrics["replicas"] == 1000000
          and e5.metrics["confidence"] == 0.99
          and e5.wall_clock_s < 900.0)
    _verdict("A6", ok,
             f"x=2.0: up {r20['p_upper']:.2e} < low {r20['p_lower']:.2e}; "
             f"x=2.5: up {r25['p_upper']:.2e} < low {r25['p_lower']:.2e} "
             f"(Wilson 99% disjoint), wall {e5.wall_clock_s:.1f}s")


def test_a07_wandering_exponent_band(e6):
    rec = e6.checks["slope_band"]
    lo, hi = rec["ci"]
    ok = (rec["passed"] and lo <= 0.80 and hi >= 0.55
          and set(e6.metrics["mean_sup_by_policy"])
          == {"prefer-jump", "prefer-stay"}
          and e6.wall_clock_s <= 3600.0)
    _verdict("A7", ok,
             f"slope {rec['slope']:.4f}, 95% CI [{lo:.4f}, {hi:.4f}] meets "
             f"[0.55, 0.80], wall {e6.wall_clock_s:.1f}s")


def test_a08_gap_invariants_zero_violations(e6, e7):
    v6 = e6.checks["gaps_nonneg"]["violations"]
    v7 = e7.checks["gaps_nonneg"]["violations"]
    ok = v6 == 0 and v7 == 0
    _verdict("A8", ok,
             f"gap_FS/gap_LF sign violations: {v6} (geodesic runs) "
             f"+ {v7} (coupling runs)")


def test_a09_chain_tail_bound(e7):
    rec = e7.checks["tail_bound"]
    ok = (rec["passed"] and rec["p_hat"] <= rec["bound"]
          and e7.wall_clock_s < 120.0)
    _verdict("A9", ok,
             f"P(L >= 100) = {rec['p_hat']:.2e} "
             f"({rec['exceedances']}/10^6) <= bound {rec['bound']:.3e}, "
             f"wall {e7.wall_clock_s:.1f}s")


def test_a10_curvature_grid_holds(e7):
    rec = e7.checks["parabola_grid"]
    counts = e7.metrics["parabola"]["counts"]
    all_points = all(c["holds"] == c["total"] for c in counts.values())
    ok = rec["passed"] and rec["t_threshold"] == 1.0e4 and all_points
    _verdict("A10", ok,
             f"curvature inequality holds at {sum(c['total'] for c in counts.values())}"
             f"/{sum(c['total'] for c in counts.values())} grid points, "
             f"threshold t={rec['t_threshold']:g}")


def test_a11_oracle_equivalence():
    rng = random.Random(0xA11)
    pols = (TiePolicy.PREFER_JUMP, TiePolicy.PREFER_STAY)
    t0 = time.perf_counter()
    checked = 0
    instant_steps = 0
    for i in range(1000):
        marks, t, k = random_instance(rng, lattice=(i % 3 != 2))
        marks = sorted(set(marks))
        tie_free = len({q for q, _ in marks}) == len(marks)
        fld = field_from_marks(marks, t, k)
        assert auxiliary_lpp(fld, t, k) == brute_aux(marks, t, k)
        for g, ic in ((g_flat, InitialCondition.flat()),
                      (g_seed, InitialCondition.seed()),
                      (g_stairs, InitialCondition.table(
                          (0, 0, -1, -1)[:k], in_class_i=True))):
            want, _ = brute_height(marks, g, t, k)
            for pol in pols:
                out = lpp_height(fld, ic, t, k, tie_policy=pol,
                                 keep_trace=True)
                assert out.value == want
                if out.geodesic is not None:
                    assert is_valid_upath(out.geodesic, fld)
                    h = evaluate_path(out.geodesic, fld, ic, k)
                    if tie_free:
                        assert h == want
                    else:
                        # shared instants let chains step columns at a
                        # single time, which no half-open counting of a
                        # path can witness; the value still stands
                        instant_steps += h != want
                        assert h <= want
            t1 = rng.choice((0.0, 1.0, 2.0, 2.5))
            t2 = rng.choice((3.0, 4.0, 5.0, 6.0))
            k1 = rng.randint(1, k)
            wantp, _ = brute_paths(marks, g, t1, t2, k1, k)
            got = lpp_point_to_point(fld, ic, (t1, k1), (t2, k))
            assert got.value == wantp
            checked += 1
    wall = time.perf_counter() - t0
    _verdict("A11", wall < 30.0,
             f"{checked} instance/initial-condition pairs match brute "
             f"force exactly ({instant_steps} equal-time witnesses), "
             f"wall {wall:.1f}s")


def test_a12_golden_profile():
    rep = golden_report()
    ok = (rep["profile"]["passed"] and rep["reflected_value"]["got"] == 9
          and all(rec["passed"] for rec in rep.values()))
    _verdict("A12", ok,
             f"worked example: profile {tuple(rep['profile']['got'])}, "
             f"h(8) = {rep['reflected_value']['got']}")
