"""Acceptance suite: twelve numbered criteria, one printed PASS/FAIL line each.

Run ``pytest tests/test_acceptance.py -v -s`` to see every line.

Criterion 10's first clause (mean restart count 2.265 +/- 0.5 on the
correlated stream) cannot hold for this generator: the two actions'
losses differ with probability about 0.03/t per round, so the restart
budget is never depleted and every repetition finishes in exactly one
segment.  The clause is asserted as stated and is expected to fail; the
measured value is printed alongside.  See README.md.
"""

import math
import time

import numpy as np
import pytest

from adahedge import bounds
from adahedge.core import (
    CumulativeLoss,
    hedge_and_mix_loss,
    log_marginal_likelihood,
    log_weights_from_totals,
)
from adahedge.simulation import (
    THREADS_ENV,
    AlternatingPair,
    Correlated,
    ExperimentConfig,
    FtlKiller,
    IidBernoulli,
    derive_seed,
    generate,
    run_experiment,
    segment_statistics,
)
from adahedge.strategies import (
    AdaHedge,
    DoublingHedge,
    FollowTheLeader,
    OracleHedge,
    VariableHedge,
    run,
)


def _report(num: int, passed: bool, detail: str) -> bool:
    print(f"criterion {num:2d} {'PASS' if passed else 'FAIL'}: {detail}")
    return passed


def _experiment_i_config(output_dir=None):
    return ExperimentConfig(
        generator=IidBernoulli((0.35, 0.4, 0.45, 0.5)),
        horizon_t=10_000,
        repetitions=50,
        strategies=(
            FollowTheLeader(),
            OracleHedge(),
            DoublingHedge(2.0),
            AdaHedge(2.0),
            VariableHedge(),
        ),
        base_seed=20110717,
        output_dir=output_dir,
    )


@pytest.fixture(scope="module")
def prefix_stream_stats():
    """100 random streams (T=200, K=5) at eta in {1, 0.3}: worst
    factorization error and worst budget excess over every prefix."""
    rng = np.random.default_rng(20110717)
    worst_fact = 0.0
    worst_budget = -math.inf
    t0 = time.perf_counter()
    for _ in range(100):
        rows = rng.random((200, 5)).tolist()
        for eta in (1.0, 0.3):
            totals = [0.0] * 5
            w = [0.2] * 5
            mix_log_sum = 0.0
            delta_sum = 0.0
            for row in rows:
                hedge, mix = hedge_and_mix_loss(w, row, eta)
                mix_log_sum += -eta * mix
                delta_sum += hedge - mix
                for i, v in enumerate(row):
                    totals[i] += v
                w = [math.exp(v) for v in log_weights_from_totals(totals, eta)]
                worst_budget = max(
                    worst_budget,
                    delta_sum - bounds.lemma2_bound(eta, min(totals), 5),
                )
            direct = log_marginal_likelihood(CumulativeLoss(tuple(totals), 200), eta)
            worst_fact = max(worst_fact, abs(direct - mix_log_sum))
    return worst_fact, worst_budget, time.perf_counter() - t0


@pytest.fixture(scope="module")
def experiment_i():
    t0 = time.perf_counter()
    result = run_experiment(_experiment_i_config())
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def experiment_ii():
    config = ExperimentConfig(
        generator=Correlated(hard_prob=0.3, p1=0.01, p2=0.02),
        horizon_t=10_000,
        repetitions=200,
        strategies=(FollowTheLeader(), AdaHedge(2.0), VariableHedge()),
        base_seed=20110718,
    )
    t0 = time.perf_counter()
    result = run_experiment(config)
    return result, time.perf_counter() - t0


class TestAcceptance:
    def test_criterion_01_gap_range(self):
        n = 100_000
        rng = np.random.default_rng(42)
        t0 = time.perf_counter()
        min_delta = math.inf
        max_excess = -math.inf  # delta - eta/8
        for _ in range(n):
            k = int(rng.integers(2, 9))
            w = rng.exponential(size=k)
            losses = rng.random(k).tolist()
            eta = 4.0 * (1.0 - rng.random())
            hedge, mix = hedge_and_mix_loss((w / w.sum()).tolist(), losses, eta)
            delta = hedge - mix
            min_delta = min(min_delta, delta)
            max_excess = max(max_excess, delta - eta / 8.0)
        elapsed = time.perf_counter() - t0
        ok = min_delta >= -1e-12 and max_excess <= 1e-12 and elapsed < 5.0
        assert _report(
            1,
            ok,
            f"{n} rounds, eta in (0,4]: min delta {min_delta:.2e}, "
            f"max delta-eta/8 {max_excess:.2e}, {elapsed:.2f}s",
        )

    def test_criterion_02_gap_posterior_bound(self):
        n = 100_000
        rng = np.random.default_rng(43)
        t0 = time.perf_counter()
        max_excess = -math.inf  # delta - (e-2)*eta*(1-wstar)
        for _ in range(n):
            k = int(rng.integers(2, 9))
            w = rng.exponential(size=k)
            w /= w.sum()
            losses = rng.random(k).tolist()
            eta = 1.0 - rng.random()
            hedge, mix = hedge_and_mix_loss(w.tolist(), losses, eta)
            excess = (hedge - mix) - bounds.lemma4_bound(eta, float(w.max()))
            max_excess = max(max_excess, excess)
        elapsed = time.perf_counter() - t0
        ok = max_excess <= 1e-12 and elapsed < 5.0
        assert _report(
            2,
            ok,
            f"{n} rounds, eta in (0,1]: max excess over (e-2)*eta*(1-w*) "
            f"{max_excess:.2e}, {elapsed:.2f}s",
        )

    def test_criterion_03_factorization(self, prefix_stream_stats):
        worst_fact, _, elapsed = prefix_stream_stats
        ok = worst_fact < 1e-9 and elapsed < 2.0
        assert _report(
            3,
            ok,
            f"direct log-marginal vs per-round mix sum: worst gap "
            f"{worst_fact:.2e}, {elapsed:.2f}s",
        )

    def test_criterion_04_gap_budget_every_prefix(self, prefix_stream_stats):
        _, worst_budget, _ = prefix_stream_stats
        ok = worst_budget <= 1e-9
        assert _report(
            4,
            ok,
            f"Delta vs (eta*L* + ln K)/(e-1) on every prefix: worst excess "
            f"{worst_budget:.2e}",
        )

    def test_criterion_05_depletion_window(self):
        t_cap = 20_000
        worst_window = -math.inf  # Delta - (b + eta/8) at depletion
        regret_ok = True
        depleted_runs = 0
        t0 = time.perf_counter()
        for stream_i in range(100):
            # uniform losses in antithetic pairs (u then 1 - u): totals
            # re-tie after every pair, so the gap keeps growing linearly
            # and even eta = 1/4 is sure to deplete its budget
            srng = np.random.default_rng((20110717, stream_i))
            u = srng.random((t_cap // 2, 5))
            arr = np.empty((t_cap, 5))
            arr[0::2] = u
            arr[1::2] = 1.0 - u
            rows = arr.tolist()
            for eta in (1.0, 0.5, 0.25):
                b = bounds.budget(eta, 5)
                totals = [0.0] * 5
                w = [0.2] * 5
                delta_sum = 0.0
                cum_agent = 0.0
                depleted = False
                for row in rows:
                    hedge, mix = hedge_and_mix_loss(w, row, eta)
                    delta_sum += hedge - mix
                    cum_agent += hedge
                    for i, v in enumerate(row):
                        totals[i] += v
                    if delta_sum >= b:
                        depleted = True
                        break
                    w = [math.exp(v) for v in log_weights_from_totals(totals, eta)]
                if not depleted:
                    continue
                depleted_runs += 1
                worst_window = max(worst_window, delta_sum - (b + eta / 8.0))
                lstar = min(totals)
                if not (cum_agent - lstar < bounds.theorem1_bound(lstar, 5)):
                    regret_ok = False
        elapsed = time.perf_counter() - t0
        ok = depleted_runs == 300 and worst_window < 0.0 and regret_ok
        assert _report(
            5,
            ok,
            f"{depleted_runs}/300 runs depleted; worst Delta-(b+eta/8) "
            f"{worst_window:.3g}; regret under theorem1 bound: {regret_ok}; "
            f"{elapsed:.2f}s",
        )

    def test_criterion_06_segment_regret_bound(self):
        streams = [
            ("ftl_killer", generate(FtlKiller(), 1000, 0), 2),
            (
                "iid_bernoulli",
                generate(
                    IidBernoulli((0.35, 0.4, 0.45, 0.5)),
                    10_000,
                    derive_seed(20110717, 0),
                ),
                4,
            ),
            ("correlated", generate(Correlated(), 10_000, derive_seed(20110718, 0)), 2),
            (
                "alternating_pair",
                generate(AlternatingPair(a=0.2, b=0.6, eps=0.1), 10_000, 0),
                2,
            ),
        ]
        worst_margin = -math.inf  # regret - lemma3_bound at the same m
        for _, arr, k in streams:
            trace = run(AdaHedge(2.0), arr)
            for m in np.unique(trace.segment):
                cap = bounds.lemma3_bound(int(m), k, 2.0)
                margin = float(trace.regret[trace.segment == m].max()) - cap
                worst_margin = max(worst_margin, margin)
        ok = worst_margin < 0.0
        assert _report(
            6,
            ok,
            f"4 streams, every round: max regret-lemma3_bound(m) margin "
            f"{worst_margin:.3g}",
        )

    def test_criterion_07_easy_alternating_stream(self):
        arr = generate(AlternatingPair(a=0.2, b=0.6, eps=0.1), 100_000, 0)
        t0 = time.perf_counter()
        ftl = run(FollowTheLeader(), arr)
        ada = run(AdaHedge(2.0), arr)
        elapsed = time.perf_counter() - t0
        mstar = bounds.intro_mstar(0.2, 2.0)
        plateau = abs(ada.final_regret - float(ada.regret[10_000 - 1]))
        ok = (
            ftl.final_regret <= 1.0
            and mstar == 4
            and ada.segments_started <= mstar
            and plateau <= 0.5
            and elapsed < 5.0
        )
        assert _report(
            7,
            ok,
            f"FTL regret {ftl.final_regret:.4g} <= 1; restarts "
            f"{ada.segments_started} <= {mstar}; regret drift after t=1e4 "
            f"{plateau:.2e}; {elapsed:.2f}s",
        )

    def test_criterion_08_leader_trap(self):
        arr = generate(FtlKiller(), 1000, 0)
        ftl = run(FollowTheLeader(), arr)
        ada = run(AdaHedge(2.0), arr)
        cap = bounds.lemma3_bound(ada.segments_started, 2, 2.0)
        ok = ftl.final_regret >= 499.0 and ada.final_regret <= cap
        assert _report(
            8,
            ok,
            f"FTL regret {ftl.final_regret} >= 499; restart regret "
            f"{ada.final_regret:.4g} <= lemma3({ada.segments_started}) = {cap:.4g}",
        )

    def test_criterion_09_iid_experiment(self, experiment_i):
        result, elapsed = experiment_i
        ada = result.mean_regret["adahedge_phi2"]
        oracle = result.mean_regret["oracle_hedge"]
        ftl = result.mean_regret["ftl"]
        ftl_drift = float(ftl[-1] - ftl[4999])
        ada_drift = float(ada[-1] - ada[4999])
        ok = (
            float(ada[-1]) < float(oracle[-1])
            and ftl_drift < 1.0
            and ada_drift < 2.0
            and elapsed < 30.0
        )
        assert _report(
            9,
            ok,
            f"K=4 T=1e4 R=50: adahedge {ada[-1]:.4f} < oracle {oracle[-1]:.4f}; "
            f"drift after t=5000 ftl {ftl_drift:.2e}, adahedge {ada_drift:.2e}; "
            f"{elapsed:.1f}s",
        )

    def test_criterion_10_correlated_experiment(self, experiment_ii):
        result, elapsed = experiment_ii
        stats = segment_statistics(result, "adahedge_phi2")
        ftl_final = float(result.mean_regret["ftl"][-1])
        var_final = float(result.mean_regret["variable_hedge"][-1])
        segments_ok = abs(stats.mean - 2.265) <= 0.5
        ordering_ok = ftl_final < var_final
        ok = segments_ok and ordering_ok and elapsed < 60.0
        assert _report(
            10,
            ok,
            f"K=2 T=1e4 R=200: mean restarts {stats.mean:.3f} "
            f"(required 2.265+/-0.5: {segments_ok}); ftl {ftl_final:.6g} < "
            f"variable_hedge {var_final:.6g}: {ordering_ok}; {elapsed:.1f}s",
        )

    def test_criterion_11_leading_factor_spot_values(self):
        golden = bounds.theorem2_leading_factor(bounds.GOLDEN_RATIO)
        at_two = bounds.theorem2_leading_factor(2.0)
        ok = 3.32 <= golden <= 3.34 and 3.45 <= at_two <= 3.47
        assert _report(
            11,
            ok,
            f"leading factor {golden:.6f} at the golden ratio, {at_two:.6f} at 2",
        )

    def test_criterion_12_thread_count_determinism(self, tmp_path, monkeypatch):
        outputs = {}
        for threads in (1, 2):
            outdir = tmp_path / f"threads{threads}"
            monkeypatch.setenv(THREADS_ENV, str(threads))
            run_experiment(_experiment_i_config(output_dir=outdir))
            outputs[threads] = {
                p.name: p.read_bytes() for p in sorted(outdir.iterdir())
            }
        same_names = sorted(outputs[1]) == sorted(outputs[2])
        identical = same_names and all(
            outputs[1][name] == outputs[2][name] for name in outputs[1]
        )
        assert _report(
            12,
            identical,
            f"{len(outputs[1])} CSV files byte-identical across "
            f"{THREADS_ENV}=1 and 2: {identical}",
        )
