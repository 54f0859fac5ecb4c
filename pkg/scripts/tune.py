"""Knob scan: check the study-level expectations over a seed set.

Usage: python scripts/tune.py [n_seeds] [depth_weights ...]
"""

import sys
import time
from dataclasses import replace

sys.path.insert(0, "src")

from fogplace.experiment import ExperimentConfig, run_seed
from fogplace.metrics import aggregate
from fogplace.placement import OrderingMode
from fogplace.topology import TopologyParams

AB, SB = OrderingMode.APP_BASED, OrderingMode.SERVICE_BASED


def sweep(config):
    results = []
    for seed in config.seeds:
        results.extend(run_seed(config, seed))
    return aggregate(results)


def check(summaries):
    mean = {(s.strategy, s.mode): s.mean_latency for s in summaries}
    used = {(s.strategy, s.mode): s.used_pct for s in summaries}
    strategies = ["greedy_latency", "greedy_fram", "near_gw_pd", "near_gw_pd_bw", "rr_ipt"]

    print(f"{'strategy':16s} {'AB mean':>10s} {'SB mean':>10s} {'AB-SB':>8s} {'AB used':>8s} {'SB used':>8s}")
    for s in strategies:
        print(f"{s:16s} {mean[(s,AB)]:10.1f} {mean[(s,SB)]:10.1f} "
              f"{mean[(s,AB)]-mean[(s,SB)]:8.1f} {used[(s,AB)]:8.2f} {used[(s,SB)]:8.2f}")

    # criterion 1
    c1 = all(mean[(s, SB)] <= mean[(s, AB)] for s in strategies if s != "greedy_fram")
    fr = abs(mean[("greedy_fram", SB)] - mean[("greedy_fram", AB)])
    c1_draw = fr <= 0.02 * max(mean[("greedy_fram", SB)], mean[("greedy_fram", AB)])
    # criterion 2 per mode
    c2 = True
    for m in (AB, SB):
        ranked = sorted(strategies, key=lambda s: mean[(s, m)])
        ok = (ranked[0] == "greedy_latency"
              and set(ranked[1:3]) == {"near_gw_pd", "near_gw_pd_bw"}
              and set(ranked[3:]) == {"greedy_fram", "rr_ipt"})
        gap = abs(mean[("near_gw_pd", m)] - mean[("near_gw_pd_bw", m)])
        ok = ok and gap <= 0.02 * max(mean[("near_gw_pd", m)], mean[("near_gw_pd_bw", m)])
        print(f"  mode {m.value}: rank {ranked} {'OK' if ok else 'FAIL'}")
        c2 = c2 and ok
    # criterion 3
    used_mean = {s: (used[(s, AB)] + used[(s, SB)]) / 2 for s in strategies}
    c3_ord = (max(used_mean, key=used_mean.get) == "greedy_fram"
              and min(used_mean, key=used_mean.get) == "greedy_latency")
    bands = {"greedy_fram": 22.7, "greedy_latency": 12.8, "rr_ipt": 17.0,
             "near_gw_pd": 16.5, "near_gw_pd_bw": 16.5}
    c3_band = all(abs(used_mean[s] - bands[s]) <= 5.0 for s in strategies)
    c3_gap = all(abs(used[(s, AB)] - used[(s, SB)]) <= 2.0 for s in strategies)
    print(f"  C1 SB<=AB(4): {c1}  fram draw<=2%: {c1_draw} (gap {fr:.1f})")
    print(f"  C2 ranking: {c2}")
    print(f"  C3 ordinal: {c3_ord}  bands: {c3_band}  mode gap<=2pp: {c3_gap}")
    print(f"  used: " + " ".join(f"{s}={used_mean[s]:.1f}" for s in strategies))


def main():
    n_seeds = int(sys.argv[1]) if len(sys.argv) > 1 else 10
    weights = [float(w) for w in sys.argv[2:]] or [0.0, 0.5, 0.75, 1.0]
    for w in weights:
        cfg = ExperimentConfig(
            seeds=tuple(range(n_seeds)),
            topology=TopologyParams(delay_depth_weight=w),
        )
        t0 = time.time()
        summaries = sweep(cfg)
        print(f"\n=== depth_weight={w} duration={cfg.duration} "
              f"({n_seeds} seeds, {time.time()-t0:.1f}s) ===")
        check(summaries)


if __name__ == "__main__":
    main()
