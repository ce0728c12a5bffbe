"""Double T at a small p until every trial recovers the graph exactly (or T_max is hit)."""

import argparse

import numpy as np

from sparsitron_ggm.experiment import ExperimentConfig, run_trial, warm_up


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--T0", type=int, default=20_000)
    ap.add_argument("--T-max", type=int, default=1_280_000, dest="T_max")
    ap.add_argument("--M-ratio", type=float, default=0.1, dest="M_ratio")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--stride", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    warm_up()
    T = args.T0
    print("T,M,success_rate,worst_linf")
    while T <= args.T_max:
        M = max(1, int(T * args.M_ratio))
        cfg = ExperimentConfig(p=args.p, degree=args.degree, T=T, M=M, trials=args.trials,
                               seed=args.seed, candidate_stride=args.stride)
        runs = [run_trial(cfg, k) for k in range(cfg.trials)]
        rate = np.mean([r[2].exact_match for r in runs])
        worst = max(max(r[2].linf_errors) for r in runs)
        print(f"{T},{M},{rate:.3f},{worst:.4f}", flush=True)
        if rate == 1.0:
            break
        T *= 2


if __name__ == "__main__":
    main()
