"""Timing of full graph learning across p, and of the online phase across T."""

import argparse

from sparsitron_ggm.experiment import bench_hedge_phase, bench_learn, loglog_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p-list", default="16,32,64,128", dest="p_list")
    ap.add_argument("--T", type=int, default=4_500)
    ap.add_argument("--M", type=int, default=500)
    ap.add_argument("--hedge-p", type=int, default=32, dest="hedge_p")
    ap.add_argument("--hedge-T", default="20000,40000,80000,160000", dest="hedge_T")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p_list = [int(p) for p in args.p_list.split(",")]
    rows = bench_learn(p_list, args.T, args.M, args.seed, repeats=args.repeats)
    print("p,total_seconds,hedge_seconds,score_seconds")
    for r in rows:
        print(f"{r['p']},{r['total_seconds']:.4f},{r['hedge_seconds']:.4f},{r['score_seconds']:.4f}")
    print(f"slope vs p: {loglog_slope(p_list, [r['total_seconds'] for r in rows]):.3f}\n")

    T_list = [int(t) for t in args.hedge_T.split(",")]
    hedge = bench_hedge_phase(args.hedge_p, T_list, args.seed, repeats=args.repeats)
    print("T,hedge_seconds")
    for r in hedge:
        print(f"{r['T']},{r['hedge_seconds']:.4f}")
    print(f"slope vs T: {loglog_slope(T_list, [r['hedge_seconds'] for r in hedge]):.3f}")


if __name__ == "__main__":
    main()
