"""Node-averaged best-candidate oracle risk against the online horizon T, plus the log-log slope."""

import argparse

from sparsitron_ggm import generate_model
from sparsitron_ggm.experiment import derive_seed, loglog_slope, risk_decay_curve, warm_up


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--p", type=int, default=10)
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--T-list", default="500,2000,8000,32000,128000,512000", dest="T_list")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    warm_up()
    T_list = [int(t) for t in args.T_list.split(",")]
    model = generate_model(args.p, args.degree, (0.4, 0.6), seed=derive_seed(args.seed, 7, 0))
    rows = risk_decay_curve(model, T_list, seed=derive_seed(args.seed, 7, 1))
    print("T,min_oracle_risk,local_slope")
    prev = None
    for r in rows:
        local = "" if prev is None else f"{loglog_slope([prev['T'], r['T']], [prev['min_oracle_risk'], r['min_oracle_risk']]):.3f}"
        print(f"{r['T']},{r['min_oracle_risk']:.6g},{local}")
        prev = r
    print(f"overall slope {loglog_slope(T_list, [r['min_oracle_risk'] for r in rows]):.3f}")


if __name__ == "__main__":
    main()
