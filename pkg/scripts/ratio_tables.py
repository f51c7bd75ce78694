"""Print the VB-vs-exact diagnostic tables: data-independent KL constants
and coefficient/precision/mode ratio rows for reference model sizes.

Usage:
    python3 scripts/ratio_tables.py [--T 196] [--mc-draws 0]

With --mc-draws > 0 the precision-variance convention is additionally
checked empirically by sampling the exact and VB Wishart laws.
"""

import argparse

import numpy as np
from scipy import stats

from vbvar import kl_exact, kl_stirling, moment_ratios

ROWS = [
    # (label, M, p, prior dof)
    ("small  M=3 ", 3, 13, 5),
    ("medium M=7 ", 7, 29, 9),
    ("large  M=20", 20, 81, 21),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--T", type=int, default=196)
    parser.add_argument("--mc-draws", type=int, default=0)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"T = {args.T}")
    print("\nKL(q || p) of the conjugate VB approximation (data-independent)")
    print(f"{'model':<14}{'kl_exact':>12}{'kl_stirling':>14}")
    for label, m, p, dof in ROWS:
        print(f"{label:<14}{kl_exact(m, p, args.T, dof):>12.6f}"
              f"{kl_stirling(m, p, args.T, dof):>14.6f}")

    print("\nVB / exact moment ratios")
    header = ("coef_var", "prec_var(w)", "prec_var(t)", "mode", "pred_var")
    print(f"{'model':<14}" + "".join(f"{h:>13}" for h in header))
    for label, m, p, dof in ROWS:
        r = moment_ratios(m, p, args.T, dof)
        cells = (r["coef_var_ratio"], r["prec_var_ratio_wishart"],
                 r["prec_var_ratio_text"], r["mode_ratio"],
                 r["pred_var_ratio"])
        print(f"{label:<14}" + "".join(f"{c:>13.3f}" for c in cells))

    if args.mc_draws > 0:
        print(f"\nempirical precision-variance ratio ({args.mc_draws} draws)")
        rng = np.random.default_rng(args.seed)
        for label, m, p, dof in ROWS[:2]:
            nu, nuq = args.T + dof, args.T + p + dof
            a = stats.wishart.rvs(df=nu, scale=np.eye(m),
                                  size=args.mc_draws, random_state=rng)
            b = stats.wishart.rvs(df=nuq, scale=(nu / nuq) * np.eye(m),
                                  size=args.mc_draws, random_state=rng)
            ratio = b[:, 0, 0].var(ddof=1) / a[:, 0, 0].var(ddof=1)
            print(f"{label:<14}{ratio:>13.4f}   (wishart convention"
                  f" {nu / nuq:.4f}, text {(nu - p - 1) / nu:.4f})")


if __name__ == "__main__":
    main()
