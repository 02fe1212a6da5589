"""Exhaustive grid value of the deterministic |U| = |V| = 2 family on bssc(1/2) at lambda = 1/2.

The printed value is the one frozen in tests/test_optimize.py.
"""
import argparse

from bcbounds.channel import bssc
from bcbounds.optimize import NE, brute_force_oracle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=1 / 64)
    args = ap.parse_args()
    value, q = brute_force_oracle(bssc(0.5), 0.5, NE, args.step, nu=2, nv=2, return_argmax=True)
    print(f"support {value!r}  sum-rate {2 * value!r}")
    print("argmax q[u,v,x]:", q.round(6).tolist())


if __name__ == "__main__":
    main()
