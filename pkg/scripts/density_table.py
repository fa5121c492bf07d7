"""Ones density, overhead and coding gain of every perfect configuration on uniform data.

    python3 scripts/density_table.py [--sample-bytes N] [--seed S]

The exact column comes from enumerating every segment; the sampled column
encodes a random buffer through the stream codec as a sanity check.
"""
import argparse

import numpy as np

from ilwc.codec import SegmentConfig, encode_bits, verify_perfect_parameters
from ilwc.metrics import coding_gain, expected_ones_uniform, ones_density_floor


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sample-bytes", type=int, default=1 << 20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    data = np.random.default_rng(args.seed).integers(0, 256, args.sample_bytes, dtype=np.uint8)
    print(f"{'n':>3} {'k':>3} {'m':>3} {'perfect':>8} {'overhead':>9} {'floor':>8} "
          f"{'p1 exact':>14} {'p1 sampled':>11} {'coding gain':>12}")
    for n in (2, 4, 8):
        cfg = SegmentConfig(n)
        k, m, perfect = verify_perfect_parameters(n)
        exact = expected_ones_uniform(cfg)
        sampled = encode_bits(data, cfg).mean()
        cg = coding_gain(cfg.overhead, float(exact))
        print(f"{n:>3} {k:>3} {m:>3} {str(perfect):>8} {cfg.overhead:>9.4f} "
              f"{float(ones_density_floor(cfg)):>8.4f} {str(exact):>8} ={float(exact):.4f} "
              f"{sampled:>11.5f} {cg:>12.6f}")


if __name__ == "__main__":
    main()
