"""MLC state occupancy, mean V_th and program energy for coded uniform data.

    python3 scripts/mlc_states.py [--bytes N] [--seed S] [--params FILE]
"""
import argparse

import numpy as np

from ilwc.codec import encode_bits
from ilwc.flash import (
    load_params,
    map_bits_to_states,
    mean_threshold_voltage,
    program_energy_reduction,
    relative_field_change,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bytes", type=int, default=1 << 20)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--params", help="key = value parameter file")
    args = ap.parse_args()
    p = load_params(args.params)

    data = np.random.default_rng(args.seed).integers(0, 256, args.bytes, dtype=np.uint8)
    streams = {"uncoded": np.unpackbits(data)}
    streams.update({f"n={n}": encode_bits(data, n) for n in (2, 4, 8)})

    base = {lvl: map_bits_to_states(streams["uncoded"], lvl)[0] for lvl in ("slc", "mlc")}
    v0 = mean_threshold_voltage(base["mlc"], p)
    print(f"{'stream':>8} {'S11':>7} {'S10':>7} {'S01':>7} {'S00':>7} {'mean Vth':>9} "
          f"{'field drop':>11} {'E red MLC':>10} {'E red SLC':>10}")
    for name, bits in streams.items():
        mlc = map_bits_to_states(bits, "mlc")[0]
        slc = map_bits_to_states(bits, "slc")[0]
        vth = mean_threshold_voltage(mlc, p)
        probs = " ".join(f"{x:7.4f}" for x in mlc.probabilities)
        print(f"{name:>8} {probs} {vth:9.4f} {relative_field_change(v0, vth, p):11.4%} "
              f"{program_energy_reduction(base['mlc'], mlc, p):10.4%} "
              f"{program_energy_reduction(base['slc'], slc, p):10.4%}")


if __name__ == "__main__":
    main()
