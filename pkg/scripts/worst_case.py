"""Worst-case programming and coupling figures when the highest MLC state is avoided.

    python3 scripts/worst_case.py [--params FILE]

Compares a full swing to the top state against one that stops at the next
state down, the situation a weight-limited code creates for 11/10-heavy data.
"""
import argparse

from ilwc.flash import ispp_steps, load_params, program_time, relative_field_change, worst_case_coupling


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", help="key = value parameter file")
    args = ap.parse_args()
    p = load_params(args.params)

    mu = p.state_voltages("mlc")
    before, after = mu[3] - mu[0], mu[2] - mu[0]
    s_before, s_after = ispp_steps(before, p), ispp_steps(after, p)
    c_before, c_after = worst_case_coupling(before, p), worst_case_coupling(after, p)
    print(f"max swing            {before:.3f} V -> {after:.3f} V")
    print(f"ISPP pulses          {s_before} -> {s_after}  ({1 - s_after / s_before:.1%} fewer)")
    print(f"program time         {program_time(s_before, p):.2f} -> {program_time(s_after, p):.2f} (t_step units)")
    print(f"worst-case coupling  {c_before:.4f} V -> {c_after:.4f} V  ({1 - c_after / c_before:.4%} lower)")
    print(f"intrinsic field drop {relative_field_change(mu[3], mu[2], p):.4%} (top state vs next)")


if __name__ == "__main__":
    main()
