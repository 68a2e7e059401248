"""Closed-loop response of the rate stabilizer to a step change in LED efficiency."""
import argparse
from pathlib import Path

import numpy as np

from minqrng.control import FeedbackConfig, commanded_drift, fit_time_constant, simulate_loop, step_disturbance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=-0.10, help="relative gain change")
    ap.add_argument("--at", type=float, default=10.0, help="step time, s")
    ap.add_argument("--duration", type=float, default=200.0)
    ap.add_argument("--seed", type=int, help="add counting noise with this seed")
    ap.add_argument("--out", default="feedback.csv")
    args = ap.parse_args()

    cfg = FeedbackConfig()
    rng = np.random.default_rng(args.seed) if args.seed is not None else None
    trace = simulate_loop(cfg, args.duration, k_true=step_disturbance(cfg.k_led, args.at, 1 + args.step), rng=rng)
    Path(args.out).write_text(trace.to_csv())
    print(f"fitted time constant: {fit_time_constant(trace, cfg.target_rate, t0=args.at):.2f} s")
    print(f"largest commanded-rate change per 2^20 counts: {commanded_drift(trace, cfg.k_led):.2%}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
