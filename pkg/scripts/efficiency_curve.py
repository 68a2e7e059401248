"""Extraction efficiency versus buffer size for 2-, 4-, 8- and 16-letter alphabets."""
import argparse
from pathlib import Path

from minqrng.analysis.efficiency import best_at_buffer, curve_csv, efficiency_curve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-buffer-bits", type=int, default=40)
    ap.add_argument("--out", default="efficiency.csv")
    args = ap.parse_args()

    points = efficiency_curve(max_buffer_bits=args.max_buffer_bits)
    Path(args.out).write_text(curve_csv(points))
    for b in (20, args.max_buffer_bits):
        pt = best_at_buffer(points, b)
        row = [p for p in points if p.M == 4 and p.buffer_bits == b]
        m4 = f"{row[0].bits_per_symbol:.4f}" if row else "n/a"
        print(f"b={b}: M=4 gives {m4} bits/symbol, best is M={pt.M} at {pt.bits_per_symbol:.4f}")
    print(f"wrote {len(points)} rows to {args.out}")


if __name__ == "__main__":
    main()
