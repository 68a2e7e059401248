"""Command-line entry point.

Exit codes: 0 success, 1 a randomness test failed, 2 usage or I/O error.
Binary outputs stay headerless; run metadata goes to ``<output>.json``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import intervals as iv
from ._io import atomic_write
from .analysis import battery
from .analysis.efficiency import curve_csv, efficiency_curve
from .analysis import histogram
from .errors import FormatError, QRNGError
from .lut import BitPacker, build_table, read_table, unpack_bits, write_table
from .pipeline import PipelineConfig, extract_symbols, symbols_from_tags
from .source_sim import (
    DEVICE_DARK_RATE,
    DEVICE_RATE,
    DEVICE_TAU_NS,
    DetectorModel,
    SourceConfig,
    read_tags,
    simulate_tags,
    write_tags,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write_json(path: Path, payload: dict) -> None:
    atomic_write(path, [json.dumps(payload, indent=2, sort_keys=True).encode() + b"\n"])


def _sidecar(path) -> Path:
    return Path(str(path) + ".json")


def _load_table(path):
    if path is None:
        return build_table()
    return read_table(path, M=4, N=10)


def read_symbols(path) -> np.ndarray:
    data = np.frombuffer(Path(path).read_bytes(), dtype=np.uint8)
    bad = np.flatnonzero(data > 3)
    if bad.size:
        raise FormatError(f"symbol value {int(data[bad[0]])} outside 0..3", path=path, offset=int(bad[0]))
    return data


def pack_symbols(symbols) -> bytes:
    """Four 2-bit symbols per byte, first symbol in the top bits; last byte zero-padded."""
    symbols = np.asarray(symbols, dtype=np.uint8)
    pad = (-symbols.size) % 4
    s = np.concatenate([symbols, np.zeros(pad, dtype=np.uint8)]).reshape(-1, 4)
    return (s[:, 0] << 6 | s[:, 1] << 4 | s[:, 2] << 2 | s[:, 3]).astype(np.uint8).tobytes()


def cmd_simulate(args) -> int:
    cfg = PipelineConfig(
        source=SourceConfig(args.rate, args.duration, args.dark_rate, args.seed),
        detector=DetectorModel(args.dead_tau_ns, max(args.dead_tau_ns, 150.0)),
    )
    stream = simulate_tags(cfg.source, cfg.detector)
    write_tags(stream, args.out, args.format)
    meta = cfg.as_dict() | {"clicks": len(stream), "clock_period_ns": stream.clock_period, "format": args.format}
    _write_json(_sidecar(args.out), meta)
    print(f"wrote {len(stream)} tags to {args.out}")
    return EXIT_OK


def cmd_build_table(args) -> int:
    table = build_table()
    write_table(table, args.out, raw=args.raw)
    print(f"{table.checksum()}  {args.out}")
    return EXIT_OK


def cmd_extract(args) -> int:
    table = _load_table(args.table)
    if args.input_kind == "symbols":
        symbols = read_symbols(args.input)
        bits, report = extract_symbols(symbols, table)
    else:
        tags = read_tags(args.input, args.format)
        fcfg = iv.FilterConfig(args.cutoff_ticks)
        raw, kept, symbols = symbols_from_tags(tags, fcfg)
        bits, report = extract_symbols(symbols, table, clicks_in=len(tags), n_intervals=raw.size)
        report.samples_surviving = kept.size
    if args.symbols_out:
        payload = pack_symbols(symbols) if args.packed else symbols.astype(np.uint8).tobytes()
        atomic_write(args.symbols_out, [payload])

    packer = BitPacker()
    atomic_write(args.out, [packer.feed(bits), packer.flush()])
    meta = report.as_dict() | {
        "input": str(args.input),
        "input_kind": args.input_kind,
        "cutoff_ticks": args.cutoff_ticks,
        "table_checksum": table.checksum(),
        "residue_discarded": report.residue_symbols,
    }
    _write_json(_sidecar(args.out), meta)
    print(
        f"{report.bits_out} bits from {report.clicks_in} clicks "
        f"({report.bits_per_click:.4f} bits/click, {report.residue_symbols} residue symbols)"
    )
    return EXIT_OK


def cmd_analyze(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = efficiency_curve(max_buffer_bits=args.max_buffer_bits)
    atomic_write(out_dir / "efficiency.csv", [curve_csv(points).encode()])
    print(f"efficiency curve: {len(points)} points -> {out_dir / 'efficiency.csv'}")
    if args.tags:
        fit = histogram.waiting_time_histogram(iv.intervals(read_tags(args.tags, args.format)), bin_width=args.bin_width)
        atomic_write(out_dir / "histogram.csv", [histogram.histogram_csv(fit).encode()])
        _write_json(
            out_dir / "histogram.json",
            {"fitted_rate": fit.fitted_rate, "deviation_boundary_ns": fit.deviation_boundary, "fit_start_ns": fit.fit_start},
        )
        print(f"fitted rate {fit.fitted_rate:.6g}/s, deviation boundary {fit.deviation_boundary:g} ns")
    return EXIT_OK


def cmd_test(args) -> int:
    nbits = args.nbits
    sidecar = _sidecar(args.bits)
    if nbits is None and sidecar.exists():
        nbits = json.loads(sidecar.read_text()).get("bits_out")
    data = Path(args.bits).read_bytes()
    if nbits is not None and not 0 <= nbits <= 8 * len(data):
        raise FormatError(f"bit count {nbits} does not fit in {len(data)} bytes", path=args.bits)
    bits = unpack_bits(data, nbits)
    results = battery.randomness_battery(bits, alpha=args.alpha)
    report = battery.battery_csv(results)
    if args.out:
        atomic_write(args.out, [report.encode()])
    sys.stdout.write(report)
    return EXIT_OK if battery.all_passed(results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minqrng", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate detector clicks and write time tags")
    p.add_argument("--rate", type=float, default=DEVICE_RATE, help="photon arrival rate, 1/s")
    p.add_argument("--duration", type=float, default=1.0, help="seconds")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--dead-tau-ns", type=float, default=DEVICE_TAU_NS)
    p.add_argument("--dark-rate", type=float, default=DEVICE_DARK_RATE)
    p.add_argument("--format", choices=("bin", "text"), default="bin")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("build-table", help="write the M=4, N=10 extraction table")
    p.add_argument("--out", required=True)
    p.add_argument("--raw", action="store_true", help="entries only, no header")
    p.set_defaults(func=cmd_build_table)

    p = sub.add_parser("extract", help="run filter, mapping and table extraction")
    p.add_argument("input")
    p.add_argument("--input-kind", choices=("tags", "symbols"), default="tags")
    p.add_argument("--format", choices=("bin", "text"), default="bin", help="tag file format")
    p.add_argument("--table", help="table file (built in memory if omitted)")
    p.add_argument("--cutoff-ticks", type=int, default=iv.DEFAULT_CUTOFF)
    p.add_argument("--symbols-out", help="also write the symbol stream here")
    p.add_argument("--packed", action="store_true", help="write symbols 4 per byte")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="efficiency curve and waiting-time histogram CSVs")
    p.add_argument("--tags", help="time-tag file for the histogram")
    p.add_argument("--format", choices=("bin", "text"), default="bin")
    p.add_argument("--bin-width", type=int, default=1, help="histogram bin width, ticks")
    p.add_argument("--max-buffer-bits", type=int, default=40)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("test", help="run the randomness battery on a packed bit file")
    p.add_argument("bits")
    p.add_argument("--nbits", type=int, help="bit count (default: from the .json sidecar)")
    p.add_argument("--alpha", type=float, default=battery.ALPHA)
    p.add_argument("--out", help="battery report CSV")
    p.set_defaults(func=cmd_test)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QRNGError, OSError) as exc:
        print(f"minqrng {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
