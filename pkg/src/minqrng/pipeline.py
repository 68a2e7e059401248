"""End-to-end glue: time tags -> filtered intervals -> symbols -> bits."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import intervals as iv
from .lut import ExtractionTable, extract_stream
from .source_sim import DetectorModel, SourceConfig, TimeTagStream, simulate_tags


@dataclass(frozen=True)
class PipelineConfig:
    source: SourceConfig
    detector: DetectorModel = field(default_factory=DetectorModel)
    filter: iv.FilterConfig = field(default_factory=iv.FilterConfig)

    def as_dict(self) -> dict:
        return {"source": asdict(self.source), "detector": asdict(self.detector), "filter": asdict(self.filter)}


@dataclass
class ExtractionReport:
    clicks_in: int
    intervals: int
    samples_surviving: int
    symbols: int
    words: int
    residue_symbols: int
    bits_out: int

    @property
    def bits_per_click(self) -> float:
        return self.bits_out / self.clicks_in if self.clicks_in else 0.0

    def as_dict(self) -> dict:
        d = asdict(self)
        d["bits_per_click"] = self.bits_per_click
        return d


def symbols_from_tags(tags: TimeTagStream | np.ndarray, cfg: iv.FilterConfig = iv.FilterConfig()):
    raw = iv.intervals(tags)
    kept = iv.filter_intervals(raw, cfg)
    return raw, kept, iv.map_symbols(kept, cfg.cutoff_ticks)


def extract_symbols(symbols, table: ExtractionTable, clicks_in: int | None = None, n_intervals: int | None = None):
    symbols = np.asarray(symbols, dtype=np.uint8)
    bits, residue = extract_stream(symbols, table)
    report = ExtractionReport(
        clicks_in=clicks_in if clicks_in is not None else 0,
        intervals=n_intervals if n_intervals is not None else symbols.size,
        samples_surviving=symbols.size,
        symbols=symbols.size,
        words=symbols.size // table.N,
        residue_symbols=residue.size,
        bits_out=bits.size,
    )
    return bits, report


def extract_tags(tags: TimeTagStream | np.ndarray, table: ExtractionTable, cfg: iv.FilterConfig = iv.FilterConfig()):
    tag_array = getattr(tags, "tags", tags)
    raw, kept, symbols = symbols_from_tags(tag_array, cfg)
    bits, report = extract_symbols(symbols, table, clicks_in=len(tag_array), n_intervals=raw.size)
    report.samples_surviving = kept.size
    return bits, report


def run(cfg: PipelineConfig, table: ExtractionTable):
    tags = simulate_tags(cfg.source, cfg.detector)
    return extract_tags(tags, table, cfg.filter)
