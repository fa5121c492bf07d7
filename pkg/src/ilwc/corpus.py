"""Corpus-level measurement of uncoded vs ILWC-coded bit and cell statistics.

Every statistic here is a linear function of a file's byte histogram, except
MLC cell states for n = 8: a 9-bit codeword shifts the pair alignment, so the
pattern repeats every two source bytes and the histogram is taken over byte
pairs instead. Lookup tables are built by running the reference encoder and
state mapper over every byte (or byte pair) value.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import IO, Iterable, Sequence

import numpy as np

from .codec import SegmentConfig, byte_bit_table
from .flash import (
    CellStateDistribution,
    FlashParams,
    mean_threshold_voltage,
    program_energy,
    pulse_total,
    relative_field_change,
)
from .metrics import coding_gain

REPORT_VERSION = 1
UNCODED = "uncoded"
DEFAULT_BIN_WIDTH = 0.005
_CHUNK = 1 << 22  # even, so byte pairs never straddle chunks

CSV_COLUMNS = (
    "path", "size_bytes", "config", "p1", "overhead", "coding_gain",
    "p_s11", "p_s10", "p_s01", "p_s00", "mean_vth", "rel_field_change",
    "energy", "pe", "energy_gain", "ispp_pulses_total",
)


class NoFilesError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# lookup tables

def _mlc_counts(bits: np.ndarray) -> np.ndarray:
    """Per-row MLC state counts of an even-width (rows, bits) 0/1 matrix."""
    pairs = bits.reshape(bits.shape[0], -1, 2)
    states = 3 - (2 * pairs[..., 0] + pairs[..., 1])
    return np.stack([(states == s).sum(axis=1) for s in range(4)], axis=1).astype(np.int64)


@lru_cache(maxsize=None)
def _tables(config: str) -> dict[str, np.ndarray]:
    if config == UNCODED:
        bits = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1)
    else:
        bits = np.asarray(byte_bit_table(int(config)))
    tables = {"ones": bits.sum(axis=1).astype(np.int64), "width": np.int64(bits.shape[1])}
    if bits.shape[1] % 2 == 0:
        tables["mlc"] = _mlc_counts(bits)
    else:
        both = np.concatenate([np.repeat(bits, 256, axis=0), np.tile(bits, (256, 1))], axis=1)
        tables["mlc_pair"] = _mlc_counts(both)
        # a lone trailing byte: complete its last pair with a '1'
        tail = np.concatenate([bits, np.ones((256, 1), dtype=bits.dtype)], axis=1)
        tables["mlc_tail"] = _mlc_counts(tail)
    return tables


@dataclass
class _Histograms:
    size: int = 0
    single: np.ndarray = field(default_factory=lambda: np.zeros(256, dtype=np.int64))
    pairs: np.ndarray = field(default_factory=lambda: np.zeros(65536, dtype=np.int64))
    tail: int | None = None


def _read_full(fh, size: int) -> bytes:
    parts = []
    while size:
        part = fh.read(size)
        if not part:
            break
        parts.append(part)
        size -= len(part)
    return b"".join(parts)


def _scan(path: str | os.PathLike) -> _Histograms:
    h = _Histograms()
    with open(path, "rb") as fh:
        while True:
            # only the final chunk can have odd length
            chunk = _read_full(fh, _CHUNK)
            if not chunk:
                break
            buf = np.frombuffer(chunk, dtype=np.uint8)
            h.size += buf.size
            h.single += np.bincount(buf, minlength=256)
            even = buf.size - buf.size % 2
            if even:
                h.pairs += np.bincount(buf[:even].view(">u2"), minlength=65536)
            if buf.size % 2:
                h.tail = int(buf[-1])
    return h


# ---------------------------------------------------------------------------
# report structures

@dataclass
class LevelResult:
    counts: list[int]
    padded: bool
    probabilities: list[float]
    mean_vth: float
    rel_field_change: float | None
    energy: float
    pe: float | None
    energy_gain: float | None
    ispp_pulses_total: int

    @property
    def distribution(self) -> CellStateDistribution:
        return CellStateDistribution("slc" if len(self.counts) == 2 else "mlc", tuple(self.counts), self.padded)


@dataclass
class ConfigResult:
    config: str
    total_bits: int
    ones: int
    p1: float
    overhead: float
    coding_gain: float
    slc: LevelResult
    mlc: LevelResult

    @classmethod
    def from_dict(cls, d: dict) -> "ConfigResult":
        d = dict(d)
        d["slc"] = LevelResult(**d["slc"])
        d["mlc"] = LevelResult(**d["mlc"])
        return cls(**d)


@dataclass
class FileEntry:
    path: str
    size_bytes: int
    results: dict[str, ConfigResult]

    @classmethod
    def from_dict(cls, d: dict) -> "FileEntry":
        return cls(d["path"], d["size_bytes"],
                   {k: ConfigResult.from_dict(v) for k, v in d["results"].items()})


@dataclass
class Histogram:
    bin_width: float
    bins: list[int]

    @classmethod
    def empty(cls, bin_width: float) -> "Histogram":
        if bin_width <= 0:
            raise ValueError("bin width must be positive")
        return cls(bin_width, [0] * math.ceil(1 / bin_width - 1e-9))

    def add(self, p1: float) -> None:
        # tolerance keeps exact bin edges (e.g. 0.015 / 0.005) in the upper bin
        idx = min(math.floor(p1 / self.bin_width + 1e-9), len(self.bins) - 1)
        self.bins[idx] += 1

    def bin_starts(self) -> list[float]:
        return [round(i * self.bin_width, 12) for i in range(len(self.bins))]


@dataclass
class Aggregate:
    files: int
    total_bits: int
    ones: int
    p1_weighted: float | None
    p1_per_file_mean: float | None
    coding_gain: float | None
    pe: float | None
    energy_gain: float | None
    mean_vth: float | None
    relative_field_change: float | None


@dataclass
class CorpusReport:
    configurations: list[str]
    params: dict
    files: list[FileEntry] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)
    aggregates: dict[str, Aggregate] = field(default_factory=dict)
    histograms: dict[str, Histogram] = field(default_factory=dict)
    level: str = "mlc"
    version: int = REPORT_VERSION

    def to_dict(self) -> dict:
        def conv(obj):
            if hasattr(obj, "__dataclass_fields__"):
                return {k: conv(getattr(obj, k)) for k in obj.__dataclass_fields__}
            if isinstance(obj, dict):
                return {k: conv(v) for k, v in obj.items()}
            if isinstance(obj, (list, tuple)):
                return [conv(v) for v in obj]
            return obj

        return {
            "version": self.version,
            "generated_with_params": dict(self.params),
            "level": self.level,
            "configurations": list(self.configurations),
            "files": conv(self.files),
            "skipped": conv(self.skipped),
            "aggregates": conv(self.aggregates),
            "histograms": conv(self.histograms),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusReport":
        return cls(
            configurations=list(d["configurations"]),
            params=dict(d["generated_with_params"]),
            files=[FileEntry.from_dict(f) for f in d["files"]],
            skipped=[dict(s) for s in d["skipped"]],
            aggregates={k: Aggregate(**v) for k, v in d["aggregates"].items()},
            histograms={k: Histogram(**v) for k, v in d["histograms"].items()},
            level=d["level"],
            version=d["version"],
        )


# ---------------------------------------------------------------------------
# per-file analysis

def _config_names(configs: Iterable[SegmentConfig | int]) -> list[str]:
    ns = sorted({(c.n if isinstance(c, SegmentConfig) else int(c)) for c in configs})
    for n in ns:
        SegmentConfig(n).require_stream()
    return [UNCODED] + [str(n) for n in ns]


def _level_result(dist: CellStateDistribution, p: FlashParams) -> LevelResult:
    return LevelResult(
        counts=list(dist.counts),
        padded=dist.padded,
        probabilities=list(dist.probabilities),
        mean_vth=mean_threshold_voltage(dist, p),
        rel_field_change=None,
        energy=program_energy(dist, dist.total, p),
        pe=None,
        energy_gain=None,
        ispp_pulses_total=pulse_total(dist, p),
    )


def _relate(level: LevelResult, base: LevelResult, cg: float, p: FlashParams) -> None:
    try:
        level.rel_field_change = relative_field_change(base.mean_vth, level.mean_vth, p)
    except ZeroDivisionError:
        level.rel_field_change = None
    if base.energy > 0:
        level.pe = 1 - level.energy / base.energy
        level.energy_gain = level.pe * cg


def _results_from_histograms(h: _Histograms, names: Sequence[str], p: FlashParams
                             ) -> dict[str, ConfigResult]:
    results: dict[str, ConfigResult] = {}
    for name in names:
        t = _tables(name)
        total = int(h.size * t["width"])
        ones = int(h.single @ t["ones"])
        if "mlc" in t:
            mlc = h.single @ t["mlc"]
            padded = False
        else:
            mlc = h.pairs @ t["mlc_pair"]
            padded = h.tail is not None
            if padded:
                mlc = mlc + t["mlc_tail"][h.tail]
        overhead = 0.0 if name == UNCODED else SegmentConfig(int(name)).overhead
        p1 = ones / total
        slc = CellStateDistribution("slc", (ones, total - ones))
        results[name] = ConfigResult(
            config=name,
            total_bits=total,
            ones=ones,
            p1=p1,
            overhead=overhead,
            coding_gain=coding_gain(overhead, p1),
            slc=_level_result(slc, p),
            mlc=_level_result(CellStateDistribution("mlc", tuple(int(c) for c in mlc), padded), p),
        )
    base = results[UNCODED]
    for res in results.values():
        _relate(res.slc, base.slc, res.coding_gain, p)
        _relate(res.mlc, base.mlc, res.coding_gain, p)
    return results


def analyze_file(path: str | os.PathLike, configs: Iterable[SegmentConfig | int] = (2, 4, 8),
                 p: FlashParams | None = None) -> FileEntry:
    """Measure one file under every configuration (plus the uncoded baseline).

    Zero-length files give an entry with no results.
    """
    p = p or FlashParams()
    names = _config_names(configs)
    h = _scan(path)
    if h.size == 0:
        return FileEntry(str(path), 0, {})
    return FileEntry(str(path), h.size, _results_from_histograms(h, names, p))


def _worker(args) -> tuple[str, FileEntry | None, str | None]:
    path, names, p = args
    try:
        return path, analyze_file(path, [int(n) for n in names if n != UNCODED], p), None
    except OSError as exc:
        return path, None, exc.strerror or str(exc)


def collect_files(roots: Iterable[str | os.PathLike], recursive: bool = True,
                  extensions: Iterable[str] | None = None) -> tuple[list[str], list[dict]]:
    """Expand roots into a sorted file list plus skipped entries (missing roots, symlinks)."""
    exts = None
    if extensions:
        exts = {e.lower() if e.startswith(".") else "." + e.lower() for e in extensions if e}
    found: set[str] = set()
    skipped: list[dict] = []
    any_root = False

    def want(name: str) -> bool:
        return exts is None or os.path.splitext(name)[1].lower() in exts

    for root in roots:
        root = os.fspath(root)
        if os.path.islink(root):
            any_root = True
            skipped.append({"path": root, "reason": "symbolic link not followed"})
        elif os.path.isfile(root):
            any_root = True
            found.add(root)
        elif os.path.isdir(root):
            any_root = True
            for dirpath, dirnames, filenames in os.walk(root, followlinks=False):
                dirnames.sort()
                for name in filenames:
                    full = os.path.join(dirpath, name)
                    if not want(name):
                        continue
                    if os.path.islink(full):
                        skipped.append({"path": full, "reason": "symbolic link not followed"})
                    elif os.path.isfile(full):
                        found.add(full)
                    else:
                        skipped.append({"path": full, "reason": "not a regular file"})
                if not recursive:
                    break
        else:
            skipped.append({"path": root, "reason": "no such file or directory"})
    if not any_root:
        raise FileNotFoundError("none of the given roots exist")
    return sorted(found), sorted(skipped, key=lambda s: s["path"])


def analyze_corpus(roots: Iterable[str | os.PathLike], recursive: bool = True,
                   extensions: Iterable[str] | None = None,
                   configs: Iterable[SegmentConfig | int] = (2, 4, 8),
                   p: FlashParams | None = None, parallelism: int = 1,
                   bin_width: float = DEFAULT_BIN_WIDTH, level: str = "mlc") -> CorpusReport:
    p = p or FlashParams()
    if level not in ("slc", "mlc"):
        raise ValueError(f"unknown cell level {level!r}")
    names = _config_names(configs)
    paths, skipped = collect_files(roots, recursive, extensions)
    jobs = [(path, names, p) for path in paths]
    if parallelism > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_worker, jobs, chunksize=max(1, len(jobs) // (4 * parallelism))))
    else:
        outcomes = [_worker(job) for job in jobs]
    entries = []
    for path, entry, reason in outcomes:
        if entry is None:
            skipped.append({"path": path, "reason": reason})
        else:
            entries.append(entry)
    if not entries:
        raise NoFilesError("no readable files matched")
    skipped.sort(key=lambda s: s["path"])
    return build_report(entries, names, p, skipped, bin_width, level)


def build_report(entries: list[FileEntry], names: Sequence[str], p: FlashParams,
                 skipped: list[dict] | None = None, bin_width: float = DEFAULT_BIN_WIDTH,
                 level: str = "mlc") -> CorpusReport:
    """Assemble aggregates and histograms; entries are canonicalised by path."""
    entries = sorted(entries, key=lambda e: e.path)
    report = CorpusReport(configurations=list(names), params=p.snapshot(), files=entries,
                          skipped=list(skipped or []), level=level)
    sums = {}
    for name in names:
        hist = Histogram.empty(bin_width)
        total = ones = 0
        p1s = []
        counts = {"slc": np.zeros(2, dtype=np.int64), "mlc": np.zeros(4, dtype=np.int64)}
        padded = False
        for e in entries:
            res = e.results.get(name)
            if res is None:
                continue
            total += res.total_bits
            ones += res.ones
            p1s.append(res.p1)
            hist.add(res.p1)
            counts["slc"] += res.slc.counts
            counts["mlc"] += res.mlc.counts
            padded = padded or res.mlc.padded
        report.histograms[name] = hist
        sums[name] = (total, ones, p1s, counts, padded)

    levels = {}
    for name in names:
        total, ones, p1s, counts, padded = sums[name]
        if total:
            dist = CellStateDistribution(level, tuple(int(c) for c in counts[level]),
                                         padded and level == "mlc")
            levels[name] = _level_result(dist, p)
    for name in names:
        total, ones, p1s, counts, padded = sums[name]
        agg = Aggregate(files=len(p1s), total_bits=total, ones=ones, p1_weighted=None,
                        p1_per_file_mean=None, coding_gain=None, pe=None, energy_gain=None,
                        mean_vth=None, relative_field_change=None)
        if total:
            overhead = 0.0 if name == UNCODED else SegmentConfig(int(name)).overhead
            agg.p1_weighted = ones / total
            agg.p1_per_file_mean = math.fsum(p1s) / len(p1s)
            agg.coding_gain = coding_gain(overhead, agg.p1_weighted)
            lv = levels[name]
            _relate(lv, levels[UNCODED], agg.coding_gain, p)
            agg.pe, agg.energy_gain = lv.pe, lv.energy_gain
            agg.mean_vth, agg.relative_field_change = lv.mean_vth, lv.rel_field_change
        report.aggregates[name] = agg
    return report


def empty_report(configs: Iterable[SegmentConfig | int] = (2, 4, 8), p: FlashParams | None = None,
                 bin_width: float = DEFAULT_BIN_WIDTH, level: str = "mlc") -> CorpusReport:
    return build_report([], _config_names(configs), p or FlashParams(), [], bin_width, level)


# ---------------------------------------------------------------------------
# output

def report_json(report: CorpusReport) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def parse_report(text: str) -> CorpusReport:
    return CorpusReport.from_dict(json.loads(text))


def _fmt(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def report_csv(report: CorpusReport) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for e in report.files:
        for name in report.configurations:
            res = e.results.get(name)
            if res is None:
                writer.writerow([e.path, e.size_bytes, name] + [""] * (len(CSV_COLUMNS) - 3))
                continue
            lv = getattr(res, report.level)
            mlc = res.mlc.probabilities
            writer.writerow([_fmt(v) for v in (
                e.path, e.size_bytes, name, res.p1, res.overhead, res.coding_gain,
                *mlc, res.mlc.mean_vth, res.mlc.rel_field_change,
                lv.energy, lv.pe, lv.energy_gain, lv.ispp_pulses_total)])
    return out.getvalue()


def histogram_csv(hist: Histogram) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("bin_start", "count"))
    for start, count in zip(hist.bin_starts(), hist.bins):
        writer.writerow((repr(start), count))
    return out.getvalue()


def histogram_paths(sink: str | os.PathLike, report: CorpusReport) -> dict[str, Path]:
    sink = Path(sink)
    return {name: sink.with_name(f"{sink.stem}.hist_{name}.csv") for name in report.histograms}


def emit_report(report: CorpusReport, fmt: str, sink: str | os.PathLike | IO[str]) -> None:
    """Write the report as JSON or CSV.

    CSV output to a path also writes one ``<stem>.hist_<config>.csv`` per configuration.
    """
    if fmt == "json":
        text = report_json(report)
    elif fmt == "csv":
        text = report_csv(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if hasattr(sink, "write"):
        sink.write(text)
        return
    Path(sink).write_text(text, encoding="utf-8")
    if fmt == "csv":
        for name, path in histogram_paths(sink, report).items():
            path.write_text(histogram_csv(report.histograms[name]), encoding="utf-8")
