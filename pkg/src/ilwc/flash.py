"""Analytical NAND cell model: state mapping, oxide fields, coupling, cell errors, ISPP.

Voltages are relative to the erased level (V_start = mu(S11) = 0). With the
default ``cap_ratio = t_ox = 1`` and ``v_thi = 0`` absolute fields come out in
normalised units; the ratios between them are what carry meaning.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ParamFileError(ValueError):
    pass


class SLCState(IntEnum):
    ERASED = 0       # stores '1'
    PROGRAMMED = 1   # stores '0'


class MLCState(IntEnum):
    S11 = 0
    S10 = 1
    S01 = 2
    S00 = 3


LEVELS = ("slc", "mlc")
ERROR_MODEL_KEYS = ("alpha1", "beta1", "alpha2", "beta2")


@dataclass(frozen=True)
class FlashParams:
    mu_s11: float = 0.0
    mu_s10: float = 1.1   # interpolated; only the S01/S00 levels are pinned
    mu_s01: float = 2.25
    mu_s00: float = 3.5
    slc_programmed_dv: float = 2.0
    v_thi: float = 0.0
    cap_ratio: float = 1.0
    t_ox: float = 1.0
    gamma_fg1: float = 0.1
    gamma_fg2: float = 0.05
    v_pass: float = 5.0
    delta_v_pp: float = 0.2
    beta_ispp: float = 1.14
    t_step: float = 1.0
    alpha1: float | None = None
    beta1: float | None = None
    alpha2: float | None = None
    beta2: float | None = None
    n_pe: float = 13.35e5
    e_pulse: float = 1.0
    e_cell_base: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None and f.name in ERROR_MODEL_KEYS:
                continue
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{f.name} must be a finite number, got {value!r}")
        if self.delta_v_pp <= 0:
            raise ValueError("delta_v_pp must be positive")
        if self.beta_ispp <= 0:
            raise ValueError("beta_ispp must be positive")
        if not 0 < self.cap_ratio <= 1:
            raise ValueError("cap_ratio must lie in (0, 1]")
        if self.t_ox <= 0:
            raise ValueError("t_ox must be positive")
        if self.gamma_fg1 < 0 or self.gamma_fg2 < 0:
            raise ValueError("coupling ratios must be non-negative")
        if self.n_pe < 0:
            raise ValueError("n_pe must be non-negative")
        if self.e_pulse < 0 or self.e_cell_base < 0:
            raise ValueError("energy coefficients must be non-negative")
        if self.t_step < 0:
            raise ValueError("t_step must be non-negative")

    def state_voltages(self, level: str) -> tuple[float, ...]:
        """Threshold voltage of each state, indexed like SLCState / MLCState."""
        if level == "slc":
            return (self.mu_s11, self.mu_s11 + self.slc_programmed_dv)
        if level == "mlc":
            return (self.mu_s11, self.mu_s10, self.mu_s01, self.mu_s00)
        raise ValueError(f"unknown cell level {level!r}")

    @property
    def has_error_model(self) -> bool:
        return all(getattr(self, k) is not None for k in ERROR_MODEL_KEYS)

    def snapshot(self) -> dict:
        return asdict(self)

    def with_(self, **changes) -> "FlashParams":
        return replace(self, **changes)


def parse_params(text: str, base: FlashParams | None = None) -> FlashParams:
    """Parse ``key = value`` lines. Blank lines and ``#`` comments are ignored."""
    known = {f.name for f in fields(FlashParams)}
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParamFileError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ParamFileError(f"line {lineno}: unknown parameter {key!r}")
        if key in values:
            raise ParamFileError(f"line {lineno}: duplicate parameter {key!r}")
        try:
            values[key] = float(value)
        except ValueError:
            raise ParamFileError(f"line {lineno}: {key} = {value!r} is not a number") from None
    try:
        return replace(base or FlashParams(), **values)
    except ValueError as exc:
        raise ParamFileError(str(exc)) from None


def load_params(path: str | Path | None) -> FlashParams:
    if path is None:
        return FlashParams()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParamFileError(f"cannot read parameter file {path}: {exc}") from None
    return parse_params(text)


def dump_params(p: FlashParams) -> str:
    return "".join(f"{k} = {v!r}\n" for k, v in p.snapshot().items() if v is not None)


# ---------------------------------------------------------------------------
# cell states

@dataclass(frozen=True)
class CellStateDistribution:
    level: str
    counts: tuple[int, ...]
    padded: bool = False

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"unknown cell level {self.level!r}")
        if len(self.counts) != (2 if self.level == "slc" else 4):
            raise ValueError(f"{self.level} needs {2 if self.level == 'slc' else 4} state counts")
        if any(c < 0 for c in self.counts):
            raise ValueError("state counts must be non-negative")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def probabilities(self) -> tuple[float, ...]:
        total = self.total
        if total == 0:
            raise ValueError("empty distribution has no probabilities")
        return tuple(c / total for c in self.counts)

    def __add__(self, other: "CellStateDistribution") -> "CellStateDistribution":
        if self.level != other.level:
            raise ValueError("cannot merge SLC and MLC distributions")
        return CellStateDistribution(
            self.level, tuple(a + b for a, b in zip(self.counts, other.counts)),
            self.padded or other.padded)

    @classmethod
    def from_probabilities(cls, level: str, probs: Sequence[float], scale: int = 10**9
                           ) -> "CellStateDistribution":
        return cls(level, tuple(round(p * scale) for p in probs))


def map_bits_to_states(bits: Iterable[int] | str | np.ndarray, level: str = "mlc"
                       ) -> tuple[CellStateDistribution, np.ndarray]:
    """Assign bits to cells; returns the distribution and the per-cell state codes.

    MLC cells take consecutive bit pairs (first bit high); an odd trailing
    bit is completed with a '1' and the distribution is flagged ``padded``.
    """
    if isinstance(bits, str):
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits if isinstance(bits, np.ndarray) else list(bits), dtype=np.int64)
    if arr.size == 0:
        raise ValueError("no bits to map")
    if ((arr != 0) & (arr != 1)).any():
        raise ValueError("bit sequence may only contain 0 and 1")
    arr = arr.astype(np.uint8)
    padded = False
    if level == "slc":
        states = 1 - arr
        nstates = 2
    elif level == "mlc":
        if arr.size % 2:
            arr = np.append(arr, np.uint8(1))
            padded = True
        pairs = arr.reshape(-1, 2)
        states = 3 - (2 * pairs[:, 0] + pairs[:, 1])
        nstates = 4
    else:
        raise ValueError(f"unknown cell level {level!r}")
    counts = np.bincount(states, minlength=nstates)
    return CellStateDistribution(level, tuple(counts), padded), states.astype(np.int64)


def mean_threshold_voltage(dist: CellStateDistribution, p: FlashParams) -> float:
    mus = p.state_voltages(dist.level)
    return sum(pr * mu for pr, mu in zip(dist.probabilities, mus))


# ---------------------------------------------------------------------------
# fields and coupling

def intrinsic_field(v_th: float, p: FlashParams) -> float:
    """Oxide field from stored charge, cap_ratio * (v_th - v_thi) / t_ox."""
    if p.t_ox <= 0:
        raise ValueError("t_ox must be positive")
    return p.cap_ratio * (v_th - p.v_thi) / p.t_ox


def relative_field_change(v_before: float, v_after: float, p: FlashParams) -> float:
    """Fractional drop in intrinsic field going from ``v_before`` to ``v_after``.

    Process constants cancel, so only ``v_thi`` matters.
    """
    denom = v_before - p.v_thi
    if denom == 0:
        raise ZeroDivisionError("v_before equals v_thi: reference field is zero")
    return (v_before - v_after) / denom


def coupling_shift(dv_wordline_neighbor: float, dv_bitline_a: float, dv_bitline_b: float,
                   p: FlashParams) -> float:
    return p.gamma_fg1 * dv_wordline_neighbor + p.gamma_fg2 * (dv_bitline_a + dv_bitline_b)


def worst_case_coupling(dv_max: float, p: FlashParams) -> float:
    if dv_max < 0:
        raise ValueError("dv_max must be non-negative")
    return (p.gamma_fg1 + 2 * p.gamma_fg2) * dv_max


def read_disturb_field(v_th: float, p: FlashParams) -> float:
    """Field across the oxide of an unselected cell held at v_pass during a read."""
    if p.t_ox <= 0:
        raise ValueError("t_ox must be positive")
    return p.cap_ratio * ((p.v_pass - p.v_thi) - v_th) / p.t_ox


def cell_error_rate(v_th: float, p: FlashParams) -> float:
    if not p.has_error_model:
        missing = [k for k in ERROR_MODEL_KEYS if getattr(p, k) is None]
        raise ValueError(f"cell error model needs explicit coefficients: {', '.join(missing)}")
    if v_th <= 0:
        raise ValueError("cell error model needs v_th > 0")
    lv = math.log(v_th)
    return (p.alpha1 * lv + p.beta1) * math.exp((p.alpha2 * lv + p.beta2) * p.n_pe) - 1


# ---------------------------------------------------------------------------
# programming

def ispp_steps(dv_th: float, p: FlashParams) -> int:
    """Pulses needed to raise a cell by ``dv_th`` volts."""
    if p.delta_v_pp <= 0 or p.beta_ispp <= 0:
        raise ValueError("ISPP increment and efficiency must be positive")
    if dv_th < 0:
        raise ValueError("dv_th must be non-negative")
    if dv_th == 0:
        return 0
    return math.ceil(dv_th / (p.beta_ispp * p.delta_v_pp))


def program_time(steps: int, p: FlashParams) -> float:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    return steps * p.t_step


def state_pulses(level: str, p: FlashParams) -> tuple[int, ...]:
    """ISPP pulses to reach each state from erase."""
    return tuple(ispp_steps(mu - p.mu_s11, p) for mu in p.state_voltages(level))


def state_energies(level: str, p: FlashParams) -> tuple[float, ...]:
    return tuple(p.e_cell_base + n * p.e_pulse for n in state_pulses(level, p))


def program_energy(dist: CellStateDistribution, total_cells: int, p: FlashParams) -> float:
    """Surrogate program energy: each cell costs a fixed base plus one quantum per ISPP pulse."""
    if total_cells <= 0:
        raise ValueError("total_cells must be positive")
    per_state = state_energies(dist.level, p)
    return total_cells * sum(pr * e for pr, e in zip(dist.probabilities, per_state))


def pulse_total(dist: CellStateDistribution, p: FlashParams) -> int:
    return sum(c * n for c, n in zip(dist.counts, state_pulses(dist.level, p)))


def program_energy_reduction(uncoded: CellStateDistribution, coded: CellStateDistribution,
                             p: FlashParams) -> float:
    """1 - E_coded / E_uncoded, each stream charged for the cells it actually occupies."""
    e_unc = program_energy(uncoded, uncoded.total, p)
    if e_unc == 0:
        raise ZeroDivisionError("uncoded program energy is zero")
    return 1 - program_energy(coded, coded.total, p) / e_unc


# ---------------------------------------------------------------------------
# device geometries used when the program-energy comparison was first reported;
# the surrogate model does not consume them, they document what was simulated

@dataclass(frozen=True)
class DeviceGeometry:
    name: str
    level: str
    page_size_bytes: int
    feature_size_nm: int
    pages_per_block: int
    blocks_per_plane: int
    planes_per_die: int
    dies_per_chip: int

    @property
    def bits_per_cell(self) -> int:
        return 1 if self.level == "slc" else 2

    @property
    def cells_per_page(self) -> int:
        return self.page_size_bytes * 8 // self.bits_per_cell

    @property
    def capacity_bytes(self) -> int:
        return (self.page_size_bytes * self.pages_per_block * self.blocks_per_plane
                * self.planes_per_die * self.dies_per_chip)


DEVICE_PRESETS = {
    g.name: g for g in (
        DeviceGeometry("SLC-A", "slc", 2048, 73, 64, 2048, 2, 1),
        DeviceGeometry("SLC-B", "slc", 2048, 72, 64, 2048, 2, 1),
        DeviceGeometry("MLC-A", "mlc", 2048, 72, 128, 2048, 2, 1),
    )
}
