"""
Variable-delay interferometer schemes: delay decomposition, per-delay arm
losses, component counts and the cost of scaling to longer packets.

Four topologies are modelled:

passive
    A 1x(L-1) beam splitter feeding L-1 fixed-delay interferometers.
simple-active
    Mach-Zehnder with log2(m) switchable 2x2 delay units per arm. A unit in
    the cross state costs twice the bar-state loss.
balanced-active
    Mach-Zehnder with two 1xm switches per arm, so every path crosses the
    same number of switch stages.
faraday-michelson
    One 1xm switch per arm, traversed twice (out and back) with Faraday
    mirrors terminating each delay line.

Default losses are calibrated, not measured: with a 0.6 dB pass loss per
1x2 switch element and 2.0 dB of fixed loss the Faraday-Michelson scheme
averages 5.60 dB at L = 65.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

PASSIVE = "passive"
SIMPLE_ACTIVE = "simple-active"
BALANCED_ACTIVE = "balanced-active"
FARADAY_MICHELSON = "faraday-michelson"
KINDS = (PASSIVE, SIMPLE_ACTIVE, BALANCED_ACTIVE, FARADAY_MICHELSON)
KIND_ALIASES = {"fmi": FARADAY_MICHELSON, "simple": SIMPLE_ACTIVE, "balanced": BALANCED_ACTIVE}

DEFAULT_SWITCH_LOSS_DB = 0.6
DEFAULT_UNIT_LOSS_DB = 0.8
DEFAULT_BASE_LOSS_DB = 2.0


class MeasuredTableError(ValueError):
    pass


def _default_splitter(kind: str, L: int) -> float:
    if kind == PASSIVE:
        return 10.0 * math.log10(L - 1)
    return 0.0


def _default_base(kind: str) -> float:
    return 0.0 if kind == SIMPLE_ACTIVE else DEFAULT_BASE_LOSS_DB


@dataclass(frozen=True)
class SchemeSpec:
    kind: str = FARADAY_MICHELSON
    L: int = 65
    switch_loss_pass_dB: float = DEFAULT_SWITCH_LOSS_DB
    unit_loss_dB: float = DEFAULT_UNIT_LOSS_DB
    splitter_loss_dB: Optional[float] = None
    base_loss_dB: Optional[float] = None
    tolerance_dB: float = 0.0

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind, self.kind)
        object.__setattr__(self, "kind", kind)
        if kind not in KINDS:
            raise ValueError(f"kind: must be one of {KINDS}, got {self.kind!r}")
        if self.L < 2:
            raise ValueError(f"L: must be >= 2, got {self.L!r}")
        if kind != PASSIVE:
            arm_size(self.L)  # raises if L - 1 is not a power-of-two square
        for name in ("switch_loss_pass_dB", "unit_loss_dB", "splitter_loss_dB",
                     "base_loss_dB", "tolerance_dB"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name}: losses must be >= 0, got {value!r}")

    @property
    def splitter(self) -> float:
        if self.splitter_loss_dB is None:
            return _default_splitter(self.kind, self.L)
        return self.splitter_loss_dB

    @property
    def base(self) -> float:
        return _default_base(self.kind) if self.base_loss_dB is None else self.base_loss_dB


@dataclass(frozen=True)
class DelayLossEntry:
    r: int
    x: int
    y: int
    long_IL_dB: float
    short_IL_dB: float
    total_IL_dB: float
    imbalance_dB: float


@dataclass
class SchemeReport:
    kind: str
    L: int
    detector_channels: int
    interferometers: int
    switches_1xm: int
    switch_elements: int
    element_type: str
    mean_IL_dB: float
    max_IL_dB: float
    min_IL_dB: float
    max_imbalance_dB: float
    il_spread_dB: float = 0.0


def arm_size(L: int) -> int:
    """Number of delay lines per arm, ``m = sqrt(L - 1)``, a power of two."""
    m = math.isqrt(L - 1)
    if m * m != L - 1 or m < 2 or m & (m - 1):
        raise ValueError(f"L = {L}: L - 1 must be the square of a power of two >= 2")
    return m


def decompose_delay(r: int, m: int = 8) -> tuple[int, int]:
    """Split delay ``r`` into long-arm ``x`` (multiple of m) and short-arm ``y`` < m."""
    if not (1 <= r <= m * m):
        raise ValueError(f"r: must lie in [1, {m * m}], got {r!r}")
    x = m * -(-r // m)
    return x, x - r


def combine_arms(long_dB, short_dB):
    """Loss of the two arms taken together (mean transmitted power, in dB)."""
    t = 0.5 * (10.0 ** (-np.asarray(long_dB) / 10.0) + 10.0 ** (-np.asarray(short_dB) / 10.0))
    out = -10.0 * np.log10(t)
    return float(out) if np.ndim(out) == 0 else out


def visibility(long_dB, short_dB):
    """Two-beam fringe visibility for unequal arm transmissions."""
    i_l = 10.0 ** (-np.asarray(long_dB, dtype=float) / 10.0)
    i_s = 10.0 ** (-np.asarray(short_dB, dtype=float) / 10.0)
    v = 2.0 * np.sqrt(i_l * i_s) / (i_l + i_s)
    return float(v) if np.ndim(v) == 0 else v


def visibility_error(long_dB, short_dB):
    """Extra wrong-detector probability from imperfect visibility, (1 - V) / 2.

    Optional extension; not part of the default error model.
    """
    return 0.5 * (1.0 - visibility(long_dB, short_dB))


def _popcount(v: int) -> int:
    return bin(v).count("1")


def _arm_losses(spec: SchemeSpec, x: int, y: int, m: int) -> tuple[float, float]:
    if spec.kind == PASSIVE:
        return 0.0, 0.0
    stages = int(math.log2(m))
    if spec.kind == SIMPLE_ACTIVE:
        u = spec.unit_loss_dB
        # bar state costs u, cross state 2u
        long_cross = _popcount(x // m - 1)
        short_cross = _popcount(y)
        return u * (stages + long_cross), u * (stages + short_cross)
    # balanced-active: two switches in series, one pass each
    # faraday-michelson: one switch, out and back
    per_arm = 2 * stages * spec.switch_loss_pass_dB
    return per_arm, per_arm


def scheme_loss_table(spec: SchemeSpec) -> list[DelayLossEntry]:
    """Per-delay arm losses for every delay 1..L-1."""
    L = spec.L
    rows = []
    m = math.isqrt(L - 1) if spec.kind == PASSIVE else arm_size(L)
    fixed = spec.splitter + spec.base
    for r in range(1, L):
        if spec.kind == PASSIVE and m * m != L - 1:
            x, y = r, 0
        else:
            x, y = decompose_delay(r, m)
        long_dB, short_dB = _arm_losses(spec, x, y, m)
        total = fixed + combine_arms(long_dB, short_dB)
        rows.append(DelayLossEntry(r=r, x=x, y=y, long_IL_dB=long_dB, short_IL_dB=short_dB,
                                   total_IL_dB=total, imbalance_dB=abs(long_dB - short_dB)))
    return rows


def _path_components(spec: SchemeSpec, m: int) -> int:
    """Loss-bearing components along one arm path, for tolerance bounds."""
    stages = int(math.log2(m)) if m > 1 else 0
    return {
        PASSIVE: 1,
        SIMPLE_ACTIVE: stages,
        BALANCED_ACTIVE: 2 * stages,
        FARADAY_MICHELSON: 2 * stages,
    }[spec.kind] + 1


def scheme_report(spec: SchemeSpec) -> SchemeReport:
    """Component counts and loss summary for a scheme."""
    rows = scheme_loss_table(spec)
    totals = np.array([e.total_IL_dB for e in rows])
    L = spec.L
    m = math.isqrt(L - 1)
    if spec.kind == PASSIVE:
        channels, interferometers, switches, elements, etype = 2 * (L - 1), L - 1, 0, 0, "none"
    elif spec.kind == SIMPLE_ACTIVE:
        channels, interferometers, switches = 2, 1, 0
        elements, etype = 2 * int(math.log2(m)), "2x2"
    elif spec.kind == BALANCED_ACTIVE:
        channels, interferometers, switches = 2, 1, 4
        elements, etype = 4 * (m - 1), "1x2"
    else:
        channels, interferometers, switches = 2, 1, 2
        elements, etype = 2 * (m - 1), "1x2"
    return SchemeReport(
        kind=spec.kind, L=L, detector_channels=channels, interferometers=interferometers,
        switches_1xm=switches, switch_elements=elements, element_type=etype,
        mean_IL_dB=float(totals.mean()), max_IL_dB=float(totals.max()), min_IL_dB=float(totals.min()),
        max_imbalance_dB=max(e.imbalance_dB for e in rows),
        il_spread_dB=_path_components(spec, m) * spec.tolerance_dB,
    )


def scalability_delta(spec: SchemeSpec, new_L: int) -> float:
    """Change in mean insertion loss when the packet length becomes ``new_L``."""
    m_new = math.isqrt(new_L - 1)
    if new_L < 2 or m_new * m_new != new_L - 1:
        raise ValueError(f"new_L = {new_L}: new_L - 1 must be a perfect square")
    if new_L == spec.L:
        return 0.0
    grown = replace(spec, L=new_L)
    return scheme_report(grown).mean_IL_dB - scheme_report(spec).mean_IL_dB


@dataclass
class MeasuredTable:
    """Lab-measured per-delay arm losses, with optional per-delay e_s."""

    r: np.ndarray
    long_IL_dB: np.ndarray
    short_IL_dB: np.ndarray
    e_s: Optional[np.ndarray] = None

    @property
    def L(self) -> int:
        return len(self.r) + 1

    @property
    def total_IL_dB(self) -> np.ndarray:
        return combine_arms(self.long_IL_dB, self.short_IL_dB)

    def mean_total_IL(self) -> float:
        return float(np.mean(self.total_IL_dB))

    def eta_by_delay(self, link) -> np.ndarray:
        """Per-delay overall efficiency, replacing the link's average IL."""
        return link.eta_D * 10.0 ** (-(link.alpha * link.length_km + self.total_IL_dB) / 10.0)


def load_measured_tables(path) -> MeasuredTable:
    """Read ``r,long_IL_dB,short_IL_dB[,e_s]`` CSV; ``r`` must cover 1..L-1 once."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.lstrip().startswith("#"))
        fields = reader.fieldnames or []
        for col in ("r", "long_IL_dB", "short_IL_dB"):
            if col not in fields:
                raise MeasuredTableError(f"{path}: missing column {col!r}")
        has_es = "e_s" in fields
        rows = []
        for lineno, row in enumerate(reader, start=2):
            try:
                r = int(row["r"])
                lo, sh = float(row["long_IL_dB"]), float(row["short_IL_dB"])
                es = float(row["e_s"]) if has_es else None
            except (TypeError, ValueError) as exc:
                raise MeasuredTableError(f"{path}:{lineno}: unparsable row ({exc})") from None
            if lo < 0 or sh < 0:
                raise MeasuredTableError(f"{path}:{lineno}: negative loss for r={r}")
            if es is not None and not (0.0 <= es <= 0.5):
                raise MeasuredTableError(f"{path}:{lineno}: e_s={es} outside [0, 0.5]")
            rows.append((r, lo, sh, es))
    if not rows:
        raise MeasuredTableError(f"{path}: no rows")
    rows.sort(key=lambda t: t[0])
    rs = [t[0] for t in rows]
    if len(set(rs)) != len(rs):
        dup = sorted({v for v in rs if rs.count(v) > 1})
        raise MeasuredTableError(f"{path}: duplicate delays {dup}")
    if rs != list(range(1, len(rs) + 1)):
        missing = sorted(set(range(1, max(rs) + 1)) - set(rs))
        raise MeasuredTableError(f"{path}: delays must cover 1..{len(rs)}; missing {missing}")
    return MeasuredTable(
        r=np.array(rs),
        long_IL_dB=np.array([t[1] for t in rows]),
        short_IL_dB=np.array([t[2] for t in rows]),
        e_s=np.array([t[3] for t in rows]) if has_es else None,
    )
