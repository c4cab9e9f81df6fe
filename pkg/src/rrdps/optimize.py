"""Photon-number optimisation, distance sweeps and the distance cutoff."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .keyrate import ProtocolParams, RateReport
from .model import (
    OBJECTIVE_ASYMPTOTIC,
    OBJECTIVE_FINITE,
    LinkParams,
    UndefinedRateError,
    evaluate,
)

MU_MIN = 1e-4
MU_MAX = 0.5
GRID_POINTS = 241
MU_RTOL = 1e-3
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoPositiveRateError(RuntimeError):
    pass


@dataclass
class SweepPoint:
    length_km: float
    mu_opt: float
    report: RateReport


def _objective_value(report: RateReport, objective: str) -> float:
    return report.R_ft if objective == OBJECTIVE_FINITE else report.R


def _safe_eval(protocol, link, mu, objective):
    try:
        return evaluate(protocol, link, mu=mu, objective=objective)
    except UndefinedRateError:
        return None


def golden_section_max(fn, lo: float, hi: float, rtol: float = MU_RTOL, max_iter: int = 200):
    """Maximise a unimodal ``fn`` on ``[lo, hi]``.

    Stops once the bracket width falls below ``rtol`` times its midpoint.
    Returns ``(x, fn(x))`` for the best point evaluated.
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    best = max((fc, -c, c), (fd, -d, d))
    for _ in range(max_iter):
        if (b - a) <= rtol * 0.5 * (a + b):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
            cand = (fc, -c, c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
            cand = (fd, -d, d)
        best = max(best, cand)
    return best[2], best[0]


def optimize_mu(protocol: ProtocolParams, link: LinkParams, length_km: float | None = None,
                objective: str = OBJECTIVE_ASYMPTOTIC, grid_points: int = GRID_POINTS,
                mu_bounds: tuple[float, float] = (MU_MIN, MU_MAX)):
    """Best mean photon number per pulse at one fiber length.

    A logarithmic grid locates the best region, then golden-section search
    refines inside the neighbouring grid cells. The threshold is re-optimised
    at every trial. Returns ``(mu, report)``; when no trial gives a positive
    rate the result is ``(0.0, report_at_grid_floor)`` with a note set.
    """
    if objective not in (OBJECTIVE_ASYMPTOTIC, OBJECTIVE_FINITE):
        raise ValueError(f"unknown objective {objective!r}")
    if length_km is not None:
        if length_km < 0:
            raise ValueError(f"length_km: must be >= 0, got {length_km!r}")
        link = link.at(length_km)
    protocol = replace(protocol, v_th=None)

    grid = np.geomspace(mu_bounds[0], mu_bounds[1], grid_points)
    values = np.empty(grid_points)
    for j, mu in enumerate(grid):
        rep = _safe_eval(protocol, link, float(mu), objective)
        values[j] = -1.0 if rep is None else _objective_value(rep, objective)

    best = int(np.argmax(values))
    if values[best] <= 0.0:
        floor = _safe_eval(protocol, link, float(grid[0]), objective)
        if floor is not None:
            floor.note = "no positive key rate"
        return 0.0, floor

    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]

    def score(mu):
        rep = _safe_eval(protocol, link, mu, objective)
        return -1.0 if rep is None else _objective_value(rep, objective)

    mu_star, val = golden_section_max(score, float(lo), float(hi))
    if val < values[best]:
        mu_star = float(grid[best])
    return mu_star, evaluate(protocol, link, mu=mu_star, objective=objective)


def distance_sweep(protocol: ProtocolParams, link: LinkParams, lengths,
                   objective: str = OBJECTIVE_ASYMPTOTIC, workers: int = 1) -> list[SweepPoint]:
    """Optimised operating point for each fiber length, in input order."""
    lengths = [float(x) for x in lengths]
    if any(b < a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("lengths: must be sorted ascending")

    def one(length):
        mu, rep = optimize_mu(protocol, link, length, objective=objective)
        return SweepPoint(length_km=length, mu_opt=mu, report=rep)

    if workers <= 1 or len(lengths) < 2:
        return [one(x) for x in lengths]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, lengths))


def _positive(protocol, link, length, objective) -> bool:
    mu, rep = optimize_mu(protocol, link, length, objective=objective)
    return mu > 0.0 and rep is not None and _objective_value(rep, objective) > 0.0


def max_distance(protocol: ProtocolParams, link: LinkParams, tol_km: float = 0.5,
                 ceiling_km: float = 2000.0, objective: str = OBJECTIVE_ASYMPTOTIC) -> float:
    """Largest fiber length with a positive optimised key rate.

    Bisection to ``tol_km``. If the rate is still positive at ``ceiling_km``
    (noiseless links, where only the photon-number grid floor limits reach)
    the ceiling is returned.
    """
    if not _positive(protocol, link, 0.0, objective):
        raise NoPositiveRateError("no positive key rate at 0 km")
    lo, hi = 0.0, 50.0
    while _positive(protocol, link, hi, objective):
        lo = hi
        if hi >= ceiling_km:
            return ceiling_km
        hi = min(hi * 2.0, ceiling_km)
    while hi - lo > tol_km:
        mid = 0.5 * (lo + hi)
        if _positive(protocol, link, mid, objective):
            lo = mid
        else:
            hi = mid
    return lo
