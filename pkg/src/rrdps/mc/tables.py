"""Per-session lookup tables consumed by the sampling kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..keyrate import ProtocolParams, poisson_pmf
from ..model import LinkParams, overall_efficiency

DARK_PER_GATE = "gate"
DARK_PER_PACKET = "packet"
DARK_MODELS = (DARK_PER_GATE, DARK_PER_PACKET)


@dataclass(frozen=True)
class SamplingTables:
    """Everything a kernel needs, indexed so that row/entry ``r`` is delay ``r``.

    cdf
        Cumulative photon-number distribution of a packet, truncated once the
        remaining tail is below 1e-17.
    surv
        ``surv[r, n]``: probability that at least one of ``n`` photons
        reaches a detector.
    dark_valid
        Probability of a dark click inside the interference window.
    e_s
        Wrong-detector probability for a valid signal click.
    """

    L: int
    cdf: np.ndarray
    surv: np.ndarray
    dark_valid: np.ndarray
    e_s: np.ndarray


def photon_cdf(lam: float) -> np.ndarray:
    if lam == 0.0:
        return np.ones(1)
    top = int(math.ceil(lam + 12.0 * math.sqrt(lam) + 30.0))
    cdf = np.cumsum(poisson_pmf(lam, top))
    cut = int(np.searchsorted(cdf, 1.0 - 1e-17)) + 1
    return cdf[: min(cut, len(cdf))].copy()


def build_tables(protocol: ProtocolParams, link: LinkParams, dark_model: str = DARK_PER_GATE,
                 measured=None, visibility_errors: bool = False,
                 e_s_by_delay: Optional[np.ndarray] = None) -> SamplingTables:
    """Sampling tables for a session.

    ``measured`` is an optional :class:`~rrdps.interferometer.MeasuredTable`;
    its per-delay losses replace the link's average interferometer loss and
    its ``e_s`` column (if any) replaces the scalar ``e_s``.

    ``dark_model`` chooses how ``d`` is read. ``"gate"``: each time bin of the
    interference window has dark probability ``d``. ``"packet"``: one dark
    opportunity of probability ``d`` per packet, landing inside the window
    with probability ``(L - r) / L``.
    """
    L = protocol.L
    if dark_model not in DARK_MODELS:
        raise ValueError(f"dark_model: must be one of {DARK_MODELS}, got {dark_model!r}")
    r = np.arange(L)  # entry 0 unused
    window = np.maximum(L - r, 0)

    if measured is not None:
        if measured.L != L:
            raise ValueError(f"measured table covers L = {measured.L}, protocol has L = {L}")
        eta_r = np.concatenate([[0.0], measured.eta_by_delay(link)])
    else:
        eta_r = np.full(L, overall_efficiency(link))
    n = np.arange(len(photon_cdf(L * protocol.mu)))
    surv = 1.0 - np.power(1.0 - eta_r[:, None], n[None, :])

    if dark_model == DARK_PER_GATE:
        dark_valid = -np.expm1(window * math.log1p(-link.d))
    else:
        dark_valid = link.d * window / L
    dark_valid[0] = 0.0

    if e_s_by_delay is not None:
        e_s = np.concatenate([[0.0], np.asarray(e_s_by_delay, dtype=float)])
    elif measured is not None and measured.e_s is not None:
        e_s = np.concatenate([[0.0], measured.e_s])
    else:
        e_s = np.full(L, link.e_s)
    if visibility_errors and measured is not None:
        from ..interferometer import visibility_error

        e_s = e_s + np.concatenate([[0.0], visibility_error(measured.long_IL_dB, measured.short_IL_dB)])
    e_s = np.clip(e_s, 0.0, 1.0)
    if len(e_s) != L:
        raise ValueError(f"e_s table must have {L - 1} entries")

    return SamplingTables(
        L=L,
        cdf=np.ascontiguousarray(photon_cdf(L * protocol.mu)),
        surv=np.ascontiguousarray(surv),
        dark_valid=np.ascontiguousarray(dark_valid, dtype=float),
        e_s=np.ascontiguousarray(e_s),
    )
