"""Analytic channel, interferometer and detector model.

Overall efficiency, delay-resolved and averaged yields, the packet yield Q
and the sifted-bit error rate, composed into a :class:`RateReport`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .keyrate import (
    InsufficientKeyError,
    ProtocolParams,
    RateReport,
    asymptotic_rate,
    finite_rate,
    optimal_vth,
    source_tag_errors,
)

OBJECTIVE_ASYMPTOTIC = "asymptotic"
OBJECTIVE_FINITE = "finite"


class UndefinedRateError(ValueError):
    """The error rate has a zero denominator (no signal and no dark counts)."""


@dataclass(frozen=True)
class LinkParams:
    """Fiber channel plus Bob's receiver.

    ``d`` is the combined dark-count probability of both detector channels,
    entering the yields additively. ``e_s`` is the probability that a signal
    photon lands in the wrong detector.
    """

    alpha: float = 0.2
    length_km: float = 0.0
    alpha_IL: float = 5.60
    eta_D: float = 0.203
    d: float = 2.1e-6
    e_s: float = 0.022

    def __post_init__(self):
        checks = (
            ("alpha", self.alpha >= 0),
            ("length_km", self.length_km >= 0),
            ("alpha_IL", self.alpha_IL >= 0),
            ("eta_D", 0.0 <= self.eta_D <= 1.0),
            ("d", 0.0 <= self.d < 1.0),
            ("e_s", 0.0 <= self.e_s <= 0.5),
        )
        for name, ok in checks:
            value = getattr(self, name)
            if not ok or not math.isfinite(value):
                raise ValueError(f"{name}: out of range, got {value!r}")

    def at(self, length_km: float) -> "LinkParams":
        return replace(self, length_km=float(length_km))


def overall_efficiency(link: LinkParams) -> float:
    """Detector efficiency times fiber and interferometer transmittance."""
    return link.eta_D * 10.0 ** (-(link.alpha * link.length_km + link.alpha_IL) / 10.0)


def yield_given_delay(i, r: int, L: int, eta: float, d: float):
    """Probability an i-photon packet gives a valid click at delay ``r``."""
    if not (1 <= r <= L - 1):
        raise ValueError(f"r: must lie in [1, {L - 1}], got {r!r}")
    y = (L - r) / L * (1.0 - (1.0 - eta) ** np.asarray(i, dtype=float) + d)
    return _as_scalar(np.clip(y, 0.0, 1.0))


def average_yield(i, L: int, eta: float, d: float):
    """Yield of an i-photon packet averaged over uniformly chosen delays."""
    if L < 2:
        raise ValueError(f"L: must be >= 2, got {L!r}")
    y = 0.5 * (1.0 - (1.0 - eta) ** np.asarray(i, dtype=float) + d)
    return _as_scalar(np.clip(y, 0.0, 1.0))


def packet_yield(L: int, mu: float, eta: float, d: float) -> float:
    """Probability that a packet produces a sifted bit."""
    return min(0.5 * (-math.expm1(-eta * L * mu) + d), 1.0)


def bit_error_rate(mu: float, eta: float, d: float, e_s: float) -> float:
    signal = -math.expm1(-eta * mu)
    denom = signal + d
    if denom <= 0.0:
        raise UndefinedRateError("e_b undefined: no signal and no dark counts (mu*eta = 0, d = 0)")
    return (e_s * signal + 0.5 * d) / denom


def _as_scalar(x):
    if np.ndim(x) == 0:
        return float(x)
    return x


def evaluate(protocol: ProtocolParams, link: LinkParams, mu: float | None = None,
             objective: str = OBJECTIVE_ASYMPTOTIC) -> RateReport:
    """Full rate report at one operating point.

    ``v_th`` is taken from ``protocol.v_th`` when set, otherwise searched. The
    search maximises the asymptotic rate, or the finite-size rate when
    ``objective="finite"``.
    """
    mu = protocol.mu if mu is None else mu
    L = protocol.L
    eta = overall_efficiency(link)
    Q = packet_yield(L, mu, eta, link.d)
    e_b = bit_error_rate(mu, eta, link.d, link.e_s)
    cap = protocol.max_vth
    esrc = source_tag_errors(L, mu, cap, protocol.tag_mode)
    N = int(round(Q * protocol.N_em))

    if protocol.v_th is not None:
        v_th = protocol.v_th
    elif objective == OBJECTIVE_FINITE:
        v_th = _best_finite_vth(protocol, Q, e_b, esrc, N)
    elif objective == OBJECTIVE_ASYMPTOTIC:
        v_th, _ = optimal_vth(Q, e_b, esrc, L, protocol.f, cap)
    else:
        raise ValueError(f"unknown objective {objective!r}")

    e_src = float(esrc[v_th - 1])
    R = asymptotic_rate(Q, e_b, e_src, L, v_th, protocol.f)
    fin = _finite_or_zero(N, protocol, e_b, e_src, v_th)
    return RateReport(
        eta=eta, Q=Q, e_b=e_b, e_src=e_src, v_th_used=int(v_th), R=R, R_per_pulse=R / L,
        R_ft=fin["R_ft"], p1=fin["p1"], p2=fin["p2"], r1=fin["r1"], r2=fin["r2"], N=N,
        mu=float(mu), note=fin["note"],
    )


def predicted_report(protocol: ProtocolParams, link: LinkParams) -> RateReport:
    """Rate report at ``protocol.mu`` with the asymptotically optimal threshold."""
    return evaluate(protocol, link)


def _finite_or_zero(N, protocol, e_b, e_src, v_th) -> dict:
    if N <= 0:
        return {"R_ft": 0.0, "p1": float("nan"), "p2": v_th / (protocol.L - 1),
                "r1": float("nan"), "r2": float("nan"), "note": "no sifted key (N = 0)"}
    try:
        return finite_rate(N, protocol.N_em, e_b, e_src, v_th, protocol.L, protocol.f, protocol.s)
    except InsufficientKeyError as exc:
        return {"R_ft": 0.0, "p1": e_src * protocol.N_em / N, "p2": v_th / (protocol.L - 1),
                "r1": float("nan"), "r2": float("nan"), "note": str(exc)}


def _best_finite_vth(protocol, Q, e_b, esrc, N) -> int:
    best_v, best_rate = 1, -1.0
    for v in range(1, len(esrc) + 1):
        rate = _finite_or_zero(N, protocol, e_b, float(esrc[v - 1]), v)["R_ft"]
        if rate > best_rate:
            best_v, best_rate = v, rate
    return best_v

