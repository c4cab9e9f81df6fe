"""
Closed-form secret key rate mathematics for RRDPS QKD.

Everything in here is a pure function of its arguments: binary entropy,
the source tag error (probability that a packet carries too many photons),
the asymptotic key rate per packet, the threshold search over ``v_th`` and
the finite-size corrected rate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional

import numpy as np

LN2 = math.log(2.0)

# Two readings of the photon-number threshold in the source tag error.
#   "exceeds":  P(n >  v_th) = 1 - sum_{n=0}^{v_th} Pois(n)   (default)
#   "reaches":  P(n >= v_th) = 1 - sum_{n=0}^{v_th-1} Pois(n)
TAG_EXCEEDS = "exceeds"
TAG_REACHES = "reaches"
TAG_MODES = (TAG_EXCEEDS, TAG_REACHES)


class InsufficientKeyError(ValueError):
    """Sifted key too short to absorb the tagged-packet fraction (p1 > 1)."""


@dataclass(frozen=True)
class ProtocolParams:
    """Choices made by Alice and by the post-processing.

    ``s`` is the security exponent: failure probability is ``3 * 2**-s``.
    ``vth_cap`` bounds the threshold search (defaults to ``L - 1``).
    """

    L: int = 65
    mu: float = 0.04
    v_th: Optional[int] = None
    f: float = 1.1
    s: int = 80
    N_em: int = 200_000_000
    vth_cap: Optional[int] = None
    tag_mode: str = TAG_EXCEEDS

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise ValueError(f"L: must be an integer >= 2, got {self.L!r}")
        if not (self.mu >= 0.0) or not math.isfinite(self.mu):
            raise ValueError(f"mu: must be finite and >= 0, got {self.mu!r}")
        if not (self.f >= 1.0):
            raise ValueError(f"f: must be >= 1, got {self.f!r}")
        if int(self.s) != self.s or self.s < 0:
            raise ValueError(f"s: must be an integer >= 0, got {self.s!r}")
        if int(self.N_em) != self.N_em or self.N_em < 1:
            raise ValueError(f"N_em: must be an integer >= 1, got {self.N_em!r}")
        cap = self.max_vth
        if cap < 1:
            raise ValueError(f"vth_cap: must be >= 1, got {self.vth_cap!r}")
        if self.v_th is not None and not (1 <= self.v_th <= cap):
            raise ValueError(f"v_th: must lie in [1, {cap}], got {self.v_th!r}")
        if self.tag_mode not in TAG_MODES:
            raise ValueError(f"tag_mode: must be one of {TAG_MODES}, got {self.tag_mode!r}")

    @property
    def max_vth(self) -> int:
        return self.L - 1 if self.vth_cap is None else int(self.vth_cap)


@dataclass
class RateReport:
    """One evaluated operating point, with every intermediate kept."""

    eta: float
    Q: float
    e_b: float
    e_src: float
    v_th_used: int
    R: float
    R_per_pulse: float
    R_ft: float
    p1: float
    p2: float
    r1: float
    r2: float
    N: int
    mu: float = float("nan")
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def binary_entropy(p):
    """Shannon binary entropy in bits, with h(0) = h(1) = 0.

    Accepts scalars or arrays. Raises ``ValueError`` outside [0, 1].
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0.0) & (arr <= 1.0))):
        raise ValueError(f"binary_entropy: probability outside [0, 1]: {p!r}")
    inner = (arr > 0.0) & (arr < 1.0)
    safe = np.where(inner, arr, 0.5)
    out = np.where(inner, -safe * np.log2(safe) - (1.0 - safe) * np.log2(1.0 - safe), 0.0)
    if out.ndim == 0:
        return float(out)
    return out


def eve_information(p):
    """Entropy bound on Eve's information, saturating at one bit for p >= 1/2."""
    arr = np.minimum(np.asarray(p, dtype=float), 1.0)
    out = np.where(arr >= 0.5, 1.0, binary_entropy(np.minimum(arr, 0.5)))
    if out.ndim == 0:
        return float(out)
    return out


def poisson_pmf(lam: float, max_n: int) -> np.ndarray:
    """Poisson(lam) probabilities for n = 0..max_n.

    Anchored at the mode in log space, then filled outward with the ratio
    recurrence ``p_k / p_{k-1} = lam / k``. No factorials are formed, so this
    holds up for ``lam`` in the thousands.
    """
    if lam < 0 or not math.isfinite(lam):
        raise ValueError(f"Poisson mean must be finite and >= 0, got {lam!r}")
    pmf = np.zeros(max_n + 1)
    if lam == 0.0:
        pmf[0] = 1.0
        return pmf
    mode = min(int(lam), max_n)
    pmf[mode] = math.exp(mode * math.log(lam) - lam - math.lgamma(mode + 1))
    if mode < max_n:
        pmf[mode + 1 :] = pmf[mode] * np.cumprod(lam / np.arange(mode + 1, max_n + 1))
    if mode > 0:
        pmf[:mode] = (pmf[mode] * np.cumprod(np.arange(mode, 0, -1) / lam))[::-1]
    return pmf


def poisson_tail(lam: float, max_n: int) -> np.ndarray:
    """P(n > k) for k = 0..max_n under Poisson(lam).

    The tail is summed from the far end (smallest terms first) so that tiny
    tail probabilities keep full relative precision.
    """
    horizon = max(max_n + 1, int(math.ceil(lam + 40.0 * math.sqrt(lam) + 60.0)))
    pmf = poisson_pmf(lam, horizon)
    above = np.cumsum(pmf[::-1])[::-1]  # above[k] = P(n >= k)
    return np.clip(above[1 : max_n + 2], 0.0, 1.0)


def source_tag_error(L: int, mu: float, v_th: int, mode: str = TAG_EXCEEDS) -> float:
    """Probability that a packet of ``L`` pulses holds more than ``v_th`` photons.

    With ``mode="reaches"`` the threshold itself counts as tagged,
    i.e. P(n >= v_th).
    """
    if L < 1 or mu < 0 or v_th < 0:
        raise ValueError(f"source_tag_error: invalid (L={L}, mu={mu}, v_th={v_th})")
    k = _tag_index(v_th, mode)
    if k < 0:
        return 1.0
    return float(poisson_tail(L * mu, k)[k])


def source_tag_errors(L: int, mu: float, max_vth: int, mode: str = TAG_EXCEEDS) -> np.ndarray:
    """Vector of tag errors for v_th = 1..max_vth (index 0 holds v_th = 1)."""
    tail = poisson_tail(L * mu, max_vth)
    if mode == TAG_EXCEEDS:
        return tail[1 : max_vth + 1].copy()
    if mode == TAG_REACHES:
        return tail[0:max_vth].copy()
    raise ValueError(f"unknown tag mode {mode!r}")


def _tag_index(v_th: int, mode: str) -> int:
    if mode == TAG_EXCEEDS:
        return v_th
    if mode == TAG_REACHES:
        return v_th - 1
    raise ValueError(f"unknown tag mode {mode!r}")


def _check_prob(name: str, x: float):
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"{name}: must lie in [0, 1], got {x!r}")


def asymptotic_rate(Q, e_b, e_src, L, v_th, f):
    """Secret key per emitted packet in the infinite-key limit, clamped at 0.

    ``v_th`` may be an integer or an array of thresholds; the result has the
    same shape.
    """
    _check_prob("Q", Q)
    _check_prob("e_b", e_b)
    e_src_arr = np.asarray(e_src, dtype=float)
    if np.any((e_src_arr < 0) | (e_src_arr > 1)):
        raise ValueError(f"e_src: must lie in [0, 1], got {e_src!r}")
    if L < 2:
        raise ValueError(f"L: must be >= 2, got {L!r}")
    eve = eve_information(np.asarray(v_th, dtype=float) / (L - 1))
    R = Q * (1.0 - f * binary_entropy(e_b)) - e_src_arr - (Q - e_src_arr) * eve
    R = np.where(Q < e_src_arr, 0.0, np.maximum(R, 0.0))
    if np.ndim(R) == 0:
        return float(R)
    return R


def optimal_vth(Q: float, e_b: float, e_src_fn: Callable, L: int, f: float, cap: Optional[int] = None):
    """Exhaustive threshold search. Returns ``(v_th, R)``.

    ``e_src_fn`` maps a threshold to its tag error; it may also be an array of
    tag errors indexed from v_th = 1. Ties go to the smaller threshold.
    """
    if L < 2:
        raise ValueError(f"L: must be >= 2, got {L!r}")
    top = L - 1 if cap is None else cap
    vths = np.arange(1, top + 1)
    if callable(e_src_fn):
        esrc = np.array([e_src_fn(int(v)) for v in vths], dtype=float)
    else:
        esrc = np.asarray(e_src_fn, dtype=float)[:top]
    rates = np.atleast_1d(asymptotic_rate(Q, e_b, esrc, L, vths, f))
    best = int(np.argmax(rates))  # first maximum wins
    return int(vths[best]), float(rates[best])


def finite_rate(N: int, N_em: int, e_b: float, e_src: float, v_th: int, L: int, f: float, s: int) -> dict:
    """Finite-size secret key per emitted packet.

    Returns a dict with ``R_ft``, ``p1``, ``p2``, ``r1``, ``r2`` and ``note``.
    Raises ``InsufficientKeyError`` when the tagged fraction ``p1`` exceeds 1.
    """
    if not (0 < N <= N_em):
        raise ValueError(f"N: need 0 < N <= N_em, got N={N}, N_em={N_em}")
    _check_prob("e_b", e_b)
    _check_prob("e_src", e_src)
    p1 = e_src * N_em / N
    if p1 > 1.0:
        raise InsufficientKeyError(
            f"insufficient sifted key for tag fraction: p1 = {p1:.4g} > 1 (N={N}, N_em={N_em})"
        )
    p2 = min(max(v_th / (L - 1), 0.0), 1.0)
    r1 = min(p1 + math.sqrt(2 * LN2 * p1 * (1 - p1) * s / N), 1.0)
    out = {"p1": p1, "p2": p2, "r1": r1, "r2": float("nan"), "R_ft": 0.0, "note": ""}
    if 1.0 - r1 <= 0.0:
        out["note"] = "r1 >= 1: every sifted bit may be tagged"
        return out
    r2 = min(p2 + math.sqrt(2 * LN2 * p2 * (1 - p2) * s / (N * (1 - r1))), 1.0)
    out["r2"] = r2
    numer = N * (1 - f * binary_entropy(e_b)) - N * r1 - N * (1 - r1) * eve_information(r2) - s
    out["R_ft"] = max(numer / N_em, 0.0)
    return out
