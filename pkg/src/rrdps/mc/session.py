"""Event-level simulation of the protocol: encode, transmit, measure, sift.

The sampler draws from the same statistical model the analytic yields come
from. A packet is represented by its phase bits; photon number, survival,
window position, dark clicks and wrong-detector flips are sampled per
packet. Only phase differences between pulses are observable, so the global
phase is drawn but never read by the measurement.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..keyrate import (
    InsufficientKeyError,
    ProtocolParams,
    asymptotic_rate,
    finite_rate,
    optimal_vth,
    source_tag_errors,
)
from ..model import LinkParams
from . import rng
from .backend import get_kernel
from .tables import DARK_PER_GATE, SamplingTables, build_tables

CHUNK = 1 << 18


@dataclass(frozen=True)
class Packet:
    phase_bits: np.ndarray
    global_phase: float

    @property
    def L(self) -> int:
        return len(self.phase_bits)

    @property
    def phases(self) -> np.ndarray:
        """Per-pulse modulation, bit b -> (2b - 1) * pi / 2."""
        return (2.0 * self.phase_bits - 1.0) * (math.pi / 2.0)


@dataclass(frozen=True)
class DetectionEvent:
    r: int
    k: int
    bob_bit: int
    dark: bool = False  # diagnostic only; Bob cannot observe it


@dataclass
class SessionStats:
    N_em: int
    N: int
    Q_hat: float
    mismatches: int
    e_b_hat: float
    alice_digest: str
    bob_digest: str
    seed: int
    dark_events: int = 0
    R_hat: Optional[float] = None
    R_ft_hat: Optional[float] = None
    v_th: Optional[int] = None
    note: str = ""
    events: Optional[dict] = field(default=None, compare=False, repr=False)

    def summary(self) -> dict:
        return {
            "seed": self.seed, "N_em": self.N_em, "N": self.N, "Q_hat": self.Q_hat,
            "mismatches": self.mismatches, "e_b_hat": self.e_b_hat, "dark_events": self.dark_events,
            "v_th": self.v_th, "R_hat": self.R_hat, "R_ft_hat": self.R_ft_hat,
            "alice_digest": self.alice_digest, "bob_digest": self.bob_digest,
        }


def encode_packet(stream: rng.SubStream, L: int) -> Packet:
    """Alice's random phase bits and global phase for one packet."""
    if L < 2:
        raise ValueError(f"L: must be >= 2, got {L!r}")
    words = np.array([stream.word(rng.C_BITS + w) for w in range((L + 63) // 64)], dtype=np.uint64)
    bits = np.unpackbits(words.view(np.uint8), bitorder="little")[:L]
    return Packet(phase_bits=bits, global_phase=2.0 * math.pi * stream.uniform(rng.C_PHASE))


def draw_delay(stream: rng.SubStream, L: int) -> int:
    return 1 + stream.below(rng.C_DELAY, L - 1)


def measure_packet(packet: Packet, stream: rng.SubStream, protocol: ProtocolParams,
                   link: LinkParams, r: int, tables: Optional[SamplingTables] = None,
                   **table_options) -> Optional[DetectionEvent]:
    """Bob's measurement of one packet at delay ``r``.

    Scalar reference for the block kernels; returns ``None`` when nothing is
    recorded (no click, or a signal click outside the interference window).
    """
    L = packet.L
    if not (1 <= r <= L - 1):
        raise ValueError(f"r: must lie in [1, {L - 1}], got {r!r}")
    if tables is None:
        tables = build_tables(protocol, link, **table_options)
    cdf = tables.cdf
    n = min(int(np.searchsorted(cdf, stream.uniform(rng.C_PHOTONS), side="right")), len(cdf) - 1)
    signal = stream.uniform(rng.C_SURVIVE) < tables.surv[r, n]
    if signal:
        t = 1 + stream.below(rng.C_SIGNAL_POS, L)
        if t > L - r:
            return None
        truth = int(packet.phase_bits[t - 1] ^ packet.phase_bits[t + r - 1])
        flip = int(stream.uniform(rng.C_FLIP) < tables.e_s[r])
        return DetectionEvent(r=r, k=t, bob_bit=truth ^ flip, dark=False)
    if stream.uniform(rng.C_DARK) < tables.dark_valid[r]:
        k = 1 + stream.below(rng.C_DARK_POS, L - r)
        return DetectionEvent(r=r, k=k, bob_bit=int(stream.uniform(rng.C_DARK_BIT) < 0.5), dark=True)
    return None


def sift(packet: Packet, event: DetectionEvent) -> tuple[int, int]:
    """Alice's sifted bit ``s_k xor s_{k+r}`` paired with Bob's."""
    if event.k < 1 or event.k + event.r > packet.L:
        raise ValueError(f"event (k={event.k}, r={event.r}) does not fit a packet of length {packet.L}")
    alice = int(packet.phase_bits[event.k - 1] ^ packet.phase_bits[event.k + event.r - 1])
    return alice, event.bob_bit


def phase_invariance_check(packet: Packet, shift: float, stream: rng.SubStream,
                           protocol: ProtocolParams, link: LinkParams,
                           tables: Optional[SamplingTables] = None) -> bool:
    """True when shifting the global phase leaves every delay's outcome unchanged."""
    if tables is None:
        tables = build_tables(protocol, link)
    shifted = Packet(phase_bits=packet.phase_bits,
                     global_phase=(packet.global_phase + shift) % (2.0 * math.pi))
    for r in range(1, packet.L):
        a = measure_packet(packet, stream, protocol, link, r, tables)
        b = measure_packet(shifted, stream, protocol, link, r, tables)
        if a != b:
            return False
    return True


def _run_chunk(kernel, key, start, count, tables):
    out_r = np.empty(count, dtype=np.int32)
    out_k = np.empty(count, dtype=np.int32)
    out_a = np.empty(count, dtype=np.uint8)
    out_b = np.empty(count, dtype=np.uint8)
    out_d = np.empty(count, dtype=np.uint8)
    kernel(key, start, count, tables.L, tables.cdf, tables.surv, tables.dark_valid, tables.e_s,
           out_r, out_k, out_a, out_b, out_d)
    hit = np.flatnonzero(out_k)
    return {
        "index": hit.astype(np.int64) + start,
        "r": out_r[hit], "k": out_k[hit],
        "alice": out_a[hit], "bob": out_b[hit], "dark": out_d[hit],
    }


def run_session(protocol: ProtocolParams, link: LinkParams, N_em: int, seed: int,
                workers: int = 1, backend: Optional[str] = None, dark_model: str = DARK_PER_GATE,
                measured=None, key_dump=None, collect_events: bool = False,
                chunk: int = CHUNK, tables: Optional[SamplingTables] = None) -> SessionStats:
    """Simulate ``N_em`` packets and aggregate sifting statistics.

    Packet ``j`` draws only from the substream ``(seed, j)`` and chunks are
    merged in index order, so the result does not depend on ``workers``.
    ``key_dump`` is a path prefix; Alice's and Bob's sifted bits are written
    to ``<prefix>.alice`` and ``<prefix>.bob``, one byte (0 or 1) per bit in
    packet order.
    """
    if int(N_em) != N_em or N_em < 1:
        raise ValueError(f"N_em: must be an integer >= 1, got {N_em!r}")
    _, kernel = get_kernel(backend)
    if tables is None:
        tables = build_tables(protocol, link, dark_model=dark_model, measured=measured)
    key = rng.session_key(seed)
    starts = list(range(0, N_em, chunk))

    def task(start):
        return _run_chunk(kernel, key, start, min(chunk, N_em - start), tables)

    h_alice, h_bob = hashlib.sha256(), hashlib.sha256()
    N = mismatches = darks = 0
    collected = []
    sinks = None
    if key_dump is not None:
        prefix = str(key_dump)
        sinks = (Path(prefix + ".alice").open("wb"), Path(prefix + ".bob").open("wb"))
    try:
        if workers > 1:
            pool = ThreadPoolExecutor(max_workers=workers)
            results = pool.map(task, starts)
        else:
            pool = None
            results = map(task, starts)
        for part in results:
            a, b = part["alice"], part["bob"]
            N += len(a)
            mismatches += int(np.count_nonzero(a != b))
            darks += int(np.count_nonzero(part["dark"]))
            h_alice.update(a.tobytes())
            h_bob.update(b.tobytes())
            if sinks:
                sinks[0].write(a.tobytes())
                sinks[1].write(b.tobytes())
            if collect_events:
                collected.append(part)
        if pool is not None:
            pool.shutdown()
    finally:
        if sinks:
            for fh in sinks:
                fh.close()

    stats = SessionStats(
        N_em=N_em, N=N, Q_hat=N / N_em, mismatches=mismatches,
        e_b_hat=mismatches / N if N else float("nan"),
        alice_digest=h_alice.hexdigest(), bob_digest=h_bob.hexdigest(), seed=int(seed),
        dark_events=darks,
    )
    if collect_events:
        stats.events = {name: np.concatenate([c[name] for c in collected]) for name in collected[0]}
    if N == 0:
        stats.note = "no sifted bits; error rate undefined, no rate computed"
        return stats
    _empirical_rates(stats, protocol)
    return stats


def _empirical_rates(stats: SessionStats, protocol: ProtocolParams):
    """Feed the observed yield and error rate into the rate formulas."""
    L = protocol.L
    esrc = source_tag_errors(L, protocol.mu, protocol.max_vth, protocol.tag_mode)
    if protocol.v_th is not None:
        v_th = protocol.v_th
    else:
        v_th, _ = optimal_vth(stats.Q_hat, stats.e_b_hat, esrc, L, protocol.f, protocol.max_vth)
    e_src = float(esrc[v_th - 1])
    stats.v_th = int(v_th)
    stats.R_hat = asymptotic_rate(stats.Q_hat, stats.e_b_hat, e_src, L, v_th, protocol.f)
    try:
        fin = finite_rate(stats.N, stats.N_em, stats.e_b_hat, e_src, v_th, L, protocol.f, protocol.s)
    except InsufficientKeyError as exc:
        stats.R_ft_hat = 0.0
        stats.note = str(exc)
    else:
        stats.R_ft_hat = fin["R_ft"]
        stats.note = fin["note"]
