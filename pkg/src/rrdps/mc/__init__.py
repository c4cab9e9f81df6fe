"""Seeded Monte Carlo of the RRDPS pipeline."""

from .backend import BACKEND
from .rng import SubStream
from .session import (
    DetectionEvent,
    Packet,
    SessionStats,
    draw_delay,
    encode_packet,
    measure_packet,
    phase_invariance_check,
    run_session,
    sift,
)
from .tables import DARK_PER_GATE, DARK_PER_PACKET, build_tables

__all__ = [
    "BACKEND", "SubStream", "DetectionEvent", "Packet", "SessionStats", "draw_delay",
    "encode_packet", "measure_packet", "phase_invariance_check", "run_session", "sift",
    "DARK_PER_GATE", "DARK_PER_PACKET", "build_tables",
]
