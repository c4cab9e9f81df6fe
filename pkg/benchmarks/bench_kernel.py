"""Compare the compiled and numpy sampling kernels.

    python3 benchmarks/bench_kernel.py [--packets N] [--repeat K] [--length KM]

Prints packets per second for each backend and checks that both produce the
same session digests.
"""

import argparse
import time

from rrdps.keyrate import ProtocolParams
from rrdps.mc import build_tables, run_session
from rrdps.mc.backend import get_kernel
from rrdps.model import LinkParams


def bench(backend, protocol, link, tables, packets, repeat):
    best = float("inf")
    stats = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        stats = run_session(protocol, link, packets, seed=1, backend=backend, tables=tables)
        best = min(best, time.perf_counter() - t0)
    return best, stats


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--packets", type=int, default=2_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--length", type=float, default=50.0)
    ap.add_argument("--mu", type=float, default=0.05)
    args = ap.parse_args(argv)

    protocol = ProtocolParams(mu=args.mu)
    link = LinkParams(length_km=args.length)
    tables = build_tables(protocol, link)
    backends = ["python"]
    try:
        get_kernel("cython")
        backends.insert(0, "cython")
    except ImportError:
        print("compiled kernel not built; numpy backend only")

    results = {}
    for name in backends:
        secs, stats = bench(name, protocol, link, tables, args.packets, args.repeat)
        results[name] = (secs, stats)
        print(f"{name:>7}: {secs:.3f} s for {args.packets} packets "
              f"({args.packets / secs / 1e6:.2f} M packets/s), N={stats.N}")
    if len(results) == 2:
        (tc, sc), (tp, sp) = results["cython"], results["python"]
        print(f"speed-up: {tp / tc:.1f}x; identical output: {sc == sp}")


if __name__ == "__main__":
    main()
