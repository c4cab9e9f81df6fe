"""Acceptance criteria, one test per criterion.

Each test records a one-line PASS/FAIL verdict with the measured numbers;
the lines are printed in the pytest terminal summary. Running this file
directly (``python3 tests/test_acceptance.py``) prints the same lines
without pytest.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from rrdps.cli import main as cli_main  # noqa: E402
from rrdps.interferometer import (  # noqa: E402
    SchemeSpec,
    decompose_delay,
    scalability_delta,
    scheme_loss_table,
    scheme_report,
)
from rrdps.keyrate import ProtocolParams, source_tag_errors  # noqa: E402
from rrdps.mc import run_session  # noqa: E402
from rrdps.model import (  # noqa: E402
    LinkParams,
    average_yield,
    evaluate,
    overall_efficiency,
    packet_yield,
)
from rrdps.optimize import distance_sweep, optimize_mu  # noqa: E402

VERDICTS: list[str] = []
PROTOCOL = ProtocolParams()
LINK = LinkParams()
MU_TARGETS = {20.0: 0.06, 50.0: 0.05, 70.0: 0.045, 80.0: 0.04, 85.0: 0.04, 90.0: 0.04}


def record(number: int, title: str, passed: bool, detail: str) -> bool:
    VERDICTS.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} | {detail}")
    return passed


def check_1():
    rep = evaluate(ProtocolParams(mu=0.04), LINK.at(90))
    return record(1, "positive key rate at 90 km, mu=0.04", rep.R > 0,
                  f"R={rep.R:.4e} per packet, v_th={rep.v_th_used}")


def check_2():
    t0 = time.perf_counter()
    points = distance_sweep(PROTOCOL, LINK, sorted(MU_TARGETS))
    elapsed = time.perf_counter() - t0
    offs = {p.length_km: p.mu_opt - MU_TARGETS[p.length_km] for p in points}
    ok = all(abs(v) <= 0.015 for v in offs.values()) and elapsed < 10
    shown = ", ".join(f"{km:g}km:{p.mu_opt:.4f}" for km, p in zip(offs, points))
    return record(2, "optimal mu within 0.015 of schedule, sweep < 10 s", ok,
                  f"{shown}; {elapsed:.2f} s")


def check_3():
    mu, rep = optimize_mu(PROTOCOL, LINK, 80.0)
    ratio = rep.R_ft / rep.R
    fixed = evaluate(ProtocolParams(mu=0.04), LINK.at(80))
    ratio_fixed = fixed.R_ft / fixed.R
    ok = 0.70 <= ratio <= 0.82
    return record(3, "R_ft/R in [0.70, 0.82] at 80 km, s=80, N_em=2e8", ok,
                  f"ratio={ratio:.4f} at mu*={mu:.4f} (N={rep.N}); ratio={ratio_fixed:.4f} at mu=0.04")


def check_4():
    results, ok = [], True
    for km in (0.0, 20.0, 50.0, 90.0):
        mu, _ = optimize_mu(PROTOCOL, LINK, km)
        proto = ProtocolParams(mu=mu)
        link = LINK.at(km)
        rep = evaluate(proto, link)
        t0 = time.perf_counter()
        st = run_session(proto, link, 1_000_000, seed=1)
        elapsed = time.perf_counter() - t0
        zq = (st.Q_hat - rep.Q) / math.sqrt(rep.Q * (1 - rep.Q) / st.N_em)
        ze = (st.e_b_hat - rep.e_b) / math.sqrt(rep.e_b * (1 - rep.e_b) / st.N)
        ok &= abs(zq) <= 5 and abs(ze) <= 5 and elapsed < 60
        results.append(f"{km:g}km z_Q={zq:+.2f} z_eb={ze:+.2f} {elapsed:.2f}s")
    return record(4, "Monte Carlo within 5 sigma of analytic Q and e_b, 1e6 packets", ok, "; ".join(results))


def check_5():
    st = run_session(PROTOCOL, LinkParams(d=0.0, e_s=0.0), 100_000, seed=1)
    ok = st.N > 0 and st.e_b_hat == 0.0 and st.alice_digest == st.bob_digest
    return record(5, "noiseless session is error free", ok,
                  f"N={st.N}, e_b_hat={st.e_b_hat}, digests {'equal' if st.alice_digest == st.bob_digest else 'differ'}")


def check_6():
    pairs = [decompose_delay(r) for r in range(1, 65)]
    bijective = len(set(pairs)) == 64 and all(x - y == r for r, (x, y) in zip(range(1, 65), pairs))
    cases = {46: (48, 2), 5: (8, 3), 43: (48, 5)}
    exact = all(decompose_delay(r) == xy for r, xy in cases.items())
    return record(6, "delay decomposition bijective with exact cases", bijective and exact,
                  f"bijective={bijective}, 46->{pairs[45]}, 5->{pairs[4]}, 43->{pairs[42]}")


def check_7():
    worst = scheme_loss_table(SchemeSpec(kind="simple-active", unit_loss_dB=0.8))[-1]
    arms_ok = math.isclose(worst.long_IL_dB, 4.8) and math.isclose(worst.short_IL_dB, 2.4)
    mean = scheme_report(SchemeSpec()).mean_IL_dB
    delta = scalability_delta(SchemeSpec(), 1025)
    ok = arms_ok and abs(mean - 5.60) <= 0.05 and abs(delta - 2.4) <= 0.1
    return record(7, "scheme loss arithmetic", ok,
                  f"arms=({worst.long_IL_dB:.2f},{worst.short_IL_dB:.2f}) dB, FMI mean={mean:.3f} dB, "
                  f"delta 65->1025={delta:.3f} dB")


def check_8():
    worst_src = 0.0
    for lam in np.linspace(0.0, 50.0, 26):
        mu = lam / 65
        got = source_tag_errors(65, mu, 64)
        want = np.array([float(oracles.tag_error(65, mu, v)) for v in range(1, 65)])
        worst_src = max(worst_src, float(np.max(np.abs(got - want))))
    worst_q = 0.0
    for km in (0, 20, 50, 90, 150):
        eta = overall_efficiency(LINK.at(km))
        for mu in (0.001, 0.04, 0.3):
            worst_q = max(worst_q, abs(packet_yield(65, mu, eta, LINK.d)
                                       - float(oracles.packet_yield_sum(65, mu, eta, LINK.d))))
    worst_y = 0.0
    for i in (0, 1, 3, 10, 50):
        for eta, d in ((1e-3, 2.1e-6), (0.05, 0.0), (0.7, 1e-3)):
            worst_y = max(worst_y, abs(average_yield(i, 65, eta, d)
                                       - float(oracles.yield_sum_over_delays(i, 65, eta, d))))
    ok = worst_src <= 1e-12 and worst_q <= 1e-10 and worst_y <= 1e-12
    return record(8, "formula oracles", ok,
                  f"max|e_src err|={worst_src:.1e}, max|Q err|={worst_q:.1e}, max|Y err|={worst_y:.1e}")


def _capture(argv, out):
    code = cli_main(argv + ["--out", str(out)])
    return code, out.read_bytes()


def _data(blob: bytes) -> list[bytes]:
    return [line for line in blob.splitlines() if not line.startswith(b"# config")]


def check_9(tmp: Path):
    sweep = ["sweep", "--lengths", "20,50,70,80,85,90"]
    sim = ["simulate", "--length", "50", "--packets", "600000", "--seed", "7"]
    outputs = {}
    for name, argv in (("sweep", sweep), ("simulate", sim)):
        for workers in ("1", "1", "3"):
            key = (name, workers, len([k for k in outputs if k[:2] == (name, workers)]))
            outputs[key] = _capture(argv + ["--workers", workers], tmp / f"{name}{len(outputs)}.csv")
    runs_ok = all(outputs[(n, "1", 0)] == outputs[(n, "1", 1)] for n in ("sweep", "simulate"))
    workers_ok = all(_data(outputs[(n, "1", 0)][1]) == _data(outputs[(n, "3", 0)][1])
                     for n in ("sweep", "simulate"))
    codes_ok = all(code == 0 for code, _ in outputs.values())
    return record(9, "byte-identical reruns and worker-count independence",
                  runs_ok and workers_ok and codes_ok,
                  f"reruns identical={runs_ok}, workers 1 vs 3 identical rows={workers_ok}")


class TestAcceptance:
    def test_criterion_1_ninety_km(self):
        assert check_1()

    def test_criterion_2_mu_schedule(self):
        assert check_2()

    def test_criterion_3_finite_key_ratio(self):
        assert check_3()

    def test_criterion_4_montecarlo_agreement(self):
        assert check_4()

    def test_criterion_5_noiseless(self):
        assert check_5()

    def test_criterion_6_decomposition(self):
        assert check_6()

    def test_criterion_7_scheme_arithmetic(self):
        assert check_7()

    def test_criterion_8_formula_oracles(self):
        assert check_8()

    def test_criterion_9_determinism(self, tmp_path):
        assert check_9(tmp_path)


if __name__ == "__main__":
    import tempfile

    checks = [check_1, check_2, check_3, check_4, check_5, check_6, check_7, check_8]
    for fn in checks:
        fn()
        print(VERDICTS[-1], flush=True)
    with tempfile.TemporaryDirectory() as d:
        check_9(Path(d))
        print(VERDICTS[-1])
    sys.exit(0 if all(v.startswith("[PASS]") for v in VERDICTS) else 1)
