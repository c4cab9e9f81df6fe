"""Independent reference computations used by the tests.

High-precision brute force with mpmath; none of this touches rrdps code.
"""

import mpmath as mp

mp.mp.dps = 50


def entropy(p):
    p = mp.mpf(p)
    if p in (0, 1):
        return mp.mpf(0)
    return -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)


def poisson_cdf(lam, k):
    """sum_{n=0}^{k} e^-lam lam^n / n!, term by term with exact factorials."""
    lam = mp.mpf(lam)
    return mp.fsum(mp.e ** (-lam) * lam**n / mp.factorial(n) for n in range(k + 1))


def tag_error(L, mu, v_th):
    return 1 - poisson_cdf(mp.mpf(L) * mp.mpf(mu), v_th)


def yield_sum_over_delays(i, L, eta, d):
    """Explicit average of the delay-resolved yield over r = 1..L-1."""
    eta, d = mp.mpf(eta), mp.mpf(d)
    total = mp.fsum(mp.mpf(L - r) / L * (1 - (1 - eta) ** i + d) for r in range(1, L))
    return total / (L - 1)


def packet_yield_sum(L, mu, eta, d, tail=mp.mpf("1e-16")):
    """Poisson-weighted sum of averaged yields, truncated once the tail is negligible."""
    lam = mp.mpf(L) * mp.mpf(mu)
    eta, d = mp.mpf(eta), mp.mpf(d)
    acc, mass, i = mp.mpf(0), mp.mpf(0), 0
    while True:
        w = mp.e ** (-lam) * lam**i / mp.factorial(i)
        acc += w * (1 - (1 - eta) ** i + d) / 2
        mass += w
        i += 1
        if i > lam and 1 - mass < tail:
            return acc


def error_rate_sum(L, mu, eta, d, e_s):
    """Bit error rate from its defining ratio, evaluated at high precision."""
    signal = 1 - mp.e ** (-mp.mpf(eta) * mp.mpf(mu))
    d, e_s = mp.mpf(d), mp.mpf(e_s)
    return (e_s * signal + d / 2) / (signal + d)


def rate(Q, e_b, e_src, L, v_th, f):
    """Asymptotic rate, unclamped, with the one-bit saturation of the Eve term."""
    p = mp.mpf(v_th) / (L - 1)
    eve = 1 if p >= mp.mpf(1) / 2 else entropy(p)
    Q, e_src = mp.mpf(Q), mp.mpf(e_src)
    return Q * (1 - mp.mpf(f) * entropy(e_b)) - e_src - (Q - e_src) * eve
