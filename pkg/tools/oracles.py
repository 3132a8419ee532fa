"""Independent reference values frozen into the test suite.

Uses mpmath (50 digits) for closed forms and bisection, and a plain numpy
trapezoid rule at step 1e-4 for the integrals. Shares no code with the package.
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 50


def h2(p):
    return -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)


def iab_mp(x, n, v):
    p = 1 / (1 + mp.e ** (-2 * mp.sqrt(n) * x / v))
    return 1 - h2(p)


def trapz_gain(n, eta, v, x0, renyi):
    a = np.sqrt(eta * n)
    s = np.sqrt(v)
    x = np.arange(x0, x0 + a + 12 * s + 1e-4, 1e-4)
    dens = 0.5 / np.sqrt(2 * np.pi * v) * (np.exp(-(x - a) ** 2 / (2 * v)) + np.exp(-(x + a) ** 2 / (2 * v)))
    z = 2 * a * x / v
    p = 1 / (1 + np.exp(-z))
    q = 1 - p
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.where(p > 0, p * np.log2(p), 0) - np.where(q > 0, q * np.log2(q), 0)
    f = dens * (1 - h - renyi)
    return float(np.sum((f[1:] + f[:-1]) * np.diff(x)) / 2)


print("i_ab(0.5,1,0.25) =", mp.nstr(iab_mp(mp.mpf("0.5"), 1, mp.mpf("0.25")), 17))
print("cond(0.5,1,.25) =", mp.nstr(1 / (1 + mp.e ** -4), 17))
print("tail(0.5,0,.25) =", mp.nstr(mp.erfc(1 / mp.sqrt(2)) / 2, 17))
r = mp.log(2 - mp.e ** -2, 2)
print("renyi(1,0.5) =", mp.nstr(r, 17))
print("log2(1.5) =", mp.nstr(mp.log(1.5, 2), 17))
print("shannon_gain(1,1,.25,0) =", repr(trapz_gain(1, 1, 0.25, 0.0, 0.0)))
print("G(1,.5,.25,1) =", repr(trapz_gain(1, 0.5, 0.25, 1.0, float(r))))
print("G(1,.5,.25,.8) =", repr(trapz_gain(1, 0.5, 0.25, 0.8, float(r))))
# threshold x~ for n=1, eta=0.5: i_ab(x, 0.5, 0.25) = renyi
lo, hi = mp.mpf(0), mp.mpf(20)
for _ in range(200):
    mid = (lo + hi) / 2
    if iab_mp(mid, mp.mpf("0.5"), mp.mpf("0.25")) < r:
        lo = mid
    else:
        hi = mid
print("x_tilde(1,.5) =", mp.nstr(lo, 17))
a = mp.sqrt(mp.mpf("0.5"))
tp = mp.erfc((1 - a) / mp.sqrt(mp.mpf("0.5"))) / 2
tm = mp.erfc((1 + a) / mp.sqrt(mp.mpf("0.5"))) / 2
print("ber(1,.5,.25,1) =", mp.nstr(tm / (tp + tm), 17))
tp = mp.erfc((mp.mpf("0.5") - a) / mp.sqrt(mp.mpf("0.5"))) / 2
tm = mp.erfc((mp.mpf("0.5") + a) / mp.sqrt(mp.mpf("0.5"))) / 2
print("ber(1,.5,.25,.5) =", mp.nstr(tm / (tp + tm), 17), " retained2 =", mp.nstr(tp + tm, 17))
