"""Independent transcription of the scenario constants at the bundled default.

Run with: python3 tools/oracle_constants.py
Values printed here are frozen into crates/core/tests/snrdist.rs.
"""
from mpmath import mp, mpf, beta, gamma, sqrt, pi

mp.dps = 30

d_st, d_tt, d_tr_, d_te_, d_tr, d_te, chi = 50, 50, 60, 50, 90, 50, mpf("3.5")
dbm = lambda x: mpf(10) ** ((mpf(x) - 30) / 10)
ps, s2r, s2e = dbm(30), dbm(-60), dbm(-40)
m, ms, om = mpf(2), mpf(5), mpf(1)
N = 8
L = lambda d: mpf(d) ** chi

lam1 = m / ((ms - 1) * om)
Ccal = lam1 / (gamma(m) * gamma(ms))
gR = 1 / L(d_st)
y1 = ps / (L(d_tt) * L(d_tr_) * s2r)
y2 = ps / (L(d_tt) * L(d_te_) * s2e)
a = N * om * om * y2
A = beta(m + 1, ms - 1) ** 2
B = beta(m + mpf(1) / 2, ms - mpf(1) / 2) ** 2
C = beta(m, ms) ** 2
D = (ms - 1) * om / m
c = ((N + 1) * B**2 - A * C) / (A * C - B**2)
d = D * (A * C - B**2) / (B * C)
G = 2 ** (c - 2) * Ccal / (sqrt(pi) * gamma(c + 1) * gR * y1 * d**2)
eta = 1 / (gamma(m) * gamma(ms)) ** 2
delta = m * m / (ms - 1) ** 2
gR1 = ps * om * om / (L(d_st) * L(d_tr) * s2r)
gE1 = ps * om * om / (L(d_st) * L(d_te) * s2e)
for k, v in [("lambda1", lam1), ("c_cal", Ccal), ("g_cal", G), ("a", a), ("ybar1", y1), ("ybar2", y2),
             ("c", c), ("d", d), ("eta", eta), ("delta", delta), ("gammabar_r", gR), ("gammabar_r1", gR1),
             ("gammabar_e1", gE1), ("gammabar_r2", gR * y1), ("gammabar_e2", gR * y2)]:
    print(f"{k} = {float(v)!r}")
