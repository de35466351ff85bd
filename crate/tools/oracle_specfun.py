"""Arbitrary-precision reference values for the special-function layer.

Run with: python3 tools/oracle_specfun.py
Values printed here are frozen into crates/core/tests/specfun.rs.
"""
from mpmath import mp, mpf, mpc, loggamma, meijerg, beta, sqrt, log

mp.dps = 40

print("# log-gamma, principal branch")
for z in [mpc(-3.7, 0.0), mpc(-0.5, -100.0), mpc(-50.5, 3.0), mpc(-7.3, -100.0), mpc(2.5, 1.5), mpc(-3.7, 0.4), mpc(0.3, -25.0), mpc(-0.5, -7.25), mpc(12.0, 80.0), mpc(1e-3, 1e-3)]:
    v = loggamma(z)
    print(f"({float(z.real)!r}, {float(z.imag)!r}) -> ({float(v.real)!r}, {float(v.imag)!r})")

print("# Meijer G instances")
cases = [
    # (a_n, a_p, b_m, b_q, x)
    ([[0.5, 0.25, -1.0], []], [[6.0], []], 3.7),
    ([[0.5, 0.25, -1.0], [2.0]], [[6.0, 1.0], []], 3.7),
    ([[1.0, -1.0], []], [[6.0], []], 0.02),
    ([[1.0, 1.0, -1.3], []], [[1.0, 4.2], []], 5.0),
    ([[], []], [[0.0], []], 1.0),
    ([[-1.0], []], [[0.0], []], 1.0),
]
for a, b, x in cases:
    v = meijerg(a, b, x)
    print(a, b, x, "->", repr(float(v)))

print("# RIS moment constants")
def ris(N, h1, h2):
    (m1, s1, o1), (m2, s2, o2) = h1, h2
    A = beta(m1 + 1, s1 - 1) * beta(m2 + 1, s2 - 1)
    B = beta(m1 + mpf(1) / 2, s1 - mpf(1) / 2) * beta(m2 + mpf(1) / 2, s2 - mpf(1) / 2)
    C = beta(m1, s1) * beta(m2, s2)
    D = sqrt((s1 - 1) * (s2 - 1) * o1 * o2 / (m1 * m2))
    c = ((N + 1) * B**2 - A * C) / (A * C - B**2)
    d = D * (A * C - B**2) / (B * C)
    return [float(t) for t in (A, B, C, D, c, d)]

print("N=8 (2,3,1)x(2,3,1):", ris(8, (2, 3, 1), (2, 3, 1)))
print("N=8 (2,5,1)x(2,5,1):", ris(8, (2, 5, 1), (2, 5, 1)))
print("N=10 (1.5,4,2)x(3,2.5,0.5):", ris(10, (mpf(1.5), 4, 2), (3, mpf(2.5), mpf(0.5))))
