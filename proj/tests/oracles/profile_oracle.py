"""Independent reference values for the profile tests.

Uses mpmath for N, fixed 80-node Gauss-Legendre for the smooth step, the
variation-of-parameters solution of f'' + f = h, f(0) = 1, f'(0) = 0 with
30-digit mpmath moments (cross checked by scipy's DOP853), and scipy's incomplete elliptic integral for the
meridian height z(c). Nothing here shares
code with the C++ path.
Run: python3 tests/oracles/profile_oracle.py
"""
import math

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import ellipeinc

mp.mp.dps = 30


def F(t):
    if t <= 0 or t >= 1:
        return mp.mpf(0)
    return mp.e ** (1 / (t * (t - 1)))


N = mp.quad(F, [0, 0.5, 1])


_NODES, _WEIGHTS = np.polynomial.legendre.leggauss(80)
_NF = float(N)


def phi(x):
    if x <= 0:
        return 0.0
    if x >= 1:
        return 1.0
    if x > 0.5:
        return 1.0 - phi(1.0 - x)
    t = 0.5 * x * (_NODES + 1.0)
    vals = np.exp(1.0 / (t * (t - 1.0)))
    return float(0.5 * x * np.dot(_WEIGHTS, vals) / _NF)


def phi_mp(x):
    if x <= 0:
        return mp.mpf(0)
    if x >= 1:
        return mp.mpf(1)
    if x > 0.5:
        return 1 - phi_mp(1 - x)
    return mp.quad(F, [0, x]) / N


def h(t, k):
    delta = 1.0 / 16.0
    a = math.pi / 2 - 1.0 / k
    w = delta / k**2
    ramp = -(k**5 / delta) * (t - a)
    if t <= a + 1.5 * w:
        return phi((t - a) / w) * ramp
    return (1.0 - phi((t - a - 2 * w) / w)) * ramp


def _gl(fun, lo, hi, nodes=400):
    x, wts = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    return 0.5 * (hi - lo) * sum(wi * fun(ti) for wi, ti in zip(wts, t))


def first_zero(k):
    """c, f'(c), z(c) and the ODE drift check for the bump with sharpness k.

    Variation of parameters: f(t) = cos t + int_0^t sin(t - s) h(s) ds, so past
    the bump f = (1 - I_s) cos t + I_c sin t with I_c, I_s the cos/sin moments
    of h. Only quadrature of h is needed; h is smooth on the three pieces
    [a, a+w], [a+w, a+2w], [a+2w, a+3w].
    """
    delta = 1.0 / 16.0
    a = math.pi / 2 - 1.0 / k
    w = delta / k**2
    b = a + 3 * w
    pieces = [(a, a + w), (a + w, a + 2 * w), (a + 2 * w, b)]
    # The moments are taken in 30-digit arithmetic with the exact a: in double,
    # t - a inside the support carries ~1e-10 relative rounding.
    km = mp.mpf(k)
    am = mp.pi / 2 - 1 / km
    wm = mp.mpf(1) / 16 / km**2

    def h_mp(t):
        ramp = -(km**5 * 16) * (t - am)
        if t <= am + 1.5 * wm:
            return phi_mp((t - am) / wm) * ramp
        return (1 - phi_mp((t - am - 2 * wm) / wm)) * ramp

    pieces_mp = [(am, am + wm), (am + wm, am + 2 * wm), (am + 2 * wm, am + 3 * wm)]
    i_c = sum(mp.quad(lambda t: mp.cos(t) * h_mp(t), [lo, hi], method="gauss-legendre")
              for lo, hi in pieces_mp)
    i_s = sum(mp.quad(lambda t: mp.sin(t) * h_mp(t), [lo, hi], method="gauss-legendre")
              for lo, hi in pieces_mp)
    A, B = 1 - i_s, i_c
    # f = A cos t + B sin t = R cos(t - t0); first zero past b at t0 + pi/2.
    c = float(mp.atan2(B, A) + mp.pi / 2)
    fpc = float(-mp.hypot(A, B))
    s = -fpc
    A, B = float(A), float(B)

    # z(c): f~ = cos t / s before the bump (elliptic E), quadrature inside,
    # f~ = sin(c - t) after it.
    def fp(t):
        # f'(t) = -sin t + int_a^t cos(t - u) h(u) du
        inner = sum(_gl(lambda u: math.cos(t - u) * h(u, k), lo, min(hi, t), 60)
                    for lo, hi in pieces if lo < t)
        return -math.sin(t) + inner

    z_before = ellipeinc(a, 1.0 / s**2)
    z_window = sum(_gl(lambda t: math.sqrt(max(0.0, 1.0 - (fp(t) / s) ** 2)), lo, hi, 60)
                   for lo, hi in pieces)
    z_after = 1.0 - math.cos(c - b)

    # Cross-check against a direct DOP853 solve of the IVP.
    rhs = lambda t, y: [y[1], h(t, k) - y[0]]
    tol = dict(method="DOP853", rtol=1e-13, atol=1e-15)
    s1 = solve_ivp(rhs, [0, a], [1.0, 0.0], **tol)
    s2 = solve_ivp(rhs, [a, b], s1.y[:, -1], max_step=w / 50, **tol)
    f_b, fp_b = s2.y[:, -1]
    ivp_gap = max(abs(f_b - (A * math.cos(b) + B * math.sin(b))),
                  abs(fp_b - (-A * math.sin(b) + B * math.cos(b))))
    return c, fpc, z_before + z_window + z_after, ivp_gap


if __name__ == "__main__":
    print(f"N            = {mp.nstr(N, 20)}")
    print(f"phi(0.25)    = {phi(0.25):.17g}")
    print(f"phi(0.1)     = {phi(0.1):.17g}  (mpmath {mp.nstr(mp.quad(F, [0, 0.1]) / N, 20)})")
    print(f"phi(0.75)    = {phi(0.75):.17g}")
    for k in (100, 200, 400):
        c, fpc, zc, gap = first_zero(k)
        print(f"k={k}: c = {c:.16g}  f'(c) = {fpc:.16g}  z(c) = {zc:.16g}  "
              f"|closed form - DOP853| at b = {gap:.2e}", flush=True)
