"""Independent oracles for the frozen constants in the test-suite.

Run with ``python tests/oracles/compute_frozen.py``; prints every value that
is pinned in the tests. Uses mpmath at 50 digits and plain quadrature; none
of it imports the package.
"""

import mpmath as mp

mp.mp.dps = 50

RHO_W, RHO_B, KAPPA_W, KAPPA_B = mp.mpf(1000), mp.mpf("1.2"), mp.mpf("2.07e9"), mp.mpf("1.27e5")
C_W, C_B = mp.sqrt(KAPPA_W / RHO_W), mp.sqrt(KAPPA_B / RHO_B)
DELTA = RHO_B / RHO_W


def greens(r, k):
    return -mp.exp(1j * k * r) / (4 * mp.pi * r)


def minnaert(delta):
    return mp.findroot(lambda x: 1 - delta - x * mp.cot(x), mp.mpf("0.06"))


def det_formula(xb, xw, d):
    return (
        mp.exp(1j * (xb + xw))
        * mp.sin(xw)
        * (mp.sin(xb) / xb * (1 / xw - 1j) - (mp.sin(xb) / xb - mp.cos(xb)) / (d * xw))
    )


def det_entries(xb, xw, d):
    a11 = -mp.exp(1j * xb) * mp.sin(xb) / xb
    a12 = mp.exp(1j * xw) * mp.sin(xw) / xw
    a21 = mp.exp(1j * xb) / d * (mp.sin(xb) / xb - mp.cos(xb))
    a22 = -mp.exp(1j * xw) * (mp.sin(xw) / xw - 1j * mp.sin(xw))
    return a11 * a22 - a12 * a21


def single_layer_quadrature(k, R):
    # x at the north pole, integrate over the colatitude; the azimuth is trivial
    f = lambda phi: greens(2 * R * mp.sin(phi / 2), k) * R**2 * mp.sin(phi) * 2 * mp.pi
    return mp.quad(f, [0, mp.pi])


if __name__ == "__main__":
    print("G(k=100, r=0.02)        =", mp.nstr(greens(mp.mpf("0.02"), 100), 20))
    print("c_w, c_b                =", mp.nstr(C_W, 17), mp.nstr(C_B, 17))
    xM = minnaert(DELTA)
    print("x_M(delta=1.2e-3)       =", mp.nstr(xM, 20))
    print("c_w / (c_b x_M)         =", mp.nstr(C_W / (C_B * xM), 17))
    print("omega_M (R=5e-5)        =", mp.nstr(C_B * xM / mp.mpf("5e-5"), 17))
    print("f_M (R=1e-3) [Hz]       =", mp.nstr(C_B * xM / mp.mpf("1e-3") / (2 * mp.pi), 17))
    print("bubble count            =", mp.floor(mp.mpf("2e-4") * mp.mpf("0.01") ** 3 / (mp.mpf(4) / 3 * mp.pi * mp.mpf("5e-5") ** 3)))
    xb = mp.mpf("0.06")
    xw = xb * C_B / C_W
    print("det formula             =", mp.nstr(det_formula(xb, xw, DELTA), 20))
    print("det entries             =", mp.nstr(det_entries(xb, xw, DELTA), 20))
    for kR in ("1e-3", "0.06", "0.5", "1.0"):
        print(f"S quad kR={kR:5s} R=1    =", mp.nstr(single_layer_quadrature(mp.mpf(kR), 1), 20))
