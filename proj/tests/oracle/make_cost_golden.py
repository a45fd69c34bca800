#!/usr/bin/env python3
"""Independent numpy reference for the two base cost functions.

Prints frozen values for a deterministic 24x20 test image. Wavelet filters
come from PyWavelets; borders use half-sample symmetric padding.
"""
import numpy as np
import pywt
from scipy import ndimage

H, W = 24, 20
POINTS = [(0, 0), (3, 5), (11, 9), (12, 0), (23, 19), (17, 13)]


def image():
    r, c = np.mgrid[0:H, 0:W]
    return ((r * r * 7 + c * 13 + ((r * c) % 11) * 9) % 256).astype(np.float64)


def hill(x):
    kb = np.array([[-1, 2, -1], [2, -4, 2], [-1, 2, -1]], dtype=np.float64)
    res = np.abs(ndimage.correlate(x, kb, mode="reflect"))
    # Direct sums: a running-sum box filter loses small values next to the 1e10 ceiling.
    m3 = ndimage.correlate(res, np.full((3, 3), 1.0 / 9.0), mode="reflect")
    with np.errstate(divide="ignore"):
        inv = np.where(m3 > 0, 1.0 / m3, 1e10)
    return np.minimum(ndimage.correlate(inv, np.full((15, 15), 1.0 / 225.0), mode="reflect"), 1e10)


def suniward(x):
    w = pywt.Wavelet("db8")
    lo = np.array(w.dec_lo)
    hi = np.array(w.dec_hi)
    pad = 48
    xp = np.pad(x, pad, mode="symmetric")
    total = np.zeros_like(x)
    for col, row in ((lo, hi), (hi, lo), (hi, hi)):
        f = np.outer(col, row)
        # residual R(q) = sum_ij f[i,j] x[q + 8 - i, q + 8 - j] for q in [-8, H+8)
        r = np.zeros((H + 16, W + 16))
        for i in range(16):
            for j in range(16):
                r0 = pad - 8 + 8 - i
                c0 = pad - 8 + 8 - j
                r += f[i, j] * xp[r0:r0 + H + 16, c0:c0 + W + 16]
        d = 1.0 / (np.abs(r) + 1.0)
        s = np.zeros_like(x)
        for i in range(16):
            for j in range(16):
                # D(p + i - 8, p + j - 8), D stored with origin -8
                s += abs(f[i, j]) * d[i:i + H, j:j + W]
        total += s
    return np.minimum(total, 1e10)


def main():
    x = image()
    h = hill(x)
    s = suniward(x)
    for name, grid in (("hill", h), ("suniward", s)):
        print(name)
        for p in POINTS:
            print("    {%d, %d, %.17g}," % (p[0], p[1], grid[p]))


if __name__ == "__main__":
    main()
