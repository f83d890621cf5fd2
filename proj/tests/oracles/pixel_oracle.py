# SPDX-License-Identifier: Apache-2.0
"""Brute-force reference values for the codec, preprocessing, AdaIN and
colour/quality metrics. Frozen into the C++ unit and acceptance tests.
"""
import math

import numpy as np


def codec_gray():
    s3, s2, s6 = math.sqrt(3), math.sqrt(2), math.sqrt(6)
    color = np.array([[1 / s3, 1 / s3, 1 / s3],
                      [1 / s2, -1 / s2, 0.0],
                      [1 / s6, 1 / s6, -2 / s6]])
    haar = 0.5 * np.array([[1, 1, 1, 1],
                           [1, -1, 1, -1],
                           [1, 1, -1, -1],
                           [1, -1, -1, 1]], dtype=float)
    n = 128 / 255 * 2 - 1
    block = np.full((4, 3), n)  # 2x2 pixels (row-major) x rgb
    band_scale = [2.0, 10.0, 10.0, 10.0]
    lat = np.zeros(12)
    for c in range(3):
        for h in range(4):
            lat[c * 4 + h] = band_scale[h] * sum(haar[h, p] * (color[c] @ block[p]) for p in range(4))
    return lat


def preprocess_clamp_mean():
    vals = [200.0] + [10.0] * 109 + [9.0] * 190
    mean = sum(vals) / len(vals)
    scale = 30.0 / mean
    out = [min(255.0, v * scale) for v in vals]
    return mean, sum(out) / len(out)


def adain_2x2():
    zc = [1.0, 2.0, 3.0, 4.0]
    zs = [-1.0, 1.0, -1.0, 1.0]
    mc = sum(zc) / 4
    sc = math.sqrt(sum((v - mc) ** 2 for v in zc) / 4)
    ms = sum(zs) / 4
    ss = math.sqrt(sum((v - ms) ** 2 for v in zs) / 4)
    return [ss * (v - mc) / sc + ms for v in zc]


def gradient_pair():
    a = np.zeros((32, 32, 3))
    b = np.zeros((32, 32, 3))
    for y in range(32):
        for x in range(32):
            a[y, x] = (4 * x + 2 * y, 8 * y, 128 + 2 * x - y)
            b[y, x] = (3 * x + 5 * y, 255 - 6 * x, 60 + 4 * y)
    return a, b


def ssim_bruteforce(a, b):
    la = a[..., 0] * 0.299 + a[..., 1] * 0.587 + a[..., 2] * 0.114
    lb = b[..., 0] * 0.299 + b[..., 1] * 0.587 + b[..., 2] * 0.114
    w = np.zeros((11, 11))
    for i in range(11):
        for j in range(11):
            w[i, j] = math.exp(-((i - 5) ** 2 + (j - 5) ** 2) / (2 * 1.5 ** 2))
    w /= w.sum()
    c1 = (0.01 * 255) ** 2
    c2 = (0.03 * 255) ** 2
    vals = []
    h, wd = la.shape
    for y in range(h - 10):
        for x in range(wd - 10):
            pa = la[y:y + 11, x:x + 11]
            pb = lb[y:y + 11, x:x + 11]
            ma = (w * pa).sum()
            mb = (w * pb).sum()
            va = (w * (pa - ma) ** 2).sum()
            vb = (w * (pb - mb) ** 2).sum()
            cov = (w * (pa - ma) * (pb - mb)).sum()
            vals.append(((2 * ma * mb + c1) * (2 * cov + c2)) /
                        ((ma * ma + mb * mb + c1) * (va + vb + c2)))
    return sum(vals) / len(vals)


def srgb_to_lab(rgb):
    def lin(c):
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4
    r, g, b = (lin(c) for c in rgb)
    x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b
    y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b
    z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b
    xn, yn, zn = 0.95047, 1.0, 1.08883
    d = 6 / 29

    def f(t):
        return t ** (1 / 3) if t > d ** 3 else t / (3 * d * d) + 4 / 29
    fx, fy, fz = f(x / xn), f(y / yn), f(z / zn)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


def main():
    print("codec gray-128 latent:", ["%.17g" % v for v in codec_gray()])
    m, after = preprocess_clamp_mean()
    print("preprocess clamp case: input mean %.17g, output mean %.17g" % (m, after))
    print("adain 2x2:", ["%.17g" % v for v in adain_2x2()])
    a, b = gradient_pair()
    print("ssim gradient pair: %.17g" % ssim_bruteforce(a, b))
    print("psnr uniform-1: %.17g" % (10 * math.log10(255 ** 2 / 1.0)))
    print("lab(0.5,0.25,0.25):", ["%.17g" % v for v in srgb_to_lab((0.5, 0.25, 0.25))])
    print("lab(1,1,1):", ["%.17g" % v for v in srgb_to_lab((1.0, 1.0, 1.0))])


if __name__ == "__main__":
    main()
