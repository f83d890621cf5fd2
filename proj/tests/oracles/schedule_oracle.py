# SPDX-License-Identifier: Apache-2.0
"""Independent reference values for the noise schedule and DDIM step formulas.

Run with plain python3 + numpy; the printed values are frozen into
tests/test_schedule.cpp and tests/acceptance_test.cpp.
"""
import math

import numpy as np


def even_spacing(T, n_base=1000):
    # brute force: for each step pick the integer base index closest to the
    # ideal real-valued position (ties go to the larger index)
    out = []
    for i in range(T + 1):
        target = i * (n_base - 1) / T
        best = min(range(n_base), key=lambda k: (abs(k - target), -k))
        out.append(best)
    return out


def linear_beta_alpha_bar(T):
    betas = np.linspace(1e-4, 2e-2, 1000, dtype=np.float64)
    base = np.cumprod(1.0 - betas)
    return [float(base[k]) for k in even_spacing(T)]


def sample_step(a_t, a_prev, z, eps):
    return (math.sqrt(a_prev / a_t) * z
            + (math.sqrt(1 / a_prev - 1) - math.sqrt(1 / a_t - 1)) * math.sqrt(a_prev) * eps)


def main():
    print("timestep_map T=25:", even_spacing(25))
    print("scalar sample step (0.5 -> 0.9, z=1, eps=1): %.17g" % sample_step(0.5, 0.9, 1.0, 1.0))

    T = 25
    ab = linear_beta_alpha_bar(T)
    print("linear-beta T=25 alpha_bar[0], [1], [T]: %.17g %.17g %.17g" % (ab[0], ab[1], ab[T]))
    # linear denoiser eps(z, step t -> t+1) = c[t] * z with c[t] = 0.05 + 0.01 t
    c = [0.05 + 0.01 * t for t in range(T)]
    factor = 1.0
    for t in range(T):
        coef = (math.sqrt(1 / ab[t + 1] - 1) - math.sqrt(1 / ab[t] - 1)) * math.sqrt(ab[t + 1])
        factor *= math.sqrt(ab[t + 1] / ab[t]) + coef * c[t]
    print("linear-backend inversion gain z_T / z_0: %.17g" % factor)


if __name__ == "__main__":
    main()
