#!/usr/bin/env python3
# Copyright 2026 The qpm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Offline search for Weyl-Heisenberg covariant SIC fiducials.

Minimises sum_{(a,b) != (0,0)} (|<f|X^a Z^b|f>|^2 - 1/(d+1))^2 over unit vectors
and prints C++ initialisers for src/sic_fiducials.cpp. The library re-verifies
equiangularity at load time, so these numbers are never trusted blindly.
"""
import sys

import numpy as np
from scipy.optimize import least_squares


def weyl(d, a, b):
    x = np.roll(np.eye(d), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)


def residuals(params, d, ops):
    v = params[:d] + 1j * params[d:]
    v = v / np.linalg.norm(v)
    return np.array([abs(np.vdot(v, op @ v)) ** 2 - 1.0 / (d + 1) for op in ops])


def search(d, seed):
    rng = np.random.default_rng(seed)
    ops = [weyl(d, a, b) for a in range(d) for b in range(d) if (a, b) != (0, 0)]
    best = None
    for _ in range(200):
        x0 = rng.normal(size=2 * d)
        sol = least_squares(residuals, x0, args=(d, ops), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        if best is None or sol.cost < best.cost:
            best = sol
        if best.cost < 1e-30:
            break
    v = best.x[:d] + 1j * best.x[d:]
    v = v / np.linalg.norm(v)
    v = v * np.exp(-1j * np.angle(v[0]))  # fix global phase
    return v, np.max(np.abs(residuals(np.concatenate([v.real, v.imag]), d, ops)))


def main():
    for d in map(int, sys.argv[1:] or ["2", "3", "4"]):
        v, dev = search(d, seed=1234 + d)
        print(f"// d = {d}, max equiangularity deviation {dev:.3e}")
        print("{" + ", ".join(f"{{{c.real:.17g}, {c.imag:.17g}}}" for c in v) + "},")


if __name__ == "__main__":
    main()
