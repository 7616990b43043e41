#!/usr/bin/env python3
"""Generate a table of the first N Riemann zeta zero ordinates.

Zeros are located as sign changes of a vectorised Riemann-Siegel Z
approximation, then polished with mpmath's Z(t) and cross-checked against
mpmath.nzeros. Output: one decimal per line, ascending.

    python3 tools/gen_zeta_zeros.py 10001 crates/core/data/zeta_zeros.txt
"""
import sys

import mpmath
import numpy as np


def theta(t):
    return (t / 2) * np.log(t / (2 * np.pi)) - t / 2 - np.pi / 8 + 1 / (48 * t) + 7 / (5760 * t**3)


def z_approx(t):
    a = np.sqrt(t / (2 * np.pi))
    n_max = np.floor(a).astype(int)
    th = theta(t)
    total = np.zeros_like(t)
    for n in range(1, int(n_max.max()) + 1):
        mask = n <= n_max
        total += np.where(mask, np.cos(th - t * np.log(n)) / np.sqrt(n), 0.0)
    p = a - n_max
    c0 = np.cos(2 * np.pi * (p * p - p - 1 / 16)) / np.cos(2 * np.pi * p)
    sign = np.where(n_max % 2 == 1, 1.0, -1.0)
    return 2 * total + sign * (2 * np.pi / t) ** 0.25 * c0


def main():
    count = int(sys.argv[1])
    out = sys.argv[2]
    mpmath.mp.dps = 25
    t_max = float(mpmath.zetazero(count).imag) + 0.5
    zeros = []
    start = 14.0
    chunk = 50.0
    while start < t_max and len(zeros) < count:
        grid = np.arange(start, min(start + chunk, t_max) + 1e-9, 0.002)
        vals = z_approx(grid)
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        for i in idx:
            root = mpmath.findroot(mpmath.siegelz, (grid[i] - 0.004, grid[i + 1] + 0.004), solver="anderson")
            zeros.append(float(root))
        start += chunk
        print(f"{start:.0f} {len(zeros)}", file=sys.stderr, flush=True)
    zeros = sorted(zeros)[:count]
    expected = int(mpmath.nzeros(zeros[-1] + 1e-6))
    if expected != count or any(b <= a for a, b in zip(zeros, zeros[1:])):
        raise SystemExit(f"zero count mismatch: found {len(zeros)}, nzeros says {expected}")
    for probe in sorted({1, min(100, count), count // 2 or 1, count}):
        ref = float(mpmath.zetazero(probe).imag)
        if abs(ref - zeros[probe - 1]) > 1e-9:
            raise SystemExit(f"zero {probe} mismatch: {zeros[probe - 1]} vs {ref}")
    with open(out, "w") as fh:
        for z in zeros:
            fh.write(f"{z:.12f}\n")


if __name__ == "__main__":
    main()
