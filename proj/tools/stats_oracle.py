#!/usr/bin/env python3
"""Writes tests/fixtures/stats_oracle.json: Welch t, dof, two-sided p and
pooled Cohen's d for random sample pairs, evaluated with mpmath at 50 digits.

Usage: python3 tools/stats_oracle.py [out.json]
"""
import json
import random
import sys

import mpmath as mp

mp.mp.dps = 50


def moments(xs):
    xs = [mp.mpf(x) for x in xs]
    n = len(xs)
    m = mp.fsum(xs) / n
    v = mp.fsum((x - m) ** 2 for x in xs) / (n - 1)
    return n, m, v


def welch(a, b):
    na, ma, va = moments(a)
    nb, mb, vb = moments(b)
    sa, sb = va / na, vb / nb
    t = (ma - mb) / mp.sqrt(sa + sb)
    dof = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    # Two-sided tail of Student's t through the regularized incomplete beta.
    p = mp.betainc(dof / 2, mp.mpf(1) / 2, 0, dof / (dof + t * t), regularized=True)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    d = (ma - mb) / mp.sqrt(pooled)
    return t, dof, p, d


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/stats_oracle.json"
    rng = random.Random(20240611)
    cases = []
    for _ in range(100):
        na, nb = rng.randint(2, 40), rng.randint(2, 40)
        a = [round(rng.gauss(rng.uniform(3, 9), rng.uniform(0.2, 2.5)), 6) for _ in range(na)]
        b = [round(rng.gauss(rng.uniform(3, 9), rng.uniform(0.2, 2.5)), 6) for _ in range(nb)]
        t, dof, p, d = welch(a, b)
        cases.append({"a": a, "b": b, "t": float(t), "dof": float(dof), "p": float(p), "d": float(d)})
    with open(out, "w") as f:
        json.dump({"generator": "mpmath, 50 digits", "cases": cases}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
