"""Seeded generators shared by the tests."""

import math

import numpy as np

from annulus_nev.polynomials import RationalFn


def annulus_point(rng, R=10.0, avoid=(1.0, 2.0, 4.0, 8.0), gap=1e-3):
    """Random point of A(R) whose modulus keeps ``gap`` (relative) away from the listed circles."""
    while True:
        rho = math.exp(rng.uniform(-math.log(R), math.log(R)) * 0.98)
        if all(abs(rho / c - 1) > gap and abs(rho * c - 1) > gap for c in avoid):
            return rho * complex(math.cos(t := rng.uniform(0, 2 * math.pi)), math.sin(t))


def random_rational(rng, max_deg=8, R=10.0, avoid=(1.0, 2.0, 4.0, 8.0), allow_multiple=True):
    """Rational function with zeros and poles in A(R), degrees <= max_deg, as (fn, zeros, poles)."""
    nz = int(rng.integers(0, max_deg + 1))
    npl = int(rng.integers(0, max_deg + 1))
    if nz + npl == 0:
        nz = 1
    zeros, poles = [], []
    for bucket, n in ((zeros, nz), (poles, npl)):
        while len(bucket) < n:
            a = annulus_point(rng, R, avoid)
            m = int(rng.integers(1, 3)) if allow_multiple else 1
            m = min(m, n - len(bucket))
            bucket.extend([a] * m)
    lead = complex(rng.uniform(0.5, 2.0), rng.uniform(-1, 1))
    return RationalFn.from_roots(zeros, poles, lead), zeros, poles


def multiset(points):
    """{point: multiplicity} for a list with repeats."""
    out = []
    for p in points:
        for slot in out:
            if abs(slot[0] - p) <= 1e-9 * (1 + abs(p)):
                slot[1] += 1
                break
        else:
            out.append([p, 1])
    return [(complex(a), m) for a, m in out]
