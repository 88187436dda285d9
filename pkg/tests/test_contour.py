import math

import numpy as np
import pytest

from annulus_nev.contour import find_zeros


def test_zero_on_outer_circle_triggers_jitter():
    res = find_zeros(lambda z: z - 2, lambda z: np.ones_like(z), 2.0)
    assert res.attempts > 1 and res.outer > 2
    assert len(res.zeros) == 1 and abs(res.zeros[0][0] - 2) < 1e-10


def test_zero_free_function():
    res = find_zeros(lambda z: np.exp(z), lambda z: np.exp(z), 6.0)
    assert res.zeros == ()


def test_clustered_simple_zeros_are_separated():
    pts = [1.5, 1.5 + 1e-3, -2j]
    f = lambda z: (z - pts[0]) * (z - pts[1]) * (z - pts[2])
    df = lambda z: (z - pts[1]) * (z - pts[2]) + (z - pts[0]) * (z - pts[2]) + (z - pts[0]) * (z - pts[1])
    res = find_zeros(f, df, 4.0)
    assert sorted(m for _, m in res.zeros) == [1, 1, 1]
    for p in pts:
        assert min(abs(z - p) for z, _ in res.zeros) < 1e-9


def test_inner_region_is_included():
    # zeros at |z| = 0.3 lie in A(4)
    f = lambda z: z**2 - 0.09
    res = find_zeros(f, lambda z: 2 * z, 4.0)
    assert sorted(round(z.real, 12) for z, _ in res.zeros) == [-0.3, 0.3]
    assert res.inner == pytest.approx(1 / res.outer)


def test_outer_must_exceed_one():
    with pytest.raises(ValueError):
        find_zeros(lambda z: z, lambda z: 1 + 0 * z, 1.0)
