from __future__ import annotations

import numpy as np
from gmpy2 import mpq

from probeid.polysys import Interval, PolyRing, krawczyk_certify, numeric_real_roots


def circle_line():
    R = PolyRing(["x", "y"])
    return R, [R.parse("x^2 + y^2 - 2"), R.parse("x - y")]


def test_interval_arithmetic():
    a = Interval(mpq(-1), mpq(2))
    assert a * a == Interval(mpq(-2), mpq(4))
    assert a**2 == Interval(mpq(0), mpq(4))
    assert (a - a) == Interval(mpq(-3), mpq(3))
    assert Interval(mpq(0), mpq(1)).strictly_inside(Interval(mpq(-1), mpq(2)))
    assert Interval(mpq(0), mpq(1)).disjoint(Interval(mpq(2), mpq(3)))


def test_certifies_true_roots_and_brackets_them():
    R, polys = circle_line()
    for guess, root in (([1.1, 0.9], 1), ([-0.8, -1.2], -1)):
        c = krawczyk_certify(polys, dict(zip(["x", "y"], guess)), refine_steps=8)
        assert c is not None
        assert c.interval("x").lo < root < c.interval("x").hi


def test_rejects_point_far_from_any_root():
    _, polys = circle_line()
    assert krawczyk_certify(polys, {"x": 0.0, "y": 3.0}, refine_steps=0) is None


def test_numeric_roots_found_and_deduplicated():
    _, polys = circle_line()
    starts = [np.array(s) for s in ([2.0, 1.5], [1.5, 2.0], [-2.0, -1.0], [-1.0, -3.0])]
    roots = numeric_real_roots(polys, starts=starts)
    assert sorted(round(r[0], 9) for r in roots) == [-1.0, 1.0]
