"""One-dimensional maximization: coarse grid followed by golden-section refinement."""

from __future__ import annotations

import math

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_INV_PHI_SQ = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_maximize(f, a: float, b: float, tol: float):
    """Golden-section search for a maximum of ``f`` on [a, b].

    Returns the best *evaluated* point (x, f(x)), which stays meaningful
    even when the objective jumps inside the bracket.
    """
    if not a < b:
        raise ValueError("bracket must satisfy a < b")
    best_x, best_f = a, f(a)
    fb = f(b)
    if fb > best_f:
        best_x, best_f = b, fb
    h = b - a
    if h <= tol:
        return best_x, best_f
    n = max(1, int(math.ceil(math.log(tol / h) / math.log(_INV_PHI))))
    c = a + _INV_PHI_SQ * h
    d = a + _INV_PHI * h
    yc = f(c)
    yd = f(d)
    for x, y in ((c, yc), (d, yd)):
        if y > best_f:
            best_x, best_f = x, y
    for _ in range(n - 1):
        if yc > yd:
            b, d, yd = d, c, yc
            h *= _INV_PHI
            c = a + _INV_PHI_SQ * h
            yc = f(c)
            if yc > best_f:
                best_x, best_f = c, yc
        else:
            a, c, yc = c, d, yd
            h *= _INV_PHI
            d = a + _INV_PHI * h
            yd = f(d)
            if yd > best_f:
                best_x, best_f = d, yd
    return best_x, best_f


def grid_then_golden_maximize(f, a: float, b: float, coarse_points: int, tol: float):
    """Coarse scan then golden-section refinement of the best cell.

    Returns (x_best, f_best) over every point evaluated anywhere in the
    procedure.
    """
    if coarse_points < 3:
        raise ValueError("coarse_points must be >= 3")
    xs = [a + (b - a) * i / (coarse_points - 1) for i in range(coarse_points)]
    ys = [f(x) for x in xs]
    i_best = max(range(len(ys)), key=ys.__getitem__)
    best_x, best_f = xs[i_best], ys[i_best]
    lo = xs[max(i_best - 1, 0)]
    hi = xs[min(i_best + 1, len(xs) - 1)]
    if hi > lo:
        gx, gf = golden_section_maximize(f, lo, hi, tol)
        if gf > best_f:
            best_x, best_f = gx, gf
    return best_x, best_f
