"""Adaptive Gauss-Legendre quadrature on panels."""

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_EPS = np.finfo(float).eps


@lru_cache(maxsize=None)
def _nodes(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel(f, a, b, order):
    x, w = _nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = f(mid + half * x)
    return half * np.dot(w, vals), half * np.dot(w, np.abs(vals))


def adaptive_gauss_legendre(f, a, b, tol=1e-9, order=16, max_depth=40, initial_panels=8):
    """Integrate a vectorized function over ``[a, b]``.

    Each panel is compared against the sum over its two halves; panels whose
    difference exceeds their share of ``tol`` are bisected. The returned
    error estimate adds the remaining panel differences and a rounding floor.

    Args:
        f: callable mapping a float array to a (possibly complex) array.
        a, b: finite integration limits.
        tol: absolute tolerance on the total.
        order: Gauss-Legendre nodes per panel.
        max_depth: maximum bisection depth.
        initial_panels: number of equal panels to start from.

    Returns:
        tuple: ``(value, error_estimate)``.

    Raises:
        QuadratureError: if the tolerance is not met at ``max_depth``.
    """
    if b <= a:
        return 0.0, 0.0
    width = b - a
    edges = np.linspace(a, b, initial_panels + 1)
    stack = [(lo, hi, 0) for lo, hi in zip(edges[:-1], edges[1:])]
    total = 0.0
    err = 0.0
    mag = 0.0
    failed = False
    while stack:
        lo, hi, depth = stack.pop()
        coarse, _ = _panel(f, lo, hi, order)
        mid = 0.5 * (lo + hi)
        left, lmag = _panel(f, lo, mid, order)
        right, rmag = _panel(f, mid, hi, order)
        fine = left + right
        diff = abs(fine - coarse)
        if diff <= tol * (hi - lo) / width or depth >= max_depth:
            if diff > tol * (hi - lo) / width:
                failed = True
            total += fine
            err += diff
            mag += lmag + rmag
        else:
            stack.append((lo, mid, depth + 1))
            stack.append((mid, hi, depth + 1))
    err += 64 * _EPS * mag
    if failed and err > tol:
        raise QuadratureError("adaptive Gauss-Legendre did not converge", err)
    return total, err
