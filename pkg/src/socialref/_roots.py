"""Scalar root finding used by the best-response solvers."""

import math

from .exceptions import BoundViolationError, InfeasibleModelError


def safeguarded_newton(fun, lo, hi, dfun=None, x0=None, xtol=1e-12, ftol=0.0, max_iter=200):
    """Find a root of an increasing-or-decreasing ``fun`` on ``[lo, hi]``.

    Newton steps are taken from ``x0`` (midpoint by default) and replaced by
    bisection whenever they leave the current bracket or fail to shrink it.
    ``dfun`` may be omitted, in which case a central difference is used.

    Returns the bracket end at which ``fun`` has the sign of ``fun(hi)`` once
    the bracket is narrower than ``xtol``, so a root strictly inside
    ``(lo, hi]`` is never reported as ``lo``.
    """
    f_lo = fun(lo)
    f_hi = fun(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.isnan(f_lo) or math.isnan(f_hi) or (f_lo > 0) == (f_hi > 0):
        raise InfeasibleModelError(
            f"no sign change on [{lo!r}, {hi!r}]: f(lo)={f_lo!r}, f(hi)={f_hi!r}"
        )
    rising = f_hi > 0

    if dfun is None:
        def dfun(x):
            h = 1e-7 * max(1.0, abs(x))
            a, b = max(lo, x - h), min(hi, x + h)
            return (fun(b) - fun(a)) / (b - a)

    x = 0.5 * (lo + hi) if x0 is None else min(max(x0, lo), hi)
    for _ in range(max_iter):
        fx = fun(x)
        if fx == 0.0 or (ftol > 0.0 and abs(fx) <= ftol and hi - lo <= max(xtol, 1e-6)):
            return x
        if (fx > 0) == rising:
            hi = x
        else:
            lo = x
        if hi - lo <= xtol * max(1.0, abs(hi)):
            return hi
        d = dfun(x)
        step_ok = d != 0.0 and math.isfinite(d)
        if step_ok:
            x_new = x - fx / d
            step_ok = lo < x_new < hi
        if step_ok and abs(x_new - x) <= xtol * max(1.0, abs(x)):
            return x_new
        x = x_new if step_ok else 0.5 * (lo + hi)
    raise BoundViolationError(f"root not isolated after {max_iter} iterations on [{lo!r}, {hi!r}]")
