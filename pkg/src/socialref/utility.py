"""Concave sub-utility families and inner consumption transforms.

A :class:`UtilitySpec` bundles the gain function ``f`` together with its
first and second derivatives and the inverse of the first derivative,
``F = (f')^{-1}``, which maps a marginal cost back to the gain at which an
agent's first-order condition holds.  The optional inner transform ``m``
curves consumption before it is compared with the reference point.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .exceptions import ParameterError

Scalar = Callable[[float], float]


@dataclass(frozen=True)
class InnerTransform:
    """Strictly increasing, concave ``m`` with ``m(0) = 0``."""

    name: str
    m: Scalar
    dm: Scalar
    d2m: Optional[Scalar] = None
    params: dict = field(default_factory=dict)

    @property
    def is_identity(self):
        return self.name == "identity"

    def second_derivative(self, x):
        """``m''(x)``; central difference of ``m'`` when not supplied."""
        if self.d2m is not None:
            return self.d2m(x)
        h = 1e-6 * max(1.0, abs(x))
        lo = max(x - h, 0.0)
        return (self.dm(x + h) - self.dm(lo)) / (x + h - lo)


def identity_transform():
    return InnerTransform(
        "identity", lambda x: x, lambda x: np.ones_like(x, dtype=float) if np.ndim(x) else 1.0,
        lambda x: np.zeros_like(x, dtype=float) if np.ndim(x) else 0.0,
    )


def log1p_transform(scale=1.0):
    """``m(x) = scale * log(1 + x)``."""
    if scale <= 0:
        raise ParameterError("scale must be positive")
    return InnerTransform(
        "log1p",
        lambda x: scale * np.log1p(x),
        lambda x: scale / (1.0 + x),
        lambda x: -scale / (1.0 + x) ** 2,
        {"scale": scale},
    )


def saturating_transform(rate=1.0):
    """``m(x) = (1 - exp(-rate x)) / rate``."""
    if rate <= 0:
        raise ParameterError("rate must be positive")
    return InnerTransform(
        "saturating",
        lambda x: -np.expm1(-rate * x) / rate,
        lambda x: np.exp(-rate * x),
        lambda x: -rate * np.exp(-rate * x),
        {"rate": rate},
    )


INNER_TRANSFORMS = {
    "identity": identity_transform,
    "log1p": log1p_transform,
    "saturating": saturating_transform,
}


@dataclass(frozen=True)
class UtilitySpec:
    """Gain function ``f`` with derivatives and inverse marginal utility.

    Attributes
    ----------
    family : str
        One of ``power``, ``sqrt``, ``log-shifted``, ``crra``, ``cara``,
        ``quadratic`` or ``custom``.
    f, df, inv_df, d2f : callable
        ``f``, ``f'``, ``F = (f')^{-1}`` and ``f''``.
    domain_lo : float
        ``f`` is defined for gains ``z >= domain_lo`` (``> `` when
        ``open_domain``).
    inner : InnerTransform
        Consumption transform ``m``; identity by default.
    """

    family: str
    f: Scalar
    df: Scalar
    inv_df: Scalar
    d2f: Optional[Scalar] = None
    domain_lo: float = -np.inf
    open_domain: bool = False
    params: dict = field(default_factory=dict)
    inner: InnerTransform = field(default_factory=identity_transform)

    def with_inner(self, inner):
        inner = make_inner(inner)
        return UtilitySpec(self.family, self.f, self.df, self.inv_df, self.d2f,
                           self.domain_lo, self.open_domain, dict(self.params), inner)

    def in_domain(self, z):
        z = np.asarray(z, dtype=float)
        return z > self.domain_lo if self.open_domain else z >= self.domain_lo

    def absolute_risk_aversion(self, z):
        """``-f''(z) / f'(z)``."""
        if self.d2f is None:
            h = 1e-6 * max(1.0, abs(z))
            d2 = (self.df(z + h) - self.df(z - h)) / (2 * h)
        else:
            d2 = self.d2f(z)
        return -d2 / self.df(z)

    def check_inverse(self, zs, tol=1e-9):
        """True when ``F(f'(z)) == z`` (relative ``tol``) on every sample."""
        zs = np.asarray(zs, dtype=float)
        back = np.array([self.inv_df(self.df(z)) for z in zs])
        return bool(np.all(np.abs(back - zs) <= tol * np.maximum(1.0, np.abs(zs))))

    def to_dict(self):
        return {"family": self.family, "params": dict(self.params),
                "inner": {"name": self.inner.name, "params": dict(self.inner.params)}}


def power(theta, scale=1.0, shift=0.0):
    """``f(z) = scale * (z - shift)**theta`` with ``0 < theta < 1``."""
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"power exponent must lie in (0, 1), got {theta}")
    if scale <= 0:
        raise ParameterError("scale must be positive")
    a = scale * theta
    return UtilitySpec(
        "power",
        f=lambda z: scale * np.power(z - shift, theta),
        df=lambda z: a * np.power(z - shift, theta - 1.0),
        inv_df=lambda y: shift + np.power(np.asarray(y, dtype=float) / a, 1.0 / (theta - 1.0)),
        d2f=lambda z: a * (theta - 1.0) * np.power(z - shift, theta - 2.0),
        domain_lo=shift,
        params={"theta": theta, "scale": scale, "shift": shift},
    )


def sqrt_utility(scale=2.0):
    """``f(z) = scale * sqrt(z)``; the default ``scale=2`` gives ``F(y) = y**-2``."""
    spec = power(0.5, scale)
    return UtilitySpec("sqrt", spec.f, spec.df, spec.inv_df, spec.d2f, 0.0,
                       params={"scale": scale})


def log_shifted(shift=1.0):
    """``f(z) = log(z + shift)``."""
    if shift < 0:
        raise ParameterError("shift must be non-negative")
    return UtilitySpec(
        "log-shifted",
        f=lambda z: np.log(z + shift),
        df=lambda z: 1.0 / (z + shift),
        inv_df=lambda y: 1.0 / np.asarray(y, dtype=float) - shift,
        d2f=lambda z: -1.0 / (z + shift) ** 2,
        domain_lo=-shift,
        open_domain=True,
        params={"shift": shift},
    )


def crra(gamma, shift=0.0):
    """Constant relative risk aversion in ``z - shift``.

    ``f(z) = ((z - shift)**(1 - gamma) - 1) / (1 - gamma)``, ``log`` at
    ``gamma = 1``.  A positive ``shift`` is a subsistence level, which makes
    relative risk aversion decreasing in ``z``.
    """
    if gamma <= 0:
        raise ParameterError("gamma must be positive")
    if gamma == 1.0:
        f = lambda z: np.log(z - shift)  # noqa: E731
    else:
        f = lambda z: np.expm1((1.0 - gamma) * np.log(z - shift)) / (1.0 - gamma)  # noqa: E731
    return UtilitySpec(
        "crra",
        f=f,
        df=lambda z: np.power(z - shift, -gamma),
        inv_df=lambda y: shift + np.power(np.asarray(y, dtype=float), -1.0 / gamma),
        d2f=lambda z: -gamma * np.power(z - shift, -gamma - 1.0),
        domain_lo=shift,
        open_domain=True,
        params={"gamma": gamma, "shift": shift},
    )


def cara(a=1.0):
    """``f(z) = (1 - exp(-a z)) / a``; defined on the whole real line."""
    if a <= 0:
        raise ParameterError("CARA coefficient must be positive")
    return UtilitySpec(
        "cara",
        f=lambda z: -np.expm1(-a * np.asarray(z, dtype=float)) / a,
        df=lambda z: np.exp(-a * np.asarray(z, dtype=float)),
        inv_df=lambda y: -np.log(np.asarray(y, dtype=float)) / a,
        d2f=lambda z: -a * np.exp(-a * np.asarray(z, dtype=float)),
        params={"a": a},
    )


def quadratic(a0=0.0, a1=1.0, a2=-0.5):
    """``f(z) = a0 + a1 z + a2 z**2`` with ``a1 > 0 > a2``.

    Only increasing below the bliss point ``-a1 / (2 a2)``.
    """
    if not (a1 > 0 and a2 < 0):
        raise ParameterError("quadratic utility needs a1 > 0 and a2 < 0")
    return UtilitySpec(
        "quadratic",
        f=lambda z: a0 + a1 * z + a2 * np.square(z),
        df=lambda z: a1 + 2.0 * a2 * np.asarray(z, dtype=float),
        inv_df=lambda y: (np.asarray(y, dtype=float) - a1) / (2.0 * a2),
        d2f=lambda z: 2.0 * a2 * np.ones_like(np.asarray(z, dtype=float)),
        params={"a0": a0, "a1": a1, "a2": a2},
    )


def custom(f, df, inv_df, d2f=None, domain_lo=-np.inf, open_domain=False, name="custom"):
    return UtilitySpec(name, f, df, inv_df, d2f, domain_lo, open_domain)


FAMILIES = {
    "power": power,
    "sqrt": sqrt_utility,
    "log-shifted": log_shifted,
    "crra": crra,
    "cara": cara,
    "quadratic": quadratic,
}


def make_inner(inner):
    if isinstance(inner, InnerTransform):
        return inner
    try:
        return INNER_TRANSFORMS[inner or "identity"]()
    except KeyError:
        raise ParameterError(f"unknown inner transform {inner!r}; choose from {sorted(INNER_TRANSFORMS)}")


def make_utility(family, inner=None, **params):
    """Build a utility from a family name and keyword parameters."""
    if isinstance(family, UtilitySpec):
        spec = family
    else:
        try:
            factory = FAMILIES[family]
        except KeyError:
            raise ParameterError(f"unknown utility family {family!r}; choose from {sorted(FAMILIES)}")
        spec = factory(**params)
    if inner is not None:
        spec = spec.with_inner(make_inner(inner))
    return spec


def utility_from_dict(d):
    """Inverse of :meth:`UtilitySpec.to_dict` for the built-in families."""
    d = dict(d)
    family = d.get("family", "sqrt")
    params = dict(d.get("params", {}))
    spec = make_utility(family, **params)
    inner = d.get("inner")
    if isinstance(inner, dict):
        inner = INNER_TRANSFORMS[inner.get("name", "identity")](**inner.get("params", {}))
    if inner:
        spec = spec.with_inner(inner)
    return spec
