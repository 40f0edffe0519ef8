"""Parametric tail functions for the packet size L and the channel periods A, U.

Every family is described through its complementary CDF ``P[X > x]``.  The
log-ccdf is the primary quantity: it is evaluated in closed form so that
probabilities far below the floating point range (``log P ~ -1e9``) stay
representable.  Quantiles are exposed through :meth:`TailFunction.inv_log_ccdf`,
which is what both the tail oracle and the samplers use.

All families accept a ``shift`` keyword that translates the support to the
right: ``P[X > x] = P[X0 > x - shift]``.

Text form (see :func:`parse_dist`)::

    exp(rate=1)  weibull(shape=2,scale=1)  pareto(a=2)  halfnormal(sigma=1.5)
    powerlogexp(a=1,b=0.5,delta=2)  lognormaltype(lambda=1,delta=2)
    doubleexp(gamma=1)  det(3.5)  table(path/to/file.csv)  exp(rate=1,shift=1)
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import integrate, optimize, special

from ._text import bind, parse_call, to_float
from .errors import ParseError

__all__ = [
    "TailFunction",
    "Exponential",
    "Weibull",
    "ParetoUnit",
    "HalfNormal",
    "PowerLogExp",
    "LogNormalType",
    "DoubleExp",
    "Deterministic",
    "Tabulated",
    "parse_dist",
    "log1mexp",
]

_LOG2 = math.log(2.0)


def log1mexp(logp):
    """Return ``log(1 - exp(logp))`` for ``logp <= 0`` without cancellation."""
    logp = np.asarray(logp, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(
            logp > -_LOG2,
            np.log(-np.expm1(np.minimum(logp, 0.0))),
            np.log1p(-np.exp(np.minimum(logp, -_LOG2))),
        )
    return out if out.ndim else float(out)


def _ret(arr):
    return arr if arr.ndim else float(arr)


@dataclass(frozen=True)
class TailFunction:
    """A nonnegative random variable described by its complementary CDF.

    Subclasses implement the unshifted tail through ``_log_tail`` (valid for
    ``z >= _lo``), ``_inv_tail`` (valid for ``logu <= 0``) and ``_base_mean``.
    """

    shift: float = field(default=0.0, kw_only=True)

    _lo = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.shift) and self.shift >= 0.0):
            raise ValueError(f"shift must be finite and >= 0, got {self.shift}")

    # -- support -----------------------------------------------------------
    @property
    def support_lo(self):
        return self.shift + self._lo

    @property
    def support_hi(self):
        return math.inf

    # -- evaluation --------------------------------------------------------
    def log_ccdf(self, x):
        """``log P[X > x]``, evaluated directly in closed form."""
        z = np.asarray(x, dtype=float) - self.shift
        inside = z >= self._lo
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            tail = self._log_tail(np.where(inside, z, self._lo))
        return _ret(np.where(inside, tail, 0.0))

    def ccdf(self, x):
        """``P[X > x]``; equals 1 below the support."""
        return _ret(np.exp(np.asarray(self.log_ccdf(x))))

    def cdf(self, x):
        return _ret(-np.expm1(np.asarray(self.log_ccdf(x))))

    def log_ccdf_ge(self, x):
        """``log P[X >= x]``; identical to :meth:`log_ccdf` for continuous laws."""
        return self.log_ccdf(x)

    def inv_log_ccdf(self, logu):
        """``inf{x : log P[X > x] <= logu}`` for ``logu <= 0``."""
        logu = np.minimum(np.asarray(logu, dtype=float), 0.0)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            z = self._inv_tail(logu)
        return _ret(self.shift + np.maximum(z, self._lo))

    def inv_ccdf(self, u):
        """Quantile ``inf{x : P[X > x] <= u}`` for ``0 < u <= 1``."""
        u = np.asarray(u, dtype=float)
        if np.any(~(u > 0.0)) or np.any(u > 1.0):
            raise ValueError("inv_ccdf requires 0 < u <= 1")
        return self.inv_log_ccdf(np.log(u))

    def sample(self, rng, size=None):
        """Inverse-transform draws; ``log U`` is drawn as ``-Exp(1)`` for full tail resolution."""
        return self.inv_log_ccdf(-rng.standard_exponential(size))

    def mean(self):
        """``E[X]``; ``math.inf`` when the mean is infinite."""
        return self.shift + self._base_mean()

    # -- text --------------------------------------------------------------
    def spec(self):
        """Canonical text form accepted by :func:`parse_dist`."""
        parts = [f"{k}={v!r}" for k, v in self._params()]
        if self.shift:
            parts.append(f"shift={self.shift!r}")
        return f"{self._name}({','.join(parts)})"

    def __str__(self):
        return self.spec()

    # -- to implement ------------------------------------------------------
    _name = "?"

    def _params(self):
        return []

    def _log_tail(self, z):
        raise NotImplementedError

    def _inv_tail(self, logu):
        raise NotImplementedError

    def _base_mean(self):
        raise NotImplementedError


def _positive(name, value):
    if not (math.isfinite(value) and value > 0.0):
        raise ValueError(f"{name} must be finite and > 0, got {value}")


@dataclass(frozen=True)
class Exponential(TailFunction):
    rate: float = 1.0
    _name = "exp"

    def __post_init__(self):
        super().__post_init__()
        _positive("rate", self.rate)

    def _params(self):
        return [("rate", self.rate)]

    def _log_tail(self, z):
        return -self.rate * z

    def _inv_tail(self, logu):
        return -logu / self.rate

    def _base_mean(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class Weibull(TailFunction):
    shape: float = 1.0
    scale: float = 1.0
    _name = "weibull"

    def __post_init__(self):
        super().__post_init__()
        _positive("shape", self.shape)
        _positive("scale", self.scale)

    def _params(self):
        return [("shape", self.shape), ("scale", self.scale)]

    def _log_tail(self, z):
        return -((z / self.scale) ** self.shape)

    def _inv_tail(self, logu):
        return self.scale * (-logu) ** (1.0 / self.shape)

    def _base_mean(self):
        return self.scale * math.gamma(1.0 + 1.0 / self.shape)


@dataclass(frozen=True)
class ParetoUnit(TailFunction):
    """``P[X > x] = x**-a`` for ``x >= 1``."""

    a: float = 1.0
    _name = "pareto"
    _lo = 1.0

    def __post_init__(self):
        super().__post_init__()
        _positive("a", self.a)

    def _params(self):
        return [("a", self.a)]

    def _log_tail(self, z):
        return -self.a * np.log(z)

    def _inv_tail(self, logu):
        return np.exp(-logu / self.a)

    def _base_mean(self):
        return self.a / (self.a - 1.0) if self.a > 1.0 else math.inf


@dataclass(frozen=True)
class HalfNormal(TailFunction):
    """``|N(0, sigma**2)|``."""

    sigma: float = 1.0
    _name = "halfnormal"

    def __post_init__(self):
        super().__post_init__()
        _positive("sigma", self.sigma)

    def _params(self):
        return [("sigma", self.sigma)]

    def _log_tail(self, z):
        return _LOG2 + special.log_ndtr(-z / self.sigma)

    def _inv_tail(self, logu):
        return -self.sigma * special.ndtri_exp(logu - _LOG2)

    def _base_mean(self):
        return self.sigma * math.sqrt(2.0 / math.pi)


@dataclass(frozen=True)
class PowerLogExp(TailFunction):
    """``a * x**b * exp(-delta*x)`` on ``[x0, inf)``, linear ramp from 1 on ``[0, x0]``.

    ``x0 = max(1, b/delta, root of a*x**b*exp(-delta*x) = 1)``, which makes the
    tail expression at most 1 and decreasing beyond ``x0``.
    """

    a: float = 1.0
    b: float = 0.0
    delta: float = 1.0
    x0: float = field(init=False, repr=False, compare=False)
    c0: float = field(init=False, repr=False, compare=False)
    _name = "powerlogexp"

    def __post_init__(self):
        super().__post_init__()
        _positive("a", self.a)
        _positive("delta", self.delta)
        if not math.isfinite(self.b):
            raise ValueError("b must be finite")
        start = max(1.0, self.b / self.delta)
        x0 = start
        if self._f(start) > 0.0:
            hi = start + 1.0
            while self._f(hi) > 0.0:
                hi = start + 2.0 * (hi - start)
            x0 = optimize.brentq(self._f, start, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
        object.__setattr__(self, "x0", float(x0))
        object.__setattr__(self, "c0", float(min(1.0, math.exp(self._f(x0)))))

    def _f(self, z):
        return math.log(self.a) + self.b * math.log(z) - self.delta * z

    def _params(self):
        return [("a", self.a), ("b", self.b), ("delta", self.delta)]

    def _log_tail(self, z):
        ramp = np.log1p(-(1.0 - self.c0) * np.minimum(z, self.x0) / self.x0)
        tail = math.log(self.a) + self.b * np.log(np.maximum(z, self.x0)) - self.delta * z
        return np.where(z < self.x0, ramp, tail)

    def _inv_tail(self, logu):
        logu = np.asarray(logu, dtype=float)
        out = np.empty_like(logu)
        logc0 = math.log(self.c0)
        ramp = logu >= logc0
        # ramp: 1 - (1 - c0) z/x0 = u
        out[ramp] = self.x0 * (-np.expm1(logu[ramp])) / (1.0 - self.c0) if self.c0 < 1.0 else 0.0
        flat = logu[~ramp]
        out[~ramp] = [self._solve(v) for v in flat.ravel()] if flat.size else []
        return out

    def _solve(self, logu):
        if logu == -math.inf:
            return math.inf
        g = lambda z: self._f(z) - logu  # noqa: E731
        lo, step = self.x0, max(1.0, (-logu) / self.delta)
        hi = lo + step
        while g(hi) > 0.0:
            lo, hi = hi, hi + 2.0 * (hi - lo)
        return optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def _base_mean(self):
        ramp = 0.5 * self.x0 * (1.0 + self.c0)
        tail, _ = integrate.quad(lambda z: math.exp(self._f(z)), self.x0, math.inf, epsabs=0, epsrel=1e-12, limit=200)
        return ramp + tail


@dataclass(frozen=True)
class LogNormalType(TailFunction):
    """``P[X > x] = exp(-lambda * (log x)**delta)`` for ``x >= 1``."""

    lam: float = 1.0
    delta: float = 2.0
    _name = "lognormaltype"
    _lo = 1.0

    def __post_init__(self):
        super().__post_init__()
        _positive("lambda", self.lam)
        if not (math.isfinite(self.delta) and self.delta > 1.0):
            raise ValueError(f"delta must be > 1, got {self.delta}")

    def _params(self):
        return [("lambda", self.lam), ("delta", self.delta)]

    def _log_tail(self, z):
        return -self.lam * np.log(z) ** self.delta

    def _inv_tail(self, logu):
        return np.exp((-logu / self.lam) ** (1.0 / self.delta))

    def _base_mean(self):
        f = lambda u: math.exp(u - self.lam * u**self.delta)  # noqa: E731
        tail, _ = integrate.quad(f, 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=200)
        return 1.0 + tail


@dataclass(frozen=True)
class DoubleExp(TailFunction):
    """``P[X > x] = exp(1 - exp(x**gamma))`` for ``x >= 0``."""

    gamma: float = 1.0
    _name = "doubleexp"

    def __post_init__(self):
        super().__post_init__()
        _positive("gamma", self.gamma)

    def _params(self):
        return [("gamma", self.gamma)]

    def _log_tail(self, z):
        return -np.expm1(z**self.gamma)

    def _inv_tail(self, logu):
        return np.log1p(-logu) ** (1.0 / self.gamma)

    def _base_mean(self):
        def f(z):
            t = z**self.gamma
            return math.exp(-math.expm1(t)) if t < 700.0 else 0.0

        val, _ = integrate.quad(f, 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=200)
        return val


@dataclass(frozen=True)
class Deterministic(TailFunction):
    """Point mass at ``value``; ``support_lo`` is the atom, where ``ccdf`` is already 0."""

    value: float = 0.0
    _name = "det"

    def __post_init__(self):
        super().__post_init__()
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"value must be finite and >= 0, got {self.value}")

    @property
    def support_lo(self):
        return self.shift + self.value

    @property
    def support_hi(self):
        return self.shift + self.value

    def _params(self):
        return [("value", self.value)]

    def _log_tail(self, z):
        return np.where(z < self.value, 0.0, -np.inf)

    def log_ccdf_ge(self, x):
        z = np.asarray(x, dtype=float) - self.shift
        return _ret(np.where(z <= self.value, 0.0, -np.inf))

    def _inv_tail(self, logu):
        return np.full_like(logu, self.value)

    def _base_mean(self):
        return self.value


@dataclass(frozen=True)
class Tabulated(TailFunction):
    """Tail given by ``(x, log_ccdf)`` pairs, linear in log-ccdf between knots.

    Rule: ``log_ccdf = 0`` below the first knot (an atom of mass
    ``1 - exp(l0)`` sits at ``x0`` when ``l0 < 0``); beyond the last knot the
    last segment's slope is extended, so the tail is exponential there.
    """

    xs: tuple = ()
    log_ccdfs: tuple = ()
    path: str | None = field(default=None, compare=False)
    _name = "table"

    def __post_init__(self):
        super().__post_init__()
        xs = np.asarray(self.xs, dtype=float)
        ls = np.asarray(self.log_ccdfs, dtype=float)
        if xs.ndim != 1 or xs.shape != ls.shape or xs.size < 2:
            raise ValueError("table needs at least two (x, log_ccdf) rows")
        if not np.all(np.isfinite(xs)) or not np.all(np.isfinite(ls)):
            raise ValueError("table entries must be finite")
        if xs[0] < 0.0 or np.any(np.diff(xs) <= 0.0):
            raise ValueError("table x must be >= 0 and strictly increasing")
        if np.any(ls > 0.0) or np.any(np.diff(ls) > 0.0):
            raise ValueError("table log_ccdf must be <= 0 and non-increasing")
        if ls[-1] >= ls[-2]:
            raise ValueError("last table segment must be strictly decreasing (tail extrapolation)")
        object.__setattr__(self, "xs", tuple(float(v) for v in xs))
        object.__setattr__(self, "log_ccdfs", tuple(float(v) for v in ls))

    @classmethod
    def from_csv(cls, path, **kw):
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(line for line in fh if not line.lstrip().startswith("#"))
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["x", "log_ccdf"]:
                raise ParseError(f"{path}: expected header 'x,log_ccdf'", line=1)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != 2:
                    raise ParseError(f"{path}: expected two columns", line=lineno)
                rows.append((to_float(row[0], "x"), to_float(row[1], "log_ccdf")))
        xs, ls = zip(*rows) if rows else ((), ())
        try:
            return cls(xs=xs, log_ccdfs=ls, path=str(path), **kw)
        except ValueError as exc:
            raise ParseError(f"{path}: {exc}") from None

    @cached_property
    def _x(self):
        return np.asarray(self.xs)

    @cached_property
    def _l(self):
        return np.asarray(self.log_ccdfs)

    @cached_property
    def _tail_slope(self):
        return (self._l[-1] - self._l[-2]) / (self._x[-1] - self._x[-2])

    @property
    def support_lo(self):
        return self.shift + self.xs[0]

    def spec(self):
        if self.path is None:
            raise ValueError("in-memory table has no text form; build it with Tabulated.from_csv")
        extra = f",shift={self.shift!r}" if self.shift else ""
        return f"table({self.path}{extra})"

    def __str__(self):
        return self.spec() if self.path is not None else f"table(<{len(self.xs)} rows>)"

    def log_ccdf(self, x):
        z = np.asarray(x, dtype=float) - self.shift
        xs, ls = self._x, self._l
        inner = np.interp(z, xs, ls)
        beyond = ls[-1] + self._tail_slope * (z - xs[-1])
        out = np.where(z < xs[0], 0.0, np.where(z > xs[-1], beyond, inner))
        return _ret(out)

    def inv_log_ccdf(self, logu):
        logu = np.minimum(np.asarray(logu, dtype=float), 0.0)
        xs, neg = self._x, -self._l
        t = -logu
        idx = np.searchsorted(neg, t, side="left")
        i = np.clip(idx, 1, xs.size - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            inner = xs[i - 1] + (t - neg[i - 1]) / (neg[i] - neg[i - 1]) * (xs[i] - xs[i - 1])
            beyond = xs[-1] + (t - neg[-1]) / (-self._tail_slope)
        out = np.where(idx == 0, xs[0], np.where(idx >= xs.size, beyond, inner))
        return _ret(self.shift + out)

    def _base_mean(self):
        return self.xs[0] + float(integrate.trapezoid(np.exp(self._l), self._x)) + self.mean_truncation_bound

    @property
    def mean_truncation_bound(self):
        """Contribution of the extrapolated tail beyond the last knot to :meth:`mean`."""
        return math.exp(self.log_ccdfs[-1]) / (-self._tail_slope)


_FAMILIES = {
    "exp": (Exponential, ["rate"], {}),
    "exponential": (Exponential, ["rate"], {}),
    "weibull": (Weibull, ["shape", "scale"], {}),
    "pareto": (ParetoUnit, ["a"], {"alpha": "a"}),
    "paretounit": (ParetoUnit, ["a"], {"alpha": "a"}),
    "halfnormal": (HalfNormal, ["sigma"], {}),
    "powerlogexp": (PowerLogExp, ["a", "b", "delta"], {}),
    "lognormaltype": (LogNormalType, ["lam", "delta"], {"lambda": "lam"}),
    "doubleexp": (DoubleExp, ["gamma"], {}),
    "det": (Deterministic, ["value"], {}),
    "deterministic": (Deterministic, ["value"], {}),
}


def parse_dist(text, base_dir=None):
    """Build a :class:`TailFunction` from its text form, e.g. ``weibull(shape=2,scale=1)``."""
    name, args, kwargs = parse_call(text)
    shift = to_float(kwargs.pop("shift"), "shift") if "shift" in kwargs else 0.0
    if name == "table":
        if len(args) != 1 or kwargs:
            raise ParseError("table() takes exactly one path argument (plus optional shift=)")
        path = Path(args[0])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        if not path.exists():
            raise ParseError(f"table file not found: {path}", field="table")
        return Tabulated.from_csv(path, shift=shift)
    if name not in _FAMILIES:
        raise ParseError(f"unknown distribution family {name!r}", field=name)
    cls, params, aliases = _FAMILIES[name]
    bound = bind(name, args, kwargs, params, aliases)
    values = {k: to_float(v, k) for k, v in bound.items()}
    try:
        return cls(**values, shift=shift)
    except ValueError as exc:
        raise ParseError(f"{name}(): {exc}") from None
