"""Symbolic link functions Phi, regime classification and asymptotic predictors.

``Phi`` relates the two tails through ``1 / P[L > x] ~ Phi(1 / P[A > x])``.
Its growth class decides how heavy ``N`` and ``T`` are.  Expressions are
built from a handful of factors and multiplied together::

    power(2) * logfactor(-0.5) * const(1.3)
    logpower(lambda=1, delta=2)            # Phi = exp(lambda * (log x)**delta)
    exprv(beta=1)                          # log Phi = c * x**beta * (log x)**k
    explogpower(lambda=1, delta=0.7)       # log Phi = exp(lambda * (log x)**delta)
    expexprv(gamma=1)                      # log log Phi = c * x**gamma
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from ._text import bind, parse_call, split_product, to_float
from .errors import (
    CriticalBoundaryError,
    ParseError,
    ScaleMismatchError,
    UnclassifiedError,
    UnsupportedRegimeError,
)

PROBE_GRID = 2.0 ** np.arange(4, 61)


# ---------------------------------------------------------------------------
# Phi expressions


class PhiSpec:
    """Base class: every node evaluates ``log Phi`` and ``log log Phi``."""

    #: ordering used to pick the factor that governs a product
    rank = 0

    def log_phi(self, x):
        raise NotImplementedError

    def log_log_phi(self, x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(self.log_phi(x))

    def factors(self):
        return (self,)

    def __mul__(self, other):
        return Product(self.factors() + other.factors())

    def __str__(self):
        return self.text()


@dataclass(frozen=True, eq=True)
class Const(PhiSpec):
    c: float = 1.0
    rank = 0

    def __post_init__(self):
        if not self.c > 0.0:
            raise ValueError("const factor must be > 0")

    def log_phi(self, x):
        return np.full_like(np.asarray(x, dtype=float), math.log(self.c))

    def text(self):
        return f"const({self.c!r})"


@dataclass(frozen=True)
class LogFactor(PhiSpec):
    """``(log x)**b``."""

    b: float = 1.0
    rank = 1

    def log_phi(self, x):
        with np.errstate(divide="ignore"):
            return self.b * np.log(np.log(np.asarray(x, dtype=float)))

    def text(self):
        return f"logfactor({self.b!r})"


@dataclass(frozen=True)
class Power(PhiSpec):
    alpha: float = 1.0
    rank = 2

    def __post_init__(self):
        if not self.alpha >= 0.0:
            raise ValueError("power exponent must be >= 0")

    def log_phi(self, x):
        return self.alpha * np.log(np.asarray(x, dtype=float))

    def text(self):
        return f"power({self.alpha!r})"


@dataclass(frozen=True)
class LogPower(PhiSpec):
    """``Phi = exp(lam * (log x)**delta)``."""

    lam: float = 1.0
    delta: float = 2.0
    rank = 3

    def __post_init__(self):
        if not (self.lam > 0.0 and self.delta > 0.0):
            raise ValueError("logpower needs lambda > 0 and delta > 0")

    def log_phi(self, x):
        return self.lam * np.log(np.asarray(x, dtype=float)) ** self.delta

    def text(self):
        return f"logpower(lambda={self.lam!r},delta={self.delta!r})"


@dataclass(frozen=True)
class ExpLogPower(PhiSpec):
    """``log Phi = exp(lam * (log x)**delta)``."""

    lam: float = 1.0
    delta: float = 0.7
    rank = 4

    def __post_init__(self):
        if not (self.lam > 0.0 and self.delta > 0.0):
            raise ValueError("explogpower needs lambda > 0 and delta > 0")

    def log_log_phi(self, x):
        return self.lam * np.log(np.asarray(x, dtype=float)) ** self.delta

    def log_phi(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_log_phi(x))

    def text(self):
        return f"explogpower(lambda={self.lam!r},delta={self.delta!r})"


@dataclass(frozen=True)
class ExpRV(PhiSpec):
    """``log Phi = c * x**beta * (log x)**k``; ``(log x)**k`` is the slowly varying part."""

    beta: float = 1.0
    c: float = 1.0
    k: float = 0.0
    rank = 5

    def __post_init__(self):
        if not (self.beta > 0.0 and self.c > 0.0):
            raise ValueError("exprv needs beta > 0 and c > 0")

    def log_log_phi(self, x):
        lx = np.log(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            return math.log(self.c) + self.beta * lx + self.k * np.log(lx)

    def log_phi(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_log_phi(x))

    def text(self):
        return f"exprv(beta={self.beta!r},c={self.c!r},k={self.k!r})"


@dataclass(frozen=True)
class ExpExpRV(PhiSpec):
    """``log log Phi = c * x**gamma``."""

    gamma: float = 1.0
    c: float = 1.0
    rank = 6

    def __post_init__(self):
        if not (self.gamma > 0.0 and self.c > 0.0):
            raise ValueError("expexprv needs gamma > 0 and c > 0")

    def log_log_phi(self, x):
        return self.c * np.asarray(x, dtype=float) ** self.gamma

    def log_phi(self, x):
        with np.errstate(over="ignore"):
            return np.exp(self.log_log_phi(x))

    def inverse_rate(self, u):
        """Inverse of ``R(x) = c * x**gamma``."""
        return (u / self.c) ** (1.0 / self.gamma)

    def text(self):
        return f"expexprv(gamma={self.gamma!r},c={self.c!r})"


@dataclass(frozen=True)
class Product(PhiSpec):
    parts: tuple = ()

    def factors(self):
        return self.parts

    def log_phi(self, x):
        out = 0.0
        for p in self.parts:
            out = out + p.log_phi(x)
        return out

    def log_log_phi(self, x):
        lead = self.leader()
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            lp = self.log_phi(x)
            ll = np.log(lp)
        # once log Phi overflows the leading factor alone decides log log Phi
        return np.where(np.isfinite(lp), ll, lead.log_log_phi(x))

    def leader(self):
        return max(self.parts, key=lambda p: p.rank)

    def text(self):
        return "*".join(p.text() for p in self.parts)


@dataclass(frozen=True)
class NumericPhi(PhiSpec):
    """``Phi`` known only as a callable returning ``log Phi(x)``."""

    fn: object = field(default=None, compare=False)
    label: str = "numeric"
    rank = -1

    def log_phi(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def text(self):
        return self.label


_PHI_FACTORIES = {
    "power": (Power, ("alpha",), {}),
    "logpower": (LogPower, ("lam", "delta"), {"lambda": "lam"}),
    "explogpower": (ExpLogPower, ("lam", "delta"), {"lambda": "lam"}),
    "exprv": (ExpRV, ("beta", "c", "k"), {}),
    "expexprv": (ExpExpRV, ("gamma", "c"), {}),
    "const": (Const, ("c",), {}),
    "logfactor": (LogFactor, ("b",), {}),
}


def parse_phi(text):
    """Parse a Phi expression such as ``power(2)*logfactor(-0.5)``."""
    nodes = []
    for piece in split_product(text):
        name, args, kwargs = parse_call(piece)
        if name not in _PHI_FACTORIES:
            raise ParseError(f"unknown Phi factor {name!r}", field="phi")
        cls, params, aliases = _PHI_FACTORIES[name]
        bound = bind(name, args, kwargs, params, aliases)
        try:
            nodes.append(cls(**{k: to_float(v, k) for k, v in bound.items()}))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{name}: {exc}", field="phi") from None
    return nodes[0] if len(nodes) == 1 else Product(tuple(nodes))


def gaussian_phi(sigma_L, sigma_A):
    """Phi for half-normal ``L`` and ``A``: ``sqrt(a) (pi log x)**((1-a)/2) x**a``, ``a = (sigma_A/sigma_L)**2``."""
    a = (sigma_A / sigma_L) ** 2
    c = math.sqrt(a) * math.pi ** ((1.0 - a) / 2.0)
    return Product((Const(c), Power(a), LogFactor((1.0 - a) / 2.0)))


def exponential_type_phi(a, b, delta, beta):
    """Phi for ``P[A > x] ~ exp(-beta x)`` and ``P[L > x] ~ a x**b exp(-delta x)``."""
    return Product((Const(beta ** b / a), Power(delta / beta), LogFactor(-b)))


def phi_from_pair(L, A):
    """Numeric Phi implied by two tails: ``log Phi(y) = -log P[L > Aq(1/y)]``.

    ``Aq`` is the quantile function of ``A``.  ``y < 1`` raises ``ValueError``.
    """

    def log_phi(y):
        y = np.asarray(y, dtype=float)
        if np.any(~(y >= 1.0)):
            raise ValueError("Phi is defined for y >= 1 only")
        return -np.asarray(L.log_ccdf(A.inv_log_ccdf(-np.log(y))), dtype=float)

    return NumericPhi(log_phi, label=f"pair(L={L.spec()},A={A.spec()})")


def doubling_ratio(phi, y):
    """``log Phi(2y) / log Phi(y)``: tends to 1 for slowly growing ``log Phi``."""
    y = np.asarray(y, dtype=float)
    return phi.log_phi(2.0 * y) / phi.log_phi(y)


def log_index(phi, y):
    """``log Phi(y) / log y``: tends to alpha when Phi is regularly varying."""
    y = np.asarray(y, dtype=float)
    return phi.log_phi(y) / np.log(y)


def monotonicity_probe(phi, grid=PROBE_GRID):
    """True when ``log Phi`` is eventually non-decreasing on ``x = 2**k, k = 4..60``.

    "Eventually" means on the upper half of the grid; slowly varying factors
    such as ``(log x)**-b`` may bend the head of an otherwise growing Phi.
    """
    grid = np.asarray(grid, dtype=float)[len(grid) // 2:]
    with np.errstate(all="ignore"):
        ll = np.asarray(phi.log_log_phi(grid), dtype=float)
        lp = np.asarray(phi.log_phi(grid), dtype=float)
    # compare on the log-log scale wherever log Phi is positive (overflow safe)
    use_ll = np.all(np.isfinite(ll) | (ll == np.inf))
    vals = ll if use_ll and np.all(lp > 0) else lp
    if np.any(np.isnan(vals)):
        return False
    d = np.diff(vals)
    tol = 1e-12 * np.maximum(1.0, np.abs(vals[1:]))
    return bool(np.all(d >= -tol))


# ---------------------------------------------------------------------------
# Regimes


class Regime(enum.Enum):
    REGULARLY_VARYING = "RegularlyVarying"
    SLOWLY_VARYING_LOG_PHI_SUB = "SlowlyVaryingLogPhi_Sub"
    LOGNORMAL = "LogNormalRegime"
    BETWEEN_HALF_ONE = "BetweenHalfOne"
    WEIBULL = "WeibullRegime"
    NEARLY_EXPONENTIAL = "NearlyExponential"


# Descriptive names for the result behind each prediction.
RESULTS = {
    Regime.REGULARLY_VARYING: "regularly varying Phi: P[N>n] ~ Gamma(alpha+1)/Phi(n)",
    Regime.SLOWLY_VARYING_LOG_PHI_SUB: "log Phi slower than exp(sqrt(log n)): log P[N>n] ~ -log Phi(n)",
    Regime.LOGNORMAL: "lognormal-type Phi: second-order loglog correction",
    Regime.BETWEEN_HALF_ONE: "explogpower with 1/2<delta<1: double-log asymptotics",
    Regime.WEIBULL: "Weibull regime: log P[N>n] ~ -c_beta (log Phi(n))^(1/(beta+1))",
    Regime.NEARLY_EXPONENTIAL: "nearly exponential: log P[N>n] ~ -n / R^{-1}(log n)",
}


@dataclass(frozen=True)
class RegimeClass:
    tag: Regime
    params: tuple = ()
    notes: tuple = ()

    def param(self, name, default=None):
        return dict(self.params).get(name, default)

    @property
    def result(self):
        return RESULTS[self.tag]

    def describe(self):
        ps = ", ".join(f"{k}={v:g}" for k, v in self.params)
        return f"{self.tag.value}({ps})"


def _boundary(msg):
    raise CriticalBoundaryError(msg)


def classify(phi):
    """Assign ``phi`` to one regime from its structure.

    Products are classified by their fastest-growing factor; the remaining
    factors only enter the predictors through ``log Phi(n)``.
    """
    if isinstance(phi, NumericPhi):
        raise UnclassifiedError(f"{phi.label}: numeric Phi has no structural regime")
    if not monotonicity_probe(phi):
        raise UnclassifiedError(f"{phi}: log Phi is not eventually non-decreasing")
    parts = phi.factors()
    lead = max(parts, key=lambda p: p.rank)
    peers = [p for p in parts if p.rank == lead.rank]
    if len(peers) > 1:
        raise UnclassifiedError(f"{phi}: several factors of the same growth class")

    if isinstance(lead, Const):
        raise UnclassifiedError(f"{phi}: constant Phi does not describe a tail relation")
    if isinstance(lead, (Power, LogFactor)):
        alpha = lead.alpha if isinstance(lead, Power) else 0.0
        others = [p for p in parts if isinstance(p, LogFactor)]
        if alpha == 0.0 and not (others and others[0].b > 0):
            raise UnclassifiedError(f"{phi}: Phi does not grow")
        return RegimeClass(Regime.REGULARLY_VARYING, (("alpha", alpha),))
    if isinstance(lead, LogPower):
        lam, delta = lead.lam, lead.delta
        if delta == 1.0:
            _boundary(f"{phi}: delta = 1 separates slow variation from the lognormal regime")
        if delta > 1.0:
            return RegimeClass(Regime.LOGNORMAL, (("lambda", lam), ("delta", delta)))
        return RegimeClass(
            Regime.REGULARLY_VARYING, (("alpha", 0.0),),
            notes=("exp(lambda (log x)^delta) with delta < 1 is slowly varying",),
        )
    if isinstance(lead, ExpLogPower):
        lam, delta = lead.lam, lead.delta
        if delta in (0.5, 1.0):
            _boundary(f"{phi}: delta = {delta:g} is a critical boundary")
        if delta < 0.5:
            return RegimeClass(Regime.SLOWLY_VARYING_LOG_PHI_SUB, (("lambda", lam), ("delta", delta)))
        if delta < 1.0:
            return RegimeClass(Regime.BETWEEN_HALF_ONE, (("lambda", lam), ("delta", delta)))
        if lam == 1.0:
            return RegimeClass(
                Regime.NEARLY_EXPONENTIAL, (("delta", delta),),
                notes=("log log Phi = (log x)^delta: boundary refinement of the nearly exponential law",),
            )
        raise UnclassifiedError(f"{phi}: explogpower with delta > 1 is only covered for lambda = 1")
    if isinstance(lead, ExpRV):
        return RegimeClass(Regime.WEIBULL, (("beta", lead.beta),))
    if isinstance(lead, ExpExpRV):
        return RegimeClass(Regime.NEARLY_EXPONENTIAL, (("gamma", lead.gamma), ("c", lead.c)))
    raise UnclassifiedError(f"{phi}: unrecognised expression")


# ---------------------------------------------------------------------------
# Predictions


class PredictionKind(enum.Enum):
    EXACT_ASYMPTOTIC = "EXACT_ASYMPTOTIC"  # P / prediction -> 1
    LOG_ASYMPTOTIC = "LOG_ASYMPTOTIC"  # log P / prediction -> 1
    LOG_ASYMPTOTIC_WITH_CORRECTION = "LOG_ASYMPTOTIC_WITH_CORRECTION"
    DOUBLE_LOG_ASYMPTOTIC = "DOUBLE_LOG_ASYMPTOTIC"  # log(-log P) / log(-prediction) -> 1


@dataclass(frozen=True)
class Prediction:
    """Predicted ``log P``; for double-log kinds ``loglog = log(-value)`` is primary."""

    value: float
    kind: PredictionKind
    result: str
    loglog: float | None = None


def _weibull_constant(beta):
    return beta ** (1.0 / (beta + 1.0)) + beta ** (-beta / (beta + 1.0))


def predict_log_ccdf_N(regime, phi, n):
    """Predicted ``log P[N > n]`` with the scale on which it is asymptotically exact."""
    n = float(n)
    if not n >= 2.0:
        raise ValueError("predictions need n >= 2")
    ln = math.log(n)
    tag = regime.tag
    res = regime.result
    if tag is Regime.REGULARLY_VARYING:
        a = regime.param("alpha")
        return Prediction(float(gammaln(a + 1.0) - phi.log_phi(n)), PredictionKind.EXACT_ASYMPTOTIC, res)
    if tag is Regime.SLOWLY_VARYING_LOG_PHI_SUB:
        return Prediction(-float(phi.log_phi(n)), PredictionKind.LOG_ASYMPTOTIC, res)
    if tag is Regime.LOGNORMAL:
        lam, d = regime.param("lambda"), regime.param("delta")
        v = -lam * ln ** d + lam * d * (d - 1.0) * math.log(ln) * ln ** (d - 1.0)
        return Prediction(v, PredictionKind.LOG_ASYMPTOTIC_WITH_CORRECTION, res)
    if tag is Regime.BETWEEN_HALF_ONE:
        lam, d = regime.param("lambda"), regime.param("delta")
        ll = lam * ln ** d - d * lam ** 2 * ln ** (2.0 * d - 1.0)
        return Prediction(-math.exp(ll), PredictionKind.DOUBLE_LOG_ASYMPTOTIC, res, ll)
    if tag is Regime.WEIBULL:
        b = regime.param("beta")
        v = -_weibull_constant(b) * float(phi.log_phi(n)) ** (1.0 / (b + 1.0))
        return Prediction(v, PredictionKind.LOG_ASYMPTOTIC, res)
    if tag is Regime.NEARLY_EXPONENTIAL:
        if regime.param("gamma") is not None:
            g, c = regime.param("gamma"), regime.param("c", 1.0)
            return Prediction(-n / (ln / c) ** (1.0 / g), PredictionKind.LOG_ASYMPTOTIC, res)
        d = regime.param("delta")
        res = "log log Phi = (log x)^delta boundary: log(-log P[N>n]) ~ log n - (log n)^(1/delta) + ..."
        ll = ln - ln ** (1.0 / d) + (1.0 / d) * ln ** (2.0 / d - 1.0)
        return Prediction(-math.exp(ll), PredictionKind.DOUBLE_LOG_ASYMPTOTIC, res, ll)
    raise UnsupportedRegimeError(tag.value)


T_RESULTS = {
    Regime.REGULARLY_VARYING: "regularly varying Phi: P[T>t] ~ Gamma(alpha+1) E[A+U]^alpha / Phi(t)",
    Regime.SLOWLY_VARYING_LOG_PHI_SUB: "log Phi slower than exp(sqrt(log t)): log P[T>t] ~ -log Phi(t)",
    Regime.WEIBULL: "Weibull regime for T: log P[T>t] ~ -c_beta (log Phi(t))^(1/(beta+1)) / E[A+U]^(beta/(beta+1))",
}


def predict_log_ccdf_T(regime, phi, t, mean_AU):
    """Predicted ``log P[T > t]``; raises :class:`UnsupportedRegimeError` outside three regimes."""
    if regime.tag not in T_RESULTS:
        raise UnsupportedRegimeError(f"no delay-time prediction for {regime.tag.value}")
    if not (math.isfinite(mean_AU) and mean_AU > 0.0):
        raise ValueError("mean_AU must be finite and > 0")
    t = float(t)
    if not t >= 2.0:
        raise ValueError("predictions need t >= 2")
    res = T_RESULTS[regime.tag]
    lp = float(phi.log_phi(t))
    if regime.tag is Regime.REGULARLY_VARYING:
        a = regime.param("alpha")
        v = float(gammaln(a + 1.0)) + a * math.log(mean_AU) - lp
        kind = PredictionKind.EXACT_ASYMPTOTIC if a > 0.0 else PredictionKind.LOG_ASYMPTOTIC
        return Prediction(v, kind, res)
    if regime.tag is Regime.SLOWLY_VARYING_LOG_PHI_SUB:
        return Prediction(-lp, PredictionKind.LOG_ASYMPTOTIC, res)
    b = regime.param("beta")
    v = -_weibull_constant(b) * lp ** (1.0 / (b + 1.0)) / mean_AU ** (b / (b + 1.0))
    return Prediction(v, PredictionKind.LOG_ASYMPTOTIC, res)


@dataclass(frozen=True)
class Comparison:
    """Observed ``log P`` against a prediction on the prediction's own scale."""

    scale: str  # "prob_ratio", "log_ratio" or "loglog_ratio"
    ratio: float


def compare(prediction, log_p):
    """Ratio of observed to predicted on the scale named by the prediction kind."""
    kind = prediction.kind
    if kind is PredictionKind.EXACT_ASYMPTOTIC:
        return Comparison("prob_ratio", math.exp(log_p - prediction.value))
    if kind is PredictionKind.DOUBLE_LOG_ASYMPTOTIC:
        if not log_p < 0.0:
            return Comparison("loglog_ratio", math.nan)
        return Comparison("loglog_ratio", math.log(-log_p) / prediction.loglog)
    return Comparison("log_ratio", log_p / prediction.value)


def probability_ratio(prediction, log_p):
    """``P_observed / P_predicted``; only meaningful for exact asymptotics."""
    if prediction.kind is not PredictionKind.EXACT_ASYMPTOTIC:
        raise ScaleMismatchError(
            f"{prediction.kind.value} predictions only converge on the log scale; "
            "a probability ratio would be meaningless"
        )
    return math.exp(log_p - prediction.value)


# ---------------------------------------------------------------------------
# Side conditions


class Balance(enum.Enum):
    THEOREM_APPLIES = "THEOREM_APPLIES"
    BALANCE_VIOLATED = "BALANCE_VIOLATED"


@dataclass(frozen=True)
class BalanceCheck:
    status: Balance
    exponent: float  # xi / (xi + 1 - zeta): lower-bound exponent when the balance fails


def weibull_balance_check(xi, zeta, beta):
    """Whether the Weibull delay asymptotics apply when ``P[L > x] = O(exp(-x**xi))`` and ``P[A > x] = O(exp(-x**zeta))``."""
    if not (xi > 0.0 and zeta >= 0.0 and beta > 0.0):
        raise ValueError("need xi > 0, zeta >= 0, beta > 0")
    ok = (1.0 - zeta) * beta < xi and xi > beta / (beta + 1.0)
    return BalanceCheck(Balance.THEOREM_APPLIES if ok else Balance.BALANCE_VIOLATED, xi / (xi + 1.0 - zeta))


class Dominance(enum.Enum):
    DOMINANTLY_VARYING = "DOMINANTLY_VARYING"
    NOT_DOMINANT = "NOT_DOMINANT"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class DominanceReport:
    verdict: Dominance
    ratio_min: float  # observed range of Phi(e x) / Phi(x) on the upper half of the probe grid
    ratio_max: float


def dominance_probe(phi, grid=PROBE_GRID):
    """Is ``Phi(e x) / Phi(x)`` bounded?  Judged on ``x = 2**k, k = 4..60``."""
    with np.errstate(all="ignore"):
        ll_hi = np.asarray(phi.log_log_phi(math.e * grid), dtype=float)
        d = np.asarray(phi.log_phi(math.e * grid) - phi.log_phi(grid), dtype=float)
    d = np.where(ll_hi > 700.0, np.inf, d)
    tail = d[len(d) // 2:]
    with np.errstate(over="ignore"):
        r_min, r_max = float(np.exp(np.nanmin(tail))), float(np.exp(np.nanmax(tail)))
    if np.any(np.isnan(tail)):
        return DominanceReport(Dominance.INCONCLUSIVE, r_min, r_max)
    if np.any(np.isinf(tail)):
        return DominanceReport(Dominance.NOT_DOMINANT, r_min, r_max)
    scale = max(abs(tail[-1]), 1e-300)
    steps = np.diff(tail)
    rel_growth = (tail[-1] - tail[0]) / scale
    tol = 1e-9 * np.maximum(1.0, np.abs(tail[1:]))
    if np.all(steps <= tol) or (np.max(tail) - np.min(tail)) / scale < 0.05:
        return DominanceReport(Dominance.DOMINANTLY_VARYING, r_min, r_max)
    if np.all(steps > 0) and rel_growth >= 0.05 and tail[0] > 0:
        k = np.log(np.arange(len(d) - len(tail), len(d)) + 4.0)
        slope = np.polyfit(k, np.log(tail), 1)[0]
        if slope >= 0.05:
            return DominanceReport(Dominance.NOT_DOMINANT, r_min, r_max)
    return DominanceReport(Dominance.INCONCLUSIVE, r_min, r_max)
