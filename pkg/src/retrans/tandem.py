"""End-to-end retransmission over a random number of lossy hops.

A packet must cross ``L`` hops, ``P[L > k] = exp(-p k)`` on ``k = 0, 1, ...``
(so ``L >= 1``), and each hop loses it independently with probability
``1 - exp(-q)``.  A loss sends the packet back to the source.  Given ``L``
an attempt succeeds with probability ``exp(-q L)``, and ``P[N > n]`` decays
like ``n**(-p/q)``.  Only this i.i.d.-loss abstraction is modelled; finite
buffers and cross traffic are not.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .dist import log1mexp
from .mc import GEOMETRIC_CAP, Mode, grouped_sums, run_blocks
from .oracle import LogProb, ccdf_N_lattice


@dataclass(frozen=True)
class TandemModel:
    """Hop-count tail rate ``p``, per-hop loss rate ``q`` and time per hop.

    ``p = inf`` pins ``L = 1`` and ``q = 0`` makes every hop lossless; both
    are limits kept for checks.
    """

    p: float
    q: float
    per_hop_time: float = 1.0

    def __post_init__(self):
        if not self.p > 0.0:
            raise ValueError("p must be > 0")
        if not (self.q >= 0.0 and math.isfinite(self.q)):
            raise ValueError("q must be finite and >= 0")
        if not (self.per_hop_time >= 0.0 and math.isfinite(self.per_hop_time)):
            raise ValueError("per_hop_time must be finite and >= 0")

    @property
    def exponent(self):
        """Tail index ``p / q`` of ``N``."""
        return math.inf if self.q == 0.0 else self.p / self.q

    def log_pmf(self, k):
        """``log P[L = k] = log(exp(-p (k-1)) - exp(-p k))``."""
        k = np.asarray(k, dtype=float)
        if math.isinf(self.p):
            return np.where(k == 1, 0.0, -np.inf)
        return -self.p * (k - 1.0) + math.log(-math.expm1(-self.p))

    def spec(self):
        return {"p": self.p, "q": self.q, "per_hop_time": self.per_hop_time}


def ccdf_N_tandem(model, n):
    """Exact ``log P[N > n] = log sum_k P[L=k] (1 - exp(-q k))**n``."""
    if n == 0:
        return LogProb(0.0)
    if model.q == 0.0:
        return LogProb(-math.inf)
    p, q = model.p, model.q

    def pmf():
        for k in itertools.count(1):
            yield k, float(np.exp(model.log_pmf(k)))

    if math.isinf(p):
        return ccdf_N_lattice([(1, 1.0)], lambda k: -q * k, n, log_success=True)
    return ccdf_N_lattice(pmf(), lambda k: -q * k, n, log_tail=lambda k: -p * k, log_success=True)


def bounds(model, n=None):
    """``(lower, upper) = (exp(-p), exp(p)) * Gamma(1 + p/q)`` bracketing ``n**(p/q) P[N > n]``."""
    g = math.exp(float(gammaln(1.0 + model.exponent)))
    return math.exp(-model.p) * g, math.exp(model.p) * g


def bracket_check(model, n):
    """Return ``(lower, n**(p/q) * P[N > n], upper, inside)`` at integer ``n``."""
    lo, hi = bounds(model)
    v = ccdf_N_tandem(model, n).value
    scaled = math.exp(v + model.exponent * math.log(n))
    return lo, scaled, hi, lo <= scaled <= hi


def _sample_L(rng, size, p):
    e = rng.standard_exponential(size)
    if math.isinf(p):
        return np.ones(size, dtype=np.int64)
    return 1 + np.floor(e / p).astype(np.int64)


def _failed_hop_draw(q):
    def draw(rng, L):
        # hop index J of a failed attempt: P[J = j] proportional to exp(-q (j-1)), j = 1..L
        w = rng.random(L.size)
        mass = -np.expm1(-q * L)
        j = 1 + np.floor(-np.log1p(-w * mass) / q)
        return (np.minimum(j, L).astype(float),)
    return draw


def _tandem_geometric_block(rng, size, model, max_attempts, with_time):
    L = _sample_L(rng, size, model.p)
    log_g = -model.q * L.astype(float)
    e = rng.standard_exponential(size)
    with np.errstate(divide="ignore"):
        rate = -log1mexp(log_g)
    failures_f = np.floor(e / rate)
    capped = failures_f >= GEOMETRIC_CAP
    failures = np.where(capped, GEOMETRIC_CAP, failures_f).astype(np.int64)
    n = failures + 1
    if not with_time:
        return n, np.full(size, np.nan), capped
    too_long = failures > max_attempts
    counts = np.where(too_long, 0, failures)
    hops = np.zeros(size)
    if counts.any():
        (hops,) = grouped_sums(rng, L, counts, _failed_hop_draw(model.q))
    t = (hops + L) * model.per_hop_time
    t[too_long] = np.inf
    return n, t, capped | too_long


def _tandem_naive_block(rng, size, model, max_attempts, with_time):
    L = _sample_L(rng, size, model.p)
    n = np.ones(size, dtype=np.int64)
    hops = np.zeros(size)
    active = np.arange(size)
    rounds = 0
    while active.size and rounds < max_attempts:
        if model.q == 0.0:
            break
        # hop on which the attempt would be lost; success when it lies beyond L
        lost_at = 1 + np.floor(rng.standard_exponential(active.size) / model.q)
        fail = lost_at <= L[active]
        failed = active[fail]
        hops[failed] += lost_at[fail]
        n[failed] += 1
        active = failed
        rounds += 1
    truncated = np.zeros(size, dtype=bool)
    if model.q != 0.0:
        truncated[active] = True
        n[active] -= 1
    t = (hops + L) * model.per_hop_time
    t[truncated] = np.inf
    if not with_time:
        t = np.full(size, np.nan)
    return n, t, truncated


def simulate_tandem(model, cfg, time=True):
    """Simulate ``cfg.sessions`` packets through the hop chain (see :func:`retrans.mc.simulate`)."""
    fn = _tandem_geometric_block if cfg.mode is Mode.GEOMETRIC_SHORTCUT else _tandem_naive_block
    return run_blocks(fn, (model, int(cfg.max_attempts), bool(time)), cfg)
