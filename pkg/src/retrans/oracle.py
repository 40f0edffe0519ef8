"""Exact (non-Monte-Carlo) evaluation of ``log P[N > n]``.

Given ``L``, ``N`` is geometric, so ``P[N > n] = E[(1 - P[A >= L])**n]``.
With ``V = Lbar(L)`` uniform on ``(0, 1)`` (``Lbar`` the survival function
of ``L``) and ``V = exp(-s)``::

    P[N > n] = int_0^inf exp(h(s)) ds,
    h(s) = -s + n * log(1 - P[A >= Lq(exp(-s))])

where ``Lq`` is the quantile function of ``L``.  The integral is evaluated
after shifting by ``max h`` so that results like ``log P = -2e5`` are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from ._quad import Budget, adaptive_gk
from .dist import log1mexp
from .errors import NonConvergedError

__all__ = [
    "LogProb",
    "ccdf_N_quadrature",
    "ccdf_N_power_closed_form",
    "ccdf_N_lattice",
    "exponent",
    "unimodality_probe",
]


@dataclass(frozen=True)
class LogProb:
    """Natural-log probability with an estimated absolute error on the log."""

    value: float
    abs_err_bound: float = 0.0
    n_evals: int = 0
    notes: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.value > 0.0:
            # rounding in the last ulp can push log(1) slightly positive
            if self.value > 1e-12:
                raise ValueError(f"log-probability must be <= 0, got {self.value}")
            object.__setattr__(self, "value", 0.0)
        if not math.isfinite(self.abs_err_bound) or self.abs_err_bound < 0.0:
            raise ValueError("abs_err_bound must be finite and >= 0")

    @property
    def prob(self):
        return math.exp(self.value)


def exponent(model, n, s):
    """The integrand exponent ``h(s)`` (vectorised in ``s``)."""
    s = np.asarray(s, dtype=float)
    x = model.L.inv_log_ccdf(-s)
    log_g = model.A.log_ccdf_ge(x)
    with np.errstate(invalid="ignore"):
        tail = n * np.asarray(log1mexp(log_g))
    # n * log(1) = 0 even when n is huge; guard 0 * -inf
    tail = np.where(np.asarray(log_g) == -np.inf, 0.0, tail)
    out = -s + tail
    return out if out.ndim else float(out)


_GRID = np.geomspace(1e-12, 1e17, 700)


def _locate_peak(h):
    vals = h(_GRID)
    k = int(np.argmax(vals))
    if not np.isfinite(vals[k]):
        return None, -math.inf
    lo = _GRID[k - 1] if k > 0 else 0.0
    hi = _GRID[min(k + 1, _GRID.size - 1)]
    res = optimize.minimize_scalar(
        lambda s: -h(s), bounds=(lo, hi), method="bounded",
        options={"xatol": max(1e-14, 1e-12 * hi), "maxiter": 500},
    )
    s_star, h_star = float(res.x), -float(res.fun)
    if vals[k] > h_star:
        s_star, h_star = float(_GRID[k]), float(vals[k])
    if k == 0 and h(0.0) >= h_star:
        s_star, h_star = 0.0, float(h(0.0))
    return s_star, h_star


def _drop_width(h, s_star, h_star, direction, drop=1.0):
    """Distance from the peak at which ``h`` has fallen by ``drop``."""
    w = 1e-9 * max(s_star, 1e-3)
    while True:
        s = s_star + direction * w
        if direction < 0 and s <= 0.0:
            return s_star
        if h(s) <= h_star - drop or w > 1e300:
            return w
        w *= 2.0


def ccdf_N_quadrature(model, n, rel_tol=1e-13, max_evals=10**6):
    """``log P[N > n]`` by log-domain adaptive quadrature over the uniform transform.

    ``n`` may be any real ``>= 0``; integer ``n`` is the physical case.
    Raises :class:`NonConvergedError` when more than ``max_evals`` integrand
    evaluations are needed.
    """
    n = float(n)
    if not n >= 0.0:
        raise ValueError("n must be >= 0")
    if n == 0.0:
        return LogProb(0.0)
    h = lambda s: exponent(model, n, s)  # noqa: E731
    s_star, h_star = _locate_peak(h)
    if s_star is None:
        return LogProb(-math.inf, 0.0, notes=("integrand vanishes identically",))

    budget = Budget(max_evals)
    f = lambda s: np.exp(h(s) - h_star)  # noqa: E731
    # h is a sum of terms of size |h*|, so exp(h - h*) carries relative noise
    # of order eps * |h*|; asking for more than that never terminates.
    rel_tol = max(rel_tol, 64.0 * np.finfo(float).eps * max(1.0, abs(h_star)))
    total, err = 0.0, 0.0
    tail_terms = []
    for direction in (+1, -1):
        w = _drop_width(h, s_star, h_star, direction)
        if direction < 0 and s_star == 0.0:
            continue
        edge = s_star
        while True:
            nxt = edge + direction * w
            if direction < 0:
                nxt = max(nxt, 0.0)
            a, b = (edge, nxt) if direction > 0 else (nxt, edge)
            part, perr = adaptive_gk(f, a, b, rel_tol=rel_tol, abs_tol=rel_tol * total, budget=budget)
            total += part
            err += perr
            edge = nxt
            w *= 2.0
            if direction < 0 and edge <= 0.0:
                break
            small = part <= 1e-12 * total
            decayed = h(edge) < h_star - 40.0
            if small and decayed:
                tail_terms.append(part)
                break
            if not math.isfinite(edge) or abs(edge) > 1e300:
                raise NonConvergedError("integration range diverged")
    if not total > 0.0:
        raise NonConvergedError("integral evaluated to zero around its peak")
    value = h_star + math.log(total)
    bound = (err + sum(tail_terms)) / total
    return LogProb(min(value, 0.0), bound, budget.used)


def ccdf_N_power_closed_form(alpha, n):
    """Exact ``log P[N > n]`` when ``P[L > x] = P[A > x]**alpha``.

    ``P[N > n] = E[(1 - V**(1/alpha))**n] = alpha * B(alpha, n + 1)``.
    """
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError("alpha must be > 0")
    if n == 0:
        return LogProb(0.0)
    return LogProb(math.log(alpha) + float(special.betaln(alpha, n + 1.0)))


def ccdf_N_lattice(pmf_L, success_prob_fn, n, log_tail=None, log_success=False):
    """``log sum_k P[L=k] (1 - rho(k))**n`` for a lattice-valued packet size.

    ``pmf_L`` is a finite sequence of ``(k, prob)`` pairs, or, when
    ``log_tail`` is given, any iterable (possibly infinite) in increasing
    ``k``; ``log_tail(k)`` must return ``log P[L > k]``.  Summation stops once
    the remaining mass falls below ``1e-15`` of the accumulated sum.  With
    ``log_success=True`` the function returns ``log rho(k)``, which keeps
    success probabilities far below the float range usable.
    """
    if n == 0:
        return LogProb(0.0)
    if log_tail is None:
        pairs = list(pmf_L)
        probs = np.array([p for _, p in pairs], dtype=float)
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise ValueError("pmf must sum to 1 within 1e-12")
        suffix = np.cumsum(probs[::-1])[::-1]
        rest = np.append(suffix[1:], 0.0)
        with np.errstate(divide="ignore"):
            log_rest = np.log(rest)
        iterator = iter(pairs)
    else:
        iterator = iter(pmf_L)
        log_rest = None

    terms = []
    acc = -math.inf
    i = 0
    chunk = 16  # doubled each pass; short first passes avoid evaluating far-out terms
    while True:
        block = [kp for _, kp in zip(range(chunk), iterator)]
        chunk = min(2 * chunk, 1 << 16)
        if not block:
            break
        ks = np.array([k for k, _ in block], dtype=float)
        ps = np.array([p for _, p in block], dtype=float)
        rho = np.asarray([success_prob_fn(k) for k in ks], dtype=float)
        if not log_success:
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(rho >= 0.0, np.log(rho), np.nan)
        log_rho = rho
        if np.any(~(log_rho > -np.inf)) or np.any(log_rho > 0.0):
            raise ValueError("success probabilities must lie in (0, 1]")
        with np.errstate(divide="ignore"):
            t = np.log(ps) + n * log1mexp(log_rho)
        terms.append(t)
        acc = float(special.logsumexp(np.concatenate(terms)))
        if log_tail is not None:
            rest_here = np.array([log_tail(k) for k in ks])
        else:
            rest_here = log_rest[i:i + len(block)]
        i += len(block)
        stop = np.nonzero(rest_here < acc + math.log(1e-15))[0]
        if stop.size:
            # only the terms up to the first qualifying index count
            cut = stop[0] + 1
            terms[-1] = t[:cut]
            break
    allt = np.concatenate(terms) if terms else np.array([-np.inf])
    order = np.argsort(allt)[::-1]
    value = float(special.logsumexp(allt[order]))
    return LogProb(min(value, 0.0), 1e-15)


def unimodality_probe(model, n, depth=30.0, points=4000):
    """Secondary local maxima of ``h`` within ``depth`` of the global maximum.

    Returns a list of ``(s, h(s) - h_max)`` pairs; empty means the integrand
    looked unimodal on a dense grid around its peak.
    """
    n = float(n)
    h = lambda s: exponent(model, n, s)  # noqa: E731
    s_star, h_star = _locate_peak(h)
    if s_star is None:
        return []
    right = s_star + _drop_width(h, s_star, h_star, +1, drop=depth + 30.0)
    grid = np.unique(np.concatenate([
        np.linspace(0.0, right, points),
        np.geomspace(max(right * 1e-12, 1e-12), right, points),
    ]))
    vals = h(grid)
    inner = (vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])
    peaks = np.nonzero(inner)[0] + 1
    out = []
    for i in peaks:
        if abs(grid[i] - s_star) <= 2.0 * (grid[i + 1] - grid[i - 1]):
            continue
        if vals[i] >= h_star - depth and abs(vals[i] - h_star) > 1e-9 * max(1.0, abs(h_star)):
            out.append((float(grid[i]), float(vals[i] - h_star)))
    return out
