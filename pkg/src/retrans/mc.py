"""Monte Carlo estimation of the laws of ``N`` and ``T``.

Sessions are grouped in fixed blocks of ``BLOCK`` consecutive indices.  Block
``b`` always draws from ``Philox(SeedSequence(seed, spawn_key=(b,)))`` no
matter which worker runs it, so results do not depend on the worker count.

Within a block the accumulation order is fixed: for each session the failed
availability periods are summed, then the off periods, and
``T = (sum A' + sum U) + L``.
"""

from __future__ import annotations

import enum
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import SessionOutcome
from .dist import log1mexp
from .errors import InsufficientPointsError

BLOCK = 1 << 16
CHUNK = 1 << 22  # max conditional draws held in memory at once
GEOMETRIC_CAP = 1 << 62
FORMAT_VERSION = 1
Z95 = 1.959963984540054


class Mode(enum.Enum):
    NAIVE_LOOP = "naive"
    GEOMETRIC_SHORTCUT = "geometric"


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    sessions: int = 10**5
    workers: int = 1
    max_attempts: int = 10**9
    mode: Mode = Mode.GEOMETRIC_SHORTCUT

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.sessions) < 1 or int(self.workers) < 1 or int(self.max_attempts) < 1:
            raise ValueError("sessions, workers and max_attempts must be >= 1")
        if not isinstance(self.mode, Mode):
            object.__setattr__(self, "mode", Mode(self.mode))

    def as_dict(self):
        return {
            "seed": int(self.seed), "sessions": int(self.sessions), "workers": int(self.workers),
            "max_attempts": int(self.max_attempts), "mode": self.mode.value,
        }


def block_rng(seed, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


@dataclass(frozen=True)
class SimulationResult:
    """Columnar store of session outcomes; iterating yields :class:`SessionOutcome`."""

    n_attempts: np.ndarray
    total_time: np.ndarray
    truncated: np.ndarray

    def __len__(self):
        return self.n_attempts.size

    def __getitem__(self, i):
        return SessionOutcome(int(self.n_attempts[i]), float(self.total_time[i]), bool(self.truncated[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @property
    def truncation_count(self):
        return int(self.truncated.sum())


def _merge(parts):
    return SimulationResult(
        np.concatenate([p[0] for p in parts]),
        np.concatenate([p[1] for p in parts]),
        np.concatenate([p[2] for p in parts]),
    )


def run_blocks(block_fn, args, cfg):
    """Run ``block_fn(rng, size, *args)`` on every block and merge in block order."""
    sizes = [min(BLOCK, cfg.sessions - b * BLOCK) for b in range(-(-cfg.sessions // BLOCK))]
    jobs = [(block_fn, cfg.seed, b, s, args) for b, s in enumerate(sizes)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            parts = list(pool.map(_run_one, jobs))
    else:
        parts = [_run_one(j) for j in jobs]
    return _merge(parts)


def _run_one(job):
    fn, seed, block, size, args = job
    return fn(block_rng(seed, block), size, *args)


def grouped_sums(rng, params, counts, draw):
    """Per-session sums of ``counts[i]`` draws of ``draw(rng, param_i)``.

    ``draw(rng, rep)`` receives the session parameters repeated once per draw
    and returns a tuple of equally long arrays; each is summed per session.
    Draws are generated in chunks of at most ``CHUNK`` values.
    """
    sums = None
    todo = np.nonzero(counts > 0)[0]
    start = 0
    while start < todo.size:
        cum = np.cumsum(counts[todo[start:]])
        stop = start + max(1, int(np.searchsorted(cum, CHUNK, side="right")))
        sel = todo[start:stop]
        c = counts[sel]
        if c.size == 1 and c[0] > CHUNK:
            # one long session: stream it in chunks
            parts, left = [], int(c[0])
            while left:
                m = min(left, CHUNK)
                parts.append(_sum_group(rng, params[sel], np.array([m]), draw))
                left -= m
            got = [np.array([math.fsum(p[j][0] for p in parts)]) for j in range(len(parts[0]))]
        else:
            got = _sum_group(rng, params[sel], c, draw)
        if sums is None:
            sums = [np.zeros(counts.size) for _ in got]
        for acc, g in zip(sums, got):
            acc[sel] = g
        start = stop
    return sums


def _sum_group(rng, params, counts, draw):
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])
    return [np.add.reduceat(v, offsets) for v in draw(rng, np.repeat(params, counts))]


def _conditional_draw(A, U):
    def draw(rng, log_g):
        # (A | A < l) by inversion of u uniform on (g, 1]:  log u = log(g + (1 - g) w)
        log_w = -rng.standard_exponential(log_g.size)
        with np.errstate(divide="ignore"):
            log_u = np.logaddexp(log_g, log1mexp(log_g) + log_w)
        a = np.asarray(A.inv_log_ccdf(np.minimum(log_u, 0.0)), dtype=float)
        u = np.asarray(U.sample(rng, log_g.size), dtype=float)
        return a, u
    return draw


def _geometric_block(rng, size, model, max_attempts, with_time):
    L = np.asarray(model.L.sample(rng, size), dtype=float)
    log_g = np.asarray(model.A.log_ccdf_ge(L), dtype=float)
    e = rng.standard_exponential(size)
    with np.errstate(divide="ignore"):
        rate = -log1mexp(log_g)  # -log(1 - g)
    failures_f = np.floor(e / rate)
    capped = failures_f >= GEOMETRIC_CAP
    failures = np.where(capped, GEOMETRIC_CAP, failures_f).astype(np.int64)
    n = failures + 1
    if not with_time:
        return n, np.full(size, np.nan), capped
    too_long = failures > max_attempts
    counts = np.where(too_long, 0, failures)
    if counts.any():
        sa, su = grouped_sums(rng, log_g, counts, _conditional_draw(model.A, model.U))
    else:
        sa = su = np.zeros(size)
    t = (sa + su) + L
    t[too_long] = np.inf
    return n, t, capped | too_long


def _naive_block(rng, size, model, max_attempts, with_time):
    L = np.asarray(model.L.sample(rng, size), dtype=float)
    n = np.ones(size, dtype=np.int64)
    busy = np.zeros(size)
    idle = np.zeros(size)
    active = np.arange(size)
    rounds = 0
    while active.size and rounds < max_attempts:
        a = np.asarray(model.A.sample(rng, active.size), dtype=float)
        fail = a < L[active]
        failed = active[fail]
        if failed.size:
            busy[failed] += a[fail]
            idle[failed] += np.asarray(model.U.sample(rng, failed.size), dtype=float)
            n[failed] += 1
        active = failed
        rounds += 1
    truncated = np.zeros(size, dtype=bool)
    truncated[active] = True
    n[active] -= 1  # the cap counts attempts made, not the pending one
    t = (busy + idle) + L
    t[active] = np.inf
    if not with_time:
        t = np.full(size, np.nan)
    return n, t, truncated


def simulate(model, cfg, time=True):
    """Simulate ``cfg.sessions`` independent packets; returns a :class:`SimulationResult`.

    With ``time=False`` only ``N`` is drawn (``total_time`` is NaN), which
    keeps the geometric shortcut cheap even when ``N`` is astronomically large.
    """
    model.check(need_time=False)
    fn = _geometric_block if cfg.mode is Mode.GEOMETRIC_SHORTCUT else _naive_block
    return run_blocks(fn, (model, int(cfg.max_attempts), bool(time)), cfg)


def default_workers():
    try:
        return max(1, int(os.environ.get("RETRANS_WORKERS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Tail curves


class CurveKind(enum.Enum):
    N_CURVE = "N_CURVE"
    T_CURVE = "T_CURVE"


@dataclass
class TailCurve:
    """Points ``(arg, log_p, ci_halfwidth, n_exceed)`` of an estimated ccdf.

    Exact curves carry ``n_exceed = -1``, ``ci_halfwidth = 0`` and
    ``sample_size = 0``.
    """

    args: np.ndarray
    log_p: np.ndarray
    ci_halfwidth: np.ndarray
    n_exceed: np.ndarray
    sample_size: int
    kind: CurveKind
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.args = np.asarray(self.args, dtype=float)
        self.log_p = np.asarray(self.log_p, dtype=float)
        self.ci_halfwidth = np.asarray(self.ci_halfwidth, dtype=float)
        self.n_exceed = np.asarray(self.n_exceed, dtype=np.int64)
        if not (self.args.shape == self.log_p.shape == self.ci_halfwidth.shape == self.n_exceed.shape):
            raise ValueError("curve columns must have equal length")
        if np.any(np.diff(self.args) <= 0):
            raise ValueError("curve arguments must be strictly increasing")
        self.kind = CurveKind(self.kind)

    @classmethod
    def exact(cls, args, log_p, kind=CurveKind.N_CURVE, meta=None):
        args = np.asarray(args, dtype=float)
        return cls(args, log_p, np.zeros(args.size), np.full(args.size, -1), 0, kind, dict(meta or {}))

    @property
    def is_exact(self):
        return self.sample_size == 0

    @property
    def degenerate(self):
        """Empirical points resting on fewer than 10 exceedances."""
        if self.is_exact:
            return np.zeros(self.args.size, dtype=bool)
        return self.n_exceed < 10

    def points(self):
        return list(zip(self.args.tolist(), self.log_p.tolist(), self.ci_halfwidth.tolist(), self.n_exceed.tolist()))

    def __len__(self):
        return self.args.size

    # -- serialisation ------------------------------------------------------

    def _header(self):
        head = {"format_version": FORMAT_VERSION, "kind": self.kind.value, "sample_size": int(self.sample_size)}
        head.update(self.meta)
        return head

    def to_csv(self):
        out = io.StringIO()
        for key, value in self._header().items():
            out.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
        out.write("arg,log_p,ci_halfwidth,n_exceed\n")
        for a, lp, ci, ne in self.points():
            out.write(f"{a!r},{lp!r},{ci!r},{ne}\n")
        return out.getvalue()

    def to_json(self):
        doc = self._header()
        doc["points"] = [
            {"arg": a, "log_p": _json_float(lp), "ci_halfwidth": _json_float(ci), "n_exceed": ne}
            for a, lp, ci, ne in self.points()
        ]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_csv(cls, text):
        meta, rows = {}, []
        lines = [ln for ln in text.splitlines() if ln.strip()]
        for ln in lines:
            if ln.startswith("#"):
                key, _, value = ln[1:].partition(":")
                meta[key.strip()] = json.loads(value)
            elif not ln.startswith("arg,"):
                rows.append(ln.split(","))
        cols = list(zip(*rows)) if rows else [(), (), (), ()]
        kind = meta.pop("kind", "N_CURVE")
        size = meta.pop("sample_size", 0)
        meta.pop("format_version", None)
        return cls(
            [float(v) for v in cols[0]], [float(v) for v in cols[1]],
            [float(v) for v in cols[2]], [int(v) for v in cols[3]], size, kind, meta,
        )

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        pts = doc.pop("points")
        kind = doc.pop("kind")
        size = doc.pop("sample_size")
        doc.pop("format_version", None)
        return cls(
            [p["arg"] for p in pts], [float(p["log_p"]) for p in pts],
            [float(p["ci_halfwidth"]) for p in pts], [p["n_exceed"] for p in pts], size, kind, doc,
        )


def _json_float(x):
    # JSON has no infinities; keep them as strings float() understands
    return x if math.isfinite(x) else repr(x)


def empirical_ccdf(samples, grid, kind=CurveKind.N_CURVE, meta=None):
    """Exact exceedance counts ``#{X > x}`` on ``grid`` with 95% intervals on ``log p``."""
    x = np.sort(np.asarray(samples, dtype=float))
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    size = x.size
    n_exceed = size - np.searchsorted(x, grid, side="right")
    with np.errstate(divide="ignore", invalid="ignore"):
        p = n_exceed / size
        log_p = np.log(n_exceed) - math.log(size)
        ci = np.where(n_exceed > 0, Z95 * np.sqrt((1.0 - p) / n_exceed), np.inf)
    return TailCurve(grid, log_p, ci, n_exceed, size, kind, dict(meta or {}))


def geometric_grid(lo, hi, per_decade=4, integer=False):
    """Points ``lo * 10**(j / per_decade)`` up to ``hi`` (rounded and de-duplicated if ``integer``)."""
    if not (0 < lo <= hi):
        raise ValueError("need 0 < lo <= hi")
    count = int(math.floor(per_decade * math.log10(hi / lo) + 1e-9)) + 1
    g = lo * 10.0 ** (np.arange(count) / per_decade)
    if integer:
        g = np.unique(np.round(g)).astype(float)
        g = g[g >= 1]
    return g


def hill_estimator(samples, k):
    """Hill estimate ``k / sum_{i<=k} log(X_(i) / X_(k+1))`` from the top order statistics."""
    x = np.asarray(samples, dtype=float)
    k = int(k)
    if not 2 <= k < x.size:
        raise ValueError(f"k must satisfy 2 <= k < {x.size}")
    if np.any(~(x > 0)):
        raise ValueError("Hill estimator needs positive samples")
    top = -np.sort(-x)[: k + 1]
    denom = float(np.sum(np.log(top[:k] / top[k])))
    if not denom > 0.0:
        raise ValueError("top order statistics are all equal; tail index undefined")
    return k / denom


def loglog_slope(curve, arg_lo, arg_hi):
    """Slope of ``log_p`` against ``log(arg)`` on ``[arg_lo, arg_hi]``.

    Points are weighted by their inverse variance ``(ci / 1.96)**-2``; exact
    curves (no intervals) use ordinary least squares.  Returns ``(slope, stderr)``.
    """
    sel = (curve.args >= arg_lo) & (curve.args <= arg_hi) & ~curve.degenerate & np.isfinite(curve.log_p)
    if sel.sum() < 3:
        raise InsufficientPointsError(f"{int(sel.sum())} usable points in [{arg_lo}, {arg_hi}]; need 3")
    x = np.log(curve.args[sel])
    y = curve.log_p[sel]
    sigma = curve.ci_halfwidth[sel] / Z95
    if np.all(sigma == 0):
        A = np.vstack([x, np.ones_like(x)]).T
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        resid = y - A @ coef
        dof = x.size - 2
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        sxx = float(np.sum((x - x.mean()) ** 2))
        return float(coef[0]), math.sqrt(s2 / sxx)
    if np.any(sigma <= 0):
        raise ValueError("mixed exact and empirical points")
    w = 1.0 / sigma**2
    sw, swx, swy = w.sum(), (w * x).sum(), (w * y).sum()
    swxx, swxy = (w * x * x).sum(), (w * x * y).sum()
    det = sw * swxx - swx**2
    slope = (sw * swxy - swx * swy) / det
    return float(slope), float(math.sqrt(sw / det))
