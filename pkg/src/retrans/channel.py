"""The retransmission channel: packet size L, availability A, unavailability U.

A packet of size ``L`` is attempted in consecutive availability periods
``A_1, A_2, ...``; attempt ``i`` succeeds when ``A_i >= L``.  Between attempts
the channel is off for ``U_i``.  ``N`` is the index of the first successful
attempt and ``T = sum_{i<N} (A_i + U_i) + L``.  Given ``L = l``, ``N`` is
geometric with success probability ``P[A >= l]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dist import Deterministic, TailFunction, parse_dist
from .errors import ModelError, ParseError

UNBOUNDED_L_BOUNDED_A = "UNBOUNDED_L_BOUNDED_A"
ZERO_TAIL_L = "ZERO_TAIL_L"
MISSING_MEAN = "MISSING_MEAN"


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    fatal: bool = True


@dataclass(frozen=True)
class SessionOutcome:
    """One transmitted packet: realised ``N``, ``T`` and whether a cap was hit."""

    n_attempts: int
    total_time: float
    truncated: bool = False


@dataclass(frozen=True)
class ChannelModel:
    L: TailFunction
    A: TailFunction
    U: TailFunction = Deterministic(0.0)

    def success_prob(self, l):
        """Per-attempt success probability ``P[A >= l]`` given ``L = l``."""
        return np.exp(self.A.log_ccdf_ge(l))

    def log_success_prob(self, l):
        return self.A.log_ccdf_ge(l)

    def validate(self, need_time=False):
        """Return the list of violated model conditions (empty when fine).

        ``ZERO_TAIL_L`` is reported as non-fatal: bounded packet sizes give a
        well-defined (light-tailed) system, only the heavy-tail results stop
        applying.
        """
        out = []
        l_hi, a_hi = self.L.support_hi, self.A.support_hi
        if l_hi > a_hi:
            out.append(Diagnostic(
                UNBOUNDED_L_BOUNDED_A,
                f"L reaches {l_hi} but A never exceeds {a_hi}; N is infinite with positive probability",
            ))
        elif math.isfinite(l_hi) and float(self.A.log_ccdf_ge(l_hi)) == -math.inf:
            out.append(Diagnostic(
                UNBOUNDED_L_BOUNDED_A,
                f"P[A >= {l_hi}] = 0 at the top of L's support",
            ))
        if math.isfinite(l_hi):
            out.append(Diagnostic(
                ZERO_TAIL_L, f"P[L > x] = 0 for x >= {l_hi}; N is light-tailed", fatal=False,
            ))
        if need_time:
            for name, tf in (("A", self.A), ("U", self.U)):
                if not math.isfinite(tf.mean()):
                    out.append(Diagnostic(MISSING_MEAN, f"E[{name}] is infinite; T asymptotics need it finite"))
        return out

    def check(self, need_time=False):
        """Raise :class:`ModelError` on any fatal diagnostic."""
        fatal = [d for d in self.validate(need_time) if d.fatal]
        if fatal:
            raise ModelError(fatal)
        return self

    @property
    def mean_cycle(self):
        """``E[A + U]``."""
        return self.A.mean() + self.U.mean()

    def spec(self):
        return f"L={self.L.spec()}\nA={self.A.spec()}\nU={self.U.spec()}\n"

    @classmethod
    def from_text(cls, text, base_dir=None):
        """Parse ``L=...``, ``A=...``, ``U=...`` lines (``U`` defaults to ``det(0)``)."""
        fields = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in ("L", "A", "U"):
                raise ParseError(f"expected L=, A= or U=, got {raw.strip()!r}", line=lineno)
            if key in fields:
                raise ParseError("duplicate entry", field=key, line=lineno)
            try:
                fields[key] = parse_dist(value.strip(), base_dir=base_dir)
            except ParseError as exc:
                raise ParseError(str(exc), field=key, line=lineno) from None
        for key in ("L", "A"):
            if key not in fields:
                raise ParseError("missing entry", field=key)
        return cls(**fields)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        return cls.from_text(path.read_text(), base_dir=path.parent)
