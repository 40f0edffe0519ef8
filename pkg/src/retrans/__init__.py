"""Tail behaviour of retransmission delays over an on/off channel.

A packet of random size ``L`` is sent in availability periods ``A_1, A_2, ...``
(separated by off periods ``U_i``) until one period is long enough.  The
package computes the law of the number of attempts ``N`` exactly, simulates
``N`` and the total delay ``T``, and evaluates the asymptotic tail laws that
follow from the link between the tails of ``L`` and ``A``.
"""

from .asym import (
    PredictionKind,
    Regime,
    RegimeClass,
    classify,
    dominance_probe,
    parse_phi,
    phi_from_pair,
    predict_log_ccdf_N,
    predict_log_ccdf_T,
    weibull_balance_check,
)
from .channel import ChannelModel, SessionOutcome
from .dist import (
    Deterministic,
    DoubleExp,
    Exponential,
    HalfNormal,
    LogNormalType,
    ParetoUnit,
    PowerLogExp,
    Tabulated,
    TailFunction,
    Weibull,
    parse_dist,
)
from .mc import CurveKind, Mode, SimConfig, TailCurve, empirical_ccdf, hill_estimator, loglog_slope, simulate
from .oracle import LogProb, ccdf_N_lattice, ccdf_N_power_closed_form, ccdf_N_quadrature
from .tandem import TandemModel, ccdf_N_tandem, simulate_tandem

__version__ = "0.1.0"
