"""Command-line entry point: ``retrans <command> [options]``.

Every command reads an optional key/value config file (``--config``); flags
given on the command line override it.  Output files embed the fully
resolved settings, so ``--config <output file>`` reruns the experiment and
reproduces the file byte for byte.  Exit status is 0 on success, 1 when a
point did not converge or too many sessions were truncated, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import asym, mc, oracle, tandem
from ._text import parse_call, to_float
from .channel import ChannelModel
from .dist import parse_dist
from .errors import (
    CriticalBoundaryError,
    ModelError,
    NonConvergedError,
    ParseError,
    RetransError,
    ScaleMismatchError,
    UnclassifiedError,
    UnsupportedRegimeError,
)

DEFAULT_GRID = "geom(1,1e6,4)"


# ---------------------------------------------------------------------------
# configuration


def read_config(path):
    """Settings from a key/value file or from the spec embedded in an output file."""
    path = Path(path)
    text = path.read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        return _flatten(doc.get("spec", doc)), path.parent
    for line in text.splitlines():
        if line.startswith("# spec:"):
            return _flatten(json.loads(line[len("# spec:"):])), path.parent
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ParseError(f"expected key=value, got {raw.strip()!r}", line=lineno)
        key = key.strip().lower().replace("-", "_")
        if key in out:
            raise ParseError("duplicate key", field=key, line=lineno)
        out[key] = value.strip()
    return out, path.parent


def _flatten(spec):
    """Turn an embedded (nested) spec back into flat settings."""
    out = dict(spec)
    out.pop("command", None)
    out.update(out.pop("sim", {}))
    if isinstance(out.get("model"), dict) and "p" in out["model"]:
        out.update(out.pop("model"))
    return out


def parse_grid(value, integer=False):
    """``geom(lo, hi, per_decade)`` or a comma separated list; lists pass through."""
    if isinstance(value, (list, tuple)):
        g = [float(v) for v in value]
    else:
        text = str(value).strip()
        if text.startswith("geom"):
            name, args, kwargs = parse_call(text)
            vals = [to_float(a, "grid") for a in args] + [to_float(v, "grid") for v in kwargs.values()]
            if not 2 <= len(vals) <= 3:
                raise ParseError("geom grid needs lo, hi and optionally per_decade", field="grid")
            g = mc.geometric_grid(vals[0], vals[1], vals[2] if len(vals) == 3 else 4, integer=integer).tolist()
        else:
            g = [to_float(v, "grid") for v in text.split(",") if v.strip()]
    if not g or any(b <= a for a, b in zip(g, g[1:])):
        raise ParseError("grid must be non-empty and strictly increasing", field="grid")
    if integer and any(v != math.floor(v) or v < 0 for v in g):
        raise ParseError("grid for N must hold non-negative integers", field="grid")
    return g


def _int(value, field):
    try:
        f = float(value)
        if f != math.floor(f):
            raise ValueError
        return int(f)
    except (TypeError, ValueError):
        raise ParseError(f"expected an integer, got {value!r}", field=field) from None


def _model_spec(settings, base_dir):
    """Resolve the L/A/U texts (directly or via ``model=`` file) to canonical strings."""
    model = settings.get("model")
    if isinstance(model, dict):
        fields = dict(model)
    elif model:
        path = Path(model)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        m = ChannelModel.from_file(path)
        fields = {"L": m.L.spec(), "A": m.A.spec(), "U": m.U.spec()}
    else:
        fields = {}
    for key in ("L", "A", "U"):
        for variant in (key, key.lower()):
            if settings.get(variant) is not None:
                fields[key] = settings[variant]
    for key in ("L", "A"):
        if key not in fields:
            raise ParseError("missing entry", field=key)
    fields.setdefault("U", "det(0)")
    parsed = {}
    for key in ("L", "A", "U"):
        try:
            parsed[key] = parse_dist(str(fields[key]), base_dir=base_dir)
        except ParseError as exc:
            raise ParseError(str(exc), field=key) from None
    model = ChannelModel(**parsed)
    return model, {k: parsed[k].spec() for k in ("L", "A", "U")}


def _sim_spec(settings):
    cfg = mc.SimConfig(
        seed=_int(settings.get("seed", 0), "seed"),
        sessions=_int(settings.get("sessions", 10**5), "sessions"),
        workers=1,
        max_attempts=_int(settings.get("max_attempts", 10**9), "max_attempts"),
        mode=_mode(settings.get("mode", "geometric")),
    )
    return cfg, {k: v for k, v in cfg.as_dict().items() if k != "workers"}


def _mode(value):
    text = str(value).lower()
    for m in mc.Mode:
        if text in (m.value, m.name.lower()):
            return m
    raise ParseError(f"unknown mode {value!r}; use geometric or naive", field="mode")


def _workers(settings):
    if settings.get("workers") is not None:
        return max(1, _int(settings["workers"], "workers"))
    return mc.default_workers()


def _with_workers(cfg, workers):
    return mc.SimConfig(cfg.seed, cfg.sessions, workers, cfg.max_attempts, cfg.mode)


# ---------------------------------------------------------------------------
# output


def _header_lines(meta):
    return "".join(f"# {k}: {json.dumps(v, sort_keys=True)}\n" for k, v in meta.items())


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def render_table(meta, columns, rows, fmt):
    if fmt == "json":
        doc = dict(meta)
        doc["rows"] = [
            {c: (_fmt(v) if isinstance(v, float) and not math.isfinite(v) else v) for c, v in zip(columns, row)}
            for row in rows
        ]
        return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
    body = ",".join(columns) + "\n" + "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    return _header_lines(meta) + body


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(type(o))


def render_curve(curve, fmt, base10):
    if not base10:
        return curve.to_json() if fmt == "json" else curve.to_csv()
    meta = curve._header()
    cols = ["arg", "log_p", "ci_halfwidth", "n_exceed", "log10_p"]
    rows = [(a, lp, ci, ne, lp / math.log(10)) for a, lp, ci, ne in curve.points()]
    return render_table(meta, cols, rows, fmt)


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _out_path(args, suffix, fmt):
    if not args.out:
        return None
    return f"{args.out}{suffix}.{fmt}"


# ---------------------------------------------------------------------------
# commands


def _quad_point(job):
    model, n = job
    try:
        r = oracle.ccdf_N_quadrature(model, n)
        return r.value, r.abs_err_bound, "OK"
    except NonConvergedError:
        return math.nan, math.nan, "NONCONVERGED"


def _quad_grid(model, grid, workers):
    jobs = [(model, n) for n in grid]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_quad_point, jobs))
    return [_quad_point(j) for j in jobs]


def cmd_compute_n(settings, base_dir, args):
    model, mspec = _model_spec(settings, base_dir)
    model.check()
    grid = parse_grid(settings.get("grid", DEFAULT_GRID))
    spec = {"command": "compute-n", "model": mspec, "grid": grid}
    results = _quad_grid(model, grid, _workers(settings))
    cols = ["arg", "log_p", "abs_err", "status"]
    rows = [(n, v, e, s) for n, (v, e, s) in zip(grid, results)]
    if args.base10:
        cols.append("log10_p")
        rows = [r + (r[1] / math.log(10),) for r in rows]
    meta = {"format_version": mc.FORMAT_VERSION, "spec": spec}
    _emit(render_table(meta, cols, rows, args.format), _out_path(args, "", args.format))
    bad = sum(s != "OK" for _, _, s in results)
    if bad:
        print(f"NONCONVERGED at {bad} grid point(s)", file=sys.stderr)
    return 1 if bad else 0


def cmd_simulate(settings, base_dir, args):
    model, mspec = _model_spec(settings, base_dir)
    need_t = str(settings.get("time", "true")).lower() not in ("false", "0", "no")
    model.check(need_time=False)
    cfg, cspec = _sim_spec(settings)
    n_grid = parse_grid(settings.get("n_grid", DEFAULT_GRID), integer=True)
    t_grid = parse_grid(settings.get("t_grid", DEFAULT_GRID))
    max_trunc = _int(settings.get("max_truncated", 0), "max_truncated")
    spec = {"command": "simulate", "model": mspec, "sim": cspec, "n_grid": n_grid, "t_grid": t_grid,
            "time": need_t, "max_truncated": max_trunc}
    res = mc.simulate(model, _with_workers(cfg, _workers(settings)), time=need_t)
    meta = {"spec": spec, "truncated": res.truncation_count}
    c_n = mc.empirical_ccdf(res.n_attempts, n_grid, mc.CurveKind.N_CURVE, meta)
    _emit(render_curve(c_n, args.format, args.base10), _out_path(args, "_N", args.format))
    if need_t:
        c_t = mc.empirical_ccdf(res.total_time, t_grid, mc.CurveKind.T_CURVE, meta)
        _emit(render_curve(c_t, args.format, args.base10), _out_path(args, "_T", args.format))
    if res.truncation_count > max_trunc:
        print(f"TRUNCATION_WARNING: {res.truncation_count} session(s) hit the attempt cap", file=sys.stderr)
        return 1
    return 0


def _regime_report(phi_text):
    report = {"phi": phi_text}
    phi = asym.parse_phi(phi_text)
    report["monotone"] = asym.monotonicity_probe(phi)
    dom = asym.dominance_probe(phi)
    report["dominance"] = {"verdict": dom.verdict.value, "ratio_min": dom.ratio_min, "ratio_max": dom.ratio_max}
    regime = asym.classify(phi)
    report["regime"] = regime.tag.value
    report["params"] = dict(regime.params)
    report["result_N"] = regime.result
    report["result_T"] = asym.T_RESULTS.get(regime.tag, "UNSUPPORTED")
    report["notes"] = list(regime.notes)
    return phi, regime, report


def cmd_classify(settings, base_dir, args):
    spec = {"command": "classify"}
    report = {}
    phi_text = settings.get("phi")
    status = 0
    if phi_text:
        spec["phi"] = str(phi_text)
        try:
            _, _, rep = _regime_report(str(phi_text))
            report.update(rep)
        except (CriticalBoundaryError, UnclassifiedError) as exc:
            report.update({"phi": str(phi_text), "regime": exc.code, "message": str(exc)})
            print(f"{exc.code}: {exc}", file=sys.stderr)
            status = 2
    if settings.get("model") or settings.get("L") or settings.get("l"):
        model, mspec = _model_spec(settings, base_dir)
        spec["model"] = mspec
        num = asym.phi_from_pair(model.L, model.A)
        ys = [1e2, 1e4, 1e6, 1e8, 1e10, 1e12]
        with np.errstate(all="ignore"):
            report["probes"] = [
                {"y": y, "log_phi": float(num.log_phi(y)), "log_index": float(asym.log_index(num, y)),
                 "doubling_ratio": float(asym.doubling_ratio(num, y))}
                for y in ys
            ]
    if not report:
        raise ParseError("classify needs phi= and/or a model", field="phi")
    report = {"format_version": mc.FORMAT_VERSION, "spec": spec, "report": report}
    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    else:
        text = _header_lines({"format_version": mc.FORMAT_VERSION, "spec": spec}) + _report_text(report["report"])
    _emit(text, _out_path(args, "", "json" if args.format == "json" else "txt"))
    return status


def _report_text(rep):
    lines = []
    if "regime" in rep:
        params = ", ".join(f"{k}={v:g}" for k, v in rep.get("params", {}).items())
        lines.append(f"phi: {rep['phi']}")
        lines.append(f"regime: {rep['regime']}" + (f" ({params})" if params else ""))
        if "message" in rep:
            lines.append(f"message: {rep['message']}")
        else:
            lines.append(f"result for N: {rep['result_N']}")
            lines.append(f"result for T: {rep['result_T']}")
            d = rep["dominance"]
            lines.append(f"dominance: {d['verdict']} (Phi(ex)/Phi(x) in [{d['ratio_min']:.6g}, {d['ratio_max']:.6g}])")
            lines.append(f"monotone: {rep['monotone']}")
            for note in rep["notes"]:
                lines.append(f"note: {note}")
    for p in rep.get("probes", []):
        lines.append(
            f"probe y={p['y']:.0e}: log Phi={p['log_phi']:.6g}  log Phi/log y={p['log_index']:.6g}  "
            f"log Phi(2y)/log Phi(y)={p['doubling_ratio']:.6g}"
        )
    return "\n".join(lines) + "\n"


def cmd_compare(settings, base_dir, args):
    model, mspec = _model_spec(settings, base_dir)
    phi_text = settings.get("phi")
    if not phi_text:
        raise ParseError("compare needs phi=", field="phi")
    phi = asym.parse_phi(str(phi_text))
    regime = asym.classify(phi)
    what = str(settings.get("what", "N")).upper()
    source = str(settings.get("source", "oracle")).lower()
    if what not in ("N", "T") or source not in ("oracle", "mc"):
        raise ParseError("what must be N or T and source oracle or mc", field="what")
    if what == "T" and source != "mc":
        raise ParseError("T curves are only available from simulation (source=mc)", field="source")
    scale = str(settings.get("scale", "auto")).lower()
    grid = parse_grid(settings.get("grid", DEFAULT_GRID), integer=(what == "N" and source == "mc"))
    spec = {"command": "compare", "model": mspec, "phi": str(phi_text), "what": what, "source": source,
            "grid": grid, "scale": scale}
    model.check(need_time=(what == "T"))
    status = 0
    if source == "oracle":
        results = _quad_grid(model, grid, _workers(settings))
        obs = [(v, 0.0, -1, s) for v, _, s in results]
    else:
        cfg, cspec = _sim_spec(settings)
        spec["sim"] = cspec
        res = mc.simulate(model, _with_workers(cfg, _workers(settings)), time=(what == "T"))
        sample = res.n_attempts if what == "N" else res.total_time
        curve = mc.empirical_ccdf(sample, grid)
        obs = [(lp, ci, ne, "DEGENERATE" if ne < 10 else "OK")
               for _, lp, ci, ne in curve.points()]
        if res.truncation_count:
            status = 1
    rows = []
    prev_gap = None
    for x, (lp, ci, ne, st) in zip(grid, obs):
        try:
            if what == "N":
                pred = asym.predict_log_ccdf_N(regime, phi, x)
            else:
                pred = asym.predict_log_ccdf_T(regime, phi, x, model.mean_cycle)
        except UnsupportedRegimeError:
            rows.append((x, lp, ci, ne, math.nan, "", "", math.nan, "", "UNSUPPORTED"))
            continue
        except ValueError:
            rows.append((x, lp, ci, ne, math.nan, "", "", math.nan, "", "OUT_OF_RANGE"))
            continue
        if scale == "prob":
            ratio = asym.probability_ratio(pred, lp)  # raises on log-scale kinds
            cmp_scale = "prob_ratio"
        else:
            c = asym.compare(pred, lp)
            ratio, cmp_scale = c.ratio, c.scale
        gap = abs(ratio - 1.0) if st == "OK" and math.isfinite(ratio) else None
        trend = ""
        if gap is not None and prev_gap is not None:
            trend = "toward" if gap <= prev_gap else "away"
        if gap is not None:
            prev_gap = gap
        rows.append((x, lp, ci, ne, pred.value, pred.kind.value, cmp_scale, ratio, trend, st))
        if st == "NONCONVERGED":
            status = 1
    cols = ["arg", "log_p", "ci_halfwidth", "n_exceed", "pred_log_p", "kind", "scale", "ratio", "trend", "status"]
    meta = {"format_version": mc.FORMAT_VERSION, "spec": spec, "regime": regime.describe(),
            "result": regime.result if what == "N" else asym.T_RESULTS.get(regime.tag, "UNSUPPORTED")}
    if args.base10:
        cols.append("log10_p")
        rows = [r + (r[1] / math.log(10),) for r in rows]
    _emit(render_table(meta, cols, rows, args.format), _out_path(args, "", args.format))
    return status


def cmd_tandem(settings, base_dir, args):
    def num(key, default=None):
        v = settings.get(key, default)
        if v is None:
            raise ParseError("missing entry", field=key)
        return to_float(v, key)

    model = tandem.TandemModel(num("p"), num("q"), num("per_hop_time", 1.0))
    grid = parse_grid(settings.get("grid", DEFAULT_GRID), integer=True)
    spec = {"command": "tandem", "model": model.spec(), "grid": grid}
    cols = ["arg", "log_p", "lower", "scaled", "upper", "inside"]
    rows = []
    for n in grid:
        v = tandem.ccdf_N_tandem(model, int(n)).value
        if n >= 1 and math.isfinite(model.exponent):
            lo, scaled, hi, inside = tandem.bracket_check(model, int(n))
        else:
            lo = scaled = hi = math.nan
            inside = ""
        rows.append((n, v, lo, scaled, hi, inside))
    status = 0
    if settings.get("sessions") is not None:
        cfg, cspec = _sim_spec(settings)
        spec["sim"] = cspec
        res = tandem.simulate_tandem(model, _with_workers(cfg, _workers(settings)), time=False)
        curve = mc.empirical_ccdf(res.n_attempts, grid)
        cols += ["mc_log_p", "ci_halfwidth", "n_exceed", "covered"]
        rows = [
            r + (lp, ci, ne, "" if ne < 10 else abs(lp - r[1]) <= ci)
            for r, (_, lp, ci, ne) in zip(rows, curve.points())
        ]
        if res.truncation_count:
            status = 1
    meta = {"format_version": mc.FORMAT_VERSION, "spec": spec, "exponent": model.exponent}
    if args.base10:
        cols.append("log10_p")
        rows = [r + (r[1] / math.log(10),) for r in rows]
    _emit(render_table(meta, cols, rows, args.format), _out_path(args, "", args.format))
    return status


COMMANDS = {
    "compute-n": cmd_compute_n,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "compare": cmd_compare,
    "tandem": cmd_tandem,
}

# flag name -> settings key; every flag defaults to None so the config file shows through
_FLAGS = {
    "compute-n": ["model", "L", "A", "U", "grid", "workers"],
    "simulate": ["model", "L", "A", "U", "seed", "sessions", "workers", "max_attempts", "mode",
                 "n_grid", "t_grid", "time", "max_truncated"],
    "classify": ["phi", "model", "L", "A", "U"],
    "compare": ["model", "L", "A", "U", "phi", "grid", "what", "source", "scale", "seed", "sessions",
                "workers", "max_attempts", "mode"],
    "tandem": ["p", "q", "per_hop_time", "grid", "seed", "sessions", "workers", "max_attempts", "mode"],
}


def build_parser():
    parser = argparse.ArgumentParser(prog="retrans", description="Retransmission delay tails: oracle, simulation, asymptotics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, keys in _FLAGS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key/value config file, or an earlier output file to rerun")
        p.add_argument("--out", help="output path (prefix for simulate); stdout when omitted")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--base10", action="store_true", help="add a log10 probability column for display")
        for key in keys:
            flag = "--" + key.replace("_", "-") if len(key) > 1 else "-" + key
            p.add_argument(flag, dest="opt_" + key, default=None)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings, base_dir = read_config(args.config) if args.config else ({}, Path.cwd())
        settings = dict(settings)
        for key, value in vars(args).items():
            if key.startswith("opt_") and value is not None:
                settings[key[4:]] = value
        return COMMANDS[args.command](settings, base_dir, args)
    except ModelError as exc:
        for d in exc.diagnostics:
            print(f"{d.code}: {d.message}", file=sys.stderr)
        return 2
    except (CriticalBoundaryError, UnclassifiedError, UnsupportedRegimeError) as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except ScaleMismatchError as exc:
        print(f"SCALE_MISMATCH: {exc}", file=sys.stderr)
        return 2
    except (ParseError, RetransError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
