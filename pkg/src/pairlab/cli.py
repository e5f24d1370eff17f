"""Command line front end: ``pairlab <subcommand> ...``.

Exit codes: 0 success, 2 usage or configuration error, 3 data or model
error (a one-line JSON error record is printed to stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from . import analytic, cluster, correlate, kernels, lineshape, simulate, tagio
from .config import ConfigError, load_config
from .errors import PairlabError
from .stream import APD1, APD2, APD3, CHANNEL_NAMES

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 2, 3
DEFAULT_SWEEP_RATES = (5e4, 1e5, 2.5e5, 5e5, 1e6)


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def _rates(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty rate list")
    return vals


def _apply_overrides(cfg, args):
    for key in ("seed", "duration_s", "window_ns", "offset_ns", "eta_det"):
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    return cfg


def _ns_to_ps(x):
    return int(round(x * 1e3))


def _signal_union(stream, channels):
    return np.sort(np.concatenate([stream.times_ps(c) for c in channels]))


# -- subcommands --------------------------------------------------------------

def cmd_simulate(args):
    cfg = _apply_overrides(load_config(args.config), args)
    stream = simulate.simulate_experiment(cfg.source, cfg.signal_arm, cfg.idler_arm,
                                          cfg.duration_s, cfg.seed, cfg.resolution_ps,
                                          cfg.chunk_duration_s, args.workers)
    tagio.write_streams(args.out, stream)
    counts = stream.counts()
    _emit({"out": args.out, "events": int(len(stream)),
           "counts": {CHANNEL_NAMES.get(c, str(c)): int(n) for c, n in enumerate(counts)},
           "duration_s": cfg.duration_s, "seed": cfg.seed, "rng": simulate.RNG_ALGORITHM})


def cmd_correlate(args):
    stream = tagio.read_streams(args.input)
    a, b = stream.times_ps(args.a), stream.times_ps(args.b)
    bin_ps = int(args.bin_ps)
    # round up so that the lag range holds a whole number of bins
    unit = bin_ps // 2 if bin_ps % 2 == 0 else bin_ps
    max_lag = -(-_ns_to_ps(args.max_lag_ns) // unit) * unit
    hist = correlate.cross_correlation_histogram(a, b, bin_ps, max_lag, stream.duration_s,
                                                 chunks=args.workers, workers=args.workers,
                                                 resolution=stream.resolution_ps)
    try:
        g2, err = correlate.normalize_g2(hist)
    except PairlabError:
        g2 = err = np.full(len(hist.counts), np.nan)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lag_ps", "counts", "g2", "g2_err"])
        for row in zip(hist.lags.tolist(), hist.counts.tolist(), g2.tolist(), err.tolist()):
            w.writerow([f"{row[0]:.1f}", row[1], repr(row[2]), repr(row[3])])
    k = int(np.argmax(hist.counts))
    _emit({"a": args.a, "b": args.b, "bin_ps": bin_ps, "max_lag_ps": max_lag,
           "n_a": hist.n_a, "n_b": hist.n_b, "duration_s": hist.duration,
           "total_counts": int(hist.counts.sum()), "peak_lag_ps": float(hist.lags[k]),
           "peak_g2": None if math.isnan(g2[k]) else float(g2[k]),
           "out": args.out, "backend": kernels.BACKEND})


def cmd_herald_g2(args):
    stream = tagio.read_streams(args.input)
    herald = stream.times_ps(args.herald)
    s1, s2 = stream.times_ps(args.s1), stream.times_ps(args.s2)
    if args.offset_ns is None:
        offset = correlate.peak_offset(herald, _signal_union(stream, (args.s1, args.s2)))
    else:
        offset = _ns_to_ps(args.offset_ns)
    res = correlate.heralded_g2c(herald, s1, s2, _ns_to_ps(args.window_ns), offset)
    out = asdict(res)
    out["window_ns"] = out.pop("window") * 1e-3
    out["offset_ns"] = out.pop("offset") * 1e-3
    _emit(out)


def _summary_record(stream, eta_det, pump_mw, window_ns, offset_ns):
    roles = stream.metadata.get("roles", {})
    signal = tuple(roles.get("signal", (APD1, APD2)))
    idler = roles.get("idler", [APD3])[0]
    offset = None if offset_ns is None else _ns_to_ps(offset_ns)
    rates, eff, coinc = correlate.stream_summary(stream, eta_det, pump_mw, signal, idler,
                                                 _ns_to_ps(window_ns), offset)
    return {"rates": asdict(rates), "efficiencies": asdict(eff),
            "coincidences": {"count": coinc.count, "rate": coinc.rate,
                             "window_ns": coinc.window * 1e-3, "offset_ns": coinc.offset * 1e-3},
            "singles": {CHANNEL_NAMES.get(c, str(c)): n / stream.duration_s
                        for c, n in enumerate(stream.counts().tolist())}}


def cmd_summary(args):
    stream = tagio.read_streams(args.input)
    _emit(_summary_record(stream, args.eta_det, args.pump_mw, args.window_ns, args.offset_ns))


def sweep_point(cfg, index, rate):
    """Simulate one generation rate and measure its heralded g2."""
    seed = simulate.derive_seed(cfg.seed, index)
    stream = simulate.simulate_experiment(cfg.source.with_generation_rate(rate), cfg.signal_arm,
                                          cfg.idler_arm, cfg.duration_s, seed, cfg.resolution_ps,
                                          cfg.chunk_duration_s)
    herald = stream.times_ps(APD3)
    s1, s2 = stream.times_ps(APD1), stream.times_ps(APD2)
    if cfg.offset_ns is None:
        offset = correlate.peak_offset(herald, _signal_union(stream, (APD1, APD2)))
    else:
        offset = _ns_to_ps(cfg.offset_ns)
    res = correlate.heralded_g2c(herald, s1, s2, _ns_to_ps(cfg.window_ns), offset)
    op = analytic.PairSourceOperatingPoint.from_pair_rate(rate, cfg.window_ns)
    point = {"rate": rate, "g2c": res.g2c, "g2c_err": res.statistical_error,
             "eq1_prediction": analytic.heralded_g2_prediction(op), "seed": seed,
             "n_heralds": res.n_heralds, "offset_ns": offset * 1e-3}
    return point, stream


def cmd_sweep(args):
    cfg = _apply_overrides(load_config(args.config), args)
    rates = args.rates or list(DEFAULT_SWEEP_RATES)
    os.makedirs(args.out_dir, exist_ok=True)

    def run(item):
        i, rate = item
        point, stream = sweep_point(cfg, i, rate)
        if args.keep_streams:
            tagio.write_streams(os.path.join(args.out_dir, f"rate_{i:02d}.ptt1"), stream)
        return point

    if args.workers > 1:
        with ThreadPoolExecutor(args.workers) as pool:
            points = list(pool.map(run, enumerate(rates)))
    else:
        points = [run(item) for item in enumerate(rates)]
    path = os.path.join(args.out_dir, "sweep.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rate", "g2c", "g2c_err", "eq1_prediction"])
        for p in points:
            w.writerow([repr(p["rate"]), repr(p["g2c"]), repr(p["g2c_err"]), repr(p["eq1_prediction"])])
    _emit({"csv": path, "points": points})


def cmd_cluster(args):
    cfg = load_config(args.config)
    lines = cluster.emission_lines(cfg.comb, args.span_ghz)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["detuning_GHz", "weight"])
        for line in lines:
            w.writerow([repr(line.detuning), repr(line.weight)])
    spacing = None if cfg.comb.degenerate else cluster.cluster_spacing(cfg.comb.fsr_s, cfg.comb.fsr_i)
    _emit({"out": args.out, "lines": len(lines), "cluster_spacing_ghz": spacing,
           "central_fraction": cluster.central_fraction(lines)})


def cmd_model(args):
    kind = args.model
    if kind == "eq1":
        op = analytic.PairSourceOperatingPoint.from_pair_rate(args.rp, args.window_ns)
        _emit({"g2c": analytic.heralded_g2_prediction(op)})
    elif kind == "eq2":
        _emit({"g2c": analytic.bayes_g2c(args.g2_ss, args.g2_ii, args.g2_si)})
    elif kind == "crosscorr":
        op = analytic.PairSourceOperatingPoint.from_pair_rate(args.rp, args.window_ns)
        _emit({"g2_si": analytic.predicted_cross_corr(args.g2_ii, op)})
    elif kind == "lineshape":
        width = lineshape.product_line_fwhm(args.fwhm_a, args.fwhm_b)
        tau0 = lineshape.coherence_time(width)
        irf = lineshape.IrfSpec.from_fwhm(args.irf_fwhm_ns)
        _emit({"product_fwhm_mhz": width, "tau0_ns": tau0, "irf_sigma_ns": irf.sigma,
               "g2_ii_zero": lineshape.irf_convolved_autocorr(0.0, tau0, irf),
               "g2_ii_window": lineshape.window_averaged_g2(tau0, irf, args.half_window_ns)})
    elif kind == "efficiencies":
        rates = analytic.RateSummary(args.n_s, args.n_i, args.r)
        _emit(asdict(analytic.efficiencies_from_rates(rates, args.eta_det, args.pump_mw)))
    elif kind == "etalon":
        et = lineshape.EtalonSpec(args.fsr_ghz, args.fwhm_mhz)
        src = lineshape.SpectralLine(0.0, args.source_fwhm_mhz)
        _emit({"finesse": et.finesse,
               "transmission": lineshape.airy_transmission(args.detuning_mhz, et),
               "filtered_fraction": lineshape.filtered_fraction(src, et, args.half_window_mhz)})


# -- parser -------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="pairlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate detection streams into a PTT1 file")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--duration-s", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("correlate", help="cross-correlation histogram and g2 CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--a", type=int, required=True)
    s.add_argument("--b", type=int, required=True)
    s.add_argument("--bin-ps", type=int, default=correlate.REFERENCE_BIN_PS)
    s.add_argument("--max-lag-ns", type=float, default=20.0)
    s.add_argument("--out", required=True)
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_correlate)

    s = sub.add_parser("herald-g2", help="heralded conditional autocorrelation")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--herald", type=int, default=APD3)
    s.add_argument("--s1", type=int, default=APD1)
    s.add_argument("--s2", type=int, default=APD2)
    s.add_argument("--window-ns", type=float, default=8.0)
    s.add_argument("--offset-ns", type=float)
    s.set_defaults(func=cmd_herald_g2)

    s = sub.add_parser("summary", help="singles/pair rates and efficiencies")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--eta-det", type=float, default=0.60)
    s.add_argument("--pump-mw", type=float, default=simulate.REFERENCE_PUMP_MW)
    s.add_argument("--window-ns", type=float, default=8.0)
    s.add_argument("--offset-ns", type=float)
    s.set_defaults(func=cmd_summary)

    s = sub.add_parser("sweep", help="heralded g2 versus pair generation rate")
    s.add_argument("--config")
    s.add_argument("--rates", type=_rates, help="comma separated R*P values (pairs/s)")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int)
    s.add_argument("--duration-s", type=float)
    s.add_argument("--window-ns", type=float)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--keep-streams", action="store_true")
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("cluster", help="emission lines of one cluster as CSV")
    s.add_argument("--config")
    s.add_argument("--span-ghz", type=float, default=40.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("model", help="evaluate closed-form models")
    models = s.add_subparsers(dest="model", required=True)
    m = models.add_parser("eq1", help="heralded g2 from the pair generation rate")
    m.add_argument("--rp", type=float, required=True, help="R*P in pairs/s")
    m.add_argument("--window-ns", type=float, default=8.0)
    m = models.add_parser("eq2", help="heralded g2 from auto- and cross-correlations")
    m.add_argument("--g2-ss", type=float, required=True)
    m.add_argument("--g2-ii", type=float, required=True)
    m.add_argument("--g2-si", type=float, required=True)
    m = models.add_parser("crosscorr", help="predicted signal-idler cross-correlation")
    m.add_argument("--g2-ii", type=float, required=True)
    m.add_argument("--rp", type=float, required=True)
    m.add_argument("--window-ns", type=float, default=8.0)
    m = models.add_parser("lineshape", help="filtered idler line and its autocorrelation")
    m.add_argument("--fwhm-a", type=float, default=lineshape.SOURCE_FWHM_MHZ)
    m.add_argument("--fwhm-b", type=float, default=lineshape.ETALON_FWHM_MHZ)
    m.add_argument("--irf-fwhm-ns", type=float, default=lineshape.PAIR_JITTER_FWHM_NS)
    m.add_argument("--half-window-ns", type=float, default=4.0)
    m = models.add_parser("efficiencies", help="arm and heralding efficiencies from rates")
    m.add_argument("--n-s", type=float, required=True)
    m.add_argument("--n-i", type=float, required=True)
    m.add_argument("--r", type=float, required=True)
    m.add_argument("--eta-det", type=float, default=0.60)
    m.add_argument("--pump-mw", type=float, default=simulate.REFERENCE_PUMP_MW)
    m = models.add_parser("etalon", help="etalon transmission and filtered fraction")
    m.add_argument("--fsr-ghz", type=float, default=lineshape.ETALON_FSR_GHZ)
    m.add_argument("--fwhm-mhz", type=float, default=lineshape.ETALON_FWHM_MHZ)
    m.add_argument("--detuning-mhz", type=float, default=lineshape.ETALON_FSR_GHZ * 500)
    m.add_argument("--source-fwhm-mhz", type=float, default=lineshape.SOURCE_FWHM_MHZ)
    m.add_argument("--half-window-mhz", type=float, default=200.0)
    s.set_defaults(func=cmd_model)
    return p


def _error(kind, message):
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_CONFIG
    except (PairlabError, OSError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
