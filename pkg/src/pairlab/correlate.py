"""Coincidence counting and correlation analysis of time-tag streams.

All times here are integer picoseconds; event arrays must be sorted.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import kernels
from .analytic import RateSummary, efficiencies_from_rates
from .errors import DataError, ParameterError, UndefinedResultError
from .stream import APD1, APD2, APD3

REFERENCE_BIN_PS = 162
DEFAULT_WINDOW_PS = 8000


@dataclass
class CorrelationHistogram:
    bin_width: int  # ps
    lag_range: tuple  # (min, max) in ps
    counts: np.ndarray
    n_a: int
    n_b: int
    duration: float  # s
    resolution: int = 1  # ps, spacing of the lag lattice

    @property
    def support(self):
        """Width (ps) of each bin counted on the lattice of possible lags.

        Lags are multiples of ``resolution``; the bin touching zero lag
        holds one lattice point fewer than the others.
        """
        w, r, lag_max = self.bin_width, self.resolution, self.lag_range[1]
        lo = self.lag_range[0] + w * np.arange(len(self.counts), dtype=np.int64)
        hi = np.clip(lo + w, 0, lag_max)

        def lattice(first):
            a = np.clip(lo, first, lag_max)
            return np.maximum(-(-hi // r) - -(-a // r), 0)

        # d >= 0 falls in bin k, d < 0 in the mirror of the bin of |d|
        return (lattice(0) + lattice(1)[::-1]) * r

    @property
    def edges(self):
        return self.lag_range[0] + self.bin_width * np.arange(len(self.counts) + 1)

    @property
    def lags(self):
        """Bin centers in ps."""
        return self.lag_range[0] + self.bin_width * (np.arange(len(self.counts)) + 0.5)

    def mirrored(self):
        return CorrelationHistogram(self.bin_width, (-self.lag_range[1], -self.lag_range[0]),
                                    self.counts[::-1].copy(), self.n_b, self.n_a, self.duration,
                                    self.resolution)


@dataclass(frozen=True)
class CoincidenceResult:
    count: int
    rate: float  # 1/s
    window: int  # ps
    offset: int  # ps


@dataclass(frozen=True)
class HeraldedG2Result:
    p_s1: float
    p_s2: float
    p_d: float
    g2c: float
    n_heralds: int
    statistical_error: float
    window: int = DEFAULT_WINDOW_PS
    offset: int = 0


def _as_events(x, name):
    x = np.ascontiguousarray(x, dtype=np.int64)
    if x.ndim != 1:
        raise DataError(f"{name} must be a 1-D array of timestamps")
    if len(x) > 1:
        bad = np.flatnonzero(np.diff(x) < 0)
        if len(bad):
            raise DataError(f"{name} is not sorted (index {bad[0] + 1})", index=int(bad[0]) + 1)
    return x


def _span_duration(*streams):
    lo = min((s[0] for s in streams if len(s)), default=0)
    hi = max((s[-1] for s in streams if len(s)), default=0)
    return (hi - lo) * 1e-12


def _chunk_bounds(n, chunks):
    chunks = max(1, min(int(chunks), max(n, 1)))
    return np.linspace(0, n, chunks + 1).astype(np.int64)


def cross_correlation_histogram(a, b, bin_width, max_lag, duration=None, chunks=1, workers=1,
                                resolution=1):
    """Histogram of every lag t_b - t_a in (-max_lag, +max_lag).

    ``bin_width`` and ``max_lag`` are in ps and 2*max_lag must be a whole
    number of bins. Bins include their edge nearer zero lag and zero lag
    itself goes to the bin starting at zero, so hist(b, a) is the mirror
    of hist(a, b) except for exact zero-lag ties when no bin is centered
    on zero. ``chunks`` splits ``a`` into independent pieces whose
    partial histograms are summed, using ``workers`` threads.
    ``resolution`` (ps) is the timestamp granularity used by normalize_g2.
    """
    a = _as_events(a, "a")
    b = _as_events(b, "b")
    bin_width, max_lag = int(bin_width), int(max_lag)
    if bin_width <= 0:
        raise ParameterError("bin_width must be > 0")
    if int(resolution) < 1:
        raise ParameterError("resolution must be >= 1")
    if max_lag < bin_width:
        raise ParameterError("max_lag must be >= bin_width")
    if (2 * max_lag) % bin_width:
        raise ParameterError("2*max_lag must be a multiple of bin_width")
    n_bins = 2 * max_lag // bin_width
    if duration is None:
        duration = _span_duration(a, b)

    bounds = _chunk_bounds(len(a), chunks)

    def part(k):
        i0, i1 = bounds[k], bounds[k + 1]
        if i1 <= i0:
            return np.zeros(n_bins, np.int64)
        j0 = np.searchsorted(b, a[i0] - max_lag, side="right")
        j1 = np.searchsorted(b, a[i1 - 1] + max_lag, side="left")
        return kernels.lag_histogram(a[i0:i1], b[j0:j1], max_lag, bin_width, n_bins)

    if workers > 1 and len(bounds) > 2:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(part, range(len(bounds) - 1)))
    else:
        parts = [part(k) for k in range(len(bounds) - 1)]
    counts = np.sum(parts, axis=0, dtype=np.int64) if parts else np.zeros(n_bins, np.int64)
    return CorrelationHistogram(bin_width, (-max_lag, max_lag), counts, len(a), len(b),
                                float(duration), int(resolution))


def normalize_g2(hist):
    """Normalized g2 per bin and its Poisson error.

    The accidental level of each bin is n_a n_b support / duration.
    """
    if not hist.duration > 0 or hist.n_a == 0 or hist.n_b == 0:
        raise UndefinedResultError("cannot normalize: zero duration or empty input")
    support = hist.support.astype(float)
    if not (support > 0).all():
        raise UndefinedResultError("a bin holds no possible lag at this resolution")
    scale = hist.duration / (hist.n_a * hist.n_b * support * 1e-12)
    counts = hist.counts.astype(float)
    return counts * scale, np.sqrt(counts) * scale


def integrated_window_g2(hist, half_window):
    """Mean g2 over the bins centered within +/-half_window (ps)."""
    if not half_window > 0:
        raise ParameterError("half_window must be > 0")
    if half_window > hist.lag_range[1] or -half_window < hist.lag_range[0]:
        raise ParameterError("window extends beyond the histogram range")
    g2, _ = normalize_g2(hist)
    sel = np.abs(hist.lags) <= half_window
    if not sel.any():
        raise ParameterError("no bin center inside the window")
    return float(g2[sel].mean())


def peak_offset(a, b, bin_width=REFERENCE_BIN_PS, max_lag=200 * REFERENCE_BIN_PS):
    """Lag (ps, bin center) of the largest cross-correlation bin."""
    hist = cross_correlation_histogram(a, b, bin_width, max_lag)
    if hist.counts.sum() == 0:
        return 0
    return int(round(hist.lags[int(np.argmax(hist.counts))]))


def coincidences(a, b, window=DEFAULT_WINDOW_PS, offset=0, duration=None):
    """Greedy one-to-one coincidences with t_b - t_a - offset in [-window/2, window/2]."""
    a = _as_events(a, "a")
    b = _as_events(b, "b")
    window, offset = int(window), int(offset)
    if window < 0:
        raise ParameterError("window must be >= 0")
    lo = offset - window // 2
    hi = offset + (window - window // 2)
    count = int(kernels.greedy_coincidences(a, b, lo, hi))
    if duration is None:
        duration = _span_duration(a, b)
    rate = count / duration if duration > 0 else 0.0
    return CoincidenceResult(count, rate, window, offset)


def _window_hits(herald, s, lo, hi):
    return np.searchsorted(s, herald + hi, side="right") > np.searchsorted(s, herald + lo, side="left")


def heralded_g2c(herald, s1, s2, window=DEFAULT_WINDOW_PS, offset=0):
    """Conditional g2 = P_d / (P_s1 P_s2) for non-number-resolving detectors.

    For every herald event the window [offset - window/2, offset + window/2]
    (relative to the herald) is checked for at least one event on s1, on
    s2, and on both.
    """
    herald = _as_events(herald, "herald")
    s1 = _as_events(s1, "s1")
    s2 = _as_events(s2, "s2")
    window, offset = int(window), int(offset)
    if window <= 0:
        raise ParameterError("window must be > 0")
    n = len(herald)
    if n == 0:
        raise UndefinedResultError("no herald events")
    lo = offset - window // 2
    hi = offset + (window - window // 2)
    h1 = _window_hits(herald, s1, lo, hi)
    h2 = _window_hits(herald, s2, lo, hi)
    n1, n2 = int(h1.sum()), int(h2.sum())
    nd = int(np.count_nonzero(h1 & h2))
    if n1 == 0 or n2 == 0:
        raise UndefinedResultError("no heralded detections on one of the HBT channels")
    p1, p2, pd = n1 / n, n2 / n, nd / n
    g2c = pd / (p1 * p2)
    # independent binomial errors; with no doubles, one count sets the scale
    rel2 = (1 - p1) / n1 + (1 - p2) / n2
    if nd:
        err = g2c * math.sqrt((1 - pd) / nd + rel2)
    else:
        err = (1.0 / n) / (p1 * p2)
    return HeraldedG2Result(p1, p2, pd, g2c, n, err, window, offset)


def stream_summary(stream, eta_det, pump_power, signal_channels=(APD1, APD2),
                   idler_channel=APD3, window=DEFAULT_WINDOW_PS, offset=None):
    """Singles and pair rates of a recorded stream plus the derived efficiencies.

    The offset defaults to the peak of the idler-signal cross-correlation.
    """
    duration = stream.duration_s
    if not duration > 0:
        raise DataError("stream has zero duration")
    sig = np.sort(np.concatenate([stream.times_ps(c) for c in signal_channels]))
    idl = stream.times_ps(idler_channel)
    if offset is None:
        offset = peak_offset(idl, sig)
    coinc = coincidences(idl, sig, window, offset, duration)
    rates = RateSummary(n_s=len(sig) / duration, n_i=len(idl) / duration,
                        r=coinc.rate, duration=duration)
    return rates, efficiencies_from_rates(rates, eta_det, pump_power), coinc


def two_sided_exp_irf(tau, amplitude, center, tau_lead, tau_trail, sigma, background):
    """Two-sided exponential peak convolved with a Gaussian IRF (times in ns).

    ``amplitude`` is the peak height of the unconvolved shape.
    """
    t = np.asarray(tau, dtype=float) - center
    if sigma <= 0:
        core = np.where(t < 0, np.exp(t / tau_lead), np.exp(-t / tau_trail))
        return background + amplitude * core

    def side(x, tc):
        # int_0^inf exp(-u/tc) N(x - u; sigma) du, overflow safe via erfcx
        z = (sigma / tc - x / sigma) / math.sqrt(2.0)
        with np.errstate(over="ignore", under="ignore"):
            safe = np.exp(-x * x / (2 * sigma * sigma)) * special.erfcx(np.maximum(z, 0))
            direct = np.exp(sigma * sigma / (2 * tc * tc) - x / tc) * special.erfc(np.minimum(z, 0))
        return 0.5 * np.where(z >= 0, safe, direct)

    return background + amplitude * (side(t, tau_trail) + side(-t, tau_lead))


def fit_two_sided_exponential(hist, sigma=None):
    """Least-squares fit of the lead/trail decay constants (ns) of a peak.

    If ``sigma`` (ns) is given the IRF width is held fixed.
    """
    x = hist.lags * 1e-3
    y = hist.counts.astype(float)
    err = np.sqrt(np.maximum(y, 1.0))
    bg0 = float(np.median(np.concatenate([y[:10], y[-10:]])))
    amp0 = float(y.max() - bg0)
    c0 = float(x[int(np.argmax(y))])
    if sigma is None:
        f = two_sided_exp_irf
        p0 = [amp0, c0, 1.0, 1.0, 0.5, bg0]
        lower = [0, x[0], 1e-3, 1e-3, 0, 0]
        upper = [np.inf, x[-1], 100, 100, 10, np.inf]
    else:
        f = lambda t, amp, c, tl, tt, bg: two_sided_exp_irf(t, amp, c, tl, tt, sigma, bg)
        p0 = [amp0, c0, 1.0, 1.0, bg0]
        lower = [0, x[0], 1e-3, 1e-3, 0]
        upper = [np.inf, x[-1], 100, 100, np.inf]
    popt, pcov = optimize.curve_fit(f, x, y, p0=p0, sigma=err, absolute_sigma=True,
                                    bounds=(lower, upper), maxfev=20000)
    perr = np.sqrt(np.diag(pcov))
    out = {"amplitude": popt[0], "center": popt[1], "tau_lead": popt[2], "tau_trail": popt[3]}
    errs = {"tau_lead_err": perr[2], "tau_trail_err": perr[3]}
    if sigma is None:
        out["sigma"], out["background"] = popt[4], popt[5]
    else:
        out["sigma"], out["background"] = sigma, popt[4]
    out.update(errs)
    return {k: float(v) for k, v in out.items()}
