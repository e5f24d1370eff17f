"""Seeded Monte Carlo generation of three- or four-detector time-tag streams.

Pairs are emitted as a homogeneous Poisson process (or, in thermal mode,
as a Poisson cluster process with single-mode bunching). The idler of a
pair is emitted at the pair time, the signal at pair time plus a
two-sided exponential delay. Every photon is transmitted and detected
independently, detections get Gaussian jitter, dark counts are added and
a non-paralyzable dead time is applied per detector.

Simulation time is cut into fixed-length chunks; each chunk draws from
its own generator ``PCG64(SeedSequence(seed, spawn_key=(chunk,)))``, so
the output does not depend on how many worker threads are used.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ParameterError
from .lineshape import (DEFAULT_IRF, ETALON_FWHM_MHZ, SOURCE_FWHM_MHZ,
                        product_line_fwhm)
from .stream import APD1, APD2, APD3, APD4, CHANNEL_NAMES, TimeTagStream

RNG_ALGORITHM = "numpy.random.PCG64 seeded by SeedSequence(seed, spawn_key=(chunk,))"

REFERENCE_PUMP_MW = 1.2
REFERENCE_PAIR_RATE = 2.5e5  # pairs/s at REFERENCE_PUMP_MW
REFERENCE_DETECTOR_EFFICIENCY = 0.60
REFERENCE_SIGNAL_EFFICIENCY = 0.272  # transmission x detector efficiency
REFERENCE_IDLER_EFFICIENCY = 0.068


def _decay_constant(fwhm_mhz):
    return 1e3 / (2.0 * math.pi * fwhm_mhz)


DEFAULT_TAU_LEAD = _decay_constant(SOURCE_FWHM_MHZ)
DEFAULT_TAU_TRAIL = _decay_constant(product_line_fwhm(SOURCE_FWHM_MHZ, ETALON_FWHM_MHZ))


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = REFERENCE_DETECTOR_EFFICIENCY
    jitter_sigma: float = DEFAULT_IRF.sigma / math.sqrt(2.0)  # ns, per detector
    dead_time: float = 22.0  # ns
    dark_rate: float = 250.0  # counts/s

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ParameterError("detector efficiency must lie in [0, 1]")
        for name in ("jitter_sigma", "dead_time", "dark_rate"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be >= 0")


@dataclass(frozen=True)
class ArmParams:
    transmission: float
    detector: DetectorParams = field(default_factory=DetectorParams)
    splitter: float | None = None  # fraction routed to the first detector

    def __post_init__(self):
        if not 0 <= self.transmission <= 1:
            raise ParameterError("arm transmission must lie in [0, 1]")
        if self.splitter is not None and not 0 <= self.splitter <= 1:
            raise ParameterError("splitter fraction must lie in [0, 1]")

    @property
    def total_efficiency(self):
        return self.transmission * self.detector.efficiency

    def routing(self):
        """Detection probability of each of the arm's two detectors."""
        eta = self.total_efficiency
        f = 1.0 if self.splitter is None else self.splitter
        return eta * f, eta * (1.0 - f)


@dataclass(frozen=True)
class SourceParams:
    pair_rate_R: float = REFERENCE_PAIR_RATE / REFERENCE_PUMP_MW  # pairs/(s mW)
    pump_power: float = REFERENCE_PUMP_MW  # mW
    tau_lead: float = DEFAULT_TAU_LEAD  # ns, signal-early side
    tau_trail: float = DEFAULT_TAU_TRAIL  # ns, signal-late side
    thermal_tau0: float | None = None  # ns; enables single-mode bunching

    def __post_init__(self):
        if not self.pair_rate_R >= 0:
            raise ParameterError("pair_rate_R must be >= 0")
        if not self.pump_power > 0:
            raise ParameterError("pump_power must be > 0")
        for name in ("tau_lead", "tau_trail"):
            v = getattr(self, name)
            if not 0 < v < 100:
                raise ParameterError(f"{name} must lie in (0, 100) ns")
        if self.thermal_tau0 is not None and not self.thermal_tau0 > 0:
            raise ParameterError("thermal_tau0 must be > 0")

    @property
    def generation_rate(self):
        return self.pair_rate_R * self.pump_power

    def with_generation_rate(self, rp):
        return replace(self, pair_rate_R=rp / self.pump_power)


def reference_arms(splitter=0.5):
    """Signal and idler arms reproducing the measured singles rates."""
    det = DetectorParams()
    signal = ArmParams(REFERENCE_SIGNAL_EFFICIENCY / det.efficiency, det, splitter)
    idler = ArmParams(REFERENCE_IDLER_EFFICIENCY / det.efficiency, det)
    return signal, idler


def sample_pair_delay(source, rng, size=None):
    """Signal minus idler emission time (ns) from the two-sided exponential."""
    tl, tt = source.tau_lead, source.tau_trail
    u = rng.random(size)
    e = rng.exponential(1.0, size)
    return np.where(u < tl / (tl + tt), -tl * e, tt * e)


def _channel_layout(signal_arm, idler_arm):
    channels = [APD1, APD2, APD3]
    if idler_arm.splitter is not None:
        channels.append(APD4)
    return channels


def _categories(signal_arm, idler_arm):
    """Joint fates of a pair: (idler channel or -1, signal channel or -1, probability)."""
    i1, i2 = idler_arm.routing()
    s1, s2 = signal_arm.routing()
    idler = [(-1, 1.0 - i1 - i2), (APD3, i1), (APD4, i2)]
    signal = [(-1, 1.0 - s1 - s2), (APD1, s1), (APD2, s2)]
    cats = [(ci, cs, pi * ps) for ci, pi in idler for cs, ps in signal
            if not (ci < 0 and cs < 0) and pi * ps > 0]
    return cats


def _truncated_poisson(rng, mean, size):
    """Poisson(mean) conditioned on >= 1, by inverse transform."""
    kmax = 1
    pmf = [mean * math.exp(-mean) / -math.expm1(-mean)]
    while pmf[-1] > 1e-17 * max(pmf) or kmax < 2:
        kmax += 1
        pmf.append(pmf[-1] * mean / kmax)
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    return 1 + np.searchsorted(cdf, rng.random(size), side="right")


def _pair_times(rng, source, q, t0, t1):
    """Emission times (ps) of pairs with at least one detected photon."""
    rp = source.generation_rate
    span = t1 - t0
    if source.thermal_tau0 is None:
        n = rng.poisson(rp * q * span * 1e-12)
        return rng.uniform(t0, t1, n)
    # Poisson clusters at rate 1/tau0 with Poisson(rp*tau0) members displaced by
    # Exp(tau0/2): the pair-time autocorrelation is 1 + exp(-2|tau|/tau0).
    tau0 = source.thermal_tau0 * 1e3
    mean = rp * q * tau0 * 1e-12
    if mean <= 0:
        return np.empty(0)
    n_clusters = rng.poisson(span / tau0 * -math.expm1(-mean))
    sizes = _truncated_poisson(rng, mean, n_clusters)
    centers = np.repeat(rng.uniform(t0, t1, n_clusters), sizes)
    return centers + rng.exponential(tau0 / 2.0, len(centers))


def _simulate_chunk(k, source, signal_arm, idler_arm, t0, t1, seed, channels):
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(k,))))
    out = {c: [] for c in channels}
    cats = _categories(signal_arm, idler_arm)
    q = sum(p for _, _, p in cats)
    if cats and source.generation_rate > 0:
        t = _pair_times(rng, source, q, t0, t1)
        label = rng.choice(len(cats), size=len(t), p=np.array([p for _, _, p in cats]) / q)
        ich = np.array([c[0] for c in cats])[label]
        sch = np.array([c[1] for c in cats])[label]
        has_s = sch >= 0
        ts = t[has_s] + 1e3 * sample_pair_delay(source, rng, int(has_s.sum()))
        sch = sch[has_s]
        ti, ich = t[ich >= 0], ich[ich >= 0]
        for c in channels:
            arm = idler_arm if c in (APD3, APD4) else signal_arm
            src_t, src_c = (ti, ich) if c in (APD3, APD4) else (ts, sch)
            sel = src_t[src_c == c]
            sel = sel + 1e3 * arm.detector.jitter_sigma * rng.standard_normal(len(sel))
            out[c].append(sel)
    for c in channels:
        arm = idler_arm if c in (APD3, APD4) else signal_arm
        n_dark = rng.poisson(arm.detector.dark_rate * (t1 - t0) * 1e-12)
        out[c].append(rng.uniform(t0, t1, n_dark))
    return {c: np.concatenate(v) for c, v in out.items()}


def simulate_experiment(source, signal_arm, idler_arm, duration, seed, resolution_ps=1,
                        chunk_duration=1.0, workers=1):
    """Simulate ``duration`` seconds of the HBT + herald detection layout.

    Returns one merged stream with channels APD1, APD2 (signal arm),
    APD3 (idler arm) and APD4 (only when the idler arm has a splitter).
    """
    if not duration > 0:
        raise ParameterError("duration must be > 0")
    if not chunk_duration > 0:
        raise ParameterError("chunk_duration must be > 0")
    resolution_ps = int(resolution_ps)
    if resolution_ps < 1:
        raise ParameterError("resolution_ps must be >= 1")
    channels = _channel_layout(signal_arm, idler_arm)
    if not channels:
        raise ParameterError("no detection channels configured")
    seed = int(seed)
    t_end = duration * 1e12
    step = chunk_duration * 1e12
    n_chunks = max(1, math.ceil(t_end / step - 1e-9))
    jobs = [(k, k * step, min((k + 1) * step, t_end)) for k in range(n_chunks)]

    def run(job):
        k, t0, t1 = job
        return _simulate_chunk(k, source, signal_arm, idler_arm, t0, t1, seed, channels)

    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    per_channel = {}
    for c in channels:
        arm = idler_arm if c in (APD3, APD4) else signal_arm
        t = np.concatenate([p[c] for p in parts])
        t = t[(t >= 0) & (t < t_end)]
        ticks = np.sort(np.floor(t / resolution_ps).astype(np.int64))
        dead = int(math.ceil(arm.detector.dead_time * 1e3 / resolution_ps))
        per_channel[c] = ticks[kernels.dead_time_mask(ticks, dead)]

    meta = {
        "generator": "pairlab.simulate",
        "rng": RNG_ALGORITHM,
        "numpy_version": np.__version__,
        "seed": seed,
        "duration_s": float(duration),
        "chunk_duration_s": float(chunk_duration),
        "resolution_ps": resolution_ps,
        "source": asdict(source),
        "signal_arm": asdict(signal_arm),
        "idler_arm": asdict(idler_arm),
        "channels": {CHANNEL_NAMES[c]: c for c in channels},
        "roles": {"signal": [APD1, APD2],
                  "idler": [c for c in channels if c in (APD3, APD4)]},
    }
    return TimeTagStream.from_channels(per_channel, resolution_ps, len(channels), meta)


def derive_seed(seed, index):
    """Independent, reproducible seed for grid point ``index``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def simulate_sweep(source, signal_arm, idler_arm, rate_grid, duration, seed, workers=1, **kwargs):
    """One simulation per pair generation rate R*P (pairs/s) in ``rate_grid``."""
    rate_grid = list(rate_grid)
    if not rate_grid:
        raise ParameterError("rate grid is empty")

    def run(item):
        i, rp = item
        return simulate_experiment(source.with_generation_rate(rp), signal_arm, idler_arm,
                                   duration, derive_seed(seed, i), **kwargs)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, enumerate(rate_grid)))
    return [run(item) for item in enumerate(rate_grid)]
