"""Emission clusters of a doubly resonant OPO and its tuning/drift models.

Detunings of comb lines are in GHz, linewidths and comb offsets in MHz.
The idler comb is described in signal-detuning coordinates: an idler
resonance at ``offset_i + n*fsr_i`` is energy-matched to a signal photon
at that detuning, so equal offsets mean perfectly aligned combs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .lineshape import lorentzian_weight

RB_D1_NM = 794.979
SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class CombSpec:
    fsr_s: float = 16.0  # GHz
    fsr_i: float = 15.0  # GHz
    linewidth_s: float = 16e3 / 36  # MHz, finesse 36
    linewidth_i: float = 16e3 / 36  # MHz
    offset_s: float = 0.0  # MHz
    offset_i: float = 0.0  # MHz
    offset_i2: float | None = None  # MHz, optional second idler mode family
    pulling: float = 0.0  # fraction of the mismatch by which a line moves toward its idler partner

    def __post_init__(self):
        if not (self.fsr_s > 0 and self.fsr_i > 0):
            raise ParameterError("free spectral ranges must be > 0")
        if not (self.linewidth_s > 0 and self.linewidth_i > 0):
            raise ParameterError("linewidths must be > 0")
        if not 0 <= self.pulling <= 1:
            raise ParameterError("pulling must lie in [0, 1]")

    @property
    def degenerate(self):
        return self.fsr_s == self.fsr_i


@dataclass(frozen=True)
class ClusterLine:
    detuning: float  # GHz
    weight: float


def _nearest_mode(x, offset, fsr):
    """Signed distance from x to the closest comb mode offset + n*fsr."""
    return x - (offset + fsr * np.round((x - offset) / fsr))


def emission_lines(comb, span):
    """Signal comb lines within +/-span GHz weighted by their idler overlap."""
    if not span > 0:
        raise ParameterError("span must be > 0")
    if comb.degenerate:
        warnings.warn("signal and idler FSR are equal: every comb line is doubly resonant",
                      RuntimeWarning, stacklevel=2)
    off_s = comb.offset_s * 1e-3
    m = np.arange(math.ceil((-span - off_s) / comb.fsr_s), math.floor((span - off_s) / comb.fsr_s) + 1)
    nu = off_s + m * comb.fsr_s
    families = [comb.offset_i] + ([comb.offset_i2] if comb.offset_i2 is not None else [])
    lines = []
    for off_i in families:
        mismatch = _nearest_mode(nu, off_i * 1e-3, comb.fsr_i)
        w = lorentzian_weight(mismatch * 1e3, comb.linewidth_i)
        pos = nu - comb.pulling * mismatch
        lines.extend(ClusterLine(float(d), float(x)) for d, x in zip(np.atleast_1d(pos), np.atleast_1d(w)))
    lines.sort(key=lambda l: l.detuning)
    return lines


def cluster_spacing(fsr_s, fsr_i):
    """Detuning period (GHz) after which the two combs realign."""
    if fsr_s == fsr_i:
        raise ParameterError("equal free spectral ranges: clusters are degenerate")
    if not (fsr_s > 0 and fsr_i > 0):
        raise ParameterError("free spectral ranges must be > 0")
    return fsr_s * fsr_i / abs(fsr_s - fsr_i)


def ghz_to_nm(delta_ghz, wavelength_nm=RB_D1_NM):
    """Wavelength interval corresponding to a frequency interval at ``wavelength_nm``."""
    nu = SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
    return wavelength_nm * delta_ghz * 1e9 / nu


def nm_to_ghz(delta_nm, wavelength_nm=RB_D1_NM):
    nu = SPEED_OF_LIGHT / (wavelength_nm * 1e-9)
    return nu * delta_nm / wavelength_nm * 1e-9


def central_fraction(lines, window=math.inf):
    """Weight of the line closest to zero detuning over the total within +/-window/2."""
    if not lines:
        raise ParameterError("empty line list")
    inside = [l for l in lines if abs(l.detuning) <= window / 2]
    central = min(lines, key=lambda l: abs(l.detuning))
    total = sum(l.weight for l in inside)
    if total <= 0 or central not in inside:
        raise ParameterError("window contains no emission")
    return central.weight / total


def strain_detuning(voltage, contact_voltage=20.0, slope=0.025, max_range=3.0):
    """Piezo strain tuning (GHz): flat until contact, then linear, capped at max_range."""
    dv = np.maximum(np.asarray(voltage, dtype=float) - contact_voltage, 0.0)
    shift = np.clip(slope * dv, -abs(max_range), abs(max_range))
    return float(shift) if shift.ndim == 0 else shift


def drift_detuning(elapsed, rate=10.0):
    """Free-running frequency drift (MHz) after ``elapsed`` hours at ``rate`` MHz/h."""
    elapsed = np.asarray(elapsed, dtype=float)
    if (elapsed < 0).any():
        raise ParameterError("elapsed time must be >= 0")
    out = rate * elapsed
    return float(out) if out.ndim == 0 else out


def drift_trace(hours, rate=10.0, step=5.0, bound=None, seed=0):
    """Linear drift plus a random walk with ``step`` MHz per sample.

    With ``bound`` set, the random part is reflected into +/-bound MHz.
    """
    hours = np.asarray(hours, dtype=float)
    if (hours < 0).any() or (np.diff(hours) < 0).any():
        raise ParameterError("hours must be non-negative and increasing")
    rng = np.random.default_rng(seed)
    walk = np.concatenate(([0.0], np.cumsum(rng.normal(0.0, step, len(hours) - 1))))
    if bound is not None:
        period = 4.0 * bound
        walk = bound - np.abs((walk + bound) % period - 2 * bound)
    return rate * hours + walk
