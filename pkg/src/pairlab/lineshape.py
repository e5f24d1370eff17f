"""Lineshapes and correlation functions of narrow-band photon pairs.

Units: frequencies in MHz (etalon FSR in GHz), times in ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import ParameterError

# Detector-pair timing jitter as measured on the HBT detectors (FWHM, ns).
PAIR_JITTER_FWHM_NS = 1.72
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

SOURCE_FWHM_MHZ = 226.0
ETALON_FSR_GHZ = 12.8
ETALON_FWHM_MHZ = 274.0

QUAD_EPSREL = 1e-10


def _positive(name, value):
    if not np.all(np.asarray(value) > 0):
        raise ParameterError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class SpectralLine:
    """A Lorentzian line: ``center`` detuning and ``fwhm`` in MHz."""

    center: float
    fwhm: float

    def __post_init__(self):
        if not math.isfinite(self.center):
            raise ParameterError("line center must be finite")
        _positive("fwhm", self.fwhm)


@dataclass(frozen=True)
class EtalonSpec:
    fsr: float  # GHz
    fwhm: float  # MHz

    def __post_init__(self):
        # finesse below 1 is allowed so the transparent limit can be approached
        _positive("fsr", self.fsr)
        _positive("fwhm", self.fwhm)

    @property
    def finesse(self):
        return self.fsr * 1e3 / self.fwhm


@dataclass(frozen=True)
class IrfSpec:
    """Gaussian instrument response of a detector pair, ``sigma`` in ns."""

    sigma: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ParameterError(f"IRF sigma must be >= 0, got {self.sigma!r}")

    @classmethod
    def from_fwhm(cls, fwhm):
        return cls(fwhm / FWHM_PER_SIGMA)

    @property
    def fwhm(self):
        return self.sigma * FWHM_PER_SIGMA


DEFAULT_IRF = IrfSpec.from_fwhm(PAIR_JITTER_FWHM_NS)


def lorentzian_weight(detuning, fwhm):
    """Peak-normalized Lorentzian, 1 at zero detuning."""
    _positive("fwhm", fwhm)
    x = 2.0 * np.asarray(detuning, dtype=float) / fwhm
    out = 1.0 / (1.0 + x * x)
    return float(out) if out.ndim == 0 else out


def coherence_time(fwhm):
    """Coherence time (ns) of Lorentzian light with the given FWHM (MHz)."""
    _positive("fwhm", fwhm)
    return 1e3 / (math.pi * fwhm)


def product_line_fwhm(fwhm_a, fwhm_b):
    """FWHM of the product of two co-centered Lorentzians.

    Solves x**2 + (a**2 + b**2) x - a**2 b**2 = 0 for the squared half
    width, with a and b the two half widths.
    """
    _positive("fwhm_a", fwhm_a)
    _positive("fwhm_b", fwhm_b)
    a2 = (fwhm_a / 2.0) ** 2
    b2 = (fwhm_b / 2.0) ** 2
    s = a2 + b2
    # numerically stable form of (-s + sqrt(s^2 + 4 a2 b2)) / 2
    x = 2.0 * a2 * b2 / (s + math.sqrt(s * s + 4.0 * a2 * b2))
    return 2.0 * math.sqrt(x)


def ideal_thermal_autocorr(tau, tau0):
    """g2 of single-mode thermal light, 1 + exp(-2|tau|/tau0)."""
    _positive("tau0", tau0)
    out = 1.0 + np.exp(-2.0 * np.abs(np.asarray(tau, dtype=float)) / tau0)
    return float(out) if out.ndim == 0 else out


def multimode_autocorr_peak(n_modes):
    if int(n_modes) != n_modes or n_modes < 1:
        raise ParameterError(f"n_modes must be a positive integer, got {n_modes!r}")
    return 1.0 + 1.0 / n_modes


def _convolved_bunching(tau, tau0, sigma):
    """exp(-2|tau|/tau0) convolved with a unit-area Gaussian of width sigma."""
    tau = np.asarray(tau, dtype=float)
    if sigma == 0:
        return np.exp(-2.0 * np.abs(tau) / tau0)
    a = 2.0 / tau0
    r2s = math.sqrt(2.0) * sigma

    def one_side(t):
        # exp(a^2 s^2/2 - a t) * erfc((a s^2 - t)/(sqrt2 s)), evaluated without overflow
        z = (a * sigma * sigma - t) / r2s
        with np.errstate(over="ignore", under="ignore"):
            safe = np.exp(-t * t / (2.0 * sigma * sigma)) * special.erfcx(np.maximum(z, 0.0))
            direct = np.exp(a * a * sigma * sigma / 2.0 - a * t) * special.erfc(np.minimum(z, 0.0))
        return np.where(z >= 0, safe, direct)

    return 0.5 * (one_side(tau) + one_side(-tau))


def irf_convolved_autocorr(tau, tau0, irf=DEFAULT_IRF):
    """Thermal autocorrelation as seen through a Gaussian timing response."""
    _positive("tau0", tau0)
    out = 1.0 + _convolved_bunching(tau, tau0, irf.sigma)
    return float(out) if out.ndim == 0 else out


def window_averaged_g2(tau0, irf, half_window):
    """Mean of the IRF-convolved g2 over [-half_window, +half_window]."""
    _positive("tau0", tau0)
    _positive("half_window", half_window)
    if math.isinf(half_window):
        return 1.0
    if irf.sigma == 0:
        area = tau0 * (1.0 - math.exp(-2.0 * half_window / tau0))
        return 1.0 + area / (2.0 * half_window)
    f = lambda t: float(_convolved_bunching(t, tau0, irf.sigma))
    # integrand is even; split at the scales where it changes shape
    scale = max(tau0, irf.sigma)
    breaks = [b for b in (scale, 5 * scale) if b < half_window]
    area, _ = integrate.quad(f, 0.0, half_window, points=breaks or None,
                             epsabs=0.0, epsrel=QUAD_EPSREL, limit=200)
    return 1.0 + area / half_window


def airy_transmission(detuning, etalon):
    """Peak-normalized etalon transmission at ``detuning`` (MHz)."""
    if not isinstance(etalon, EtalonSpec):
        raise ParameterError("etalon must be an EtalonSpec")
    coeff = (2.0 * etalon.finesse / math.pi) ** 2
    s = np.sin(math.pi * np.asarray(detuning, dtype=float) / (etalon.fsr * 1e3))
    out = 1.0 / (1.0 + coeff * s * s)
    return float(out) if out.ndim == 0 else out


def filtered_fraction(source, etalon, half_window):
    """Share of a source line inside +/-half_window (MHz) that passes the etalon.

    The etalon is taken to be centered on the source line.
    """
    _positive("half_window", half_window)
    if not isinstance(source, SpectralLine):
        raise ParameterError("source must be a SpectralLine")
    airy_transmission(0.0, etalon)  # validates etalon
    lor = lambda d: lorentzian_weight(d, source.fwhm)
    num, _ = integrate.quad(lambda d: lor(d) * airy_transmission(d, etalon),
                            0.0, half_window, epsabs=0.0, epsrel=1e-9, limit=200)
    g = source.fwhm / 2.0
    den = g * math.atan(half_window / g)
    return min(1.0, num / den)
