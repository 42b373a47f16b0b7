"""Reservoir parameterizations, memory kernels, and single-bath decay rates.

A structured photonic reservoir is described here by a Lorentzian spectral
density

    J(omega) = gamma * width**2 / (2*pi*((center - omega)**2 + width**2)),

whose resonant memory kernel is the decaying exponential

    k(t) = gamma * width * exp(-width*|t|) / 2.

``width`` is the inverse memory time: width -> infinity flattens the
spectrum and recovers a Markovian bath, while small ``width`` produces long
memory and vacuum Rabi oscillation.  All quantities use angular-frequency
(inverse-time) units with hbar = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import PoleError

__all__ = [
    "BathParams",
    "LorentzianExponential",
    "ConstantUnit",
    "MarkovianDelta",
    "Tabulated",
    "KernelSpec",
    "spectral_density",
    "memory_kernel",
    "single_bath_decay_rate",
    "single_bath_amplitude",
    "kernel_values",
    "kernel_zero_value",
]

#: Default relative tolerance below which a decay-rate denominator is
#: reported as a pole.  Measured against the denominator's t=0 scale.
DEFAULT_POLE_TOL = 1e-12


@dataclass(frozen=True)
class BathParams:
    """One reservoir's Lorentzian spectral parameters.

    Parameters
    ----------
    gamma : float
        Decay-rate scale (inverse time), >= 0.
    width : float
        Spectral width (inverse memory time), > 0.
    center : float, optional
        Peak angular frequency of the spectral density.  Stored for
        bookkeeping; the resonant kernel and decay rate do not depend
        on it.
    """

    gamma: float
    width: float
    center: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0.0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma!r}")
        if not (math.isfinite(self.width) and self.width > 0.0):
            raise ValueError(f"width must be finite and > 0, got {self.width!r}")
        if not math.isfinite(self.center):
            raise ValueError(f"center must be finite, got {self.center!r}")


@dataclass(frozen=True)
class LorentzianExponential:
    """Kernel k(t) = gamma*width*exp(-width*|t|)/2 of a Lorentzian bath."""

    bath: BathParams


@dataclass(frozen=True)
class ConstantUnit:
    """Flat unit kernel K(t) = 1 (infinitely long memory)."""


@dataclass(frozen=True)
class MarkovianDelta:
    """Zero-memory kernel k(t) = rate * delta(t).

    The delta carries its full mass inside a memory integral even when it
    sits at the integration boundary: ``int_0^t rate*delta(t-s) f(s) ds``
    evaluates to ``rate * f(t)``.
    """

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise ValueError(f"rate must be finite and > 0, got {self.rate!r}")


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Kernel sampled on a time grid; linearly interpolated in between."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True)
        values = np.array(self.values, dtype=complex, copy=True)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if times.size < 2:
            raise ValueError("tabulated kernel needs at least two samples")
        if times[0] != 0.0:
            raise ValueError("tabulated kernel times must start at 0")
        if not np.all(np.diff(times) > 0):
            raise ValueError("tabulated kernel times must be strictly increasing")
        if not (np.all(np.isfinite(times)) and np.all(np.isfinite(values))):
            raise ValueError("tabulated kernel samples must be finite")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


KernelSpec = Union[LorentzianExponential, ConstantUnit, MarkovianDelta, Tabulated]


def spectral_density(bath: BathParams, omega):
    """Lorentzian spectral density J(omega) of ``bath``.

    Strictly positive and symmetric about ``bath.center``; its integral over
    the whole frequency axis is gamma*width/2.  Accepts scalar or array
    ``omega``.
    """
    omega = np.asarray(omega, dtype=float)
    detuning = bath.center - omega
    out = bath.gamma * bath.width**2 / (2.0 * np.pi * (detuning**2 + bath.width**2))
    return out if out.ndim else float(out)


def memory_kernel(bath: BathParams, t):
    """Memory kernel k(t) = gamma*width*exp(-width*|t|)/2.

    The Fourier transform of :func:`spectral_density` evaluated at the
    resonant frequency; real-valued and even in ``t``, returned as complex
    for interface uniformity with general kernels.
    """
    t = np.asarray(t, dtype=float)
    out = (0.5 * bath.gamma * bath.width) * np.exp(-bath.width * np.abs(t)) + 0.0j
    return out if out.ndim else complex(out)


def _damping_root(bath: BathParams) -> complex:
    # d = sqrt(width^2 - 2*gamma*width), kept complex so width < 2*gamma
    # (underdamped) needs no separate code path.
    return complex(np.sqrt(complex(bath.width**2 - 2.0 * bath.gamma * bath.width)))


def _scaled_cosh_sinhc(x, shift):
    """Return (cosh(x)*e^-shift, sinh(x)/x*e^-shift) without overflow.

    ``shift`` >= Re(x) >= 0 is folded into the exponentials so large real
    arguments never overflow; sinh(x)/x switches to its Taylor form for
    |x| small, where the exponential difference would cancel.
    """
    x = np.asarray(x, dtype=complex)
    ep = np.exp(x - shift)
    em = np.exp(-x - shift)
    cosh = 0.5 * (ep + em)
    small = np.abs(x) < 1e-5
    with np.errstate(invalid="ignore", divide="ignore"):
        sinhc = np.where(small, 1.0, 0.5 * (ep - em) / np.where(small, 1.0, x))
    if np.any(small):
        xs = np.where(small, x, 0.0)
        series = np.exp(np.asarray(-shift, dtype=complex)) * (1.0 + xs**2 / 6.0 + xs**4 / 120.0)
        sinhc = np.where(small, series, sinhc)
    return cosh, sinhc


def single_bath_amplitude(bath: BathParams, t, c0: float = 1.0):
    """Excited-state amplitude of an emitter coupled to one Lorentzian bath.

    Closed form c(t) = c0*e^{-width*t/2}[cosh(d*t/2) + (width/d)*sinh(d*t/2)]
    with d = sqrt(width^2 - 2*gamma*width), evaluated in an overflow-safe
    arrangement valid across the damping regimes, including d -> 0.
    The amplitude is real for real ``c0``; accepts scalar or array ``t >= 0``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    d = _damping_root(bath)
    x = 0.5 * d * t
    cosh, sinhc = _scaled_cosh_sinhc(x, 0.5 * bath.width * t)
    out = (c0 * (cosh + (0.5 * bath.width * t) * sinhc)).real
    return out if out.ndim else float(out)


def single_bath_decay_rate(bath: BathParams, t: float, *, pole_tol: float = DEFAULT_POLE_TOL) -> float:
    """Time-dependent decay rate of a single Lorentzian bath.

    Gamma(t) = 2*gamma*width*sinh(d*t/2) / [d*cosh(d*t/2) + width*sinh(d*t/2)]
    with d = sqrt(width^2 - 2*gamma*width) taken in complex arithmetic.  The
    result is real; it can be negative, and it diverges at zeros of the
    single-bath amplitude.

    Raises
    ------
    PoleError
        When the denominator magnitude falls below ``pole_tol`` times its
        t=0 scale, i.e. the amplitude crosses zero at ``t``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    d = _damping_root(bath)
    x = 0.5 * d * t
    shift = abs(x.real)
    cosh, sinhc = _scaled_cosh_sinhc(x, shift)
    # Dividing the textbook numerator and denominator by d removes the 0/0
    # at critical damping: Gamma = 2*gamma*width*(t/2)*S / (C + width*(t/2)*S).
    half_t = 0.5 * t
    den = complex(cosh + bath.width * half_t * sinhc)
    # den carries a factor e^-shift; den(0) = 1, so the t=0 scale is e^-shift.
    if abs(den) < pole_tol * math.exp(-shift):
        raise PoleError(t, abs(den) * math.exp(shift), pole_tol)
    value = 2.0 * bath.gamma * bath.width * half_t * complex(sinhc) / den
    return float(value.real)


def kernel_values(kernel: KernelSpec, times: np.ndarray) -> np.ndarray:
    """Evaluate a kernel on a time grid (complex array).

    ``MarkovianDelta`` has no pointwise values; solvers treat it as an
    instantaneous term instead.
    """
    times = np.asarray(times, dtype=float)
    if isinstance(kernel, LorentzianExponential):
        return np.asarray(memory_kernel(kernel.bath, times))
    if isinstance(kernel, ConstantUnit):
        return np.ones(times.shape, dtype=complex)
    if isinstance(kernel, Tabulated):
        if times.size and (times[0] < kernel.times[0] or times[-1] > kernel.times[-1]):
            raise ValueError(
                f"tabulated kernel covers [{kernel.times[0]}, {kernel.times[-1]}] "
                f"but values were requested on [{times[0]}, {times[-1]}]"
            )
        re = np.interp(times, kernel.times, kernel.values.real)
        im = np.interp(times, kernel.times, kernel.values.imag)
        return re + 1j * im
    if isinstance(kernel, MarkovianDelta):
        raise TypeError("a MarkovianDelta kernel has no pointwise values")
    raise TypeError(f"unknown kernel specification: {kernel!r}")


def kernel_zero_value(kernel: KernelSpec) -> complex:
    """k(0) for kernels with pointwise values (used by step-size guards)."""
    if isinstance(kernel, LorentzianExponential):
        return complex(0.5 * kernel.bath.gamma * kernel.bath.width)
    if isinstance(kernel, ConstantUnit):
        return 1.0 + 0.0j
    if isinstance(kernel, Tabulated):
        return complex(kernel.values[0])
    if isinstance(kernel, MarkovianDelta):
        raise TypeError("a MarkovianDelta kernel has no pointwise values")
    raise TypeError(f"unknown kernel specification: {kernel!r}")
