"""Exact and additive dynamics of an emitter coupled to two independent baths.

A single excitation shared between a two-level emitter and two structured
photonic vacua admits a closed solution: the excited-state amplitude obeys

    dc/dt = - int_0^t [k1(t-s) + k2(t-s)] c(s) ds,          c(0) = c0,

and for Lorentzian kernels the Laplace transform is rational, so c(t) is a
sum of three exponentials whose rates are the roots of a cubic.  The additive
approximation instead multiplies the two single-bath survival factors, which
is equivalent to summing the two single-bath decay rates.  This module
provides both routes plus a direct numerical solver for the memory integral
equation, which serves as an independent cross-check and handles arbitrary
kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .baths import (
    BathParams,
    KernelSpec,
    LorentzianExponential,
    MarkovianDelta,
    kernel_values,
    kernel_zero_value,
    single_bath_amplitude,
)
from .errors import DegenerateRootsError, PoleError, StabilityError

__all__ = [
    "TwoBathModel",
    "CubicRoots",
    "AmplitudeTrajectory",
    "characteristic_roots",
    "exact_amplitude",
    "exact_decay_rate",
    "volterra_solve",
    "additive_population",
    "exact_population",
    "additivity_error",
]

#: Pairwise root separations below this fraction of the root scale are
#: treated as degenerate (the partial-fraction amplitude becomes singular).
ROOT_DEGENERACY_RTOL = 1e-8

#: Residual bound for polished roots, relative to the largest cubic
#: coefficient magnitude.
ROOT_RESIDUAL_RTOL = 1e-10


@dataclass(frozen=True)
class TwoBathModel:
    """Two independent reservoirs plus the initial excited amplitude."""

    bath1: BathParams
    bath2: BathParams
    c0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.c0) and 0.0 < self.c0 <= 1.0):
            raise ValueError(f"c0 must lie in (0, 1], got {self.c0!r}")


@dataclass(frozen=True)
class CubicRoots:
    """Roots of the characteristic cubic, sorted by (real, imag)."""

    s1: complex
    s2: complex
    s3: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.s1, self.s2, self.s3], dtype=complex)


@dataclass(frozen=True, eq=False)
class AmplitudeTrajectory:
    """Time grid plus the complex excited-state amplitude on it."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float, copy=True)
        values = np.array(self.values, dtype=complex, copy=True)
        if times.ndim != 1 or values.ndim != 1 or times.size != values.size:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if times.size < 1 or times[0] != 0.0:
            raise ValueError("trajectory must start at t = 0")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise ValueError("times must be strictly increasing")
        times.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def population(self) -> np.ndarray:
        """Excited-state population |c(t)|^2."""
        return np.abs(self.values) ** 2


def _cubic_coefficients(m: TwoBathModel) -> np.ndarray:
    """Monic coefficients [1, a2, a1, a0] of the characteristic cubic.

    p(s) = s(s+w1)(s+w2) + g1*w1*(s+w2)/2 + g2*w2*(s+w1)/2 with
    w = width, g = gamma.
    """
    g1, w1 = m.bath1.gamma, m.bath1.width
    g2, w2 = m.bath2.gamma, m.bath2.width
    return np.array(
        [
            1.0,
            w1 + w2,
            w1 * w2 + 0.5 * (g1 * w1 + g2 * w2),
            0.5 * w1 * w2 * (g1 + g2),
        ]
    )


def _eval_cubic(coeffs: np.ndarray, s: complex) -> complex:
    a3, a2, a1, a0 = coeffs
    return ((a3 * s + a2) * s + a1) * s + a0


def _cardano(coeffs: np.ndarray) -> list[complex]:
    # Closed-form roots of a real monic cubic via the depressed form
    # x^3 + p x + q; the conjugate-pair structure is restored explicitly
    # afterwards since floating-point cube roots break it slightly.
    _, a2, a1, a0 = coeffs
    p = a1 - a2**2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (0.5 * q) ** 2 + (p / 3.0) ** 3
    sq = complex(np.sqrt(complex(disc)))
    u3 = -0.5 * q + sq
    if abs(u3) < abs(-0.5 * q - sq):
        u3 = -0.5 * q - sq
    if u3 == 0:
        xs = [0.0 + 0.0j] * 3  # triple root of the depressed cubic
    else:
        u = u3 ** (1.0 / 3.0)
        omega = complex(-0.5, 0.5 * math.sqrt(3.0))
        xs = []
        for k in range(3):
            uk = u * omega**k
            xs.append(uk - p / (3.0 * uk))
    roots = [x - a2 / 3.0 for x in xs]

    scale = max(max(abs(r) for r in roots), 1e-300)
    if disc > 0:
        # One real root and a conjugate pair.
        roots.sort(key=lambda z: abs(z.imag))
        real_root = complex(roots[0].real, 0.0)
        pair = 0.5 * (roots[1] + roots[2].conjugate())
        roots = [real_root, pair, pair.conjugate()]
    elif disc < 0:
        roots = [complex(r.real, 0.0) for r in roots]
    else:
        # Discriminant zero: repeated real roots; flagged downstream.
        roots = [complex(r.real, 0.0) if abs(r.imag) < 1e-9 * scale else r for r in roots]
    return roots


def _polish(coeffs: np.ndarray, s: complex) -> complex:
    a3, a2, a1, _ = coeffs
    deriv = (3.0 * a3 * s + 2.0 * a2) * s + a1
    if deriv == 0:
        return s
    return s - _eval_cubic(coeffs, s) / deriv


def characteristic_roots(m: TwoBathModel) -> CubicRoots:
    """Roots of the characteristic cubic of the two-bath amplitude.

    Solved by Cardano's closed form with one Newton polish step per root,
    then ordered by (real part, imaginary part) so downstream output is
    byte-stable.

    Raises
    ------
    DegenerateRootsError
        When two roots coincide to within ``ROOT_DEGENERACY_RTOL`` of the
        root scale; callers should fall back to :func:`volterra_solve`.
    """
    coeffs = _cubic_coefficients(m)
    roots = _cardano(coeffs)
    polished = []
    for r in roots:
        r = _polish(coeffs, r)
        if abs(r.imag) == 0.0:
            r = complex(r.real, 0.0)
        polished.append(r)
    # Re-pair conjugates after polishing (polish acts per root).
    imag_roots = [r for r in polished if r.imag != 0.0]
    if len(imag_roots) == 2:
        pair = 0.5 * (imag_roots[0] + imag_roots[1].conjugate())
        real_roots = [r for r in polished if r.imag == 0.0]
        polished = real_roots + [pair, pair.conjugate()]

    polished.sort(key=lambda z: (z.real, z.imag))
    scale = max(max(abs(r) for r in polished), 1e-300)
    residual_bound = ROOT_RESIDUAL_RTOL * float(np.max(np.abs(coeffs)))
    for r in polished:
        if abs(_eval_cubic(coeffs, r)) > residual_bound:
            raise ArithmeticError(
                f"cubic root residual {abs(_eval_cubic(coeffs, r)):.3e} exceeds "
                f"{residual_bound:.3e}; coefficients {coeffs}"
            )
    sep = min(
        abs(polished[0] - polished[1]),
        abs(polished[0] - polished[2]),
        abs(polished[1] - polished[2]),
    )
    if sep < ROOT_DEGENERACY_RTOL * scale:
        raise DegenerateRootsError(polished, sep, scale)
    return CubicRoots(*polished)


def _root_weights(m: TwoBathModel, roots: CubicRoots) -> tuple[np.ndarray, np.ndarray]:
    """Partial-fraction weights of the three exponentials in c(t).

    w_i = (s_i + w1)(s_i + w2) / prod_{j != i} (s_i - s_j), normalized to
    sum to one so c(0) = c0 holds exactly.  Symmetric under any root
    permutation.
    """
    s = roots.as_array()
    sep = np.array(
        [abs(s[0] - s[1]), abs(s[0] - s[2]), abs(s[1] - s[2])]
    )
    scale = max(float(np.max(np.abs(s))), 1e-300)
    if float(sep.min()) < ROOT_DEGENERACY_RTOL * scale:
        raise DegenerateRootsError(s, float(sep.min()), scale)
    w1, w2 = m.bath1.width, m.bath2.width
    weights = np.empty(3, dtype=complex)
    for i in range(3):
        others = [s[j] for j in range(3) if j != i]
        weights[i] = (s[i] + w1) * (s[i] + w2) / ((s[i] - others[0]) * (s[i] - others[1]))
    weights /= weights.sum()
    return s, weights


def exact_amplitude(m: TwoBathModel, roots: CubicRoots, t):
    """Exact excited-state amplitude c(t) from the characteristic roots.

    Accepts scalar or array ``t >= 0``; returns complex values normalized so
    c(0) = c0 exactly.  Rejects (near-)degenerate roots; use
    :func:`volterra_solve` for those measure-zero parameter sets.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    s, weights = _root_weights(m, roots)
    out = m.c0 * (np.exp(np.multiply.outer(t, s)) @ weights)
    return out if out.ndim else complex(out)


def exact_decay_rate(
    m: TwoBathModel,
    roots: CubicRoots,
    t: float,
    *,
    pole_tol: float = 1e-12,
) -> float:
    """Exact two-bath decay rate Gamma(t) = -2 Re[c'(t)/c(t)].

    Mixes the parameters of both baths through the shared characteristic
    roots; in general negative on part of each oscillation and divergent at
    amplitude zeros, where :class:`~multibath.errors.PoleError` is raised
    (denominator below ``pole_tol`` times its t=0 value).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    s, weights = _root_weights(m, roots)
    phases = np.exp(s * t) * weights
    den = phases.sum()  # equals c(t)/c0; den(0) = 1
    if abs(den) < pole_tol:
        raise PoleError(t, abs(den), pole_tol)
    num = (s * phases).sum()
    return float(-2.0 * (num / den).real)


def _validate_uniform_grid(times: np.ndarray) -> float:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("grid must be a 1-D array with at least two points")
    if times[0] != 0.0:
        raise ValueError("grid must start at t = 0")
    steps = np.diff(times)
    h = float(steps[0])
    if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise ValueError("grid must be uniform with positive step")
    return h


def volterra_solve(
    kernels: list[KernelSpec],
    c0: float,
    times: np.ndarray,
    *,
    block_size: int = 8192,
) -> AmplitudeTrajectory:
    """Second-order numeric solution of the memory-integral amplitude equation.

    Integrates dc/dt = -sum_i int_0^t k_i(t-s) c(s) ds on a uniform grid with
    an explicit predictor plus one trapezoidal corrector per step.  The
    running convolution is evaluated exactly as the trapezoidal rule
    prescribes; contributions of history older than the current block are
    accumulated with FFT convolutions so long grids stay fast.  Any number
    of kernels is accepted, including tabulated ones; ``MarkovianDelta``
    kernels contribute an instantaneous ``rate * c(t)`` term.

    Raises
    ------
    StabilityError
        If ``h * sum_i |k_i(0)|`` exceeds 0.1 (step too coarse for the
        summed kernel's initial curvature).
    """
    times = np.asarray(times, dtype=float)
    h = _validate_uniform_grid(times)
    n = times.size

    delta_rate = sum(k.rate for k in kernels if isinstance(k, MarkovianDelta))
    smooth = [k for k in kernels if not isinstance(k, MarkovianDelta)]
    if smooth:
        kv = np.sum([kernel_values(k, times) for k in smooth], axis=0)
        k0_sum = sum(abs(kernel_zero_value(k)) for k in smooth)
        if h * k0_sum > 0.1:
            raise StabilityError(
                f"h*|k(0)| = {h * k0_sum:.3e} > 0.1; refine the grid "
                f"(h = {h:.3e}, summed |k(0)| = {k0_sum:.3e})"
            )
    else:
        kv = np.zeros(n, dtype=complex)

    if np.all(kv.imag == 0.0):
        kv = np.ascontiguousarray(kv.real)
        c = np.zeros(n, dtype=float)
    else:
        c = np.zeros(n, dtype=complex)
    c[0] = c0
    # kv reversed keeps the recent-history dot on two contiguous ascending
    # slices (no per-step reversal copies).
    kv_rev = np.ascontiguousarray(kv[::-1])
    kv_list = kv.tolist()
    kv0 = kv_list[0]
    half_h = 0.5 * h

    f_prev = -delta_rate * c0  # dc/dt at t=0: the memory integral is empty
    c_prev = c0
    for b0 in range(0, n - 1, block_size):
        b1 = min(b0 + block_size, n - 1)
        # History older than this block, summed for every target index in it:
        # tail[j - (b0+1)] = sum_{m=1}^{b0-1} kv[j-m] c[m].
        if b0 >= 2:
            conv = fftconvolve(c[1:b0], kv[: b1 + 1])
            tail = conv[b0:b1].tolist()
        else:
            tail = [0.0] * (b1 - b0)
        lo = max(1, b0)
        for step, j in enumerate(range(b0 + 1, b1 + 1)):
            # recent = sum_{m=lo}^{j-1} kv[j-m] c[m]
            recent = np.dot(kv_rev[n - 1 - j + lo : n - 1], c[lo:j]) if j > lo else 0.0
            base = h * (0.5 * kv_list[j] * c0 + tail[step] + recent)
            c_pred = c_prev + h * f_prev
            f_pred = -(base + half_h * kv0 * c_pred) - delta_rate * c_pred
            c_new = c_prev + half_h * (f_prev + f_pred)
            c[j] = c_new
            f_prev = -(base + half_h * kv0 * c_new) - delta_rate * c_new
            c_prev = c_new

    return AmplitudeTrajectory(times, c.astype(complex, copy=False))


def additive_population(m: TwoBathModel, t):
    """Excited-state population under the additive (summed-rate) treatment.

    Equals c0^2 * (c1(t)/c0)^2 * (c2(t)/c0)^2 with c_i the single-bath
    amplitude of bath i alone, which coincides with
    exp(-int_0^t [Gamma1 + Gamma2]) rho(0) wherever the rate integral exists
    and remains finite across the rate poles.
    """
    shape1 = single_bath_amplitude(m.bath1, t)
    shape2 = single_bath_amplitude(m.bath2, t)
    return m.c0**2 * (shape1 * shape2) ** 2


def _fallback_grid(m: TwoBathModel, t_max: float) -> np.ndarray:
    # Resolution tied to the fastest kernel scale and the vacuum Rabi
    # frequency of the summed kernel.
    osc = math.sqrt(
        0.5 * (m.bath1.gamma * m.bath1.width + m.bath2.gamma * m.bath2.width)
    )
    rate = max(m.bath1.width, m.bath2.width, osc, 1.0 / max(t_max, 1e-300))
    n = int(min(max(math.ceil(40.0 * rate * t_max), 2000), 200_000))
    return np.linspace(0.0, t_max, n + 1)


def exact_population(m: TwoBathModel, t):
    """Exact excited-state population |c(t)|^2, in [0, c0^2].

    Uses the closed-form amplitude; parameter sets with degenerate
    characteristic roots (a measure-zero family) fall back to
    :func:`volterra_solve` on an internally refined grid.
    """
    t_arr = np.asarray(t, dtype=float)
    try:
        roots = characteristic_roots(m)
        amp = exact_amplitude(m, roots, t_arr)
        out = np.abs(np.asarray(amp)) ** 2
    except DegenerateRootsError:
        t_max = float(t_arr.max()) if t_arr.size else 0.0
        if t_max == 0.0:
            out = np.full(t_arr.shape, m.c0**2)
        else:
            kernels = [LorentzianExponential(m.bath1), LorentzianExponential(m.bath2)]
            traj = volterra_solve(kernels, m.c0, _fallback_grid(m, t_max))
            out = np.interp(t_arr, traj.times, traj.population())
    return out if out.ndim else float(out)


def additivity_error(m: TwoBathModel, times: np.ndarray) -> np.ndarray:
    """Pointwise error exact_population - additive_population on ``times``."""
    times = np.asarray(times, dtype=float)
    return exact_population(m, times) - additive_population(m, times)
