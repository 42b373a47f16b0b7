"""Short-time power-series analysis of exact vs. additive populations.

Expanding the memory-integral amplitude equation order by order in time
shows precisely where the additive treatment of several baths first fails:
the exact and additive excited-state populations agree through t^3 and part
company at t^4, with a coefficient gap bilinear in the two bath coupling
products.  That order-4 onset is the series fingerprint of cross-bath
interference; it survives no matter how accurately each individual bath is
treated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "PowerSeries",
    "series_amplitude",
    "additive_population_series",
    "exact_population_series",
    "interference_order",
    "InterferenceResult",
]

#: Relative tolerance used to decide whether two series coefficients differ.
COEFF_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class PowerSeries:
    """Truncated real Taylor series sum_n coeffs[n] * t**n.

    All arithmetic truncates at the smaller operand's order, so products and
    powers never fabricate coefficients beyond what the inputs determine.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float, copy=True)
        if coeffs.ndim != 1 or coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D array")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    @classmethod
    def constant(cls, value: float, order: int) -> "PowerSeries":
        coeffs = np.zeros(order + 1)
        coeffs[0] = value
        return cls(coeffs)

    def __getitem__(self, n: int) -> float:
        return float(self.coeffs[n])

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(self.coeffs[: n + 1] + other.coeffs[: n + 1])

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(self.coeffs[: n + 1] - other.coeffs[: n + 1])

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order)
        return PowerSeries(np.convolve(self.coeffs, other.coeffs)[: n + 1])

    def scaled(self, factor: float) -> "PowerSeries":
        return PowerSeries(self.coeffs * factor)

    def squared(self) -> "PowerSeries":
        return self * self

    def derivative(self) -> "PowerSeries":
        if self.order == 0:
            return PowerSeries(np.zeros(1))
        n = np.arange(1, self.coeffs.size)
        return PowerSeries(self.coeffs[1:] * n)

    def integral(self) -> "PowerSeries":
        """Antiderivative with zero constant term, truncated at this order."""
        out = np.zeros(self.coeffs.size)
        n = np.arange(1, self.coeffs.size)
        out[1:] = self.coeffs[:-1] / n
        return PowerSeries(out)

    def reciprocal(self) -> "PowerSeries":
        if self.coeffs[0] == 0.0:
            raise ZeroDivisionError("series has zero constant term")
        out = np.zeros(self.coeffs.size)
        out[0] = 1.0 / self.coeffs[0]
        for n in range(1, out.size):
            out[n] = -np.dot(self.coeffs[1 : n + 1], out[n - 1 :: -1]) / self.coeffs[0]
        return PowerSeries(out)

    def exp(self) -> "PowerSeries":
        """Series of exp(f) via the recurrence n*g_n = sum k*f_k*g_{n-k}."""
        out = np.zeros(self.coeffs.size)
        out[0] = math.exp(self.coeffs[0])
        k = np.arange(self.coeffs.size)
        for n in range(1, out.size):
            out[n] = np.dot(k[1 : n + 1] * self.coeffs[1 : n + 1], out[n - 1 :: -1]) / n
        return PowerSeries(out)

    def __call__(self, t: float) -> float:
        return float(np.polyval(self.coeffs[::-1], t))


def series_amplitude(
    kernels: Sequence[tuple[float, float]],
    order: int,
    c0: float = 1.0,
) -> PowerSeries:
    """Taylor coefficients of the excited-state amplitude c(t).

    ``kernels`` lists the exponential memory kernels as (a, width) pairs
    with k(t) = a*exp(-width*t); a Lorentzian bath has a = gamma*width/2.
    The amplitude equation dc/dt = -int_0^t k(t-s)c(s)ds turns, order by
    order, into the recurrence

        c_{n+1} = -1/(n+1) * sum_{p+q=n-1} kappa_p c_q p! q! / n!

    where kappa_p are the kernel's Taylor coefficients.  Exact in the
    inputs up to floating-point round-off.  c_1 = 0 always: the memory
    integral is empty at t = 0.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    for a, width in kernels:
        if not (math.isfinite(a) and a >= 0.0):
            raise ValueError(f"kernel amplitude must be finite and >= 0, got {a!r}")
        if not (math.isfinite(width) and width > 0.0):
            raise ValueError(f"kernel width must be finite and > 0, got {width!r}")

    kappa = np.zeros(order)
    for p in range(order):
        kappa[p] = sum(a * (-width) ** p / math.factorial(p) for a, width in kernels)

    c = np.zeros(order + 1)
    c[0] = c0
    for n in range(1, order):
        acc = 0.0
        for p in range(n):
            acc += kappa[p] * c[n - 1 - p] / (n * math.comb(n - 1, p))
        c[n + 1] = -acc / (n + 1)
    return PowerSeries(c)


def exact_population_series(
    kernels: Sequence[tuple[float, float]],
    order: int,
    c0: float = 1.0,
) -> PowerSeries:
    """Series of the exact population |c(t)|^2 with all kernels acting at once."""
    return series_amplitude(kernels, order, c0).squared()


def additive_population_series(
    kernels: Sequence[tuple[float, float]],
    order: int,
    c0: float = 1.0,
) -> PowerSeries:
    """Series of the additive population: squared product of single-bath amplitudes.

    Each kernel is solved alone and the survival factors are multiplied, the
    series analogue of summing the individual decay rates.
    """
    shape = PowerSeries.constant(1.0, order)
    for kernel in kernels:
        shape = shape * series_amplitude([kernel], order, 1.0)
    return shape.squared().scaled(c0**2)


class InterferenceResult(NamedTuple):
    """First series order where exact and additive populations part company.

    ``order`` is None when no coefficient differs up to the truncation
    (e.g. with a single active bath); ``gap`` is the exact-minus-additive
    coefficient difference at that order.
    """

    order: int | None
    gap: float


def interference_order(
    kernels: Sequence[tuple[float, float]],
    order: int = 8,
    c0: float = 1.0,
) -> InterferenceResult:
    """Locate the lowest order at which bath interference shows up.

    Compares the exact and additive population series coefficient by
    coefficient; a difference counts when it exceeds ``COEFF_RTOL`` relative
    to the larger coefficient magnitude.  With two active exponential
    kernels the answer is order 4 and the gap is bilinear in the coupling
    products; with at most one active kernel the series agree identically.
    """
    if order < 6:
        raise ValueError("order must be >= 6 to resolve the fourth-order gap")
    exact = exact_population_series(kernels, order, c0)
    additive = additive_population_series(kernels, order, c0)
    for n in range(order + 1):
        diff = exact[n] - additive[n]
        scale = max(abs(exact[n]), abs(additive[n]))
        if abs(diff) > COEFF_RTOL * scale:
            return InterferenceResult(n, diff)
    return InterferenceResult(None, 0.0)
