"""Exception types shared across the package."""


class MultibathError(Exception):
    """Base class for all package-specific errors."""


class PoleError(MultibathError):
    """A decay-rate denominator came within tolerance of zero.

    Time-dependent decay rates diverge wherever the underlying amplitude
    crosses zero.  The divergence is physical (the rate is a logarithmic
    derivative), so it is reported rather than masked; the caller decides
    whether to skip, blank, or refine the offending time point.
    """

    def __init__(self, t: float, magnitude: float, tol: float):
        self.t = t
        self.magnitude = magnitude
        self.tol = tol
        super().__init__(
            f"decay-rate denominator magnitude {magnitude:.3e} below "
            f"tolerance {tol:.3e} at t={t!r} (amplitude zero crossing)"
        )


class DegenerateRootsError(MultibathError):
    """Characteristic roots too close for the partial-fraction amplitude."""

    def __init__(self, roots, separation: float, scale: float):
        self.roots = tuple(roots)
        self.separation = separation
        self.scale = scale
        super().__init__(
            f"near-degenerate characteristic roots {self.roots} "
            f"(min separation {separation:.3e}, scale {scale:.3e}); "
            "use the Volterra solver instead of the closed form"
        )


class StabilityError(MultibathError):
    """Time step too coarse for the requested kernels."""


class SolverError(MultibathError):
    """A propagation step produced an invalid state or failed to converge."""


class ConfigError(MultibathError):
    """Invalid scenario configuration.

    Carries a machine-readable ``code`` (e.g. ``"unknown-key"``,
    ``"missing-parameter"``) so scripted callers can dispatch on the
    failure kind without parsing the message.
    """

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)
