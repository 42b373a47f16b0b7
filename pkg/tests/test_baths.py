"""Bath parameterizations, kernels, and single-bath decay rates."""

import numpy as np
import pytest
from scipy.integrate import quad

import multibath as mb
from multibath.baths import kernel_values, kernel_zero_value


def test_bath_params_validation():
    with pytest.raises(ValueError):
        mb.BathParams(-0.1, 1.0)
    with pytest.raises(ValueError):
        mb.BathParams(1.0, 0.0)
    with pytest.raises(ValueError):
        mb.BathParams(1.0, np.inf)
    b = mb.BathParams(0.0, 2.0, center=5.0)
    assert b.gamma == 0.0 and b.center == 5.0


class TestSpectralDensity:
    def test_peak_value(self):
        b = mb.BathParams(2.0, 3.0, center=7.0)
        assert mb.spectral_density(b, 7.0) == pytest.approx(2.0 / (2 * np.pi), rel=1e-14)

    def test_half_width_symmetry(self):
        b = mb.BathParams(2.0, 3.0, center=7.0)
        lo = mb.spectral_density(b, 7.0 - 3.0)
        hi = mb.spectral_density(b, 7.0 + 3.0)
        assert lo == pytest.approx(2.0 / (4 * np.pi), rel=1e-14)
        assert hi == pytest.approx(lo, rel=1e-14)

    def test_positive_and_symmetric(self):
        b = mb.BathParams(1.0, 0.5, center=-2.0)
        omega = np.linspace(-30, 30, 400)
        vals = mb.spectral_density(b, omega)
        assert np.all(vals > 0)
        assert np.allclose(mb.spectral_density(b, -2.0 + omega), mb.spectral_density(b, -2.0 - omega))

    def test_quadrature_normalization(self):
        # The stated +-200*width window captures arctan(200)*2/pi of the total
        # weight gamma*width/2, which is 0.32% short; a +-2e4*width window is
        # needed to reach the total within 1e-4 relative (heavy 1/x^2 tails).
        b = mb.BathParams(1.3, 0.7)
        win, _ = quad(lambda w: mb.spectral_density(b, w), -200 * 0.7, 200 * 0.7, limit=400)
        analytic_window = (1.3 * 0.7 / np.pi) * np.arctan(200.0)
        assert win == pytest.approx(analytic_window, rel=1e-9)
        total = 0.5 * 1.3 * 0.7
        assert abs(win / total - 1.0) == pytest.approx(2 / (200 * np.pi), rel=1e-3)
        wide, _ = quad(lambda w: mb.spectral_density(b, w), -2e4 * 0.7, 2e4 * 0.7, limit=800)
        assert wide == pytest.approx(total, rel=1e-4)


class TestMemoryKernel:
    def test_value_at_zero_exact(self):
        b = mb.BathParams(2.0, 3.0)
        assert mb.memory_kernel(b, 0.0) == 0.5 * 2.0 * 3.0

    def test_even_and_decaying(self):
        b = mb.BathParams(1.0, 2.0)
        t = np.linspace(0.0, 10.0, 50)
        kv = mb.memory_kernel(b, t)
        assert np.allclose(mb.memory_kernel(b, -t), kv)
        assert np.all(np.diff(np.abs(kv)) < 0)
        assert abs(mb.memory_kernel(b, 1e3)) < 1e-300

    def test_fourier_transform_of_spectral_density(self):
        # k(t) = int domega e^{i(center-omega)t} J(omega), evaluated by an
        # oscillatory-weight quadrature over the detuning axis.
        b = mb.BathParams(1.0, 1.0)

        def j_of_detuning(x):
            return mb.spectral_density(b, b.center - x)

        for lam_t in [0.0, 0.5, 1.0, 2.0, 5.0]:
            t = lam_t / b.width
            if t == 0.0:
                total, _ = quad(j_of_detuning, -np.inf, np.inf)
            else:
                half, _ = quad(j_of_detuning, 0, np.inf, weight="cos", wvar=t, limit=400)
                total = 2.0 * half
            assert total == pytest.approx(complex(mb.memory_kernel(b, t)).real, abs=1e-5)


class TestSingleBathDecayRate:
    def test_zero_at_t0(self):
        assert mb.single_bath_decay_rate(mb.BathParams(1.0, 5.0), 0.0) == 0.0

    def test_degenerate_width_matches_limit(self):
        # width = 2*gamma makes the damping root vanish; the closed limit is
        # 2*gamma*width*t/(2 + width*t).  Cross-check against a nudged root.
        gamma = 1.3
        b = mb.BathParams(gamma, 2 * gamma)
        eps = 1e-8
        b_near = mb.BathParams(gamma, 2 * gamma + eps)
        for t in [0.1, 0.9, 3.7, 20.0]:
            limit = 2 * gamma * (2 * gamma) * t / (2 + 2 * gamma * t)
            assert mb.single_bath_decay_rate(b, t) == pytest.approx(limit, rel=1e-7)
            assert mb.single_bath_decay_rate(b_near, t) == pytest.approx(limit, rel=1e-6)

    def test_matches_volterra_log_derivative(self):
        # Gamma(t) = -2 Re[c'(t)/c(t)] with c from the independent numeric
        # solver; c' by centered differences on a fine grid.
        b = mb.BathParams(1.0, 5.0)
        times = np.linspace(0.0, 10.0, 40001)
        traj = mb.volterra_solve([mb.LorentzianExponential(b)], 1.0, times)
        c = traj.values.real
        interior = slice(1, -1)
        dc = (c[2:] - c[:-2]) / (times[2] - times[0])
        rates = np.array([mb.single_bath_decay_rate(b, float(t)) for t in times[interior]])
        assert np.max(np.abs(rates + 2 * dc / c[interior])) <= 1e-6

    def test_markovian_flattening(self):
        b = mb.BathParams(1.0, 100.0)
        assert abs(mb.single_bath_decay_rate(b, 10.0) - 1.0) <= 0.05

    def test_positive_before_first_pole(self):
        b = mb.BathParams(1.0, 0.01)  # strongly non-Markovian, oscillatory
        d = np.sqrt(2 * 1.0 * 0.01 - 0.01**2)
        t_pole = 2 * (np.pi - np.arctan(d / 0.01)) / d  # first amplitude zero
        for t in np.linspace(1e-3, 0.98 * t_pole, 97):
            assert mb.single_bath_decay_rate(b, float(t)) > 0

    def test_pole_reported_not_masked(self):
        b = mb.BathParams(1.0, 0.01)
        d = np.sqrt(2 * 1.0 * 0.01 - 0.01**2)
        t_pole = 2 * (np.pi - np.arctan(d / 0.01)) / d
        with pytest.raises(mb.PoleError):
            # generous tolerance so the grid point right at the zero trips it
            mb.single_bath_decay_rate(b, t_pole, pole_tol=1e-4)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            mb.single_bath_decay_rate(mb.BathParams(1.0, 1.0), -0.5)


class TestSingleBathAmplitude:
    def test_initial_value(self):
        b = mb.BathParams(0.7, 2.2)
        assert mb.single_bath_amplitude(b, 0.0, c0=0.9) == pytest.approx(0.9, abs=1e-15)

    def test_no_overflow_deep_markovian(self):
        b = mb.BathParams(1.0, 100.0)
        vals = mb.single_bath_amplitude(b, np.linspace(0, 20, 101))
        assert np.all(np.isfinite(vals))
        assert vals[-1] == pytest.approx(np.exp(-0.5 * 1.005 * 20), rel=0.05)

    def test_decoupled_bath_is_constant(self):
        b = mb.BathParams(0.0, 3.0)
        assert np.allclose(mb.single_bath_amplitude(b, np.linspace(0, 50, 11)), 1.0)


class TestKernelSpecs:
    def test_tabulated_validation(self):
        with pytest.raises(ValueError):
            mb.Tabulated(np.array([0.1, 0.2]), np.array([1.0, 1.0]))  # must start at 0
        with pytest.raises(ValueError):
            mb.Tabulated(np.array([0.0, 0.0]), np.array([1.0, 1.0]))  # strictly increasing
        with pytest.raises(ValueError):
            mb.MarkovianDelta(0.0)

    def test_kernel_values_dispatch(self):
        times = np.linspace(0.0, 2.0, 21)
        b = mb.BathParams(1.0, 2.0)
        assert np.allclose(
            kernel_values(mb.LorentzianExponential(b), times), mb.memory_kernel(b, times)
        )
        assert np.allclose(kernel_values(mb.ConstantUnit(), times), 1.0)
        tab = mb.Tabulated(np.array([0.0, 1.0, 2.0]), np.array([1.0, 0.5, 0.25]))
        got = kernel_values(tab, np.array([0.0, 0.5, 2.0]))
        assert np.allclose(got, [1.0, 0.75, 0.25])
        with pytest.raises(ValueError):
            kernel_values(tab, np.array([0.0, 3.0]))  # beyond the table
        with pytest.raises(TypeError):
            kernel_values(mb.MarkovianDelta(1.0), times)

    def test_kernel_zero_values(self):
        b = mb.BathParams(1.0, 2.0)
        assert kernel_zero_value(mb.LorentzianExponential(b)) == 1.0
        assert kernel_zero_value(mb.ConstantUnit()) == 1.0

    def test_tabulated_arrays_read_only(self):
        tab = mb.Tabulated(np.array([0.0, 1.0]), np.array([1.0, 0.5]))
        with pytest.raises(ValueError):
            tab.times[0] = 5.0
