"""Two-bath emitter: characteristic roots, closed form, and numeric solver."""

import numpy as np
import pytest

import multibath as mb
from multibath.two_bath import _cubic_coefficients

FIG_MODEL = mb.TwoBathModel(mb.BathParams(1.0, 0.01), mb.BathParams(1.0, 0.02))


def cubic_residuals(model, roots):
    coeffs = _cubic_coefficients(model)
    return [abs(np.polyval(coeffs, s)) for s in roots.as_array()]


class TestCharacteristicRoots:
    def test_uncoupled_factorization(self):
        m = mb.TwoBathModel(mb.BathParams(0.0, 5.0), mb.BathParams(0.0, 7.0))
        roots = np.sort_complex(mb.characteristic_roots(m).as_array())
        assert np.allclose(roots, [-7.0, -5.0, 0.0], atol=1e-12)

    def test_single_bath_factorization(self):
        # gamma2 = 0 splits off s = -width2; the rest is the single-bath
        # quadratic s^2 + w1 s + g1 w1 / 2.
        m = mb.TwoBathModel(mb.BathParams(1.0, 5.0), mb.BathParams(0.0, 7.0))
        d = np.sqrt(25.0 - 10.0)
        expected = sorted([-7.0, (-5.0 - d) / 2.0, (-5.0 + d) / 2.0])
        got = sorted(r.real for r in mb.characteristic_roots(m).as_array())
        assert np.allclose(got, expected, atol=1e-12)

    def test_fig_parameters_residuals(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        coeffs = _cubic_coefficients(FIG_MODEL)
        bound = 1e-10 * np.max(np.abs(coeffs))
        assert max(cubic_residuals(FIG_MODEL, roots)) <= bound

    def test_matches_companion_matrix_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            g1, g2 = rng.uniform(0.1, 4.0, 2)
            w1, w2 = rng.uniform(0.05, 6.0, 2)
            m = mb.TwoBathModel(mb.BathParams(g1, w1), mb.BathParams(g2, w2))
            try:
                got = np.sort_complex(mb.characteristic_roots(m).as_array())
            except mb.DegenerateRootsError:
                continue
            want = np.sort_complex(np.roots(_cubic_coefficients(m)))
            assert np.allclose(got, want, rtol=1e-8, atol=1e-12)

    def test_ordering_deterministic(self):
        roots = mb.characteristic_roots(FIG_MODEL).as_array()
        keys = [(r.real, r.imag) for r in roots]
        assert keys == sorted(keys)

    def test_conjugate_pair_structure(self):
        roots = mb.characteristic_roots(FIG_MODEL).as_array()
        complex_roots = [r for r in roots if r.imag != 0.0]
        assert len(complex_roots) == 2
        assert complex_roots[0] == complex_roots[1].conjugate()

    def test_degenerate_roots_signaled(self):
        # gamma = 0 with equal widths gives a double root at -width.
        m = mb.TwoBathModel(mb.BathParams(0.0, 3.0), mb.BathParams(0.0, 3.0))
        with pytest.raises(mb.DegenerateRootsError):
            mb.characteristic_roots(m)


class TestExactAmplitude:
    def test_normalization_at_zero(self):
        m = mb.TwoBathModel(mb.BathParams(1.3, 0.7), mb.BathParams(0.4, 2.1), c0=0.85)
        roots = mb.characteristic_roots(m)
        assert mb.exact_amplitude(m, roots, 0.0) == pytest.approx(0.85, abs=1e-15)

    def test_single_bath_closed_form(self):
        m = mb.TwoBathModel(mb.BathParams(1.0, 5.0), mb.BathParams(0.0, 7.0))
        roots = mb.characteristic_roots(m)
        t = np.linspace(0.0, 12.0, 601)
        got = mb.exact_amplitude(m, roots, t)
        want = mb.single_bath_amplitude(m.bath1, t)
        assert np.max(np.abs(got - want)) <= 1e-9

    def test_against_volterra_fig_parameters(self):
        times = np.linspace(0.0, 400.0, 50001)
        roots = mb.characteristic_roots(FIG_MODEL)
        closed = mb.exact_amplitude(FIG_MODEL, roots, times)
        kernels = [
            mb.LorentzianExponential(FIG_MODEL.bath1),
            mb.LorentzianExponential(FIG_MODEL.bath2),
        ]
        traj = mb.volterra_solve(kernels, 1.0, times)
        assert np.max(np.abs(traj.values - closed)) <= 1e-6

    def test_root_permutation_invariance(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        shuffled = mb.CubicRoots(roots.s3, roots.s1, roots.s2)
        t = np.linspace(0.0, 50.0, 101)
        assert np.allclose(
            mb.exact_amplitude(FIG_MODEL, roots, t),
            mb.exact_amplitude(FIG_MODEL, shuffled, t),
            rtol=0.0,
            atol=1e-14,
        )

    def test_rejects_degenerate_roots(self):
        bad = mb.CubicRoots(-1.0 + 0j, -1.0 + 1e-12j, -2.0 + 0j)
        with pytest.raises(mb.DegenerateRootsError):
            mb.exact_amplitude(FIG_MODEL, bad, 1.0)

    def test_no_amplitude_gain(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        t = np.linspace(0.0, 1000.0, 20001)
        vals = np.abs(mb.exact_amplitude(FIG_MODEL, roots, t))
        assert np.all(vals <= 1.0 + 1e-9)

    def test_envelope_extrema_decay(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        t = np.linspace(0.0, 1000.0, 40001)
        a = np.abs(mb.exact_amplitude(FIG_MODEL, roots, t))
        peaks = a[1:-1][(a[1:-1] > a[:-2]) & (a[1:-1] > a[2:])]
        assert np.all(np.diff(peaks) < 1e-9)


class TestExactDecayRate:
    def test_zero_at_t0(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        assert mb.exact_decay_rate(FIG_MODEL, roots, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_single_bath_reduction(self):
        m = mb.TwoBathModel(mb.BathParams(1.0, 5.0), mb.BathParams(0.0, 7.0))
        roots = mb.characteristic_roots(m)
        for t in [0.3, 1.7, 6.0]:
            assert mb.exact_decay_rate(m, roots, t) == pytest.approx(
                mb.single_bath_decay_rate(m.bath1, t), rel=1e-9, abs=1e-12
            )

    def test_pole_times_evenly_spaced(self):
        # The exact rate diverges at amplitude zeros; for the reference
        # parameters those zeros recur with near-perfect periodicity, unlike
        # the summed single-bath rates.
        roots = mb.characteristic_roots(FIG_MODEL)
        grid = np.linspace(0.0, 400.0, 400001)
        amp = np.real(mb.exact_amplitude(FIG_MODEL, roots, grid))
        flips = np.where(np.sign(amp[:-1]) * np.sign(amp[1:]) < 0)[0]
        assert len(flips) >= 10

        def bisect_zero(lo, hi):
            f = lambda t: np.real(mb.exact_amplitude(FIG_MODEL, roots, t))
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if f(lo) * f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            return 0.5 * (lo + hi)

        zeros = np.array([bisect_zero(grid[i], grid[i + 1]) for i in flips])
        gaps = np.diff(zeros)
        assert np.max(np.abs(gaps - gaps.mean())) / gaps.mean() <= 0.01

    def test_pole_error_near_zero_crossing(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        grid = np.linspace(10.0, 16.0, 100001)  # brackets the first amplitude zero
        amp = np.real(mb.exact_amplitude(FIG_MODEL, roots, grid))
        i = np.argmin(np.abs(amp))
        with pytest.raises(mb.PoleError):
            mb.exact_decay_rate(FIG_MODEL, roots, float(grid[i]), pole_tol=1e-3)

    def test_negative_somewhere(self):
        roots = mb.characteristic_roots(FIG_MODEL)
        rates = []
        for t in np.linspace(1.0, 120.0, 240):
            try:
                rates.append(mb.exact_decay_rate(FIG_MODEL, roots, float(t)))
            except mb.PoleError:
                pass
        assert min(rates) < 0.0


class TestVolterraSolve:
    def test_zero_kernels_constant(self):
        traj = mb.volterra_solve([], 0.7, np.linspace(0.0, 5.0, 51))
        assert np.allclose(traj.values, 0.7, atol=1e-15)

    def test_single_lorentzian_matches_closed_form(self):
        b = mb.BathParams(1.0, 5.0)
        times = np.linspace(0.0, 10.0, 20001)
        traj = mb.volterra_solve([mb.LorentzianExponential(b)], 1.0, times)
        closed = mb.single_bath_amplitude(b, times)
        assert np.max(np.abs(traj.values - closed)) <= 1e-6

    def test_second_order_convergence(self):
        b = mb.BathParams(1.0, 5.0)
        errs = []
        for n in (10000, 20000):
            times = np.linspace(0.0, 10.0, n + 1)
            traj = mb.volterra_solve([mb.LorentzianExponential(b)], 1.0, times)
            errs.append(np.max(np.abs(traj.values - mb.single_bath_amplitude(b, times))))
        assert errs[0] / errs[1] >= 3.5

    def test_block_size_independence(self):
        kernels = [mb.LorentzianExponential(mb.BathParams(0.8, 1.1))]
        times = np.linspace(0.0, 8.0, 5001)
        a = mb.volterra_solve(kernels, 1.0, times, block_size=64)
        c = mb.volterra_solve(kernels, 1.0, times, block_size=4096)
        assert np.max(np.abs(a.values - c.values)) <= 1e-12

    def test_delta_kernel_full_mass(self):
        times = np.linspace(0.0, 5.0, 5001)
        traj = mb.volterra_solve([mb.MarkovianDelta(0.8)], 1.0, times)
        assert np.max(np.abs(traj.values - np.exp(-0.8 * times))) <= 1e-6

    def test_tabulated_kernel_matches_analytic(self):
        b = mb.BathParams(1.0, 2.0)
        times = np.linspace(0.0, 6.0, 6001)
        tab = mb.Tabulated(times, np.asarray(mb.memory_kernel(b, times)))
        traj = mb.volterra_solve([tab], 1.0, times)
        closed = mb.single_bath_amplitude(b, times)
        assert np.max(np.abs(traj.values - closed)) <= 1e-5

    def test_stability_guard(self):
        b = mb.BathParams(10.0, 50.0)  # k(0) = 250
        with pytest.raises(mb.StabilityError):
            mb.volterra_solve([mb.LorentzianExponential(b)], 1.0, np.linspace(0.0, 10.0, 101))

    def test_grid_validation(self):
        kernels = [mb.LorentzianExponential(mb.BathParams(1.0, 1.0))]
        with pytest.raises(ValueError):
            mb.volterra_solve(kernels, 1.0, np.array([0.5, 1.0, 1.5]))  # not from 0
        with pytest.raises(ValueError):
            mb.volterra_solve(kernels, 1.0, np.array([0.0, 0.1, 0.3]))  # non-uniform


class TestPopulations:
    def test_additive_equals_exact_single_bath(self):
        m = mb.TwoBathModel(mb.BathParams(1.0, 5.0), mb.BathParams(0.0, 7.0))
        t = np.linspace(0.0, 15.0, 1501)
        assert np.max(np.abs(mb.additivity_error(m, t))) <= 1e-12

    def test_additive_equals_exact_single_bath_oscillatory(self):
        m = mb.TwoBathModel(mb.BathParams(1.0, 0.01), mb.BathParams(0.0, 7.0))
        t = np.linspace(0.0, 400.0, 4001)
        assert np.max(np.abs(mb.additivity_error(m, t))) <= 1e-12

    def test_additive_matches_rate_integral(self):
        # Away from amplitude zeros the additive population equals
        # exp(-int (Gamma1+Gamma2)); quadrature oracle per time point.
        from scipy.integrate import quad

        def rate_sum(t):
            return mb.single_bath_decay_rate(FIG_MODEL.bath1, t) + mb.single_bath_decay_rate(
                FIG_MODEL.bath2, t
            )

        for t in [1.0, 5.0, 9.0, 14.0]:
            integral, err = quad(rate_sum, 0.0, t, limit=400)
            assert err < 1e-9
            assert mb.additive_population(FIG_MODEL, t) == pytest.approx(
                np.exp(-integral), abs=1e-6
            )

    def test_exact_population_initial_and_bounds(self):
        m = mb.TwoBathModel(mb.BathParams(1.2, 0.8), mb.BathParams(0.5, 1.7), c0=0.6)
        t = np.linspace(0.0, 30.0, 3001)
        pop = mb.exact_population(m, t)
        assert pop[0] == pytest.approx(0.36, abs=1e-14)
        assert np.all(pop >= 0.0) and np.all(pop <= 0.36 + 1e-9)

    def test_markovian_limit_exponential(self):
        m = mb.TwoBathModel(mb.BathParams(1.0, 100.0), mb.BathParams(1.0, 100.0))
        t = np.linspace(0.0, 3.0, 601)
        assert np.max(np.abs(mb.exact_population(m, t) - np.exp(-2.0 * t))) <= 0.02

    def test_persistent_revivals(self):
        t = np.linspace(0.0, 1000.0, 100001)
        pop = mb.exact_population(FIG_MODEL, t)
        interior = (pop[1:-1] > pop[:-2]) & (pop[1:-1] > pop[2:])
        assert int(interior.sum()) >= 3

    def test_first_revival_suppressed_in_additive(self):
        t = np.linspace(0.0, 100.0, 20001)
        exact = mb.exact_population(FIG_MODEL, t)
        interior = np.where((exact[1:-1] > exact[:-2]) & (exact[1:-1] > exact[2:]))[0] + 1
        k = interior[0]
        additive_at_peak = mb.additive_population(FIG_MODEL, float(t[k]))
        assert additive_at_peak < exact[k]

    def test_degenerate_fallback_path(self):
        # width1 = 2*gamma1 with bath 2 off puts a double root at -gamma1;
        # the closed form refuses and the numeric path takes over.
        m = mb.TwoBathModel(mb.BathParams(1.0, 2.0), mb.BathParams(0.0, 7.0))
        with pytest.raises(mb.DegenerateRootsError):
            mb.characteristic_roots(m)
        t = np.linspace(0.0, 6.0, 61)
        pop = mb.exact_population(m, t)
        want = mb.single_bath_amplitude(m.bath1, t) ** 2  # critical damping
        assert np.max(np.abs(pop - want)) <= 1e-5

    def test_early_additivity_error_flat(self):
        # eps(0) = 0 and the first two derivatives vanish: series agree
        # through t^3, so eps grows like t^4.
        m = mb.TwoBathModel(mb.BathParams(0.9, 1.4), mb.BathParams(1.7, 0.6))
        ts = np.array([0.0, 1e-3, 2e-3])
        eps = mb.additivity_error(m, ts)
        assert eps[0] == 0.0
        assert abs(eps[1]) < 1e-11
        assert eps[2] / eps[1] == pytest.approx(16.0, rel=5e-3)


class TestAmplitudeTrajectory:
    def test_validation(self):
        with pytest.raises(ValueError):
            mb.AmplitudeTrajectory(np.array([0.0, 1.0]), np.array([1.0 + 0j]))
        with pytest.raises(ValueError):
            mb.AmplitudeTrajectory(np.array([1.0, 2.0]), np.array([1.0 + 0j, 0.5 + 0j]))

    def test_population(self):
        traj = mb.AmplitudeTrajectory(np.array([0.0, 1.0]), np.array([1.0, 0.5j]))
        assert np.allclose(traj.population(), [1.0, 0.25])
