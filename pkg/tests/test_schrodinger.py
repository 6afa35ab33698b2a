import numpy as np
import pytest

from hbarlab.errors import BoundaryLeak, DomainError
from hbarlab.grid import make_grid
from hbarlab.potential import PotentialSpec
from hbarlab.schrodinger import (
    analytic_gaussian,
    energy_mean,
    excess_kurtosis,
    init_gaussian,
    max_stable_dt,
    observables,
    propagate,
    width,
)

from helpers import rel_err, verlet_oracle


def run_to(psi, V, t_final, safety=0.5):
    dt = safety * max_stable_dt(psi.grid, V, psi.hbar, psi.m)
    n = int(np.ceil(t_final / dt))
    return propagate(psi, V, t_final / n, n)


class TestInitGaussian:
    def test_peak_density(self):
        g = make_grid(-10, 10, 512)
        psi = init_gaussian(g, epsilon=0.5, r0=0.0, p0=0.0, hbar=1.0, m=1.0)
        peak = np.max(np.abs(psi.values) ** 2)
        assert peak == pytest.approx((np.pi * 0.5) ** -0.5, rel=1e-6)

    def test_momentum_boost_leaves_density(self):
        g = make_grid(-10, 10, 512)
        psi0 = init_gaussian(g, 0.5, 0.0, 0.0, 1.0, 1.0)
        psi2 = init_gaussian(g, 0.5, 0.0, 2.0, 1.0, 1.0)
        assert np.allclose(np.abs(psi0.values) ** 2,
                           np.abs(psi2.values) ** 2, atol=1e-13)
        assert observables(psi2).p_mean == pytest.approx(2.0, abs=1e-8)

    def test_wide_packet_leaks(self):
        g = make_grid(-10, 10, 512)
        with pytest.raises(BoundaryLeak):
            init_gaussian(g, epsilon=25.0, r0=0.0, p0=0.0, hbar=1.0, m=1.0)

    def test_bad_epsilon(self):
        g = make_grid(-10, 10, 512)
        with pytest.raises(DomainError):
            init_gaussian(g, epsilon=-1.0, r0=0.0, p0=0.0, hbar=1.0, m=1.0)


class TestObservables:
    def test_minimum_uncertainty_packet(self):
        # Closed-form Gaussian Fourier pair: dx = sqrt(eps/2) = 0.5,
        # dp = hbar / sqrt(2 eps) = 1, product = hbar/2.
        g = make_grid(-10, 10, 512)
        psi = init_gaussian(g, 0.5, 0.0, 0.0, 1.0, 1.0)
        obs = observables(psi)
        assert np.sqrt(obs.var_x) == pytest.approx(0.5, abs=1e-8)
        assert np.sqrt(obs.var_p) == pytest.approx(1.0, abs=1e-8)
        assert obs.uncertainty_product == pytest.approx(0.5, abs=1e-8)

    def test_p_mean_constant_under_free_flow(self):
        g = make_grid(-20, 20, 512)
        psi = init_gaussian(g, 0.5, 0.0, 1.5, 1.0, 1.0)
        V = PotentialSpec.free()
        vals = [observables(psi).p_mean]
        for _ in range(4):
            psi = propagate(psi, V, 5e-4, 200)
            vals.append(observables(psi).p_mean)
        assert np.max(np.abs(np.diff(vals))) <= 1e-8


class TestPropagate:
    def test_free_spreading_width(self):
        # A_f(1) = eps (1 + (hbar/eps)^2 (t/m)^2) = 0.5 * 5 = 2.5
        g = make_grid(-20, 20, 512)
        psi = init_gaussian(g, 0.5, 0.0, 0.0, 1.0, 1.0)
        out = run_to(psi, PotentialSpec.free(), 1.0)
        assert rel_err(width(out), 2.5) <= 1e-4

    def test_coherent_width_constant_over_period(self):
        g = make_grid(-10, 10, 128)
        V = PotentialSpec.harmonic(mass=1.0, omega=1.0)
        psi = init_gaussian(g, epsilon=1.0, r0=0.0, p0=1.0, hbar=1.0, m=1.0)
        dt = 2.5e-4
        n_per = 80
        n_chunk = int(np.ceil(2 * np.pi / (n_per * dt)))
        for _ in range(n_per):
            psi = propagate(psi, V, dt, n_chunk)
            assert abs(width(psi) - 1.0) <= 1e-6

    def test_harmonic_width_quarter_period(self):
        # A_h(pi/2 / omega) = hbar^2 / (eps m^2 omega^2) = 2.0
        g = make_grid(-10, 10, 256)
        V = PotentialSpec.harmonic(mass=1.0, omega=1.0)
        psi = init_gaussian(g, 0.5, 0.0, 0.0, 1.0, 1.0)
        out = run_to(psi, V, np.pi / 2, safety=0.25)
        assert rel_err(width(out), 2.0) <= 1e-4

    def test_norm_conserved_per_step(self):
        g = make_grid(-10, 10, 256)
        V = PotentialSpec.harmonic(1.0, 1.0)
        psi = init_gaussian(g, 0.5, 0.0, 1.0, 1.0, 1.0)
        n0 = g.dx * np.sum(np.abs(psi.values) ** 2)
        psi = propagate(psi, V, 2e-4, 1)
        n1 = g.dx * np.sum(np.abs(psi.values) ** 2)
        assert abs(n1 - n0) <= 1e-12

    def test_energy_conserved(self):
        g = make_grid(-15, 15, 256)
        V = PotentialSpec.harmonic(1.0, 1.0)
        psi = init_gaussian(g, 0.5, 1.0, 0.5, 1.0, 1.0)
        e0 = energy_mean(psi, V)
        out = run_to(psi, V, 4.0)
        assert rel_err(energy_mean(out, V), e0) <= 1e-6

    def test_dt_validation(self):
        g = make_grid(-10, 10, 256)
        V = PotentialSpec.free()
        psi = init_gaussian(g, 0.5, 0.0, 0.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            propagate(psi, V, -1e-3, 10)
        with pytest.raises(DomainError):
            propagate(psi, V, 10 * max_stable_dt(g, V, 1.0, 1.0), 10)

    def test_second_order_convergence_in_dt(self):
        g = make_grid(-12, 12, 256)
        V = PotentialSpec.harmonic(1.0, 1.0)
        psi = init_gaussian(g, 0.5, 0.5, 0.5, 1.0, 1.0)
        t_final = 0.5
        dt0 = 2.5e-4

        def terminal(dt_scale):
            n = int(round(t_final / (dt0 / dt_scale)))
            return propagate(psi, V, t_final / n, n).values

        ref = terminal(8)
        err1 = np.linalg.norm(terminal(1) - ref)
        err2 = np.linalg.norm(terminal(2) - ref)
        assert 3.0 <= err1 / err2 <= 5.0


class TestScheduledPotential:
    def test_piecewise_schedule_equals_manual_stages(self):
        # Propagating through a coefficient switch must match propagating
        # each stage with the corresponding static potential.
        g = make_grid(-12, 12, 256)
        V_sched = PotentialSpec.polynomial(
            [0, 0, 0.5], schedule=[(0.0, [0, 0, 0.5]), (0.5, [0.0])])
        V_harm = PotentialSpec.polynomial([0, 0, 0.5])
        V_free = PotentialSpec.free()
        psi0 = init_gaussian(g, 0.5, 0.0, 1.0, 1.0, 1.0)
        n_half = 800
        dt = 0.5 / n_half
        out_sched = propagate(psi0, V_sched, dt, 2 * n_half)
        stage1 = propagate(psi0, V_harm, dt, n_half)
        out_manual = propagate(stage1, V_free, dt, n_half)
        assert np.max(np.abs(out_sched.values - out_manual.values)) <= 1e-12

    def test_width_follows_active_segment(self):
        # free spreading only begins once the confining segment ends
        g = make_grid(-16, 16, 256)
        V = PotentialSpec.polynomial(
            [0, 0, 0.5], schedule=[(0.0, [0, 0, 0.5]), (2 * np.pi, [0.0])])
        psi = init_gaussian(g, 1.0, 0.0, 0.0, 1.0, 1.0)  # stationary width
        dt = 2.5e-4
        n_per = int(round(2 * np.pi / dt))
        at_period = propagate(psi, V, 2 * np.pi / n_per, n_per)
        assert abs(width(at_period) - 1.0) <= 1e-5
        t_free = 1.5
        later = propagate(at_period, V, dt, int(round(t_free / dt)))
        spread = 1.0 * (1.0 + t_free ** 2)  # free law from the switch
        assert rel_err(width(later), spread) <= 1e-3


class TestOracleAgreement:
    def test_randomized_parameters_match_analytic_across_run(self):
        rng = np.random.default_rng(42)
        for _ in range(5):
            eps = float(rng.uniform(0.3, 1.0))
            hbar = float(rng.uniform(0.4, 1.5))
            p0 = float(rng.uniform(-1.5, 1.5))
            m = float(rng.uniform(0.7, 1.4))
            case = rng.choice(["free", "constant_force", "harmonic"])
            omega = float(rng.uniform(0.6, 1.6))
            f0 = float(rng.uniform(-1.0, 1.0))
            if case == "free":
                V = PotentialSpec.free(m)
            elif case == "constant_force":
                V = PotentialSpec.constant_force(f0, m)
            else:
                V = PotentialSpec.harmonic(m, omega)
            g = make_grid(-24, 24, 1024)
            psi = init_gaussian(g, eps, 0.0, p0, hbar, m)
            for _ in range(4):
                psi = run_to(psi, V, 0.2, safety=0.4)
                ref = analytic_gaussian(case, eps, p0, hbar, m, psi.t,
                                        omega=omega, f0=f0)
                obs = observables(psi)
                assert rel_err(width(psi), ref.epsilon_t) <= 1e-4
                assert rel_err(obs.x_mean, ref.r_t) <= 1e-4
                assert rel_err(obs.p_mean, ref.p_t) <= 1e-4


class TestGaussianForm:
    def test_kurtosis_stays_gaussian_for_solvable_potentials(self):
        g = make_grid(-20, 20, 512)
        for V in (PotentialSpec.free(), PotentialSpec.constant_force(0.8),
                  PotentialSpec.harmonic(1.0, 1.0)):
            psi = init_gaussian(g, 0.5, 0.0, 0.5, 1.0, 1.0)
            for _ in range(5):
                psi = run_to(psi, V, 0.3)
                assert abs(excess_kurtosis(psi)) <= 1e-3

    def test_kurtosis_grows_for_quartic(self):
        g = make_grid(-8, 8, 256)
        V = PotentialSpec.polynomial([0, 0, 0, 0, 1.0])
        psi = init_gaussian(g, 0.5, 0.0, 1.0, 1.0, 1.0)
        worst = 0.0
        for _ in range(6):
            psi = run_to(psi, V, 0.25)
            worst = max(worst, abs(excess_kurtosis(psi)))
        assert worst > 1e-2


class TestAnalyticGaussian:
    def test_free_width(self):
        st = analytic_gaussian("free", 0.5, 0.0, 1.0, 1.0, t=1.0)
        assert st.epsilon_t == pytest.approx(2.5, rel=1e-12)

    def test_harmonic_center(self):
        st = analytic_gaussian("harmonic", 0.5, 1.0, 1.0, 1.0,
                               t=np.pi / 4, omega=2.0)
        assert st.r_t == pytest.approx(0.5, rel=1e-12)

    def test_constant_force_against_newton_oracle(self):
        f0, m = 2.0, 1.0
        r_ref, p_ref = verlet_oracle(lambda x: f0, m, 0.0, 0.0,
                                     dt=1e-5, n_steps=100000)
        st = analytic_gaussian("constant_force", 0.5, 0.0, 1.0, m,
                               t=1.0, f0=f0)
        assert st.r_t == pytest.approx(1.0, abs=1e-12)
        assert st.p_t == pytest.approx(2.0, abs=1e-12)
        assert st.r_t == pytest.approx(r_ref, abs=1e-9)
        assert st.p_t == pytest.approx(p_ref, abs=1e-9)

    def test_coherent_width_is_stationary(self):
        for t in np.linspace(0, 7, 11):
            st = analytic_gaussian("harmonic", 0.5, 1.0, 1.0, 2.0,
                                   t=t, omega=1.0)
            assert st.epsilon_t == pytest.approx(0.5, rel=1e-12)

    def test_unknown_case(self):
        with pytest.raises(DomainError):
            analytic_gaussian("quartic", 0.5, 0.0, 1.0, 1.0, t=0.0)
