"""Newtonian trajectories, phase-space transport, and expectation-value
evolution checks.

newton_integrate is a velocity-Verlet (symplectic, second order)
integrator; liouville_evolve advances a phase-space density by the backward
semi-Lagrangian method (each node is pulled back through the Newton flow
and the initial density is sampled bilinearly once, so there is no CFL
limit and interpolation diffusion is paid a single time per call).

delta_ansatz_check verifies in weak form that a point density riding a
Newton trajectory solves the phase-space transport equation: for smooth
test functions phi(x, p),

    d/dt phi(r(t), p(t)) = (p/m) dphi/dx - dV/dx dphi/dp

along the trajectory.  This is the distribution statement behind the
delta-function ansatz, tested without grid artifacts.

ehrenfest_residuals checks the two expectation-value evolution laws,
d<x>/dt = <p>/m and d<p>/dt = <-dV/dx>, on any snapshot series (wave
functions or (rho, S) field pairs).  Both laws hold for every potential;
what is special about potentials of degree <= 2 is only that the mean
force equals the force at the mean.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, EscapeError, MassDriftError
from .madelung import MadelungFields
from .potential import eval_force, eval_potential
from .schrodinger import WaveFunction, observables

__all__ = [
    "Trajectory",
    "PhaseDensity",
    "newton_integrate",
    "sample_trajectory",
    "gaussian_phase_blob",
    "liouville_evolve",
    "phase_mass",
    "weak_liouville_residual",
    "delta_ansatz_check",
    "ehrenfest_residuals",
]

MASS_DRIFT_TOL = 1e-3
DEFAULT_ESCAPE_BOUND = 1e6


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    r: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    m: float


def newton_integrate(V, r0, p0, dt, n_steps, save_stride=1,
                     escape_bound=DEFAULT_ESCAPE_BOUND):
    """Velocity-Verlet trajectory under -dV/dx, sampled every save_stride
    steps.  Raises EscapeError if |r| exceeds escape_bound (unbounded
    motion guard)."""
    if dt <= 0:
        raise DomainError(f"dt must be positive, got {dt}")
    n_steps = int(n_steps)
    save_stride = int(save_stride)
    if n_steps % save_stride != 0:
        raise DomainError("n_steps must be a multiple of save_stride")
    if V.is_time_dependent:
        raise DomainError("newton_integrate requires a static potential")
    if V.kind == "tabulated":
        r_out, p_out, esc = _verlet_tabulated(
            V, float(r0), float(p0), dt, n_steps, save_stride, escape_bound)
    else:
        fc = V.force_coeffs_at(0.0)
        r_out, p_out, esc = _kernels.verlet_path(
            fc, V.mass, float(r0), float(p0), dt, n_steps, save_stride,
            float(escape_bound))
    if esc >= 0:
        raise EscapeError(
            f"trajectory left |r| <= {escape_bound:g} at t={esc * dt:.6g}")
    times = dt * save_stride * np.arange(r_out.size)
    energy = 0.5 * p_out ** 2 / V.mass + eval_potential(V, r_out)
    return Trajectory(times, r_out, p_out, energy, V.mass)


def _verlet_tabulated(V, r, p, dt, n_steps, stride, bound):
    n_saves = n_steps // stride + 1
    r_out = np.empty(n_saves)
    p_out = np.empty(n_saves)
    r_out[0], p_out[0] = r, p
    f = eval_force(V, r)
    isave = 1
    for step in range(1, n_steps + 1):
        ph = p + 0.5 * dt * f
        r = r + dt * ph / V.mass
        f = eval_force(V, r)
        p = ph + 0.5 * dt * f
        if abs(r) > bound:
            return r_out[:isave], p_out[:isave], step
        if step % stride == 0:
            r_out[isave], p_out[isave] = r, p
            isave += 1
    return r_out, p_out, -1


def sample_trajectory(traj, times):
    """(r, p) linearly interpolated at the requested times."""
    return (np.interp(times, traj.times, traj.r),
            np.interp(times, traj.times, traj.p))


# ----------------------------------------------------------------------
# Phase-space density
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PhaseDensity:
    x_min: float
    x_max: float
    nx: int
    p_min: float
    p_max: float
    n_p: int
    values: np.ndarray        # shape (nx, n_p), nonnegative

    @property
    def dx(self):
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self):
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def x_nodes(self):
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p_nodes(self):
        return np.linspace(self.p_min, self.p_max, self.n_p)


def phase_mass(rho):
    return float(rho.values.sum() * rho.dx * rho.dp)


def _validated(rho):
    if np.any(rho.values < 0) or not np.all(np.isfinite(rho.values)):
        raise DomainError("phase density must be finite and nonnegative")
    mass = phase_mass(rho)
    if abs(mass - 1.0) > 1e-6:
        raise DomainError(f"phase mass {mass} is not 1 within 1e-6")
    return rho


def gaussian_phase_blob(x0, p0, sigma_x, sigma_p, x_min, x_max, p_min, p_max,
                        nx=256, n_p=256):
    """Normalized isotropic Gaussian blob on a node-centered phase grid."""
    xs = np.linspace(x_min, x_max, nx)
    ps = np.linspace(p_min, p_max, n_p)
    X, P = np.meshgrid(xs, ps, indexing="ij")
    vals = np.exp(-0.5 * ((X - x0) / sigma_x) ** 2
                  - 0.5 * ((P - p0) / sigma_p) ** 2)
    rho = PhaseDensity(x_min, x_max, nx, p_min, p_max, n_p, vals)
    vals = vals / phase_mass(rho)
    return _validated(PhaseDensity(x_min, x_max, nx, p_min, p_max, n_p, vals))


def liouville_evolve(rho0, V, t, dt):
    """Semi-Lagrangian advance of a phase density by time t.

    Every node is pulled backward through the Newton flow (sub-stepped by
    dt) and rho0 is sampled bilinearly at the foot -- one interpolation per
    call regardless of t.  Raises MassDriftError when the advected mass
    drifts beyond 1e-3 (grid too coarse or support reaching the boundary).
    """
    if V.is_time_dependent or V.kind == "tabulated":
        raise DomainError(
            "liouville_evolve requires a static polynomial-backed potential")
    if dt <= 0 or t <= 0:
        raise DomainError("t and dt must be positive")
    _validated(rho0)
    n_sub = max(1, int(np.ceil(t / dt)))
    dt_eff = t / n_sub
    fc = V.force_coeffs_at(0.0)
    vals = _kernels.liouville_pullback(
        fc, V.mass, rho0.x_nodes, rho0.p_nodes, dt_eff, n_sub,
        np.ascontiguousarray(rho0.values), rho0.x_min, rho0.dx,
        rho0.p_min, rho0.dp)
    out = PhaseDensity(rho0.x_min, rho0.x_max, rho0.nx,
                       rho0.p_min, rho0.p_max, rho0.n_p, vals)
    drift = abs(phase_mass(out) - 1.0)
    if drift > MASS_DRIFT_TOL:
        raise MassDriftError(
            f"phase mass drifted by {drift:.3e} (> {MASS_DRIFT_TOL})")
    return out


# ----------------------------------------------------------------------
# Weak-form transport check for the point-density ansatz
# ----------------------------------------------------------------------

DEFAULT_TEST_FUNCTIONS = (
    # (phi, dphi/dx, dphi/dp)
    (lambda x, p: x, lambda x, p: 1.0, lambda x, p: 0.0),
    (lambda x, p: p, lambda x, p: 0.0, lambda x, p: 1.0),
    (lambda x, p: x * x, lambda x, p: 2 * x, lambda x, p: 0.0),
    (lambda x, p: x * p, lambda x, p: p, lambda x, p: x),
    (lambda x, p: p * p, lambda x, p: 0.0, lambda x, p: 2 * p),
)


def weak_liouville_residual(traj, V, test_functions=DEFAULT_TEST_FUNCTIONS):
    """Max over test functions and interior times of
    | d/dt phi(r, p) - [(p/m) dphi/dx - dV/dx dphi/dp] |."""
    r, p, times = traj.r, traj.p, traj.times
    if r.size < 3:
        raise DomainError("need at least 3 samples")
    h = times[1] - times[0]
    force = eval_force(V, r)
    worst = 0.0
    for phi, phi_x, phi_p in test_functions:
        series = phi(r, p) * np.ones_like(r)
        dseries = (series[2:] - series[:-2]) / (2 * h)
        rhs = ((p / traj.m) * phi_x(r, p) + force * phi_p(r, p)
               * np.ones_like(r))[1:-1]
        worst = max(worst, float(np.max(np.abs(dseries - rhs))))
    return worst


def delta_ansatz_check(V, r0, p0, t_final, dt=2e-4, n_samples=8000):
    """Integrate a Newton trajectory and verify the weak-form transport
    identity along it; returns the max residual over the default test
    functions.  The sample spacing bounds the centered-differencing error,
    so n_samples is sized for ~1e-7 residuals on unit-scale problems."""
    n_steps = int(np.ceil(t_final / dt))
    stride = max(1, n_steps // n_samples)
    n_steps = stride * int(np.ceil(n_steps / stride))
    traj = newton_integrate(V, r0, p0, t_final / n_steps, n_steps,
                            save_stride=stride)
    return weak_liouville_residual(traj, V)


# ----------------------------------------------------------------------
# Expectation-value evolution residuals
# ----------------------------------------------------------------------

def _deriv_uniform(series, h):
    """Centered differences with second-order one-sided ends."""
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2 * h)
    out[0] = (-3 * series[0] + 4 * series[1] - series[2]) / (2 * h)
    out[-1] = (3 * series[-1] - 4 * series[-2] + series[-3]) / (2 * h)
    return out


def _mean_series(snapshots, V, times):
    xs, ps, fs = [], [], []
    for snap in snapshots:
        if isinstance(snap, WaveFunction):
            obs = observables(snap)
            g = snap.grid
            rho = np.abs(snap.values) ** 2
            xs.append(obs.x_mean)
            ps.append(obs.p_mean)
        elif isinstance(snap, MadelungFields):
            g = snap.grid
            rho = snap.rho.values
            grad_s = np.gradient(snap.s.values, g.dx, edge_order=2)
            xs.append(g.dx * np.sum(g.x * rho))
            ps.append(g.dx * np.sum(rho * grad_s))
        else:
            raise DomainError(f"unsupported snapshot type {type(snap)!r}")
        fs.append(g.dx * np.sum(rho * eval_force(V, g.x)))
    if times is None:
        times = np.array([s.t for s in snapshots])
    times = np.asarray(times, dtype=float)
    h = times[1] - times[0]
    if not np.allclose(np.diff(times), h, rtol=1e-9, atol=1e-12):
        raise DomainError("snapshots must be uniformly spaced in time")
    return np.array(xs), np.array(ps), np.array(fs), h


def ehrenfest_residuals(snapshots, V, times=None):
    """Residual series of the two expectation-value laws:
    residual1 = d<x>/dt - <p>/m and residual2 = d<p>/dt - <F>."""
    if len(snapshots) < 3:
        raise DomainError("need at least 3 snapshots")
    x_bar, p_bar, f_bar, h = _mean_series(snapshots, V, times)
    res1 = _deriv_uniform(x_bar, h) - p_bar / V.mass
    res2 = _deriv_uniform(p_bar, h) - f_bar
    return res1, res2
