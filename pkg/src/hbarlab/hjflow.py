"""Classical Hamilton-Jacobi field theory solved by characteristics.

The classical action equation dS/dt + (dS/dx)^2/2m + V = 0 is integrated by
launching a fan of Newton trajectories with p0 = dS0/dx and accumulating the
action S_j(t) = S0(x0_j) + int (p^2/2m - V) dt' along each.  The fan also
transports densities: rho(x_j(t), t) * |dx_j/dx0| = rho0(x0_j).

Characteristics are exact pre-caustic; when neighbors cross, a single-valued
action field stops existing and solve_hj raises CausticError (carrying the
crossing time and the pre-caustic snapshots).  Density transport is less
fragile: the position map can become a bijection again after a perfect
focus (e.g. the harmonic half period, which reflects x0 -> -x0), so
transport_density only refuses times at which the map itself is singular or
folded.

Grid reconstruction of S uses a cubic Hermite interpolant with the exact
nodal derivatives dS/dx(x_j) = p_j that the fan provides for free; this is
piecewise-cubic, respects the monotone node ordering pre-caustic, and is
exact whenever S is quadratic in x (every linear-flow case).

Action-field derivatives here follow the same policy as the Madelung
module: finite differences in x (S is not periodic), centered differences
across snapshots in t.
"""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline, PchipInterpolator

from . import _kernels
from .errors import CausticError, DomainError
from .grid import real_field
from .potential import eval_force, eval_potential

__all__ = [
    "CharacteristicFan",
    "HJSolution",
    "integrate_fan",
    "solve_hj",
    "transport_density",
    "classical_hj_residual",
    "momentum_field",
    "expectations",
    "deterministic_continuity_check",
    "projected_newton_check",
]

JACOBIAN_FLOOR = 1e-8


@dataclass(frozen=True)
class CharacteristicFan:
    x0: np.ndarray       # launch points (strictly increasing)
    p0: np.ndarray       # launch momenta dS0/dx(x0)
    times: np.ndarray    # saved times
    x: np.ndarray        # positions, shape (n_times, n_char)
    p: np.ndarray        # momenta
    action: np.ndarray   # S0(x0) + accumulated Lagrangian integral
    m: float
    t_crossing: float = None   # first time adjacent characteristics crossed

    def index_of_time(self, t):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(
                f"t={t} is not among the saved snapshot times")
        return i

    def jacobian(self, i):
        """dx(t)/dx0 by central differences across the fan (one-sided at
        the ends)."""
        return np.gradient(self.x[i], self.x0, edge_order=2)


@dataclass(frozen=True)
class HJSolution:
    grid: object
    times: np.ndarray
    s_fields: tuple         # RealField per snapshot
    coverage: tuple         # bool array per snapshot: grid points inside fan
    fan: CharacteristicFan


def _require_static_polynomial(V, what):
    if V.kind == "tabulated":
        raise DomainError(f"{what} requires a polynomial-backed potential")
    if V.is_time_dependent:
        raise DomainError(f"{what} requires a static potential")


def integrate_fan(s0, V, t_final, n_char=None, dt=2e-4, snapshot_times=None):
    """Launch characteristics from the initial action field s0 and integrate
    them to t_final, recording positions, momenta, and actions at the
    snapshot times (default: 9 evenly spaced in [0, t_final]).

    The fan is integrated through any characteristic crossing (density
    transport may remain well posed past an isolated focus); the first
    crossing time, if any, is recorded on the returned fan.
    """
    _require_static_polynomial(V, "characteristic integration")
    if t_final <= 0:
        raise DomainError(f"t_final must be positive, got {t_final}")
    g = s0.grid
    if n_char is None:
        # 8x the grid keeps transported-density mass errors below 1e-6;
        # 4x is the hard floor.
        n_char = 8 * g.n
    if n_char < 4 * g.n:
        raise DomainError("fan density must be at least 4x grid resolution")

    x0 = np.linspace(g.x_min, g.x_max, int(n_char))
    grad_s0 = np.gradient(s0.values, g.dx, edge_order=2)
    p0 = PchipInterpolator(g.x, grad_s0, extrapolate=True)(x0)
    s0_at_x0 = PchipInterpolator(g.x, s0.values, extrapolate=True)(x0)

    n_steps = int(np.ceil(t_final / dt))
    dt_eff = t_final / n_steps
    if snapshot_times is None:
        snapshot_times = np.linspace(0.0, t_final, 9)
    save_steps = np.unique(np.clip(np.rint(
        np.asarray(snapshot_times, dtype=float) / dt_eff), 0, n_steps)
    ).astype(np.int64)

    fc = V.force_coeffs_at(0.0)
    vc = np.asarray(V.coeffs_at(0.0), dtype=float)
    X, P, A, caustic_step = _kernels.fan_path(
        fc, vc, V.mass, x0, p0, dt_eff, n_steps, save_steps)
    times = save_steps * dt_eff
    action = A + s0_at_x0[None, :]
    t_crossing = caustic_step * dt_eff if caustic_step >= 0 else None
    return CharacteristicFan(x0, p0, times, X, P, action, V.mass, t_crossing)


def solve_hj(s0, V, t_final, n_char=None, dt=2e-4, snapshot_times=None):
    """Integrate the classical action equation from the initial field s0.

    Returns an HJSolution with S reconstructed on the grid at the snapshot
    times.  Raises CausticError(t_caustic, partial=...) when adjacent
    characteristics cross before t_final; the partial solution holds the
    strictly pre-caustic snapshots.
    """
    fan = integrate_fan(s0, V, t_final, n_char, dt, snapshot_times)
    g = s0.grid
    if fan.t_crossing is not None:
        t_c = fan.t_crossing
        keep = fan.times < t_c
        partial = _reconstruct(
            g, CharacteristicFan(fan.x0, fan.p0, fan.times[keep],
                                 fan.x[keep], fan.p[keep],
                                 fan.action[keep], fan.m, t_c))
        raise CausticError(
            f"characteristics crossed at t={t_c:.6g}; single-valued action "
            f"field ends there", t_caustic=t_c, partial=partial)
    return _reconstruct(g, fan)


def _reconstruct(grid, fan):
    s_fields = []
    coverage = []
    for i in range(fan.times.size):
        xj = fan.x[i]
        spline = CubicHermiteSpline(xj, fan.action[i], fan.p[i],
                                    extrapolate=True)
        s_fields.append(real_field(grid, spline(grid.x)))
        coverage.append((grid.x >= xj[0]) & (grid.x <= xj[-1]))
    return HJSolution(grid, fan.times, tuple(s_fields), tuple(coverage), fan)


def transport_density(rho0, fan, t):
    """Push a density through the characteristic flow to time t via the
    Jacobian rule rho(x_j, t) = rho0(x0_j) / |J_j(t)|.

    Raises CausticError when the position map at t is singular (some
    |J| ~ 0) or folded (mixed Jacobian signs); an orientation-reversing but
    monotone map, like the harmonic half-period reflection, is fine.
    """
    i = fan.index_of_time(t)
    jac = fan.jacobian(i)
    if np.min(np.abs(jac)) < JACOBIAN_FLOOR:
        raise CausticError(
            f"characteristic map is singular at t={t:.6g}", t_caustic=t)
    if np.any(jac > 0) and np.any(jac < 0):
        raise CausticError(
            f"characteristic map is folded at t={t:.6g}", t_caustic=t)
    g = rho0.grid
    # grid -> launch points: cubic spline (4th order) since the grid spacing
    # is the coarse one; fan -> grid below stays shape-preserving
    rho0_at_x0 = np.maximum(
        CubicSpline(g.x, rho0.values, extrapolate=True)(fan.x0), 0.0)
    xj = fan.x[i]
    vals = rho0_at_x0 / np.abs(jac)
    if jac[0] < 0:
        xj = xj[::-1]
        vals = vals[::-1]
    out = PchipInterpolator(xj, vals, extrapolate=False)(g.x)
    out = np.where(np.isnan(out), 0.0, np.maximum(out, 0.0))
    return real_field(g, out)


def classical_hj_residual(sol, V, i, raw_fields=None):
    """L2 norm of dS/dt + (dS/dx)^2/2m + V at interior snapshot i, with
    dS/dt from centered differencing of the neighboring snapshots.

    The norm runs over grid points covered by the fan at all three
    snapshots (shrunk by one point for the spatial stencil)."""
    if i < 1 or i > sol.times.size - 2:
        raise DomainError("residual needs an interior snapshot index")
    g = sol.grid
    dt2 = sol.times[i + 1] - sol.times[i - 1]
    ds_dt = (sol.s_fields[i + 1].values - sol.s_fields[i - 1].values) / dt2
    grad_s = np.gradient(sol.s_fields[i].values, g.dx, edge_order=2)
    integrand = ds_dt + grad_s ** 2 / (2.0 * V.mass) + eval_potential(V, g.x)
    region = sol.coverage[i - 1] & sol.coverage[i] & sol.coverage[i + 1]
    region[1:] &= region[:-1].copy()
    region[:-1] &= region[1:].copy()
    return float(np.sqrt(g.dx * np.sum(integrand[region] ** 2)))


def momentum_field(s):
    """dS/dx as a field (finite differences; S is generally not periodic,
    so a spectral gradient would ring)."""
    return real_field(s.grid, np.gradient(s.values, s.grid.dx, edge_order=2))


def expectations(rho, s, m):
    """(mean position, mean momentum) of a (rho, S) field pair:
    x_mean = int x rho dx,  p_mean = int rho dS/dx dx."""
    g = rho.grid
    total = g.dx * rho.values.sum()
    if abs(total - 1.0) > 1e-6:
        raise DomainError(f"density mass {total} is not 1 within 1e-6")
    x_mean = float(g.dx * np.sum(g.x * rho.values))
    p_mean = float(g.dx * np.sum(
        rho.values * np.gradient(s.values, g.dx, edge_order=2)))
    return x_mean, p_mean


# ----------------------------------------------------------------------
# Deterministic-ansatz diagnostics
# ----------------------------------------------------------------------

def _interp_gradients(s_field):
    g = s_field.grid
    g1 = np.gradient(s_field.values, g.dx, edge_order=2)
    g2 = np.gradient(g1, g.dx, edge_order=2)
    return (PchipInterpolator(g.x, g1, extrapolate=True),
            PchipInterpolator(g.x, g2, extrapolate=True))


def deterministic_continuity_check(epsilon, sol, r_t, p_t, n_nodes=40):
    """Moments of the continuity equation under a narrow Gaussian density of
    width parameter epsilon riding at r(t) with trajectory momentum p(t).

    Inserting rho_eps(x - r(t)) into the continuity equation and collecting
    terms leaves the bracket (x-r)(p - dS/dx) + (eps/2) d2S/dx2; integrating
    it against rho_eps gives, per snapshot,

        term1 = int rho_eps (x-r)(p - dS/dx) dx
        term2 = (eps/2) int rho_eps d2S/dx2 dx.

    The two always sum to ~0 (the integrated continuity equation is the
    conservation of total mass), and each separately scales linearly with
    epsilon when d2S/dx2 is regular -- the property the scan tests pin.
    Also returned is p_gap = p(t) - int rho_eps dS/dx dx, the
    trajectory-vs-field momentum gap, which unlike term1 *does* detect a
    constant momentum mismatch (term1's (x-r) weight integrates any
    constant mismatch to zero).

    Integrals are Gauss-Hermite quadrature on interpolated gradient fields,
    so widths far below the grid spacing are handled exactly for the
    polynomial action fields the scans use.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    z, w = np.polynomial.hermite.hermgauss(n_nodes)
    w = w / np.sqrt(np.pi)
    se = np.sqrt(epsilon)
    term1 = np.empty(sol.times.size)
    term2 = np.empty(sol.times.size)
    p_gap = np.empty(sol.times.size)
    for i in range(sol.times.size):
        g1f, g2f = _interp_gradients(sol.s_fields[i])
        nodes = r_t[i] + se * z
        grad_vals = g1f(nodes)
        term1[i] = np.sum(w * se * z * (p_t[i] - grad_vals))
        term2[i] = 0.5 * epsilon * np.sum(w * g2f(nodes))
        p_gap[i] = p_t[i] - np.sum(w * grad_vals)
    return term1, term2, p_gap


def projected_newton_check(sol, V, r_t):
    """Residual of the projected Newton law along a trajectory r(t):

        d/dt [dS/dx](r(t), t)  computed as the two-term chain rule
        (partial time derivative of the momentum field plus
        (dS/dx)(d2S/dx2)/m, both evaluated at r(t))  minus  the force
        -dV/dx(r(t)).

    Returns the |field-theory dp/dt - Newton force| series over interior
    snapshots (centered time differencing needs both neighbors)."""
    g = sol.grid
    out = np.empty(max(sol.times.size - 2, 0))
    for i in range(1, sol.times.size - 1):
        dt2 = sol.times[i + 1] - sol.times[i - 1]
        g1_prev = np.gradient(sol.s_fields[i - 1].values, g.dx, edge_order=2)
        g1_next = np.gradient(sol.s_fields[i + 1].values, g.dx, edge_order=2)
        dt_grad = PchipInterpolator(
            g.x, (g1_next - g1_prev) / dt2, extrapolate=True)(r_t[i])
        g1f, g2f = _interp_gradients(sol.s_fields[i])
        advect = g1f(r_t[i]) * g2f(r_t[i]) / V.mass
        force = eval_force(V, r_t[i])
        out[i - 1] = abs(dt_grad + advect - force)
    return out
