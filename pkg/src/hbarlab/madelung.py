"""Madelung decomposition psi = sqrt(rho) * exp(i S / hbar) and residual
evaluators for the continuity and Hamilton-Jacobi equations.

The decomposition turns the Schrödinger equation into a continuity equation
for rho and an action equation for S that differs from the classical
Hamilton-Jacobi equation by a single term proportional to hbar^2,

    quantum_term(rho) = -(hbar^2 / 2m) * lap(sqrt(rho)) / sqrt(rho),

which couples rho back into S.  ("Quantum potential" is a common but
unfortunate name for it; a potential is normally an externally controlled
quantity, while this term is state-dependent, so the neutral name is used
throughout.)  The residual evaluators below measure how well given (rho, S)
pairs satisfy either equation, with or without that term.

Phase handling: S = hbar * arg(psi) is defined up to 2*pi*hbar jumps and is
undefined where rho vanishes.  Points with rho below a relative floor are
masked; the remaining support must be a single connected run, inside which
the phase is unwrapped outward from the density maximum by a
minimal-increment rule.  The reported masked fraction is mass-weighted
(the fraction of probability sitting on masked points): a localized packet
on a padded grid masks most *points* while carrying ~1e-12 of the mass
there, and it is the mass that decides whether S-dependent operations are
trustworthy.

Gradient policy: derivatives of decaying fields (rho, sqrt(rho), fluxes)
use the spectral operator; derivatives of S use second-order finite
differences, because S is generally not periodic on the grid (a moving
packet has S ~ p*x) and a spectral derivative would ring.  Central
differences are exact for the quadratic-in-x action fields of the Gaussian
family.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NodeError
from .grid import RealField, complex_field, real_field, spectral_derivative
from .potential import eval_potential
from .schrodinger import WaveFunction, analytic_gaussian

__all__ = [
    "MadelungFields",
    "DEFAULT_FLOOR",
    "to_madelung",
    "from_madelung",
    "make_madelung",
    "quantum_term",
    "quantum_term_norm",
    "continuity_residual",
    "hj_residual",
    "anchored_series",
    "ds_dt_centered",
    "analytic_packet_fields",
]

DEFAULT_FLOOR = 1e-12   # support floor, relative to max(rho)
NORM_TOL = 1e-6
MAX_MASKED_MASS = 0.2


@dataclass(frozen=True)
class MadelungFields:
    rho: RealField
    s: RealField
    hbar: float
    support: np.ndarray          # True where S is defined
    masked_mass_fraction: float

    @property
    def grid(self):
        return self.rho.grid


def _support_and_fraction(rho_vals, dx, floor):
    support = rho_vals >= floor * rho_vals.max()
    masked_mass = dx * rho_vals[~support].sum()
    return support, float(masked_mass)


def make_madelung(rho, s, hbar, floor=DEFAULT_FLOOR):
    """Assemble MadelungFields from density and action fields, validating
    normalization and computing the support mask."""
    if rho.grid != s.grid:
        raise DomainError("rho and S live on different grids")
    if np.any(rho.values < 0):
        raise DomainError("density must be nonnegative")
    total = rho.grid.dx * rho.values.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"density mass {total} is not 1 within {NORM_TOL}")
    support, masked = _support_and_fraction(rho.values, rho.grid.dx, floor)
    return MadelungFields(rho, s, float(hbar), support, masked)


def _wrap(delta):
    return (delta + np.pi) % (2.0 * np.pi) - np.pi


def to_madelung(psi, floor=DEFAULT_FLOOR):
    """Decompose a wave function into (rho, S).

    S is unwrapped along the grid starting from the global density maximum;
    2*pi jumps between neighbors are resolved by the minimal-increment
    rule.  Masked points (rho < floor * max rho) get S = 0 and are excluded
    from unwrapping.  Raises NodeError when the support is disconnected
    (e.g. a state with an interior node), since unwrapping across a node
    would be ambiguous.
    """
    g = psi.grid
    rho_vals = np.abs(psi.values) ** 2
    support, masked = _support_and_fraction(rho_vals, g.dx, floor)
    peak = int(np.argmax(rho_vals))

    lo = peak
    while lo > 0 and support[lo - 1]:
        lo -= 1
    hi = peak
    while hi < g.n - 1 and support[hi + 1]:
        hi += 1
    outside = support.copy()
    outside[lo:hi + 1] = False
    if outside.any():
        # isolated points hovering at the floor are crossing jitter, not
        # nodes; genuinely disconnected structure sits far above the floor
        if np.max(rho_vals[outside]) >= 100.0 * floor * rho_vals.max():
            raise NodeError(
                "density support is disconnected; phase unwrapping is "
                "ambiguous")
        support &= ~outside
        masked = float(g.dx * rho_vals[~support].sum())

    phase = np.angle(psi.values)
    s_vals = np.zeros(g.n)
    s_vals[peak] = psi.hbar * phase[peak]
    for i in range(peak + 1, hi + 1):
        s_vals[i] = s_vals[i - 1] + psi.hbar * _wrap(phase[i] - phase[i - 1])
    for i in range(peak - 1, lo - 1, -1):
        s_vals[i] = s_vals[i + 1] + psi.hbar * _wrap(phase[i] - phase[i + 1])

    return MadelungFields(real_field(g, rho_vals), real_field(g, s_vals),
                          psi.hbar, support, masked)


def from_madelung(f, m=1.0, t=0.0):
    """Reassemble psi = sqrt(rho) exp(iS/hbar); masked points get phase 0."""
    if f.masked_mass_fraction > MAX_MASKED_MASS:
        raise DomainError(
            f"masked mass fraction {f.masked_mass_fraction:.3f} exceeds "
            f"{MAX_MASKED_MASS}; S is untrustworthy")
    total = f.grid.dx * f.rho.values.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise DomainError(f"density mass {total} is not 1 within {NORM_TOL}")
    phase = np.where(f.support, f.s.values / f.hbar, 0.0)
    vals = np.sqrt(f.rho.values) * np.exp(1j * phase)
    # rho is normalized to 1e-6; the wave function itself carries unit norm
    # to machine precision
    vals /= np.sqrt(f.grid.dx * np.sum(np.abs(vals) ** 2))
    return WaveFunction(complex_field(f.grid, vals), f.hbar, float(m), t)


# ----------------------------------------------------------------------
# Quantum term
# ----------------------------------------------------------------------

def quantum_term(rho, hbar, m, floor=DEFAULT_FLOOR):
    """-(hbar^2/2m) lap(sqrt(rho))/sqrt(rho) on the support; 0 on masked
    points.  The Laplacian is spectral: sqrt(rho) decays (or is uniform),
    so it is periodic-friendly even when S is not."""
    amp = np.sqrt(np.maximum(rho.values, 0.0))
    lap = spectral_derivative(real_field(rho.grid, amp), 2).values
    support = rho.values >= floor * rho.values.max()
    out = np.zeros(rho.grid.n)
    out[support] = -(hbar ** 2) / (2.0 * m) * lap[support] / amp[support]
    return real_field(rho.grid, out)


def interior_support(mask):
    """Support eroded by one point: difference stencils for S need both
    neighbors inside the support, so S-dependent norms (and the quantum-term
    norm they are compared against) are taken over this interior."""
    out = mask.copy()
    out[1:] &= mask[:-1]
    out[:-1] &= mask[1:]
    return out


def quantum_term_norm(rho, hbar, m, floor=DEFAULT_FLOOR, region=None):
    """L2 norm (dx-weighted) of the quantum term over the interior of the
    support, or over an explicit boolean region."""
    q = quantum_term(rho, hbar, m, floor).values
    if region is None:
        region = interior_support(rho.values >= floor * rho.values.max())
    return float(np.sqrt(rho.grid.dx * np.sum(q[region] ** 2)))


# ----------------------------------------------------------------------
# Residual evaluators
# ----------------------------------------------------------------------

def _s_gradient(s_vals, dx):
    return np.gradient(s_vals, dx, edge_order=2)


def continuity_residual(f_t1, f_t2, dt, m):
    """L2 norm of d(rho)/dt + d/dx (rho dS/dx / m) across two snapshots
    dt apart, both terms evaluated at the midpoint.

    The flux is formed on the common support (it vanishes with rho
    elsewhere) and divergenced spectrally; the time derivative is the
    centered difference, so the residual of an exactly transported pair
    measures time-discretization error only, O(dt^2).
    """
    if f_t1.grid != f_t2.grid:
        raise DomainError("snapshots live on different grids")
    g = f_t1.grid
    rho_mid = 0.5 * (f_t1.rho.values + f_t2.rho.values)
    s_mid = 0.5 * (f_t1.s.values + f_t2.s.values)
    common = f_t1.support & f_t2.support
    grad_s = _s_gradient(s_mid, g.dx)
    flux = np.where(common, rho_mid * grad_s / m, 0.0)
    div_flux = spectral_derivative(real_field(g, flux), 1).values
    drho_dt = (f_t2.rho.values - f_t1.rho.values) / dt
    return float(np.sqrt(g.dx * np.sum((drho_dt + div_flux) ** 2)))


def hj_residual(f, ds_dt, V, mode="quantum", support=None):
    """L2 norm over the support of dS/dt + (dS/dx)^2/2m + V plus, in
    quantum mode, the quantum term.

    Classical mode evaluates the same expression without the hbar-dependent
    term (it ignores f.hbar entirely); quantum mode requires hbar > 0.
    When dS/dt comes from differencing a snapshot pair, pass the pair's
    common support so edge points where dS/dt is undefined stay out of the
    norm.
    """
    if mode not in ("quantum", "classical"):
        raise DomainError(f"unknown mode {mode!r}")
    if mode == "quantum" and f.hbar <= 0:
        raise DomainError("quantum mode requires hbar > 0")
    if f.masked_mass_fraction > MAX_MASKED_MASS:
        raise DomainError(
            f"masked mass fraction {f.masked_mass_fraction:.3f} exceeds "
            f"{MAX_MASKED_MASS}")
    g = f.grid
    m = V.mass
    grad_s = _s_gradient(f.s.values, g.dx)
    integrand = (ds_dt.values + grad_s ** 2 / (2.0 * m)
                 + eval_potential(V, g.x))
    if mode == "quantum":
        integrand = integrand + quantum_term(f.rho, f.hbar, m).values
    sup = f.support if support is None else (f.support & support)
    sup = interior_support(sup)
    return float(np.sqrt(g.dx * np.sum(integrand[sup] ** 2)))


# ----------------------------------------------------------------------
# Time-consistent snapshot series
# ----------------------------------------------------------------------

def anchored_series(psis, floor=DEFAULT_FLOOR):
    """Decompose a time-ordered list of wave functions with a consistent
    global phase: each S is shifted by a whole multiple of 2*pi*hbar so
    that the value at a shared high-density anchor point changes by less
    than pi*hbar between consecutive snapshots.  Without this, dS/dt
    differencing would pick up spurious 2*pi*hbar/dt spikes."""
    fields = [to_madelung(p, floor) for p in psis]
    out = [fields[0]]
    for prev, cur in zip(out, fields[1:]):
        ref = int(np.argmax(np.minimum(prev.rho.values, cur.rho.values)))
        delta = (cur.s.values[ref] - prev.s.values[ref]) / cur.hbar
        shift = cur.hbar * (_wrap(delta) - delta)
        if shift != 0.0:
            cur = replace(cur, s=real_field(cur.grid, cur.s.values + shift))
        out.append(cur)
    return out


def ds_dt_centered(f_minus, f_plus, delta_t):
    """Centered-difference dS/dt field from two anchored snapshots
    2*delta_t apart.  Returns (field, common_support); the field is zero
    outside the common support, and the mask should be handed to
    hj_residual so those points stay out of the norm."""
    common = f_minus.support & f_plus.support
    vals = np.where(common,
                    (f_plus.s.values - f_minus.s.values) / (2.0 * delta_t),
                    0.0)
    return real_field(f_minus.grid, vals), common


# ----------------------------------------------------------------------
# Analytic Gaussian-packet fields
# ----------------------------------------------------------------------

def _width_derivatives(case, epsilon0, hbar, m, omega, t):
    if case in ("free", "constant_force"):
        beta = hbar / (m * epsilon0)
        eps = epsilon0 * (1.0 + (beta * t) ** 2)
        deps = 2.0 * epsilon0 * beta ** 2 * t
        d2eps = 2.0 * epsilon0 * beta ** 2
    else:
        aa = (hbar / (epsilon0 * m * omega)) ** 2
        c, s = np.cos(omega * t), np.sin(omega * t)
        eps = epsilon0 * (c ** 2 + aa * s ** 2)
        deps = epsilon0 * omega * np.sin(2 * omega * t) * (aa - 1.0)
        d2eps = 2.0 * epsilon0 * omega ** 2 * np.cos(2 * omega * t) * (aa - 1.0)
    return eps, deps, d2eps


def _gouy_phase(case, epsilon0, hbar, m, omega, t):
    """Accumulated phase term; its time derivative is -hbar^2/(2 m eps(t))."""
    if case in ("free", "constant_force"):
        return -(hbar / 2.0) * np.arctan(hbar * t / (m * epsilon0))
    a = epsilon0 * m * omega / hbar
    wt = omega * t
    theta = np.arctan(np.tan(wt) / a) + np.pi * np.floor(wt / np.pi + 0.5)
    return -(hbar / 2.0) * theta


def analytic_packet_fields(case, grid, epsilon0, p0, hbar, m, t,
                           omega=None, f0=None, r0=0.0, floor=DEFAULT_FLOOR):
    """Closed-form (rho, S) fields of the Gaussian packet at time t, plus the
    analytic dS/dt field, for the free, constant-force, and harmonic cases.

    S(x,t) = (m/4)(deps/eps)(x-r)^2 + p(t) x - p(t) r(t)/2 + gouy(t),
    with the width eps(t) from the closed forms and the phase term whose
    time derivative is -hbar^2/(2 m eps).  These fields satisfy the
    quantum-mode Hamilton-Jacobi residual identically (they are exact
    solutions), which the test suite exercises.
    """
    st = analytic_gaussian(case, epsilon0, p0, hbar, m, t,
                           omega=omega, f0=f0, r0=r0)
    eps, deps, d2eps = _width_derivatives(case, epsilon0, hbar, m, omega, t)
    r, p = st.r_t, st.p_t
    if case == "free":
        pdot = 0.0
        extra = 0.0
        extra_rate = 0.0
    elif case == "constant_force":
        pdot = f0
        # A linear potential leaves an uncancelled -f0*r(t)/2 in the
        # action equation's constant balance, so the phase accumulates
        # (f0/2) * integral of r dt on top of the spreading phase.
        extra = 0.5 * f0 * (r0 * t + 0.5 * p0 * t ** 2 / m
                            + f0 * t ** 3 / (6.0 * m))
        extra_rate = 0.5 * f0 * r
    else:
        pdot = -m * omega ** 2 * r
        extra = 0.0
        extra_rate = 0.0
    rdot = p / m

    x = grid.x
    u = x - r
    rho_vals = (np.pi * eps) ** -0.5 * np.exp(-(u ** 2) / eps)
    s_vals = (0.25 * m * (deps / eps) * u ** 2 + p * x - 0.5 * p * r
              + _gouy_phase(case, epsilon0, hbar, m, omega, t) + extra)
    ds_dt_vals = (0.25 * m * (d2eps / eps - (deps / eps) ** 2) * u ** 2
                  - 0.5 * m * (deps / eps) * u * rdot
                  + pdot * x - 0.5 * (pdot * r + p * rdot)
                  - hbar ** 2 / (2.0 * m * eps) + extra_rate)

    rho = real_field(grid, rho_vals / (grid.dx * rho_vals.sum()))
    fields = make_madelung(rho, real_field(grid, s_vals), hbar, floor)
    return fields, real_field(grid, ds_dt_vals)
