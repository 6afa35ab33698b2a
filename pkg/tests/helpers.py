"""Shared test utilities: independent quadrature/integration oracles and
tolerance helpers.  Oracles here deliberately avoid the package's own
numerics (plain Riemann/Simpson sums, hand-rolled Verlet) so that every
cross-check stays independent of the code path it validates."""

import numpy as np


def simpson_quad(f, a, b, n=200001):
    """Composite Simpson quadrature on [a, b]; n must be odd."""
    if n % 2 == 0:
        n += 1
    x = np.linspace(a, b, n)
    y = f(x)
    h = (b - a) / (n - 1)
    return h / 3.0 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-2:2].sum())


def verlet_oracle(force, m, r0, p0, dt, n_steps):
    """Plain velocity-Verlet reference integrator (scalar, no saves)."""
    r, p = float(r0), float(p0)
    f = force(r)
    for _ in range(n_steps):
        ph = p + 0.5 * dt * f
        r += dt * ph / m
        f = force(r)
        p = ph + 0.5 * dt * f
    return r, p


def rel_err(value, ref, floor=1.0):
    """Relative error with an absolute floor for near-zero references."""
    return abs(value - ref) / max(abs(ref), floor)


def gauss_rho(x, eps, r=0.0):
    """Normalized Gaussian density with width parameter eps (variance eps/2)."""
    return (np.pi * eps) ** (-0.5) * np.exp(-((x - r) ** 2) / eps)
