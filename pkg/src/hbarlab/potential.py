"""External potential V(x, t) and its force -dV/dx.

Every built-in kind (free, constant force, harmonic) reduces internally to
polynomial coefficients, so evaluation and the hot integrator kernels share
one code path.  Tabulated potentials use nearest-node lookup and a spectral
derivative for the force; they exist for exploratory use only.

Time dependence is supported through a piecewise-constant schedule of
polynomial coefficients.  The particle mass lives here so that every
dynamical module reads a single source of truth.  Specs are immutable and
evaluation is pure, so they are safe to share across threads.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .grid import RealField, real_field

__all__ = ["PotentialSpec", "eval_potential", "eval_force", "force_field"]

MAX_DEGREE = 8


def _as_coeffs(c):
    c = np.asarray(c, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("polynomial coefficients must be a 1D sequence")
    if c.size - 1 > MAX_DEGREE:
        raise DomainError(
            f"polynomial degree {c.size - 1} exceeds the supported maximum "
            f"{MAX_DEGREE}")
    if not np.all(np.isfinite(c)):
        raise DomainError("polynomial coefficients must be finite")
    c = c.copy()
    c.setflags(write=False)
    return c


@dataclass(frozen=True)
class PotentialSpec:
    """Potential specification: kind tag, mass, and kind-specific data.

    Use the constructors (`free`, `constant_force`, `harmonic`, `polynomial`,
    `tabulated`) rather than instantiating directly.
    """

    kind: str
    mass: float
    coeffs: np.ndarray = None            # V polynomial, low -> high degree
    schedule: tuple = None               # ((t_start, coeffs), ...) sorted
    table: RealField = None
    omega: float = None
    f0: float = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def free(mass=1.0):
        _check_mass(mass)
        return PotentialSpec("free", float(mass), coeffs=_as_coeffs([0.0]))

    @staticmethod
    def constant_force(f0, mass=1.0):
        _check_mass(mass)
        f0 = float(f0)
        return PotentialSpec("constant_force", float(mass),
                             coeffs=_as_coeffs([0.0, -f0]), f0=f0)

    @staticmethod
    def harmonic(mass, omega):
        _check_mass(mass)
        omega = float(omega)
        if omega <= 0:
            raise DomainError(f"harmonic frequency must be positive, got {omega}")
        c = _as_coeffs([0.0, 0.0, 0.5 * mass * omega * omega])
        return PotentialSpec("harmonic", float(mass), coeffs=c, omega=omega)

    @staticmethod
    def polynomial(coeffs, mass=1.0, schedule=None):
        """Static polynomial V(x) = sum c_j x^j, or a piecewise-constant
        schedule ((t_start, coeffs), ...) switching coefficients over time."""
        _check_mass(mass)
        if schedule is not None:
            sched = tuple(sorted((float(t), _as_coeffs(c)) for t, c in schedule))
            if not sched:
                raise DomainError("empty coefficient schedule")
            return PotentialSpec("polynomial", float(mass),
                                 coeffs=sched[0][1], schedule=sched)
        return PotentialSpec("polynomial", float(mass), coeffs=_as_coeffs(coeffs))

    @staticmethod
    def tabulated(table, mass=1.0):
        _check_mass(mass)
        if not isinstance(table, RealField):
            raise DomainError("tabulated potential requires a RealField")
        return PotentialSpec("tabulated", float(mass), table=table)

    # -- helpers -----------------------------------------------------------

    @property
    def is_time_dependent(self):
        return self.schedule is not None

    def coeffs_at(self, t):
        if self.schedule is None:
            return self.coeffs
        out = self.schedule[0][1]
        for t_start, c in self.schedule:
            if t_start <= t:
                out = c
            else:
                break
        return out

    def force_coeffs_at(self, t):
        """Coefficients of F(x) = -dV/dx, low -> high degree."""
        c = self.coeffs_at(t)
        if c.size == 1:
            return np.zeros(1)
        j = np.arange(1, c.size)
        return -(j * c[1:])


def _check_mass(mass):
    if float(mass) <= 0:
        raise DomainError(f"mass must be positive, got {mass}")


def _table_lookup(table, x):
    g = table.grid
    x = np.asarray(x, dtype=float)
    if np.any(x < g.x_min) or np.any(x > g.x_max):
        raise DomainError(
            f"tabulated lookup outside grid range [{g.x_min}, {g.x_max}]")
    idx = np.rint((x - g.x_min) / g.dx).astype(int)
    idx = np.minimum(idx, g.n - 1)
    return table.values[idx]


def eval_potential(spec, x, t=0.0):
    """V(x, t); x may be a scalar or an array."""
    if spec.kind == "tabulated":
        out = _table_lookup(spec.table, x)
    else:
        c = spec.coeffs_at(t)
        out = np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c)
    if np.ndim(x) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def eval_force(spec, x, t=0.0):
    """F(x, t) = -dV/dx; analytic for polynomial kinds.

    Tabulated forces use a second-order finite difference of the table
    (one-sided at the ends): tables are not periodic in general, so a
    spectral derivative would ring; the difference stencil is exact for
    quadratic tables and boundary-safe.
    """
    if spec.kind == "tabulated":
        g = spec.table.grid
        dv = np.gradient(spec.table.values, g.dx, edge_order=2)
        out = -_table_lookup(RealField(g, dv), x)
    else:
        fc = spec.force_coeffs_at(t)
        out = np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), fc)
    if np.ndim(x) == 0:
        return float(out)
    return np.asarray(out, dtype=float)


def force_field(spec, grid, t=0.0):
    """Force sampled on a grid as a RealField."""
    return real_field(grid, eval_force(spec, grid.x, t))
