"""Experiment drivers: the limiting procedures as reproducible scans.

Each driver takes a RunConfig and returns a ScanResult holding one
RunRecord per scan point plus scan-level fits.  Workers are pure functions
of the configuration; records are ordered by scan index, so reruns of the
same configuration produce byte-identical CSVs.

standard_limit    fixed packet width, shrinking hbar: the hbar^2 term in
                  the action equation is measured directly (its norm) and
                  through the classical-mode residual; the scan fits the
                  scaling exponent (expected 2).
deterministic_limit
                  fixed hbar, shrinking packet width: measures the terminal
                  width blow-up A(t*) ~ eps^-1 (slope -2 for A/eps) and the
                  divergence of the width-coupling bracket ~ eps^-2 that
                  blocks a delta limit at fixed hbar.
combined_limit    width tied to hbar (eps = k hbar), shrinking both:
                  trajectory deviation from Newton and terminal width both
                  vanish for potentials of degree <= 2; for others the
                  shape deformation (excess kurtosis) persists and the
                  convolution classifier verdict is attached as evidence.
detpot            thin wrapper over the convolution classifier.
phj_demo          characteristic solution of the classical action
                  equation, with the narrow-density continuity moments and
                  the projected Newton check along a trajectory.
liouville_demo    phase-space blob transport checkpoints.

Numerics policy: grids are auto-sized per run from the packet and
potential scales (resolution follows the momentum content ~ p/hbar, so
step sizes shrink linearly with hbar and splitting errors on the means
drop as hbar^2 across a combined scan); BoundaryLeak triggers an automatic
rerun on a doubled domain, at most twice.
"""

import os
import time
from dataclasses import dataclass

import numpy as np

from . import classical, detpot, hjflow, madelung, schrodinger
from .errors import BoundaryLeak, DomainError
from .grid import make_grid, real_field
from .potential import eval_potential
from .records import (
    DETPOT_COLUMNS,
    LIOUVILLE_COLUMNS,
    PHJ_COLUMNS,
    QUANTUM_COLUMNS,
    RunRecord,
    summary_text,
    write_csv,
)

__all__ = [
    "ScanResult",
    "run_standard_limit",
    "run_deterministic_limit",
    "run_combined_limit",
    "run_detpot",
    "run_uncertainty",
    "run_phj_demo",
    "run_liouville_demo",
    "run_experiment",
    "write_outputs",
]

MAX_WIDEN_RETRIES = 2
DEFAULT_SAFETY = 0.5


@dataclass
class ScanResult:
    experiment: str
    records: list
    fits: dict
    wall_clock: float = 0.0
    field_dumps: list = None        # (filename, header, array) triples


# ----------------------------------------------------------------------
# Grid and step-size selection
# ----------------------------------------------------------------------

def _next_pow2(n):
    return 1 << int(np.ceil(np.log2(max(n, 1))))


def auto_grid(V, eps0, r0, p0, hbar, t_final, n_min=256, n_max=65536):
    """Size the domain from the classical extent plus packet tails, and the
    resolution from the momentum content (p_max/hbar plus the packet's own
    spectral width at its narrowest)."""
    m = V.mass
    if V.kind == "harmonic":
        w = V.omega
        amp = float(np.hypot(r0, p0 / (m * w)))
        ratio = (hbar / (eps0 * m * w)) ** 2
        eps_max = eps0 * max(1.0, ratio)
        eps_min = eps0 * min(1.0, ratio)
        extent = amp
        p_max = max(abs(p0), m * w * amp)
    elif V.kind in ("free", "constant_force"):
        f0 = V.f0 if V.kind == "constant_force" else 0.0
        candidates = [r0, r0 + p0 * t_final / m
                      + 0.5 * f0 * t_final ** 2 / m]
        if f0 != 0.0:
            t_v = -p0 / f0
            if 0 < t_v < t_final:
                candidates.append(r0 + p0 * t_v / m
                                  + 0.5 * f0 * t_v ** 2 / m)
        extent = max(abs(c) for c in candidates)
        eps_max = eps0 * (1.0 + (hbar * t_final / (m * eps0)) ** 2)
        eps_min = eps0
        p_max = max(abs(p0), abs(p0 + f0 * t_final))
    else:
        # generic confining polynomial (or table): energy estimate with the
        # packet's zero-point pressure, turning points from a coarse scan
        energy = (0.5 * p0 ** 2 / m + eval_potential(V, r0)
                  + hbar ** 2 / (4.0 * m * eps0))
        span = max(8.0, 4.0 * (abs(r0) + 1.0))
        xs = np.linspace(-span, span, 4001)
        vs = eval_potential(V, xs)
        reachable = xs[vs <= energy + 1e-12]
        if reachable.size == 0:
            reachable = np.array([r0])
        extent = float(np.max(np.abs(reachable))) + 0.5
        v_min = float(np.min(vs))
        p_max = float(np.sqrt(2 * m * max(energy - v_min, 0.0))) + abs(p0)
        # width can breathe; bracket it by a factor 4 around eps0
        eps_min = 0.25 * eps0
        eps_max = 4.0 * eps0
    sigma_max = np.sqrt(eps_max / 2.0)
    sigma_min = np.sqrt(eps_min / 2.0)
    # the leak check watches the outer 5% of points per side, so the packet
    # (7 sigma covers ~1e-12 of the mass) must fit in the central 90%
    half = 1.12 * (extent + 7.0 * sigma_max) + 0.5
    # spectral sufficiency: cover the momentum content p_max/hbar plus the
    # packet's own spectral width (Gaussian tail ~ exp(-(k sigma)^2/2) needs
    # k sigma ~ 8 to reach the 1e-10 leak floor); the step-size rule then
    # scales dt ~ 1/k_max^2, so resolution is not over-provisioned
    k_need = 1.3 * p_max / hbar + 8.0 / sigma_min
    n_k = k_need * (2 * half) / np.pi
    n = int(np.clip(_next_pow2(max(n_k, n_min)), n_min, n_max))
    return make_grid(-half, half, n)


def _choose_dt(grid, V, hbar, m, t0, t1, safety=DEFAULT_SAFETY):
    return safety * schrodinger.max_stable_dt(grid, V, hbar, m, t0, t1)


# ----------------------------------------------------------------------
# Quantum run with per-snapshot records
# ----------------------------------------------------------------------

@dataclass
class QuantumRunData:
    grid: object
    times: np.ndarray
    x_mean: np.ndarray
    p_mean: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    uncertainty: np.ndarray
    width: np.ndarray
    kurtosis: np.ndarray
    quantum_norm: np.ndarray
    hj_classical: np.ndarray
    fields: list                   # (t, rho values, S values) if collected

    def rows(self):
        out = []
        for i in range(self.times.size):
            out.append((self.times[i], self.x_mean[i], self.p_mean[i],
                        self.var_x[i], self.var_p[i], self.uncertainty[i],
                        self.width[i], self.kurtosis[i],
                        self.quantum_norm[i], self.hj_classical[i]))
        return tuple(out)


def _snapshot_row(triple, V, dt, one_sided=False):
    """Observables plus action-equation diagnostics from a snapshot triple
    (one solver step apart).  The snapshot state is triple[0] for the
    one-sided (t=0) form and triple[1] for the centered form."""
    fields = madelung.anchored_series(list(triple))
    if one_sided:
        f0, f1, f2 = fields
        snap = triple[0]
        common = f0.support & f1.support & f2.support
        vals = np.where(
            common,
            (-3.0 * f0.s.values + 4.0 * f1.s.values - f2.s.values) / (2 * dt),
            0.0)
        ds_dt = real_field(snap.grid, vals)
        mid = f0
    else:
        snap = triple[1]
        fm, mid, fp = fields
        ds_dt, common = madelung.ds_dt_centered(fm, fp, dt)
    obs = schrodinger.observables(snap)
    qnorm = madelung.quantum_term_norm(mid.rho, snap.hbar, snap.m)
    hj_cl = madelung.hj_residual(mid, ds_dt, V, "classical", support=common)
    return obs, schrodinger.excess_kurtosis(snap), qnorm, hj_cl, mid


def quantum_run(V, grid, eps0, r0, p0, hbar, t_final, n_snapshots,
                safety=DEFAULT_SAFETY, dt=None, collect_fields=False):
    """Propagate a packet and collect the pinned per-snapshot observables.

    Snapshots are uniform in time; at each one the state a single solver
    step before and after is also captured, so the dS/dt entering the
    classical-residual column is a centered difference (one-sided at t=0).
    """
    m = V.mass
    if dt is None:
        dt = _choose_dt(grid, V, hbar, m, 0.0, t_final, safety)
    t_snap = t_final / n_snapshots
    # >= 3 steps per snapshot interval so the one-sided triple at t=0 and
    # the first centered triple do not overlap
    n_sub = max(3, int(np.ceil(t_snap / dt)))
    dt = t_snap / n_sub

    psi = schrodinger.init_gaussian(grid, eps0, r0, p0, hbar, m)
    n_rows = n_snapshots + 1
    data = QuantumRunData(
        grid, np.empty(n_rows), np.empty(n_rows), np.empty(n_rows),
        np.empty(n_rows), np.empty(n_rows), np.empty(n_rows),
        np.empty(n_rows), np.empty(n_rows), np.empty(n_rows),
        np.empty(n_rows), [])

    def record(i, t, obs, kurt, qnorm, hj_cl, mid):
        data.times[i] = t
        data.x_mean[i] = obs.x_mean
        data.p_mean[i] = obs.p_mean
        data.var_x[i] = obs.var_x
        data.var_p[i] = obs.var_p
        data.uncertainty[i] = obs.uncertainty_product
        data.width[i] = obs.width
        data.kurtosis[i] = kurt
        data.quantum_norm[i] = qnorm
        data.hj_classical[i] = hj_cl
        if collect_fields:
            data.fields.append((t, mid.rho.values.copy(),
                                mid.s.values.copy()))

    # t = 0 row: one-sided triple (psi0, psi0+dt, psi0+2dt)
    psi_b = schrodinger.propagate(psi, V, dt, 1)
    psi_c = schrodinger.propagate(psi_b, V, dt, 1)
    obs, kurt, qnorm, hj_cl, mid = _snapshot_row(
        (psi, psi_b, psi_c), V, dt, one_sided=True)
    record(0, 0.0, obs, kurt, qnorm, hj_cl, mid)

    cur = psi_c          # at step 2
    cur_step = 2
    for i in range(1, n_snapshots + 1):
        target = i * n_sub
        if target - 1 > cur_step:
            cur = schrodinger.propagate(cur, V, dt, target - 1 - cur_step)
        psi_m = cur
        psi_0 = schrodinger.propagate(psi_m, V, dt, 1)
        psi_p = schrodinger.propagate(psi_0, V, dt, 1)
        cur, cur_step = psi_p, target + 1
        obs, kurt, qnorm, hj_cl, mid = _snapshot_row(
            (psi_m, psi_0, psi_p), V, dt)
        record(i, i * t_snap, obs, kurt, qnorm, hj_cl, mid)
    return data


def quantum_run_autowiden(V, grid, eps0, r0, p0, hbar, t_final, n_snapshots,
                          safety=DEFAULT_SAFETY, collect_fields=False):
    """quantum_run with the domain-doubling retry policy on BoundaryLeak."""
    for attempt in range(MAX_WIDEN_RETRIES + 1):
        try:
            return quantum_run(V, grid, eps0, r0, p0, hbar, t_final,
                               n_snapshots, safety,
                               collect_fields=collect_fields)
        except BoundaryLeak:
            if attempt == MAX_WIDEN_RETRIES:
                raise
            half = grid.length            # doubled half-width
            grid = make_grid(-half, half, min(2 * grid.n, 1 << 17))
    raise AssertionError("unreachable")


# ----------------------------------------------------------------------
# Scan drivers
# ----------------------------------------------------------------------

def _field_dump_entries(run_index, data):
    """(filename, header, array) triples for the optional per-snapshot
    field dumps (x, rho, S columns)."""
    out = []
    for j, (t, rho, s) in enumerate(data.fields):
        arr = np.column_stack([data.grid.x, rho, s])
        out.append((f"run_{run_index:03d}_fields_{j:03d}.csv",
                    f"# t = {t!r}\nx,rho,S", arr))
    return out


def _decreasing_scan(values, name, minimum=3, span=99.0):
    vals = [float(v) for v in values]
    if len(vals) < minimum:
        raise DomainError(f"{name} needs at least {minimum} entries")
    if any(v <= 0 for v in vals):
        raise DomainError(f"{name} entries must be positive")
    if any(b >= a for a, b in zip(vals, vals[1:])):
        raise DomainError(f"{name} must be strictly decreasing")
    if span is not None and vals[0] / vals[-1] < span:
        raise DomainError(f"{name} must span at least two decades")
    return vals


def _loglog_slope(x, y):
    return float(np.polyfit(np.log(np.asarray(x)),
                            np.log(np.asarray(y)), 1)[0])


def run_standard_limit(cfg):
    """hbar scan at fixed packet width: quantum-term norm and classical
    residual per snapshot, plus the scaling fit of the terminal norm."""
    t0 = time.perf_counter()
    V = cfg.potential()
    eps0, r0, p0 = cfg.packet()
    hbar_list = _decreasing_scan(
        cfg.get_float_list("scan", "hbar_list"), "hbar_list")
    t_final = cfg.get_float("numerics", "t_final")
    n_snapshots = cfg.get_int("numerics", "n_snapshots", 16)
    records = []
    terminal_norms = []
    residual_ratio = []
    dumps = []
    for hbar in hbar_list:
        grid = cfg.grid_spec() or auto_grid(V, eps0, r0, p0, hbar, t_final)
        data = quantum_run_autowiden(V, grid, eps0, r0, p0, hbar, t_final,
                                     n_snapshots,
                                     collect_fields=cfg.dump_fields())
        dumps.extend(_field_dump_entries(len(records), data))
        terminal_norms.append(data.quantum_norm[-1])
        residual_ratio.append(data.hj_classical[-1] / data.quantum_norm[-1])
        records.append(RunRecord(
            "standard_limit", f"hbar={hbar!r}", cfg.echo_lines(),
            QUANTUM_COLUMNS, data.rows(),
            fits={"terminal_quantum_term_norm": data.quantum_norm[-1],
                  "classical_over_quantum_norm": residual_ratio[-1]}))
    fits = {
        "hbar_list": hbar_list,
        "terminal_quantum_term_norms": terminal_norms,
        "quantum_term_exponent": _loglog_slope(hbar_list, terminal_norms),
        "classical_residual_over_quantum_norm": residual_ratio,
    }
    return ScanResult("standard_limit", records, fits,
                      time.perf_counter() - t0, dumps)


def _bracket_max(grid, eps, hbar, m, r_star):
    """Max over the grid of the width-coupling bracket
    (hbar^2 / 2 m eps^2) |eps - (x - r)^2| that the fixed-width ansatz
    inserts into the action equation."""
    u2 = (grid.x - r_star) ** 2
    return float(np.max(np.abs(hbar ** 2 / (2 * m * eps ** 2) * (eps - u2))))


def run_deterministic_limit(cfg):
    """Width scan at fixed hbar: terminal width blow-up and the divergence
    of the coupling bracket."""
    t0 = time.perf_counter()
    V = cfg.potential()
    _, r0, p0 = cfg.packet()
    hbar = cfg.get_float("scan", "hbar", 1.0)
    eps_list = _decreasing_scan(
        cfg.get_float_list("scan", "epsilon_list"), "epsilon_list",
        span=None)
    t_star = cfg.get_float("numerics", "t_star", 1.0)
    n_snapshots = cfg.get_int("numerics", "n_snapshots", 8)
    if V.kind == "harmonic":
        coherent = hbar / (V.mass * V.omega)
        for eps in eps_list:
            if abs(eps - coherent) <= 1e-9 * coherent:
                raise DomainError(
                    f"epsilon={eps} equals the stationary width hbar/(m w); "
                    f"a fixed-hbar width scan must vary epsilon away from it")

    # shared reference grid (largest domain: the smallest width spreads most)
    ref_grid = cfg.grid_spec() or auto_grid(V, eps_list[-1], r0, p0, hbar,
                                            t_star)
    n_ref = int(np.ceil(t_star / 1e-3))
    traj = classical.newton_integrate(V, r0, p0, t_star / n_ref, n_ref)
    r_star = traj.r[-1]

    records = []
    widths = []
    brackets = []
    dumps = []
    for eps in eps_list:
        grid = cfg.grid_spec() or auto_grid(V, eps, r0, p0, hbar, t_star)
        data = quantum_run_autowiden(V, grid, eps, r0, p0, hbar, t_star,
                                     n_snapshots,
                                     collect_fields=cfg.dump_fields())
        dumps.extend(_field_dump_entries(len(records), data))
        widths.append(data.width[-1])
        brackets.append(_bracket_max(ref_grid, eps, hbar, V.mass, r_star))
        records.append(RunRecord(
            "deterministic_limit", f"epsilon={eps!r}", cfg.echo_lines(),
            QUANTUM_COLUMNS, data.rows(),
            fits={"terminal_width": widths[-1],
                  "width_over_epsilon": widths[-1] / eps,
                  "bracket_max": brackets[-1]}))
    ratio = [w / e for w, e in zip(widths, eps_list)]
    fits = {
        "epsilon_list": eps_list,
        "terminal_widths": widths,
        "width_exponent": _loglog_slope(eps_list, widths),
        "width_over_epsilon_exponent": _loglog_slope(eps_list, ratio),
        "bracket_exponent": _loglog_slope(eps_list, brackets),
    }
    return ScanResult("deterministic_limit", records, fits,
                      time.perf_counter() - t0, dumps)


def run_combined_limit(cfg):
    """hbar scan with eps = k hbar: trajectory deviation from Newton,
    terminal width, and shape deformation, with the classifier verdict
    attached as joint evidence."""
    t0 = time.perf_counter()
    V = cfg.potential()
    _, r0, p0 = cfg.packet()
    k = cfg.get_float("scan", "k")
    if k <= 0:
        raise DomainError(f"scan k must be positive, got {k}")
    hbar_list = _decreasing_scan(
        cfg.get_float_list("scan", "hbar_list"), "hbar_list",
        minimum=2, span=None)
    t_final = cfg.get_float("numerics", "t_final")
    n_snapshots = cfg.get_int("numerics", "n_snapshots", 64)

    t_snap = t_final / n_snapshots
    n_per = int(np.ceil(t_snap / 1e-4))
    traj = classical.newton_integrate(
        V, r0, p0, t_snap / n_per, n_per * n_snapshots, save_stride=n_per)

    records = []
    deviations = []
    terminal_widths = []
    kurtosis_max = []
    dumps = []
    prev_dt = None
    for hbar in hbar_list:
        eps = k * hbar
        grid = cfg.grid_spec() or auto_grid(V, eps, r0, p0, hbar, t_final)
        dt = _choose_dt(grid, V, hbar, V.mass, 0.0, t_final)
        if prev_dt is not None:
            # tighten monotonically across the scan so splitting error on
            # the means decreases with hbar
            dt = min(dt, 0.9 * prev_dt)
        prev_dt = dt
        data = quantum_run(V, grid, eps, r0, p0, hbar, t_final, n_snapshots,
                           dt=dt, collect_fields=cfg.dump_fields())
        dumps.extend(_field_dump_entries(len(records), data))
        dev = float(np.max(np.abs(data.x_mean - traj.r)))
        deviations.append(dev)
        terminal_widths.append(data.width[-1])
        kurtosis_max.append(float(np.max(np.abs(data.kurtosis))))
        records.append(RunRecord(
            "combined_limit", f"hbar={hbar!r}", cfg.echo_lines(),
            QUANTUM_COLUMNS, data.rows(),
            fits={"epsilon": eps,
                  "trajectory_deviation_max": dev,
                  "terminal_width": terminal_widths[-1],
                  "kurtosis_excess_max": kurtosis_max[-1]}))
    report = detpot.classify(V)
    fits = {
        "k": k,
        "hbar_list": hbar_list,
        "trajectory_deviation_max": deviations,
        "terminal_widths": terminal_widths,
        "kurtosis_excess_max": kurtosis_max,
        "detpot_verdict": report.verdict,
    }
    return ScanResult("combined_limit", records, fits,
                      time.perf_counter() - t0, dumps)


def run_detpot(cfg):
    """Thin wrapper over the convolution classifier."""
    t0 = time.perf_counter()
    V = cfg.potential()
    grid = cfg.grid_spec() or detpot.default_grid()
    eps_raw = cfg.get("scan", "epsilon_list", None)
    eps_list = (detpot.default_epsilon_list(grid) if eps_raw is None
                else cfg.get_float_list("scan", "epsilon_list"))
    tol = cfg.get_float("numerics", "tol", detpot.DEFAULT_TOL)
    report = detpot.classify(V, eps_list, tol, grid)
    rows = tuple((row["epsilon"], row["residual"],
                  row["fourier_residual_norm"]) for row in report.evidence)
    record = RunRecord("detpot", "classification", cfg.echo_lines(),
                       DETPOT_COLUMNS, rows,
                       fits={"verdict": report.verdict,
                             "scaling_exponent": report.scaling_exponent})
    fits = {"verdict": report.verdict,
            "scaling_exponent": report.scaling_exponent,
            "tol": tol}
    return ScanResult("detpot", [record], fits, time.perf_counter() - t0)


def run_uncertainty(cfg):
    """Single quantum run recording the uncertainty-product time series and
    its floor versus hbar/2."""
    t0 = time.perf_counter()
    V = cfg.potential()
    eps0, r0, p0 = cfg.packet()
    hbar = cfg.get_float("scan", "hbar", 1.0)
    t_final = cfg.get_float("numerics", "t_final")
    n_snapshots = cfg.get_int("numerics", "n_snapshots", 64)
    grid = cfg.grid_spec() or auto_grid(V, eps0, r0, p0, hbar, t_final)
    data = quantum_run_autowiden(V, grid, eps0, r0, p0, hbar, t_final,
                                 n_snapshots, collect_fields=cfg.dump_fields())
    u_min = float(np.min(data.uncertainty))
    fits = {
        "hbar": hbar,
        "uncertainty_min": u_min,
        "hbar_over_2": hbar / 2.0,
        "floor_satisfied": bool(u_min >= 0.5 * hbar * (1.0 - 1e-6)),
    }
    record = RunRecord("simulate", f"hbar={hbar!r}", cfg.echo_lines(),
                       QUANTUM_COLUMNS, data.rows(), fits=dict(fits))
    return ScanResult("simulate", [record], fits, time.perf_counter() - t0,
                      _field_dump_entries(0, data))


def run_phj_demo(cfg):
    """Characteristic solution diagnostics along a Newton trajectory."""
    t0 = time.perf_counter()
    V = cfg.potential()
    eps, r0, p0 = cfg.packet()
    c2 = cfg.get_float("packet", "s0_curvature", 0.0)
    t_final = cfg.get_float("numerics", "t_final")
    n_report = cfg.get_int("numerics", "n_snapshots", 9)
    grid = cfg.grid_spec() or make_grid(-8.0, 8.0, 256)

    s0 = real_field(grid, p0 * grid.x + c2 * grid.x ** 2)
    delta = 1e-3
    report_times = np.linspace(0.1 * t_final, 0.95 * t_final, n_report)
    snapshot_times = np.unique(np.concatenate(
        [report_times - delta, report_times, report_times + delta]))
    sol = hjflow.solve_hj(s0, V, t_final, dt=5e-5,
                          snapshot_times=snapshot_times)

    n_traj = int(np.ceil(t_final / 1e-4))
    traj = classical.newton_integrate(V, r0, p0, t_final / n_traj, n_traj,
                                      save_stride=max(1, n_traj // 4000))
    r_t, p_t = classical.sample_trajectory(traj, sol.times)
    term1, term2, p_gap = hjflow.deterministic_continuity_check(
        eps, sol, r_t, p_t)
    newton_res = hjflow.projected_newton_check(sol, V, r_t)

    rows = []
    for t_rep in report_times:
        i = int(np.argmin(np.abs(sol.times - t_rep)))
        hj_res = hjflow.classical_hj_residual(sol, V, i)
        rows.append((sol.times[i], hj_res, term1[i], term2[i], p_gap[i],
                     newton_res[i - 1]))
    fits = {
        "epsilon": eps,
        "hj_residual_max": float(max(r[1] for r in rows)),
        "projected_newton_residual_max": float(max(r[5] for r in rows)),
        "caustic_time": sol.fan.t_crossing,
    }
    record = RunRecord("phj_demo", "characteristics", cfg.echo_lines(),
                       PHJ_COLUMNS, tuple(rows), fits=dict(fits))
    return ScanResult("phj_demo", [record], fits, time.perf_counter() - t0)


def run_liouville_demo(cfg):
    """Phase-space blob transport with mass/center/L1 checkpoints."""
    t0 = time.perf_counter()
    V = cfg.potential()
    eps, r0, p0 = cfg.packet()
    t_final = cfg.get_float("numerics", "t_final")
    n_check = cfg.get_int("numerics", "n_snapshots", 8)
    dt = cfg.get_float("numerics", "dt", 1e-3)
    bounds = cfg.get("numerics", "phase_grid", "-3,3,-3,3,256,256")
    parts = [p.strip() for p in str(bounds).split(",")]
    if len(parts) != 6:
        raise DomainError(
            "[numerics] phase_grid must be xmin,xmax,pmin,pmax,nx,np")
    x_min, x_max, p_min, p_max = map(float, parts[:4])
    nx, n_p = int(parts[4]), int(parts[5])
    sigma = np.sqrt(eps / 2.0)
    rho0 = classical.gaussian_phase_blob(r0, p0, sigma, sigma,
                                         x_min, x_max, p_min, p_max, nx, n_p)
    rows = []
    for t in np.linspace(t_final / n_check, t_final, n_check):
        rho_t = classical.liouville_evolve(rho0, V, t, dt)
        w = rho_t.values * rho_t.dx * rho_t.dp
        mass = float(w.sum())
        X, P = np.meshgrid(rho_t.x_nodes, rho_t.p_nodes, indexing="ij")
        cx = float((w * X).sum() / mass)
        cp = float((w * P).sum() / mass)
        l1 = float(np.sum(np.abs(rho_t.values - rho0.values))
                   * rho_t.dx * rho_t.dp)
        rows.append((t, mass, cx, cp, l1))
    fits = {"l1_final": rows[-1][4], "mass_final": rows[-1][1]}
    record = RunRecord("liouville_demo", "blob", cfg.echo_lines(),
                       LIOUVILLE_COLUMNS, tuple(rows), fits=dict(fits))
    return ScanResult("liouville_demo", [record], fits,
                      time.perf_counter() - t0)


# ----------------------------------------------------------------------
# Dispatch and output writing
# ----------------------------------------------------------------------

_RUNNERS = {
    "standard_limit": run_standard_limit,
    "deterministic_limit": run_deterministic_limit,
    "combined_limit": run_combined_limit,
    "detpot": run_detpot,
    "phj_demo": run_phj_demo,
    "liouville_demo": run_liouville_demo,
}


def run_experiment(cfg):
    return _RUNNERS[cfg.experiment](cfg)


def write_outputs(result, outdir):
    """One CSV per run record plus one plain-text scan summary (and the
    optional field dumps); returns the written paths, records ordered by
    scan index."""
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for i, rec in enumerate(result.records):
        paths.append(write_csv(rec, os.path.join(outdir, f"run_{i:03d}.csv")))
    for fname, header, arr in (result.field_dumps or ()):
        path = os.path.join(outdir, fname)
        lines = [header]
        for row in arr:
            lines.append(",".join(repr(float(v)) for v in row))
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        paths.append(path)
    summary = summary_text(result.experiment, result.records, result.fits,
                           result.wall_clock)
    spath = os.path.join(outdir, "summary.txt")
    with open(spath, "w", encoding="utf-8") as fh:
        fh.write(summary)
    paths.append(spath)
    return paths
