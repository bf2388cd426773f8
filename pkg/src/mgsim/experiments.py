"""High-level experiment drivers behind the command-line interface.

Each driver composes the eigenvalue machinery with the time integrator and
returns a plain report object; file output (CSV tables, manifests) lives in
small writer helpers so the drivers stay testable.
"""

import csv
import math
import platform
import sys
from dataclasses import dataclass, field

import numpy as np
import scipy

from .errors import NoRootError
from .eigen import (
    SweepResult,
    assemble_eigenfunction,
    continuum_lower_bound,
    illposedness_sweep,
    optimize_growth,
    solve_sigma_star,
)
from .fields import Grid, PlaneSpec, cosine_mode, l2_norm, sine_vertical
from .solver import (
    Diagnostics,
    SolverConfig,
    SourceSpec,
    growth_rate_fit,
    run,
)
from .symbol import PhysParams, plane_bound_scan


@dataclass
class InstabilityReport:
    """Outcome of the steady-state instability experiment."""

    params: PhysParams
    box: int
    k1: int
    k2: int
    sigma_star: float
    lb_max: float
    lb_argmax: tuple
    continuum_k: tuple
    continuum_lb: float
    fitted_rate: float
    r_squared: float
    fit_window: tuple
    seed_amplitude: float
    base_l2: float
    diag: Diagnostics = field(repr=False)
    table: list = field(repr=False)


def instability(params, *, box=12, n=48, dt=0.01, t_end=8.0,
                seed_rel=1e-6, fit_start=1.0, record_every=10, depth=64):
    """Seed the steady state with its most unstable eigenmode and time it.

    The steady profile sin(m x3) is held by its balancing source; the
    perturbation is the fastest-growing eigenmode over the integer box,
    scaled to ``seed_rel`` of the background L2 norm.  The departure from
    the steady state is fitted for an exponential rate, which the report
    pairs with the predicted sigma*.

    Raises NoRootError when no mode in the box is unstable (the steady
    state is then simply observed to hold).
    """
    opt = optimize_growth(params, box=box, depth=depth)
    sol = opt.solution
    grid = Grid(n, n, n)
    background = sine_vertical(grid, params.m)
    mode = assemble_eigenfunction(sol, grid)
    base_l2 = l2_norm(background)
    seed = seed_rel * base_l2 / l2_norm(mode)
    theta0 = background + seed * mode

    cfg = SolverConfig(
        dt=dt, t_end=t_end, record_every=record_every,
        source=SourceSpec("steady_balance", m=params.m),
    )
    _, diag = run(theta0, params, cfg, reference=background)

    # fit only while the departure is still small against the background
    # (past that the linearization, and hence the predicted rate, is moot)
    linear = diag.ref_l2 < 1e-2 * base_l2
    t_stop = float(diag.times[linear][-1]) if linear.any() else float(
        diag.times[-1])
    rate, r2 = growth_rate_fit(diag, fit_start, t_stop, series="ref_l2")

    return InstabilityReport(
        params=params, box=box, k1=opt.k1, k2=opt.k2,
        sigma_star=opt.sigma_star, lb_max=opt.lb_max,
        lb_argmax=opt.lb_argmax,
        continuum_k=(opt.continuum_k1, opt.continuum_k2),
        continuum_lb=continuum_lower_bound(params),
        fitted_rate=rate, r_squared=r2, fit_window=(fit_start, t_stop),
        seed_amplitude=seed, base_l2=base_l2, diag=diag, table=opt.table,
    )


@dataclass
class PlaneArm:
    gamma: float
    restricted: bool
    diag: Diagnostics = field(repr=False)
    off_plane_max: float
    departure_factor: float


@dataclass
class PlaneDemoReport:
    """Contrast between plane-confined runs and a contaminated control."""

    plane: PlaneSpec
    plane_constant: float
    eps_kappa: float
    arms: list
    control: PlaneArm
    control_rate: float
    control_r2: float
    control_sigma_ref: float
    control_mode: tuple


def plane_demo(*, plane=None, gammas=(0.3, 0.5, 0.8), eps_kappa=0.02,
               n2=1.0, m=1, n=24, dt=0.01, t_end=5.0, seed=1e-4,
               control_mode=(1, 2, 1), record_every=50, kmax_constant=32):
    """Confinement to a bounded-multiplier plane versus leaking off it.

    For each dissipation order, the steady state is perturbed by an
    on-plane mode and evolved with the restriction enforced: the off-plane
    content stays identically zero and the departure stays tame even in
    regimes that are ill posed off the plane.  The control arm seeds an
    off-plane mode at the smallest gamma without the restriction and
    watches it grow at the rate the eigenvalue problem predicts.
    """
    plane = plane if plane is not None else PlaneSpec(1, 1)
    grid = Grid(n, n, n)
    background = sine_vertical(grid, m)
    src = SourceSpec("steady_balance", m=m)
    c_plane = plane_bound_scan(plane.q_num, plane.q_den, kmax_constant, n2)

    # an on-plane seed: the smallest wavevector pair on the plane
    on_k1, on_k2 = plane.q_den, plane.q_num

    arms = []
    for gamma in gammas:
        params = PhysParams(n2=n2, m=m, eps_kappa=eps_kappa, gamma=gamma)
        theta0 = background + cosine_mode(grid, (on_k1, on_k2, 1), seed)
        cfg = SolverConfig(dt=dt, t_end=t_end, record_every=record_every,
                           plane=plane, restrict_to_plane=True, source=src)
        _, diag = run(theta0, params, cfg, reference=background)
        arms.append(PlaneArm(
            gamma=gamma, restricted=True, diag=diag,
            off_plane_max=float(np.max(diag.off_plane)),
            departure_factor=float(diag.ref_l2[-1] / diag.ref_l2[0]),
        ))

    gamma0 = gammas[0]
    params0 = PhysParams(n2=n2, m=m, eps_kappa=eps_kappa, gamma=gamma0)
    ck = tuple(int(v) for v in control_mode)
    if plane.contains(ck[0], ck[1]):
        raise ValueError(f"control mode {ck} lies on the plane {plane}")
    theta0 = background + cosine_mode(grid, ck, seed)
    cfg = SolverConfig(dt=dt, t_end=t_end, record_every=record_every,
                       plane=plane, source=src)
    _, cdiag = run(theta0, params0, cfg, reference=background)
    control = PlaneArm(
        gamma=gamma0, restricted=False, diag=cdiag,
        off_plane_max=float(np.max(cdiag.off_plane)),
        departure_factor=float(cdiag.off_plane[-1] / cdiag.off_plane[0]),
    )
    rate, r2 = growth_rate_fit(cdiag, t_end / 5.0, t_end, series="off_plane")
    sigma_ref = solve_sigma_star(ck[0], ck[1], params0).sigma_star

    return PlaneDemoReport(
        plane=plane, plane_constant=c_plane, eps_kappa=eps_kappa,
        arms=arms, control=control, control_rate=rate, control_r2=r2,
        control_sigma_ref=sigma_ref, control_mode=ck,
    )


def illposedness(regime, params, j_min=2, j_max=12, depth=64) -> SweepResult:
    """Growth along the unbounded-wavenumber family (thin wrapper)."""
    return illposedness_sweep(regime, params, j_min=j_min, j_max=j_max,
                              depth=depth)


# ---------------------------------------------------------------------------
# file writers


def write_diag_csv(diag, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(Diagnostics.HEADER.split(","))
        for row in diag.rows():
            w.writerow([f"{v:.17g}" for v in row])


def write_growth_csv(diag, path):
    """Departure-from-reference series (only present with a reference)."""
    if diag.ref_l2 is None:
        raise ValueError("diagnostics carry no reference series")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "ref_l2"])
        for t, v in zip(diag.times, diag.ref_l2):
            w.writerow([f"{t:.17g}", f"{v:.17g}"])


def write_eigen_csv(table, params, path):
    """Unstable-mode table in the standard eigen schema."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k1", "k2", "gamma", "eps_kappa", "sigma_star",
                    "lower_bound", "upper_bound", "depth", "residual"])
        for (k1, k2, sigma, lower, upper, depth, residual) in table:
            w.writerow([k1, k2, f"{params.gamma:.17g}",
                        f"{params.eps_kappa:.17g}", f"{sigma:.17g}",
                        f"{lower:.17g}", f"{upper:.17g}", depth,
                        f"{residual:.3g}"])


def write_sweep_csv(result, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["j", "k1", "k2", "sigma_star", "bound", "certified"])
        for row in result.rows:
            sigma = "" if row.sigma_star is None else f"{row.sigma_star:.17g}"
            bound = "" if row.bound is None else f"{row.bound:.17g}"
            w.writerow([row.j, row.k1, row.k2, sigma, bound,
                        int(row.certified)])


def write_manifest(path, resolved, *, wall_seconds=None, extras=None):
    """Plain-text record of what a run actually used.

    ``resolved`` maps flat keys (section.key) to their effective values,
    i.e. after defaults were applied; ``extras`` holds result headlines.
    """
    from . import __version__

    lines = ["# run manifest", ""]
    lines.append(f"argv = {' '.join(sys.argv)}")
    lines.append(f"package_version = {__version__}")
    lines.append(f"python = {platform.python_version()}")
    lines.append(f"numpy = {np.__version__}")
    lines.append(f"scipy = {scipy.__version__}")
    if wall_seconds is not None:
        lines.append(f"wall_seconds = {wall_seconds:.3f}")
    lines.append("")
    lines.append("[resolved]")
    for key in sorted(resolved):
        lines.append(f"{key} = {resolved[key]}")
    if extras:
        lines.append("")
        lines.append("[results]")
        for key in sorted(extras):
            lines.append(f"{key} = {extras[key]}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
