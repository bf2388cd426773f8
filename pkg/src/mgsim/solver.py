"""Pseudo-spectral time integration of the active scalar equation.

The evolved quantity is the scalar theta on the periodic box, with the
velocity recovered mode-by-mode from the multiplier:

    d theta/dt + u . grad theta = -eps_kappa (-Lap)^gamma theta + S,
    u_hat(k) = M_hat(k) theta_hat(k).

Two steppers are provided.  ``if_rk4`` wraps classical RK4 in the exact
integrating factor of the dissipative part, so pure decay is reproduced to
rounding and the quartic error constant applies only to the transport term.
``imex_euler`` treats transport explicitly and dissipation implicitly; it is
first order and exists mainly as a cross-check.

The nonlinear transfer is projected onto modes with k3 != 0 each evaluation:
the velocity multiplier vanishes on the k3 = 0 plane, so those modes carry
no dynamics of their own and the evolution is kept on the zero-vertical-mean
subspace where the growth analysis lives.

Ill-posed regimes (no diffusion, or fractional dissipation of order <= 1/2)
admit mode growth rates that increase without bound in the wavenumber, so a
generic initial condition amplifies grid-scale content until the computation
is meaningless.  ``run`` estimates the largest resolvable growth rate in
advance and refuses runs whose requested horizon would amplify it beyond
e^30, unless the dynamics are confined to a horizontal-wavenumber plane on
which the multiplier stays bounded.
"""

import math
import time as _time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError, GrowthCapError
from .eigen import closed_form_bounds
from .fields import (
    PlaneSpec,
    SpectralField,
    TORUS_VOLUME,
    dealias_mask,
    forward,
    hs_norm,
    inverse,
    ksq_array,
    l2_norm,
    linf_norm,
    mode_weights,
    multiplier_arrays,
    off_plane_norm,
    plane_mask,
    wavenumbers,
)
from .symbol import PhysParams

_GROWTH_CAP = 30.0  # refuse runs that would amplify any resolvable mode past e^30


@dataclass(frozen=True)
class SourceSpec:
    """Forcing term for the scalar equation.

    kind is one of "none", "steady_balance", "custom".  The steady balance
    source is the forcing that makes sin(m x3) an exact steady state: that
    profile generates no velocity, so the source only has to offset its
    dissipation, S = eps_kappa m^(2 gamma) sin(m x3).
    """

    kind: str = "none"
    m: int = 1
    custom: SpectralField | None = None

    def __post_init__(self):
        if self.kind not in ("none", "steady_balance", "custom"):
            raise ValueError(f"unknown source kind {self.kind!r}")
        if self.kind == "custom" and self.custom is None:
            raise ValueError("custom source requires a field")
        if self.kind == "steady_balance" and (
                not isinstance(self.m, int) or self.m < 1):
            raise ValueError(f"steady balance index must be >= 1, got {self.m}")

    def realize(self, grid, params):
        """Coefficient array of the source on a grid (None when absent)."""
        if self.kind == "none":
            return None
        if self.kind == "custom":
            if self.custom.grid != grid:
                raise ValueError("custom source lives on a different grid")
            return self.custom.c.copy()
        amp = params.eps_kappa * float(self.m) ** (2.0 * params.gamma)
        if amp == 0.0:
            return None
        f = SpectralField.zeros(grid)
        f.set_coeff(0, 0, self.m, -0.5j * amp)
        return f.c

    def supported_on(self, plane):
        if self.kind == "none":
            return True
        if self.kind == "steady_balance":
            return plane.contains(0, 0)
        return off_plane_norm(self.custom, plane) <= 1e-13 * (
            1.0 + l2_norm(self.custom))


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``plane`` alone only adds the off-plane norm as a diagnostic column.
    With ``restrict_to_plane`` the state is projected onto the plane after
    every step (and once at t = 0): the restriction is an exact invariant
    of the dynamics, but in ill-posed regimes rounding noise seeded off the
    plane would otherwise amplify at unbounded rates and bury the confined
    solution, so the invariant must be enforced rather than merely observed.
    """

    dt: float
    t_end: float
    scheme: str = "if_rk4"
    linearized: bool = False
    record_every: int = 10
    plane: PlaneSpec | None = None
    restrict_to_plane: bool = False
    hs_order: float = 1.0
    source: SourceSpec = field(default_factory=SourceSpec)

    def __post_init__(self):
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one step")
        if self.scheme not in ("if_rk4", "imex_euler"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not isinstance(self.record_every, int) or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        if self.restrict_to_plane and self.plane is None:
            raise ValueError("restrict_to_plane requires a plane")


@dataclass
class Diagnostics:
    """Time series recorded during a run (one row per record step)."""

    times: np.ndarray
    l2: np.ndarray
    linf: np.ndarray
    hs: np.ndarray
    off_plane: np.ndarray
    energy_residual: np.ndarray
    ref_l2: np.ndarray | None
    hs_order: float
    plane: PlaneSpec | None
    wall_seconds: float = 0.0

    HEADER = "t,l2,linf,hs,off_plane,energy_residual"

    def rows(self):
        for i, t in enumerate(self.times):
            yield (t, self.l2[i], self.linf[i], self.hs[i],
                   self.off_plane[i], self.energy_residual[i])


def velocity_coefficients(grid, c, n2_phys):
    """Velocity component coefficient arrays u_hat = M_hat theta_hat."""
    m1, m2, m3 = multiplier_arrays(grid, n2_phys)
    return m1 * c, m2 * c, m3 * c


def velocity_max(grid, c, n2_phys):
    """Max-norm of each physical velocity component."""
    return tuple(
        float(np.max(np.abs(inverse(grid, uh))))
        for uh in velocity_coefficients(grid, c, n2_phys)
    )


def advection_coefficients(grid, c, n2_phys):
    """Dealiased coefficients of u . grad theta, restricted to k3 != 0."""
    K1, K2, K3 = wavenumbers(grid)
    u1h, u2h, u3h = velocity_coefficients(grid, c, n2_phys)
    prod = inverse(grid, u1h) * inverse(grid, 1j * K1 * c)
    prod += inverse(grid, u2h) * inverse(grid, 1j * K2 * c)
    prod += inverse(grid, u3h) * inverse(grid, 1j * K3 * c)
    out = forward(grid, prod)
    out[:, :, 0] = 0.0
    return out


def _inner(grid, a, b):
    w = mode_weights(grid)
    return TORUS_VOLUME * float(np.sum(w * (a * np.conj(b)).real))


def energy_flux_residual(grid, c, n2_phys):
    """Relative defect of advective energy neutrality.

    Divergence-free transport is energy neutral, <u . grad theta, theta> = 0.
    Returns 2 <adv, theta> / ||theta||^2; for a resolved dealiased field this
    sits at the rounding floor.
    """
    nrm2 = _inner(grid, c, c)
    if nrm2 == 0.0:
        return 0.0
    adv = advection_coefficients(grid, c, n2_phys)
    return 2.0 * _inner(grid, adv, c) / nrm2


def _max_resolvable_growth(grid, params):
    """Largest closed-form upper bound on the growth rate over the band."""
    b1, b2, _ = grid.band
    best = -math.inf
    for k1 in range(1, b1 + 1):
        for k2 in range(1, b2 + 1):
            best = max(best, closed_form_bounds(k1, k2, params)[1])
    return best


def _growth_cap_check(theta0, params, config):
    if params.eps_kappa > 0.0 and params.gamma > 0.5:
        return  # dissipation dominates large wavenumbers; growth is bounded
    if config.restrict_to_plane and config.source.supported_on(config.plane):
        return  # multiplier is bounded on the plane; growth stays tame
    sigma_max = _max_resolvable_growth(theta0.grid, params)
    if sigma_max > 0.0 and sigma_max * config.t_end > _GROWTH_CAP:
        raise GrowthCapError(
            f"requested horizon t_end = {config.t_end:g} would amplify "
            f"resolvable modes by up to e^{sigma_max * config.t_end:.1f} "
            f"(max growth rate ~ {sigma_max:.3g}); this regime is not "
            f"well-posed off a bounded-multiplier plane. Reduce t_end below "
            f"{_GROWTH_CAP / sigma_max:.3g} or confine the run to a plane.",
            sigma_max=sigma_max,
            t_max=_GROWTH_CAP / sigma_max,
        )


def run(theta0, params, config, reference=None):
    """Integrate the scalar equation; returns (final field, diagnostics).

    Parameters
    ----------
    theta0 : SpectralField
        Initial data (never mutated).
    params : PhysParams
    config : SolverConfig
    reference : SpectralField, optional
        When given, the L2 distance to this fixed field is recorded as an
        extra diagnostic column (used to track the departure from a steady
        state).
    """
    grid = theta0.grid
    if reference is not None and reference.grid != grid:
        raise ValueError("reference field lives on a different grid")
    _growth_cap_check(theta0, params, config)

    dt = config.dt
    nsteps = max(1, int(round(config.t_end / dt)))
    c = theta0.c.copy()
    pmask = (plane_mask(grid, config.plane)
             if config.restrict_to_plane else None)
    if pmask is not None:
        c *= pmask
    src = config.source.realize(grid, params)
    n2p = params.n2

    diss = params.eps_kappa * np.where(
        ksq_array(grid) > 0.0, ksq_array(grid), 1.0) ** params.gamma
    diss = np.where(ksq_array(grid) > 0.0, diss, 0.0)
    E = np.exp(-dt * diss)
    E2 = np.exp(-0.5 * dt * diss)
    implicit = 1.0 / (1.0 + dt * diss)

    if config.linearized:
        x3 = grid.axes()[2][None, None, :]
        cos_m = np.cos(params.m * x3)
        m3 = multiplier_arrays(grid, n2p)[2]

        def rhs(cc):
            u3 = inverse(grid, m3 * cc)
            out = forward(grid, -params.m * u3 * cos_m)
            out[:, :, 0] = 0.0
            return out
    else:
        def rhs(cc):
            out = -advection_coefficients(grid, cc, n2p)
            if src is not None:
                out += src
            return out

    if config.linearized and src is not None:
        raise ValueError("a source term makes no sense in a linearized run")

    recs = {"t": [], "l2": [], "linf": [], "hs": [], "off": [],
            "eres": [], "ref": []}

    def record(step, cc):
        t = step * dt
        f = SpectralField(grid, cc)
        l2 = l2_norm(f)
        if not math.isfinite(l2):
            raise BlowUpError(
                f"solution lost finiteness at t = {t:g} (step {step})",
                time=t,
                history=_finalize(recs, config, reference, 0.0),
            )
        recs["t"].append(t)
        recs["l2"].append(l2)
        recs["linf"].append(linf_norm(f))
        recs["hs"].append(hs_norm(f, config.hs_order))
        recs["off"].append(
            off_plane_norm(f, config.plane) if config.plane is not None
            else math.nan)
        recs["eres"].append(
            math.nan if config.linearized
            else energy_flux_residual(grid, cc, n2p))
        recs["ref"].append(
            l2_norm(f - reference) if reference is not None else math.nan)
        if not config.linearized:
            umax = velocity_max(grid, cc, n2p)
            cfl = dt * sum(u * b for u, b in zip(umax, grid.band))
            if cfl > 0.5:
                warnings.warn(
                    f"advective CFL number {cfl:.3g} exceeds 0.5 at "
                    f"t = {t:g}; consider reducing dt",
                    RuntimeWarning, stacklevel=2)

    wall0 = _time.perf_counter()
    record(0, c)
    for step in range(1, nsteps + 1):
        if config.scheme == "if_rk4":
            n1 = rhs(c)
            n2 = rhs(E2 * (c + 0.5 * dt * n1))
            n3 = rhs(E2 * c + 0.5 * dt * n2)
            n4 = rhs(E * c + dt * (E2 * n3))
            c = E * c + (dt / 6.0) * (
                E * n1 + 2.0 * E2 * (n2 + n3) + n4)
        else:  # imex_euler
            c = implicit * (c + dt * rhs(c))
        if pmask is not None:
            c *= pmask
        if step % config.record_every == 0 or step == nsteps:
            record(step, c)
    wall = _time.perf_counter() - wall0

    diag = _finalize(recs, config, reference, wall)
    return SpectralField(grid, c), diag


def _finalize(recs, config, reference, wall):
    return Diagnostics(
        times=np.asarray(recs["t"]),
        l2=np.asarray(recs["l2"]),
        linf=np.asarray(recs["linf"]),
        hs=np.asarray(recs["hs"]),
        off_plane=np.asarray(recs["off"]),
        energy_residual=np.asarray(recs["eres"]),
        ref_l2=np.asarray(recs["ref"]) if reference is not None else None,
        hs_order=config.hs_order,
        plane=config.plane,
        wall_seconds=wall,
    )


def growth_rate_fit(diag, t_start, t_stop, series="l2"):
    """Exponential growth rate of a diagnostic series over a time window.

    Fits log(series) against t by least squares and returns
    (rate, r_squared).  Raises ValueError if the window holds fewer than two
    records or the series is not strictly positive there.
    """
    y = getattr(diag, series) if series != "ref_l2" else diag.ref_l2
    if y is None:
        raise ValueError(f"series {series!r} was not recorded")
    t = diag.times
    sel = (t >= t_start) & (t <= t_stop) & np.isfinite(y)
    if np.count_nonzero(sel) < 2:
        raise ValueError(
            f"fit window [{t_start}, {t_stop}] holds fewer than two records")
    ysel = y[sel]
    if np.any(ysel <= 0.0):
        raise ValueError("series must be strictly positive for a log fit")
    tsel = t[sel]
    logy = np.log(ysel)
    slope, intercept = np.polyfit(tsel, logy, 1)
    pred = slope * tsel + intercept
    ss_res = float(np.sum((logy - pred) ** 2))
    ss_tot = float(np.sum((logy - np.mean(logy)) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return float(slope), r2
