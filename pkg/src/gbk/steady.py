"""Long-time steady states of the driven dynamics: stationarity detection by a
windowed slope test on the temperature, time-averaged radial profiles,
restitution sweeps with distance-to-Maxwellian columns, and relaxation-rate
measurements from kicked initial data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .collisions import BathParams, WeightParams, theta_sharp
from .diagnostics import (
    RadialProfile,
    RateFit,
    fit_exponential_rate,
    moments,
    weighted_distance,
)
from .engine import (
    ParticleEnsemble,
    RunLog,
    SimConfig,
    default_bath_majorant,
    default_self_majorant,
    initial_ensemble,
    step_bath_collisions,
    step_self_collisions,
    _auto_dt,
)

__all__ = [
    "SteadyStateError",
    "SteadyStateResult",
    "Kick",
    "compute_steady_state",
    "alpha_sweep",
    "perturbation_relaxation",
    "sample_from_profile",
]

#: recorded points per stationarity window
WINDOW_POINTS = 10
#: windowed |slope| / stderr below this counts as stationary
SLOPE_Z_MAX = 2.0
#: consecutive stationary windows required
CONSECUTIVE_WINDOWS = 3


class SteadyStateError(RuntimeError):
    def __init__(self, msg, series=None):
        super().__init__(msg)
        self.series = series


@dataclass
class SteadyStateResult:
    profile: RadialProfile
    temperature: float
    temperature_stderr: float
    alpha: float
    e: float
    stationarity_pvalue_proxy: float   # final windowed |slope| / stderr score
    n_particles: int
    t_burn_in: float
    t_average: float
    rate: RateFit | None = None        # burn-in relaxation fit, when a transient exists
    final_ensemble: ParticleEnsemble | None = None
    batch_masses: np.ndarray | None = None  # (n_batches, n_bins) for error propagation

    def distance_to_maxwellian(self, bath: BathParams, w: WeightParams,
                               rho: float = 1.0) -> tuple[float, float]:
        """Weighted radial L1 distance to the elastic-limit Maxwellian and its
        jackknife standard error over averaging batches."""
        d = weighted_distance(self.profile, bath, self.e, w, rho=rho)
        if self.batch_masses is None or self.batch_masses.shape[0] < 3:
            return d, float("nan")
        nb = self.batch_masses.shape[0]
        vols = self.profile.shell_volumes
        total = self.batch_masses.sum(axis=0)
        loo = []
        for k in range(nb):
            dens = (total - self.batch_masses[k]) / (nb - 1) / vols
            prof = replace(self.profile, density=dens)
            loo.append(weighted_distance(prof, bath, self.e, w, rho=rho))
        loo = np.asarray(loo)
        stderr = math.sqrt((nb - 1) / nb * float(np.sum((loo - loo.mean()) ** 2)))
        return d, stderr


def _window_slope_z(ts, vals):
    """|slope| / stderr(slope) of an unweighted linear fit."""
    t = np.asarray(ts) - np.mean(ts)
    y = np.asarray(vals)
    stt = float(t @ t)
    if stt == 0.0:
        return 0.0
    slope = float(t @ y) / stt
    resid = y - y.mean() - slope * t
    dof = len(y) - 2
    var = float(resid @ resid) / dof / stt if dof > 0 else 0.0
    if var <= 0.0:
        return 0.0
    return abs(slope) / math.sqrt(var)


def compute_steady_state(config: SimConfig, n_bins: int = 64,
                         r_max: float | None = None,
                         t_average: float | None = None,
                         n_batches: int = 8,
                         initial: ParticleEnsemble | None = None) -> SteadyStateResult:
    """Run the homogeneous dynamics to stationarity, then time-average the
    speed histogram about the bath bulk velocity into a radial profile.

    Stationarity is declared when the temperature's windowed linear slope stays
    below SLOPE_Z_MAX standard errors for CONSECUTIVE_WINDOWS windows; failing
    to get there before t_end raises SteadyStateError with the diagnostic series.
    """
    if config.spatial != "homogeneous":
        raise ValueError("steady states are computed in homogeneous mode")
    rng = np.random.default_rng(config.seed)
    ens = initial.copy() if initial is not None else initial_ensemble(config, rng)
    log = RunLog()
    dt = config.dt if config.dt > 0.0 else _auto_dt(ens, config, rng)
    maj_self = default_self_majorant(ens, rng)
    maj_bath = default_bath_majorant(ens, config.bath)
    alpha = config.restitution.alpha
    e = config.restitution.e
    th = theta_sharp(e, config.bath.theta0)
    if r_max is None:
        r_max = 8.0 * math.sqrt(th)
    edges = np.linspace(0.0, r_max, n_bins + 1)
    center = config.bath.u0_arr

    t_series, temp_series = [], []
    step = 0
    t = 0.0
    rec = moments(ens, t=0.0)
    t_series.append(0.0)
    temp_series.append(rec.temperature)
    ok_windows = 0
    z = float("inf")
    burn_steps = None
    max_steps = max(1, int(round(config.t_end / dt)))
    while step < max_steps:
        step += 1
        t = step * dt
        step_self_collisions(ens, alpha, dt, rng, maj_self, log)
        step_bath_collisions(ens, e, config.bath, dt, rng, maj_bath, log,
                             coupling=config.bath_coupling)
        if step % config.record_every == 0:
            rec = moments(ens, t=t)
            t_series.append(t)
            temp_series.append(rec.temperature)
            if len(temp_series) >= WINDOW_POINTS:
                z = _window_slope_z(t_series[-WINDOW_POINTS:], temp_series[-WINDOW_POINTS:])
                ok_windows = ok_windows + 1 if z < SLOPE_Z_MAX else 0
                if ok_windows >= CONSECUTIVE_WINDOWS:
                    burn_steps = step
                    break
    if burn_steps is None:
        raise SteadyStateError(
            f"no stationarity before t_end={config.t_end} (last slope z={z:.2f})",
            series=(t_series, temp_series))
    t_burn = burn_steps * dt

    if t_average is None:
        t_average = max(2.0 * t_burn, 40 * config.record_every * dt)
    avg_steps = max(n_batches, int(round(t_average / dt)))
    counts = np.zeros((n_batches, n_bins))
    temp_batches = [[] for _ in range(n_batches)]
    excluded = 0
    total_sampled = 0
    for k in range(avg_steps):
        step += 1
        step_self_collisions(ens, alpha, dt, rng, maj_self, log)
        step_bath_collisions(ens, e, config.bath, dt, rng, maj_bath, log,
                             coupling=config.bath_coupling)
        if step % config.record_every == 0 or k == avg_steps - 1:
            b = min(k * n_batches // avg_steps, n_batches - 1)
            r = np.linalg.norm(ens.velocities - center, axis=1)
            c, _ = np.histogram(r, bins=edges)
            counts[b] += c
            excluded += ens.n - c.sum()
            total_sampled += ens.n
            rec = moments(ens, t=step * dt)
            temp_batches[b].append(rec.temperature)
            t_series.append(step * dt)
            temp_series.append(rec.temperature)

    weight = config.rho / total_sampled  # mass per sampled particle, all snapshots
    prof = RadialProfile(
        bin_edges=edges,
        density=np.zeros(n_bins),
        center=center,
        total_mass=float(counts.sum() * weight),
        excluded_fraction=float(excluded / total_sampled),
        warn_excluded=bool(excluded / total_sampled > 0.01),
    )
    prof.density = counts.sum(axis=0) * weight / prof.shell_volumes
    batch_masses = counts * (config.rho * n_batches / total_sampled)

    bt = np.asarray([np.mean(x) for x in temp_batches if x])
    temperature = float(bt.mean())
    stderr = float(bt.std(ddof=1) / math.sqrt(len(bt))) if len(bt) > 1 else float("nan")

    rate = None
    try:
        burn_records = [(tt, tv) for tt, tv in zip(t_series, temp_series) if tt <= t_burn]
        sign = 1.0 if burn_records[0][1] > temperature else -1.0
        rate = fit_exponential_rate(
            [(tt, sign * (tv - temperature)) for tt, tv in burn_records], floor=0.0)
    except ValueError:
        rate = None

    z_final = _window_slope_z(t_series[-WINDOW_POINTS:], temp_series[-WINDOW_POINTS:])
    return SteadyStateResult(
        profile=prof,
        temperature=temperature,
        temperature_stderr=stderr,
        alpha=alpha,
        e=e,
        stationarity_pvalue_proxy=float(z_final),
        n_particles=config.n_particles,
        t_burn_in=float(t_burn),
        t_average=float(avg_steps * dt),
        rate=rate,
        final_ensemble=ens,
        batch_masses=batch_masses,
    )


def alpha_sweep(alphas, base: SimConfig, w: WeightParams | None = None,
                n_bins: int = 64, t_average: float | None = None) -> list[dict]:
    """Steady states over ascending alphas at fixed e, warm-starting each point
    from the previous final ensemble. Returns one row per alpha with the
    weighted distance to the elastic-limit Maxwellian; per-alpha failures are
    recorded and the sweep continues.
    """
    alphas = list(alphas)
    if alphas != sorted(alphas) or not all(0.0 < a <= 1.0 for a in alphas):
        raise ValueError("alphas must be ascending and lie in (0, 1]")
    if w is None:
        w = WeightParams(b=0.1, beta=0.5, q=1)
    rows = []
    warm = None
    seeds = np.random.SeedSequence(base.seed).spawn(len(alphas))
    for k, a in enumerate(alphas):
        cfg = replace(base, restitution=replace(base.restitution, alpha=a),
                      seed=int(seeds[k].generate_state(1)[0] % (2**31)))
        try:
            res = compute_steady_state(cfg, n_bins=n_bins, t_average=t_average,
                                       initial=warm)
        except SteadyStateError as exc:
            rows.append({"alpha": a, "e": base.restitution.e, "error": str(exc)})
            continue
        warm = res.final_ensemble
        dist, dist_err = res.distance_to_maxwellian(base.bath, w, rho=base.rho)
        rows.append({
            "alpha": a,
            "e": base.restitution.e,
            "temperature": res.temperature,
            "temperature_stderr": res.temperature_stderr,
            "distance": dist,
            "distance_stderr": dist_err,
            "rate": res.rate.rate if res.rate else float("nan"),
            "rate_r2": res.rate.r_squared if res.rate else float("nan"),
            "result": res,
        })
    return rows


def sample_from_profile(profile: RadialProfile, n: int, rng: np.random.Generator,
                        rho: float = 1.0) -> ParticleEnsemble:
    """Draw an isotropic ensemble whose speed law follows the binned profile
    (piecewise r^2-density within each shell)."""
    masses = np.maximum(profile.shell_masses(), 0.0)
    p = masses / masses.sum()
    bins = rng.choice(len(p), size=n, p=p)
    lo = profile.bin_edges[bins]
    hi = profile.bin_edges[bins + 1]
    u = rng.uniform(size=n)
    r = np.cbrt(lo**3 + u * (hi**3 - lo**3))
    g = rng.standard_normal((n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return ParticleEnsemble(velocities=profile.center + r[:, None] * g, rho=rho)


@dataclass(frozen=True)
class Kick:
    """Perturbation of a steady ensemble: velocity rescale about u0 and/or bulk shift."""

    scale: float = 1.0
    shift: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @property
    def is_noop(self) -> bool:
        return self.scale == 1.0 and all(c == 0.0 for c in self.shift)


def perturbation_relaxation(steady: SteadyStateResult, config: SimConfig,
                            kick: Kick, noise_factor: float = 5.0) -> RateFit:
    """Kick the steady state and fit the exponential return rate.

    Scale kicks fit |temperature(t) - T_inf| with the measured steady value as
    the floor; shift kicks fit |momentum(t) - rho u0|. The fit window keeps
    points while the signal exceeds noise_factor x the Monte Carlo noise floor;
    too small a kick leaves no usable window and is an error advising a larger
    kick or more particles.
    """
    rng = np.random.default_rng(config.seed)
    ens = sample_from_profile(steady.profile, config.n_particles, rng, rho=config.rho)
    u0 = config.bath.u0_arr
    if kick.scale != 1.0:
        ens.velocities[:] = u0 + kick.scale * (ens.velocities - u0)
    shift = np.asarray(kick.shift, dtype=np.float64)
    ens.velocities += shift

    log = RunLog()
    dt = config.dt if config.dt > 0.0 else _auto_dt(ens, config, rng)
    maj_self = default_self_majorant(ens, rng)
    maj_bath = default_bath_majorant(ens, config.bath)
    use_momentum = bool(np.any(shift != 0.0)) and kick.scale == 1.0
    n_steps = max(1, int(round(config.t_end / dt)))
    series = []
    rec = moments(ens, t=0.0)
    series.append(rec)
    for step in range(1, n_steps + 1):
        step_self_collisions(ens, config.restitution.alpha, dt, rng, maj_self, log)
        step_bath_collisions(ens, config.restitution.e, config.bath, dt, rng,
                             maj_bath, log, coupling=config.bath_coupling)
        if step % config.record_every == 0 or step == n_steps:
            series.append(moments(ens, t=step * dt))

    n = config.n_particles
    if use_momentum:
        target = config.rho * u0
        vals = [(r.t, float(np.linalg.norm(r.momentum - target))) for r in series]
        noise = noise_factor * config.rho * math.sqrt(3.0 * steady.temperature / n)
    else:
        t_inf = steady.temperature
        vals = [(r.t, abs(r.temperature - t_inf)) for r in series]
        noise = noise_factor * t_inf * math.sqrt(2.0 / (3.0 * n))

    above = [v for v in vals if v[1] > noise]
    cut = 0
    for cut, v in enumerate(vals):
        if v[1] <= noise:
            break
    else:
        cut = len(vals)
    if cut < 5:
        raise ValueError(
            f"kick signal exceeds the noise floor ({noise:.3e}) on only {cut} points "
            f"(of {len(above)} total above it); use a larger kick or more particles")
    return fit_exponential_rate(vals[:cut], floor=0.0)
