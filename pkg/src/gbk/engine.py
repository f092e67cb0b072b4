"""Stochastic particle solver: inelastic self-collisions, linear bath collisions
against a fixed Maxwellian background, and optional free transport on a
periodic box.

Collision pairs are sampled by majorant rejection so the hard-sphere kernel
|v - v_*| is simulated exactly: candidates arrive at the majorant rate and are
accepted with probability |u|/U. When a candidate exceeds the majorant, U grows
by 1.5x and the candidate stream is topped up with the exact extra intensity
(superposition of Poisson streams), so rates are never clipped.

Convention: total rates carry the 4 pi of the full scattering-direction sphere,
so the per-particle bath rate equals nu_e(v) and the per-pair self rate is
4 pi (rho/N) |u| (homogeneous case). Determinism holds for a fixed seed and
single-threaded execution; one ensemble is owned by one run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .collisions import BathParams, RestitutionParams, WeightParams, maxwellian_sample
from .diagnostics import MomentRecord, moments

__all__ = [
    "ParticleEnsemble",
    "SimConfig",
    "Majorant",
    "RunLog",
    "RunResult",
    "step_self_collisions",
    "step_bath_collisions",
    "step_transport",
    "initial_ensemble",
    "run",
]


@dataclass
class ParticleEnsemble:
    """N stochastic particles; statistical weight per particle is rho*V/N.

    rho is the mass density (per unit volume); homogeneous mode uses a notional
    unit volume. Positions, when present, live in [0, box)^d with 3D velocities.
    """

    velocities: np.ndarray            # (N, 3)
    rho: float = 1.0
    positions: np.ndarray | None = None  # (N, d)
    box: float = 1.0

    def __post_init__(self):
        self.velocities = np.ascontiguousarray(self.velocities, dtype=np.float64)
        if self.velocities.ndim != 2 or self.velocities.shape[1] != 3:
            raise ValueError("velocities must have shape (N, 3)")
        if self.n < 2:
            raise ValueError("ensemble needs at least 2 particles")
        if self.positions is not None:
            self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
            if self.positions.shape[0] != self.n or self.positions.ndim != 2:
                raise ValueError("positions must have shape (N, d)")
            if np.any(self.positions < 0.0) or np.any(self.positions >= self.box):
                raise ValueError("positions must lie in the half-open box [0, box)^d")

    @property
    def n(self) -> int:
        return self.velocities.shape[0]

    @property
    def volume(self) -> float:
        if self.positions is None:
            return 1.0
        return float(self.box ** self.positions.shape[1])

    @property
    def particle_weight(self) -> float:
        return self.rho * self.volume / self.n

    def copy(self) -> "ParticleEnsemble":
        return ParticleEnsemble(
            velocities=self.velocities.copy(),
            rho=self.rho,
            positions=None if self.positions is None else self.positions.copy(),
            box=self.box,
        )


@dataclass(frozen=True)
class SimConfig:
    n_particles: int = 10_000
    dt: float = 0.0                   # 0 -> auto: ~0.1 expected collisions/particle/step
    t_end: float = 1.0
    restitution: RestitutionParams = field(default_factory=RestitutionParams)
    bath: BathParams = field(default_factory=BathParams)
    bath_coupling: float = 1.0
    spatial: str = "homogeneous"      # "homogeneous" | "periodic"
    box_dim: int = 3
    l_box: float = 1.0
    n_cells: int = 1
    seed: int = 0
    record_every: int = 20
    rho: float = 1.0
    init_kind: str = "maxwellian"
    init_theta: float | None = None   # default: bath.theta0
    init_u: tuple[float, float, float] | None = None  # default: bath.u0
    weight_norms: tuple[WeightParams, ...] = ()

    def __post_init__(self):
        if self.n_particles < 2:
            raise ValueError("n_particles must be >= 2")
        if self.dt < 0.0:
            raise ValueError("dt must be positive (or 0 for automatic)")
        if self.t_end <= 0.0:
            raise ValueError("t_end must be positive")
        if self.bath_coupling < 0.0:
            raise ValueError("bath_coupling must be >= 0")
        if self.spatial not in ("homogeneous", "periodic"):
            raise ValueError(f"spatial must be 'homogeneous' or 'periodic', got {self.spatial!r}")
        if self.spatial == "periodic":
            if self.box_dim not in (1, 2, 3):
                raise ValueError("box_dim must be 1, 2 or 3")
            if self.l_box <= 0.0 or self.n_cells < 1:
                raise ValueError("need l_box > 0 and n_cells >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


class Majorant:
    """Tracked upper bound on relative speeds, grown 1.5x on overflow."""

    def __init__(self, value: float):
        self.value = float(value)
        self.growth_events = 0

    def grow_to_cover(self, umax: float) -> float:
        while self.value < umax:
            self.value *= 1.5
            self.growth_events += 1
        return self.value


@dataclass
class RunLog:
    self_collisions: int = 0
    bath_collisions: int = 0
    majorant_growth_steps: list = field(default_factory=list)
    predicted_self_energy_change: float = 0.0  # (rho V / N) * sum of per-event formula
    warnings: list = field(default_factory=list)


@dataclass
class RunResult:
    series: list          # list[MomentRecord]
    final: ParticleEnsemble
    log: RunLog
    config: SimConfig


def _sample_sigma(rng: np.random.Generator, k: int) -> np.ndarray:
    g = rng.standard_normal((k, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _first_use_mask(ids: np.ndarray) -> np.ndarray:
    """True for candidates whose particle slots are all first occurrences.

    Processing the masked candidates, then recursing on the rest, reproduces
    strict sequential-order semantics for conflicting events.
    """
    flat = ids.ravel()
    first = np.zeros(flat.shape[0], dtype=bool)
    _, idx = np.unique(flat, return_index=True)
    first[idx] = True
    return first.reshape(ids.shape).all(axis=1)


def _collide_pairs(vel: np.ndarray, i: np.ndarray, j: np.ndarray, alpha: float,
                   rng: np.random.Generator) -> float:
    """Apply sigma-form collisions to disjoint pairs in place.

    Returns the summed closed-form energy change -((1-alpha^2)/4)|u|^2(1-uhat.sigma)
    over the applied events (per unit particle weight).
    """
    u = vel[i] - vel[j]
    umag = np.linalg.norm(u, axis=1)
    sigma = _sample_sigma(rng, i.shape[0])
    d = (0.25 * (1.0 + alpha)) * (u - umag[:, None] * sigma)
    vel[i] -= d
    vel[j] += d
    udots = np.einsum("ij,ij->i", u, sigma)
    return float(-(0.25 * (1.0 - alpha * alpha)) * np.sum(umag * umag - umag * udots))


def step_self_collisions(ens: ParticleEnsemble, alpha: float, dt: float,
                         rng: np.random.Generator, majorant: Majorant | None = None,
                         log: RunLog | None = None, n_cells: int = 1) -> int:
    """One self-collision sweep Q_alpha; mutates velocities, returns accepted count."""
    if ens.positions is None or n_cells <= 1:
        cells = [np.arange(ens.n)]
        cell_volume = ens.volume
    else:
        d = ens.positions.shape[1]
        width = ens.box / n_cells
        idx = np.minimum((ens.positions / width).astype(np.int64), n_cells - 1)
        flat = np.zeros(ens.n, dtype=np.int64)
        for a in range(d):
            flat = flat * n_cells + idx[:, a]
        order = np.argsort(flat, kind="stable")
        cells = [order[s] for s in _split_runs(flat[order])]
        cell_volume = ens.volume / n_cells**d
    if majorant is None:
        majorant = default_self_majorant(ens, rng)
    total = 0
    for members in cells:
        if members.shape[0] >= 2:
            total += _self_collide_cell(ens, members, alpha, dt, rng, majorant,
                                        cell_volume, log)
    if log is not None:
        log.self_collisions += total
    return total


def _split_runs(sorted_keys: np.ndarray):
    cut = np.flatnonzero(np.diff(sorted_keys)) + 1
    starts = np.concatenate([[0], cut])
    stops = np.concatenate([cut, [sorted_keys.shape[0]]])
    return [slice(a, b) for a, b in zip(starts, stops)]


def _self_collide_cell(ens, members, alpha, dt, rng, majorant, cell_volume, log) -> int:
    vel = ens.velocities
    nc = members.shape[0]
    # per unordered pair: rate 4 pi (W / Vc) |u|
    rate_per_u = 4.0 * np.pi * ens.particle_weight / cell_volume
    lam = dt * 0.5 * nc * (nc - 1) * rate_per_u * majorant.value
    k = int(rng.poisson(lam))
    if k == 0:
        return 0
    ii = rng.integers(0, nc, size=k)
    jj = (ii + 1 + rng.integers(0, nc - 1, size=k)) % nc
    pend_i = members[ii]
    pend_j = members[jj]
    accepted = 0
    while pend_i.shape[0]:
        u = vel[pend_i] - vel[pend_j]
        umag = np.linalg.norm(u, axis=1)
        umax = float(umag.max())
        if umax > majorant.value:
            old = majorant.value
            majorant.grow_to_cover(umax)
            if log is not None:
                log.majorant_growth_steps.append(("self", old, majorant.value))
            extra = int(rng.poisson(dt * 0.5 * nc * (nc - 1) * rate_per_u
                                    * (majorant.value - old)))
            if extra:
                ei = rng.integers(0, nc, size=extra)
                ej = (ei + 1 + rng.integers(0, nc - 1, size=extra)) % nc
                pend_i = np.concatenate([pend_i, members[ei]])
                pend_j = np.concatenate([pend_j, members[ej]])
            continue
        usable = _first_use_mask(np.stack([pend_i, pend_j], axis=1))
        take_i, take_j = pend_i[usable], pend_j[usable]
        um = umag[usable]
        hit = rng.uniform(size=take_i.shape[0]) * majorant.value < um
        ci, cj = take_i[hit], take_j[hit]
        if ci.shape[0]:
            de = _collide_pairs(vel, ci, cj, alpha, rng)
            if log is not None:
                log.predicted_self_energy_change += ens.particle_weight * de / ens.volume
            accepted += ci.shape[0]
        pend_i, pend_j = pend_i[~usable], pend_j[~usable]
    return accepted


def step_bath_collisions(ens: ParticleEnsemble, e: float, bath: BathParams, dt: float,
                         rng: np.random.Generator, majorant: Majorant | None = None,
                         log: RunLog | None = None, coupling: float = 1.0) -> int:
    """One bath sweep L = Q_e(f, M0); only gas particles update (the background
    is an undepletable reservoir). Returns the accepted collision count."""
    if coupling == 0.0:
        return 0
    vel = ens.velocities
    n = ens.n
    if majorant is None:
        majorant = default_bath_majorant(ens, bath)
    lam = dt * 4.0 * np.pi * coupling * n * majorant.value
    k = int(rng.poisson(lam))
    if k == 0:
        return 0
    pend = rng.integers(0, n, size=k)
    partners = maxwellian_sample(bath, rng, k)
    accepted = 0
    while pend.shape[0]:
        u = vel[pend] - partners
        umag = np.linalg.norm(u, axis=1)
        umax = float(umag.max())
        if umax > majorant.value:
            old = majorant.value
            majorant.grow_to_cover(umax)
            if log is not None:
                log.majorant_growth_steps.append(("bath", old, majorant.value))
            extra = int(rng.poisson(dt * 4.0 * np.pi * coupling * n * (majorant.value - old)))
            if extra:
                pend = np.concatenate([pend, rng.integers(0, n, size=extra)])
                partners = np.concatenate([partners, maxwellian_sample(bath, rng, extra)])
            continue
        usable = _first_use_mask(pend[:, None])
        take = pend[usable]
        um = umag[usable]
        hit = rng.uniform(size=take.shape[0]) * majorant.value < um
        ci = take[hit]
        if ci.shape[0]:
            w = partners[usable][hit]
            u_acc = vel[ci] - w
            ua = np.linalg.norm(u_acc, axis=1)
            sigma = _sample_sigma(rng, ci.shape[0])
            vel[ci] -= (0.25 * (1.0 + e)) * (u_acc - ua[:, None] * sigma)
            accepted += ci.shape[0]
        pend, partners = pend[~usable], partners[~usable]
    if log is not None:
        log.bath_collisions += accepted
    return accepted


def step_transport(ens: ParticleEnsemble, dt: float) -> None:
    """Free flight x <- (x + v dt) mod box; velocities untouched."""
    if ens.positions is None:
        raise RuntimeError("step_transport called in homogeneous mode (no positions)")
    d = ens.positions.shape[1]
    ens.positions += ens.velocities[:, :d] * dt
    ens.positions %= ens.box


def default_self_majorant(ens: ParticleEnsemble, rng: np.random.Generator) -> Majorant:
    """4x the max pairwise speed over a 1% subsample (at least 32 particles)."""
    m = min(ens.n, max(32, ens.n // 100))
    idx = rng.choice(ens.n, size=m, replace=False)
    sub = ens.velocities[idx]
    umax = float(np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=2).max())
    return Majorant(4.0 * max(umax, 1e-12))


def default_bath_majorant(ens: ParticleEnsemble, bath: BathParams) -> Majorant:
    vmax = float(np.linalg.norm(ens.velocities - bath.u0_arr, axis=1).max())
    return Majorant(4.0 * (vmax + 4.0 * np.sqrt(bath.theta0)))


def initial_ensemble(config: SimConfig, rng: np.random.Generator) -> ParticleEnsemble:
    theta = config.init_theta if config.init_theta is not None else config.bath.theta0
    u = config.init_u if config.init_u is not None else config.bath.u0
    init_bath = BathParams(u0=tuple(u), theta0=theta) if theta > 0 else None
    if init_bath is None:
        vel = np.tile(np.asarray(u, dtype=np.float64), (config.n_particles, 1))
    else:
        vel = maxwellian_sample(init_bath, rng, config.n_particles)
    positions = None
    if config.spatial == "periodic":
        positions = rng.uniform(0.0, config.l_box, size=(config.n_particles, config.box_dim))
    return ParticleEnsemble(velocities=vel, rho=config.rho, positions=positions,
                            box=config.l_box)


def _auto_dt(ens: ParticleEnsemble, config: SimConfig, rng: np.random.Generator) -> float:
    """dt targeting ~0.1 expected collisions per particle per step."""
    m = min(ens.n, 512)
    idx = rng.choice(ens.n, size=m, replace=False)
    sub = ens.velocities[idx]
    mean_u = float(np.mean(np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=2)))
    rate_self = 4.0 * np.pi * ens.rho * mean_u
    partners = maxwellian_sample(config.bath, rng, m)
    rate_bath = config.bath_coupling * 4.0 * np.pi * float(
        np.mean(np.linalg.norm(sub - partners, axis=1)))
    total = rate_self + rate_bath
    return 0.1 / total if total > 0 else config.t_end / 100.0


def run(config: SimConfig, initial: ParticleEnsemble | None = None,
        rng: np.random.Generator | None = None) -> RunResult:
    """Integrate the full dynamics with per-step operator splitting
    transport -> self-collisions -> bath collisions, recording moments."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    ens = initial.copy() if initial is not None else initial_ensemble(config, rng)
    log = RunLog()
    dt = config.dt if config.dt > 0.0 else _auto_dt(ens, config, rng)
    maj_self = default_self_majorant(ens, rng)
    maj_bath = default_bath_majorant(ens, config.bath)

    # expected collisions per particle per step, rough a-priori check
    exp_rate = dt * 4.0 * np.pi * (ens.rho * 2.0 * np.sqrt(ens.velocities.var() + 1e-300)
                                   + config.bath_coupling * np.sqrt(config.bath.theta0 + 1e-300))
    if exp_rate > 0.5:
        msg = (f"dt={dt:g} yields roughly {exp_rate:.2f} expected collisions per particle "
               f"per step (> 0.5); splitting error may be significant")
        warnings.warn(msg)
        log.warnings.append(msg)

    n_steps = max(1, int(round(config.t_end / dt)))
    alpha = config.restitution.alpha
    e = config.restitution.e
    series = [moments(ens, t=0.0, weight_params=config.weight_norms)]
    for step in range(1, n_steps + 1):
        if ens.positions is not None:
            step_transport(ens, dt)
        step_self_collisions(ens, alpha, dt, rng, maj_self, log,
                             n_cells=config.n_cells if config.spatial == "periodic" else 1)
        step_bath_collisions(ens, e, config.bath, dt, rng, maj_bath, log,
                             coupling=config.bath_coupling)
        if step % config.record_every == 0 or step == n_steps:
            series.append(moments(ens, t=step * dt, weight_params=config.weight_norms))
    return RunResult(series=series, final=ens, log=log, config=replace(config, dt=dt))
