"""Inelastic hard-sphere collision rules and the closed-form quantities built on them.

Velocities are plain float64 arrays of shape (3,) or (..., 3); every function
broadcasts over leading axes and is pure (no hidden state, caller owns the RNG).
Units: velocities in thermal-speed units, the bath temperature sets the scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RestitutionParams",
    "BathParams",
    "WeightParams",
    "post_collision_n",
    "post_collision_sigma",
    "sigma_to_normal",
    "energy_change",
    "maxwellian_density",
    "maxwellian_sample",
    "theta_sharp",
    "weight_m",
    "log_weight_m",
]

#: absolute tolerance on |n|^2 - 1 for unit-vector arguments
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class RestitutionParams:
    """Restitution coefficients: alpha for gas-gas collisions, e for gas-bath."""

    alpha: float = 1.0
    e: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (0.0 < self.e <= 1.0):
            raise ValueError(f"e must lie in (0, 1], got {self.e}")


@dataclass(frozen=True)
class BathParams:
    """Host-medium Maxwellian: unit mass, bulk velocity u0, temperature theta0."""

    u0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    theta0: float = 1.0

    def __post_init__(self):
        if not self.theta0 > 0.0:
            raise ValueError(f"theta0 must be positive, got {self.theta0}")
        u0 = tuple(float(c) for c in self.u0)
        if len(u0) != 3 or not all(np.isfinite(u0)):
            raise ValueError(f"u0 must be a finite 3-vector, got {self.u0}")
        object.__setattr__(self, "u0", u0)

    @property
    def u0_arr(self) -> np.ndarray:
        return np.asarray(self.u0, dtype=np.float64)


@dataclass(frozen=True)
class WeightParams:
    """Stretched-exponential velocity weight <v>^q * exp(b <v>^beta)."""

    b: float = 1.0
    beta: float = 0.5
    q: int = 0

    def __post_init__(self):
        if not self.b > 0.0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.q < 0 or int(self.q) != self.q:
            raise ValueError(f"q must be a nonnegative integer, got {self.q}")


def _check_finite(name, a):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite components")


def _check_unit(name, a):
    _check_finite(name, a)
    sq = np.einsum("...i,...i->...", a, a)
    if np.any(np.abs(sq - 1.0) > UNIT_TOL):
        raise ValueError(f"{name} is not a unit vector: max | |{name}|^2 - 1 | = "
                         f"{float(np.max(np.abs(sq - 1.0))):.3e}")


def post_collision_n(v, v_star, n, alpha):
    """Post-collision pair in the impact-direction parametrization.

    v' = v - (1+alpha)/2 (u.n) n,  v'_* = v_* + (1+alpha)/2 (u.n) n, u = v - v_*.
    Momentum is conserved exactly; the normal relative velocity flips sign and
    shrinks by alpha.
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    _check_finite("v", v)
    _check_finite("v_star", v_star)
    _check_unit("n", n)
    u = v - v_star
    un = np.einsum("...i,...i->...", u, n)
    coef = np.multiply(0.5, 1.0 + np.asarray(alpha, dtype=np.float64))
    d = coef[..., None] * un[..., None] * n
    return v - d, v_star + d


def post_collision_sigma(v, v_star, sigma, alpha):
    """Post-collision pair in the scattering-direction parametrization.

    v' = v - (1+alpha)/4 (u - |u| sigma) and symmetrically for v'_*.
    Requires v != v_star: the direction u/|u| is undefined at zero relative
    velocity (the impact-direction form handles that case as a no-op).
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    _check_finite("v", v)
    _check_finite("v_star", v_star)
    _check_unit("sigma", sigma)
    u = v - v_star
    umag = np.linalg.norm(u, axis=-1)
    if np.any(umag == 0.0):
        raise ValueError("post_collision_sigma requires v != v_star")
    coef = np.multiply(0.25, 1.0 + np.asarray(alpha, dtype=np.float64))
    d = coef[..., None] * (u - umag[..., None] * sigma)
    return v - d, v_star + d


def sigma_to_normal(v, v_star, sigma):
    """Impact direction n (with u.n < 0) equivalent to a scattering direction sigma."""
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    u = v - v_star
    umag = np.linalg.norm(u, axis=-1)
    if np.any(umag == 0.0):
        raise ValueError("sigma_to_normal requires v != v_star")
    uhat = u / umag[..., None]
    w = uhat - sigma
    wmag = np.linalg.norm(w, axis=-1)
    # sigma == uhat means zero transfer; any n orthogonal to u works, pick one.
    if np.any(wmag == 0.0):
        raise ValueError("sigma coincides with u/|u|: grazing direction is degenerate")
    return -w / wmag[..., None]


def energy_change(v, v_star, n, alpha):
    """Kinetic energy change |v'|^2 + |v'_*|^2 - |v|^2 - |v_*|^2 of one collision.

    Evaluates the actual post-collision map; equals -((1-alpha^2)/2)(u.n)^2 up
    to roundoff, hence nonpositive for alpha in (0, 1].
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    vp, vsp = post_collision_n(v, v_star, n, alpha)
    return (np.einsum("...i,...i->...", vp, vp)
            + np.einsum("...i,...i->...", vsp, vsp)
            - np.einsum("...i,...i->...", v, v)
            - np.einsum("...i,...i->...", v_star, v_star))


def maxwellian_density(v, bath: BathParams):
    """Maxwellian of the host medium: (2 pi theta0)^(-3/2) exp(-|v-u0|^2 / 2 theta0)."""
    v = np.asarray(v, dtype=np.float64)
    _check_finite("v", v)
    dv = v - bath.u0_arr
    r2 = np.einsum("...i,...i->...", dv, dv)
    return (2.0 * np.pi * bath.theta0) ** -1.5 * np.exp(-0.5 * r2 / bath.theta0)


def maxwellian_sample(bath: BathParams, rng: np.random.Generator, size=None):
    """Draw velocities from the bath Maxwellian; shape (3,) or (size, 3)."""
    shape = (3,) if size is None else (int(size), 3)
    return bath.u0_arr + np.sqrt(bath.theta0) * rng.standard_normal(shape)


def theta_sharp(e: float, theta0: float) -> float:
    """Temperature (1+e)/(3-e) * theta0 of the elastic-limit equilibrium Maxwellian."""
    if not (0.0 < e <= 1.0):
        raise ValueError(f"e must lie in (0, 1], got {e}")
    if not theta0 > 0.0:
        raise ValueError(f"theta0 must be positive, got {theta0}")
    return (1.0 + e) / (3.0 - e) * theta0


def log_weight_m(v, w: WeightParams):
    """log of the combined weight <v>^q exp(b <v>^beta), safe for large |v|."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim >= 1 and v.shape[-1] == 3:
        r2 = np.einsum("...i,...i->...", v, v)
    else:
        # scalar speed input (radial usage)
        r2 = np.square(v)
    av = np.sqrt(1.0 + r2)
    return w.q * np.log(av) + w.b * av ** w.beta


def weight_m(v, w: WeightParams):
    """Combined weight <v>^q exp(b <v>^beta) with <v> = sqrt(1 + |v|^2)."""
    return np.exp(log_weight_m(v, w))
