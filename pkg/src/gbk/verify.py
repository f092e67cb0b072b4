"""Property-suite runner behind the `verify` command: randomized collision
identities, closed-form oracles, the scalar inequality suite, and the
scattering-kernel probes, reported as machine-readable pass/fail checks."""

from __future__ import annotations

import time

import numpy as np
from scipy import integrate

from .collisions import (
    BathParams,
    WeightParams,
    maxwellian_density,
    post_collision_n,
    post_collision_sigma,
    theta_sharp,
    weight_m,
)
from .diagnostics import (
    collision_frequency_bounds,
    collision_frequency_nu,
    collision_frequency_nu_quadrature,
    inequality_suite,
)

__all__ = ["run_verification", "collision_identity_checks"]

IDENTITY_TOL = 1e-12


def _unit_vectors(rng, k):
    g = rng.standard_normal((k, 3))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def collision_identity_checks(trials: int, rng: np.random.Generator) -> list[dict]:
    """Randomized momentum/restitution/energy/parametrization identities."""
    v = 2.0 * rng.standard_normal((trials, 3))
    vs = 2.0 * rng.standard_normal((trials, 3))
    n = _unit_vectors(rng, trials)
    alpha = rng.uniform(0.01, 1.0, trials)
    alpha[: trials // 10] = 1.0  # exercise the elastic boundary exactly

    vp, vsp = post_collision_n(v, vs, n, alpha)
    u = v - vs
    un = np.einsum("ij,ij->i", u, n)
    speeds = 1.0 + np.linalg.norm(v, axis=1) + np.linalg.norm(vs, axis=1)

    checks = []

    mom = np.abs(vp + vsp - v - vs).max(axis=1) / speeds
    checks.append({"name": "momentum_conservation", "max_violation": float(mom.max()),
                   "passed": bool(mom.max() <= IDENTITY_TOL)})

    rest = np.abs(np.einsum("ij,ij->i", vp - vsp, n) + alpha * un) / (1.0 + np.abs(un))
    checks.append({"name": "restitution_law", "max_violation": float(rest.max()),
                   "passed": bool(rest.max() <= IDENTITY_TOL)})

    de = (np.einsum("ij,ij->i", vp, vp) + np.einsum("ij,ij->i", vsp, vsp)
          - np.einsum("ij,ij->i", v, v) - np.einsum("ij,ij->i", vs, vs))
    closed = -0.5 * (1.0 - alpha**2) * un**2
    err = np.abs(de - closed) / np.maximum(1.0, np.abs(closed))
    checks.append({"name": "energy_identity", "max_violation": float(err.max()),
                   "passed": bool(err.max() <= IDENTITY_TOL)})
    checks.append({"name": "energy_nonpositive", "max_violation": float(de.max()),
                   "passed": bool(de.max() <= IDENTITY_TOL)})

    # parametrization consistency on the u.n < 0 half
    sel = un < 0.0
    umag = np.linalg.norm(u[sel], axis=1)
    ok = umag > 0.0
    vv, vvs, nn_ = v[sel][ok], vs[sel][ok], n[sel][ok]
    aa = alpha[sel][ok]
    uhat = (vv - vvs) / umag[ok][:, None]
    sigma = uhat - 2.0 * np.einsum("ij,ij->i", uhat, nn_)[:, None] * nn_
    sigma /= np.linalg.norm(sigma, axis=1, keepdims=True)
    vp_n, vsp_n = post_collision_n(vv, vvs, nn_, aa)
    vp_s, vsp_s = post_collision_sigma(vv, vvs, sigma, aa)
    sp = 1.0 + np.linalg.norm(vv, axis=1) + np.linalg.norm(vvs, axis=1)
    par = np.maximum(np.abs(vp_n - vp_s).max(axis=1),
                     np.abs(vsp_n - vsp_s).max(axis=1)) / sp
    checks.append({"name": "parametrization_consistency", "max_violation": float(par.max()),
                   "passed": bool(par.max() <= IDENTITY_TOL)})

    # elastic collisions compose to the identity
    k = min(trials, 10_000)
    v1, vs1 = post_collision_n(v[:k], vs[:k], n[:k], 1.0)
    v2, vs2 = post_collision_n(v1, vs1, n[:k], 1.0)
    invo = np.maximum(np.abs(v2 - v[:k]).max(axis=1),
                      np.abs(vs2 - vs[:k]).max(axis=1)) / speeds[:k]
    checks.append({"name": "elastic_involution", "max_violation": float(invo.max()),
                   "passed": bool(invo.max() <= IDENTITY_TOL)})
    return checks


def _maxwellian_normalization(bath: BathParams) -> dict:
    val, _ = integrate.quad(
        lambda r: 4.0 * np.pi * r * r * float(
            maxwellian_density(bath.u0_arr + np.array([r, 0.0, 0.0]), bath)),
        0.0, 14.0 * np.sqrt(bath.theta0), epsabs=1e-12, epsrel=1e-10)
    return {"name": "maxwellian_normalization", "value": val,
            "max_violation": abs(val - 1.0), "passed": bool(abs(val - 1.0) <= 1e-6)}


def _nu_closed_form_check(bath: BathParams) -> dict:
    radii = [0.0, 0.3, 1.0, 2.5, 5.0, 9.0, 14.0, 20.0]
    worst = 0.0
    for r in radii:
        q = collision_frequency_nu_quadrature(r, bath)
        c = float(collision_frequency_nu(np.array([r]), bath)[0])
        worst = max(worst, abs(c - q) / q)
    return {"name": "collision_frequency_closed_form", "max_violation": worst,
            "radii": radii, "passed": bool(worst <= 1e-8)}


def _nu_bounds_check(bath: BathParams) -> dict:
    nu0, nu1 = collision_frequency_bounds(bath)
    return {"name": "collision_frequency_bounds", "nu_e0": nu0, "nu_e1": nu1,
            "passed": bool(0.0 < nu0 <= nu1)}


def _weight_checks(rng) -> list[dict]:
    w = WeightParams(b=1.0, beta=0.5, q=2)
    spot = float(weight_m(np.array([1.0, 1.0, 1.0]), w))
    expected = 4.0 * np.exp(np.sqrt(2.0))
    r = np.sort(rng.uniform(0.0, 12.0, 400))
    vals = weight_m(np.stack([r, np.zeros_like(r), np.zeros_like(r)], axis=1), w)
    monotone = bool(np.all(np.diff(vals) > 0.0))
    ths = abs(theta_sharp(0.5, 1.0) - 0.6)
    return [
        {"name": "weight_spot_value", "value": spot,
         "max_violation": abs(spot - expected) / expected, "passed":
         bool(abs(spot - expected) / expected <= 1e-14)},
        {"name": "weight_monotonicity", "passed": monotone},
        {"name": "elastic_limit_temperature_formula", "max_violation": ths,
         "passed": bool(ths <= 1e-15)},
    ]


def _kernel_checks(bath: BathParams, w: WeightParams) -> list[dict]:
    from .linop import kernel_bound_check, kernel_k_e, kernel_weighted_integral

    v = np.array([1.0, 0.5, -0.2])
    vs = np.array([-0.5, 0.2, 0.1])
    k1 = float(kernel_k_e(v, vs, 0.9, bath))
    k2 = float(kernel_k_e(vs, v, 0.9, bath))
    checks = [{"name": "kernel_finite_positive", "values": [k1, k2],
               "passed": bool(k1 > 0.0 and k2 > 0.0 and np.isfinite([k1, k2]).all())}]
    total = kernel_weighted_integral(1.5, 0.9, bath, None)
    checks.append({"name": "kernel_integrable", "value": total,
                   "passed": bool(np.isfinite(total) and total > 0.0)})
    rep = kernel_bound_check(w, 0.9, bath)
    checks.append({"name": "kernel_moment_bound_trend",
                   "worst_relative_increase": rep["worst_relative_increase"],
                   "fitted_K": rep["fitted_K"],
                   "passed": bool(rep["no_increasing_trend"])})
    return checks


def run_verification(seed: int = 0, bath: BathParams | None = None,
                     trials: int = 100_000) -> dict:
    """Full property suite; returns a JSON-ready report with per-check results."""
    rng = np.random.default_rng(seed)
    if bath is None:
        bath = BathParams()
    checks = []
    t0 = time.time()
    checks.extend(collision_identity_checks(trials, rng))
    ident_s = time.time() - t0
    checks.append(_maxwellian_normalization(bath))
    checks.append(_nu_closed_form_check(bath))
    checks.append(_nu_bounds_check(bath))
    checks.extend(_weight_checks(rng))
    ineq = inequality_suite(WeightParams(b=1.0, beta=0.5, q=0), trials=trials, rng=rng)
    for c in ineq["checks"]:
        rec = {"name": c["name"], "violations": c["violations"],
               "min_slack": c["min_slack"], "witness": c["witness"],
               "passed": c["passed"]}
        if c["name"] == "truncation_inequality_as_stated":
            # the stated direction is provably false on its domain; the gate
            # check is that the suite reproduces the refutation
            rec["name"] = "truncation_inequality_as_stated_refuted"
            rec["refuted"] = not c["passed"]
            rec["passed"] = not c["passed"]
            rec["note"] = c.get("note", "")
        checks.append(rec)
    checks.extend(_kernel_checks(bath, WeightParams(b=3.0, beta=0.8, q=2)))
    return {
        "passed": all(c["passed"] for c in checks),
        "trials": trials,
        "seed": seed,
        "identity_runtime_s": round(ident_s, 3),
        "checks": checks,
    }
