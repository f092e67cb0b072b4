"""Figure rendering for the report paths: every plotting helper writes a PNG
next to the delimited output and returns the path."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_timeseries_figure",
    "save_sweep_figure",
    "save_spectrum_figure",
    "save_profile_figure",
    "save_freq_figure",
    "save_relax_figure",
]

_META = {"Software": "gbk"}


def _finish(fig, path):
    path = Path(path)
    fig.savefig(path, dpi=120, metadata=_META)
    plt.close(fig)
    return path


def save_timeseries_figure(path, series, theta_target=None):
    """Temperature and energy vs time for a run's moment records."""
    t = [r.t for r in series]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(t, [r.temperature for r in series], lw=1)
    if theta_target is not None:
        ax1.axhline(theta_target, color="k", ls="--", lw=0.8, label="target")
        ax1.legend()
    ax1.set_ylabel("temperature")
    ax2.plot(t, [r.energy for r in series], lw=1, color="C1")
    ax2.set_ylabel("energy")
    ax2.set_xlabel("t")
    fig.tight_layout()
    return _finish(fig, path)


def save_sweep_figure(path, rows):
    """Distance-to-Maxwellian and steady temperature vs restitution coefficient."""
    ok = [r for r in rows if "distance" in r]
    a = [r["alpha"] for r in ok]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    ax1.errorbar(a, [r["distance"] for r in ok],
                 yerr=[r.get("distance_stderr", 0.0) for r in ok],
                 marker="o", capsize=3)
    ax1.set_xlabel("alpha")
    ax1.set_ylabel("weighted L1 distance to Maxwellian")
    ax1.set_yscale("log")
    ax2.errorbar(a, [r["temperature"] for r in ok],
                 yerr=[r.get("temperature_stderr", 0.0) for r in ok],
                 marker="s", color="C1", capsize=3)
    ax2.set_xlabel("alpha")
    ax2.set_ylabel("steady temperature")
    fig.tight_layout()
    return _finish(fig, path)


def save_spectrum_figure(path, report):
    """Eigenvalues in the complex plane with the spectral gap marked."""
    ev = np.asarray(report.eigenvalues)
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(ev.real, ev.imag, s=6, alpha=0.6)
    ax.axvline(0.0, color="k", lw=0.6)
    ax.axvline(-report.spectral_gap, color="C3", ls="--", lw=0.8,
               label=f"gap = {report.spectral_gap:.3g}")
    ax.scatter([report.null_eigenvalue.real], [report.null_eigenvalue.imag],
               marker="x", color="C3", s=60)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"{report.kind}: spectrum")
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)


def save_profile_figure(path, profile, reference=None, label="steady state"):
    """Radial density profile, optionally against a reference curve f(r)."""
    r = profile.r_mid
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy(r, np.maximum(profile.density, 1e-300), drawstyle="steps-mid",
                label=label)
    if reference is not None:
        rr = np.linspace(0, profile.bin_edges[-1], 300)
        ax.semilogy(rr, np.maximum(reference(rr), 1e-300), "k--", lw=0.8,
                    label="reference")
    ax.set_xlabel("|v - u0|")
    ax.set_ylabel("density")
    ax.set_ylim(bottom=max(1e-12, float(np.max(profile.density)) * 1e-8))
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)


def save_freq_figure(path, r, nu, nu0=None, nu1=None):
    """Collision frequency against radius with the equivalence-bound envelope."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(r, nu, label="nu_e(v)")
    av = np.sqrt(1.0 + np.asarray(r) ** 2)
    if nu0 is not None:
        ax.plot(r, nu0 * av, "C2--", lw=0.8, label="nu_e0 <v>")
    if nu1 is not None:
        ax.plot(r, nu1 * av, "C3--", lw=0.8, label="nu_e1 <v>")
    ax.set_xlabel("|v - u0|")
    ax.set_ylabel("collision frequency")
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)


def save_relax_figure(path, series_t, series_val, fit, floor):
    """Relaxation signal on a log scale with the fitted exponential."""
    t = np.asarray(series_t)
    v = np.asarray(series_val) - floor
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.semilogy(t, np.maximum(v, 1e-300), "o", ms=3, label="signal")
    tt = np.linspace(fit.window[0], fit.window[1], 100)
    ax.semilogy(tt, np.exp(fit.intercept - fit.rate * tt), "C3-",
                label=f"rate = {fit.rate:.3g}, r2 = {fit.r_squared:.4f}")
    ax.set_xlabel("t")
    ax.set_ylabel("signal - floor")
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)
