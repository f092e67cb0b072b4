"""Velocity-grid discretization of the linear bath operator and the linearized
collision operators around an equilibrium, plus eigenvalue analysis, the
compact/remainder splitting probes, and the explicit scattering-kernel checks.

The transport term is dropped (spatially homogeneous mode, zeroth spatial
Fourier mode). Assembly integrates the weak form over (partner, direction)
with a product Gauss-Legendre x uniform-azimuth spherical rule and deposits
post-collision points on the lattice through a separable stencil; test
function = 1 then gives zero column sums up to boundary truncation and the
quadrature error of the collision frequency.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg

from . import _kernels
from .collisions import BathParams, WeightParams, log_weight_m, theta_sharp
from .diagnostics import RadialProfile, collision_frequency_nu

__all__ = [
    "VelocityGrid",
    "OperatorMatrix",
    "SpectrumReport",
    "SplitParams",
    "AssemblyError",
    "sphere_quadrature",
    "grid_for_bath",
    "maxwellian_on_grid",
    "profile_on_grid",
    "assemble_bath_operator",
    "assemble_linearized",
    "assemble_split",
    "spectrum",
    "operator_difference_norm",
    "symmetrization_defect",
    "kernel_k_e",
    "kernel_weighted_integral",
    "kernel_bound_check",
]

DENSE_DIM_GUARD = 20_000


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform n^3 lattice on [center - R, center + R]^3 with midpoint weights.

    n must be odd so the center is a node. Nodes are ordered with the z axis
    fastest: flat = (ix * n + iy) * n + iz.
    """

    radius: float
    n: int
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"n must be odd and >= 3, got {self.n}")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def h(self) -> float:
        return 2.0 * self.radius / (self.n - 1)

    @property
    def quad_weight(self) -> float:
        return self.h**3

    @property
    def size(self) -> int:
        return self.n**3

    def axis(self, k: int) -> np.ndarray:
        return self.center[k] + np.linspace(-self.radius, self.radius, self.n)

    def nodes(self) -> np.ndarray:
        ax = [self.axis(k) for k in range(3)]
        g = np.meshgrid(*ax, indexing="ij")
        return np.ascontiguousarray(
            np.stack([c.ravel() for c in g], axis=1), dtype=np.float64)


def grid_for_bath(bath: BathParams, e: float, n: int, radius: float | None = None) -> VelocityGrid:
    """Grid centered at the bath bulk velocity; default radius 6 sqrt(theta_sharp).

    Warns when the radius under-contains the background Maxwellian's own tail
    (radius < 5 sqrt(theta0)), which happens for small e.
    """
    th = theta_sharp(e, bath.theta0)
    r = 6.0 * math.sqrt(th) if radius is None else float(radius)
    if r < 5.0 * math.sqrt(bath.theta0):
        warnings.warn(
            f"grid radius {r:.3g} < 5 sqrt(theta0) = {5.0 * math.sqrt(bath.theta0):.3g}: "
            "background tail is partially truncated")
    return VelocityGrid(radius=r, n=n, center=bath.u0)


@dataclass
class OperatorMatrix:
    grid: VelocityGrid
    entries: np.ndarray          # dense (n^3, n^3), standard orientation
    kind: str                    # bath | linearized-elastic | linearized-inelastic | a-part | b-part
    params: dict = field(default_factory=dict)
    gain_mass_deficit: float = 0.0

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass
class SpectrumReport:
    kind: str
    eigenvalues: np.ndarray      # complex, sorted by real part descending
    spectral_gap: float
    null_eigenvalue: complex
    null_residual: float
    null_cosine: float
    mass_residual: float
    params: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SplitParams:
    """Truncation scale delta and the C^inf ramp width of the plateau bumps."""

    delta: float
    smoothing_width: float | None = None  # default delta / 2

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        w = self.delta / 2.0 if self.smoothing_width is None else float(self.smoothing_width)
        if not (0.0 < w <= self.delta):
            raise ValueError("smoothing width must lie in (0, delta]")
        object.__setattr__(self, "smoothing_width", w)

    @property
    def empty(self) -> bool:
        """True when the inner truncation set is empty (2 delta >= 1/delta)."""
        return 2.0 * self.delta >= 1.0 / self.delta


def sphere_quadrature(n_polar: int = 5):
    """Product Gauss-Legendre (cos theta) x uniform (phi) rule on S^2.

    2 n_polar^2 nodes, exact for spherical harmonics up to degree
    2 n_polar - 1; weights sum to 4 pi. Closed under sigma -> -sigma.
    """
    x, wx = np.polynomial.legendre.leggauss(n_polar)
    m = 2 * n_polar
    phi = (np.arange(m) + 0.5) * (2.0 * np.pi / m)
    st = np.sqrt(1.0 - x**2)
    nodes = np.empty((n_polar * m, 3))
    wts = np.empty(n_polar * m)
    k = 0
    for i in range(n_polar):
        for j in range(m):
            nodes[k, 0] = st[i] * np.cos(phi[j])
            nodes[k, 1] = st[i] * np.sin(phi[j])
            nodes[k, 2] = x[i]
            wts[k] = wx[i] * (2.0 * np.pi / m)
            k += 1
    return np.ascontiguousarray(nodes), np.ascontiguousarray(wts)


def maxwellian_on_grid(grid: VelocityGrid, theta: float, rho: float = 1.0,
                       center=None) -> np.ndarray:
    c = np.asarray(grid.center if center is None else center, dtype=np.float64)
    d = grid.nodes() - c
    r2 = np.einsum("ij,ij->i", d, d)
    return rho * (2.0 * np.pi * theta) ** -1.5 * np.exp(-0.5 * r2 / theta)


def profile_on_grid(grid: VelocityGrid, profile: RadialProfile, rho: float = 1.0,
                    mass_tol: float = 0.01) -> np.ndarray:
    """Nodal values of a radial profile via a positive monotone-cubic interpolant.

    Pointwise densities are recovered from the shell masses with exact shell
    volumes (the profile's own midpoint-rule volumes bias the innermost bin by
    4/3). Negative-density bins (Monte Carlo noise) are clipped at zero and the
    clipped mass is reported via a warning; a nodal mass deviating from rho by
    more than mass_tol is an error (the grid cannot represent the state).
    """
    from scipy.interpolate import PchipInterpolator

    masses = profile.shell_masses()
    clipped = -float(np.sum(np.minimum(masses, 0.0)))
    if clipped > 0.0:
        warnings.warn(f"profile clipped at zero density: mass {clipped:.3e} removed")
    edges = profile.bin_edges
    exact_vol = 4.0 * np.pi / 3.0 * (edges[1:] ** 3 - edges[:-1] ** 3)
    dens = np.maximum(masses, 0.0) / exact_vol
    rr = np.concatenate([[0.0], profile.r_mid])
    dd = np.concatenate([[dens[0]], dens])
    interp = PchipInterpolator(rr, dd, extrapolate=False)
    radii = np.linalg.norm(grid.nodes() - np.asarray(grid.center), axis=1)
    vals = interp(radii)
    vals = np.where(np.isnan(vals), 0.0, np.maximum(vals, 0.0))
    mass = float(vals.sum() * grid.quad_weight)
    if abs(mass - rho) > mass_tol * rho:
        raise AssemblyError(
            f"interpolated state carries mass {mass:.4f} on the grid, expected {rho} "
            f"within {mass_tol:.0%}; increase the grid radius or profile range")
    return vals


def _weights_with_cutoff(vals: np.ndarray, scale: float, rel_cut: float = 1e-16) -> np.ndarray:
    w = vals * scale
    w[np.abs(w) < rel_cut * np.abs(w).max()] = 0.0
    return np.ascontiguousarray(w)


def _grid_collision_frequency(nodes: np.ndarray, m0: np.ndarray, qw: float,
                              chunk: int = 256) -> np.ndarray:
    """Lattice quadrature of 4 pi integral |v - w| M0(w) dw, chunked in v."""
    out = np.empty(nodes.shape[0])
    for a in range(0, nodes.shape[0], chunk):
        d = nodes[a:a + chunk, None, :] - nodes[None, :, :]
        out[a:a + chunk] = np.sqrt(np.einsum("ijk,ijk->ij", d, d)) @ m0
    return 4.0 * np.pi * qw * out


def _finalize(AT, grid, kind, params, gain_target, gain_landed, ref_weights,
              check_mass: bool):
    deficit_num = float(np.sum(ref_weights * np.abs(gain_target - gain_landed)))
    deficit_den = float(np.sum(ref_weights * gain_target))
    deficit = deficit_num / deficit_den if deficit_den > 0.0 else 0.0
    if check_mass and deficit > 1e-2:
        raise AssemblyError(
            f"gain-part mass error {deficit:.3e} > 1e-2: post-collision points leave "
            "the lattice too often; increase n or the grid radius")
    entries = np.ascontiguousarray(AT.T)
    return OperatorMatrix(grid=grid, entries=entries, kind=kind, params=params,
                          gain_mass_deficit=deficit)


def _theta_args(split: SplitParams | None, out_bump: bool):
    if split is None:
        return False, 1.0, 1.0, False
    return True, split.delta, split.smoothing_width, out_bump


_SCATTER_MODES = {"linear": 0, "cubic": 1, "spline": 2}


def _scatter_mode(scatter: str) -> int:
    try:
        return _SCATTER_MODES[scatter]
    except KeyError:
        raise ValueError(f"scatter must be one of {sorted(_SCATTER_MODES)}, got {scatter!r}")


def _spline_row_filter(AT: np.ndarray, n: int) -> None:
    """Restore cardinal accuracy of the B-spline deposit: apply the inverse of
    the tridiagonal collocation matrix (1/6, 2/3, 1/6) along each output axis.
    Edge diagonals are set to 5/6 so constants (hence column sums) are
    reproduced exactly. AT holds columns in rows; output axes are the last three.
    """
    t_mat = np.diag(np.full(n, 4.0 / 6.0)) + np.diag(np.full(n - 1, 1.0 / 6.0), 1) \
        + np.diag(np.full(n - 1, 1.0 / 6.0), -1)
    t_mat[0, 0] = t_mat[-1, -1] = 5.0 / 6.0
    t_inv = np.linalg.inv(t_mat)
    nn = AT.shape[0]
    # x axis: batched (n, n) @ (n, n^2)
    w = AT.reshape(nn, n, n * n)
    buf = np.empty_like(w)
    np.matmul(t_inv, w, out=buf)
    w[:] = buf
    # y axis: batched over (nn * n) blocks
    w = AT.reshape(nn * n, n, n)
    buf = buf.reshape(nn * n, n, n)
    np.matmul(t_inv, w, out=buf)
    w[:] = buf
    # z axis: right-multiply by t_inv^T on trailing index
    w = AT.reshape(nn * n * n, n)
    buf = buf.reshape(nn * n * n, n)
    np.matmul(w, t_inv.T, out=buf)
    w[:] = buf


def assemble_bath_operator(grid: VelocityGrid, e: float, bath: BathParams,
                           sphere_order: int = 5, scatter: str = "spline",
                           loss: str = "closed_form",
                           _split: SplitParams | None = None,
                           _gain_only: bool = False) -> OperatorMatrix:
    """Dense matrix of the background-scattering operator L = L+ - nu_e.

    The gain integrates the weak form over background nodes (Maxwellian
    quadrature weights) and scattering directions; the loss is diagonal with
    the closed-form collision frequency (loss="grid" uses the same lattice
    quadrature as the gain instead).
    """
    nodes = grid.nodes()
    sg_nodes, sg_w = sphere_quadrature(sphere_order)
    m0 = maxwellian_on_grid(grid, bath.theta0, center=bath.u0)
    wq = _weights_with_cutoff(m0, grid.quad_weight)
    nn = grid.size
    AT = np.zeros((nn, nn))
    gain_target = np.zeros(nn)
    gain_landed = np.zeros(nn)
    ox, oy, oz = (grid.center[k] - grid.radius for k in range(3))
    use_theta, delta, width, out_bump = _theta_args(_split, out_bump=True)
    mode = _scatter_mode(scatter)
    empty = _split.empty if _split is not None else False
    if not empty:
        _kernels.bath_gain(AT, nodes, wq, e, sg_nodes, sg_w, ox, oy, oz,
                           1.0 / grid.h, grid.n, mode,
                           use_theta, delta, width, out_bump,
                           gain_target, gain_landed)
        if mode == 2:
            _spline_row_filter(AT, grid.n)
    if not _gain_only:
        if loss == "closed_form":
            nu = collision_frequency_nu(nodes, bath)
        elif loss == "grid":
            nu = _grid_collision_frequency(nodes, m0, grid.quad_weight)
        else:
            raise ValueError(f"unknown loss mode {loss!r}")
        AT[np.diag_indices(nn)] -= nu
    th = theta_sharp(e, bath.theta0)
    ref = maxwellian_on_grid(grid, th)
    params = {"e": e, "bath": bath, "sphere_order": sphere_order, "scatter": scatter,
              "loss": loss, "theta_sharp": th}
    if _split is not None:
        params["delta"] = _split.delta
        params["smoothing_width"] = _split.smoothing_width
    return _finalize(AT, grid, "bath" if _split is None else "a-part", params,
                     gain_target, gain_landed, ref, check_mass=_split is None)


def assemble_linearized(grid: VelocityGrid, alpha: float, e: float, bath: BathParams,
                        f_alpha: RadialProfile | np.ndarray | None = None,
                        rho: float = 1.0, sphere_order: int = 5,
                        scatter: str = "spline",
                        _split: SplitParams | None = None) -> OperatorMatrix:
    """Linearized operator around an equilibrium state, homogeneous mode.

    The collision part freezes one argument of the inelastic interaction to the
    state (a radial profile interpolated onto the grid, nodal values, or the
    analytic elastic-limit Maxwellian when f_alpha is None); the background
    part is added with the closed-form loss. alpha = 1 with the analytic state
    is the linearized elastic operator.
    """
    nodes = grid.nodes()
    sg_nodes, sg_w = sphere_quadrature(sphere_order)
    if f_alpha is None:
        fvals = maxwellian_on_grid(grid, theta_sharp(e, bath.theta0), rho=rho,
                                   center=bath.u0)
    elif isinstance(f_alpha, RadialProfile):
        fvals = profile_on_grid(grid, f_alpha, rho=rho)
    else:
        fvals = np.asarray(f_alpha, dtype=np.float64)
        if fvals.shape != (grid.size,):
            raise ValueError("nodal state must have shape (n^3,)")
    wf = _weights_with_cutoff(fvals, grid.quad_weight)
    nn = grid.size
    AT = np.zeros((nn, nn))
    gain_target = np.zeros(nn)
    gain_landed = np.zeros(nn)
    ox, oy, oz = (grid.center[k] - grid.radius for k in range(3))
    use_theta, delta, width, out_bump = _theta_args(_split, out_bump=True)
    mode = _scatter_mode(scatter)
    empty = _split.empty if _split is not None else False
    if not empty:
        _kernels.pair_gain(AT, nodes, wf, alpha, sg_nodes, sg_w, ox, oy, oz,
                           1.0 / grid.h, grid.n, mode,
                           use_theta, delta, width, out_bump,
                           gain_target, gain_landed)
        m0 = maxwellian_on_grid(grid, bath.theta0, center=bath.u0)
        wq = _weights_with_cutoff(m0, grid.quad_weight)
        _kernels.bath_gain(AT, nodes, wq, e, sg_nodes, sg_w, ox, oy, oz,
                           1.0 / grid.h, grid.n, mode,
                           use_theta, delta, width, out_bump,
                           gain_target, gain_landed)
        if mode == 2:
            _spline_row_filter(AT, grid.n)
        _kernels.pair_loss(AT, nodes, wf, sg_nodes, sg_w, use_theta, delta, width)
    if _split is None:
        AT[np.diag_indices(nn)] -= collision_frequency_nu(nodes, bath)
    kind = "linearized-elastic" if (alpha == 1.0 and f_alpha is None) else "linearized-inelastic"
    params = {"alpha": alpha, "e": e, "bath": bath, "sphere_order": sphere_order,
              "scatter": scatter, "rho": rho,
              "theta_sharp": theta_sharp(e, bath.theta0)}
    if _split is not None:
        params["delta"] = _split.delta
        params["smoothing_width"] = _split.smoothing_width
        kind = "a-part"
    ref = fvals if f_alpha is not None else maxwellian_on_grid(
        grid, theta_sharp(e, bath.theta0), center=bath.u0)
    return _finalize(AT, grid, kind, params, gain_target, gain_landed, ref,
                     check_mass=_split is None)


def assemble_split(grid: VelocityGrid, e: float, bath: BathParams, split: SplitParams,
                   alpha: float | None = None,
                   f_alpha: RadialProfile | np.ndarray | None = None,
                   rho: float = 1.0, sphere_order: int = 5,
                   scatter: str = "linear") -> tuple[OperatorMatrix, OperatorMatrix]:
    """Compact/remainder splitting: A = gain parts truncated by the mollified
    plateau bumps (output additionally confined to the ball of radius 2/delta),
    B = full operator - A. Returns (A, B).

    The default deposit stencil is the strictly local linear one so the
    compact part's rows vanish identically outside the ball; the cardinal
    spline deposit has exponentially small global tails and would blur the
    support probe.
    """
    if 2.0 / split.delta > grid.radius:
        raise AssemblyError(
            f"truncation ball radius 2/delta = {2.0 / split.delta:.3g} exceeds the grid "
            f"radius {grid.radius:.3g}: the support probe would be vacuous; "
            "increase delta or the grid radius")
    reach = {"linear": 1.0, "cubic": 2.0, "spline": float("inf")}[scatter]
    margin = (1.0 / split.delta + split.smoothing_width
              + reach * grid.h * math.sqrt(3.0))
    if margin > 2.0 / split.delta and not split.empty:
        raise AssemblyError(
            f"deposit stencil reach {margin:.3g} exceeds the support ball "
            f"{2.0 / split.delta:.3g}; refine the grid, increase delta, or use the "
            "linear stencil")
    if alpha is None:
        full = assemble_bath_operator(grid, e, bath, sphere_order, scatter)
        a_part = assemble_bath_operator(grid, e, bath, sphere_order, scatter,
                                        _split=split, _gain_only=True)
    else:
        full = assemble_linearized(grid, alpha, e, bath, f_alpha, rho,
                                   sphere_order, scatter)
        a_part = assemble_linearized(grid, alpha, e, bath, f_alpha, rho,
                                     sphere_order, scatter, _split=split)
    b_entries = full.entries - a_part.entries
    params = dict(a_part.params)
    b_part = OperatorMatrix(grid=grid, entries=b_entries, kind="b-part", params=params)
    return a_part, b_part


def split_probe_report(a_part: OperatorMatrix, b_part: OperatorMatrix, e: float,
                       bath: BathParams, split: SplitParams,
                       domination_tol: float = 0.5) -> dict:
    """Numerical probes of the compact/remainder splitting.

    Checks: (1) rows of A vanish outside the ball of radius 2/delta to 1e-12;
    (2) A + B reassembles the independently assembled full operator to 1e-12;
    (3) outside the ball, the B diagonal is dominated by the total collision
    frequency: |B_ii + nu_total(v_i)| <= domination_tol * nu_total(v_i);
    (4) the induced max-row-sum norm of A is finite.
    """
    grid = a_part.grid
    nodes = grid.nodes()
    ball = 2.0 / split.delta
    speed = np.linalg.norm(nodes, axis=1)
    outside = speed > ball
    scale = float(np.abs(a_part.entries).max())
    support_max = float(np.abs(a_part.entries[outside]).max()) if outside.any() else 0.0

    alpha = a_part.params.get("alpha")
    if alpha is None:
        full = assemble_bath_operator(grid, e, bath,
                                      sphere_order=a_part.params["sphere_order"],
                                      scatter=a_part.params["scatter"])
        nu_total = collision_frequency_nu(nodes, bath)
    else:
        full = assemble_linearized(grid, alpha, e, bath,
                                   rho=a_part.params.get("rho", 1.0),
                                   sphere_order=a_part.params["sphere_order"],
                                   scatter=a_part.params["scatter"])
        fvals = maxwellian_on_grid(grid, theta_sharp(e, bath.theta0),
                                   rho=a_part.params.get("rho", 1.0), center=bath.u0)
        nu_total = collision_frequency_nu(nodes, bath) + _grid_collision_frequency(
            nodes, fvals, grid.quad_weight)
    reassembly = float(np.abs(a_part.entries + b_part.entries - full.entries).max())
    full_scale = float(np.abs(full.entries).max())

    b_diag = np.diag(b_part.entries)
    dom_err = np.abs(b_diag[outside] + nu_total[outside]) / nu_total[outside]
    dom_max = float(dom_err.max()) if outside.any() else 0.0
    a_norm = float(np.abs(a_part.entries).sum(axis=1).max())

    return {
        "delta": split.delta,
        "ball_radius": ball,
        "rows_outside_ball": int(outside.sum()),
        "support_max_abs": support_max,
        "support_max_rel": support_max / scale if scale > 0 else 0.0,
        "support_ok": bool(support_max <= 1e-12 * max(scale, 1.0)),
        "reassembly_max_abs": reassembly,
        "reassembly_ok": bool(reassembly <= 1e-12 * max(full_scale, 1.0)),
        "b_diag_domination_max_rel": dom_max,
        "b_diag_dominated": bool(dom_max <= domination_tol),
        "a_induced_norm": a_norm,
        "a_norm_finite": bool(np.isfinite(a_norm)),
        "passed": bool(support_max <= 1e-12 * max(scale, 1.0)
                       and reassembly <= 1e-12 * max(full_scale, 1.0)
                       and dom_max <= domination_tol
                       and np.isfinite(a_norm)),
    }


def fourier_mode_operator(op: OperatorMatrix, k_vec) -> np.ndarray:
    """Single spatial Fourier mode of the transport term: the complex matrix
    A - i diag(k . v) on the operator's grid. Exposed for experimentation; all
    reported results use the zeroth mode (k = 0)."""
    k = np.asarray(k_vec, dtype=np.float64)
    phase = op.grid.nodes() @ k
    out = op.entries.astype(np.complex128)
    out[np.diag_indices(op.dim)] -= 1j * phase
    return out


def _column_sums(op: OperatorMatrix) -> np.ndarray:
    return op.grid.quad_weight * op.entries.sum(axis=0)


def mass_residual(op: OperatorMatrix, ref_weights: np.ndarray) -> tuple[float, float]:
    """(weighted, raw) column-sum defects: reference-weighted mean of
    |quadrature-weighted column sum| and the raw max over columns."""
    cs = np.abs(_column_sums(op))
    wsum = float(np.sum(ref_weights))
    return float(np.sum(ref_weights * cs) / wsum), float(cs.max())


def symmetrization_defect(op: OperatorMatrix, equilibrium: np.ndarray,
                          support_rel: float | None = None) -> float:
    """Relative Frobenius asymmetry of D^-1/2 A D^1/2, D = diag(equilibrium).

    With support_rel the defect is evaluated on the sub-block of nodes carrying
    equilibrium weight >= support_rel * max (the coarse-grid far tail otherwise
    dominates through the exponential conjugation ratios).
    """
    d = np.sqrt(np.maximum(equilibrium, 1e-300))
    if support_rel is None:
        s = op.entries * (d[None, :] / d[:, None])
    else:
        keep = equilibrium >= support_rel * equilibrium.max()
        sub = op.entries[np.ix_(keep, keep)]
        dk = d[keep]
        s = sub * (dk[None, :] / dk[:, None])
    num = float(np.linalg.norm(s - s.T))
    den = float(np.linalg.norm(s))
    return num / den if den > 0 else 0.0


def operator_difference_norm(op1: OperatorMatrix, op2: OperatorMatrix) -> float:
    """Induced max-row-sum (L-infinity) norm of op1 - op2 on the grid."""
    return float(np.abs(op1.entries - op2.entries).sum(axis=1).max())


def spectrum(op: OperatorMatrix, candidate: np.ndarray | None = None) -> SpectrumReport:
    """Dense nonsymmetric eigendecomposition with null-direction diagnostics.

    Reports eigenvalues sorted by descending real part, the spectral gap
    (-max real part excluding the eigenvalue nearest zero), the residual and
    direction cosine of the candidate equilibrium, and column-sum mass defects.
    """
    nn = op.dim
    if nn > DENSE_DIM_GUARD:
        raise ValueError(f"matrix dimension {nn} exceeds dense-solve guard {DENSE_DIM_GUARD}")
    if candidate is None:
        th = op.params.get("theta_sharp")
        if th is None:
            raise ValueError("no candidate equilibrium available; pass one explicitly")
        bath = op.params.get("bath", BathParams())
        candidate = maxwellian_on_grid(op.grid, th, center=bath.u0)
    c = candidate / np.linalg.norm(candidate)
    a = op.entries
    try:
        eigs = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"eigensolver failed: {exc}; matrix norm {np.abs(a).max():.3e}, "
            f"dim {nn}") from exc
    order = np.argsort(-eigs.real, kind="stable")
    eigs = eigs[order]
    k0 = int(np.argmin(np.abs(eigs)))
    lam0 = eigs[k0]
    rest = np.delete(eigs, k0)
    gap = float(-rest.real.max()) if rest.size else float("nan")
    vec = _inverse_iteration(a, float(lam0.real), c)
    cosine = float(abs(vec @ c))
    scale = float(np.abs(np.diag(a)).max())  # collision-frequency scale of the operator
    null_raw = float(np.linalg.norm(a @ c))
    null_res = null_raw / scale if scale > 0 else null_raw
    wres, raw = mass_residual(op, np.maximum(candidate, 0.0))
    hist, edges = np.histogram(eigs.real, bins=32)
    return SpectrumReport(
        kind=op.kind,
        eigenvalues=eigs,
        spectral_gap=gap,
        null_eigenvalue=complex(lam0),
        null_residual=null_res,
        null_cosine=cosine,
        mass_residual=wres,
        params={k: v for k, v in op.params.items() if k != "bath"}
        | {"grid_n": op.grid.n, "grid_radius": op.grid.radius,
           "gain_mass_deficit": op.gain_mass_deficit},
        notes={"null_residual_raw": null_raw,
               "operator_scale": scale,
               "mass_residual_max_col": raw,
               "real_part_histogram": {"counts": hist.tolist(),
                                       "edges": edges.tolist()}},
    )


def _inverse_iteration(a: np.ndarray, shift: float, start: np.ndarray,
                       iters: int = 3) -> np.ndarray:
    scale = float(np.abs(a).max())
    b = a - (shift + 1e-9 * scale) * np.eye(a.shape[0])
    lu, piv = linalg.lu_factor(b, overwrite_a=True)
    x = start.copy()
    for _ in range(iters):
        x = linalg.lu_solve((lu, piv), x)
        x /= np.linalg.norm(x)
    return x


def kernel_k_e(v, v_star, e: float, bath: BathParams, c_e: float = 1.0,
               mu: float = 1.0):
    """Explicit gain-kernel shape (C_e/|u|) exp(-c0 ((1+mu)|u| + d/|u|)^2) with
    d = |v-u0|^2 - |v_star-u0|^2 and c0 = 1/(8 theta0).

    C_e and mu are shape constants (not pinned by theory); with e = 1, mu = 0
    this is the classical elastic scattering kernel shape. v = v_star is
    rejected (1/|u| singularity).
    """
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    u = v - v_star
    um = np.linalg.norm(u, axis=-1)
    if np.any(um == 0.0):
        raise ValueError("kernel_k_e requires v != v_star")
    u0 = bath.u0_arr
    dv = (np.einsum("...i,...i->...", v - u0, v - u0)
          - np.einsum("...i,...i->...", v_star - u0, v_star - u0))
    c0 = 1.0 / (8.0 * bath.theta0)
    return (c_e / um) * np.exp(-c0 * ((1.0 + mu) * um + dv / um) ** 2)


def kernel_weighted_integral(v_star_mag: float, e: float, bath: BathParams,
                             w: WeightParams | None = None, c_e: float = 1.0,
                             mu: float = 1.0) -> float:
    """integral k_e(v, v_star) W(v) dv by adaptive 2D quadrature (requires u0 = 0).

    W is the combined weight for the given parameters, or 1 when w is None.
    Azimuthal symmetry about v_star reduces the integral to (rho = |u|, y)."""
    if any(abs(c) > 0 for c in bath.u0):
        raise ValueError("kernel_weighted_integral requires u0 = 0 (radial reduction)")
    s = float(v_star_mag)
    c0 = 1.0 / (8.0 * bath.theta0)

    def integrand(y, rho):
        v2 = s * s + rho * rho + 2.0 * rho * s * y
        expo = -c0 * ((2.0 + mu) * rho + 2.0 * s * y) ** 2
        if w is not None:
            av = math.sqrt(1.0 + v2)
            expo += w.q * math.log(av) + w.b * av**w.beta
        return rho * math.exp(expo)

    p_max = (2.0 * s + 45.0 * math.sqrt(bath.theta0)) / (2.0 + mu)
    val, _ = integrate.dblquad(integrand, 0.0, p_max, -1.0, 1.0,
                               epsabs=1e-12, epsrel=1e-9)
    return 2.0 * np.pi * c_e * val


def kernel_bound_check(w: WeightParams, e: float, bath: BathParams,
                       radii_scale=(1.0, 2.0, 4.0, 8.0), c_e: float = 1.0,
                       mu: float = 1.0, trend_tol: float = 0.05) -> dict:
    """Weighted kernel-moment bound probe.

    Computes H(v_star) = integral k_e <v>^q m(v) dv at |v_star| in
    radii_scale * sqrt(theta0), the ratio against
    (1 + |v_star|^(1-beta)) <v_star>^q m(v_star), the smallest constant K making
    the bound hold on the sample, and whether the ratio shows an increasing
    trend beyond trend_tol.
    """
    s0 = math.sqrt(bath.theta0)
    rows = []
    for scale in radii_scale:
        s = scale * s0
        h_val = kernel_weighted_integral(s, e, bath, w, c_e, mu)
        bound = (1.0 + s ** (1.0 - w.beta)) * math.exp(float(log_weight_m(s, w)))
        rows.append({"v_star_mag": s, "H": h_val, "bound_shape": bound,
                     "ratio": h_val / bound})
    ratios = [r["ratio"] for r in rows]
    worst_increase = 0.0
    for i in range(len(ratios)):
        for j in range(i + 1, len(ratios)):
            worst_increase = max(worst_increase, ratios[j] / ratios[i] - 1.0)
    return {
        "rows": rows,
        "fitted_K": max(ratios),
        "worst_relative_increase": worst_increase,
        "no_increasing_trend": worst_increase <= trend_tol,
        "params": {"q": w.q, "b": w.b, "beta": w.beta, "e": e, "c_e": c_e, "mu": mu},
    }
