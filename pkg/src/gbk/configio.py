"""Flat key-value config files, reproducible CSV/JSON artifacts, and the
binary ensemble dump.

Config format: one `key = value` per line, `#` comments, lower_snake_case keys.
CSV uses `.` decimals and 17 significant digits; JSON reports are
stable-key-ordered. Every artifact carries a reproducibility header (resolved
config, seed, version); the timestamp lives only in the header so payloads are
byte-identical across reruns with the same config and seed, single-threaded.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

import numpy as np

from . import __version__
from .collisions import BathParams, RestitutionParams, WeightParams
from .engine import ParticleEnsemble, SimConfig

__all__ = [
    "ConfigError",
    "parse_config_text",
    "read_config",
    "sim_config_from_dict",
    "resolved_config_dict",
    "write_csv",
    "write_json",
    "read_csv_payload",
    "dump_ensemble",
    "load_ensemble",
]

ENSEMBLE_MAGIC = b"GBKENS01"


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines; values keep their raw string form."""
    out: dict[str, str] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
        key, val = line.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        out[key] = val.strip()
    return out


def read_config(path) -> dict:
    return parse_config_text(Path(path).read_text())


def _as_float(cfg, key, default):
    return float(cfg.get(key, default))


def _as_int(cfg, key, default):
    return int(cfg.get(key, default))


def _as_vec3(cfg, key, default):
    raw = cfg.get(key)
    if raw is None:
        return tuple(default)
    parts = raw.replace(",", " ").split()
    if len(parts) != 3:
        raise ConfigError(f"{key} must have 3 components, got {raw!r}")
    return tuple(float(p) for p in parts)


def _parse_weight_norms(raw: str) -> tuple[WeightParams, ...]:
    """Comma-separated q:b:beta triplets, e.g. '0:1:0.5, 2:1:0.5'."""
    out = []
    for item in raw.split(","):
        item = item.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError(f"weight_norms item {item!r} is not q:b:beta")
        q, b, beta = int(parts[0]), float(parts[1]), float(parts[2])
        out.append(WeightParams(b=b, beta=beta, q=q))
    return tuple(out)


def sim_config_from_dict(cfg: dict) -> SimConfig:
    try:
        init_theta = cfg.get("init_theta")
        init_u = _as_vec3(cfg, "init_u", None) if "init_u" in cfg else None
        return SimConfig(
            n_particles=_as_int(cfg, "n_particles", 10_000),
            dt=_as_float(cfg, "dt", 0.0),
            t_end=_as_float(cfg, "t_end", 1.0),
            restitution=RestitutionParams(
                alpha=_as_float(cfg, "alpha", 1.0),
                e=_as_float(cfg, "e", 1.0),
            ),
            bath=BathParams(
                u0=_as_vec3(cfg, "u0", (0.0, 0.0, 0.0)),
                theta0=_as_float(cfg, "theta0", 1.0),
            ),
            bath_coupling=_as_float(cfg, "bath_coupling", 1.0),
            spatial=cfg.get("spatial", "homogeneous"),
            box_dim=_as_int(cfg, "box_dim", 3),
            l_box=_as_float(cfg, "l_box", 1.0),
            n_cells=_as_int(cfg, "n_cells", 1),
            seed=_as_int(cfg, "seed", 0),
            record_every=_as_int(cfg, "record_every", 20),
            rho=_as_float(cfg, "rho", 1.0),
            init_kind=cfg.get("init_kind", "maxwellian"),
            init_theta=float(init_theta) if init_theta is not None else None,
            init_u=init_u,
            weight_norms=_parse_weight_norms(cfg.get("weight_norms", "")),
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def resolved_config_dict(config: SimConfig) -> dict:
    d = {
        "n_particles": config.n_particles,
        "dt": config.dt,
        "t_end": config.t_end,
        "alpha": config.restitution.alpha,
        "e": config.restitution.e,
        "u0": list(config.bath.u0),
        "theta0": config.bath.theta0,
        "bath_coupling": config.bath_coupling,
        "spatial": config.spatial,
        "seed": config.seed,
        "record_every": config.record_every,
        "rho": config.rho,
        "init_kind": config.init_kind,
    }
    if config.spatial == "periodic":
        d.update(box_dim=config.box_dim, l_box=config.l_box, n_cells=config.n_cells)
    if config.init_theta is not None:
        d["init_theta"] = config.init_theta
    if config.init_u is not None:
        d["init_u"] = list(config.init_u)
    if config.weight_norms:
        d["weight_norms"] = ",".join(f"{w.q}:{w.b:g}:{w.beta:g}" for w in config.weight_norms)
    return d


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def _header_lines(meta: dict, stamp: bool) -> list[str]:
    lines = [f"# gbk {__version__}"]
    for k in sorted(meta):
        lines.append(f"# {k} = {meta[k]}")
    if stamp:
        lines.append(f"# timestamp = {time.strftime('%Y-%m-%dT%H:%M:%S')}")
    return lines


def write_csv(path, columns: list[str], rows, meta: dict | None = None,
              stamp: bool = True) -> None:
    """CSV with a commented reproducibility header; 17 significant digits."""
    lines = _header_lines(meta or {}, stamp)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv_payload(path) -> tuple[list[str], list[list[str]]]:
    """Columns and raw payload rows, skipping header comments."""
    rows = []
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") or not line.strip():
            continue
        if header is None:
            header = line.split(",")
        else:
            rows.append(line.split(","))
    return header or [], rows


class _NumpyEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, complex):
            return [obj.real, obj.imag]
        return super().default(obj)


def write_json(path, payload: dict, meta: dict | None = None, stamp: bool = True) -> None:
    doc = {"header": {"gbk_version": __version__, **(meta or {})}}
    if stamp:
        doc["header"]["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    doc.update(payload)
    Path(path).write_text(json.dumps(doc, cls=_NumpyEncoder, sort_keys=True, indent=1) + "\n")


def dump_ensemble(path, ens: ParticleEnsemble) -> None:
    """Magic + little-endian f64 triplets: velocities, then positions (padded to 3)."""
    with open(path, "wb") as fh:
        fh.write(ENSEMBLE_MAGIC)
        fh.write(ens.velocities.astype("<f8").tobytes())
        if ens.positions is not None:
            pos = np.zeros((ens.n, 3))
            pos[:, : ens.positions.shape[1]] = ens.positions
            fh.write(pos.astype("<f8").tobytes())


def load_ensemble(path, with_positions: bool | None = None, rho: float = 1.0,
                  box: float = 1.0, pos_dim: int = 3) -> ParticleEnsemble:
    raw = Path(path).read_bytes()
    if raw[:8] != ENSEMBLE_MAGIC:
        raise ValueError(f"{path}: bad magic {raw[:8]!r}")
    body = np.frombuffer(raw[8:], dtype="<f8")
    if body.size % 3:
        raise ValueError(f"{path}: payload is not f64 triplets")
    k = body.size // 3
    if with_positions is None:
        with_positions = False
    if with_positions:
        if k % 2:
            raise ValueError(f"{path}: odd triplet count with positions present")
        n = k // 2
        vel = body[: 3 * n].reshape(n, 3).copy()
        pos = body[3 * n:].reshape(n, 3)[:, :pos_dim].copy()
        return ParticleEnsemble(velocities=vel, rho=rho, positions=pos, box=box)
    return ParticleEnsemble(velocities=body.reshape(k, 3).copy(), rho=rho)
