"""TOML configuration for geometries and reductions.

A geometry file looks like::

    [spacetime]
    model = "flat"            # or "custom" with vielbein = [[...], [...], [...]]
    box = 1.0

    [potential]
    kind = "random"           # "zero", "random" or "explicit"
    seed = 42
    degree = 2
    # rows = [["x0", "0", "0"], ...]   for kind = "explicit"; rows alpha = 5, 6, 7

    [sampling]
    seed = 42
    n = 30

    [tolerances]
    structure = 1e-9

A reduction file carries ``M``, the ``[m]`` table (``mode``, ``value``,
``strict``), ``[ansatz]`` seeds and point count, and ``[tolerances]``.
Exact numbers are written as strings (``"3/4"``, ``"1 + 1/2*i"``).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .qi import QI

__all__ = [
    "ConfigError",
    "GeometryConfig",
    "ReductionConfig",
    "RunConfig",
    "CONFIG_DIR_ENV",
    "resolve_path",
    "load_geometry_config",
    "load_reduction_config",
    "build_geometry",
]

CONFIG_DIR_ENV = "KKDIRAC_CONFIG_DIR"

GEOMETRY_TOLERANCES = {
    "structure": 1e-9,
    "interior": 1e-10,
    "connection": 1e-9,
    "hodge": 1e-10,
    "lambda": 1e-10,
    "bianchi": 1e-9,
}
REDUCTION_TOLERANCES = {"soundness": 1e-9, "eigenstate": 1e-9}


class ConfigError(ValueError):
    """Malformed or inconsistent configuration (exit code 2)."""


@dataclass(frozen=True)
class GeometryConfig:
    spacetime: str = "flat"
    box: float = 1.0
    vielbein: tuple | None = None
    potential: str = "zero"
    potential_seed: int = 0
    potential_degree: int = 2
    potential_rows: tuple | None = None
    invariance: str = "right"
    seed: int = 0
    n: int = 30
    tolerances: dict = field(default_factory=lambda: dict(GEOMETRY_TOLERANCES))
    source: str | None = None


@dataclass(frozen=True)
class ReductionConfig:
    M: QI = QI(1)
    m_mode: str = "extract"
    m: QI | None = None
    strict: bool = True
    seeds: tuple = (7,)
    n: int = 30
    sweep: bool = True
    tolerances: dict = field(default_factory=lambda: dict(REDUCTION_TOLERANCES))
    source: str | None = None


@dataclass(frozen=True)
class RunConfig:
    command: str
    geometry: Path | None = None
    reduction: Path | None = None
    seed: int | None = None
    n: int | None = None
    tolerances: dict = field(default_factory=dict)
    output: Path | None = None
    verbosity: int = 0

    def __post_init__(self):
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.n is not None and self.n < 1:
            raise ConfigError("sample count must be positive")


def resolve_path(path) -> Path:
    """Use ``path`` as given if it exists, else look it up in ``$KKDIRAC_CONFIG_DIR``."""
    p = Path(path)
    if p.exists():
        return p
    base = os.environ.get(CONFIG_DIR_ENV)
    if base and not p.is_absolute() and (Path(base) / p).exists():
        return Path(base) / p
    raise ConfigError(f"config file not found: {path}")


def _read(path) -> tuple[dict, str]:
    p = resolve_path(path)
    try:
        with open(p, "rb") as fh:
            return tomli.load(fh), str(p)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc


def _table(doc, key):
    v = doc.get(key, {})
    if not isinstance(v, dict):
        raise ConfigError(f"[{key}] must be a table")
    return v


def _int(v, what, lo=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{what} must be an integer")
    if lo is not None and v < lo:
        raise ConfigError(f"{what} must be >= {lo}")
    return v


def _exact(v, what) -> QI:
    if isinstance(v, bool) or isinstance(v, float):
        raise ConfigError(f"{what} must be an integer or an exact string such as \"3/4\"")
    try:
        return QI(v) if isinstance(v, int) else QI.parse(str(v))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{what}: cannot parse {v!r}") from exc


def _tolerances(doc, defaults):
    tol = dict(defaults)
    for k, v in _table(doc, "tolerances").items():
        if k not in defaults:
            raise ConfigError(f"unknown tolerance {k!r} (known: {', '.join(sorted(defaults))})")
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise ConfigError(f"tolerance {k!r} must be a positive number")
        tol[k] = float(v)
    return tol


def _rows(v, what):
    if not isinstance(v, list) or len(v) != 3 or any(not isinstance(r, list) or len(r) != 3 for r in v):
        raise ConfigError(f"{what} must be a 3x3 array of expression strings")
    return tuple(tuple(str(x) for x in r) for r in v)


def load_geometry_config(path) -> GeometryConfig:
    doc, src = _read(path)
    unknown = set(doc) - {"spacetime", "sphere", "potential", "sampling", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")
    st, sp, pot, smp = (_table(doc, k) for k in ("spacetime", "sphere", "potential", "sampling"))
    model = st.get("model", "flat")
    if model not in ("flat", "custom"):
        raise ConfigError("spacetime.model must be 'flat' or 'custom'")
    if model == "custom" and "vielbein" not in st:
        raise ConfigError("custom spacetime needs spacetime.vielbein")
    vielbein = _rows(st["vielbein"], "spacetime.vielbein") if model == "custom" else None
    box = st.get("box", 1.0)
    if isinstance(box, bool) or not isinstance(box, (int, float)) or box <= 0:
        raise ConfigError("spacetime.box must be positive")
    invariance = sp.get("invariance", "right")
    if invariance not in ("right", "left"):
        raise ConfigError("sphere.invariance must be 'right' or 'left'")
    kind = pot.get("kind", "zero")
    if kind not in ("zero", "random", "explicit"):
        raise ConfigError("potential.kind must be 'zero', 'random' or 'explicit'")
    rows = _rows(pot.get("rows"), "potential.rows") if kind == "explicit" else None
    return GeometryConfig(
        spacetime=model,
        box=float(box),
        vielbein=vielbein,
        potential=kind,
        potential_seed=_int(pot.get("seed", 0), "potential.seed", 0),
        potential_degree=_int(pot.get("degree", 2), "potential.degree", 0),
        potential_rows=rows,
        invariance=invariance,
        seed=_int(smp.get("seed", 0), "sampling.seed", 0),
        n=_int(smp.get("n", 30), "sampling.n", 1),
        tolerances=_tolerances(doc, GEOMETRY_TOLERANCES),
        source=src,
    )


def load_reduction_config(path) -> ReductionConfig:
    doc, src = _read(path)
    unknown = set(doc) - {"M", "m", "ansatz", "tolerances", "sweep"}
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(sorted(unknown))}")
    M = _exact(doc.get("M", 1), "M")
    if not M.is_real() or M.re < 0:
        raise ConfigError("M must be a non-negative real number")
    mt = _table(doc, "m")
    mode = mt.get("mode", "extract")
    if mode not in ("extract", "explicit"):
        raise ConfigError("m.mode must be 'extract' or 'explicit'")
    m = None
    if mode == "explicit":
        if "value" not in mt:
            raise ConfigError("m.mode = 'explicit' needs m.value")
        m = _exact(mt["value"], "m.value")
    strict = mt.get("strict", True)
    if not isinstance(strict, bool):
        raise ConfigError("m.strict must be true or false")
    an = _table(doc, "ansatz")
    seeds = an.get("seeds", [7])
    if not isinstance(seeds, list) or not seeds:
        raise ConfigError("ansatz.seeds must be a non-empty list")
    seeds = tuple(_int(s, "ansatz seed", 0) for s in seeds)
    sweep = doc.get("sweep", True)
    if not isinstance(sweep, bool):
        raise ConfigError("sweep must be true or false")
    return ReductionConfig(
        M=M,
        m_mode=mode,
        m=m,
        strict=strict,
        seeds=seeds,
        n=_int(an.get("points", 30), "ansatz.points", 1),
        sweep=sweep,
        tolerances=_tolerances(doc, REDUCTION_TOLERANCES),
        source=src,
    )


def build_geometry(cfg: GeometryConfig):
    """Assemble the bundle geometry described by ``cfg``."""
    from .geometry import (
        assemble_kk,
        custom_spacetime,
        flat_spacetime,
        potential_from_strings,
        random_polynomial_potential,
        sphere_model,
        zero_potential,
    )
    try:
        st = custom_spacetime(cfg.vielbein, cfg.box) if cfg.spacetime == "custom" else flat_spacetime(cfg.box)
        if cfg.potential == "zero":
            A = zero_potential(st.chart)
        elif cfg.potential == "random":
            A = random_polynomial_potential(st.chart, cfg.potential_seed, cfg.potential_degree)
        else:
            A = potential_from_strings(st.chart, cfg.potential_rows)
    except (ValueError, TypeError, SyntaxError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc
    return assemble_kk(st, sphere_model(cfg.invariance), A)
