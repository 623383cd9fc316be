"""Run configuration: INI files and command-line overrides.

Grammar (every section and key optional)::

    [run]        cases = pure1, pure2     eps = 1/16, 1/32     out = results
                 plots = true             seed = 0             threads = 1
    [collision]  kernel = anisotropic | isotropic | legendre-series   coeffs = 1, 0.1
    [halfspace]  N = 16                   alpha = 0.1          quadrature = auto
    [heat]       dx = 1e-3                dt = 2.5e-4
    [kinetic]    n_mu = 32                dx = auto            cfl = 0.5    dt_cap = eps2 | none
    [coupled]    x_m = 0                  dx = 5e-3            cfl = 0.5

Comma-separated lists; epsilon values may be written as fractions.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .experiments import CASES, SolverParams

DEFAULT_EPS = ("1/16", "1/32", "1/64")
DEFAULT_CASES = ("pure1", "pure2", "pure3", "pure4", "pure6")

# section -> key -> (SolverParams field, parser)
_SOLVER_KEYS = {
    "collision": {"kernel": ("kernel", str), "coeffs": ("kernel_coeffs", "floats")},
    "halfspace": {"n": ("halfspace_N", int), "alpha": ("halfspace_alpha", float),
                  "quadrature": ("halfspace_quadrature", "auto_int")},
    "heat": {"dx": ("heat_dx", float), "dt": ("heat_dt", float)},
    "kinetic": {"n_mu": ("n_mu", int), "dx": ("kinetic_dx", "auto_float"), "cfl": ("kinetic_cfl", float),
                "dt_cap": ("kinetic_dt_cap", str)},
    "coupled": {"x_m": ("coupled_x_m", float), "dx": ("coupled_dx", float), "cfl": ("coupled_cfl", float)},
}
_RUN_KEYS = ("cases", "eps", "out", "plots", "seed", "threads")


@dataclass(frozen=True)
class RunConfig:
    cases: tuple[str, ...] = DEFAULT_CASES
    eps: tuple[str, ...] = DEFAULT_EPS  # as written, e.g. "1/32"
    params: SolverParams = field(default_factory=SolverParams)
    out: Path = Path("results")
    plots: bool = False
    seed: int = 0
    threads: int = 1

    @property
    def eps_values(self) -> tuple[float, ...]:
        return tuple(float(Fraction(e)) for e in self.eps)


def parse_eps(text: str, context: str = "--eps") -> tuple[str, ...]:
    items = [t.strip() for t in text.split(",") if t.strip()]
    if not items:
        raise ConfigError(f"{context}: empty epsilon list")
    out = []
    for item in items:
        try:
            value = Fraction(item)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{context}: cannot read epsilon {item!r}") from None
        if not 0 < value < 1:
            raise ConfigError(f"{context}: epsilon {item} must lie in (0, 1)")
        out.append(item)
    return tuple(out)


def parse_cases(text: str, context: str = "--case") -> tuple[str, ...]:
    items = tuple(t.strip() for t in text.split(",") if t.strip())
    if not items:
        raise ConfigError(f"{context}: empty case list")
    for item in items:
        if item not in CASES:
            raise ConfigError(f"{context}: unknown case {item!r}; expected one of {', '.join(CASES)}")
    return items


def eps_label(eps: str) -> str:
    """Filename-safe form of an epsilon, ``1/32 -> 1-32``."""
    f = Fraction(eps)
    return f"{f.numerator}-{f.denominator}"


def _convert(kind, raw: str, context: str):
    try:
        if kind == "floats":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "auto_int":
            return None if raw.strip().lower() == "auto" else int(raw)
        if kind == "auto_float":
            return None if raw.strip().lower() == "auto" else float(Fraction(raw.strip()))
        if kind is float:
            return float(Fraction(raw.strip()))
        return kind(raw.strip())
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{context}: cannot read value {raw!r}") from None


def _line_of(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return n
            continue
        if key is not None and current == section and re.match(rf"\s*{re.escape(key)}\s*[=:]", line, re.I):
            return n
    return None


def _where(path, text, section, key=None) -> str:
    line = _line_of(text, section, key)
    return f"{path}:{line}" if line else str(path)


def load_config(path: str | Path, base: RunConfig | None = None) -> RunConfig:
    """Read an INI file on top of ``base`` (defaults when omitted)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc.message if hasattr(exc, 'message') else exc}") from None
    cfg = base or RunConfig()
    updates: dict = {}
    solver: dict = {}
    for section in parser.sections():
        sec = section.lower()
        if sec != "run" and sec not in _SOLVER_KEYS:
            raise ConfigError(f"{_where(path, text, sec)}: unknown section [{section}]")
        for key, raw in parser.items(section):
            where = _where(path, text, sec, key)
            if sec == "run":
                if key not in _RUN_KEYS:
                    raise ConfigError(f"{where}: unknown key {key!r} in [run]")
                if key == "cases":
                    updates["cases"] = parse_cases(raw, where)
                elif key == "eps":
                    updates["eps"] = parse_eps(raw, where)
                elif key == "out":
                    updates["out"] = Path(raw.strip())
                elif key == "plots":
                    try:
                        updates["plots"] = parser.getboolean(section, key)
                    except ValueError:
                        raise ConfigError(f"{where}: plots must be true or false") from None
                else:
                    updates[key] = _convert(int, raw, where)
            else:
                if key not in _SOLVER_KEYS[sec]:
                    raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
                name, kind = _SOLVER_KEYS[sec][key]
                solver[name] = _convert(kind, raw, where)
    cfg = replace(cfg, **updates, params=replace(cfg.params, **solver))
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    p = cfg.params
    if p.kernel not in ("anisotropic", "isotropic", "legendre-series"):
        raise ConfigError(f"unknown kernel {p.kernel!r}")
    if p.kinetic_dt_cap not in ("eps2", "none"):
        raise ConfigError(f"kinetic dt_cap must be 'eps2' or 'none', got {p.kinetic_dt_cap!r}")
    positive = {"heat dx": p.heat_dx, "heat dt": p.heat_dt, "coupled dx": p.coupled_dx,
                "kinetic cfl": p.kinetic_cfl, "coupled cfl": p.coupled_cfl, "halfspace alpha": p.halfspace_alpha}
    for name, value in positive.items():
        if not value > 0:
            raise ConfigError(f"{name} must be positive, got {value}")
    if p.kinetic_dx is not None and not p.kinetic_dx > 0:
        raise ConfigError(f"kinetic dx must be positive, got {p.kinetic_dx}")
    if p.halfspace_N < 1 or p.n_mu < 4 or p.n_mu % 2:
        raise ConfigError("halfspace N must be >= 1 and n_mu an even number >= 4")
    if cfg.threads < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg.threads}")
