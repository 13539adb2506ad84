"""INI-style run configuration.

Sections ``[noise]``, ``[model]``, ``[kernel.mu]``, ``[kernel.nu]`` and
``[run]``. Unknown sections or keys are errors. Every value not given in the
file falls back to a documented default and is recorded as defaulted so that
reports can echo it.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .kernels import DelayModel, ExponentialKernel, load_tabulated_csv
from .noise import NoiseSpec
from .paths import HistorySegment

__all__ = ["RunSettings", "ResolvedConfig", "load_config", "reference_config_path"]

_NOISE_KEYS = {"sigma_L": 0.0, "lambda_L": 1.0, "mu_J": 0.0, "sigma_J": 1.0}
_MODEL_KEYS = ("eta", "c_mu", "c_nu")
_KERNEL_KEYS = {"kind", "w", "lambda", "support", "path"}

RUN_DEFAULTS = {
    "seed": 0,
    "delta": 0.01,
    "h": 0.01,
    "horizon": 20.0,
    "paths": 1,
    "report_step": 0.1,
    "phi": "stationary",
    "y0": 0.0,
    "step": 1e-3,
    "scheme": "events",
    "solver": "dde",
    "panels": 10_000,
    "grid_density": 200,
    "suite": "quick",
}
_INT_KEYS = {"seed", "paths", "panels", "grid_density"}
_STR_KEYS = {"phi", "scheme", "solver", "suite"}


def reference_config_path() -> Path:
    return Path(str(resources.files("cdgarch") / "data" / "reference.ini"))


@dataclass
class RunSettings:
    seed: int
    delta: float
    h: float
    horizon: float
    paths: int
    report_step: float
    phi: str
    y0: float
    step: float
    scheme: str
    solver: str
    panels: int
    grid_density: int
    suite: str


@dataclass
class ResolvedConfig:
    model: DelayModel
    run: RunSettings
    defaulted: list = field(default_factory=list)
    source: str | None = None

    def phi_segment(self) -> HistorySegment:
        """Initial segment: ``stationary`` (M), ``floor`` (x-), or a number."""
        from .stability import positivity_floor, stationary_mean

        spec = self.run.phi
        r = self.model.r
        if spec == "stationary":
            return HistorySegment.constant(r, stationary_mean(self.model))
        if spec == "floor":
            return HistorySegment.constant(r, positivity_floor(self.model))
        try:
            return HistorySegment.constant(r, float(spec))
        except ValueError:
            raise ConfigError(f"phi must be 'stationary', 'floor' or a number, got {spec!r}")

    def as_dict(self) -> dict:
        return {"model": self.model.as_dict(), "run": dict(vars(self.run))}

    def digest(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def to_ini(self) -> str:
        """Resolved configuration with every default written out."""
        m = self.model
        lines = ["[noise]"]
        for k in _NOISE_KEYS:
            lines.append(f"{k} = {getattr(m.noise, k)!r}")
        lines += ["", "[model]"]
        for k in _MODEL_KEYS:
            lines.append(f"{k} = {getattr(m, k)!r}")
        for name, k in (("mu", m.f_mu), ("nu", m.f_nu)):
            lines += ["", f"[kernel.{name}]"]
            if k is None:
                lines.append("kind = none")
            elif isinstance(k, ExponentialKernel):
                lines += ["kind = exponential", f"w = {k.w!r}", f"lambda = {k.lam!r}",
                          f"support = {k.support!r}"]
            else:
                src = self.kernel_paths.get(name, "")
                lines += ["kind = tabulated", f"path = {src}"]
        lines += ["", "[run]"]
        for k, v in vars(self.run).items():
            lines.append(f"{k} = {v!r}" if not isinstance(v, str) else f"{k} = {v}")
        return "\n".join(lines) + "\n"

    kernel_paths: dict = field(default_factory=dict)


def _float(sec, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{sec}] {key} = {raw!r} is not a number")


def _kernel(cp, name, base: Path, paths: dict):
    sec = f"kernel.{name}"
    if not cp.has_section(sec):
        return None
    items = dict(cp.items(sec))
    unknown = set(items) - _KERNEL_KEYS
    if unknown:
        raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")
    kind = items.get("kind", "exponential").strip().lower()
    if kind == "none":
        return None
    try:
        if kind == "exponential":
            for k in ("w", "lambda", "support"):
                if k not in items:
                    raise ConfigError(f"[{sec}] needs '{k}' for an exponential kernel")
            return ExponentialKernel(
                _float(sec, "w", items["w"]),
                _float(sec, "lambda", items["lambda"]),
                _float(sec, "support", items["support"]),
            )
        if kind == "tabulated":
            if "path" not in items:
                raise ConfigError(f"[{sec}] needs 'path' for a tabulated kernel")
            src = Path(items["path"])
            if not src.is_absolute():
                src = base / src
            paths[name] = str(src)
            return load_tabulated_csv(src)
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[{sec}]: {exc}")
    raise ConfigError(f"[{sec}] kind must be exponential, tabulated or none, got {kind!r}")


def load_config(path=None, text: str | None = None) -> ResolvedConfig:
    """Parse a configuration file (or ``text``) into a model and run settings."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    base = Path(".")
    try:
        if text is not None:
            cp.read_string(text)
        else:
            path = Path(path)
            base = path.parent
            with open(path) as fh:
                cp.read_file(fh)
    except (configparser.Error, OSError) as exc:
        raise ConfigError(f"cannot read configuration: {exc}")
    allowed = {"noise", "model", "kernel.mu", "kernel.nu", "run"}
    extra = set(cp.sections()) - allowed
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    defaulted = []

    noise_items = dict(cp.items("noise")) if cp.has_section("noise") else {}
    unknown = set(noise_items) - set(_NOISE_KEYS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown key(s) in [noise]: {', '.join(sorted(unknown))}")
    if "seed" in noise_items:
        raise ConfigError("the seed belongs in [run], not [noise]")
    noise_kw = {}
    for k, d in _NOISE_KEYS.items():
        if k in noise_items:
            noise_kw[k] = _float("noise", k, noise_items[k])
        else:
            noise_kw[k] = d
            defaulted.append(f"noise.{k}")

    if not cp.has_section("model"):
        raise ConfigError("missing [model] section")
    model_items = dict(cp.items("model"))
    unknown = set(model_items) - set(_MODEL_KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s) in [model]: {', '.join(sorted(unknown))}")
    for k in _MODEL_KEYS:
        if k not in model_items:
            raise ConfigError(f"[model] needs '{k}'")

    run_items = dict(cp.items("run")) if cp.has_section("run") else {}
    unknown = set(run_items) - set(RUN_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown key(s) in [run]: {', '.join(sorted(unknown))}")
    run_kw = {}
    for k, d in RUN_DEFAULTS.items():
        if k not in run_items:
            run_kw[k] = d
            defaulted.append(f"run.{k}")
            continue
        raw = run_items[k].strip()
        if k in _STR_KEYS:
            run_kw[k] = raw
        elif k in _INT_KEYS:
            try:
                run_kw[k] = int(raw)
            except ValueError:
                raise ConfigError(f"[run] {k} = {raw!r} is not an integer")
        else:
            run_kw[k] = _float("run", k, raw)
    run = RunSettings(**run_kw)

    kernel_paths: dict = {}
    try:
        noise = NoiseSpec(seed=run.seed, **noise_kw)
        model = DelayModel(
            _float("model", "eta", model_items["eta"]),
            _float("model", "c_mu", model_items["c_mu"]),
            _float("model", "c_nu", model_items["c_nu"]),
            _kernel(cp, "mu", base, kernel_paths),
            _kernel(cp, "nu", base, kernel_paths),
            noise,
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc))
    cfg = ResolvedConfig(model, run, defaulted, None if path is None else str(path))
    cfg.kernel_paths = kernel_paths
    return cfg
