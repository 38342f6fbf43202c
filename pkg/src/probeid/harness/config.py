"""Flat ``key = value`` run configuration with dotted section keys."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..models import ModelSpec, canonical_family, parse_custom_terms
from ..pauli import PauliError, PauliString


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(x)) for x in text.replace(",", " ").split())


def _default_budgets() -> tuple[float, ...]:
    return tuple(10.0 ** k for k in range(3, 8))


@dataclass
class RunConfig:
    # model
    family: str = "ExchangeNoField"
    N: int = 2
    axes: str = "XYZ"
    terms: str = ""  # custom Hamiltonian, "1/2 J1 X1 X2; ..."
    # parameters: explicit truth, or uniform draws from a range
    theta: dict = field(default_factory=dict)
    theta_min: float = 0.0
    theta_max: float = 100.0
    theta_exclude: float = 0.05  # fraction of the range excluded around zero
    # probe
    observables: str = ""  # e.g. "X1,Y1"; empty means the family default
    probe_sign: int = 1
    # sampling
    dt_policy: str = "prior"  # explicit | prior
    dt: float = 0.0
    dt_safety: float = 1.0  # dt = safety * pi / Omega_max under the prior policy
    length: int = 0  # 0: lambda_min points per observable
    # noise
    sigma: float = 0.0
    shots: int = 1
    # estimation
    hankel_sizes: tuple = ()
    threshold: float = 1e-6
    solver: str = "auto"  # auto | closed | generic
    inputs: tuple = ()  # CSV series read by `estimate`
    # identify
    trials: int = 2
    cap: int = 10**6
    # bounds
    t_dead: float = 0.0
    chain_J: float = 1.0
    chain_a: float = 1.0
    # robustness
    scenario: str = "fixed_dt"
    realizations: int = 100
    repeats: int = 20
    budgets: tuple = field(default_factory=_default_budgets)
    # run
    seed: int = 0
    out: str = ""
    workers: int = 1
    format: str = "json"

    # -- derived ------------------------------------------------------------
    def model(self) -> ModelSpec:
        fam = canonical_family(self.family)
        custom = parse_custom_terms(self.terms, self.N) if fam == "Custom" else ()
        return ModelSpec(fam, self.N, tuple(self.axes), custom)

    def observable_list(self, model: ModelSpec | None = None) -> list[PauliString]:
        model = model or self.model()
        if not self.observables.strip():
            return model.default_observables(two=model.family == "ExchangeTransverse")
        return [PauliString.parse(w.strip(), model.N) for w in self.observables.split(",") if w.strip()]

    def echo(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else (dict(sorted(v.items())) if isinstance(v, dict) else v)
        return out

    def validate(self) -> "RunConfig":
        try:
            model = self.model()
            obs = self.observable_list(model)
        except (ValueError, PauliError) as e:
            raise ConfigError(str(e)) from None
        params = model.parameters()
        for k in self.theta:
            if k not in params:
                raise ConfigError(f"theta.{k} is not a parameter of {model.family} (has {', '.join(params)})")
        if self.theta and set(self.theta) != set(params):
            missing = sorted(set(params) - set(self.theta))
            raise ConfigError(f"theta given for some parameters but not for {', '.join(missing)}")
        if not obs:
            raise ConfigError("no observables")
        if self.dt_policy not in ("explicit", "prior"):
            raise ConfigError(f"dt.policy must be explicit or prior, got {self.dt_policy!r}")
        if self.dt_policy == "explicit" and not self.dt > 0:
            raise ConfigError("dt.policy = explicit needs dt.value > 0")
        if self.dt_policy == "prior" and not self.theta_max > 0:
            raise ConfigError("the prior dt policy needs theta.max > 0")
        if not 0 <= self.theta_min < self.theta_max:
            raise ConfigError("need 0 <= theta.min < theta.max")
        if not 0 <= self.theta_exclude < 1:
            raise ConfigError("theta.exclude must lie in [0, 1)")
        if self.sigma < 0 or self.shots < 1:
            raise ConfigError("need noise.sigma >= 0 and noise.shots >= 1")
        if self.length < 0:
            raise ConfigError("series.length must be >= 0")
        if self.scenario not in ("fixed_dt", "fixed_T"):
            raise ConfigError(f"robustness.scenario must be fixed_dt or fixed_T, got {self.scenario!r}")
        if self.realizations < 1 or self.repeats < 1:
            raise ConfigError("robustness.realizations and robustness.repeats must be >= 1")
        b = list(self.budgets)
        if not b or any(not math.isfinite(x) or x <= 0 for x in b) or any(y <= x for x, y in zip(b, b[1:])):
            raise ConfigError("robustness.budgets must be positive and strictly increasing")
        if any(j < 1 for j in self.hankel_sizes):
            raise ConfigError("era.hankel_sizes must be positive")
        if self.solver not in ("auto", "closed", "generic"):
            raise ConfigError(f"estimate.solver must be auto, closed or generic, got {self.solver!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.format!r}")
        if self.probe_sign not in (1, -1):
            raise ConfigError("probe.sign must be 1 or -1")
        if self.workers < 1 or self.trials < 1 or self.cap < 1:
            raise ConfigError("workers, identify.trials and identify.cap must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        return self


# key -> (attribute, parser)
KEYS = {
    "model.family": ("family", str),
    "model.N": ("N", int),
    "model.axes": ("axes", lambda s: s.replace(",", "").replace(" ", "").upper()),
    "model.terms": ("terms", str),
    "theta.min": ("theta_min", float),
    "theta.max": ("theta_max", float),
    "theta.exclude": ("theta_exclude", float),
    "probe.observables": ("observables", str),
    "probe.sign": ("probe_sign", int),
    "dt.policy": ("dt_policy", str),
    "dt.value": ("dt", float),
    "dt.safety": ("dt_safety", float),
    "series.length": ("length", int),
    "noise.sigma": ("sigma", float),
    "noise.shots": ("shots", int),
    "era.hankel_sizes": ("hankel_sizes", _ints),
    "era.threshold": ("threshold", float),
    "estimate.solver": ("solver", str),
    "estimate.inputs": ("inputs", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    "identify.trials": ("trials", int),
    "identify.cap": ("cap", int),
    "bounds.t_dead": ("t_dead", float),
    "bounds.J": ("chain_J", float),
    "bounds.a": ("chain_a", float),
    "robustness.scenario": ("scenario", str),
    "robustness.realizations": ("realizations", int),
    "robustness.repeats": ("repeats", int),
    "robustness.budgets": ("budgets", _floats),
    "run.seed": ("seed", int),
    "run.out": ("out", str),
    "run.workers": ("workers", int),
    "run.format": ("format", str),
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    cfg = base or RunConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        seen.add(key)
        try:
            if key.startswith("theta.") and key not in KEYS:
                name = key[len("theta."):]
                if not name.isidentifier():
                    raise ValueError(f"bad parameter name {name!r}")
                cfg.theta[name] = float(value)
                continue
            if key not in KEYS:
                raise ConfigError(f"line {lineno}: unknown key {key}")
            attr, conv = KEYS[key]
            setattr(cfg, attr, conv(value))
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"line {lineno}: bad value for {key}: {e}") from None
    try:
        cfg.family = canonical_family(cfg.family)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}") from None
    try:
        return parse_config(text)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
