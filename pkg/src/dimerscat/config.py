"""Run configuration: defaults, flat ``key = value`` files and validation."""

from dataclasses import dataclass, fields, replace
import math

from .errors import ValidationError
from .scattering import DEFAULT_BAND_FRACTION, DEFAULT_GRID_POINTS, DEFAULT_MARGIN

COMMANDS = ("spectrum", "qmatrix", "phasespace", "sweep", "pn", "born")
BORN_FORMS = ("full", "simplified", "both")


@dataclass(frozen=True)
class RunConfig:
    command: str = "spectrum"
    n_bosons: tuple = (30,)
    u: float = 5.0
    hopping_k: float = 1.0
    gamma: float = 0.1
    alpha: float = 1.0
    bias: float = None
    band_fraction: float = DEFAULT_BAND_FRACTION
    grid_points: int = DEFAULT_GRID_POINTS
    margin: float = DEFAULT_MARGIN
    lead_hopping: float = 1.0
    window: int = 3
    t_final: float = 100.0
    dt: float = 1e-3
    record_every: int = 100
    trajectories: int = 24
    random_states: int = 0
    seed: int = 0
    alphas: tuple = (1.0,)
    alphas_scaled: bool = False
    born_form: str = "both"
    out_dir: str = "."

    @property
    def resolved_bias(self):
        return 0.01 * self.hopping_k if self.bias is None else self.bias

    def validate(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not self.n_bosons or any(n < 1 for n in self.n_bosons):
            raise ValidationError("n_bosons must be >= 1")
        _finite(self, "u", "hopping_k", "gamma", "alpha", "band_fraction", "margin",
                "lead_hopping", "t_final", "dt")
        if self.u < 0:
            raise ValidationError("u must be >= 0")
        if self.hopping_k <= 0 or self.lead_hopping <= 0:
            raise ValidationError("hopping strengths must be > 0")
        if not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.alpha < 0:
            raise ValidationError(f"alpha must be >= 0, got {self.alpha}")
        if self.bias is not None and not (math.isfinite(self.bias) and self.bias >= 0):
            raise ValidationError(f"bias must be >= 0, got {self.bias}")
        if not 0.0 < self.band_fraction < 1.0:
            raise ValidationError(f"band_fraction must lie in (0, 1), got {self.band_fraction}")
        if self.grid_points < 1:
            raise ValidationError("grid_points must be >= 1")
        if self.margin < 0:
            raise ValidationError("margin must be >= 0")
        if self.window < 0:
            raise ValidationError("window must be >= 0")
        if self.dt <= 0 or self.t_final < 0:
            raise ValidationError("need dt > 0 and t_final >= 0")
        if self.record_every < 1 or self.trajectories < 0 or self.random_states < 0:
            raise ValidationError("record_every >= 1, trajectories >= 0, random_states >= 0")
        if self.command == "born" and any(not a > 0 for a in self.alphas):
            raise ValidationError("born needs positive alphas")
        if self.born_form not in BORN_FORMS:
            raise ValidationError(f"born_form must be one of {BORN_FORMS}")
        return self

    def items(self):
        """``(key, text)`` pairs in field order, for header echoing."""
        out = []
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "bias":
                val = self.resolved_bias
            out.append((f.name, format_value(val)))
        return out


def _finite(cfg, *names):
    for name in names:
        if not math.isfinite(getattr(cfg, name)):
            raise ValidationError(f"{name} must be finite")


def format_value(val):
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        return f"{val:.17g}"
    if isinstance(val, tuple):
        return ",".join(format_value(v) for v in val)
    return str(val)


def _parse_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"not a boolean: {text!r}")


def _int_list(text):
    return tuple(int(x) for x in str(text).split(",") if x.strip())


def _float_list(text):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


_PARSERS = {
    "command": str, "n_bosons": _int_list, "u": float, "hopping_k": float,
    "gamma": float, "alpha": float, "bias": float, "band_fraction": float,
    "grid_points": int, "margin": float, "lead_hopping": float, "window": int,
    "t_final": float, "dt": float, "record_every": int, "trajectories": int,
    "random_states": int, "seed": int, "alphas": _float_list,
    "alphas_scaled": _parse_bool, "born_form": str, "out_dir": str,
}


def parse_value(key, text):
    try:
        return _PARSERS[key](text)
    except KeyError:
        raise ValidationError(f"unknown configuration key {key!r}") from None
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad value for {key}: {text!r}") from None


def read_config_file(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            key, text = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            values[key] = parse_value(key, text)
    return values


def build_config(file_values=None, overrides=None):
    cfg = RunConfig()
    merged = dict(file_values or {})
    merged.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = set(merged) - {f.name for f in fields(RunConfig)}
    if unknown:
        raise ValidationError(f"unknown configuration keys: {sorted(unknown)}")
    return replace(cfg, **merged).validate()
