"""Run configuration: a flat ``key = value`` text format.

Grammar, one entry per line::

    # comment
    key = value

Blank lines and ``#`` comments are ignored.  Lists are comma separated.
Unknown keys are errors.  ``deck_radius = auto`` means ceil(2 l).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    N: int = 2
    n: int = 2
    a: tuple = (3, -5)
    q0: tuple = ()
    seed: int = 0
    displacement_samples: int = 100_000
    deck_samples: int = 2_000
    embedding_samples: int = 100_000
    symplectic_samples: int = 100
    fd_step: float = 1e-5
    symplectic_tol: float = 1e-6
    deck_radius: str = "auto"
    scan_N_min: int = 1
    scan_N_max: int = 6
    point_cloud_csv: str = ""
    point_cloud_count: int = 1000

    def validate(self) -> "RunConfig":
        if self.N < 1 or self.n < 1:
            raise ConfigError("N and n must be positive")
        if len(self.a) != self.N:
            raise ConfigError(f"a has {len(self.a)} entries but N = {self.N}")
        if self.q0 and len(self.q0) != self.n:
            raise ConfigError(f"q0 has {len(self.q0)} entries but n = {self.n}")
        if any(not math.isfinite(x) for x in self.q0):
            raise ConfigError("q0 must be finite")
        for name in ("displacement_samples", "deck_samples", "embedding_samples",
                     "symplectic_samples", "point_cloud_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 1e-8 <= self.fd_step <= 1e-3:
            raise ConfigError(f"fd_step must lie in [1e-8, 1e-3], got {self.fd_step}")
        if self.symplectic_tol <= 0:
            raise ConfigError("symplectic_tol must be positive")
        if self.deck_radius != "auto":
            try:
                if float(self.deck_radius) < 0:
                    raise ConfigError("deck_radius must be nonnegative")
            except ValueError as exc:
                raise ConfigError(f"bad deck_radius {self.deck_radius!r}") from exc
        if not 1 <= self.scan_N_min <= self.scan_N_max:
            raise ConfigError("scan range must satisfy 1 <= scan_N_min <= scan_N_max")
        return self

    @property
    def deck_radius_value(self) -> float | None:
        return None if self.deck_radius == "auto" else float(self.deck_radius)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["a"] = list(self.a)
        d["q0"] = list(self.q0)
        return d

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ", ".join(str(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _convert(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if key == "a":
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if key == "q0":
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw)
    return replace(base or RunConfig(), **values)


def parse_assignment(item: str) -> tuple[str, object]:
    if "=" not in item:
        raise ConfigError(f"expected KEY=VALUE, got {item!r}")
    key, raw = (s.strip() for s in item.split("=", 1))
    if key not in _TYPES:
        raise ConfigError(f"unknown key {key!r}")
    return key, _convert(key, raw)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
