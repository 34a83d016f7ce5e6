"""Run configuration: a flat key=value file with CLI flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

__all__ = ["RunConfig", "parse_keyvalue", "load_run_config"]


def parse_keyvalue(text: str) -> dict[str, str]:
    """Parse `key = value` lines; blank lines and `#` comments are skipped."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {line_no}: expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out


_PATH_KEYS = ("manifest", "embeddings", "checkpoint", "out_dir")


@dataclass
class RunConfig:
    """Everything a pipeline run needs: paths, hyperparameters, tolerances."""

    manifest: Path | None = None
    embeddings: Path | None = None
    checkpoint: Path | None = None
    out_dir: Path = field(default_factory=lambda: Path("out"))
    embed_dim: int | None = None  # derived from the embeddings file when unset
    hidden1: int = 96
    hidden2: int = 96
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_epsilon: float = 1e-8
    batch_size: int = 32
    epochs: int = 30
    seed: int = 7
    conservation_rel_tol: float = 1e-6
    conservation_abs_tol: float = 1e-12
    arc_base_width: float = 0.5
    arc_width_scale: float = 5.8
    arc_max_width: float = 3.0

    def __post_init__(self) -> None:
        for name in ("hidden1", "hidden2", "batch_size", "epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"config: {name} must be positive")
        if self.embed_dim is not None and self.embed_dim <= 0:
            raise ValueError("config: embed_dim must be positive")
        if self.arc_max_width < self.arc_base_width:
            raise ValueError("config: arc_max_width must be >= arc_base_width")


def _coerce(name: str, kind: type, value: str):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError:
        raise ValueError(f"config: {name} expects a {kind.__name__}, got {value!r}") from None
    return value


def load_run_config(
    path: Path | str | None = None, overrides: dict[str, str] | None = None
) -> RunConfig:
    """Build a RunConfig from an optional file plus override pairs.

    Paths in the file resolve relative to the file's directory; paths given
    as overrides resolve relative to the current directory.
    """
    known = {f.name: f for f in fields(RunConfig)}
    raw: dict[str, object] = {}
    if path is not None:
        path = Path(path)
        base = path.parent
        for key, value in parse_keyvalue(path.read_text(encoding="utf-8")).items():
            if key not in known:
                raise ValueError(f"config: unknown key {key!r} in {path}")
            if key in _PATH_KEYS:
                raw[key] = base / value
            else:
                raw[key] = value
    for key, value in (overrides or {}).items():
        if key not in known:
            raise ValueError(f"config: unknown key {key!r}")
        raw[key] = Path(value) if key in _PATH_KEYS else value
    for key, value in list(raw.items()):
        if key not in _PATH_KEYS and isinstance(value, str):
            int_fields = {"embed_dim", "hidden1", "hidden2", "batch_size", "epochs", "seed"}
            raw[key] = _coerce(key, int if key in int_fields else float, value)
    return RunConfig(**raw)  # type: ignore[arg-type]
