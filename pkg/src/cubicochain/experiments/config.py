"""Experiment configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from ..io import FormatError, load_json


@dataclass
class ExperimentConfig:
    """Parameters shared by the experiment runners.

    Unset fields (``None``) fall back to each runner's defaults; runner-specific
    settings go in ``options``.
    """

    name: str
    n: int | None = None
    h: float | None = None
    box: int | None = None
    p: float | None = None
    q: float | None = None
    alpha: float | None = None
    beta: float | None = None
    radii: list | None = None
    levels: int | None = None
    tol: float = 1e-9
    seed: int = 0
    out: str | None = None
    options: dict = field(default_factory=dict)

    def get(self, key: str, default=None):
        """Field value if set, else ``options[key]``, else ``default``."""
        if key in _FIELDS and key != "options":
            v = getattr(self, key)
            if v is not None:
                return v
        return self.options.get(key, default)

    def with_defaults(self, defaults: dict) -> "ExperimentConfig":
        upd = {}
        opts = dict(defaults.get("options", {}))
        opts.update(self.options)
        for k, v in defaults.items():
            if k == "options":
                continue
            if k in _FIELDS:
                if getattr(self, k) is None:
                    upd[k] = v
            elif k not in opts:
                opts[k] = v
        return dataclasses.replace(self, options=opts, **upd)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict, name: str | None = None) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise FormatError("config must be a JSON object")
        d = dict(d)
        name = name or d.pop("name", None) or d.pop("experiment", None)
        d.pop("name", None)
        d.pop("experiment", None)
        if not name:
            raise FormatError("config needs an experiment name")
        known = {k: d.pop(k) for k in list(d) if k in _FIELDS}
        opts = dict(known.pop("options", {}) or {})
        opts.update(d)  # unknown keys become options
        try:
            return cls(name=name, options=opts, **known)
        except TypeError as exc:
            raise FormatError(f"bad config: {exc}") from exc

    @classmethod
    def load(cls, path, name: str | None = None) -> "ExperimentConfig":
        return cls.from_dict(load_json(path), name)


_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


class HypothesisError(ValueError):
    """Parameters outside the range where the experiment's statement applies."""
