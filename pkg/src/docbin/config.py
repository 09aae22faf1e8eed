"""JSON run configuration.

Layout (all sections optional, defaults shown by ``RunConfig().to_dict()``)::

    {"hybrid": {...}, "clahe": {...}, "nick": {...}, "niblack": {...},
     "sauvola": {...}, "bernsen": {...}, "postprocess": {...},
     "metrics": {...}, "local_stats": "integral"}

Unknown keys are rejected. Individual values are addressed by dotted paths
(``"nick.window"``) or, when unambiguous, by their bare name (``"k_smear"``).
"""
from __future__ import annotations

import copy
import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Tuple

from .enhance import ClaheParams
from .errors import InvalidParams
from .hybrid import HybridParams
from .metrics import CRITERIA
from .threshold_local import (
    BERNSEN_DEFAULTS,
    MODES,
    NIBLACK_DEFAULTS,
    SAUVOLA_DEFAULTS,
    LocalParams,
)

__all__ = ["RunConfig", "load_config", "resolve_key", "config_keys"]

_NUM = "number"
_INT = "int"
_BOOL = "bool"
_STR = "str"
_PAIR = "int pair"

_SCHEMA: Dict[str, Dict[str, str]] = {
    "hybrid": {
        "t1": _NUM, "t2": _NUM, "t3": _NUM, "d_min": _NUM, "d_max": _NUM, "p": _NUM,
        "k_smear": _NUM, "segment": _INT, "groups": _INT, "t_ctr": _NUM,
    },
    "clahe": {"tile_grid": _PAIR, "clip_limit": _NUM, "epsilon": _NUM},
    "nick": {"window": _INT, "k": _NUM},
    "niblack": {"window": _INT, "k": _NUM},
    "sauvola": {"window": _INT, "k": _NUM, "r": _NUM},
    "bernsen": {"window": _INT, "contrast_min": _INT, "low_contrast_class": _STR},
    "postprocess": {"lambda": _NUM, "enabled": _BOOL},
    "metrics": {c: _BOOL for c in CRITERIA},
}
_TOP_LEVEL = {"local_stats": _STR}


def _check_type(path: str, kind: str, value: Any):
    if kind == _BOOL:
        ok = isinstance(value, bool)
    elif kind == _STR:
        ok = isinstance(value, str)
    elif kind == _INT:
        ok = isinstance(value, numbers.Integral) and not isinstance(value, bool)
        if not ok and isinstance(value, float) and value.is_integer():
            value, ok = int(value), True
    elif kind == _NUM:
        ok = isinstance(value, numbers.Real) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = (isinstance(value, (list, tuple)) and len(value) == 2
              and all(isinstance(v, numbers.Integral) and not isinstance(v, bool) for v in value))
        value = tuple(int(v) for v in value) if ok else value
    if not ok:
        raise InvalidParams(f"{path}: expected {kind}, got {value!r}")
    return value


@dataclass(frozen=True)
class RunConfig:
    hybrid: HybridParams = field(default_factory=HybridParams)
    niblack: LocalParams = NIBLACK_DEFAULTS
    sauvola: LocalParams = SAUVOLA_DEFAULTS
    bernsen: LocalParams = BERNSEN_DEFAULTS
    postprocess: bool = True
    metrics: Tuple[str, ...] = CRITERIA
    local_stats: str = "integral"

    @property
    def nick(self) -> LocalParams:
        return self.hybrid.nick

    def to_dict(self) -> Dict[str, Any]:
        h = self.hybrid
        return {
            "hybrid": {
                "t1": h.t1, "t2": h.t2, "t3": h.t3, "d_min": h.d_min, "d_max": h.d_max,
                "p": h.p, "k_smear": h.k_smear, "segment": h.segment, "groups": h.groups,
                "t_ctr": h.t_ctr,
            },
            "clahe": {
                "tile_grid": list(h.clahe.tile_grid),
                "clip_limit": h.clahe.clip_limit,
                "epsilon": h.clahe.epsilon,
            },
            "nick": {"window": h.nick.window, "k": h.nick.k},
            "niblack": {"window": self.niblack.window, "k": self.niblack.k},
            "sauvola": {"window": self.sauvola.window, "k": self.sauvola.k, "r": self.sauvola.r},
            "bernsen": {
                "window": self.bernsen.window,
                "contrast_min": self.bernsen.bernsen_contrast_min,
                "low_contrast_class": self.bernsen.bernsen_low_contrast_class,
            },
            "postprocess": {"lambda": h.lam, "enabled": self.postprocess},
            "metrics": {c: c in self.metrics for c in CRITERIA},
            "local_stats": self.local_stats,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "RunConfig":
        if not isinstance(raw, dict):
            raise InvalidParams("config must be a JSON object")
        merged = RunConfig().to_dict()
        for key, value in raw.items():
            if key in _TOP_LEVEL:
                merged[key] = _check_type(key, _TOP_LEVEL[key], value)
                continue
            if key not in _SCHEMA:
                raise InvalidParams(f"unknown config section {key!r}")
            if not isinstance(value, dict):
                raise InvalidParams(f"{key}: expected an object")
            for sub, v in value.items():
                if sub not in _SCHEMA[key]:
                    raise InvalidParams(f"unknown config key {key}.{sub}")
                merged[key][sub] = _check_type(f"{key}.{sub}", _SCHEMA[key][sub], v)
        return cls._build(merged)

    @classmethod
    def _build(cls, d: Dict[str, Any]) -> "RunConfig":
        if d["local_stats"] not in MODES:
            raise InvalidParams(f"local_stats must be one of {MODES}")
        hy, cl, pp = d["hybrid"], d["clahe"], d["postprocess"]
        nick = LocalParams(window=d["nick"]["window"], k=d["nick"]["k"])
        hybrid = HybridParams(
            t1=hy["t1"], t2=hy["t2"], t3=hy["t3"], d_min=hy["d_min"], d_max=hy["d_max"],
            p=hy["p"], k_smear=hy["k_smear"], segment=hy["segment"], groups=hy["groups"],
            t_ctr=hy["t_ctr"], nick=nick, lam=pp["lambda"],
            clahe=ClaheParams(tuple(cl["tile_grid"]), cl["clip_limit"], cl["epsilon"]),
        )
        be = d["bernsen"]
        return cls(
            hybrid=hybrid,
            niblack=LocalParams(window=d["niblack"]["window"], k=d["niblack"]["k"]),
            sauvola=LocalParams(window=d["sauvola"]["window"], k=d["sauvola"]["k"], r=d["sauvola"]["r"]),
            bernsen=LocalParams(window=be["window"], k=0.0, bernsen_contrast_min=be["contrast_min"],
                                bernsen_low_contrast_class=be["low_contrast_class"]),
            postprocess=pp["enabled"],
            metrics=tuple(c for c in CRITERIA if d["metrics"][c]),
            local_stats=d["local_stats"],
        )

    def with_value(self, key: str, value: Any) -> "RunConfig":
        """Copy with one value replaced; ``key`` as accepted by :func:`resolve_key`."""
        path = resolve_key(key)
        d = copy.deepcopy(self.to_dict())
        if len(path) == 1:
            d[path[0]] = value
        else:
            d[path[0]][path[1]] = value
        return RunConfig.from_dict(d)


def config_keys():
    keys = [f"{s}.{k}" for s, sub in _SCHEMA.items() for k in sub]
    return keys + list(_TOP_LEVEL)


def resolve_key(key: str) -> Tuple[str, ...]:
    """Map a dotted or bare key to its (section, name) path."""
    if key in _TOP_LEVEL:
        return (key,)
    if "." in key:
        section, _, name = key.partition(".")
        if section in _SCHEMA and name in _SCHEMA[section]:
            return (section, name)
        raise InvalidParams(f"unknown config key {key!r}")
    hits = [(s, key) for s, sub in _SCHEMA.items() if key in sub]
    if len(hits) == 1:
        return hits[0]
    if not hits:
        raise InvalidParams(f"unknown config key {key!r}")
    raise InvalidParams(f"ambiguous key {key!r}; use one of " + ", ".join(".".join(h) for h in hits))


def load_config(path=None) -> RunConfig:
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParams(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(raw)
