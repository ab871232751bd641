"""Pipeline configuration: one aggregate of every stage's settings.

Configs load from YAML (nested sections mirroring the dataclass layout),
serialize back to an identical value, and hash stably so runs can refuse to
resume under a changed configuration.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from smokescan.change import ChangeThresholds, ClaheParams, DogParams, SmoothParams
from smokescan.events import EventParams
from smokescan.ingest import RoiSpec
from smokescan.regions import RegionThresholds
from smokescan.texture import TextureParams


@dataclass(frozen=True)
class PipelineConfig:
    roi: RoiSpec = field(
        default_factory=lambda: RoiSpec(x=0, y=0, width=496, height=528, downsample=4)
    )
    background_window: int = 60
    day_start: int = 0
    day_end: Optional[int] = None
    seed: int = 0
    workers: int = 1
    dump_stages: bool = False
    seconds_per_frame: float = 5.0
    downsample_method: str = "block_mean"
    dog: DogParams = field(default_factory=DogParams)
    change_thresholds: ChangeThresholds = field(default_factory=ChangeThresholds)
    smooth: SmoothParams = field(default_factory=SmoothParams)
    clahe: ClaheParams = field(default_factory=ClaheParams)
    texture: TextureParams = field(default_factory=TextureParams)
    regions: RegionThresholds = field(default_factory=RegionThresholds)
    events: EventParams = field(default_factory=EventParams)

    def to_dict(self) -> dict[str, Any]:
        return _asdict_clean(self)

    def hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


_SECTION_TYPES = {
    "roi": RoiSpec,
    "dog": DogParams,
    "change_thresholds": ChangeThresholds,
    "smooth": SmoothParams,
    "clahe": ClaheParams,
    "texture": TextureParams,
    "regions": RegionThresholds,
    "events": EventParams,
}

_TUPLE_FIELDS = {
    ("clahe", "tiles"),
    ("regions", "gray_diff"),
    ("regions", "white_min"),
}


def _asdict_clean(obj: Any) -> Any:
    if dataclasses.is_dataclass(obj):
        return {
            f.name: _asdict_clean(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
        }
    if isinstance(obj, tuple):
        return [_asdict_clean(v) for v in obj]
    return obj


def config_from_dict(data: dict[str, Any]) -> PipelineConfig:
    kwargs: dict[str, Any] = {}
    known = {f.name for f in dataclasses.fields(PipelineConfig)}
    for key, value in data.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key in _SECTION_TYPES:
            if not isinstance(value, dict):
                raise ValueError(f"config section {key!r} must be a mapping")
            section_cls = _SECTION_TYPES[key]
            section_known = {f.name for f in dataclasses.fields(section_cls)}
            section_kwargs = {}
            for name, v in value.items():
                if name not in section_known:
                    raise ValueError(f"unknown key {key}.{name}")
                if (key, name) in _TUPLE_FIELDS and isinstance(v, list):
                    v = tuple(v)
                section_kwargs[name] = v
            kwargs[key] = section_cls(**section_kwargs)
        else:
            kwargs[key] = value
    return PipelineConfig(**kwargs)


def load_config(path: Path) -> PipelineConfig:
    data = yaml.safe_load(Path(path).read_text())
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must hold a mapping")
    return config_from_dict(data)


def save_config(config: PipelineConfig, path: Path) -> None:
    Path(path).write_text(dump_config(config))


def dump_config(config: PipelineConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=None)
