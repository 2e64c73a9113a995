from dataclasses import dataclass, asdict, field
from datetime import timedelta, timezone
import os
import re

import yaml

from models.errors import ConfigError

CONFIG_FILE = 'rfidmart_config.yaml'

_OFFSET_RE = re.compile(r'^([+-])(\d{2}):(\d{2})$')


@dataclass
class SegmentationConfig:
    stop_radius_m: float = 1.0
    min_stop_duration_s: float = 10.0
    max_gap_s: float = 30.0


@dataclass
class AppConfig:
    segmentation: SegmentationConfig = field(default_factory=SegmentationConfig)
    store_utc_offset: str = '+00:00'  # store-local day boundary
    default_format: str = 'table'     # 'table', 'report' or 'csv'

    def __post_init__(self):
        if isinstance(self.segmentation, dict):
            self.segmentation = SegmentationConfig(**self.segmentation)
        for name in ('stop_radius_m', 'min_stop_duration_s', 'max_gap_s'):
            value = getattr(self.segmentation, name)
            if not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError('INVALID_CONFIG', f"segmentation.{name} must be a positive number, got {value!r}")
        parse_utc_offset(self.store_utc_offset)
        if self.default_format not in ('table', 'report', 'csv'):
            raise ConfigError('INVALID_CONFIG', f"default_format must be table, report or csv, got {self.default_format!r}")

    @property
    def tzinfo(self) -> timezone:
        return parse_utc_offset(self.store_utc_offset)


def parse_utc_offset(text: str) -> timezone:
    """Parse '+03:00' style offsets into a fixed timezone."""
    match = _OFFSET_RE.match(str(text))
    if not match:
        raise ConfigError('INVALID_CONFIG', f"store_utc_offset must look like +HH:MM, got {text!r}")
    sign, hours, minutes = match.groups()
    delta = timedelta(hours=int(hours), minutes=int(minutes))
    return timezone(-delta if sign == '-' else delta)


def load_config(path: str = None) -> AppConfig:
    path = path or CONFIG_FILE
    if os.path.exists(path):
        with open(path, 'r', encoding='utf-8') as f:
            try:
                data = yaml.safe_load(f) or {}
            except yaml.YAMLError as e:
                raise ConfigError('INVALID_CONFIG', f"cannot parse {path}: {str(e).splitlines()[0]}")
        if not isinstance(data, dict):
            raise ConfigError('INVALID_CONFIG', f"{path} must contain a mapping")
        try:
            return AppConfig(**data)
        except TypeError as e:
            raise ConfigError('INVALID_CONFIG', f"{path}: {e}")
    return AppConfig()


def save_config(config: AppConfig, path: str = None):
    with open(path or CONFIG_FILE, 'w', encoding='utf-8') as f:
        yaml.safe_dump(asdict(config), f, default_flow_style=False, sort_keys=True)
