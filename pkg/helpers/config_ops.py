import hashlib
from dataclasses import asdict

import yaml

from models.config_model import AppConfig, load_config
from models.segment import SegmentationParams


def config_digest(config: AppConfig) -> str:
    """SHA-256 of the canonical YAML dump of the effective config."""
    canonical = yaml.safe_dump(asdict(config), sort_keys=True, default_flow_style=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def segmentation_params(config: AppConfig) -> SegmentationParams:
    seg = config.segmentation
    return SegmentationParams(
        stop_radius_m=float(seg.stop_radius_m),
        min_stop_duration_s=float(seg.min_stop_duration_s),
        max_gap_s=float(seg.max_gap_s),
    )


def resolve_config(path: str = None) -> AppConfig:
    return load_config(path)
