"""Workspace file operations: durable writes, YAML documents, the workspace lock."""

import os
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional

import yaml

from helpers.validation import format_timestamp
from models.errors import WorkspaceError
from models.run_manifest import RunManifest, StageRecord

LOCK_FILE = '.lock'
RUN_MANIFEST_FILE = 'run_manifest.yaml'


def write_durable(path: str, text: str) -> None:
    """Write text and fsync it so the bytes survive a crash once this returns."""
    os.makedirs(os.path.dirname(path) or '.', exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(text)
        f.flush()
        os.fsync(f.fileno())


def write_atomic(path: str, text: str) -> None:
    """Replace path in one step: readers see the old or the new file, never a mix."""
    tmp_path = f"{path}.tmp"
    write_durable(tmp_path, text)
    os.replace(tmp_path, path)


def dump_yaml(data: Any) -> str:
    return yaml.safe_dump(data, sort_keys=True, default_flow_style=False, allow_unicode=True)


def read_yaml(path: str, default: Optional[Any] = None) -> Any:
    if not os.path.exists(path):
        return default
    with open(path, 'r', encoding='utf-8') as f:
        data = yaml.safe_load(f)
    return default if data is None else data


@contextmanager
def workspace_lock(workspace: str):
    """Exclusive per-workspace lock; a second command gets WORKSPACE_BUSY."""
    os.makedirs(workspace, exist_ok=True)
    lock_path = os.path.join(workspace, LOCK_FILE)
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise WorkspaceError('WORKSPACE_BUSY', f"workspace {workspace} is locked by another command ({lock_path})")
    try:
        os.write(fd, str(os.getpid()).encode('ascii'))
        os.close(fd)
        yield
    finally:
        try:
            os.remove(lock_path)
        except FileNotFoundError:
            pass


def completed_at() -> str:
    """UTC completion stamp; SOURCE_DATE_EPOCH pins it for reproducible runs."""
    epoch = os.environ.get('SOURCE_DATE_EPOCH')
    if epoch and epoch.strip().isdigit():
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(timezone.utc).replace(microsecond=0)
    return format_timestamp(moment)


def read_run_manifest(workspace: str) -> RunManifest:
    path = os.path.join(workspace, RUN_MANIFEST_FILE)
    try:
        data = read_yaml(path, default={})
    except (OSError, yaml.YAMLError) as e:
        raise WorkspaceError('STORAGE_FAILURE', f"cannot read {path}: {e}")
    if not isinstance(data, dict):
        raise WorkspaceError('STORAGE_FAILURE', f"{path} is not a run manifest")
    manifest = RunManifest.from_dict(data)
    manifest.workspace = manifest.workspace or workspace
    return manifest


def record_stage(workspace: str, digest: str, stage: str, batch_ids: List[int], rows: Dict[str, int]) -> RunManifest:
    """Append a completed stage to <workspace>/run_manifest.yaml."""
    manifest = read_run_manifest(workspace)
    manifest.config_digest = digest
    manifest.stages.append(StageRecord(stage, sorted(batch_ids), completed_at(), rows))
    try:
        write_atomic(os.path.join(workspace, RUN_MANIFEST_FILE), dump_yaml(manifest.to_dict()))
    except OSError as e:
        raise WorkspaceError('STORAGE_FAILURE', f"cannot write run manifest: {e}")
    return manifest
