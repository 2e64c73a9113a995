"""Staging store: the recovery point between extraction and transformation.

Layout under <workspace>/staging/:
    manifest.yaml                  batch registry, replaced atomically
    <id>-<kind>.accepted.csv       accepted rows, normalized
    <id>-<kind>.rejects.csv        line_no,reason,raw_line
    <id>-<kind>.quality.yaml       QualityReport
"""

import csv
import io
import logging
import os
import threading
from typing import Iterable, List, Optional

import yaml

from helpers.workspace_ops import dump_yaml, read_yaml, write_atomic, write_durable
from models.errors import StagingError
from models.quality import ParseResult, QualityReport
from models.staging_batch import LOADED, TRANSFORMED, StagingBatch, matches_state
from pipeline.ingest import PING_HEADER, PINGS, POS_HEADER, parse_pings, parse_pos

logger = logging.getLogger(__name__)

STAGING_DIR = 'staging'
MANIFEST_FILE = 'manifest.yaml'
REJECT_HEADER = ['line_no', 'reason', 'raw_line']

# The manifest is single-writer; stage calls within a process queue on this lock.
_manifest_lock = threading.Lock()


class StagingStore:
    def __init__(self, workspace: str):
        self.root = os.path.join(workspace, STAGING_DIR)

    @property
    def manifest_path(self) -> str:
        return os.path.join(self.root, MANIFEST_FILE)

    def exists(self) -> bool:
        return os.path.exists(self.manifest_path)

    def stage(self, result: ParseResult, source_file: str, checksum: str) -> StagingBatch:
        """
        Persist a parsed file as a new batch, or return the batch already holding these bytes.

        Args:
            result: output of parse_pings / parse_pos
            source_file: name recorded for provenance (basename only)
            checksum: sha256 hex digest of the source bytes

        Returns:
            StagingBatch: durable once this returns

        Raises:
            StagingError: STORAGE_FAILURE on any filesystem problem
        """
        kind = result.report.source_kind
        with _manifest_lock:
            manifest = self._read_manifest()
            for batch in manifest['batches']:
                if batch.checksum == checksum and batch.kind == kind:
                    logger.info("batch %d already holds %s (%s), not restaged", batch.batch_id, source_file, checksum[:12])
                    return batch

            batch = StagingBatch(
                batch_id=manifest['next_batch_id'],
                kind=kind,
                source_file=os.path.basename(source_file),
                checksum=checksum,
                state=LOADED,
                rows_accepted=result.report.rows_accepted,
                rows_rejected=result.report.rows_rejected,
            )
            try:
                write_durable(os.path.join(self.root, batch.accepted_file), _accepted_csv(result, kind))
                write_durable(os.path.join(self.root, batch.rejects_file), _rejects_csv(result))
                write_durable(os.path.join(self.root, batch.report_file), dump_yaml(result.report.to_dict()))
                manifest['batches'].append(batch)
                manifest['next_batch_id'] = batch.batch_id + 1
                self._write_manifest(manifest)
            except OSError as e:
                raise StagingError('STORAGE_FAILURE', f"cannot stage {source_file}: {e}")
            logger.info("staged %s as batch %d (%d accepted, %d rejected)", batch.source_file, batch.batch_id,
                        batch.rows_accepted, batch.rows_rejected)
            return batch

    def list_batches(self, state: Optional[str] = None) -> List[StagingBatch]:
        """Batches ordered by batch_id, optionally only those in the given state."""
        manifest = self._read_manifest()
        return [b for b in sorted(manifest['batches'], key=lambda b: b.batch_id) if matches_state(b, state)]

    def mark_transformed(self, batch_ids: Iterable[int]) -> None:
        ids = set(batch_ids)
        if not ids:
            return
        with _manifest_lock:
            manifest = self._read_manifest()
            for batch in manifest['batches']:
                if batch.batch_id in ids:
                    batch.state = TRANSFORMED
            try:
                self._write_manifest(manifest)
            except OSError as e:
                raise StagingError('STORAGE_FAILURE', f"cannot update staging manifest: {e}")

    def load_batch_rows(self, batch: StagingBatch) -> list:
        """Read a batch's accepted rows back as Ping or ReceiptLine objects."""
        data = self._read_bytes(batch.accepted_file)
        result = parse_pings(data) if batch.kind == PINGS else parse_pos(data)
        if result.rejects:
            raise StagingError('STORAGE_FAILURE', f"staged file {batch.accepted_file} no longer parses cleanly")
        return result.accepted

    def load_report(self, batch: StagingBatch) -> QualityReport:
        try:
            return QualityReport.from_dict(yaml.safe_load(self._read_bytes(batch.report_file)) or {})
        except yaml.YAMLError as e:
            raise StagingError('STORAGE_FAILURE', f"cannot read {batch.report_file}: {e}")

    def _read_bytes(self, name: str) -> bytes:
        try:
            with open(os.path.join(self.root, name), 'rb') as f:
                return f.read()
        except OSError as e:
            raise StagingError('STORAGE_FAILURE', f"cannot read staged file {name}: {e}")

    def _read_manifest(self) -> dict:
        try:
            data = read_yaml(self.manifest_path, default={})
        except (OSError, yaml.YAMLError) as e:
            raise StagingError('STORAGE_FAILURE', f"cannot read staging manifest: {e}")
        if not isinstance(data, dict):
            raise StagingError('STORAGE_FAILURE', "staging manifest is corrupt: not a mapping")
        try:
            batches = [StagingBatch.from_dict(b) for b in data.get('batches') or []]
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise StagingError('STORAGE_FAILURE', f"staging manifest is corrupt: {e}")
        next_id = max([int(data.get('next_batch_id') or 1)] + [b.batch_id + 1 for b in batches])
        return {'batches': batches, 'next_batch_id': next_id}

    def _write_manifest(self, manifest: dict) -> None:
        document = {
            'next_batch_id': manifest['next_batch_id'],
            'batches': [b.to_dict() for b in sorted(manifest['batches'], key=lambda b: b.batch_id)],
        }
        write_atomic(self.manifest_path, dump_yaml(document))


def _accepted_csv(result: ParseResult, kind: str) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(PING_HEADER if kind == PINGS else POS_HEADER)
    for row in result.accepted:
        writer.writerow(row.to_row())
    return buf.getvalue()


def _rejects_csv(result: ParseResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(REJECT_HEADER)
    for reject in result.rejects:
        writer.writerow([reject.line_no, reject.reason, reject.raw_line])
    return buf.getvalue()
